#include "bugport/case_generator.h"

#include <cctype>
#include <cstdio>

#include "bugport/errors.h"
#include "bugport/records.h"
#include "bugport/validate.h"

namespace bugport {
namespace {

bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string ReplaceWholeToken(std::string_view text, std::string_view token,
                              std::string_view replacement) {
  if (token.empty()) return std::string(text);
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t hit = text.find(token, pos);
    if (hit == std::string_view::npos) break;
    const std::size_t end = hit + token.size();
    const bool left_ok = hit == 0 || !IsIdentChar(text[hit - 1]);
    const bool right_ok = end == text.size() || !IsIdentChar(text[end]);
    if (left_ok && right_ok) {
      out.append(text.substr(pos, hit - pos));
      out.append(replacement);
      pos = end;
    } else {
      out.append(text.substr(pos, hit + 1 - pos));
      pos = hit + 1;
    }
  }
  out.append(text.substr(pos));
  return out;
}

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Rebinds one call from `source` to `target`; both resolution steps apply.
StructuredCall RetargetCall(const StructuredCall& call,
                            const ApiSignature& source,
                            const ApiSignature& target, GenerationLog* log) {
  StructuredCall out = ResolveArgumentDifference(call, target, log);
  return ResolveDimensionDifference(out, source, target, log);
}

}  // namespace

std::string_view ToString(Transform::Kind kind) {
  switch (kind) {
    case Transform::Kind::kDropArg: return "drop-arg";
    case Transform::Kind::kRankExpand: return "rank-expand";
    case Transform::Kind::kRankShrink: return "rank-shrink";
    case Transform::Kind::kRecipeRetarget: return "recipe-retarget";
  }
  return "?";
}

std::optional<Transform::Kind> ParseTransformKind(std::string_view text) {
  for (auto k : {Transform::Kind::kDropArg, Transform::Kind::kRankExpand,
                 Transform::Kind::kRankShrink,
                 Transform::Kind::kRecipeRetarget}) {
    if (ToString(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view ToString(SkipReason reason) {
  switch (reason) {
    case SkipReason::kInfeasibleDirection: return "InfeasibleDirection";
    case SkipReason::kRankUnresolvable: return "RankUnresolvable";
    case SkipReason::kRecipeRetargetFailure: return "RecipeRetargetFailure";
  }
  return "?";
}

std::optional<SkipReason> ParseSkipReason(std::string_view text) {
  for (auto r : {SkipReason::kInfeasibleDirection, SkipReason::kRankUnresolvable,
                 SkipReason::kRecipeRetargetFailure}) {
    if (ToString(r) == text) return r;
  }
  return std::nullopt;
}

bool FeasibleDirection(const StructuredCall& call, const ApiSignature& target) {
  for (const auto& p : target.required) {
    if (!call.args.contains(p.name)) return false;
  }
  return true;
}

bool FeasibleDirection(const BugCase& bug, const ApiSignature& target) {
  return FeasibleDirection(bug.call, target);
}

std::string ReplaceApiName(std::string_view text, std::string_view api,
                           std::string_view replacement) {
  std::string out = ReplaceWholeToken(text, api, replacement);
  std::string_view terminal = TerminalSegment(api);
  if (terminal != api) {
    out = ReplaceWholeToken(out, terminal, TerminalSegment(replacement));
  }
  return out;
}

StructuredCall ResolveArgumentDifference(const StructuredCall& call,
                                         const ApiSignature& target,
                                         GenerationLog* log) {
  if (!FeasibleDirection(call, target)) {
    std::string missing;
    for (const auto& p : target.required) {
      if (!call.args.contains(p.name)) missing += (missing.empty() ? "" : ",") + p.name;
    }
    throw InfeasibleDirectionError("'" + target.name + "' requires unbound " +
                                   missing);
  }
  StructuredCall out;
  out.api = target.name;
  std::vector<std::string> dropped;
  for (const auto& [name, value] : call.args) {
    if (target.HasParam(name)) {
      out.args.emplace(name, value);
    } else {
      dropped.push_back(name);
      if (log) log->transforms.push_back({Transform::Kind::kDropArg, name});
    }
  }
  for (const auto& fragment : call.setup) {
    std::string rewritten = ReplaceApiName(fragment, call.api, target.name);
    if (log) {
      for (const auto& name : dropped) {
        if (ReplaceWholeToken(rewritten, name, "") != rewritten) {
          log->warnings.push_back("setup fragment mentions dropped argument '" +
                                  name + "': " + rewritten);
        }
      }
    }
    out.setup.push_back(std::move(rewritten));
  }
  return out;
}

ShapeTuple ResizeRank(const ShapeTuple& shape, std::size_t rank) {
  ShapeTuple out = shape;
  if (rank < out.dims.size()) {
    out.dims.resize(rank);
  } else if (rank > out.dims.size()) {
    if (out.dims.empty()) {
      throw RankUnresolvableError("cannot expand an empty shape tuple");
    }
    out.dims.resize(rank, out.dims.back());
  }
  return out;
}

StructuredCall ResolveDimensionDifference(const StructuredCall& call,
                                          const ApiSignature& source,
                                          const ApiSignature& target,
                                          GenerationLog* log) {
  StructuredCall out = call;
  for (auto& [name, value] : out.args) {
    const ParamSpec* ps = source.FindParam(name);
    const ParamSpec* pt = target.FindParam(name);
    if (pt == nullptr || !pt->rank) continue;
    const std::size_t want = static_cast<std::size_t>(*pt->rank);
    if (!value.is_shape()) {
      if (ps != nullptr && ps->rank && *ps->rank != *pt->rank) {
        throw RankUnresolvableError("argument '" + name +
                                    "' changes rank but is not a shape tuple");
      }
      continue;
    }
    const std::size_t have = value.as_shape().dims.size();
    if (have == want) continue;
    value = Value(ResizeRank(value.as_shape(), want));
    if (log) {
      log->transforms.push_back(
          {want > have ? Transform::Kind::kRankExpand : Transform::Kind::kRankShrink,
           name + ":" + std::to_string(have) + "->" + std::to_string(want)});
    }
  }
  return out;
}

OracleSpec PortOracle(const OracleSpec& oracle, const ApiSignature& source,
                      const ApiSignature& target, GenerationLog* log) {
  if (const auto* status = std::get_if<StatusOracle>(&oracle)) {
    StatusOracle out = *status;
    out.exception.message =
        ReplaceApiName(out.exception.message, source.name, kApiSlot);
    return out;
  }
  if (const auto* value = std::get_if<ValueOracle>(&oracle)) {
    ValueOracle out = *value;
    if (out.detail) out.detail = ReplaceApiName(*out.detail, source.name, kApiSlot);
    return out;
  }
  PerformanceOracle out = std::get<PerformanceOracle>(oracle);
  auto retarget = [&](MeasurementRecipe& recipe, std::string_view slot) {
    for (std::size_t i = 0; i < recipe.body.size(); ++i) {
      StructuredCall& call = recipe.body[i];
      if (call.api != source.name) continue;
      const std::string where =
          std::string(slot) + "[" + std::to_string(i) + "]";
      GenerationLog inner;
      try {
        call = RetargetCall(call, source, target, &inner);
      } catch (const Error& e) {
        throw RecipeRetargetError(where + ": " + e.what());
      }
      if (log) {
        log->transforms.push_back({Transform::Kind::kRecipeRetarget, where});
        log->warnings.insert(log->warnings.end(), inner.warnings.begin(),
                             inner.warnings.end());
      }
    }
  };
  retarget(out.baseline, "baseline");
  retarget(out.subject, "subject");
  return out;
}

std::string Fingerprint(const StructuredCall& call) {
  Json args = Json::object();
  for (const auto& [name, value] : call.args) args[name] = ToJson(value);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(args.dump())));
  return call.api + "#" + hex;
}

SynthesisResult Synthesize(const BugCase& bug, const CandidatePair& pair,
                           const Corpus& corpus) {
  if (!pair.verdict.accept) {
    throw Error("cannot synthesize from a rejected pair " + pair.source +
                " / " + pair.target);
  }
  if (bug.api != pair.source && bug.api != pair.target) {
    throw Error("bug case '" + bug.id + "' is not on pair " + pair.source +
                " / " + pair.target);
  }
  const CandidatePair oriented = pair.Oriented(bug.api);
  const ApiSignature& source = corpus.Signature(oriented.source);
  const ApiSignature& target = corpus.Signature(oriented.target);

  auto skip = [&](SkipReason reason, std::string detail) {
    return Skip{bug.id, target.name, reason, std::move(detail)};
  };

  if (!FeasibleDirection(bug, target)) {
    return skip(SkipReason::kInfeasibleDirection,
                "target requires arguments the source call never binds");
  }

  GenerationLog log;
  SynthesizedCase out;
  out.id = bug.id + "@" + target.name;
  out.source_case_id = bug.id;
  out.source_api = source.name;
  out.target_api = target.name;
  out.call = ResolveArgumentDifference(bug.call, target, &log);
  try {
    out.call = ResolveDimensionDifference(out.call, source, target, &log);
  } catch (const RankUnresolvableError& e) {
    return skip(SkipReason::kRankUnresolvable, e.what());
  }
  try {
    out.oracle = PortOracle(bug.oracle, source, target, &log);
  } catch (const RecipeRetargetError& e) {
    return skip(SkipReason::kRecipeRetargetFailure, e.what());
  }

  auto violations = ValidateCall(out.call, target);
  if (!violations.empty()) {
    return skip(SkipReason::kRankUnresolvable,
                "synthesized call does not validate: " + Describe(violations));
  }
  out.transforms = std::move(log.transforms);
  out.warnings = std::move(log.warnings);
  out.fingerprint = Fingerprint(out.call);
  return out;
}

std::string SerializeCases(const std::vector<SynthesizedCase>& cases) {
  std::string out;
  for (const auto& c : cases) {
    out += ToJson(c).dump();
    out += '\n';
  }
  return out;
}

std::vector<SynthesizedCase> ParseCases(const std::string& text) {
  std::vector<SynthesizedCase> cases;
  ForEachRecord(text, "cases", [&](const Json& record, const std::string&) {
    if (record.value("kind", "") != "synthesized_case") {
      throw ParseError("expected a synthesized_case record");
    }
    cases.push_back(CaseFromJson(record));
  });
  return cases;
}

}  // namespace bugport
