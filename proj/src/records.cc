#include "bugport/records.h"

#include <set>

#include "bugport/case_generator.h"
#include "bugport/context_matcher.h"
#include "bugport/errors.h"
#include "bugport/oracle_evaluator.h"
#include "bugport/static_analyzer.h"

namespace bugport {
namespace {

const Json& Field(const Json& j, const char* key) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T Get(const Json& j, const char* key) {
  try {
    return Field(j, key).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> GetOptional(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return Get<T>(j, key);
}

template <typename T>
T GetOr(const Json& j, const char* key, T fallback) {
  return GetOptional<T>(j, key).value_or(std::move(fallback));
}

template <typename E, typename Parser>
E GetEnum(const Json& j, const char* key, Parser parse) {
  const auto text = Get<std::string>(j, key);
  auto parsed = parse(text);
  if (!parsed) {
    throw ParseError(std::string("field '") + key + "': unknown value '" + text + "'");
  }
  return *parsed;
}

TokenSet GetTokens(const Json& j, const char* key, bool normalize) {
  TokenSet out;
  if (!j.contains(key)) return out;
  for (const auto& s : Get<std::vector<std::string>>(j, key)) {
    std::string token = normalize ? NormalizeToken(s) : s;
    if (token.empty()) throw ParseError(std::string("empty token in '") + key + "'");
    out.insert(std::move(token));
  }
  return out;
}

Json TokensToJson(const TokenSet& tokens) {
  return Json(std::vector<std::string>(tokens.begin(), tokens.end()));
}

std::string RequireName(const Json& j, const char* key) {
  auto name = Get<std::string>(j, key);
  if (name.empty()) throw ParseError(std::string("field '") + key + "' is empty");
  return name;
}

Json ExceptionToJson(const ExceptionSignature& sig) {
  return {{"type", sig.type}, {"message", sig.message}};
}

ExceptionSignature ExceptionFromJson(const Json& j) {
  return {RequireName(j, "type"), GetOr<std::string>(j, "message", "")};
}

}  // namespace

Json ToJson(const Value& value) {
  if (value.is_int()) return value.as_int();
  if (value.is_double()) return value.as_double();
  if (value.is_bool()) return value.as_bool();
  if (value.is_string()) return value.as_string();
  if (value.is_shape()) return Json{{"shape", value.as_shape().dims}};
  Json arr = Json::array();
  for (const auto& item : value.as_list()) arr.push_back(ToJson(item));
  return arr;
}

Value ValueFromJson(const Json& j) {
  switch (j.type()) {
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
      return Value(j.get<std::int64_t>());
    case Json::value_t::number_float:
      return Value(j.get<double>());
    case Json::value_t::boolean:
      return Value(j.get<bool>());
    case Json::value_t::string:
      return Value(j.get<std::string>());
    case Json::value_t::array: {
      Value::List items;
      for (const auto& item : j) items.push_back(ValueFromJson(item));
      return Value(std::move(items));
    }
    case Json::value_t::object: {
      if (j.size() != 1 || !j.contains("shape")) {
        throw ParseError("object values must be {\"shape\": [...]}");
      }
      auto dims = Get<std::vector<std::int64_t>>(j, "shape");
      for (auto d : dims) {
        if (d < 1) throw ParseError("shape extents must be >= 1");
      }
      return Value::Shape(std::move(dims));
    }
    default:
      throw ParseError("unsupported value '" + j.dump() + "'");
  }
}

Json ToJson(const ParamSpec& param) {
  Json j = {{"name", param.name}};
  if (param.rank) j["rank"] = *param.rank;
  if (param.default_value) j["default"] = ToJson(*param.default_value);
  return j;
}

ParamSpec ParamFromJson(const Json& j) {
  ParamSpec p;
  p.name = RequireName(j, "name");
  p.rank = GetOptional<int>(j, "rank");
  if (p.rank && *p.rank < 0) {
    throw ParseError("parameter '" + p.name + "' has a negative rank");
  }
  if (j.contains("default")) p.default_value = ValueFromJson(j.at("default"));
  return p;
}

Json ToJson(const StructuredCall& call) {
  Json args = Json::object();
  for (const auto& [name, value] : call.args) args[name] = ToJson(value);
  return {{"api", call.api}, {"args", args}, {"setup", call.setup}};
}

StructuredCall CallFromJson(const Json& j) {
  StructuredCall call;
  call.api = RequireName(j, "api");
  if (j.contains("args")) {
    const Json& args = j.at("args");
    if (!args.is_object()) throw ParseError("field 'args' must be an object");
    for (auto it = args.begin(); it != args.end(); ++it) {
      call.args.emplace(it.key(), ValueFromJson(it.value()));
    }
  }
  call.setup = GetOr<std::vector<std::string>>(j, "setup", {});
  return call;
}

Json ToJson(const MeasurementRecipe& recipe) {
  Json body = Json::array();
  for (const auto& call : recipe.body) body.push_back(ToJson(call));
  return {{"metric", ToString(recipe.metric)},
          {"repetitions", recipe.repetitions},
          {"warmup_runs", recipe.warmup_runs},
          {"body", body}};
}

MeasurementRecipe RecipeFromJson(const Json& j) {
  MeasurementRecipe r;
  r.metric = GetEnum<Metric>(j, "metric", ParseMetric);
  r.repetitions = GetOr<int>(j, "repetitions", 5);
  r.warmup_runs = GetOr<int>(j, "warmup_runs", 1);
  if (r.repetitions < 1) throw ParseError("repetitions must be >= 1");
  if (r.warmup_runs < 0) throw ParseError("warmup_runs must be >= 0");
  for (const auto& call : Get<Json>(j, "body")) r.body.push_back(CallFromJson(call));
  return r;
}

Json ToJson(const OracleSpec& oracle) {
  if (const auto* s = std::get_if<StatusOracle>(&oracle)) {
    return {{"kind", "status"}, {"exception", ExceptionToJson(s->exception)}};
  }
  if (const auto* v = std::get_if<ValueOracle>(&oracle)) {
    Json j = {{"kind", "value"}, {"pattern", ToString(v->pattern)}};
    if (v->detail) j["detail"] = *v->detail;
    return j;
  }
  const auto& p = std::get<PerformanceOracle>(oracle);
  return {{"kind", "performance"},
          {"baseline", ToJson(p.baseline)},
          {"subject", ToJson(p.subject)},
          {"comparator", ToString(p.comparator)},
          {"margin", p.margin}};
}

OracleSpec OracleFromJson(const Json& j) {
  const auto kind = GetEnum<BugKind>(j, "kind", ParseBugKind);
  switch (kind) {
    case BugKind::kStatus:
      return StatusOracle{ExceptionFromJson(Get<Json>(j, "exception"))};
    case BugKind::kValue:
      return ValueOracle{GetEnum<AnomalyPattern>(j, "pattern", ParseAnomalyPattern),
                         GetOptional<std::string>(j, "detail")};
    case BugKind::kPerformance: {
      PerformanceOracle p;
      p.baseline = RecipeFromJson(Get<Json>(j, "baseline"));
      p.subject = RecipeFromJson(Get<Json>(j, "subject"));
      p.comparator = GetEnum<Comparator>(j, "comparator", ParseComparator);
      p.margin = GetOr<double>(j, "margin", 1.05);
      if (!(p.margin >= 1.0)) throw ParseError("margin must be >= 1.0");
      if (p.baseline.metric != p.subject.metric) {
        throw ParseError("baseline and subject recipes measure different metrics");
      }
      return p;
    }
  }
  throw ParseError("unreachable oracle kind");
}

Json ToJson(const MeasurementSample& sample) {
  return {{"metric", ToString(sample.metric)}, {"samples", sample.samples}};
}

MeasurementSample SampleFromJson(const Json& j) {
  return {GetEnum<Metric>(j, "metric", ParseMetric),
          Get<std::vector<double>>(j, "samples")};
}

Json ToJson(const ApiSignature& sig) {
  Json required = Json::array();
  Json optional = Json::array();
  for (const auto& p : sig.required) required.push_back(ToJson(p));
  for (const auto& p : sig.optional) optional.push_back(ToJson(p));
  return {{"kind", "signature"},
          {"name", sig.name},
          {"framework", sig.framework},
          {"required", required},
          {"optional", optional}};
}

ApiSignature SignatureFromJson(const Json& j) {
  ApiSignature sig;
  sig.name = RequireName(j, "name");
  sig.framework = GetOr<std::string>(j, "framework", "");
  std::set<std::string> seen;
  auto read = [&](const char* key, std::vector<ParamSpec>& into, bool optional) {
    if (!j.contains(key)) return;
    for (const auto& pj : Get<Json>(j, key)) {
      ParamSpec p = ParamFromJson(pj);
      if (!seen.insert(p.name).second) {
        throw ParseError("parameter '" + p.name + "' declared twice in '" +
                         sig.name + "'");
      }
      if (optional && !p.default_value) {
        throw ParseError("optional parameter '" + p.name + "' has no default");
      }
      if (!optional && p.default_value) {
        throw ParseError("required parameter '" + p.name + "' has a default");
      }
      into.push_back(std::move(p));
    }
  };
  read("required", sig.required, false);
  read("optional", sig.optional, true);
  return sig;
}

Json ToJson(const SourceFunction& fn) {
  return {{"kind", "source_function"},
          {"name", fn.name},
          {"io_args", TokensToJson(fn.io_args)},
          {"callees", TokensToJson(fn.callees)}};
}

SourceFunction FunctionFromJson(const Json& j) {
  return {RequireName(j, "name"), GetTokens(j, "io_args", true),
          GetTokens(j, "callees", true)};
}

Json ToJson(const CallStackTrace& trace) {
  return {{"kind", "trace"}, {"api", trace.api}, {"frames", TokensToJson(trace.frames)}};
}

CallStackTrace TraceFromJson(const Json& j) {
  return {RequireName(j, "api"), GetTokens(j, "frames", false)};
}

Json ToJson(const BugCase& bug) {
  Json j = {{"kind", "bug_case"},
            {"id", bug.id},
            {"api", bug.api},
            {"bug_kind", ToString(bug.kind)},
            {"call", ToJson(bug.call)},
            {"oracle", ToJson(bug.oracle)}};
  if (bug.issue) j["issue"] = *bug.issue;
  return j;
}

BugCase BugCaseFromJson(const Json& j) {
  BugCase bug;
  bug.id = RequireName(j, "id");
  bug.api = RequireName(j, "api");
  bug.kind = GetEnum<BugKind>(j, "bug_kind", ParseBugKind);
  bug.call = CallFromJson(Get<Json>(j, "call"));
  bug.oracle = OracleFromJson(Get<Json>(j, "oracle"));
  bug.issue = GetOptional<std::string>(j, "issue");
  if (KindOf(bug.oracle) != bug.kind) {
    throw ParseError("bug case '" + bug.id + "' declares kind " +
                     std::string(ToString(bug.kind)) + " but carries a " +
                     std::string(ToString(KindOf(bug.oracle))) + " oracle");
  }
  if (bug.call.api != bug.api) {
    throw ParseError("bug case '" + bug.id + "' repro calls '" + bug.call.api +
                     "' instead of '" + bug.api + "'");
  }
  return bug;
}

Json ToJson(const SignaturePair& pair) {
  return {{"kind", "signature_pair"},
          {"source", pair.source},
          {"target", pair.target},
          {"score", pair.score}};
}

SignaturePair SignaturePairFromJson(const Json& j) {
  SignaturePair p{RequireName(j, "source"), RequireName(j, "target"),
                  Get<double>(j, "score")};
  if (!(p.score >= 0.0 && p.score <= 1.0)) {
    throw ParseError("signature score must be in [0, 1]");
  }
  return p;
}

Json ToJson(const IssueRecord& issue) {
  return {{"kind", "issue"},
          {"id", issue.id},
          {"title", issue.title},
          {"body", issue.body},
          {"labels", TokensToJson(issue.labels)},
          {"comment_count", issue.comment_count},
          {"state", issue.state == IssueState::kOpen ? "open" : "closed"},
          {"linked_changes", issue.linked_changes},
          {"code_blocks", issue.code_blocks},
          {"hardware_markers", TokensToJson(issue.hardware_markers)}};
}

IssueRecord IssueFromJson(const Json& j) {
  IssueRecord issue;
  issue.id = RequireName(j, "id");
  issue.title = GetOr<std::string>(j, "title", "");
  issue.body = GetOr<std::string>(j, "body", "");
  issue.labels = GetTokens(j, "labels", false);
  issue.comment_count = GetOr<int>(j, "comment_count", 0);
  if (issue.comment_count < 0) throw ParseError("comment_count must be >= 0");
  const auto state = GetOr<std::string>(j, "state", "open");
  if (state != "open" && state != "closed") {
    throw ParseError("field 'state': unknown value '" + state + "'");
  }
  issue.state = state == "open" ? IssueState::kOpen : IssueState::kClosed;
  issue.linked_changes = GetOr<int>(j, "linked_changes", 0);
  if (issue.linked_changes < 0) throw ParseError("linked_changes must be >= 0");
  issue.code_blocks = GetOr<std::vector<std::string>>(j, "code_blocks", {});
  issue.hardware_markers = GetTokens(j, "hardware_markers", false);
  return issue;
}

Json ToJson(const FunctionGroup& group) {
  return {{"kind", "function_group"},
          {"id", group.id},
          {"members", TokensToJson(group.members)}};
}

FunctionGroup GroupFromJson(const Json& j) {
  return {RequireName(j, "id"), GetTokens(j, "members", false)};
}

Json ToJson(const CandidatePair& pair) {
  Json j = {{"kind", "candidate_pair"},
            {"source", pair.source},
            {"target", pair.target},
            {"score", pair.score},
            {"provenance", ToString(pair.provenance)},
            {"verdict", pair.verdict.accept ? "accept" : "reject"}};
  if (pair.signature_score) j["signature_score"] = *pair.signature_score;
  if (!pair.verdict.accept) j["reason"] = pair.verdict.reason;
  return j;
}

CandidatePair PairFromJson(const Json& j) {
  CandidatePair p;
  p.source = RequireName(j, "source");
  p.target = RequireName(j, "target");
  p.score = Get<double>(j, "score");
  if (!(p.score >= 0.0 && p.score <= 1.0)) throw ParseError("score must be in [0, 1]");
  const auto provenance = Get<std::string>(j, "provenance");
  if (provenance == "context") {
    p.provenance = Provenance::kContext;
  } else if (provenance == "signature") {
    p.provenance = Provenance::kSignature;
  } else {
    throw ParseError("field 'provenance': unknown value '" + provenance + "'");
  }
  p.signature_score = GetOptional<double>(j, "signature_score");
  const auto verdict = Get<std::string>(j, "verdict");
  if (verdict == "accept") {
    p.verdict = FilterVerdict::Accept();
  } else if (verdict == "reject") {
    p.verdict = FilterVerdict::Reject(GetOr<std::string>(j, "reason", ""));
  } else {
    throw ParseError("field 'verdict': unknown value '" + verdict + "'");
  }
  return p;
}

Json ToJson(const SynthesizedCase& c) {
  Json transforms = Json::array();
  for (const auto& t : c.transforms) {
    transforms.push_back({{"kind", ToString(t.kind)}, {"detail", t.detail}});
  }
  return {{"kind", "synthesized_case"},
          {"id", c.id},
          {"source_case_id", c.source_case_id},
          {"source_api", c.source_api},
          {"target_api", c.target_api},
          {"call", ToJson(c.call)},
          {"oracle", ToJson(c.oracle)},
          {"transforms", transforms},
          {"warnings", c.warnings},
          {"fingerprint", c.fingerprint}};
}

SynthesizedCase CaseFromJson(const Json& j) {
  SynthesizedCase c;
  c.id = RequireName(j, "id");
  c.source_case_id = RequireName(j, "source_case_id");
  c.source_api = RequireName(j, "source_api");
  c.target_api = RequireName(j, "target_api");
  c.call = CallFromJson(Get<Json>(j, "call"));
  c.oracle = OracleFromJson(Get<Json>(j, "oracle"));
  for (const auto& t : GetOr<Json>(j, "transforms", Json::array())) {
    c.transforms.push_back(
        {GetEnum<Transform::Kind>(t, "kind", ParseTransformKind),
         GetOr<std::string>(t, "detail", "")});
  }
  c.warnings = GetOr<std::vector<std::string>>(j, "warnings", {});
  c.fingerprint = Get<std::string>(j, "fingerprint");
  return c;
}

Json ToJson(const Skip& skip) {
  return {{"kind", "skip"},
          {"source_case_id", skip.source_case_id},
          {"target_api", skip.target_api},
          {"reason", ToString(skip.reason)},
          {"detail", skip.detail}};
}

Skip SkipFromJson(const Json& j) {
  return {RequireName(j, "source_case_id"), RequireName(j, "target_api"),
          GetEnum<SkipReason>(j, "reason", ParseSkipReason),
          GetOr<std::string>(j, "detail", "")};
}

Json ToJson(const ExecutionResult& r) {
  Json flags = Json::array();
  for (auto f : r.flags) flags.push_back(ToString(f));
  Json measurements = Json::object();
  for (const auto& [slot, sample] : r.measurements) {
    measurements[slot] = ToJson(sample);
  }
  Json j = {{"kind", "execution_result"},
            {"case_id", r.case_id},
            {"status", ToString(r.status)},
            {"flags", flags},
            {"measurements", measurements},
            {"runner_id", r.runner_id},
            {"wall_time_s", r.wall_time_s}};
  if (r.exception) j["exception"] = ExceptionToJson(*r.exception);
  if (!r.raw_message.empty()) j["raw_message"] = r.raw_message;
  if (r.runner_error) j["runner_error"] = *r.runner_error;
  return j;
}

ExecutionResult ResultFromJson(const Json& j) {
  ExecutionResult r;
  r.case_id = RequireName(j, "case_id");
  r.status = GetEnum<RunStatus>(j, "status", ParseRunStatus);
  if (j.contains("exception")) r.exception = ExceptionFromJson(j.at("exception"));
  r.raw_message = GetOr<std::string>(j, "raw_message", "");
  for (const auto& f : GetOr<std::vector<std::string>>(j, "flags", {})) {
    auto pattern = ParseAnomalyPattern(f);
    if (!pattern) throw ParseError("unknown output flag '" + f + "'");
    r.flags.insert(*pattern);
  }
  const Json measurements = GetOr<Json>(j, "measurements", Json::object());
  for (auto it = measurements.begin(); it != measurements.end(); ++it) {
    r.measurements.emplace(it.key(), SampleFromJson(it.value()));
  }
  r.runner_id = GetOr<std::string>(j, "runner_id", "");
  r.wall_time_s = GetOr<double>(j, "wall_time_s", 0.0);
  r.runner_error = GetOptional<std::string>(j, "runner_error");
  return r;
}

Json ToJson(const Verdict& v) {
  Json evidence = Json::array();
  for (const auto& [k, val] : v.evidence) evidence.push_back({k, val});
  Json j = {{"kind", "verdict"},
            {"case_id", v.case_id},
            {"outcome", ToString(v.outcome)},
            {"evidence", evidence}};
  if (v.bug_kind) j["bug_kind"] = ToString(*v.bug_kind);
  if (!v.reason.empty()) j["reason"] = v.reason;
  return j;
}

Verdict VerdictFromJson(const Json& j) {
  Verdict v;
  v.case_id = RequireName(j, "case_id");
  const auto outcome = Get<std::string>(j, "outcome");
  if (outcome == "Bug") {
    v.outcome = Verdict::Outcome::kBug;
    v.bug_kind = GetEnum<BugKind>(j, "bug_kind", ParseBugKind);
  } else if (outcome == "NoBug") {
    v.outcome = Verdict::Outcome::kNoBug;
  } else if (outcome == "Inconclusive") {
    v.outcome = Verdict::Outcome::kInconclusive;
  } else {
    throw ParseError("field 'outcome': unknown value '" + outcome + "'");
  }
  v.reason = GetOr<std::string>(j, "reason", "");
  for (const auto& e : GetOr<Json>(j, "evidence", Json::array())) {
    if (!e.is_array() || e.size() != 2) throw ParseError("malformed evidence entry");
    v.evidence.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return v;
}

void ForEachRecord(
    std::string_view text, const std::string& source,
    const std::function<void(const Json& record, const std::string& where)>& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = source + ":" + std::to_string(line_no);
    try {
      Json record = Json::parse(line);
      if (!record.is_object()) throw ParseError("record is not a JSON object");
      fn(record, where);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const Json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (end == text.size()) break;
  }
}

}  // namespace bugport
