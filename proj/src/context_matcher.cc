#include "bugport/context_matcher.h"

#include <fnmatch.h>

#include <algorithm>
#include <tuple>

#include "bugport/errors.h"
#include "bugport/jaccard.h"
#include "bugport/records.h"

namespace bugport {

std::string_view ToString(Provenance provenance) {
  return provenance == Provenance::kContext ? "context" : "signature";
}

CandidatePair CandidatePair::Oriented(std::string_view api) const {
  CandidatePair out = *this;
  if (api == target) std::swap(out.source, out.target);
  return out;
}

double MatchConfig::BetaFor(std::string_view framework) const {
  if (beta_override) return *beta_override;
  auto it = beta_by_framework.find(std::string(framework));
  return it == beta_by_framework.end() ? default_beta : it->second;
}

TokenSet NormalizeTrace(const CallStackTrace& trace,
                        std::span<const std::string> noise_patterns) {
  TokenSet frames;
  for (const auto& frame : trace.frames) {
    bool noise = std::any_of(
        noise_patterns.begin(), noise_patterns.end(), [&](const auto& pattern) {
          return fnmatch(pattern.c_str(), frame.c_str(), 0) == 0;
        });
    if (!noise) frames.insert(frame);
  }
  return frames;
}

GroupIndex::GroupIndex(std::span<const FunctionGroup> groups) {
  for (const auto& g : groups) {
    for (const auto& m : g.members) owner_[m] = g.id;
  }
}

const std::string& GroupIndex::Canonical(const std::string& function) const {
  auto it = owner_.find(function);
  return it == owner_.end() ? function : it->second;
}

CanonicalContext Canonicalize(std::string api, const TokenSet& frames,
                              const GroupIndex& index) {
  CanonicalContext ctx{std::move(api), {}};
  for (const auto& f : frames) ctx.tokens.insert(index.Canonical(f));
  return ctx;
}

CanonicalContext Canonicalize(std::string api, const TokenSet& frames,
                              std::span<const FunctionGroup> groups) {
  return Canonicalize(std::move(api), frames, GroupIndex(groups));
}

double ContextSimilarity(const CanonicalContext& a, const CanonicalContext& b) {
  if (a.tokens.empty() || b.tokens.empty()) {
    throw EmptyContextError("empty context for '" +
                            (a.tokens.empty() ? a.api : b.api) + "'");
  }
  return Jaccard(a.tokens, b.tokens);
}

FilterVerdict FilterArguments(const ApiSignature& source,
                              const ApiSignature& target) {
  auto has_orphan_required = [](const ApiSignature& from,
                                const ApiSignature& into) {
    return std::any_of(from.required.begin(), from.required.end(),
                       [&](const ParamSpec& p) { return !into.HasParam(p.name); });
  };
  if (has_orphan_required(source, target) &&
      has_orphan_required(target, source)) {
    return FilterVerdict::Reject(std::string(kMutualRequiredMismatch));
  }
  return FilterVerdict::Accept();
}

MatchResult MatchPairs(const Corpus& corpus,
                       std::span<const FunctionGroup> groups,
                       const MatchConfig& config) {
  MatchResult result;
  const GroupIndex index(groups);

  // framework -> contexts in API-name order
  std::map<std::string, std::vector<CanonicalContext>> contexts;
  for (const auto& [api, trace] : corpus.traces) {
    TokenSet frames = NormalizeTrace(trace, config.noise_patterns);
    if (frames.empty()) {
      result.warnings.push_back("API '" + api +
                                "' has no frames left after noise filtering; "
                                "excluded from context matching");
      continue;
    }
    const auto& framework = corpus.Signature(api).framework;
    contexts[framework].push_back(Canonicalize(api, frames, index));
  }

  std::map<std::pair<std::string, std::string>, CandidatePair> pairs;
  for (const auto& [framework, ctxs] : contexts) {
    const double beta = config.BetaFor(framework);
    for (std::size_t i = 0; i < ctxs.size(); ++i) {
      for (std::size_t j = i + 1; j < ctxs.size(); ++j) {
        const double score = ContextSimilarity(ctxs[i], ctxs[j]);
        if (score < beta) continue;
        CandidatePair p;
        p.source = ctxs[i].api;
        p.target = ctxs[j].api;
        p.score = score;
        p.provenance = Provenance::kContext;
        pairs.emplace(std::make_pair(p.source, p.target), std::move(p));
      }
    }
  }

  std::map<std::string, std::vector<const SignaturePair*>> by_source;
  for (const auto& sp : corpus.signature_pairs) {
    if (sp.source == sp.target) continue;
    by_source[sp.source].push_back(&sp);
  }
  for (auto& [source, list] : by_source) {
    std::sort(list.begin(), list.end(), [](const auto* a, const auto* b) {
      return std::tie(b->score, a->target) < std::tie(a->score, b->target);
    });
    if (list.size() > config.signature_top_k) list.resize(config.signature_top_k);
    for (const auto* sp : list) {
      auto key = std::minmax(sp->source, sp->target);
      auto [it, inserted] = pairs.try_emplace(
          std::make_pair(key.first, key.second), CandidatePair{});
      CandidatePair& p = it->second;
      if (inserted) {
        p.source = key.first;
        p.target = key.second;
        p.score = sp->score;
        p.provenance = Provenance::kSignature;
      } else if (p.provenance == Provenance::kSignature) {
        p.score = std::max(p.score, sp->score);
      }
      p.signature_score = std::max(p.signature_score.value_or(sp->score), sp->score);
    }
  }

  result.pairs.reserve(pairs.size());
  for (auto& [key, p] : pairs) {
    p.verdict = FilterArguments(corpus.Signature(p.source),
                                corpus.Signature(p.target));
    result.pairs.push_back(std::move(p));
  }
  return result;
}

std::set<std::string> CoveredApis(std::span<const CandidatePair> pairs) {
  std::set<std::string> apis;
  for (const auto& p : pairs) {
    if (!p.verdict.accept) continue;
    apis.insert(p.source);
    apis.insert(p.target);
  }
  return apis;
}

std::string SerializePairs(std::span<const CandidatePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += ToJson(p).dump();
    out += '\n';
  }
  return out;
}

std::vector<CandidatePair> ParsePairs(const std::string& text,
                                      const Corpus& corpus) {
  std::vector<CandidatePair> pairs;
  ForEachRecord(text, "pairs", [&](const Json& record, const std::string& where) {
    if (record.value("kind", "") != "candidate_pair") {
      throw ParseError("expected a candidate_pair record");
    }
    CandidatePair p = PairFromJson(record);
    if (p.source == p.target) {
      throw ParseError("pair of '" + p.source + "' with itself");
    }
    if (!corpus.signatures.contains(p.source) ||
        !corpus.signatures.contains(p.target)) {
      throw ReferenceError(where + ": pair references an unknown API");
    }
    pairs.push_back(std::move(p));
  });
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  return pairs;
}

}  // namespace bugport
