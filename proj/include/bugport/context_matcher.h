#ifndef BUGPORT_CONTEXT_MATCHER_H_
#define BUGPORT_CONTEXT_MATCHER_H_

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bugport/static_analyzer.h"
#include "bugport/types.h"

namespace bugport {

// Call-stack tokens of one API after analogous functions were collapsed onto
// their group id.
struct CanonicalContext {
  std::string api;
  TokenSet tokens;

  bool operator==(const CanonicalContext&) const = default;
};

enum class Provenance { kContext, kSignature };
std::string_view ToString(Provenance provenance);

struct FilterVerdict {
  bool accept = true;
  std::string reason;  // empty on Accept

  static FilterVerdict Accept() { return {true, ""}; }
  static FilterVerdict Reject(std::string reason) {
    return {false, std::move(reason)};
  }
  bool operator==(const FilterVerdict&) const = default;
};

inline constexpr std::string_view kMutualRequiredMismatch =
    "MutualRequiredMismatch";

// Matched API pair. Context pairs are unordered and stored with
// source < target; signature pairs keep that normalization too, so that one
// pair serves bug cases on either side (see Oriented()).
struct CandidatePair {
  std::string source;
  std::string target;
  double score = 0.0;
  Provenance provenance = Provenance::kContext;
  std::optional<double> signature_score;
  FilterVerdict verdict;

  // Copy with `api` as the source. `api` must be one of the two ends.
  CandidatePair Oriented(std::string_view api) const;

  bool operator==(const CandidatePair&) const = default;
};

struct MatchConfig {
  // Per-framework-tag thresholds; frameworks without an entry use
  // default_beta.
  std::map<std::string, double> beta_by_framework = {
      {"pytorch-like", 0.6}, {"tensorflow-like", 0.8}};
  double default_beta = 0.6;
  std::optional<double> beta_override;
  std::vector<std::string> noise_patterns;
  std::size_t signature_top_k = 20;

  double BetaFor(std::string_view framework) const;
};

// Frames matching any glob pattern are dropped.
TokenSet NormalizeTrace(const CallStackTrace& trace,
                        std::span<const std::string> noise_patterns);

class GroupIndex {
 public:
  GroupIndex() = default;
  explicit GroupIndex(std::span<const FunctionGroup> groups);

  // Group id for `function`, or `function` itself when ungrouped.
  const std::string& Canonical(const std::string& function) const;

 private:
  std::unordered_map<std::string, std::string> owner_;
};

CanonicalContext Canonicalize(std::string api, const TokenSet& frames,
                              const GroupIndex& index);
CanonicalContext Canonicalize(std::string api, const TokenSet& frames,
                              std::span<const FunctionGroup> groups);

// Throws EmptyContextError if either token set is empty.
double ContextSimilarity(const CanonicalContext& a, const CanonicalContext& b);

// Reject iff each side has a required parameter missing from the other's full
// parameter set.
FilterVerdict FilterArguments(const ApiSignature& source,
                              const ApiSignature& target);

struct MatchResult {
  std::vector<CandidatePair> pairs;  // sorted by (source, target)
  std::vector<std::string> warnings;
};

MatchResult MatchPairs(const Corpus& corpus,
                       std::span<const FunctionGroup> groups,
                       const MatchConfig& config);

// APIs appearing in at least one accepted pair.
std::set<std::string> CoveredApis(std::span<const CandidatePair> pairs);

std::string SerializePairs(std::span<const CandidatePair> pairs);
std::vector<CandidatePair> ParsePairs(const std::string& text,
                                      const Corpus& corpus);

}  // namespace bugport

#endif  // BUGPORT_CONTEXT_MATCHER_H_
