#ifndef BUGPORT_CASE_GENERATOR_H_
#define BUGPORT_CASE_GENERATOR_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bugport/context_matcher.h"
#include "bugport/types.h"

namespace bugport {

struct Transform {
  enum class Kind { kDropArg, kRankExpand, kRankShrink, kRecipeRetarget };
  Kind kind;
  std::string detail;

  bool operator==(const Transform&) const = default;
};

std::string_view ToString(Transform::Kind kind);
std::optional<Transform::Kind> ParseTransformKind(std::string_view text);

struct GenerationLog {
  std::vector<Transform> transforms;
  std::vector<std::string> warnings;
};

struct SynthesizedCase {
  std::string id;
  std::string source_case_id;
  std::string source_api;
  std::string target_api;
  StructuredCall call;
  OracleSpec oracle;
  std::vector<Transform> transforms;
  std::vector<std::string> warnings;
  std::string fingerprint;

  bool operator==(const SynthesizedCase&) const = default;
};

enum class SkipReason { kInfeasibleDirection, kRankUnresolvable, kRecipeRetargetFailure };
std::string_view ToString(SkipReason reason);
std::optional<SkipReason> ParseSkipReason(std::string_view text);

struct Skip {
  std::string source_case_id;
  std::string target_api;
  SkipReason reason;
  std::string detail;

  bool operator==(const Skip&) const = default;
};

using SynthesisResult = std::variant<SynthesizedCase, Skip>;

// True iff every required parameter of `target` is bound in `call`.
bool FeasibleDirection(const StructuredCall& call, const ApiSignature& target);
bool FeasibleDirection(const BugCase& bug, const ApiSignature& target);

// Drops bound arguments the target does not declare and rebinds the call to
// the target API, renaming the API inside setup fragments. Throws
// InfeasibleDirectionError when a target-required parameter is unbound.
StructuredCall ResolveArgumentDifference(const StructuredCall& call,
                                         const ApiSignature& target,
                                         GenerationLog* log = nullptr);

// Grows a shape tuple by repeating its trailing extent, or truncates it.
// Throws RankUnresolvableError when growing an empty tuple.
ShapeTuple ResizeRank(const ShapeTuple& shape, std::size_t rank);

// Adjusts shape-tuple arguments whose declared rank differs between the two
// signatures. Throws RankUnresolvableError for non-shape values in that
// position.
StructuredCall ResolveDimensionDifference(const StructuredCall& call,
                                          const ApiSignature& source,
                                          const ApiSignature& target,
                                          GenerationLog* log = nullptr);

// Status/value oracles keep their content with API names wildcarded;
// performance recipes have each call to the source API retargeted. Throws
// RecipeRetargetError.
OracleSpec PortOracle(const OracleSpec& oracle, const ApiSignature& source,
                      const ApiSignature& target, GenerationLog* log = nullptr);

// Replaces whole-token occurrences of `api` (full name, then its terminal
// segment) in `text` with `replacement`.
std::string ReplaceApiName(std::string_view text, std::string_view api,
                           std::string_view replacement);

// "<target api>#<16 hex digits>" over the canonical bound-argument encoding.
std::string Fingerprint(const StructuredCall& call);

// Requires pair.verdict.accept and `bug.api` to be one end of `pair`.
SynthesisResult Synthesize(const BugCase& bug, const CandidatePair& pair,
                           const Corpus& corpus);

std::string SerializeCases(const std::vector<SynthesizedCase>& cases);
std::vector<SynthesizedCase> ParseCases(const std::string& text);

}  // namespace bugport

#endif  // BUGPORT_CASE_GENERATOR_H_
