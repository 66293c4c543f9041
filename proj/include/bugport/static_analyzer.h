#ifndef BUGPORT_STATIC_ANALYZER_H_
#define BUGPORT_STATIC_ANALYZER_H_

#include <span>
#include <string>
#include <vector>

#include "bugport/types.h"

namespace bugport {

// Connected set of pairwise-analogous source functions. `id` is the
// lexicographically smallest member and doubles as the canonical context
// token for every member.
struct FunctionGroup {
  std::string id;
  TokenSet members;

  bool operator==(const FunctionGroup&) const = default;
};

struct SimilarityThresholds {
  double alpha_io = 0.8;
  double alpha_call = 0.8;
};

struct FunctionSimilarity {
  double io = 0.0;
  double call = 0.0;
};

FunctionSimilarity ComputeFunctionSimilarity(const SourceFunction& a,
                                             const SourceFunction& b);

// Both thresholds are inclusive.
bool IsAnalogous(const FunctionSimilarity& sim,
                 const SimilarityThresholds& thresholds);
bool IsAnalogous(const SourceFunction& a, const SourceFunction& b,
                 const SimilarityThresholds& thresholds);

// Groups are the connected components (size >= 2) of the graph with an edge
// per analogous pair, sorted by id. Candidate pairs are drawn from a callee
// inverted index when alpha_call > 0 (a pair with no shared callee scores 0
// on Sim_call), and from all pairs otherwise.
std::vector<FunctionGroup> ClusterFunctions(
    std::span<const SourceFunction> functions,
    const SimilarityThresholds& thresholds);

std::vector<FunctionGroup> ClusterFunctions(
    const Corpus& corpus, const SimilarityThresholds& thresholds);

// Line-delimited "function_group" records, one per group, in id order.
std::string SerializeGroups(const std::vector<FunctionGroup>& groups);
// Throws ParseError on malformed records and ReferenceError when a member is
// not a source function of `corpus`.
std::vector<FunctionGroup> ParseGroups(const std::string& text,
                                       const Corpus& corpus);

}  // namespace bugport

#endif  // BUGPORT_STATIC_ANALYZER_H_
