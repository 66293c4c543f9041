#ifndef BUGPORT_TESTS_SUPPORT_ORACLES_H_
#define BUGPORT_TESTS_SUPPORT_ORACLES_H_

// Reference implementations and generators shared by the unit tests and the
// acceptance binary. Nothing here calls into the library code it checks.

#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "bugport/config.h"
#include "bugport/context_matcher.h"
#include "bugport/static_analyzer.h"
#include "bugport/types.h"

namespace bugport::testing {

std::string FixturePath(std::string_view relative);
std::string BinaryPath();
std::string TemplateDir();

// fixtures/mini/mini.conf with repository-relative paths made absolute and
// the output directory replaced by `out`.
PipelineConfig MiniConfig(const std::string& out);

// case id -> verdict label from fixtures/mini/expected_verdicts.tsv.
std::map<std::string, std::string> ExpectedMiniVerdicts();

// case id -> verdict label from the case_report lines of a report.jsonl.
std::map<std::string, std::string> ReportVerdicts(const std::string& report_text);

// |a ∩ b| / |a ∪ b| computed with std::set_intersection and std::set_union.
double NaiveJaccard(const TokenSet& a, const TokenSet& b);

// All-pairs similarity plus a plain union-find over indices.
std::vector<FunctionGroup> BruteForceGroups(const std::vector<SourceFunction>& functions,
                                            double alpha_io, double alpha_call);

struct BrutePair {
  std::string source;
  std::string target;
  double score = 0.0;
  bool accept = true;

  bool operator==(const BrutePair&) const = default;
};

// Required-set check written from the rule text.
bool NaiveFilterAccept(const ApiSignature& a, const ApiSignature& b);

// Every same-framework API pair whose canonical-context score reaches `beta`.
std::vector<BrutePair> BruteForceContextPairs(const Corpus& corpus,
                                              const std::vector<FunctionGroup>& groups,
                                              double beta,
                                              const std::vector<std::string>& noise_patterns);

// Functions named "f000".. drawn from small token vocabularies so that
// analogous pairs and chains are common.
std::vector<SourceFunction> RandomFunctions(std::mt19937& rng, int count);

// Signatures, source functions and traces over `api_count` APIs spread over
// three framework tags. Some traces contain only "noise::" frames.
Corpus RandomMatchCorpus(std::mt19937& rng, int api_count);

}  // namespace bugport::testing

#endif  // BUGPORT_TESTS_SUPPORT_ORACLES_H_
