#ifndef BUGPORT_REPORT_H_
#define BUGPORT_REPORT_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bugport/case_generator.h"
#include "bugport/context_matcher.h"
#include "bugport/issue_sampler.h"
#include "bugport/oracle_evaluator.h"

namespace bugport {

// Percentage of cases that triggered a bug; empty when no case was generated.
std::optional<double> TriggerRatio(long valid, long total);
// Minutes of detection time per Bug verdict; empty when there are none.
std::optional<double> AverageMinutesToBug(double detection_s, long bugs);

// Fixed-precision number, or "undefined".
std::string FormatMetric(std::optional<double> value, int precision = 2);

// A glob on the target API, optionally restricted to one bug kind.
struct Suppression {
  std::string api_glob;
  std::optional<BugKind> kind;

  bool Matches(std::string_view api, BugKind bug_kind) const;
  bool operator==(const Suppression&) const = default;
};

// Lines "<glob> [status|value|performance]"; '#' starts a comment.
// Throws ConfigError.
std::vector<Suppression> ParseSuppressions(std::string_view text, const std::string& source);

// Bug verdicts folded by (target API, oracle fingerprint).
struct ApiBug {
  std::string target_api;
  BugKind kind = BugKind::kStatus;
  std::string oracle_fingerprint;
  std::vector<std::string> case_ids;
  bool suppressed = false;

  bool operator==(const ApiBug&) const = default;
};

struct CaseLine {
  std::string case_id;
  std::string source_case_id;
  std::string target_api;
  std::string verdict;  // Verdict label, or "NotRun"

  bool operator==(const CaseLine&) const = default;
};

struct RunReport {
  long cases_generated = 0;
  long cases_triggering = 0;
  long no_bug = 0;
  long inconclusive = 0;
  long not_run = 0;
  std::map<std::string, long> bugs_by_kind;
  std::map<std::string, long> inconclusive_by_reason;
  std::map<std::string, long> skips_by_reason;
  std::map<std::string, long> pairs_by_outcome;  // "<provenance>/<accept|reject>"
  long apis_covered = 0;
  long target_apis = 0;
  long target_apis_with_bugs = 0;
  double detection_s = 0.0;
  std::vector<ApiBug> api_bugs;
  std::vector<CaseLine> cases;
  std::vector<std::string> multi_block_issues;

  long ReportedApiBugs() const;
  // Fraction of targeted APIs with at least one Bug verdict; empty when no
  // API was targeted.
  std::optional<double> EffectiveRatio() const;

  bool operator==(const RunReport&) const = default;
};

struct ReportInputs {
  std::vector<CandidatePair> pairs;
  std::vector<SynthesizedCase> cases;
  std::vector<Skip> skips;
  std::vector<ExecutionResult> results;
  std::vector<Verdict> verdicts;
  std::vector<SampleOutcome> sample_outcomes;
  std::vector<Suppression> suppressions;
};

// Order-independent: inputs are sorted before reduction. Detection time is
// the sum of runner-reported wall times.
RunReport BuildReport(const ReportInputs& inputs);

// Line-delimited records: one "report_summary", then "api_bug" and
// "case_report" records in key order.
std::string SerializeReport(const RunReport& report);

// Plain-text table of counts and metrics.
std::string SummaryTable(const RunReport& report);

}  // namespace bugport

#endif  // BUGPORT_REPORT_H_
