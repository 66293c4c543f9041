#ifndef BUGPORT_ORACLE_EVALUATOR_H_
#define BUGPORT_ORACLE_EVALUATOR_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bugport/case_generator.h"
#include "bugport/types.h"

namespace bugport {

enum class RunStatus { kCompleted, kRaised, kCrashed, kTimeout };
std::string_view ToString(RunStatus status);
std::optional<RunStatus> ParseRunStatus(std::string_view text);

inline constexpr std::string_view kBaselineSlot = "baseline";
inline constexpr std::string_view kSubjectSlot = "subject";

// Readings for one recipe slot, warmups already discarded by the runner.
struct MeasurementSample {
  Metric metric = Metric::kWallTimeSeconds;
  std::vector<double> samples;

  // Median of `samples`; NaN when empty.
  double Aggregate() const;

  bool operator==(const MeasurementSample&) const = default;
};

struct ExecutionResult {
  std::string case_id;
  RunStatus status = RunStatus::kCompleted;
  // Present iff status == kRaised.
  std::optional<ExceptionSignature> exception;
  std::string raw_message;
  std::set<AnomalyPattern> flags;
  std::map<std::string, MeasurementSample> measurements;
  std::string runner_id;
  double wall_time_s = 0.0;
  // Set when the runner session failed around this case; the result then
  // says nothing about the case itself.
  std::optional<std::string> runner_error;

  bool operator==(const ExecutionResult&) const = default;
};

struct Verdict {
  enum class Outcome { kBug, kNoBug, kInconclusive };

  std::string case_id;
  Outcome outcome = Outcome::kNoBug;
  std::optional<BugKind> bug_kind;  // set iff outcome == kBug
  std::string reason;               // set iff outcome == kInconclusive
  std::vector<std::pair<std::string, std::string>> evidence;

  bool operator==(const Verdict&) const = default;
};

std::string_view ToString(Verdict::Outcome outcome);
// "Bug(status)", "NoBug", "Inconclusive(timeout)".
std::string Label(const Verdict& verdict);

class ExceptionNormalizer {
 public:
  ExceptionNormalizer() = default;
  explicit ExceptionNormalizer(std::set<std::string> api_names);

  // Keeps the type verbatim. In the message, file paths, hex addresses, known
  // API names and number literals become slots and whitespace collapses.
  ExceptionSignature operator()(std::string_view type,
                                std::string_view message) const;

 private:
  std::vector<std::string> names_;  // longest first
};

ExceptionSignature NormalizeException(std::string_view type,
                                      std::string_view message,
                                      const std::set<std::string>& api_names = {});

bool CheckStatus(const StatusOracle& oracle, const ExecutionResult& result);
bool CheckValue(const ValueOracle& oracle, const ExecutionResult& result);

bool ComparePerformance(Comparator comparator, double margin, double baseline,
                        double subject);
// Throws MetricMismatchError when a slot is missing or measured with a metric
// other than the recipe's.
bool CheckPerformance(const PerformanceOracle& oracle,
                      const ExecutionResult& result);

// Total: every (case, result) yields a verdict.
Verdict Evaluate(const SynthesizedCase& synthesized,
                 const ExecutionResult& result);

// Identity of "the same unexpected behavior": kind plus the oracle content
// that does not depend on concrete argument values.
std::string OracleFingerprint(const OracleSpec& oracle);

}  // namespace bugport

#endif  // BUGPORT_ORACLE_EVALUATOR_H_
