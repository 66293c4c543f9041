#ifndef BUGPORT_PIPELINE_H_
#define BUGPORT_PIPELINE_H_

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bugport/case_generator.h"
#include "bugport/config.h"
#include "bugport/context_matcher.h"
#include "bugport/oracle_evaluator.h"
#include "bugport/report.h"
#include "bugport/runner.h"
#include "bugport/static_analyzer.h"

namespace bugport {

// Artifact names inside the output directory.
namespace files {
inline constexpr std::string_view kCorpus = "corpus.jsonl";
inline constexpr std::string_view kBugCases = "bug_cases.jsonl";
inline constexpr std::string_view kSampleReport = "sample_report.jsonl";
inline constexpr std::string_view kGroups = "groups.jsonl";
inline constexpr std::string_view kPairs = "pairs.jsonl";
inline constexpr std::string_view kCases = "cases.jsonl";
inline constexpr std::string_view kSkips = "skips.jsonl";
inline constexpr std::string_view kResults = "results.jsonl";
inline constexpr std::string_view kVerdicts = "verdicts.jsonl";
inline constexpr std::string_view kReport = "report.jsonl";
inline constexpr std::string_view kSummary = "summary.txt";
inline constexpr std::string_view kSweep = "sweep.tsv";
}  // namespace files

struct Generation {
  std::vector<SynthesizedCase> cases;  // sorted by id
  std::vector<Skip> skips;             // sorted by (source case, target)
};

// Every bug case against every accepted pair it belongs to. When `margin` is
// set it replaces the margin of each generated performance oracle.
Generation GenerateCases(const Corpus& corpus, const std::map<std::string, BugCase>& bugs,
                         const std::vector<CandidatePair>& pairs,
                         std::optional<double> margin);

struct Evaluation {
  std::vector<ExecutionResult> results;  // case order
  std::vector<Verdict> verdicts;         // case order
  std::vector<std::string> not_run;      // "<case id>: <why>"
};

// Session factory for `runner_cmd`; throws ConfigError when it is empty.
RunnerFactory MakeRunnerFactory(const std::string& runner_cmd);

// Renders, runs and judges `cases`. Cases whose template cannot be loaded or
// rendered are listed in not_run.
Evaluation EvaluateCases(const Corpus& corpus, const std::vector<SynthesizedCase>& cases,
                         const PipelineConfig& config);

// from, from+step, ... up to `to` inclusive, rounded to 1e-9.
std::vector<double> BetaGrid(double from, double to, double step);

struct SweepRow {
  double beta = 0.0;
  long covered_apis = 0;
  long accepted_pairs = 0;
  long cases = 0;
  long bug_verdicts = 0;
  long api_bugs = 0;
  std::optional<double> effective_ratio;
};

std::string SerializeSweep(const std::vector<SweepRow>& rows);

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, std::ostream* log = nullptr);

  // Each stage reads the artifacts of earlier stages from the output
  // directory and replaces its own with write-then-rename. Throws Error.
  void Ingest();
  void Sample();
  void Analyze();
  void Match();
  void Generate();
  void Evaluate();
  void Report();
  std::vector<SweepRow> SweepBeta(double from, double to, double step);

  // Ingest through Report.
  void RunAll();

  const PipelineConfig& config() const { return config_; }

 private:
  std::filesystem::path Path(std::string_view name) const;
  std::string Require(std::string_view name, std::string_view stage) const;
  void Write(std::string_view name, std::string_view data) const;
  void Summarize(std::string_view stage, const std::string& text) const;
  Corpus LoadStageCorpus() const;
  std::map<std::string, BugCase> LoadBugCases(const Corpus& corpus) const;
  std::vector<FunctionGroup> LoadGroups(const Corpus& corpus) const;

  PipelineConfig config_;
  std::ostream* log_;
};

}  // namespace bugport

#endif  // BUGPORT_PIPELINE_H_
