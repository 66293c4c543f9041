#include "bugport/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <tuple>

#include "bugport/corpus_io.h"
#include "bugport/errors.h"
#include "bugport/records.h"
#include "bugport/render.h"
#include "bugport/validate.h"

namespace bugport {
namespace {

Json ToJson(const SampleOutcome& o) {
  Json j = {{"kind", "sample_outcome"},
            {"issue_id", o.issue_id},
            {"outcome", o.outcome},
            {"reason", o.reason},
            {"multi_block", o.multi_block}};
  if (o.api) j["api"] = *o.api;
  return j;
}

SampleOutcome OutcomeFromJson(const Json& j) {
  SampleOutcome o;
  o.issue_id = j.at("issue_id").get<std::string>();
  o.outcome = j.at("outcome").get<std::string>();
  o.reason = j.value("reason", "");
  o.multi_block = j.value("multi_block", false);
  if (j.contains("api")) o.api = j["api"].get<std::string>();
  return o;
}

template <typename T, typename Decode>
std::vector<T> ParseRecords(const std::string& text, const std::string& source,
                            std::string_view kind, Decode decode) {
  std::vector<T> out;
  ForEachRecord(text, source, [&](const Json& record, const std::string&) {
    if (record.value("kind", "") != kind) {
      throw ParseError("expected a " + std::string(kind) + " record");
    }
    out.push_back(decode(record));
  });
  return out;
}

template <typename T>
std::string Lines(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    out += ToJson(item).dump();
    out += '\n';
  }
  return out;
}

double Seconds(std::chrono::steady_clock::duration d) {
  return std::chrono::duration<double>(d).count();
}

}  // namespace

Generation GenerateCases(const Corpus& corpus, const std::map<std::string, BugCase>& bugs,
                         const std::vector<CandidatePair>& pairs,
                         std::optional<double> margin) {
  Generation g;
  for (const auto& [id, bug] : bugs) {
    for (const auto& pair : pairs) {
      if (!pair.verdict.accept) continue;
      if (pair.source != bug.api && pair.target != bug.api) continue;
      auto result = Synthesize(bug, pair, corpus);
      if (auto* c = std::get_if<SynthesizedCase>(&result)) {
        if (auto* perf = std::get_if<PerformanceOracle>(&c->oracle); perf && margin) {
          perf->margin = *margin;
        }
        g.cases.push_back(std::move(*c));
      } else {
        g.skips.push_back(std::get<Skip>(std::move(result)));
      }
    }
  }
  std::sort(g.cases.begin(), g.cases.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(g.skips.begin(), g.skips.end(), [](const auto& a, const auto& b) {
    return std::tie(a.source_case_id, a.target_api) < std::tie(b.source_case_id, b.target_api);
  });
  return g;
}

RunnerFactory MakeRunnerFactory(const std::string& runner_cmd) {
  if (runner_cmd.empty()) throw ConfigError("runner_cmd is not set");
  constexpr std::string_view kMock = "mock:";
  if (runner_cmd.starts_with(kMock)) {
    auto script = std::make_shared<const MockScript>(
        MockScript::Load(runner_cmd.substr(kMock.size())));
    return [script](const std::string& id) -> std::unique_ptr<RunnerHandle> {
      return std::make_unique<MockRunner>(script, id);
    };
  }
  return [runner_cmd](const std::string& id) -> std::unique_ptr<RunnerHandle> {
    return std::make_unique<ProcessRunner>(runner_cmd, id);
  };
}

Evaluation EvaluateCases(const Corpus& corpus, const std::vector<SynthesizedCase>& cases,
                         const PipelineConfig& config) {
  Evaluation out;
  std::map<std::string, RenderTemplate> templates;
  std::vector<RunnerRequest> requests;
  std::vector<const SynthesizedCase*> runnable;
  for (const auto& c : cases) {
    try {
      const auto& sig = corpus.Signature(c.target_api);
      const std::string path = config.TemplateFor(sig.framework);
      auto it = templates.find(path);
      if (it == templates.end()) it = templates.emplace(path, RenderTemplate::Load(path)).first;
      requests.push_back(MakeRequest(c, Render(c, it->second, corpus), config.timeout_s));
      runnable.push_back(&c);
    } catch (const TemplateError& e) {
      out.not_run.push_back(c.id + ": " + e.what());
    }
  }
  if (requests.empty()) return out;
  const ExceptionNormalizer normalize(corpus.ApiNames());
  out.results = RunAll(requests, MakeRunnerFactory(config.runner_cmd), config.jobs, normalize);
  for (std::size_t i = 0; i < runnable.size(); ++i) {
    out.verdicts.push_back(bugport::Evaluate(*runnable[i], out.results[i]));
  }
  return out;
}

std::vector<double> BetaGrid(double from, double to, double step) {
  if (!(step > 0)) throw ConfigError("beta step must be positive");
  if (!(from >= 0 && to <= 1 && from <= to)) {
    throw ConfigError("beta range must satisfy 0 <= from <= to <= 1");
  }
  std::vector<double> grid;
  for (long i = 0;; ++i) {
    const double beta = std::round((from + static_cast<double>(i) * step) * 1e9) / 1e9;
    if (beta > to + 1e-12) break;
    grid.push_back(beta);
  }
  return grid;
}

std::string SerializeSweep(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "beta\tcovered_apis\taccepted_pairs\tcases\tbug_verdicts\tapi_bugs\teffective_ratio\n";
  for (const auto& r : rows) {
    os << FormatMetric(r.beta, 2) << '\t' << r.covered_apis << '\t' << r.accepted_pairs << '\t'
       << r.cases << '\t' << r.bug_verdicts << '\t' << r.api_bugs << '\t'
       << FormatMetric(r.effective_ratio, 4) << '\n';
  }
  return os.str();
}

Pipeline::Pipeline(PipelineConfig config, std::ostream* log)
    : config_(std::move(config)), log_(log) {}

std::filesystem::path Pipeline::Path(std::string_view name) const {
  return std::filesystem::path(config_.out) / std::string(name);
}

std::string Pipeline::Require(std::string_view name, std::string_view stage) const {
  const auto path = Path(name);
  if (!std::filesystem::exists(path)) {
    throw Error("missing " + path.string() + "; run '" + std::string(stage) + "' first");
  }
  return ReadFile(path);
}

void Pipeline::Write(std::string_view name, std::string_view data) const {
  WriteFileAtomic(Path(name), data);
}

void Pipeline::Summarize(std::string_view stage, const std::string& text) const {
  Write(std::string(stage) + ".summary.txt", text);
  if (log_) *log_ << text;
}

Corpus Pipeline::LoadStageCorpus() const {
  return ParseCorpus(Require(files::kCorpus, "ingest"), Path(files::kCorpus).string());
}

std::map<std::string, BugCase> Pipeline::LoadBugCases(const Corpus& corpus) const {
  if (!std::filesystem::exists(Path(files::kBugCases))) return corpus.bug_cases;
  const auto path = Path(files::kBugCases).string();
  std::map<std::string, BugCase> bugs;
  ForEachRecord(ReadFile(path), path, [&](const Json& record, const std::string& where) {
    BugCase bug = BugCaseFromJson(record);
    auto violations = ValidateCall(bug.call, corpus.Signature(bug.api));
    if (!violations.empty()) {
      throw ReferenceError(where + ": " + bug.id + ": " + Describe(violations));
    }
    const std::string id = bug.id;
    if (!bugs.emplace(id, std::move(bug)).second) {
      throw DuplicateError(where + ": bug case '" + id + "' repeated");
    }
  });
  return bugs;
}

std::vector<FunctionGroup> Pipeline::LoadGroups(const Corpus& corpus) const {
  return ParseGroups(Require(files::kGroups, "analyze"), corpus);
}

void Pipeline::Ingest() {
  if (config_.corpus.empty()) throw ConfigError("no corpus files given");
  std::vector<std::filesystem::path> paths(config_.corpus.begin(), config_.corpus.end());
  const Corpus corpus = LoadCorpus(paths);
  Write(files::kCorpus, SerializeCorpus(corpus));
  std::ostringstream s;
  s << "ingest: " << corpus.signatures.size() << " signatures, " << corpus.functions.size()
    << " source functions, " << corpus.traces.size() << " traces, "
    << corpus.bug_cases.size() << " bug cases, " << corpus.signature_pairs.size()
    << " signature pairs, " << corpus.issues.size() << " issues\n";
  Summarize("ingest", s.str());
}

void Pipeline::Sample() {
  const Corpus corpus = LoadStageCorpus();
  std::map<std::string, KindLabel> labels;
  if (!config_.labels.empty()) labels = ParseKindLabels(ReadFile(config_.labels), config_.labels);
  const auto sampled =
      SampleIssues(corpus, config_.sampler, labels, config_.margin.value_or(1.05));

  std::map<std::string, BugCase> bugs = corpus.bug_cases;
  for (const auto& bug : sampled.bug_cases) {
    if (!bugs.emplace(bug.id, bug).second) {
      throw DuplicateError("extracted bug case '" + bug.id + "' collides with the corpus");
    }
  }
  std::string out;
  for (const auto& [id, bug] : bugs) out += ToJson(bug).dump() + "\n";
  Write(files::kBugCases, out);
  Write(files::kSampleReport, Lines(sampled.outcomes));

  std::map<std::string, long> by_outcome;
  for (const auto& o : sampled.outcomes) {
    by_outcome[o.outcome + (o.reason.empty() || o.outcome == "failed" ? "" : "/" + o.reason)]++;
  }
  std::ostringstream s;
  s << "sample: " << corpus.issues.size() << " issues, " << sampled.bug_cases.size()
    << " extracted, " << bugs.size() << " bug cases in total\n";
  for (const auto& [k, v] : by_outcome) s << "  " << k << ": " << v << "\n";
  Summarize("sample", s.str());
}

void Pipeline::Analyze() {
  const Corpus corpus = LoadStageCorpus();
  const auto groups = ClusterFunctions(corpus, config_.thresholds);
  Write(files::kGroups, SerializeGroups(groups));
  std::size_t members = 0;
  for (const auto& g : groups) members += g.members.size();
  std::ostringstream s;
  s << "analyze: " << groups.size() << " function groups covering " << members << " of "
    << corpus.functions.size() << " source functions\n";
  Summarize("analyze", s.str());
}

void Pipeline::Match() {
  const Corpus corpus = LoadStageCorpus();
  const auto groups = LoadGroups(corpus);
  const auto matched = MatchPairs(corpus, groups, config_.match);
  Write(files::kPairs, SerializePairs(matched.pairs));
  const long accepted = std::count_if(matched.pairs.begin(), matched.pairs.end(),
                                      [](const auto& p) { return p.verdict.accept; });
  std::ostringstream s;
  s << "match: " << matched.pairs.size() << " pairs, " << accepted << " accepted, "
    << CoveredApis(matched.pairs).size() << " APIs covered\n";
  for (const auto& w : matched.warnings) s << "  warning: " << w << "\n";
  Summarize("match", s.str());
}

void Pipeline::Generate() {
  const auto started = std::chrono::steady_clock::now();
  const Corpus corpus = LoadStageCorpus();
  const auto bugs = LoadBugCases(corpus);
  const auto pairs = ParsePairs(Require(files::kPairs, "match"), corpus);
  const auto g = GenerateCases(corpus, bugs, pairs, config_.margin);
  Write(files::kCases, SerializeCases(g.cases));
  Write(files::kSkips, Lines(g.skips));
  std::ostringstream s;
  s << "generate: " << g.cases.size() << " cases, " << g.skips.size() << " skips from "
    << bugs.size() << " bug cases\n";
  for (const auto& skip : g.skips) {
    s << "  skip " << skip.source_case_id << " -> " << skip.target_api << ": "
      << ToString(skip.reason) << "\n";
  }
  Summarize("generate", s.str());
  if (log_) {
    const double host_s = Seconds(std::chrono::steady_clock::now() - started);
    *log_ << "generate: host time " << FormatMetric(host_s, 3) << " s\n";
  }
}

void Pipeline::Evaluate() {
  const auto started = std::chrono::steady_clock::now();
  const Corpus corpus = LoadStageCorpus();
  const auto cases = ParseCases(Require(files::kCases, "generate"));
  const auto e = EvaluateCases(corpus, cases, config_);
  Write(files::kResults, Lines(e.results));
  Write(files::kVerdicts, Lines(e.verdicts));
  std::map<std::string, long> labels;
  for (const auto& v : e.verdicts) labels[Label(v)]++;
  std::ostringstream s;
  s << "evaluate: " << e.results.size() << " cases run, " << e.not_run.size() << " not run\n";
  for (const auto& [label, n] : labels) s << "  " << label << ": " << n << "\n";
  for (const auto& why : e.not_run) s << "  not run: " << why << "\n";
  Summarize("evaluate", s.str());
  if (log_) {
    *log_ << "evaluate: host time "
          << FormatMetric(Seconds(std::chrono::steady_clock::now() - started), 3) << " s\n";
  }
}

void Pipeline::Report() {
  const Corpus corpus = LoadStageCorpus();
  ReportInputs in;
  in.pairs = ParsePairs(Require(files::kPairs, "match"), corpus);
  in.cases = ParseCases(Require(files::kCases, "generate"));
  in.skips = ParseRecords<Skip>(Require(files::kSkips, "generate"), "skips", "skip",
                                SkipFromJson);
  in.results = ParseRecords<ExecutionResult>(Require(files::kResults, "evaluate"), "results",
                                             "execution_result", ResultFromJson);
  in.verdicts = ParseRecords<Verdict>(Require(files::kVerdicts, "evaluate"), "verdicts",
                                      "verdict", VerdictFromJson);
  if (std::filesystem::exists(Path(files::kSampleReport))) {
    in.sample_outcomes = ParseRecords<SampleOutcome>(
        ReadFile(Path(files::kSampleReport)), "sample_report", "sample_outcome",
        OutcomeFromJson);
  }
  if (!config_.suppress_list.empty()) {
    in.suppressions = ParseSuppressions(ReadFile(config_.suppress_list), config_.suppress_list);
  }
  const RunReport report = BuildReport(in);
  Write(files::kReport, SerializeReport(report));
  const std::string table = SummaryTable(report);
  Write(files::kSummary, table);
  if (log_) *log_ << table;
}

std::vector<SweepRow> Pipeline::SweepBeta(double from, double to, double step) {
  const auto grid = BetaGrid(from, to, step);
  const Corpus corpus = LoadStageCorpus();
  const auto bugs = LoadBugCases(corpus);
  const auto groups = std::filesystem::exists(Path(files::kGroups))
                          ? LoadGroups(corpus)
                          : ClusterFunctions(corpus, config_.thresholds);
  std::vector<SweepRow> rows;
  for (double beta : grid) {
    MatchConfig match = config_.match;
    match.beta_override = beta;
    const auto matched = MatchPairs(corpus, groups, match);
    const auto g = GenerateCases(corpus, bugs, matched.pairs, config_.margin);
    const auto e = EvaluateCases(corpus, g.cases, config_);
    ReportInputs in;
    in.pairs = matched.pairs;
    in.cases = g.cases;
    in.skips = g.skips;
    in.results = e.results;
    in.verdicts = e.verdicts;
    const RunReport report = BuildReport(in);
    SweepRow row;
    row.beta = beta;
    row.covered_apis = report.apis_covered;
    row.accepted_pairs = std::count_if(matched.pairs.begin(), matched.pairs.end(),
                                       [](const auto& p) { return p.verdict.accept; });
    row.cases = report.cases_generated;
    row.bug_verdicts = report.cases_triggering;
    row.api_bugs = report.ReportedApiBugs();
    row.effective_ratio = report.EffectiveRatio();
    rows.push_back(row);
  }
  const std::string tsv = SerializeSweep(rows);
  Write(files::kSweep, tsv);
  if (log_) *log_ << tsv;
  return rows;
}

void Pipeline::RunAll() {
  Ingest();
  Sample();
  Analyze();
  Match();
  Generate();
  Evaluate();
  Report();
}

}  // namespace bugport
