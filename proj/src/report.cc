#include "bugport/report.h"

#include <fnmatch.h>

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "bugport/errors.h"
#include "bugport/records.h"

namespace bugport {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Json CountsToJson(const std::map<std::string, long>& counts) {
  Json j = Json::object();
  for (const auto& [k, v] : counts) j[k] = v;
  return j;
}

}  // namespace

std::optional<double> TriggerRatio(long valid, long total) {
  if (total <= 0) return std::nullopt;
  return 100.0 * static_cast<double>(valid) / static_cast<double>(total);
}

std::optional<double> AverageMinutesToBug(double detection_s, long bugs) {
  if (bugs <= 0) return std::nullopt;
  return detection_s / 60.0 / static_cast<double>(bugs);
}

std::string FormatMetric(std::optional<double> value, int precision) {
  if (!value) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *value);
  return buf;
}

bool Suppression::Matches(std::string_view api, BugKind bug_kind) const {
  if (kind && *kind != bug_kind) return false;
  return ::fnmatch(api_glob.c_str(), std::string(api).c_str(), 0) == 0;
}

std::vector<Suppression> ParseSuppressions(std::string_view text, const std::string& source) {
  std::vector<Suppression> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(Trim(line));
    std::string glob, kind, extra;
    if (!(fields >> glob)) continue;
    Suppression s{glob, std::nullopt};
    if (fields >> kind) {
      s.kind = ParseBugKind(kind);
      if (!s.kind) {
        throw ConfigError(source + ":" + std::to_string(number) + ": unknown bug kind '" +
                          kind + "'");
      }
    }
    if (fields >> extra) {
      throw ConfigError(source + ":" + std::to_string(number) + ": trailing text");
    }
    out.push_back(std::move(s));
  }
  return out;
}

long RunReport::ReportedApiBugs() const {
  return static_cast<long>(std::count_if(api_bugs.begin(), api_bugs.end(),
                                         [](const ApiBug& b) { return !b.suppressed; }));
}

std::optional<double> RunReport::EffectiveRatio() const {
  if (target_apis == 0) return std::nullopt;
  return static_cast<double>(target_apis_with_bugs) / static_cast<double>(target_apis);
}

RunReport BuildReport(const ReportInputs& in) {
  RunReport r;
  for (const auto& p : in.pairs) {
    r.pairs_by_outcome[std::string(ToString(p.provenance)) + "/" +
                       (p.verdict.accept ? "accept" : "reject")]++;
  }
  r.apis_covered = static_cast<long>(CoveredApis(in.pairs).size());
  for (const auto& s : in.skips) r.skips_by_reason[std::string(ToString(s.reason))]++;

  std::map<std::string, const Verdict*> verdicts;
  for (const auto& v : in.verdicts) verdicts[v.case_id] = &v;
  // Sum in case-id order so the floating-point total does not depend on
  // input order.
  std::map<std::string, double> wall;
  for (const auto& res : in.results) wall[res.case_id] += res.wall_time_s;

  for (const auto& [id, t] : wall) r.detection_s += t;

  std::vector<const SynthesizedCase*> cases;
  for (const auto& c : in.cases) cases.push_back(&c);
  std::sort(cases.begin(), cases.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });

  std::set<std::string> targets;
  std::set<std::string> targets_with_bugs;
  for (const auto& s : in.skips) targets.insert(s.target_api);

  std::map<std::tuple<std::string, std::string>, ApiBug> folded;
  for (const auto* c : cases) {
    ++r.cases_generated;
    targets.insert(c->target_api);
    CaseLine line{c->id, c->source_case_id, c->target_api, "NotRun"};
    auto it = verdicts.find(c->id);
    if (it == verdicts.end()) {
      ++r.not_run;
    } else {
      const Verdict& v = *it->second;
      line.verdict = Label(v);
      switch (v.outcome) {
        case Verdict::Outcome::kBug: {
          ++r.cases_triggering;
          const BugKind kind = v.bug_kind.value_or(KindOf(c->oracle));
          r.bugs_by_kind[std::string(ToString(kind))]++;
          targets_with_bugs.insert(c->target_api);
          const std::string fp = OracleFingerprint(c->oracle);
          auto& bug = folded[{c->target_api, fp}];
          bug.target_api = c->target_api;
          bug.kind = kind;
          bug.oracle_fingerprint = fp;
          bug.case_ids.push_back(c->id);
          break;
        }
        case Verdict::Outcome::kNoBug:
          ++r.no_bug;
          break;
        case Verdict::Outcome::kInconclusive:
          ++r.inconclusive;
          r.inconclusive_by_reason[v.reason]++;
          break;
      }
    }
    r.cases.push_back(std::move(line));
  }
  for (auto& [key, bug] : folded) {
    bug.suppressed = std::any_of(in.suppressions.begin(), in.suppressions.end(),
                                 [&](const Suppression& s) {
                                   return s.Matches(bug.target_api, bug.kind);
                                 });
    r.api_bugs.push_back(std::move(bug));
  }
  r.target_apis = static_cast<long>(targets.size());
  r.target_apis_with_bugs = static_cast<long>(targets_with_bugs.size());
  for (const auto& o : in.sample_outcomes) {
    if (o.multi_block) r.multi_block_issues.push_back(o.issue_id);
  }
  std::sort(r.multi_block_issues.begin(), r.multi_block_issues.end());
  return r;
}

std::string SerializeReport(const RunReport& r) {
  std::string out;
  auto emit = [&](const Json& j) {
    out += j.dump();
    out += '\n';
  };
  Json summary = {{"kind", "report_summary"},
                  {"cases_generated", r.cases_generated},
                  {"cases_triggering", r.cases_triggering},
                  {"no_bug", r.no_bug},
                  {"inconclusive", r.inconclusive},
                  {"not_run", r.not_run},
                  {"bugs_by_kind", CountsToJson(r.bugs_by_kind)},
                  {"inconclusive_by_reason", CountsToJson(r.inconclusive_by_reason)},
                  {"skips_by_reason", CountsToJson(r.skips_by_reason)},
                  {"pairs_by_outcome", CountsToJson(r.pairs_by_outcome)},
                  {"apis_covered", r.apis_covered},
                  {"target_apis", r.target_apis},
                  {"target_apis_with_bugs", r.target_apis_with_bugs},
                  {"api_bugs", r.ReportedApiBugs()},
                  {"detection_s", r.detection_s},
                  {"trigger_ratio_pct",
                   FormatMetric(TriggerRatio(r.cases_triggering, r.cases_generated))},
                  {"avg_minutes_to_bug",
                   FormatMetric(AverageMinutesToBug(r.detection_s, r.cases_triggering), 4)},
                  {"multi_block_issues", r.multi_block_issues}};
  emit(summary);
  for (const auto& b : r.api_bugs) {
    emit({{"kind", "api_bug"},
          {"target_api", b.target_api},
          {"bug_kind", ToString(b.kind)},
          {"oracle_fingerprint", b.oracle_fingerprint},
          {"case_ids", b.case_ids},
          {"suppressed", b.suppressed}});
  }
  for (const auto& c : r.cases) {
    emit({{"kind", "case_report"},
          {"case_id", c.case_id},
          {"source_case_id", c.source_case_id},
          {"target_api", c.target_api},
          {"verdict", c.verdict}});
  }
  return out;
}

std::string SummaryTable(const RunReport& r) {
  std::ostringstream os;
  auto row = [&](std::string_view key, const std::string& value) {
    os << key << ' ';
    for (std::size_t i = key.size() + 1; i < 36; ++i) os << ' ';
    os << value << '\n';
  };
  auto counts = [&](std::string_view prefix, const std::map<std::string, long>& m) {
    for (const auto& [k, v] : m) row(std::string(prefix) + k, std::to_string(v));
  };
  row("cases generated", std::to_string(r.cases_generated));
  row("cases triggering bugs", std::to_string(r.cases_triggering));
  row("no bug", std::to_string(r.no_bug));
  row("inconclusive", std::to_string(r.inconclusive));
  row("not run", std::to_string(r.not_run));
  counts("  bug ", r.bugs_by_kind);
  counts("  inconclusive ", r.inconclusive_by_reason);
  counts("  skip ", r.skips_by_reason);
  counts("  pairs ", r.pairs_by_outcome);
  row("apis covered", std::to_string(r.apis_covered));
  row("target apis", std::to_string(r.target_apis));
  row("target apis with bugs", std::to_string(r.target_apis_with_bugs));
  row("api bugs (folded)", std::to_string(r.ReportedApiBugs()));
  row("api bugs suppressed",
      std::to_string(static_cast<long>(r.api_bugs.size()) - r.ReportedApiBugs()));
  row("detection time (s)", FormatMetric(r.detection_s, 3));
  row("trigger ratio (%)", FormatMetric(TriggerRatio(r.cases_triggering, r.cases_generated)));
  row("avg time to bug (min)",
      FormatMetric(AverageMinutesToBug(r.detection_s, r.cases_triggering), 4));
  row("effective target ratio", FormatMetric(r.EffectiveRatio(), 4));
  for (const auto& issue : r.multi_block_issues) row("multi-block issue", issue);
  return os.str();
}

}  // namespace bugport
