#include <algorithm>
#include <numeric>
#include <random>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "bugport/errors.h"
#include "bugport/report.h"

namespace bugport {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

SynthesizedCase Case(std::string id, std::string target, OracleSpec oracle) {
  SynthesizedCase c;
  c.id = std::move(id);
  c.source_case_id = c.id.substr(0, c.id.find('@'));
  c.target_api = std::move(target);
  c.oracle = std::move(oracle);
  return c;
}

Verdict Bug(const std::string& id, BugKind kind) {
  return {id, Verdict::Outcome::kBug, kind, "", {}};
}
Verdict NoBug(const std::string& id) { return {id, Verdict::Outcome::kNoBug, {}, "", {}}; }
Verdict Inconclusive(const std::string& id, std::string reason) {
  return {id, Verdict::Outcome::kInconclusive, {}, std::move(reason), {}};
}

ExecutionResult Wall(const std::string& id, double s) {
  ExecutionResult r;
  r.case_id = id;
  r.wall_time_s = s;
  return r;
}

TEST(MetricsTest, TriggerRatioMatchesPublishedFigures) {
  EXPECT_EQ(FormatMetric(TriggerRatio(143, 404)), "35.40");
  EXPECT_EQ(FormatMetric(TriggerRatio(82, 196)), "41.84");
  EXPECT_NEAR(*TriggerRatio(143, 404), 35.40, 0.01);
  EXPECT_NEAR(*TriggerRatio(82, 196), 41.84, 0.01);
}

TEST(MetricsTest, UndefinedWhenNothingToDivideBy) {
  EXPECT_EQ(TriggerRatio(0, 0), std::nullopt);
  EXPECT_EQ(AverageMinutesToBug(120.0, 0), std::nullopt);
  EXPECT_EQ(FormatMetric(std::nullopt), "undefined");
  EXPECT_EQ(AverageMinutesToBug(600.0, 5), 2.0);
  EXPECT_EQ(TriggerRatio(0, 4), 0.0);
}

TEST(SuppressionTest, ParseAndMatch) {
  const auto s = ParseSuppressions("# comment\ntorch.nn.Conv* performance\n\ntf.*\n", "sup");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_TRUE(s[0].Matches("torch.nn.Conv3d", BugKind::kPerformance));
  EXPECT_FALSE(s[0].Matches("torch.nn.Conv3d", BugKind::kStatus));
  EXPECT_FALSE(s[0].Matches("torch.nn.ReLU", BugKind::kPerformance));
  EXPECT_TRUE(s[1].Matches("tf.gather", BugKind::kValue));
  EXPECT_THROW(ParseSuppressions("a speed\n", "sup"), ConfigError);
  EXPECT_THROW(ParseSuppressions("a status extra\n", "sup"), ConfigError);
}

class FoldingTest : public ::testing::Test {
 protected:
  FoldingTest() {
    const StatusOracle crash{ExceptionSignature::HardCrash()};
    const StatusOracle raised{{"RuntimeError", "bad <N>"}};
    in_.cases = {Case("a@T", "T", crash), Case("b@T", "T", crash), Case("c@T", "T", raised),
                 Case("d@U", "U", ValueOracle{}), Case("e@U", "U", ValueOracle{}),
                 Case("f@V", "V", crash)};
    in_.verdicts = {Bug("a@T", BugKind::kStatus), Bug("b@T", BugKind::kStatus),
                    Bug("c@T", BugKind::kStatus), Bug("d@U", BugKind::kValue),
                    Inconclusive("e@U", "timeout")};
    in_.results = {Wall("a@T", 1.5), Wall("b@T", 2.25), Wall("c@T", 0.25), Wall("d@U", 4.0),
                   Wall("e@U", 2.0)};
    in_.skips = {{"g", "W", SkipReason::kRankUnresolvable, ""}};
  }
  ReportInputs in_;
};

TEST_F(FoldingTest, SameApiAndOracleFoldIntoOneBug) {
  const auto r = BuildReport(in_);
  ASSERT_EQ(r.api_bugs.size(), 3u);
  EXPECT_EQ(r.api_bugs[0].target_api, "T");
  EXPECT_EQ(r.api_bugs[0].case_ids.size() + r.api_bugs[1].case_ids.size(), 3u);
  EXPECT_EQ(r.api_bugs[2].target_api, "U");
  EXPECT_EQ(r.ReportedApiBugs(), 3);
  EXPECT_EQ(r.cases_triggering, 4);
}

TEST_F(FoldingTest, CountsAndMetrics) {
  const auto r = BuildReport(in_);
  EXPECT_EQ(r.cases_generated, 6);
  EXPECT_EQ(r.no_bug, 0);
  EXPECT_EQ(r.inconclusive, 1);
  EXPECT_EQ(r.not_run, 1);
  EXPECT_EQ(r.inconclusive_by_reason, (std::map<std::string, long>{{"timeout", 1}}));
  EXPECT_EQ(r.bugs_by_kind, (std::map<std::string, long>{{"status", 3}, {"value", 1}}));
  EXPECT_EQ(r.skips_by_reason, (std::map<std::string, long>{{"RankUnresolvable", 1}}));
  EXPECT_EQ(r.detection_s, 10.0);
  EXPECT_EQ(r.target_apis, 4);
  EXPECT_EQ(r.target_apis_with_bugs, 2);
  EXPECT_EQ(r.EffectiveRatio(), 0.5);
  EXPECT_EQ(r.cases[5].verdict, "NotRun");
}

TEST_F(FoldingTest, SuppressedBugsStayListedButAreNotCounted) {
  in_.suppressions = {{"T", BugKind::kStatus}};
  const auto r = BuildReport(in_);
  EXPECT_EQ(r.api_bugs.size(), 3u);
  EXPECT_EQ(r.ReportedApiBugs(), 1);
  EXPECT_TRUE(r.api_bugs[0].suppressed);
  EXPECT_FALSE(r.api_bugs[2].suppressed);
  EXPECT_EQ(r.cases_triggering, 4);
  EXPECT_THAT(SummaryTable(r), HasSubstr("api bugs suppressed"));
}

TEST(ReportTest, EmptyRunHasUndefinedRatios) {
  const auto r = BuildReport({});
  EXPECT_EQ(r.cases_generated, 0);
  EXPECT_EQ(r.EffectiveRatio(), std::nullopt);
  const std::string table = SummaryTable(r);
  EXPECT_THAT(table, HasSubstr("undefined"));
  EXPECT_THAT(SerializeReport(r), HasSubstr(R"("trigger_ratio_pct":"undefined")"));
}

TEST(ReportTest, SummaryRowsKeepKeysApart) {
  RunReport r;
  r.inconclusive_by_reason["malformed-measurement"] = 2;
  r.pairs_by_outcome["signature/reject"] = 1;
  const std::string table = SummaryTable(r);
  EXPECT_THAT(table, HasSubstr("  inconclusive malformed-measurement 2\n"));
  EXPECT_THAT(table, HasSubstr("  pairs signature/reject"));
}

TEST(ReportTest, MultiBlockIssuesAreSorted) {
  ReportInputs in;
  in.sample_outcomes = {{"gh-9", "extracted", "", {}, true},
                        {"gh-2", "extracted", "", {}, true},
                        {"gh-3", "extracted", "", {}, false}};
  EXPECT_THAT(BuildReport(in).multi_block_issues, ElementsAre("gh-2", "gh-9"));
}

ReportInputs RandomInputs(std::mt19937& rng) {
  const std::vector<OracleSpec> oracles = {
      StatusOracle{ExceptionSignature::HardCrash()}, StatusOracle{{"E", "m"}}, ValueOracle{},
      ValueOracle{AnomalyPattern::kInf, std::nullopt}, PerformanceOracle{}};
  const std::vector<std::string> reasons = {"timeout", "crashed", "raised"};
  std::uniform_int_distribution<int> n_cases(0, 40), pick_api(0, 5), pick_oracle(0, 4),
      outcome(0, 3), pick_reason(0, 2), wall_ms(0, 5000);
  ReportInputs in;
  const int n = n_cases(rng);
  for (int i = 0; i < n; ++i) {
    const std::string target = "api" + std::to_string(pick_api(rng));
    const std::string id = "s" + std::to_string(i) + "@" + target;
    const auto& oracle = oracles[pick_oracle(rng)];
    in.cases.push_back(Case(id, target, oracle));
    switch (outcome(rng)) {
      case 0:
        in.verdicts.push_back(Bug(id, KindOf(oracle)));
        break;
      case 1:
        in.verdicts.push_back(NoBug(id));
        break;
      case 2:
        in.verdicts.push_back(Inconclusive(id, reasons[pick_reason(rng)]));
        break;
      default:
        continue;  // not run
    }
    in.results.push_back(Wall(id, wall_ms(rng) / 1000.0));
  }
  in.suppressions = {{"api1", std::nullopt}, {"api[45]", BugKind::kValue}};
  return in;
}

TEST(ReportPropertyTest, VerdictsAreConserved) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = RandomInputs(rng);
    const auto r = BuildReport(in);
    EXPECT_EQ(r.cases_generated, static_cast<long>(in.cases.size()));
    EXPECT_EQ(r.cases_triggering + r.no_bug + r.inconclusive + r.not_run, r.cases_generated);
    long by_kind = 0;
    for (const auto& [k, v] : r.bugs_by_kind) by_kind += v;
    EXPECT_EQ(by_kind, r.cases_triggering);
    long by_reason = 0;
    for (const auto& [k, v] : r.inconclusive_by_reason) by_reason += v;
    EXPECT_EQ(by_reason, r.inconclusive);
    std::size_t folded = 0;
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& b : r.api_bugs) {
      folded += b.case_ids.size();
      keys.insert({b.target_api, b.oracle_fingerprint});
      EXPECT_EQ(b.suppressed, b.target_api == "api1" ||
                                  ((b.target_api == "api4" || b.target_api == "api5") &&
                                   b.kind == BugKind::kValue));
    }
    EXPECT_EQ(static_cast<long>(folded), r.cases_triggering);
    EXPECT_EQ(keys.size(), r.api_bugs.size());
    EXPECT_LE(r.ReportedApiBugs(), r.cases_triggering);
    EXPECT_LE(r.target_apis_with_bugs, r.target_apis);
  }
}

TEST(ReportPropertyTest, InputOrderDoesNotChangeTheReport) {
  std::mt19937 rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    auto in = RandomInputs(rng);
    const std::string expected = SerializeReport(BuildReport(in));
    std::shuffle(in.cases.begin(), in.cases.end(), rng);
    std::shuffle(in.verdicts.begin(), in.verdicts.end(), rng);
    std::shuffle(in.results.begin(), in.results.end(), rng);
    EXPECT_EQ(SerializeReport(BuildReport(in)), expected) << "trial " << trial;
  }
}

}  // namespace
}  // namespace bugport
