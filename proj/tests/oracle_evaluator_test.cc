#include <cmath>
#include <limits>
#include <random>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "bugport/errors.h"
#include "bugport/oracle_evaluator.h"

namespace bugport {
namespace {

using ::testing::Contains;
using ::testing::Pair;

MeasurementRecipe Recipe(Metric metric) {
  MeasurementRecipe r;
  r.metric = metric;
  r.repetitions = 5;
  r.warmup_runs = 1;
  return r;
}

PerformanceOracle Perf(Comparator comparator, double margin,
                       Metric metric = Metric::kWallTimeSeconds) {
  return {Recipe(metric), Recipe(metric), comparator, margin};
}

ExecutionResult Measured(double baseline, double subject,
                         Metric metric = Metric::kWallTimeSeconds) {
  ExecutionResult r;
  r.case_id = "c";
  r.measurements["baseline"] = {metric, std::vector<double>(5, baseline)};
  r.measurements["subject"] = {metric, std::vector<double>(5, subject)};
  return r;
}

SynthesizedCase CaseWith(OracleSpec oracle) {
  SynthesizedCase c;
  c.id = "c";
  c.oracle = std::move(oracle);
  return c;
}

ExecutionResult Raised(std::string type, std::string message) {
  ExecutionResult r;
  r.case_id = "c";
  r.status = RunStatus::kRaised;
  r.exception = NormalizeException(type, message);
  return r;
}

TEST(NormalizeExceptionTest, NumbersBecomeSlots) {
  const auto sig = NormalizeException("RuntimeError", "expected 4 channels, got 7");
  EXPECT_EQ(sig.type, "RuntimeError");
  EXPECT_EQ(sig.message, "expected <N> channels, got <N>");
}

TEST(NormalizeExceptionTest, PathsDoNotMatter) {
  EXPECT_EQ(NormalizeException("OSError", "cannot open /tmp/a/b.pt"),
            NormalizeException("OSError", "cannot open /home/u/c.pt"));
}

TEST(NormalizeExceptionTest, TypeMatters) {
  EXPECT_NE(NormalizeException("RuntimeError", "boom"), NormalizeException("ValueError", "boom"));
}

TEST(NormalizeExceptionTest, AddressesAndApiNames) {
  const ExceptionNormalizer normalize({"torch.nn.Conv2d", "torch.nn.Conv3d"});
  EXPECT_EQ(normalize("RuntimeError", "torch.nn.Conv3d at 0x7ffd12ab  failed").message,
            "<API> at <ADDR> failed");
}

TEST(NormalizeExceptionTest, Idempotent) {
  std::mt19937 rng(31);
  const std::vector<std::string> pieces = {
      "expected", "42",  "-3.5e2", "/usr/lib/x.so", "0xdeadBEEF", "torch.nn.Conv2d", "Conv2d",
      "channels", "[1,", "2]",     "(7)",           "got",        "\t",              "x1"};
  const ExceptionNormalizer normalize({"torch.nn.Conv2d"});
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 10);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string message;
    for (int i = len(rng); i > 0; --i) message += pieces[pick(rng)] + " ";
    const auto once = normalize("E", message);
    EXPECT_EQ(normalize("E", once.message), once) << message;
  }
}

TEST(CheckStatusTest, SameNormalizedSignature) {
  const StatusOracle oracle{NormalizeException("RuntimeError", "expected 3 channels, got 4")};
  EXPECT_TRUE(CheckStatus(oracle, Raised("RuntimeError", "expected 8 channels, got 9")));
  EXPECT_FALSE(CheckStatus(oracle, Raised("ValueError", "expected 8 channels, got 9")));
}

TEST(CheckStatusTest, SilentCrashMatchesHardCrashOracle) {
  ExecutionResult crashed;
  crashed.status = RunStatus::kCrashed;
  EXPECT_TRUE(CheckStatus({ExceptionSignature::HardCrash()}, crashed));
}

TEST(CheckStatusTest, CompletedRunDoesNotMatch) {
  ExecutionResult done;
  EXPECT_FALSE(CheckStatus({ExceptionSignature::HardCrash()}, done));
  EXPECT_FALSE(CheckStatus({{"RuntimeError", "x"}}, done));
}

TEST(CheckValueTest, PatternSpecific) {
  ExecutionResult r;
  r.flags = {AnomalyPattern::kNan};
  EXPECT_TRUE(CheckValue({AnomalyPattern::kNan, std::nullopt}, r));
  EXPECT_FALSE(CheckValue({AnomalyPattern::kInf, std::nullopt}, r));
  r.flags.clear();
  EXPECT_FALSE(CheckValue({AnomalyPattern::kNan, std::nullopt}, r));
}

TEST(CheckPerformanceTest, PublishedMeasurements) {
  const auto exceeds = Comparator::kSubjectExceedsBaseline;
  EXPECT_TRUE(CheckPerformance(Perf(exceeds, 1.0), Measured(8.91, 11.79)));
  EXPECT_TRUE(CheckPerformance(Perf(exceeds, 1.05), Measured(8.91, 11.79)));
  EXPECT_TRUE(CheckPerformance(Perf(exceeds, 1.05), Measured(20.09, 46.75)));
  EXPECT_TRUE(CheckPerformance(Perf(Comparator::kNoImprovement, 1.05, Metric::kPeakMemoryMegabytes),
                               Measured(40.43, 40.43, Metric::kPeakMemoryMegabytes)));
  // A healthy build drops to 21.82 MB.
  EXPECT_FALSE(CheckPerformance(
      Perf(Comparator::kNoImprovement, 1.05, Metric::kPeakMemoryMegabytes),
                                Measured(40.43, 21.82, Metric::kPeakMemoryMegabytes)));
}

TEST(CheckPerformanceTest, ComparatorBoundaries) {
  EXPECT_FALSE(ComparePerformance(Comparator::kSubjectExceedsBaseline, 1.0, 2.0, 2.0));
  EXPECT_TRUE(ComparePerformance(Comparator::kSubjectExceedsBaseline, 1.0, 2.0, 2.0001));
  EXPECT_TRUE(ComparePerformance(Comparator::kNoImprovement, 1.5, 2.0, 3.0));
  EXPECT_FALSE(ComparePerformance(Comparator::kNoImprovement, 1.5, 2.0, 3.01));
}

TEST(CheckPerformanceTest, MetricMismatchThrows) {
  EXPECT_THROW(CheckPerformance(Perf(Comparator::kSubjectExceedsBaseline, 1.05),
                                Measured(1.0, 2.0, Metric::kPeakMemoryMegabytes)),
               MetricMismatchError);
}

TEST(CheckPerformanceTest, AggregateIsMedian) {
  EXPECT_EQ((MeasurementSample{Metric::kWallTimeSeconds, {5, 1, 100, 3, 2}}).Aggregate(), 3.0);
  EXPECT_EQ((MeasurementSample{Metric::kWallTimeSeconds, {4, 1, 2, 3}}).Aggregate(), 2.5);
  EXPECT_TRUE(std::isnan((MeasurementSample{}).Aggregate()));
}

TEST(CheckPerformanceTest, VerdictInvariantUnderCommonScaling) {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> reading(0.01, 100.0);
  std::uniform_real_distribution<double> margin(1.0, 2.0);
  std::uniform_int_distribution<int> exponent(-6, 6);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto comparator =
        trial % 2 ? Comparator::kSubjectExceedsBaseline : Comparator::kNoImprovement;
    const auto oracle = Perf(comparator, margin(rng));
    const double b = reading(rng);
    const double s = trial % 7 == 0 ? b * oracle.margin : reading(rng);
    const double k = std::ldexp(1.0, exponent(rng));  // power of two: exact scaling
    EXPECT_EQ(CheckPerformance(oracle, Measured(b, s)),
              CheckPerformance(oracle, Measured(k * b, k * s)))
        << b << " " << s << " " << k;
  }
}

TEST(EvaluateTest, StatusMatchIsBug) {
  const auto v = Evaluate(CaseWith(StatusOracle{NormalizeException("RuntimeError", "bad 3")}),
                          Raised("RuntimeError", "bad 4"));
  EXPECT_EQ(Label(v), "Bug(status)");
  EXPECT_EQ(v.bug_kind, BugKind::kStatus);
}

TEST(EvaluateTest, PerformanceTimeoutIsInconclusive) {
  ExecutionResult r;
  r.case_id = "c";
  r.status = RunStatus::kTimeout;
  EXPECT_EQ(Label(Evaluate(CaseWith(Perf(Comparator::kNoImprovement, 1.05)), r)),
            "Inconclusive(timeout)");
}

TEST(EvaluateTest, CleanValueIsNoBug) {
  ExecutionResult r;
  r.case_id = "c";
  EXPECT_EQ(Label(Evaluate(CaseWith(ValueOracle{AnomalyPattern::kNan, std::nullopt}), r)), "NoBug");
}

TEST(EvaluateTest, CrashOutsideHardCrashOracle) {
  ExecutionResult r;
  r.case_id = "c";
  r.status = RunStatus::kCrashed;
  EXPECT_EQ(Label(Evaluate(CaseWith(StatusOracle{{"RuntimeError", "x"}}), r)), "NoBug");
  EXPECT_EQ(Label(Evaluate(CaseWith(StatusOracle{ExceptionSignature::HardCrash()}), r)),
            "Bug(status)");
  EXPECT_EQ(Label(Evaluate(CaseWith(ValueOracle{}), r)), "Inconclusive(crashed)");
}

TEST(EvaluateTest, RaisedUnderValueOracleIsInconclusive) {
  EXPECT_EQ(Label(Evaluate(CaseWith(ValueOracle{}), Raised("E", "m"))), "Inconclusive(raised)");
}

TEST(EvaluateTest, RunnerFailureAndCaseIdMismatch) {
  ExecutionResult r;
  r.case_id = "c";
  r.status = RunStatus::kCrashed;
  r.runner_error = "runner-dead: gone";
  const auto v = Evaluate(CaseWith(StatusOracle{ExceptionSignature::HardCrash()}), r);
  EXPECT_EQ(Label(v), "Inconclusive(runner-failure)");
  EXPECT_THAT(v.evidence, Contains(Pair("runner_error", "runner-dead: gone")));
  ExecutionResult other;
  other.case_id = "d";
  EXPECT_EQ(Label(Evaluate(CaseWith(ValueOracle{}), other)), "Inconclusive(case-id-mismatch)");
}

TEST(EvaluateTest, MalformedOrMissingMeasurements) {
  const auto oracle = Perf(Comparator::kSubjectExceedsBaseline, 1.05);
  ExecutionResult missing = Measured(1.0, 2.0);
  missing.measurements.erase("subject");
  EXPECT_EQ(Label(Evaluate(CaseWith(oracle), missing)), "Inconclusive(missing-measurement)");
  ExecutionResult short_run = Measured(1.0, 2.0);
  short_run.measurements["subject"].samples.pop_back();
  EXPECT_EQ(Label(Evaluate(CaseWith(oracle), short_run)), "Inconclusive(malformed-measurement)");
  ExecutionResult nan = Measured(1.0, 2.0);
  nan.measurements["baseline"].samples[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(Label(Evaluate(CaseWith(oracle), nan)), "Inconclusive(malformed-measurement)");
  ExecutionResult negative = Measured(1.0, -2.0);
  EXPECT_EQ(Label(Evaluate(CaseWith(oracle), negative)), "Inconclusive(malformed-measurement)");
  EXPECT_EQ(Label(Evaluate(CaseWith(oracle), Measured(1.0, 2.0, Metric::kPeakMemoryMegabytes))),
            "Inconclusive(metric-mismatch)");
}

TEST(EvaluateTest, TotalOverEveryStatusAndOracle) {
  const std::vector<OracleSpec> oracles = {StatusOracle{ExceptionSignature::HardCrash()},
                                           StatusOracle{{"E", "m"}}, ValueOracle{},
                                           Perf(Comparator::kNoImprovement, 1.05)};
  for (const auto& oracle : oracles) {
    for (auto status : {RunStatus::kCompleted, RunStatus::kRaised, RunStatus::kCrashed,
                        RunStatus::kTimeout}) {
      ExecutionResult r = Measured(1.0, 1.0);
      r.status = status;
      if (status == RunStatus::kRaised) r.exception = ExceptionSignature{"E", "m"};
      const auto v = Evaluate(CaseWith(oracle), r);
      EXPECT_EQ(v.case_id, "c");
      EXPECT_EQ(v.bug_kind.has_value(), v.outcome == Verdict::Outcome::kBug);
      EXPECT_EQ(!v.reason.empty(), v.outcome == Verdict::Outcome::kInconclusive);
    }
  }
}

TEST(OracleFingerprintTest, IgnoresArgumentValues) {
  EXPECT_EQ(OracleFingerprint(StatusOracle{{"RuntimeError", "bad <N>"}}),
            "status|RuntimeError|bad <N>");
  EXPECT_EQ(OracleFingerprint(ValueOracle{AnomalyPattern::kNan, std::nullopt}), "value|nan");
  auto a = Perf(Comparator::kNoImprovement, 1.05, Metric::kPeakMemoryMegabytes);
  auto b = a;
  b.margin = 1.5;
  b.subject.repetitions = 9;
  EXPECT_EQ(OracleFingerprint(a), OracleFingerprint(b));
  EXPECT_EQ(OracleFingerprint(a), "performance|peak-memory-megabytes|no_improvement");
}

}  // namespace
}  // namespace bugport
