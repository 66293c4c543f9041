#include <random>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "bugport/case_generator.h"
#include "bugport/corpus_io.h"
#include "bugport/errors.h"
#include "bugport/validate.h"
#include "support/oracles.h"

namespace bugport {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;
using ::testing::IsEmpty;

class ConvFamilyTest : public ::testing::Test {
 protected:
  ConvFamilyTest()
      : corpus_(LoadCorpus({testing::FixturePath("signatures/conv_family.jsonl")})) {}

  const ApiSignature& Sig(std::string_view name) const { return corpus_.Signature(name); }

  static StructuredCall ConvCall() {
    return {"torch.nn.Conv2d", {{"in_channels", 512}, {"out_channels", 2048}, {"kernel_size", 1}},
            {}};
  }

  static CandidatePair Pair(std::string a, std::string b) {
    if (b < a) std::swap(a, b);
    return {a, b, 1.0, Provenance::kContext, std::nullopt, FilterVerdict::Accept()};
  }

  Corpus corpus_;
};

TEST_F(ConvFamilyTest, FeasibleDirection) {
  EXPECT_TRUE(FeasibleDirection(ConvCall(), Sig("torch.nn.LazyConv2d")));
  EXPECT_FALSE(FeasibleDirection(ConvCall(), Sig("torch.nn.LPPool2d")));
  EXPECT_TRUE(FeasibleDirection(ConvCall(), Sig("torch.nn.Conv3d")));
}

TEST_F(ConvFamilyTest, DropArgForLazyConv2d) {
  GenerationLog log;
  const auto call = ResolveArgumentDifference(ConvCall(), Sig("torch.nn.LazyConv2d"), &log);
  EXPECT_EQ(call.api, "torch.nn.LazyConv2d");
  EXPECT_EQ(call.args, (std::map<std::string, Value>{{"out_channels", 2048}, {"kernel_size", 1}}));
  EXPECT_THAT(log.transforms, ElementsAre(Transform{Transform::Kind::kDropArg, "in_channels"}));
}

TEST_F(ConvFamilyTest, DropInChannelsForLazyConvTranspose2d) {
  const auto call = ResolveArgumentDifference(ConvCall(), Sig("torch.nn.LazyConvTranspose2d"));
  EXPECT_EQ(call.api, "torch.nn.LazyConvTranspose2d");
  EXPECT_FALSE(call.args.count("in_channels"));
}

TEST_F(ConvFamilyTest, SharedNamesOnlyRenameTheApi) {
  GenerationLog log;
  const auto call = ResolveArgumentDifference(ConvCall(), Sig("torch.nn.Conv3d"), &log);
  EXPECT_EQ(call.api, "torch.nn.Conv3d");
  EXPECT_EQ(call.args, ConvCall().args);
  EXPECT_THAT(log.transforms, IsEmpty());
}

TEST_F(ConvFamilyTest, InfeasibleTargetThrows) {
  EXPECT_THROW(ResolveArgumentDifference(ConvCall(), Sig("torch.nn.LPPool2d")),
               InfeasibleDirectionError);
}

TEST_F(ConvFamilyTest, SetupFragmentsFollowTheRename) {
  StructuredCall call = ConvCall();
  call.setup = {"m = torch.nn.Conv2d(512, 2048, 1)", "y = Conv2d  # short name",
                "in_channels = 512"};
  GenerationLog log;
  const auto out = ResolveArgumentDifference(call, Sig("torch.nn.LazyConv2d"), &log);
  EXPECT_THAT(out.setup, ElementsAre("m = torch.nn.LazyConv2d(512, 2048, 1)",
                                     "y = LazyConv2d  # short name", "in_channels = 512"));
  ASSERT_EQ(log.warnings.size(), 1u);
  EXPECT_THAT(log.warnings[0], HasSubstr("in_channels"));
}

TEST_F(ConvFamilyTest, RankExpandToConv3d) {
  StructuredCall call = ConvCall();
  call.args["input"] = Value::Shape({2, 3, 8, 8});
  GenerationLog log;
  const auto out = ResolveDimensionDifference(call, Sig("torch.nn.Conv2d"), Sig("torch.nn.Conv3d"),
                                              &log);
  EXPECT_EQ(out.args.at("input"), Value::Shape({2, 3, 8, 8, 8}));
  EXPECT_THAT(log.transforms, ElementsAre(Transform{Transform::Kind::kRankExpand, "input:4->5"}));
  StructuredCall retargeted = out;
  retargeted.api = "torch.nn.Conv3d";
  EXPECT_THAT(ValidateCall(retargeted, Sig("torch.nn.Conv3d")), IsEmpty());
}

TEST_F(ConvFamilyTest, EqualRanksAreIdentity) {
  StructuredCall call = ConvCall();
  call.args["input"] = Value::Shape({2, 3, 8, 8});
  GenerationLog log;
  EXPECT_EQ(ResolveDimensionDifference(call, Sig("torch.nn.Conv2d"), Sig("torch.nn.LazyConv2d"),
                                       &log),
            call);
  EXPECT_THAT(log.transforms, IsEmpty());
}

TEST_F(ConvFamilyTest, NonShapeInRankedSlotIsUnresolvable) {
  StructuredCall call = ConvCall();
  call.args["input"] = Value(4);
  EXPECT_THROW(
      ResolveDimensionDifference(call, Sig("torch.nn.Conv2d"), Sig("torch.nn.Conv3d")),
      RankUnresolvableError);
}

TEST_F(ConvFamilyTest, StatusOracleWildcardsSourceName) {
  const OracleSpec raw = StatusOracle{{"RuntimeError", "torch.nn.Conv2d and Conv2d failed"}};
  const auto ported =
      std::get<StatusOracle>(PortOracle(raw, Sig("torch.nn.Conv2d"), Sig("torch.nn.Conv3d")));
  EXPECT_EQ(ported.exception.message, "<API> and <API> failed");
}

TEST_F(ConvFamilyTest, TimeRecipeRetargetsEveryLayer) {
  const BugCase& bug = corpus_.bug_cases.at("conv2d-grouped-time");
  GenerationLog log;
  const auto ported = std::get<PerformanceOracle>(
      PortOracle(bug.oracle, Sig("torch.nn.Conv2d"), Sig("torch.nn.LazyConvTranspose2d"), &log));
  const auto& original = std::get<PerformanceOracle>(bug.oracle);
  ASSERT_EQ(ported.baseline.body.size(), original.baseline.body.size());
  ASSERT_EQ(ported.subject.body.size(), original.subject.body.size());
  for (const auto& call : ported.baseline.body) {
    EXPECT_EQ(call.api, "torch.nn.LazyConvTranspose2d");
    EXPECT_FALSE(call.args.count("in_channels"));
  }
  EXPECT_EQ(ported.subject.body[0].args.at("groups"), Value(2));
  EXPECT_EQ(ported.baseline.metric, original.baseline.metric);
  EXPECT_EQ(ported.comparator, original.comparator);
  EXPECT_EQ(ported.margin, original.margin);
  EXPECT_THAT(log.transforms,
              ElementsAre(Transform{Transform::Kind::kRecipeRetarget, "baseline[0]"},
                          Transform{Transform::Kind::kRecipeRetarget, "baseline[1]"},
                          Transform{Transform::Kind::kRecipeRetarget, "subject[0]"}));
}

TEST_F(ConvFamilyTest, MemoryRecipeRetargetsToHardtanh) {
  const BugCase& bug = corpus_.bug_cases.at("relu6-inplace");
  const auto ported = std::get<PerformanceOracle>(
      PortOracle(bug.oracle, Sig("torch.nn.ReLU6"), Sig("torch.nn.Hardtanh")));
  EXPECT_EQ(ported.baseline.metric, Metric::kPeakMemoryMegabytes);
  EXPECT_EQ(ported.comparator, Comparator::kNoImprovement);
  EXPECT_EQ(ported.baseline.body[0].api, "torch.nn.Hardtanh");
  EXPECT_EQ(ported.subject.body[0].args.at("inplace"), Value(true));
}

TEST_F(ConvFamilyTest, RecipeWithoutTargetRequirementsFails) {
  const BugCase& bug = corpus_.bug_cases.at("conv2d-grouped-time");
  EXPECT_THROW(PortOracle(bug.oracle, Sig("torch.nn.Conv2d"), Sig("torch.nn.LPPool2d")),
               RecipeRetargetError);
}

TEST_F(ConvFamilyTest, SynthesizeConv3dHasOneRankExpand) {
  const BugCase& bug = corpus_.bug_cases.at("conv2d-grouped-time");
  const auto result = Synthesize(bug, Pair("torch.nn.Conv2d", "torch.nn.Conv3d"), corpus_);
  const auto& c = std::get<SynthesizedCase>(result);
  EXPECT_EQ(c.id, "conv2d-grouped-time@torch.nn.Conv3d");
  EXPECT_EQ(c.call.args.at("input"), Value::Shape({2, 512, 8, 8, 8}));
  int expands = 0;
  for (const auto& t : c.transforms) expands += t.kind == Transform::Kind::kRankExpand;
  EXPECT_EQ(expands, 1);
  EXPECT_EQ(c.fingerprint, Fingerprint(c.call));
  EXPECT_THAT(c.fingerprint, HasSubstr("torch.nn.Conv3d#"));
}

TEST_F(ConvFamilyTest, SynthesizeLazyConv2dHasOneDropArg) {
  BugCase bug;
  bug.id = "fig5";
  bug.api = "torch.nn.Conv2d";
  bug.call = ConvCall();
  bug.kind = BugKind::kStatus;
  bug.oracle = StatusOracle{ExceptionSignature::HardCrash()};
  const auto result = Synthesize(bug, Pair("torch.nn.Conv2d", "torch.nn.LazyConv2d"), corpus_);
  const auto& c = std::get<SynthesizedCase>(result);
  EXPECT_EQ(c.call.args,
            (std::map<std::string, Value>{{"out_channels", 2048}, {"kernel_size", 1}}));
  EXPECT_THAT(c.transforms, ElementsAre(Transform{Transform::Kind::kDropArg, "in_channels"}));
}

TEST_F(ConvFamilyTest, SynthesizeInfeasibleDirectionSkips) {
  BugCase bug;
  bug.id = "fig5";
  bug.api = "torch.nn.Conv2d";
  bug.call = ConvCall();
  bug.oracle = StatusOracle{ExceptionSignature::HardCrash()};
  CandidatePair pair = Pair("torch.nn.Conv2d", "torch.nn.LPPool2d");
  const auto result = Synthesize(bug, pair, corpus_);
  const auto& skip = std::get<Skip>(result);
  EXPECT_EQ(skip.reason, SkipReason::kInfeasibleDirection);
  EXPECT_EQ(skip.target_api, "torch.nn.LPPool2d");
}

TEST_F(ConvFamilyTest, RejectedPairIsAnError) {
  CandidatePair pair = Pair("torch.nn.Conv2d", "torch.nn.LPPool2d");
  pair.verdict = FilterVerdict::Reject("MutualRequiredMismatch");
  EXPECT_THROW(Synthesize(corpus_.bug_cases.at("conv2d-message"), pair, corpus_), Error);
}

TEST_F(ConvFamilyTest, SynthesizeIsDeterministicAndRoundTrips) {
  std::vector<SynthesizedCase> cases;
  for (const auto& [id, bug] : corpus_.bug_cases) {
    for (const auto& target : {"torch.nn.Conv3d", "torch.nn.LazyConv2d", "torch.nn.Hardtanh",
                               "torch.nn.LazyConvTranspose2d"}) {
      if (bug.api == target) continue;
      const auto first = Synthesize(bug, Pair(bug.api, target), corpus_);
      const auto second = Synthesize(bug, Pair(bug.api, target), corpus_);
      EXPECT_EQ(first, second);
      if (const auto* c = std::get_if<SynthesizedCase>(&first)) cases.push_back(*c);
    }
  }
  ASSERT_FALSE(cases.empty());
  EXPECT_EQ(ParseCases(SerializeCases(cases)), cases);
}

TEST(ResizeRankTest, ExpandRepeatsTrailingExtentAndShrinkTruncates) {
  EXPECT_EQ(ResizeRank({{2, 3, 8, 8}}, 5), (ShapeTuple{{2, 3, 8, 8, 8}}));
  EXPECT_EQ(ResizeRank({{2, 3, 8, 8}}, 3), (ShapeTuple{{2, 3, 8}}));
  EXPECT_EQ(ResizeRank({{2, 3}}, 2), (ShapeTuple{{2, 3}}));
  EXPECT_THROW(ResizeRank({{}}, 2), RankUnresolvableError);
}

TEST(ResizeRankTest, ExpandThenShrinkRestoresRandomCalls) {
  std::mt19937 rng(2718);
  std::uniform_int_distribution<int> rank(1, 5);
  std::uniform_int_distribution<int> grow(1, 3);
  std::uniform_int_distribution<std::int64_t> extent(1, 64);
  for (int trial = 0; trial < 1000; ++trial) {
    const int r = rank(rng);
    const int r2 = r + grow(rng);
    std::vector<std::int64_t> dims(r);
    for (auto& d : dims) d = extent(rng);

    ApiSignature narrow{"narrow", {{"input", r, std::nullopt}}, {{"k", std::nullopt, Value(1)}},
                        "pytorch-like"};
    ApiSignature wide{"wide", {{"input", r2, std::nullopt}}, {{"k", std::nullopt, Value(1)}},
                      "pytorch-like"};
    const StructuredCall call{"narrow", {{"input", Value::Shape(dims)}, {"k", 3}}, {}};
    const auto up = ResolveDimensionDifference(call, narrow, wide);
    const auto& grown = up.args.at("input").as_shape().dims;
    ASSERT_EQ(static_cast<int>(grown.size()), r2);
    for (int i = r; i < r2; ++i) EXPECT_EQ(grown[i], dims.back());
    const auto down = ResolveDimensionDifference(up, wide, narrow);
    EXPECT_EQ(down.args, call.args) << "trial " << trial;
  }
}

TEST(FingerprintTest, DependsOnApiAndArgumentsOnly) {
  const StructuredCall a{"x.f", {{"a", 1}, {"b", Value::Shape({2})}}, {"setup()"}};
  StructuredCall b = a;
  b.setup.clear();
  EXPECT_EQ(Fingerprint(a), Fingerprint(b));
  b.args["a"] = 2;
  EXPECT_NE(Fingerprint(a), Fingerprint(b));
  b = a;
  b.api = "x.g";
  EXPECT_EQ(Fingerprint(a).substr(Fingerprint(a).find('#')),
            Fingerprint(b).substr(Fingerprint(b).find('#')));
  EXPECT_EQ(Fingerprint(a).size(), std::string("x.f#").size() + 16);
}

TEST(ReplaceApiNameTest, WholeTokensOnly) {
  EXPECT_EQ(ReplaceApiName("nn.Conv2d(1) Conv2dX LazyConv2d Conv2d", "torch.nn.Conv2d", "<API>"),
            "nn.<API>(1) Conv2dX LazyConv2d <API>");
}

}  // namespace
}  // namespace bugport
