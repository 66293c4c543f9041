#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "bugport/corpus_io.h"
#include "support/oracles.h"

namespace bugport {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

struct Outcome {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

// Runs the binary from the repository root so mini.conf paths resolve.
Outcome RunBinary(const std::string& args, const std::string& env = "") {
  const std::string root = testing::FixturePath("..");
  const std::string command =
      "cd '" + root + "' && " + env + " '" + testing::BinaryPath() + "' " + args + " 2>&1";
  Outcome out;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.output.append(buf, n);
  const int status = ::pclose(pipe);
  out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string FreshDir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("bugport_cli_" + name);
  fs::remove_all(dir);
  return dir.string();
}

TEST(CliTest, RunSucceedsAndWritesTheReport) {
  const std::string out = FreshDir("run");
  const auto r = RunBinary("run --config fixtures/mini/mini.conf --out " + out);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(testing::ReportVerdicts(ReadFile(fs::path(out) / "report.jsonl")),
            testing::ExpectedMiniVerdicts());
}

TEST(CliTest, SingleStages) {
  const std::string out = FreshDir("stages");
  const std::string common = " --config fixtures/mini/mini.conf --out " + out;
  for (const char* stage : {"ingest", "sample", "analyze", "match", "generate", "evaluate",
                            "report"}) {
    const auto r = RunBinary(std::string(stage) + common);
    EXPECT_EQ(r.exit_code, 0) << stage << ": " << r.output;
  }
  EXPECT_TRUE(fs::exists(fs::path(out) / "report.jsonl"));
}

TEST(CliTest, StageFailureExitsOne) {
  const auto r = RunBinary("evaluate --config fixtures/mini/mini.conf --out " + FreshDir("empty"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_THAT(r.output, HasSubstr("stage failure"));
}

TEST(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(RunBinary("run --config no/such.conf").exit_code, 2);
  EXPECT_EQ(RunBinary("run --config fixtures/mini/mini.conf --beta 1.5").exit_code, 2);
  EXPECT_EQ(RunBinary("run --config fixtures/mini/mini.conf --jobs 0").exit_code, 2);
  EXPECT_EQ(RunBinary("frobnicate").exit_code, 2);
  EXPECT_EQ(RunBinary("").exit_code, 2);
  const auto bad = RunBinary("run --config fixtures/mini/mini.conf", "BUGPORT_ALPHA_IO=7");
  EXPECT_EQ(bad.exit_code, 2);
  EXPECT_THAT(bad.output, HasSubstr("config error"));
}

TEST(CliTest, FlagsOverrideEnvironmentOverrideFile) {
  const std::string out = FreshDir("layering");
  // The environment breaks the file's timeout; the flag repairs it.
  const auto r = RunBinary("match --config fixtures/mini/mini.conf --out " + out + " --timeout-s 2",
                     "BUGPORT_TIMEOUT_S=0");
  EXPECT_EQ(r.exit_code, 1) << r.output;  // config accepted, stage input missing
  EXPECT_THAT(r.output, HasSubstr("stage failure"));
  EXPECT_EQ(RunBinary("match --config fixtures/mini/mini.conf --out " + out, "BUGPORT_TIMEOUT_S=0")
                .exit_code,
            2);
}

TEST(CliTest, EnvironmentRedirectsOutput) {
  const std::string out = FreshDir("env_out");
  const auto r = RunBinary("ingest --config fixtures/mini/mini.conf", "BUGPORT_OUT=" + out);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(fs::exists(fs::path(out) / "corpus.jsonl"));
}

TEST(CliTest, SweepBetaPrintsNineRows) {
  const std::string out = FreshDir("sweep");
  const std::string common = " --config fixtures/mini/mini.conf --out " + out;
  ASSERT_EQ(RunBinary("ingest" + common).exit_code, 0);
  ASSERT_EQ(RunBinary("sample" + common).exit_code, 0);
  const auto r = RunBinary("sweep-beta --from 0.1 --to 0.9 --step 0.1" + common);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  const std::string tsv = ReadFile(fs::path(out) / "sweep.tsv");
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 10);
  EXPECT_THAT(tsv, HasSubstr("\n0.90\t"));
}

TEST(CliTest, MockRunnerRejectsMissingScript) {
  EXPECT_EQ(RunBinary("mock-runner --script /no/such/file < /dev/null").exit_code, 1);
  EXPECT_EQ(RunBinary("mock-runner < /dev/null").exit_code, 2);
}

}  // namespace
}  // namespace bugport
