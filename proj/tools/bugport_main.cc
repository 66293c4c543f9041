#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bugport/config.h"
#include "bugport/corpus_io.h"
#include "bugport/errors.h"
#include "bugport/pipeline.h"
#include "bugport/runner.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStageFailure = 1;
constexpr int kExitConfigError = 2;

struct Flags {
  std::string config;
  std::vector<std::string> corpus;
  std::map<std::string, std::string> values;  // setting key -> flag value
};

bugport::PipelineConfig ResolveConfig(const Flags& flags) {
  bugport::Settings settings;
  if (!flags.config.empty()) {
    std::string text;
    try {
      text = bugport::ReadFile(flags.config);
    } catch (const bugport::Error& e) {
      throw bugport::ConfigError(e.what());
    }
    settings = bugport::ParseSettings(text, flags.config);
  }
  for (const auto& [k, v] : bugport::SettingsFromEnvironment()) settings[k] = v;
  if (!flags.corpus.empty()) {
    std::string joined;
    for (const auto& c : flags.corpus) joined += (joined.empty() ? "" : ",") + c;
    settings["corpus"] = joined;
  }
  for (const auto& [k, v] : flags.values) {
    if (!v.empty()) settings[k] = v;
  }
  return bugport::BuildConfig(settings);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ports confirmed API bug cases to analogous APIs and judges the results."};
  app.require_subcommand(1);

  Flags flags;
  app.add_option("--config", flags.config, "Flat key = value configuration file");
  app.add_option("--corpus", flags.corpus, "Corpus file (repeatable)");
  const std::vector<std::pair<std::string, std::string>> mapped = {
      {"--out", "out"},
      {"--beta", "beta"},
      {"--alpha-io", "alpha_io"},
      {"--alpha-call", "alpha_call"},
      {"--runner-cmd", "runner_cmd"},
      {"--timeout-s", "timeout_s"},
      {"--margin", "margin"},
      {"--jobs", "jobs"},
      {"--suppress-list", "suppress_list"},
      {"--labels", "labels"},
      {"--template-dir", "template_dir"},
  };
  for (const auto& [flag, key] : mapped) {
    flags.values[key];
    app.add_option(flag, flags.values[key], "Overrides setting '" + key + "'");
  }

  std::map<std::string, void (bugport::Pipeline::*)()> stages = {
      {"ingest", &bugport::Pipeline::Ingest},     {"sample", &bugport::Pipeline::Sample},
      {"analyze", &bugport::Pipeline::Analyze},   {"match", &bugport::Pipeline::Match},
      {"generate", &bugport::Pipeline::Generate}, {"evaluate", &bugport::Pipeline::Evaluate},
      {"report", &bugport::Pipeline::Report},     {"run", &bugport::Pipeline::RunAll},
  };
  for (const auto& [name, fn] : stages) {
    app.add_subcommand(name, name == "run" ? "Run every stage from ingest to report"
                                           : "Run the " + name + " stage")
        ->fallthrough();
  }

  double sweep_from = 0.1, sweep_to = 0.9, sweep_step = 0.1;
  auto* sweep = app.add_subcommand("sweep-beta", "Match, generate and evaluate over a beta grid");
  sweep->fallthrough();
  sweep->add_option("--from", sweep_from, "First beta")->capture_default_str();
  sweep->add_option("--to", sweep_to, "Last beta")->capture_default_str();
  sweep->add_option("--step", sweep_step, "Grid step")->capture_default_str();

  std::string script_path;
  int protocol = bugport::kProtocolVersion;
  std::string dialect = "mock";
  auto* mock = app.add_subcommand("mock-runner", "Serve a scripted runner on stdin/stdout");
  mock->add_option("--script", script_path, "Mock script file")->required();
  mock->add_option("--protocol", protocol, "Protocol version to advertise")
      ->capture_default_str();
  mock->add_option("--dialect", dialect, "Dialect tag to advertise")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (mock->parsed()) {
      const auto script = bugport::MockScript::Load(script_path);
      bugport::ServeOptions options;
      options.protocol_versions = {protocol};
      options.dialect = dialect;
      return bugport::ServeMock(script, options, std::cin, std::cout);
    }
    bugport::Pipeline pipeline(ResolveConfig(flags), &std::cout);
    if (sweep->parsed()) {
      pipeline.SweepBeta(sweep_from, sweep_to, sweep_step);
      return kExitOk;
    }
    for (const auto& [name, fn] : stages) {
      if (app.got_subcommand(name)) (pipeline.*fn)();
    }
    return kExitOk;
  } catch (const bugport::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const bugport::Error& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return kExitStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return kExitStageFailure;
  }
}
