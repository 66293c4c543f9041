#ifndef BUGPORT_CONFIG_H_
#define BUGPORT_CONFIG_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bugport/context_matcher.h"
#include "bugport/issue_sampler.h"
#include "bugport/static_analyzer.h"

namespace bugport {

// Raw key/value settings, later layers overriding earlier ones.
using Settings = std::map<std::string, std::string>;

struct PipelineConfig {
  std::vector<std::string> corpus;
  std::string out = "out";
  SimilarityThresholds thresholds;
  MatchConfig match;
  SamplerPolicy sampler;
  std::string labels;
  // Either a shell command starting a runner, or "mock:<script path>" for
  // the in-process scripted runner.
  std::string runner_cmd;
  double timeout_s = 60.0;
  // When set, replaces the margin of every generated performance oracle.
  std::optional<double> margin;
  int jobs = 1;
  std::string suppress_list;
  std::string template_dir;
  std::map<std::string, std::string> templates;  // framework tag -> path

  // Template for a framework tag: explicit entry, else a file named after
  // the tag's prefix ("pytorch-like" -> pytorch.tmpl), else mock.tmpl.
  std::string TemplateFor(std::string_view framework) const;
};

// Flat "key = value" lines; '#' starts a comment; blank lines ignored.
// Throws ConfigError.
Settings ParseSettings(std::string_view text, const std::string& source);

// BUGPORT_<KEY> variables for every key without a dot, with the key upper
// cased ("runner_cmd" -> BUGPORT_RUNNER_CMD).
Settings SettingsFromEnvironment();

// Throws ConfigError for unknown keys, malformed numbers and out-of-range
// values.
PipelineConfig BuildConfig(const Settings& settings);

// Keys BuildConfig understands; dotted families are listed as "beta.*".
const std::vector<std::string>& KnownSettingKeys();

}  // namespace bugport

#endif  // BUGPORT_CONFIG_H_
