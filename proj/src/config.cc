#include "bugport/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "bugport/errors.h"

#ifndef BUGPORT_TEMPLATE_DIR
#define BUGPORT_TEMPLATE_DIR "templates"
#endif

namespace bugport {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = Trim(s.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

double ToDouble(const std::string& key, const std::string& value) {
  double d = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), d);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": '" + value + "' is not a number");
  }
  return d;
}

int ToInt(const std::string& key, const std::string& value) {
  int n = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": '" + value + "' is not an integer");
  }
  return n;
}

double UnitInterval(const std::string& key, const std::string& value) {
  const double d = ToDouble(key, value);
  if (!(d >= 0.0 && d <= 1.0)) throw ConfigError(key + ": " + value + " is outside [0, 1]");
  return d;
}

}  // namespace

const std::vector<std::string>& KnownSettingKeys() {
  static const std::vector<std::string> keys = {
      "corpus",      "out",          "alpha_io",     "alpha_call",
      "beta",        "beta.*",       "default_beta", "noise_patterns",
      "signature_top_k", "bug_labels", "hardware_exclusions", "min_comments",
      "labels",      "runner_cmd",   "timeout_s",    "margin",
      "jobs",        "suppress_list", "template_dir", "template.*"};
  return keys;
}

std::string PipelineConfig::TemplateFor(std::string_view framework) const {
  if (auto it = templates.find(std::string(framework)); it != templates.end()) {
    return it->second;
  }
  const std::string dir = template_dir.empty() ? BUGPORT_TEMPLATE_DIR : template_dir;
  const auto dash = framework.find('-');
  const std::string stem(framework.substr(0, dash));
  for (const char* known : {"pytorch", "tensorflow"}) {
    if (stem == known) return dir + "/" + stem + ".tmpl";
  }
  return dir + "/mock.tmpl";
}

Settings ParseSettings(std::string_view text, const std::string& source) {
  Settings settings;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected key = value");
    }
    const std::string key = Trim(std::string_view(trimmed).substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
    settings[key] = Trim(std::string_view(trimmed).substr(eq + 1));
  }
  return settings;
}

Settings SettingsFromEnvironment() {
  Settings settings;
  for (const auto& key : KnownSettingKeys()) {
    if (key.find('.') != std::string::npos) continue;
    std::string name = "BUGPORT_" + key;
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (const char* value = std::getenv(name.c_str())) settings[key] = value;
  }
  return settings;
}

PipelineConfig BuildConfig(const Settings& settings) {
  PipelineConfig c;
  for (const auto& [key, value] : settings) {
    if (key == "corpus") {
      c.corpus = SplitList(value);
    } else if (key == "out") {
      if (value.empty()) throw ConfigError("out: empty path");
      c.out = value;
    } else if (key == "alpha_io") {
      c.thresholds.alpha_io = UnitInterval(key, value);
    } else if (key == "alpha_call") {
      c.thresholds.alpha_call = UnitInterval(key, value);
    } else if (key == "beta") {
      c.match.beta_override = UnitInterval(key, value);
    } else if (key.starts_with("beta.")) {
      c.match.beta_by_framework[key.substr(5)] = UnitInterval(key, value);
    } else if (key == "default_beta") {
      c.match.default_beta = UnitInterval(key, value);
    } else if (key == "noise_patterns") {
      c.match.noise_patterns = SplitList(value);
    } else if (key == "signature_top_k") {
      const int k = ToInt(key, value);
      if (k < 0) throw ConfigError("signature_top_k must be non-negative");
      c.match.signature_top_k = static_cast<std::size_t>(k);
    } else if (key == "bug_labels") {
      const auto items = SplitList(value);
      c.sampler.bug_labels = TokenSet(items.begin(), items.end());
    } else if (key == "hardware_exclusions") {
      const auto items = SplitList(value);
      c.sampler.hardware_exclusions = TokenSet(items.begin(), items.end());
    } else if (key == "min_comments") {
      c.sampler.min_comments = ToInt(key, value);
      if (c.sampler.min_comments < 0) throw ConfigError("min_comments must be non-negative");
    } else if (key == "labels") {
      c.labels = value;
    } else if (key == "runner_cmd") {
      c.runner_cmd = value;
    } else if (key == "timeout_s") {
      c.timeout_s = ToDouble(key, value);
      if (!(c.timeout_s > 0)) throw ConfigError("timeout_s must be positive");
    } else if (key == "margin") {
      c.margin = ToDouble(key, value);
      if (!(*c.margin >= 1.0)) throw ConfigError("margin must be at least 1.0");
    } else if (key == "jobs") {
      c.jobs = ToInt(key, value);
      if (c.jobs < 1) throw ConfigError("jobs must be at least 1");
    } else if (key == "suppress_list") {
      c.suppress_list = value;
    } else if (key == "template_dir") {
      c.template_dir = value;
    } else if (key.starts_with("template.")) {
      c.templates[key.substr(9)] = value;
    } else {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }
  return c;
}

}  // namespace bugport
