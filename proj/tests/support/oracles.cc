#include "oracles.h"

#include <fnmatch.h>

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>

#include "bugport/corpus_io.h"

namespace bugport::testing {
namespace {

TokenSet RandomSubset(std::mt19937& rng, const std::vector<std::string>& vocab, int lo,
                      int hi) {
  std::uniform_int_distribution<int> size(lo, hi);
  std::vector<std::string> pool = vocab;
  std::shuffle(pool.begin(), pool.end(), rng);
  const int n = std::min<int>(size(rng), static_cast<int>(pool.size()));
  return TokenSet(pool.begin(), pool.begin() + n);
}

std::string Numbered(std::string_view prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03d", i);
  return std::string(prefix) + buf;
}

int Find(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x];
  return x;
}

}  // namespace

std::string FixturePath(std::string_view relative) {
  return std::string(BUGPORT_FIXTURE_DIR) + "/" + std::string(relative);
}

std::string BinaryPath() { return BUGPORT_BINARY; }

std::string TemplateDir() { return BUGPORT_TEST_TEMPLATE_DIR; }

PipelineConfig MiniConfig(const std::string& out) {
  const std::string root = std::string(BUGPORT_FIXTURE_DIR) + "/..";
  Settings settings = ParseSettings(ReadFile(FixturePath("mini/mini.conf")), "mini.conf");
  for (const char* key : {"corpus", "labels", "suppress_list"}) {
    settings[key] = root + "/" + settings.at(key);
  }
  const std::string mock = "mock:";
  settings["runner_cmd"] = mock + root + "/" + settings.at("runner_cmd").substr(mock.size());
  settings["out"] = out;
  settings["template_dir"] = TemplateDir();
  return BuildConfig(settings);
}

std::map<std::string, std::string> ExpectedMiniVerdicts() {
  std::map<std::string, std::string> out;
  std::istringstream in(ReadFile(FixturePath("mini/expected_verdicts.tsv")));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

std::map<std::string, std::string> ReportVerdicts(const std::string& report_text) {
  std::map<std::string, std::string> out;
  std::istringstream in(report_text);
  std::string line;
  while (std::getline(in, line)) {
    const Json j = Json::parse(line);
    if (j.at("kind") == "case_report") {
      out[j.at("case_id").get<std::string>()] = j.at("verdict").get<std::string>();
    }
  }
  return out;
}

double NaiveJaccard(const TokenSet& a, const TokenSet& b) {
  std::vector<std::string> both;
  std::vector<std::string> either;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(either));
  if (either.empty()) return 0.0;
  return static_cast<double>(both.size()) / static_cast<double>(either.size());
}

std::vector<FunctionGroup> BruteForceGroups(const std::vector<SourceFunction>& functions,
                                            double alpha_io, double alpha_call) {
  const int n = static_cast<int>(functions.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double io = NaiveJaccard(functions[i].io_args, functions[j].io_args);
      const double call = NaiveJaccard(functions[i].callees, functions[j].callees);
      if (io >= alpha_io && call >= alpha_call) parent[Find(parent, i)] = Find(parent, j);
    }
  }
  std::map<int, TokenSet> components;
  for (int i = 0; i < n; ++i) components[Find(parent, i)].insert(functions[i].name);
  std::vector<FunctionGroup> groups;
  for (auto& [root, members] : components) {
    if (members.size() < 2) continue;
    groups.push_back({*members.begin(), members});
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return groups;
}

bool NaiveFilterAccept(const ApiSignature& a, const ApiSignature& b) {
  auto all_params = [](const ApiSignature& s) {
    TokenSet names;
    for (const auto& p : s.required) names.insert(p.name);
    for (const auto& p : s.optional) names.insert(p.name);
    return names;
  };
  auto lacks = [&](const ApiSignature& from, const ApiSignature& in) {
    const TokenSet names = all_params(in);
    for (const auto& p : from.required) {
      if (!names.count(p.name)) return true;
    }
    return false;
  };
  return !(lacks(a, b) && lacks(b, a));
}

std::vector<BrutePair> BruteForceContextPairs(const Corpus& corpus,
                                              const std::vector<FunctionGroup>& groups,
                                              double beta,
                                              const std::vector<std::string>& noise_patterns) {
  std::map<std::string, std::string> owner;
  for (const auto& g : groups) {
    for (const auto& m : g.members) owner[m] = g.id;
  }
  std::map<std::string, TokenSet> contexts;
  for (const auto& [api, trace] : corpus.traces) {
    TokenSet tokens;
    for (const auto& frame : trace.frames) {
      bool noise = false;
      for (const auto& pattern : noise_patterns) {
        noise = noise || ::fnmatch(pattern.c_str(), frame.c_str(), 0) == 0;
      }
      if (noise) continue;
      auto it = owner.find(frame);
      tokens.insert(it == owner.end() ? frame : it->second);
    }
    if (!tokens.empty()) contexts[api] = tokens;
  }
  std::vector<BrutePair> out;
  for (auto a = contexts.begin(); a != contexts.end(); ++a) {
    for (auto b = std::next(a); b != contexts.end(); ++b) {
      const auto& sa = corpus.signatures.at(a->first);
      const auto& sb = corpus.signatures.at(b->first);
      if (sa.framework != sb.framework) continue;
      const double score = NaiveJaccard(a->second, b->second);
      if (score < beta) continue;
      out.push_back({a->first, b->first, score, NaiveFilterAccept(sa, sb)});
    }
  }
  return out;
}

std::vector<SourceFunction> RandomFunctions(std::mt19937& rng, int count) {
  const std::vector<std::string> io = {"const Tensor& self", "const Tensor& other",
                                       "int64_t dim",        "bool keepdim",
                                       "Scalar alpha",       "IntArrayRef size"};
  const std::vector<std::string> calls = {"at::empty", "at::native::copy_", "at::mul",
                                          "at::add", "at::sum"};
  std::vector<SourceFunction> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({Numbered("f", i), RandomSubset(rng, io, 1, 3), RandomSubset(rng, calls, 0, 2)});
  }
  return out;
}

Corpus RandomMatchCorpus(std::mt19937& rng, int api_count) {
  Corpus corpus;
  const std::vector<std::string> frameworks = {"pytorch-like", "tensorflow-like", "jax-like"};
  const std::vector<std::string> params = {"input", "other", "dim", "axis", "alpha", "out"};
  const auto functions = RandomFunctions(rng, 24);
  std::vector<std::string> frames = {"kernel::a", "kernel::b", "kernel::c", "noise::alloc",
                                     "noise::free"};
  for (const auto& f : functions) {
    corpus.functions[f.name] = f;
    frames.push_back(f.name);
  }
  std::uniform_int_distribution<int> pick_framework(0, 2);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution rare(0.1);
  for (int i = 0; i < api_count; ++i) {
    ApiSignature sig;
    sig.name = Numbered("api", i);
    sig.framework = frameworks[pick_framework(rng)];
    for (const auto& p : params) {
      if (!coin(rng)) continue;
      if (coin(rng)) {
        sig.required.push_back({p, std::nullopt, std::nullopt});
      } else {
        sig.optional.push_back({p, std::nullopt, Value(0)});
      }
    }
    corpus.signatures[sig.name] = sig;
    if (rare(rng)) continue;  // untraced API
    CallStackTrace trace{sig.name, RandomSubset(rng, frames, 1, 5)};
    if (rare(rng)) trace.frames = {"noise::alloc", "noise::free"};
    corpus.traces[sig.name] = trace;
  }
  return corpus;
}

}  // namespace bugport::testing
