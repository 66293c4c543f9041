#include "bugport/static_analyzer.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "bugport/errors.h"
#include "bugport/jaccard.h"
#include "bugport/records.h"

namespace bugport {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

FunctionSimilarity ComputeFunctionSimilarity(const SourceFunction& a,
                                             const SourceFunction& b) {
  return {Jaccard(a.io_args, b.io_args), Jaccard(a.callees, b.callees)};
}

bool IsAnalogous(const FunctionSimilarity& sim,
                 const SimilarityThresholds& thresholds) {
  return sim.io >= thresholds.alpha_io && sim.call >= thresholds.alpha_call;
}

bool IsAnalogous(const SourceFunction& a, const SourceFunction& b,
                 const SimilarityThresholds& thresholds) {
  return IsAnalogous(ComputeFunctionSimilarity(a, b), thresholds);
}

std::vector<FunctionGroup> ClusterFunctions(
    std::span<const SourceFunction> functions,
    const SimilarityThresholds& thresholds) {
  const std::size_t n = functions.size();
  DisjointSets sets(n);

  auto consider = [&](std::size_t i, std::size_t j) {
    if (IsAnalogous(functions[i], functions[j], thresholds)) sets.Union(i, j);
  };

  if (thresholds.alpha_call > 0.0) {
    std::unordered_map<std::string, std::vector<std::size_t>> by_callee;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& callee : functions[i].callees) {
        by_callee[callee].push_back(i);
      }
    }
    std::vector<std::vector<std::size_t>> partners(n);
    for (const auto& [callee, ids] : by_callee) {
      for (std::size_t x = 0; x < ids.size(); ++x) {
        for (std::size_t y = x + 1; y < ids.size(); ++y) {
          partners[ids[x]].push_back(ids[y]);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto& p = partners[i];
      std::sort(p.begin(), p.end());
      p.erase(std::unique(p.begin(), p.end()), p.end());
      for (std::size_t j : p) consider(i, j);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) consider(i, j);
    }
  }

  std::map<std::size_t, TokenSet> components;
  for (std::size_t i = 0; i < n; ++i) {
    components[sets.Find(i)].insert(functions[i].name);
  }
  std::vector<FunctionGroup> groups;
  for (auto& [root, members] : components) {
    if (members.size() < 2) continue;
    groups.push_back({*members.begin(), std::move(members)});
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return groups;
}

std::vector<FunctionGroup> ClusterFunctions(
    const Corpus& corpus, const SimilarityThresholds& thresholds) {
  std::vector<SourceFunction> functions;
  functions.reserve(corpus.functions.size());
  for (const auto& [name, fn] : corpus.functions) functions.push_back(fn);
  return ClusterFunctions(functions, thresholds);
}

std::string SerializeGroups(const std::vector<FunctionGroup>& groups) {
  std::string out;
  for (const auto& g : groups) {
    out += ToJson(g).dump();
    out += '\n';
  }
  return out;
}

std::vector<FunctionGroup> ParseGroups(const std::string& text,
                                       const Corpus& corpus) {
  std::vector<FunctionGroup> groups;
  std::map<std::string, std::string> owner;
  ForEachRecord(text, "groups", [&](const Json& record, const std::string& where) {
    if (record.value("kind", "") != "function_group") {
      throw ParseError("expected a function_group record");
    }
    FunctionGroup g = GroupFromJson(record);
    if (g.members.size() < 2 || g.id != *g.members.begin()) {
      throw ParseError("group '" + g.id +
                       "' must have >= 2 members and be named by its smallest");
    }
    for (const auto& m : g.members) {
      if (!corpus.functions.contains(m)) {
        throw ReferenceError(where + ": unknown source function '" + m + "'");
      }
      if (!owner.emplace(m, g.id).second) {
        throw DuplicateError(where + ": function '" + m +
                             "' appears in more than one group");
      }
    }
    groups.push_back(std::move(g));
  });
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return groups;
}

}  // namespace bugport
