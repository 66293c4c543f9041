#include "bugport/corpus_io.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "bugport/errors.h"
#include "bugport/oracle_evaluator.h"
#include "bugport/validate.h"

namespace bugport {
namespace {

template <typename Map, typename T>
void InsertUnique(Map& map, std::map<std::string, std::string>& where_by_key,
                  const std::string& kind, const std::string& id, T value,
                  const std::string& where) {
  const std::string key = kind + ":" + id;
  auto [it, inserted] = where_by_key.emplace(key, where);
  if (!inserted) {
    throw DuplicateError(where + ": " + kind + " '" + id +
                         "' already defined at " + it->second);
  }
  map.emplace(id, std::move(value));
}

void CheckCall(const Corpus& corpus, const StructuredCall& call,
               const std::string& context) {
  auto it = corpus.signatures.find(call.api);
  if (it == corpus.signatures.end()) {
    throw ReferenceError(context + ": call to unknown API '" + call.api + "'");
  }
  auto violations = ValidateCall(call, it->second);
  if (!violations.empty()) {
    throw ReferenceError(context + ": call to '" + call.api +
                         "' does not validate: " + Describe(violations));
  }
}

}  // namespace

void CorpusBuilder::AddRecord(const Json& record, const std::string& where) {
  const auto kind = record.value("kind", std::string());
  if (kind == "signature") {
    auto sig = SignatureFromJson(record);
    const auto name = sig.name;
    InsertUnique(corpus_.signatures, where_, kind, name, std::move(sig), where);
  } else if (kind == "source_function") {
    auto fn = FunctionFromJson(record);
    const auto name = fn.name;
    InsertUnique(corpus_.functions, where_, kind, name, std::move(fn), where);
  } else if (kind == "trace") {
    auto trace = TraceFromJson(record);
    const auto api = trace.api;
    InsertUnique(corpus_.traces, where_, kind, api, std::move(trace), where);
  } else if (kind == "bug_case") {
    auto bug = BugCaseFromJson(record);
    const auto id = bug.id;
    InsertUnique(corpus_.bug_cases, where_, kind, id, std::move(bug), where);
  } else if (kind == "signature_pair") {
    auto pair = SignaturePairFromJson(record);
    const std::string key = "signature_pair:" + pair.source + "->" + pair.target;
    auto [it, inserted] = where_.emplace(key, where);
    if (!inserted) {
      throw DuplicateError(where + ": signature pair " + pair.source + " -> " +
                           pair.target + " already defined at " + it->second);
    }
    where_.emplace("signature_pair_at:" + std::to_string(corpus_.signature_pairs.size()),
                   where);
    corpus_.signature_pairs.push_back(std::move(pair));
  } else if (kind == "issue") {
    auto issue = IssueFromJson(record);
    const auto id = issue.id;
    InsertUnique(corpus_.issues, where_, kind, id, std::move(issue), where);
  } else {
    throw ParseError("unknown record kind '" + kind + "'");
  }
}

void CorpusBuilder::AddText(std::string_view text, const std::string& source) {
  ForEachRecord(text, source, [&](const Json& record, const std::string& where) {
    AddRecord(record, where);
  });
}

void CorpusBuilder::AddFile(const std::filesystem::path& path) {
  AddText(ReadFile(path), path.string());
}

Corpus CorpusBuilder::Finish() && {
  Corpus& c = corpus_;
  auto located = [&](const std::string& key) {
    auto it = where_.find(key);
    return it == where_.end() ? key : it->second;
  };

  for (const auto& [api, trace] : c.traces) {
    if (!c.signatures.contains(api)) {
      throw ReferenceError(located("trace:" + api) + ": trace for unknown API '" +
                           api + "'");
    }
  }
  for (std::size_t i = 0; i < c.signature_pairs.size(); ++i) {
    const auto& p = c.signature_pairs[i];
    for (const auto* api : {&p.source, &p.target}) {
      if (!c.signatures.contains(*api)) {
        throw ReferenceError(located("signature_pair_at:" + std::to_string(i)) +
                             ": signature pair references unknown API '" + *api +
                             "'");
      }
    }
  }

  const ExceptionNormalizer normalize(c.ApiNames());
  for (auto& [id, bug] : c.bug_cases) {
    const std::string where = located("bug_case:" + id);
    CheckCall(c, bug.call, where);
    if (auto* perf = std::get_if<PerformanceOracle>(&bug.oracle)) {
      for (const auto* recipe : {&perf->baseline, &perf->subject}) {
        for (const auto& call : recipe->body) CheckCall(c, call, where + " (recipe)");
      }
    }
    if (auto* status = std::get_if<StatusOracle>(&bug.oracle)) {
      if (!status->exception.IsHardCrash()) {
        status->exception =
            normalize(status->exception.type, status->exception.message);
      }
    }
  }
  std::sort(c.signature_pairs.begin(), c.signature_pairs.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.source, a.target) < std::tie(b.source, b.target);
            });
  return std::move(corpus_);
}

Corpus LoadCorpus(const std::vector<std::filesystem::path>& paths) {
  CorpusBuilder builder;
  for (const auto& p : paths) builder.AddFile(p);
  return std::move(builder).Finish();
}

Corpus ParseCorpus(std::string_view text, const std::string& source) {
  CorpusBuilder builder;
  builder.AddText(text, source);
  return std::move(builder).Finish();
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  auto emit = [&](const Json& j) {
    out += j.dump();
    out += '\n';
  };
  for (const auto& [name, sig] : corpus.signatures) emit(ToJson(sig));
  for (const auto& [name, fn] : corpus.functions) emit(ToJson(fn));
  for (const auto& [api, trace] : corpus.traces) emit(ToJson(trace));
  for (const auto& [id, bug] : corpus.bug_cases) emit(ToJson(bug));
  for (const auto& pair : corpus.signature_pairs) emit(ToJson(pair));
  for (const auto& [id, issue] : corpus.issues) emit(ToJson(issue));
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bugport
