#ifndef BUGPORT_CORPUS_IO_H_
#define BUGPORT_CORPUS_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bugport/records.h"
#include "bugport/types.h"

namespace bugport {

// Accumulates corpus records from any number of sources, then resolves and
// checks cross-references once in Finish().
class CorpusBuilder {
 public:
  // Throws ParseError for malformed or unknown records, DuplicateError for a
  // repeated identifier.
  void AddRecord(const Json& record, const std::string& where);
  void AddText(std::string_view text, const std::string& source);
  void AddFile(const std::filesystem::path& path);

  // Throws ReferenceError for dangling API references and for bug cases whose
  // repro or recipe calls do not validate against their signatures. Status
  // oracle messages are normalized against the final API name set.
  Corpus Finish() &&;

 private:
  Corpus corpus_;
  std::map<std::string, std::string> where_;  // "<kind>:<id>" -> location
};

Corpus LoadCorpus(const std::vector<std::filesystem::path>& paths);
Corpus ParseCorpus(std::string_view text, const std::string& source = "corpus");

// Canonical line-delimited form: signatures, source functions, traces, bug
// cases, signature pairs, issues; each block in identifier order.
std::string SerializeCorpus(const Corpus& corpus);

std::string ReadFile(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

}  // namespace bugport

#endif  // BUGPORT_CORPUS_IO_H_
