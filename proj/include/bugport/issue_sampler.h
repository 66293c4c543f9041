#ifndef BUGPORT_ISSUE_SAMPLER_H_
#define BUGPORT_ISSUE_SAMPLER_H_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bugport/types.h"

namespace bugport {

struct SamplerPolicy {
  TokenSet bug_labels = {"bug"};
  TokenSet hardware_exclusions = {"m1", "mps", "apple-silicon", "rocm", "tpu"};
  int min_comments = 3;
};

enum class DiscardReason {
  kNoCode,
  kNotBugLabeled,
  kHardwareSpecific,
  kLowEngagement,
  kClosedWithoutChange,
};

std::string_view ToString(DiscardReason reason);

struct ScreenVerdict {
  std::optional<DiscardReason> discard;  // empty means Keep

  bool keep() const { return !discard.has_value(); }
  bool operator==(const ScreenVerdict&) const = default;
};

// Checks run in enum order; the first failing check wins.
ScreenVerdict ScreenIssue(const IssueRecord& issue, const SamplerPolicy& policy);

// Number of whole-token mentions of `api` in `text`. A token is a maximal run
// of identifier characters and dots; it mentions `api` when it equals the
// name or a dot-aligned suffix of it ("Conv2d", "nn.Conv2d").
int CountMentions(std::string_view text, std::string_view api);

// Offset of the first mention, or npos.
std::size_t FirstMention(std::string_view text, std::string_view api);

// Most-mentioned API in title and body that also appears in some code block.
// Ties break on earliest first mention, then on name.
std::optional<std::string> IdentifyProblematicApi(const IssueRecord& issue,
                                                  const std::set<std::string>& api_index);

enum class ExtractionError {
  kUnparsableCall,
  kNoOverheadRecipe,
  kPositionalArityMismatch,
};

std::string_view ToString(ExtractionError error);

struct ExtractionFailure {
  ExtractionError error;
  std::string detail;
};

struct Extraction {
  BugCase bug;
  // The issue had more than one code block; the first one calling the API
  // was used.
  bool multi_block = false;
};

// Parsed argument list of one call site before binding.
struct ParsedCall {
  std::vector<Value> positional;
  std::vector<std::pair<std::string, Value>> keywords;
};

// Parses the argument list starting at the '(' at `open`. Returns the parsed
// arguments and sets `end` past the closing ')'. Empty on any construct
// outside the literal grammar.
std::optional<ParsedCall> ParseArguments(std::string_view code, std::size_t open,
                                         std::size_t* end);

// Binds positional values in signature order, then keywords.
std::variant<StructuredCall, ExtractionFailure> BindCall(const ParsedCall& parsed,
                                                         const ApiSignature& sig);

struct ExtractOptions {
  std::optional<Comparator> comparator;  // performance cases only
  double margin = 1.05;
};

// Turns the first code block calling `sig.name` into a bug case with an oracle
// skeleton of kind `kind_hint`.
std::variant<Extraction, ExtractionFailure> ExtractBugCase(
    const IssueRecord& issue, const ApiSignature& sig, BugKind kind_hint,
    const ExtractOptions& options = {});

// Outcome of running the whole sampler over one issue.
struct SampleOutcome {
  std::string issue_id;
  std::string outcome;  // "extracted", "discarded", "no-api", "no-kind", "failed"
  std::string reason;
  std::optional<std::string> api;
  bool multi_block = false;
};

struct KindLabel {
  BugKind kind;
  std::optional<Comparator> comparator;
};

struct SampleResult {
  std::vector<BugCase> bug_cases;
  std::vector<SampleOutcome> outcomes;
};

// Screens, identifies and extracts every issue of `corpus` in id order.
// Issues without a label in `labels` are reported as "no-kind".
SampleResult SampleIssues(const Corpus& corpus, const SamplerPolicy& policy,
                          const std::map<std::string, KindLabel>& labels,
                          double margin = 1.05);

// Reads {"issue_id", "bug_kind", "comparator"?} lines.
std::map<std::string, KindLabel> ParseKindLabels(std::string_view text,
                                                 const std::string& source);

}  // namespace bugport

#endif  // BUGPORT_ISSUE_SAMPLER_H_
