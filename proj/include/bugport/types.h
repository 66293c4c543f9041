#ifndef BUGPORT_TYPES_H_
#define BUGPORT_TYPES_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bugport/value.h"

namespace bugport {

using TokenSet = std::set<std::string>;

struct ParamSpec {
  std::string name;
  // Expected tensor/tuple rank. Absent means the parameter is rank-free.
  std::optional<int> rank;
  // Only optional parameters carry a default.
  std::optional<Value> default_value;

  bool operator==(const ParamSpec&) const = default;
};

struct ApiSignature {
  std::string name;
  std::vector<ParamSpec> required;
  std::vector<ParamSpec> optional;
  std::string framework;

  const ParamSpec* FindParam(std::string_view param) const;
  bool HasParam(std::string_view param) const { return FindParam(param); }
  std::set<std::string> ParamNames() const;
  std::set<std::string> RequiredNames() const;
  // Required parameters followed by optional ones, in declaration order.
  std::vector<const ParamSpec*> PositionalOrder() const;

  bool operator==(const ApiSignature&) const = default;
};

struct SourceFunction {
  std::string name;
  TokenSet io_args;
  TokenSet callees;

  bool operator==(const SourceFunction&) const = default;
};

struct CallStackTrace {
  std::string api;
  TokenSet frames;

  bool operator==(const CallStackTrace&) const = default;
};

enum class BugKind { kStatus, kValue, kPerformance };
enum class Metric { kWallTimeSeconds, kPeakMemoryMegabytes };
enum class AnomalyPattern { kNan, kInf, kConstantOutput, kMismatchToken };
enum class Comparator { kSubjectExceedsBaseline, kNoImprovement };

std::string_view ToString(BugKind kind);
std::string_view ToString(Metric metric);
std::string_view ToString(AnomalyPattern pattern);
std::string_view ToString(Comparator comparator);
std::optional<BugKind> ParseBugKind(std::string_view text);
std::optional<Metric> ParseMetric(std::string_view text);
std::optional<AnomalyPattern> ParseAnomalyPattern(std::string_view text);
std::optional<Comparator> ParseComparator(std::string_view text);

// A call with every argument bound by name. Free-form code around the call
// is carried verbatim in `setup`.
struct StructuredCall {
  std::string api;
  std::map<std::string, Value> args;
  std::vector<std::string> setup;

  bool operator==(const StructuredCall&) const = default;
};

struct MeasurementRecipe {
  Metric metric = Metric::kWallTimeSeconds;
  int repetitions = 5;
  int warmup_runs = 1;
  std::vector<StructuredCall> body;

  bool operator==(const MeasurementRecipe&) const = default;
};

// Placeholder slots used in normalized exception messages.
inline constexpr std::string_view kApiSlot = "<API>";
inline constexpr std::string_view kNumberSlot = "<N>";
inline constexpr std::string_view kPathSlot = "<PATH>";
inline constexpr std::string_view kAddressSlot = "<ADDR>";

// Exception type plus a message with numbers, paths, addresses and API names
// replaced by placeholder slots.
struct ExceptionSignature {
  std::string type;
  std::string message;

  static constexpr std::string_view kHardCrash = "hard-crash";
  static ExceptionSignature HardCrash() { return {std::string(kHardCrash), ""}; }
  bool IsHardCrash() const { return type == kHardCrash; }

  bool operator==(const ExceptionSignature&) const = default;
};

struct StatusOracle {
  ExceptionSignature exception;

  bool operator==(const StatusOracle&) const = default;
};

struct ValueOracle {
  AnomalyPattern pattern = AnomalyPattern::kNan;
  std::optional<std::string> detail;

  bool operator==(const ValueOracle&) const = default;
};

struct PerformanceOracle {
  MeasurementRecipe baseline;
  MeasurementRecipe subject;
  Comparator comparator = Comparator::kSubjectExceedsBaseline;
  double margin = 1.05;

  bool operator==(const PerformanceOracle&) const = default;
};

using OracleSpec = std::variant<StatusOracle, ValueOracle, PerformanceOracle>;

BugKind KindOf(const OracleSpec& oracle);

struct BugCase {
  std::string id;
  std::string api;
  StructuredCall call;
  BugKind kind = BugKind::kStatus;
  OracleSpec oracle;
  std::optional<std::string> issue;

  bool operator==(const BugCase&) const = default;
};

// Precomputed signature-similarity pair, trusted as given.
struct SignaturePair {
  std::string source;
  std::string target;
  double score = 0.0;

  bool operator==(const SignaturePair&) const = default;
};

enum class IssueState { kOpen, kClosed };

struct IssueRecord {
  std::string id;
  std::string title;
  std::string body;
  TokenSet labels;
  int comment_count = 0;
  IssueState state = IssueState::kOpen;
  int linked_changes = 0;
  std::vector<std::string> code_blocks;
  TokenSet hardware_markers;

  bool operator==(const IssueRecord&) const = default;
};

struct Corpus {
  std::map<std::string, ApiSignature> signatures;
  std::map<std::string, SourceFunction> functions;
  std::map<std::string, CallStackTrace> traces;
  std::map<std::string, BugCase> bug_cases;
  std::vector<SignaturePair> signature_pairs;
  std::map<std::string, IssueRecord> issues;

  // Throws ReferenceError for unknown names.
  const ApiSignature& Signature(std::string_view api) const;
  std::set<std::string> ApiNames() const;

  bool operator==(const Corpus&) const = default;
};

// Collapses whitespace runs to a single space and trims both ends.
std::string NormalizeToken(std::string_view token);

// Last dot-separated segment: "torch.nn.Conv2d" -> "Conv2d".
std::string_view TerminalSegment(std::string_view api);

}  // namespace bugport

#endif  // BUGPORT_TYPES_H_
