#include "bugport/issue_sampler.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>
#include <tuple>

#include "bugport/errors.h"
#include "bugport/oracle_evaluator.h"
#include "bugport/records.h"
#include "bugport/validate.h"

namespace bugport {
namespace {

bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool IsTokenChar(char c) { return IsIdentChar(c) || c == '.'; }

bool IsDotSuffix(std::string_view token, std::string_view api) {
  if (token.empty() || token.size() > api.size()) return false;
  if (!api.ends_with(token)) return false;
  return token.size() == api.size() || api[api.size() - token.size() - 1] == '.';
}

// Calls fn(token, offset) for each token, with surrounding dots trimmed.
template <typename Fn>
void ForEachToken(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!IsTokenChar(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && IsTokenChar(text[j])) ++j;
    std::size_t b = i, e = j;
    while (b < e && text[b] == '.') ++b;
    while (e > b && text[e - 1] == '.') --e;
    if (b < e) fn(text.substr(b, e - b), b);
    i = j;
  }
}

// Offsets of '(' for call sites of `api` in `code`.
std::vector<std::size_t> CallSites(std::string_view code, std::string_view api) {
  std::vector<std::size_t> sites;
  ForEachToken(code, [&](std::string_view token, std::size_t at) {
    if (!IsDotSuffix(token, api)) return;
    std::size_t k = at + token.size();
    while (k < code.size() && (code[k] == ' ' || code[k] == '\t')) ++k;
    if (k < code.size() && code[k] == '(') sites.push_back(k);
  });
  return sites;
}

class ArgParser {
 public:
  explicit ArgParser(std::string_view s, std::size_t pos) : s_(s), pos_(pos) {}

  std::optional<ParsedCall> Parse(std::size_t* end) {
    ParsedCall out;
    if (!Eat('(')) return std::nullopt;
    Skip();
    if (Eat(')')) {
      *end = pos_;
      return out;
    }
    while (true) {
      Skip();
      if (auto kw = Keyword()) {
        auto v = ParseValue();
        if (!v) return std::nullopt;
        out.keywords.emplace_back(*kw, std::move(*v));
      } else {
        if (!out.keywords.empty()) return std::nullopt;
        auto v = ParseValue();
        if (!v) return std::nullopt;
        out.positional.push_back(std::move(*v));
      }
      Skip();
      if (Eat(')')) break;
      if (!Eat(',')) return std::nullopt;
      Skip();
      if (Eat(')')) break;  // trailing comma
    }
    *end = pos_;
    return out;
  }

 private:
  void Skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool Eat(char c) {
    Skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // "name =" (but not "=="); leaves pos_ after '=' on success.
  std::optional<std::string> Keyword() {
    std::size_t p = pos_;
    if (p >= s_.size() || !(std::isalpha(static_cast<unsigned char>(s_[p])) || s_[p] == '_')) {
      return std::nullopt;
    }
    while (p < s_.size() && IsIdentChar(s_[p])) ++p;
    std::string name(s_.substr(pos_, p - pos_));
    while (p < s_.size() && (s_[p] == ' ' || s_[p] == '\t')) ++p;
    if (p < s_.size() && s_[p] == '=' && (p + 1 >= s_.size() || s_[p + 1] != '=')) {
      pos_ = p + 1;
      return name;
    }
    return std::nullopt;
  }

  std::optional<Value> ParseValue() {
    Skip();
    if (pos_ >= s_.size()) return std::nullopt;
    const char c = s_[pos_];
    if (c == '(' || c == '[') return Sequence(c == '(' ? ')' : ']', c == '(');
    if (c == '"' || c == '\'') return String(c);
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      return Number();
    }
    for (auto [word, value] : {std::pair{"True", true}, std::pair{"False", false}}) {
      const std::string_view w(word);
      if (s_.substr(pos_, w.size()) == w &&
          (pos_ + w.size() >= s_.size() || !IsIdentChar(s_[pos_ + w.size()]))) {
        pos_ += w.size();
        return Value(value);
      }
    }
    return std::nullopt;
  }

  std::optional<Value> Sequence(char close, bool tuple) {
    ++pos_;
    Value::List items;
    Skip();
    if (!Eat(close)) {
      while (true) {
        auto v = ParseValue();
        if (!v) return std::nullopt;
        items.push_back(std::move(*v));
        if (Eat(close)) break;
        if (!Eat(',')) return std::nullopt;
        if (Eat(close)) break;
      }
    }
    if (tuple && !items.empty() &&
        std::all_of(items.begin(), items.end(),
                    [](const Value& v) { return v.is_int() && v.as_int() >= 1; })) {
      std::vector<int64_t> dims;
      for (const auto& v : items) dims.push_back(v.as_int());
      return Value::Shape(std::move(dims));
    }
    return Value(std::move(items));
  }

  std::optional<Value> String(char quote) {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      if (s_[pos_] == '\n') return std::nullopt;
      out += s_[pos_++];
    }
    if (pos_ >= s_.size()) return std::nullopt;
    ++pos_;
    return Value(std::move(out));
  }

  std::optional<Value> Number() {
    std::size_t p = pos_;
    if (s_[p] == '+' || s_[p] == '-') ++p;
    const std::size_t digits = p;
    bool is_float = false;
    while (p < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[p])) || s_[p] == '.' ||
            s_[p] == 'e' || s_[p] == 'E' ||
            ((s_[p] == '-' || s_[p] == '+') && (s_[p - 1] == 'e' || s_[p - 1] == 'E')))) {
      if (!std::isdigit(static_cast<unsigned char>(s_[p]))) is_float = true;
      ++p;
    }
    if (p == digits || (p < s_.size() && IsIdentChar(s_[p]))) return std::nullopt;
    std::string text(s_.substr(pos_, p - pos_));
    if (text.front() == '+') text.erase(0, 1);
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (is_float) {
      double d = 0;
      auto [ptr, ec] = std::from_chars(first, last, d);
      if (ec != std::errc() || ptr != last) return std::nullopt;
      pos_ = p;
      return Value(d);
    }
    int64_t n = 0;
    auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    pos_ = p;
    return Value(n);
  }

  std::string_view s_;
  std::size_t pos_;
};

std::vector<std::string> LinesBefore(std::string_view code, std::size_t offset) {
  std::vector<std::string> lines;
  const std::size_t line_start = code.rfind('\n', offset);
  if (line_start == std::string_view::npos) return lines;
  std::string_view head = code.substr(0, line_start);
  std::size_t start = 0;
  while (start <= head.size()) {
    std::size_t nl = head.find('\n', start);
    if (nl == std::string_view::npos) nl = head.size();
    std::string line(head.substr(start, nl - start));
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

struct CallSite {
  std::size_t block;
  std::size_t open;
  std::size_t end;
  StructuredCall call;
};

// Every parseable, bindable and valid call to `sig` across code blocks, in
// textual order. The first failure encountered is kept for diagnostics.
std::vector<CallSite> FindCalls(const IssueRecord& issue, const ApiSignature& sig,
                                std::optional<ExtractionFailure>* first_failure) {
  std::vector<CallSite> out;
  for (std::size_t b = 0; b < issue.code_blocks.size(); ++b) {
    const std::string& code = issue.code_blocks[b];
    for (std::size_t open : CallSites(code, sig.name)) {
      std::size_t end = open;
      auto parsed = ArgParser(code, open).Parse(&end);
      if (!parsed) {
        if (!*first_failure) {
          *first_failure = ExtractionFailure{ExtractionError::kUnparsableCall,
                                             "arguments outside the literal grammar"};
        }
        continue;
      }
      auto bound = BindCall(*parsed, sig);
      if (auto* failure = std::get_if<ExtractionFailure>(&bound)) {
        if (!*first_failure) *first_failure = *failure;
        continue;
      }
      out.push_back({b, open, end, std::get<StructuredCall>(std::move(bound))});
    }
  }
  return out;
}

std::string AllText(const IssueRecord& issue) {
  std::string text = issue.title + "\n" + issue.body;
  for (const auto& block : issue.code_blocks) text += "\n" + block;
  return text;
}

ExceptionSignature StatusSkeleton(const IssueRecord& issue) {
  static const std::regex kRaised(
      R"(\b([A-Z][A-Za-z0-9_]*(?:Error|Exception))[ \t]*:[ \t]*([^\n]*))");
  std::vector<const std::string*> texts = {&issue.body};
  for (const auto& block : issue.code_blocks) texts.push_back(&block);
  for (const std::string* text : texts) {
    std::smatch m;
    if (std::regex_search(*text, m, kRaised)) return {m[1].str(), m[2].str()};
  }
  return ExceptionSignature::HardCrash();
}

ValueOracle ValueSkeleton(const IssueRecord& issue) {
  const std::string text = AllText(issue);
  static const std::regex kNan(R"(\b(nan|NaN|NAN)\b)");
  static const std::regex kInf(R"(\b(inf|Inf|INF|infinity|Infinity)\b)");
  static const std::regex kConstant(R"(\b[Cc]onstant output\b)");
  if (std::regex_search(text, kNan)) return {AnomalyPattern::kNan, std::nullopt};
  if (std::regex_search(text, kInf)) return {AnomalyPattern::kInf, std::nullopt};
  if (std::regex_search(text, kConstant)) {
    return {AnomalyPattern::kConstantOutput, std::nullopt};
  }
  return {AnomalyPattern::kMismatchToken, std::nullopt};
}

int CountSubstr(std::string_view text, std::string_view needle) {
  int n = 0;
  for (std::size_t p = text.find(needle); p != std::string_view::npos;
       p = text.find(needle, p + needle.size())) {
    ++n;
  }
  return n;
}

constexpr std::string_view kTimeMarkers[] = {"time.time(", "time.perf_counter(",
                                             "time.monotonic(", "timeit"};
constexpr std::string_view kMemoryMarkers[] = {"max_memory_allocated", "memory_allocated(",
                                               "memory_reserved(", "tracemalloc",
                                               "ru_maxrss"};

}  // namespace

std::string_view ToString(DiscardReason reason) {
  switch (reason) {
    case DiscardReason::kNoCode: return "NoCode";
    case DiscardReason::kNotBugLabeled: return "NotBugLabeled";
    case DiscardReason::kHardwareSpecific: return "HardwareSpecific";
    case DiscardReason::kLowEngagement: return "LowEngagement";
    case DiscardReason::kClosedWithoutChange: return "ClosedWithoutChange";
  }
  return "?";
}

std::string_view ToString(ExtractionError error) {
  switch (error) {
    case ExtractionError::kUnparsableCall: return "UnparsableCall";
    case ExtractionError::kNoOverheadRecipe: return "NoOverheadRecipe";
    case ExtractionError::kPositionalArityMismatch: return "PositionalArityMismatch";
  }
  return "?";
}

ScreenVerdict ScreenIssue(const IssueRecord& issue, const SamplerPolicy& policy) {
  auto intersects = [](const TokenSet& a, const TokenSet& b) {
    return std::any_of(a.begin(), a.end(), [&](const auto& x) { return b.contains(x); });
  };
  if (issue.code_blocks.empty()) return {DiscardReason::kNoCode};
  if (!intersects(issue.labels, policy.bug_labels)) return {DiscardReason::kNotBugLabeled};
  if (intersects(issue.hardware_markers, policy.hardware_exclusions)) {
    return {DiscardReason::kHardwareSpecific};
  }
  if (issue.comment_count < policy.min_comments) return {DiscardReason::kLowEngagement};
  if (issue.state == IssueState::kClosed && issue.linked_changes == 0) {
    return {DiscardReason::kClosedWithoutChange};
  }
  return {};
}

int CountMentions(std::string_view text, std::string_view api) {
  int n = 0;
  ForEachToken(text, [&](std::string_view token, std::size_t) {
    if (IsDotSuffix(token, api)) ++n;
  });
  return n;
}

std::size_t FirstMention(std::string_view text, std::string_view api) {
  std::size_t first = std::string_view::npos;
  ForEachToken(text, [&](std::string_view token, std::size_t at) {
    if (first == std::string_view::npos && IsDotSuffix(token, api)) first = at;
  });
  return first;
}

std::optional<std::string> IdentifyProblematicApi(const IssueRecord& issue,
                                                  const std::set<std::string>& api_index) {
  const std::string prose = issue.title + "\n" + issue.body;
  struct Candidate {
    int count;
    std::size_t first;
    std::string api;
  };
  std::vector<Candidate> ranked;
  for (const auto& api : api_index) {
    const int count = CountMentions(prose, api);
    if (count > 0) ranked.push_back({count, FirstMention(prose, api), api});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.count, a.first, a.api) < std::tie(a.count, b.first, b.api);
  });
  for (const auto& c : ranked) {
    for (const auto& block : issue.code_blocks) {
      if (CountMentions(block, c.api) > 0) return c.api;
    }
  }
  return std::nullopt;
}

std::optional<ParsedCall> ParseArguments(std::string_view code, std::size_t open,
                                         std::size_t* end) {
  return ArgParser(code, open).Parse(end);
}

std::variant<StructuredCall, ExtractionFailure> BindCall(const ParsedCall& parsed,
                                                         const ApiSignature& sig) {
  const auto order = sig.PositionalOrder();
  if (parsed.positional.size() > order.size()) {
    return ExtractionFailure{ExtractionError::kPositionalArityMismatch,
                             std::to_string(parsed.positional.size()) +
                                 " positional values for " + std::to_string(order.size()) +
                                 " parameters"};
  }
  StructuredCall call;
  call.api = sig.name;
  for (std::size_t i = 0; i < parsed.positional.size(); ++i) {
    call.args.emplace(order[i]->name, parsed.positional[i]);
  }
  for (const auto& [name, value] : parsed.keywords) {
    if (!call.args.emplace(name, value).second) {
      return ExtractionFailure{ExtractionError::kUnparsableCall,
                               "parameter '" + name + "' bound twice"};
    }
  }
  const auto violations = ValidateCall(call, sig);
  if (!violations.empty()) {
    const bool arity = std::any_of(violations.begin(), violations.end(), [](const auto& v) {
      return v.kind == CallViolation::Kind::kMissingRequired;
    });
    return ExtractionFailure{arity ? ExtractionError::kPositionalArityMismatch
                                   : ExtractionError::kUnparsableCall,
                             Describe(violations)};
  }
  return call;
}

std::variant<Extraction, ExtractionFailure> ExtractBugCase(const IssueRecord& issue,
                                                           const ApiSignature& sig,
                                                           BugKind kind_hint,
                                                           const ExtractOptions& options) {
  std::optional<ExtractionFailure> failure;
  auto calls = FindCalls(issue, sig, &failure);
  if (calls.empty()) {
    if (failure) return *failure;
    return ExtractionFailure{ExtractionError::kUnparsableCall,
                             "no call to '" + sig.name + "' in any code block"};
  }
  CallSite& repro = calls.front();
  repro.call.setup = LinesBefore(issue.code_blocks[repro.block], repro.open);

  Extraction out;
  out.multi_block = issue.code_blocks.size() > 1;
  BugCase& bug = out.bug;
  bug.id = issue.id;
  bug.api = sig.name;
  bug.call = repro.call;
  bug.kind = kind_hint;
  bug.issue = issue.id;

  switch (kind_hint) {
    case BugKind::kStatus:
      bug.oracle = StatusOracle{StatusSkeleton(issue)};
      break;
    case BugKind::kValue:
      bug.oracle = ValueSkeleton(issue);
      break;
    case BugKind::kPerformance: {
      int time_markers = 0;
      int memory_markers = 0;
      for (const auto& block : issue.code_blocks) {
        for (auto m : kTimeMarkers) time_markers += CountSubstr(block, m);
        for (auto m : kMemoryMarkers) memory_markers += CountSubstr(block, m);
      }
      if (time_markers + memory_markers < 2) {
        return ExtractionFailure{ExtractionError::kNoOverheadRecipe,
                                 "code takes fewer than two measurements"};
      }
      const CallSite* baseline = nullptr;
      for (std::size_t i = 1; i < calls.size(); ++i) {
        if (calls[i].call.args != repro.call.args) {
          baseline = &calls[i];
          break;
        }
      }
      if (baseline == nullptr) {
        return ExtractionFailure{ExtractionError::kNoOverheadRecipe,
                                 "no baseline configuration of '" + sig.name + "'"};
      }
      PerformanceOracle perf;
      perf.baseline.metric = memory_markers > 0 ? Metric::kPeakMemoryMegabytes
                                                : Metric::kWallTimeSeconds;
      perf.subject.metric = perf.baseline.metric;
      StructuredCall base_call = baseline->call;
      base_call.setup = repro.call.setup;
      perf.baseline.body = {base_call};
      perf.subject.body = {repro.call};
      perf.comparator = options.comparator.value_or(Comparator::kSubjectExceedsBaseline);
      perf.margin = options.margin;
      bug.oracle = std::move(perf);
      break;
    }
  }
  return out;
}

SampleResult SampleIssues(const Corpus& corpus, const SamplerPolicy& policy,
                          const std::map<std::string, KindLabel>& labels, double margin) {
  SampleResult result;
  const auto api_index = corpus.ApiNames();
  const ExceptionNormalizer normalize(api_index);
  for (const auto& [id, issue] : corpus.issues) {
    SampleOutcome outcome;
    outcome.issue_id = id;
    const auto screen = ScreenIssue(issue, policy);
    if (!screen.keep()) {
      outcome.outcome = "discarded";
      outcome.reason = ToString(*screen.discard);
      result.outcomes.push_back(std::move(outcome));
      continue;
    }
    const auto api = IdentifyProblematicApi(issue, api_index);
    if (!api) {
      outcome.outcome = "no-api";
      outcome.reason = "NotFound";
      result.outcomes.push_back(std::move(outcome));
      continue;
    }
    outcome.api = *api;
    auto label = labels.find(id);
    if (label == labels.end()) {
      outcome.outcome = "no-kind";
      result.outcomes.push_back(std::move(outcome));
      continue;
    }
    auto extracted = ExtractBugCase(issue, corpus.Signature(*api), label->second.kind,
                                    {label->second.comparator, margin});
    if (auto* failure = std::get_if<ExtractionFailure>(&extracted)) {
      outcome.outcome = "failed";
      outcome.reason = std::string(ToString(failure->error)) + ": " + failure->detail;
      result.outcomes.push_back(std::move(outcome));
      continue;
    }
    auto& extraction = std::get<Extraction>(extracted);
    if (auto* status = std::get_if<StatusOracle>(&extraction.bug.oracle)) {
      if (!status->exception.IsHardCrash()) {
        status->exception = normalize(status->exception.type, status->exception.message);
      }
    }
    outcome.outcome = "extracted";
    outcome.multi_block = extraction.multi_block;
    result.bug_cases.push_back(std::move(extraction.bug));
    result.outcomes.push_back(std::move(outcome));
  }
  return result;
}

std::map<std::string, KindLabel> ParseKindLabels(std::string_view text,
                                                 const std::string& source) {
  std::map<std::string, KindLabel> labels;
  ForEachRecord(text, source, [&](const Json& record, const std::string& where) {
    const auto id = record.at("issue_id").get<std::string>();
    const auto kind = ParseBugKind(record.at("bug_kind").get<std::string>());
    if (!kind) throw ParseError("unknown bug_kind");
    KindLabel label{*kind, std::nullopt};
    if (record.contains("comparator")) {
      label.comparator = ParseComparator(record["comparator"].get<std::string>());
      if (!label.comparator) throw ParseError("unknown comparator");
    }
    if (!labels.emplace(id, label).second) {
      throw DuplicateError(where + ": label for issue '" + id + "' repeated");
    }
  });
  return labels;
}

}  // namespace bugport
