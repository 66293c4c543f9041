#include "bugport/oracle_evaluator.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "bugport/errors.h"

namespace bugport {
namespace {

bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool IsDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }
bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }

std::size_t MatchHex(std::string_view s, std::size_t i) {
  if (i + 2 >= s.size() || s[i] != '0' || (s[i + 1] != 'x' && s[i + 1] != 'X')) {
    return 0;
  }
  std::size_t j = i + 2;
  while (j < s.size() && std::isxdigit(static_cast<unsigned char>(s[j]))) ++j;
  if (j == i + 2 || (j < s.size() && IsIdentChar(s[j]))) return 0;
  return j - i;
}

bool IsPathStop(char c) {
  return IsSpace(c) || c == '\'' || c == '"' || c == ',' || c == '(' ||
         c == ')' || c == ':' || c == '`';
}

std::size_t MatchPath(std::string_view s, std::size_t i) {
  std::size_t start = i;
  if (s.substr(i, 3) == "../") {
    i += 3;
  } else if (s.substr(i, 2) == "./" || s.substr(i, 2) == "~/") {
    i += 2;
  } else if (s[i] == '/') {
    i += 1;
  } else if (i + 2 < s.size() && std::isalpha(static_cast<unsigned char>(s[i])) &&
             s[i + 1] == ':' && s[i + 2] == '\\') {
    i += 3;
  } else {
    return 0;
  }
  if (i >= s.size() || IsPathStop(s[i])) return 0;
  while (i < s.size() && !IsPathStop(s[i])) ++i;
  return i - start;
}

std::size_t MatchNumber(std::string_view s, std::size_t i) {
  std::size_t j = i;
  if (s[j] == '-' || s[j] == '+') ++j;
  if (j >= s.size() || !IsDigit(s[j])) return 0;
  while (j < s.size() && IsDigit(s[j])) ++j;
  if (j + 1 < s.size() && s[j] == '.' && IsDigit(s[j + 1])) {
    j += 1;
    while (j < s.size() && IsDigit(s[j])) ++j;
  }
  if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
    std::size_t k = j + 1;
    if (k < s.size() && (s[k] == '-' || s[k] == '+')) ++k;
    if (k < s.size() && IsDigit(s[k])) {
      while (k < s.size() && IsDigit(s[k])) ++k;
      j = k;
    }
  }
  if (j < s.size() && IsIdentChar(s[j])) return 0;
  return j - i;
}

std::string FormatNumber(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string JoinFlags(const std::set<AnomalyPattern>& flags) {
  std::string out = "[";
  for (auto f : flags) {
    if (out.size() > 1) out += ",";
    out += ToString(f);
  }
  return out + "]";
}

Verdict Make(const ExecutionResult& result, Verdict::Outcome outcome) {
  Verdict v;
  v.case_id = result.case_id;
  v.outcome = outcome;
  v.evidence.emplace_back("status", std::string(ToString(result.status)));
  return v;
}

Verdict Inconclusive(const ExecutionResult& result, std::string reason) {
  Verdict v = Make(result, Verdict::Outcome::kInconclusive);
  v.reason = std::move(reason);
  return v;
}

}  // namespace

std::string_view ToString(RunStatus status) {
  switch (status) {
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kRaised: return "raised";
    case RunStatus::kCrashed: return "crashed";
    case RunStatus::kTimeout: return "timeout";
  }
  return "?";
}

std::optional<RunStatus> ParseRunStatus(std::string_view text) {
  for (auto s : {RunStatus::kCompleted, RunStatus::kRaised, RunStatus::kCrashed,
                 RunStatus::kTimeout}) {
    if (ToString(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view ToString(Verdict::Outcome outcome) {
  switch (outcome) {
    case Verdict::Outcome::kBug: return "Bug";
    case Verdict::Outcome::kNoBug: return "NoBug";
    case Verdict::Outcome::kInconclusive: return "Inconclusive";
  }
  return "?";
}

std::string Label(const Verdict& verdict) {
  switch (verdict.outcome) {
    case Verdict::Outcome::kBug:
      return "Bug(" + std::string(ToString(*verdict.bug_kind)) + ")";
    case Verdict::Outcome::kNoBug:
      return "NoBug";
    case Verdict::Outcome::kInconclusive:
      return "Inconclusive(" + verdict.reason + ")";
  }
  return "?";
}

double MeasurementSample::Aggregate() const {
  if (samples.empty()) return std::nan("");
  if (std::any_of(samples.begin(), samples.end(), [](double s) { return std::isnan(s); })) {
    return std::nan("");
  }
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return sorted[mid];
  return (sorted[mid - 1] + sorted[mid]) / 2.0;
}

ExceptionNormalizer::ExceptionNormalizer(std::set<std::string> api_names) {
  std::set<std::string> names;
  for (const auto& n : api_names) {
    if (n.empty()) continue;
    names.insert(n);
    names.insert(std::string(TerminalSegment(n)));
  }
  names_.assign(names.begin(), names.end());
  std::stable_sort(names_.begin(), names_.end(), [](const auto& a, const auto& b) {
    return a.size() > b.size();
  });
}

ExceptionSignature ExceptionNormalizer::operator()(
    std::string_view type, std::string_view message) const {
  std::string out;
  bool pending_space = false;
  std::size_t i = 0;
  auto emit = [&](std::string_view piece) {
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out.append(piece);
  };
  while (i < message.size()) {
    const char c = message[i];
    if (IsSpace(c)) {
      pending_space = true;
      ++i;
      continue;
    }
    const bool boundary = i == 0 || !IsIdentChar(message[i - 1]);
    if (boundary) {
      if (std::size_t n = MatchPath(message, i)) {
        emit(kPathSlot);
        i += n;
        continue;
      }
      if (std::size_t n = MatchHex(message, i)) {
        emit(kAddressSlot);
        i += n;
        continue;
      }
      bool matched_name = false;
      for (const auto& name : names_) {
        if (message.substr(i, name.size()) != name) continue;
        const std::size_t end = i + name.size();
        if (end < message.size() && IsIdentChar(message[end])) continue;
        emit(kApiSlot);
        i = end;
        matched_name = true;
        break;
      }
      if (matched_name) continue;
      if (std::size_t n = MatchNumber(message, i)) {
        emit(kNumberSlot);
        i += n;
        continue;
      }
    }
    emit(std::string_view(&message[i], 1));
    ++i;
  }
  return {std::string(type), out};
}

ExceptionSignature NormalizeException(std::string_view type,
                                      std::string_view message,
                                      const std::set<std::string>& api_names) {
  return ExceptionNormalizer(api_names)(type, message);
}

bool CheckStatus(const StatusOracle& oracle, const ExecutionResult& result) {
  if (result.status == RunStatus::kCrashed) {
    return oracle.exception.IsHardCrash();
  }
  return result.status == RunStatus::kRaised && result.exception &&
         *result.exception == oracle.exception;
}

bool CheckValue(const ValueOracle& oracle, const ExecutionResult& result) {
  return result.status == RunStatus::kCompleted &&
         result.flags.contains(oracle.pattern);
}

bool ComparePerformance(Comparator comparator, double margin, double baseline,
                        double subject) {
  switch (comparator) {
    case Comparator::kSubjectExceedsBaseline:
      return subject > margin * baseline;
    case Comparator::kNoImprovement:
      return std::fabs(subject - baseline) <= (margin - 1.0) * baseline;
  }
  return false;
}

bool CheckPerformance(const PerformanceOracle& oracle,
                      const ExecutionResult& result) {
  auto fetch = [&](std::string_view slot,
                   const MeasurementRecipe& recipe) -> const MeasurementSample& {
    auto it = result.measurements.find(std::string(slot));
    if (it == result.measurements.end()) {
      throw MetricMismatchError("no measurement for slot '" + std::string(slot) + "'");
    }
    if (it->second.metric != recipe.metric) {
      throw MetricMismatchError("slot '" + std::string(slot) + "' measured " +
                                std::string(ToString(it->second.metric)) +
                                ", recipe expects " +
                                std::string(ToString(recipe.metric)));
    }
    return it->second;
  };
  const auto& baseline = fetch(kBaselineSlot, oracle.baseline);
  const auto& subject = fetch(kSubjectSlot, oracle.subject);
  return ComparePerformance(oracle.comparator, oracle.margin,
                            baseline.Aggregate(), subject.Aggregate());
}

Verdict Evaluate(const SynthesizedCase& synthesized,
                 const ExecutionResult& result) {
  if (result.case_id != synthesized.id) {
    return Inconclusive(result, "case-id-mismatch");
  }
  if (result.runner_error) {
    Verdict v = Inconclusive(result, "runner-failure");
    v.evidence.emplace_back("runner_error", *result.runner_error);
    return v;
  }
  if (result.status == RunStatus::kTimeout) return Inconclusive(result, "timeout");

  const OracleSpec& oracle = synthesized.oracle;
  if (const auto* status = std::get_if<StatusOracle>(&oracle)) {
    const bool hit = CheckStatus(*status, result);
    Verdict v = Make(result, hit ? Verdict::Outcome::kBug : Verdict::Outcome::kNoBug);
    if (hit) v.bug_kind = BugKind::kStatus;
    v.evidence.emplace_back("expected_type", status->exception.type);
    v.evidence.emplace_back("expected_message", status->exception.message);
    if (result.exception) {
      v.evidence.emplace_back("observed_type", result.exception->type);
      v.evidence.emplace_back("observed_message", result.exception->message);
    }
    return v;
  }

  if (result.status == RunStatus::kRaised) {
    Verdict v = Inconclusive(result, "raised");
    if (result.exception) {
      v.evidence.emplace_back("observed_type", result.exception->type);
      v.evidence.emplace_back("observed_message", result.exception->message);
    }
    return v;
  }
  if (result.status == RunStatus::kCrashed) return Inconclusive(result, "crashed");

  if (const auto* value = std::get_if<ValueOracle>(&oracle)) {
    const bool hit = CheckValue(*value, result);
    Verdict v = Make(result, hit ? Verdict::Outcome::kBug : Verdict::Outcome::kNoBug);
    if (hit) v.bug_kind = BugKind::kValue;
    v.evidence.emplace_back("expected_flag", std::string(ToString(value->pattern)));
    v.evidence.emplace_back("observed_flags", JoinFlags(result.flags));
    return v;
  }

  const auto& perf = std::get<PerformanceOracle>(oracle);
  for (const auto& [slot, recipe] :
       {std::pair{kBaselineSlot, &perf.baseline}, std::pair{kSubjectSlot, &perf.subject}}) {
    auto it = result.measurements.find(std::string(slot));
    if (it == result.measurements.end()) {
      return Inconclusive(result, "missing-measurement");
    }
    const auto& samples = it->second.samples;
    const bool bad_sample = std::any_of(samples.begin(), samples.end(), [](double s) {
      return !std::isfinite(s) || s < 0.0;
    });
    if (static_cast<int>(samples.size()) != recipe->repetitions || bad_sample) {
      return Inconclusive(result, "malformed-measurement");
    }
  }
  bool hit = false;
  try {
    hit = CheckPerformance(perf, result);
  } catch (const MetricMismatchError& e) {
    Verdict v = Inconclusive(result, "metric-mismatch");
    v.evidence.emplace_back("detail", e.what());
    return v;
  }
  const double baseline = result.measurements.at(std::string(kBaselineSlot)).Aggregate();
  const double subject = result.measurements.at(std::string(kSubjectSlot)).Aggregate();
  Verdict v = Make(result, hit ? Verdict::Outcome::kBug : Verdict::Outcome::kNoBug);
  if (hit) v.bug_kind = BugKind::kPerformance;
  v.evidence.emplace_back("metric", std::string(ToString(perf.baseline.metric)));
  v.evidence.emplace_back("comparator", std::string(ToString(perf.comparator)));
  v.evidence.emplace_back("margin", FormatNumber(perf.margin));
  v.evidence.emplace_back("baseline", FormatNumber(baseline));
  v.evidence.emplace_back("subject", FormatNumber(subject));
  return v;
}

std::string OracleFingerprint(const OracleSpec& oracle) {
  if (const auto* s = std::get_if<StatusOracle>(&oracle)) {
    return "status|" + s->exception.type + "|" + s->exception.message;
  }
  if (const auto* v = std::get_if<ValueOracle>(&oracle)) {
    return "value|" + std::string(ToString(v->pattern));
  }
  const auto& p = std::get<PerformanceOracle>(oracle);
  return "performance|" + std::string(ToString(p.baseline.metric)) + "|" +
         std::string(ToString(p.comparator));
}

}  // namespace bugport
