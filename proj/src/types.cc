#include "bugport/types.h"

#include <cctype>

#include "bugport/errors.h"

namespace bugport {

const ParamSpec* ApiSignature::FindParam(std::string_view param) const {
  for (const auto& p : required) {
    if (p.name == param) return &p;
  }
  for (const auto& p : optional) {
    if (p.name == param) return &p;
  }
  return nullptr;
}

std::set<std::string> ApiSignature::ParamNames() const {
  std::set<std::string> names;
  for (const auto& p : required) names.insert(p.name);
  for (const auto& p : optional) names.insert(p.name);
  return names;
}

std::set<std::string> ApiSignature::RequiredNames() const {
  std::set<std::string> names;
  for (const auto& p : required) names.insert(p.name);
  return names;
}

std::vector<const ParamSpec*> ApiSignature::PositionalOrder() const {
  std::vector<const ParamSpec*> order;
  order.reserve(required.size() + optional.size());
  for (const auto& p : required) order.push_back(&p);
  for (const auto& p : optional) order.push_back(&p);
  return order;
}

std::string_view ToString(BugKind kind) {
  switch (kind) {
    case BugKind::kStatus: return "status";
    case BugKind::kValue: return "value";
    case BugKind::kPerformance: return "performance";
  }
  return "?";
}

std::string_view ToString(Metric metric) {
  switch (metric) {
    case Metric::kWallTimeSeconds: return "wall-time-seconds";
    case Metric::kPeakMemoryMegabytes: return "peak-memory-megabytes";
  }
  return "?";
}

std::string_view ToString(AnomalyPattern pattern) {
  switch (pattern) {
    case AnomalyPattern::kNan: return "nan";
    case AnomalyPattern::kInf: return "inf";
    case AnomalyPattern::kConstantOutput: return "constant-output";
    case AnomalyPattern::kMismatchToken: return "mismatch-token";
  }
  return "?";
}

std::string_view ToString(Comparator comparator) {
  switch (comparator) {
    case Comparator::kSubjectExceedsBaseline: return "subject_exceeds_baseline";
    case Comparator::kNoImprovement: return "no_improvement";
  }
  return "?";
}

std::optional<BugKind> ParseBugKind(std::string_view text) {
  for (auto k : {BugKind::kStatus, BugKind::kValue, BugKind::kPerformance}) {
    if (ToString(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<Metric> ParseMetric(std::string_view text) {
  for (auto m : {Metric::kWallTimeSeconds, Metric::kPeakMemoryMegabytes}) {
    if (ToString(m) == text) return m;
  }
  return std::nullopt;
}

std::optional<AnomalyPattern> ParseAnomalyPattern(std::string_view text) {
  for (auto p : {AnomalyPattern::kNan, AnomalyPattern::kInf,
                 AnomalyPattern::kConstantOutput,
                 AnomalyPattern::kMismatchToken}) {
    if (ToString(p) == text) return p;
  }
  return std::nullopt;
}

std::optional<Comparator> ParseComparator(std::string_view text) {
  for (auto c :
       {Comparator::kSubjectExceedsBaseline, Comparator::kNoImprovement}) {
    if (ToString(c) == text) return c;
  }
  return std::nullopt;
}

BugKind KindOf(const OracleSpec& oracle) {
  if (std::holds_alternative<StatusOracle>(oracle)) return BugKind::kStatus;
  if (std::holds_alternative<ValueOracle>(oracle)) return BugKind::kValue;
  return BugKind::kPerformance;
}

const ApiSignature& Corpus::Signature(std::string_view api) const {
  auto it = signatures.find(std::string(api));
  if (it == signatures.end()) {
    throw ReferenceError("unknown API '" + std::string(api) + "'");
  }
  return it->second;
}

std::set<std::string> Corpus::ApiNames() const {
  std::set<std::string> names;
  for (const auto& [name, sig] : signatures) names.insert(name);
  return names;
}

std::string NormalizeToken(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  bool pending_space = false;
  for (char c : token) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

std::string_view TerminalSegment(std::string_view api) {
  auto dot = api.rfind('.');
  return dot == std::string_view::npos ? api : api.substr(dot + 1);
}

}  // namespace bugport
