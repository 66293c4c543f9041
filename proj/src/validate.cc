#include "bugport/validate.h"

namespace bugport {

std::string_view ToString(CallViolation::Kind kind) {
  switch (kind) {
    case CallViolation::Kind::kMissingRequired: return "missing-required";
    case CallViolation::Kind::kUnknownParameter: return "unknown-parameter";
    case CallViolation::Kind::kRankMismatch: return "rank-mismatch";
    case CallViolation::Kind::kMalformedValue: return "malformed-value";
  }
  return "?";
}

std::string Describe(const std::vector<CallViolation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += ", ";
    out += std::string(ToString(v.kind)) + " '" + v.param + "'";
  }
  return out;
}

std::vector<CallViolation> ValidateCall(const StructuredCall& call,
                                        const ApiSignature& sig) {
  std::vector<CallViolation> out;
  for (const auto& p : sig.required) {
    if (!call.args.contains(p.name)) {
      out.push_back({CallViolation::Kind::kMissingRequired, p.name});
    }
  }
  for (const auto& [name, value] : call.args) {
    const ParamSpec* spec = sig.FindParam(name);
    if (spec == nullptr) {
      out.push_back({CallViolation::Kind::kUnknownParameter, name});
      continue;
    }
    if (!IsWellFormed(value)) {
      out.push_back({CallViolation::Kind::kMalformedValue, name});
      continue;
    }
    if (spec->rank && value.is_shape() &&
        static_cast<int>(value.as_shape().dims.size()) != *spec->rank) {
      out.push_back({CallViolation::Kind::kRankMismatch, name});
    }
  }
  return out;
}

}  // namespace bugport
