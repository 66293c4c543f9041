#ifndef BUGPORT_VALIDATE_H_
#define BUGPORT_VALIDATE_H_

#include <string>
#include <string_view>
#include <vector>

#include "bugport/types.h"

namespace bugport {

struct CallViolation {
  enum class Kind { kMissingRequired, kUnknownParameter, kRankMismatch, kMalformedValue };
  Kind kind;
  std::string param;

  bool operator==(const CallViolation&) const = default;
};

std::string_view ToString(CallViolation::Kind kind);
std::string Describe(const std::vector<CallViolation>& violations);

// Empty result means the call is acceptable for `sig`.
std::vector<CallViolation> ValidateCall(const StructuredCall& call,
                                        const ApiSignature& sig);

}  // namespace bugport

#endif  // BUGPORT_VALIDATE_H_
