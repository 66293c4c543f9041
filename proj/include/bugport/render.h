#ifndef BUGPORT_RENDER_H_
#define BUGPORT_RENDER_H_

#include <filesystem>
#include <string>
#include <vector>

#include "bugport/case_generator.h"
#include "bugport/types.h"

namespace bugport {

// Text template for one framework dialect.
//
// Lines starting with "%%" are directives; "%% dialect: <name>" is
// mandatory. Everything else is copied verbatim except placeholders:
//   {setup} {call} {measure_baseline} {measure_subject} {oracle_assert}
//   {case_id} {target_api} {fingerprint}
// "{{" and "}}" produce literal braces. {call} must appear; performance cases
// also need both measure placeholders.
class RenderTemplate {
 public:
  // Throws TemplateError.
  static RenderTemplate Parse(const std::string& text);
  static RenderTemplate Load(const std::filesystem::path& path);

  const std::string& dialect() const { return dialect_; }
  bool Uses(std::string_view placeholder) const;

  // Alternating literal text and placeholder names; even indices are text.
  const std::vector<std::string>& pieces() const { return pieces_; }

 private:
  std::string dialect_;
  std::vector<std::string> pieces_;
};

// Dialects whose call syntax this renderer knows.
bool IsKnownDialect(std::string_view dialect);

// "api(name=value, ...)" with arguments in signature order; arguments the
// signature does not declare follow in name order.
std::string RenderCall(const StructuredCall& call, const ApiSignature* sig);

// Byte-identical output for identical inputs. Throws TemplateError.
std::string Render(const SynthesizedCase& synthesized,
                   const RenderTemplate& tmpl, const Corpus& corpus);

// Marker the mock runner uses to find a case's fingerprint in rendered text.
inline constexpr std::string_view kFingerprintMarker = "bugport-fingerprint: ";

}  // namespace bugport

#endif  // BUGPORT_RENDER_H_
