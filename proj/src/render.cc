#include "bugport/render.h"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>

#include "bugport/corpus_io.h"
#include "bugport/errors.h"
#include "bugport/oracle_evaluator.h"

namespace bugport {
namespace {

constexpr std::array<std::string_view, 8> kPlaceholders = {
    "setup",       "call",        "measure_baseline", "measure_subject",
    "oracle_assert", "case_id",   "target_api",       "fingerprint"};

constexpr std::array<std::string_view, 3> kDialects = {"pytorch", "tensorflow",
                                                       "mock"};

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string Indent(const std::string& text, std::string_view prefix) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    out += prefix;
    out += line;
    out += '\n';
  }
  return out;
}

const ApiSignature* Lookup(const Corpus& corpus, const std::string& api) {
  auto it = corpus.signatures.find(api);
  return it == corpus.signatures.end() ? nullptr : &it->second;
}

std::string RenderMeasure(const MeasurementRecipe& recipe, std::string_view slot,
                          const Corpus& corpus) {
  std::string body;
  for (const auto& call : recipe.body) {
    for (const auto& fragment : call.setup) body += fragment + "\n";
    body += RenderCall(call, Lookup(corpus, call.api)) + "\n";
  }
  if (body.empty()) body = "pass\n";
  std::string out = "# recipe " + std::string(slot) + ": " +
                    std::string(ToString(recipe.metric)) +
                    ", repetitions=" + std::to_string(recipe.repetitions) +
                    ", warmup_runs=" + std::to_string(recipe.warmup_runs) + "\n";
  out += "def __bugport_" + std::string(slot) + "():\n";
  out += Indent(body, "    ");
  return out;
}

std::string RenderOracle(const OracleSpec& oracle) {
  if (const auto* s = std::get_if<StatusOracle>(&oracle)) {
    if (s->exception.IsHardCrash()) return "# expect status: hard-crash";
    return "# expect status: " + s->exception.type + ": " + s->exception.message;
  }
  if (const auto* v = std::get_if<ValueOracle>(&oracle)) {
    return "# expect value: " + std::string(ToString(v->pattern));
  }
  const auto& p = std::get<PerformanceOracle>(oracle);
  std::ostringstream os;
  os << "# expect performance: " << ToString(p.baseline.metric) << ' '
     << ToString(p.comparator) << " margin=" << p.margin;
  return os.str();
}

std::string StripTrailingNewline(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace

bool IsKnownDialect(std::string_view dialect) {
  return std::find(kDialects.begin(), kDialects.end(), dialect) != kDialects.end();
}

RenderTemplate RenderTemplate::Parse(const std::string& text) {
  RenderTemplate t;
  std::string literal;
  std::istringstream in(text);
  std::string line;
  std::string body;
  while (std::getline(in, line)) {
    if (line.rfind("%%", 0) == 0) {
      const std::string directive = Trim(std::string_view(line).substr(2));
      const auto colon = directive.find(':');
      if (colon == std::string::npos) {
        throw TemplateError("malformed directive '" + line + "'");
      }
      const std::string key = Trim(std::string_view(directive).substr(0, colon));
      const std::string value = Trim(std::string_view(directive).substr(colon + 1));
      if (key == "dialect") t.dialect_ = value;
      continue;
    }
    body += line;
    body += '\n';
  }
  if (t.dialect_.empty()) throw TemplateError("template declares no dialect");
  if (!IsKnownDialect(t.dialect_)) {
    throw TemplateError("unknown dialect '" + t.dialect_ + "'");
  }

  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
      literal += '{';
      ++i;
    } else if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
      literal += '}';
      ++i;
    } else if (c == '{') {
      const auto close = body.find('}', i);
      if (close == std::string::npos) throw TemplateError("unterminated placeholder");
      const std::string name = body.substr(i + 1, close - i - 1);
      if (std::find(kPlaceholders.begin(), kPlaceholders.end(), name) ==
          kPlaceholders.end()) {
        throw TemplateError("unknown placeholder '{" + name + "}'");
      }
      t.pieces_.push_back(std::move(literal));
      literal.clear();
      t.pieces_.push_back(name);
      i = close;
    } else if (c == '}') {
      throw TemplateError("unmatched '}'");
    } else {
      literal += c;
    }
  }
  t.pieces_.push_back(std::move(literal));
  if (!t.Uses("call")) throw TemplateError("template lacks the {call} placeholder");
  return t;
}

RenderTemplate RenderTemplate::Load(const std::filesystem::path& path) {
  try {
    return Parse(ReadFile(path));
  } catch (const TemplateError& e) {
    throw TemplateError(path.string() + ": " + e.what());
  }
}

bool RenderTemplate::Uses(std::string_view placeholder) const {
  for (std::size_t i = 1; i < pieces_.size(); i += 2) {
    if (pieces_[i] == placeholder) return true;
  }
  return false;
}

std::string RenderCall(const StructuredCall& call, const ApiSignature* sig) {
  std::vector<std::string> parts;
  std::set<std::string> done;
  if (sig != nullptr) {
    for (const ParamSpec* p : sig->PositionalOrder()) {
      auto it = call.args.find(p->name);
      if (it == call.args.end()) continue;
      parts.push_back(p->name + "=" + ToPythonLiteral(it->second));
      done.insert(p->name);
    }
  }
  for (const auto& [name, value] : call.args) {
    if (!done.contains(name)) parts.push_back(name + "=" + ToPythonLiteral(value));
  }
  std::string out = call.api + "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out + ")";
}

std::string Render(const SynthesizedCase& synthesized,
                   const RenderTemplate& tmpl, const Corpus& corpus) {
  const auto* perf = std::get_if<PerformanceOracle>(&synthesized.oracle);
  if (perf && (!tmpl.Uses("measure_baseline") || !tmpl.Uses("measure_subject"))) {
    throw TemplateError("performance case '" + synthesized.id +
                        "' needs {measure_baseline} and {measure_subject}");
  }
  std::map<std::string_view, std::string> values;
  std::string setup;
  for (const auto& fragment : synthesized.call.setup) setup += fragment + "\n";
  values["setup"] = StripTrailingNewline(setup);
  values["call"] = RenderCall(synthesized.call, Lookup(corpus, synthesized.call.api));
  values["measure_baseline"] =
      perf ? StripTrailingNewline(RenderMeasure(perf->baseline, kBaselineSlot, corpus))
           : "";
  values["measure_subject"] =
      perf ? StripTrailingNewline(RenderMeasure(perf->subject, kSubjectSlot, corpus))
           : "";
  values["oracle_assert"] = RenderOracle(synthesized.oracle);
  values["case_id"] = synthesized.id;
  values["target_api"] = synthesized.target_api;
  values["fingerprint"] = synthesized.fingerprint;

  std::string out;
  const auto& pieces = tmpl.pieces();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    out += (i % 2 == 0) ? pieces[i] : values.at(pieces[i]);
  }
  // Empty placeholders leave blank runs; keep at most one blank line.
  std::string squeezed;
  squeezed.reserve(out.size());
  int newlines = 0;
  for (char c : out) {
    newlines = (c == '\n') ? newlines + 1 : 0;
    if (newlines <= 2) squeezed += c;
  }
  return squeezed;
}

}  // namespace bugport
