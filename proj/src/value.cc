#include "bugport/value.h"

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace bugport {
namespace {

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "float(\"nan\")";
  if (std::isinf(v)) return v > 0 ? "float(\"inf\")" : "-float(\"inf\")";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string out(buf, ec == std::errc() ? end : buf);
  if (out.find_first_of(".eE") == std::string::npos) out += ".0";
  return out;
}

std::string QuoteString(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

struct PythonPrinter {
  std::string operator()(std::int64_t v) const { return std::to_string(v); }
  std::string operator()(double v) const { return FormatDouble(v); }
  std::string operator()(bool v) const { return v ? "True" : "False"; }
  std::string operator()(const std::string& v) const { return QuoteString(v); }
  std::string operator()(const ShapeTuple& v) const {
    std::string out = "(";
    for (size_t i = 0; i < v.dims.size(); ++i) {
      if (i) out += ", ";
      out += std::to_string(v.dims[i]);
    }
    if (v.dims.size() == 1) out += ",";
    return out + ")";
  }
  std::string operator()(const Value::List& v) const {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      out += ToPythonLiteral(v[i]);
    }
    return out + "]";
  }
};

}  // namespace

std::string ToPythonLiteral(const Value& value) {
  return std::visit(PythonPrinter{}, value.storage());
}

bool IsWellFormed(const Value& value) {
  if (value.is_shape()) {
    for (auto d : value.as_shape().dims) {
      if (d < 1) return false;
    }
  } else if (value.is_list()) {
    for (const auto& item : value.as_list()) {
      if (!IsWellFormed(item)) return false;
    }
  }
  return true;
}

}  // namespace bugport
