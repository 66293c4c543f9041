#ifndef BUGPORT_VALUE_H_
#define BUGPORT_VALUE_H_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace bugport {

// Ordered list of positive extents, e.g. the (N, C, H, W) of an input.
struct ShapeTuple {
  std::vector<std::int64_t> dims;

  bool operator==(const ShapeTuple&) const = default;
};

// Literal bound to an API parameter: a scalar, a shape tuple, or a nested
// list of values.
class Value {
 public:
  using List = std::vector<Value>;
  using Storage =
      std::variant<std::int64_t, double, bool, std::string, ShapeTuple, List>;

  Value() : storage_(std::int64_t{0}) {}
  Value(std::int64_t v) : storage_(v) {}  // NOLINT
  Value(int v) : storage_(std::int64_t{v}) {}  // NOLINT
  Value(double v) : storage_(v) {}  // NOLINT
  Value(bool v) : storage_(v) {}  // NOLINT
  Value(std::string v) : storage_(std::move(v)) {}  // NOLINT
  Value(const char* v) : storage_(std::string(v)) {}  // NOLINT
  Value(ShapeTuple v) : storage_(std::move(v)) {}  // NOLINT
  Value(List v) : storage_(std::move(v)) {}  // NOLINT

  static Value Shape(std::vector<std::int64_t> dims) {
    return Value(ShapeTuple{std::move(dims)});
  }

  bool is_int() const { return std::holds_alternative<std::int64_t>(storage_); }
  bool is_double() const { return std::holds_alternative<double>(storage_); }
  bool is_bool() const { return std::holds_alternative<bool>(storage_); }
  bool is_string() const { return std::holds_alternative<std::string>(storage_); }
  bool is_shape() const { return std::holds_alternative<ShapeTuple>(storage_); }
  bool is_list() const { return std::holds_alternative<List>(storage_); }

  std::int64_t as_int() const { return std::get<std::int64_t>(storage_); }
  double as_double() const { return std::get<double>(storage_); }
  bool as_bool() const { return std::get<bool>(storage_); }
  const std::string& as_string() const { return std::get<std::string>(storage_); }
  const ShapeTuple& as_shape() const { return std::get<ShapeTuple>(storage_); }
  const List& as_list() const { return std::get<List>(storage_); }

  const Storage& storage() const { return storage_; }

  friend bool operator==(const Value& a, const Value& b) {
    return a.storage_ == b.storage_;
  }

 private:
  Storage storage_;
};

// Python-syntax literal: 2048, 0.5, True, "x", (2, 3, 8), [1, 2].
std::string ToPythonLiteral(const Value& value);

// True when every shape tuple reachable from `value` has extents >= 1.
bool IsWellFormed(const Value& value);

}  // namespace bugport

#endif  // BUGPORT_VALUE_H_
