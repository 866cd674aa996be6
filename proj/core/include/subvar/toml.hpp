#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace subvar::toml {

// The subset used by experiment configs: [table] and [a.b] headers, key = value with bare or
// quoted keys, basic strings, integers, floats (incl. exponents, inf, nan), booleans, nested
// arrays, and # comments. No inline tables, dates, multi-line strings or arrays of tables.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

struct Value {
  std::variant<std::monostate, bool, std::int64_t, double, std::string, std::shared_ptr<Array>, std::shared_ptr<Table>> v;

  bool is_table() const { return std::holds_alternative<std::shared_ptr<Table>>(v); }
  bool is_array() const { return std::holds_alternative<std::shared_ptr<Array>>(v); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_number() const { return is_int() || std::holds_alternative<double>(v); }

  const Table& table() const { return *std::get<std::shared_ptr<Table>>(v); }
  Table& table() { return *std::get<std::shared_ptr<Table>>(v); }
  const Array& array() const { return *std::get<std::shared_ptr<Array>>(v); }
  const std::string& str() const { return std::get<std::string>(v); }
  bool boolean() const { return std::get<bool>(v); }
  std::int64_t integer() const { return std::get<std::int64_t>(v); }
  double number() const { return is_int() ? static_cast<double>(integer()) : std::get<double>(v); }
  const char* type_name() const;
};

Value parse(const std::string& text);          // root table
Value parse_file(const std::string& path);     // throws std::ios_base::failure on read errors

}  // namespace subvar::toml
