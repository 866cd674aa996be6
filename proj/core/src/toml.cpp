#include "subvar/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace subvar::toml {

const char* Value::type_name() const {
  switch (v.index()) {
    case 0: return "empty";
    case 1: return "boolean";
    case 2: return "integer";
    case 3: return "float";
    case 4: return "string";
    case 5: return "array";
    default: return "table";
  }
}

namespace {

Value make_table() { return Value{std::make_shared<Table>()}; }

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Value run() {
    Value root = make_table();
    Table* cur = &root.table();
    while (skip_blank_lines()) {
      if (peek() == '[') {
        cur = header(root);
      } else {
        std::vector<std::string> key = dotted_key();
        ws();
        expect('=');
        ws();
        Value val = value();
        end_of_line();
        Table* t = cur;
        for (size_t k = 0; k + 1 < key.size(); ++k) t = &descend(*t, key[k]);
        if (t->count(key.back())) fail("duplicate key '" + key.back() + "'");
        (*t)[key.back()] = std::move(val);
      }
    }
    return root;
  }

 private:
  const std::string& s_;
  size_t i_ = 0;
  int line_ = 1;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
  bool eof() const { return i_ >= s_.size(); }
  void ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++i_;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++i_;
  }
  // Skips whitespace, comments and newlines; false at end of input.
  bool skip_blank_lines() {
    for (;;) {
      ws();
      skip_comment();
      if (eof()) return false;
      if (peek() == '\r') {
        ++i_;
        continue;
      }
      if (peek() != '\n') return true;
      ++i_;
      ++line_;
    }
  }
  void end_of_line() {
    ws();
    skip_comment();
    if (peek() == '\r') ++i_;
    if (!eof() && peek() != '\n') fail("unexpected text after value");
  }

  Table& descend(Table& t, const std::string& k) {
    auto it = t.find(k);
    if (it == t.end()) it = t.emplace(k, make_table()).first;
    if (!it->second.is_table()) fail("key '" + k + "' is not a table");
    return it->second.table();
  }

  Table* header(Value& root) {
    expect('[');
    if (peek() == '[') fail("arrays of tables are not supported");
    ws();
    std::vector<std::string> key = dotted_key();
    ws();
    expect(']');
    end_of_line();
    Table* t = &root.table();
    for (const std::string& k : key) t = &descend(*t, k);
    return t;
  }

  std::string key_part() {
    if (peek() == '"') return basic_string();
    const size_t b = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++i_;
    if (b == i_) fail("expected a key");
    return s_.substr(b, i_ - b);
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> out{key_part()};
    for (;;) {
      ws();
      if (peek() != '.') return out;
      ++i_;
      ws();
      out.push_back(key_part());
    }
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[i_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      const char e = s_[i_++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }

  Value array() {
    expect('[');
    auto arr = std::make_shared<Array>();
    for (;;) {
      skip_blank_lines();
      if (peek() == ']') {
        ++i_;
        return Value{arr};
      }
      arr->push_back(value());
      skip_blank_lines();
      if (peek() == ',') {
        ++i_;
        continue;
      }
      skip_blank_lines();
      expect(']');
      return Value{arr};
    }
  }

  Value value() {
    const char c = peek();
    if (c == '"') return Value{basic_string()};
    if (c == '[') return array();
    if (c == '{') fail("inline tables are not supported");
    const size_t b = i_;
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
           peek() != '#')
      ++i_;
    std::string tok = s_.substr(b, i_ - b);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return Value{true};
    if (tok == "false") return Value{false};
    std::string clean;
    for (char ch : tok)
      if (ch != '_') clean += ch;
    const bool sign = clean[0] == '+' || clean[0] == '-';
    const std::string body = clean.substr(sign ? 1 : 0);
    if (body == "inf" || body == "nan") {
      const double v = body == "inf" ? HUGE_VAL : std::nan("");
      return Value{clean[0] == '-' ? -v : v};
    }
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    const char* first = clean.data() + (clean[0] == '+' ? 1 : 0);
    const char* last = clean.data() + clean.size();
    if (is_float) {
      double d = 0.0;
      auto [p, ec] = std::from_chars(first, last, d);
      if (ec != std::errc() || p != last) fail("bad number '" + tok + "'");
      return Value{d};
    }
    std::int64_t n = 0;
    auto [p, ec] = std::from_chars(first, last, n);
    if (ec != std::errc() || p != last) fail("bad value '" + tok + "'");
    return Value{n};
  }
};

}  // namespace

Value parse(const std::string& text) { return Parser(text).run(); }

Value parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace subvar::toml
