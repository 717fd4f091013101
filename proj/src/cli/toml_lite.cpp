#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "nelson/cli.hpp"
#include "nelson/errors.hpp"

namespace nelson::cli {

namespace {

using json = nlohmann::json;

class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : text_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        parse_key_value(*table);
      }
      finish_line();
    }
    return root;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::set<std::string> headers_;

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  char take() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_), msg);
  }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') {
        take();
        continue;
      }
      return;
    }
  }

  // Whitespace, comments and newlines inside arrays and inline tables.
  void skip_layout() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (peek() == '\r' || peek() == '\n') {
        take();
        continue;
      }
      return;
    }
  }

  void finish_line() {
    skip_spaces();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (at_end()) return;
    if (peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
    take();
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    take();
  }

  std::string parse_simple_key() {
    skip_spaces();
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    std::string key;
    while (!at_end()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        key.push_back(take());
      } else {
        break;
      }
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts{parse_simple_key()};
    skip_spaces();
    while (peek() == '.') {
      take();
      parts.push_back(parse_simple_key());
      skip_spaces();
    }
    return parts;
  }

  json& descend(json& from, const std::string& key) {
    json& next = from[key];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) fail("key '" + key + "' is already a value");
    return next;
  }

  json& open_table(json& root) {
    take();
    if (peek() == '[') fail("arrays of tables are not supported");
    const auto parts = parse_dotted_key();
    skip_spaces();
    expect(']');
    std::string name;
    for (const auto& p : parts) name += (name.empty() ? "" : ".") + p;
    if (!headers_.insert(name).second) fail("table [" + name + "] defined twice");
    json* table = &root;
    for (const auto& p : parts) table = &descend(*table, p);
    return *table;
  }

  void parse_key_value(json& table) {
    const auto parts = parse_dotted_key();
    skip_spaces();
    expect('=');
    skip_spaces();
    json* target = &table;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) target = &descend(*target, parts[i]);
    const std::string& leaf = parts.back();
    if (target->contains(leaf)) fail("duplicate key '" + leaf + "'");
    (*target)[leaf] = parse_value();
  }

  json parse_value() {
    const char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    return parse_scalar();
  }

  std::string parse_basic_string() {
    expect('"');
    if (text_.substr(pos_, 2) == "\"\"") fail("multi-line strings are not supported");
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = take();
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) fail("unterminated escape");
      switch (take()) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        default: fail("unsupported escape sequence");
      }
    }
  }

  std::string parse_literal_string() {
    expect('\'');
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = take();
      if (c == '\'') return out;
      out.push_back(c);
    }
  }

  json parse_array() {
    expect('[');
    json arr = json::array();
    skip_layout();
    while (peek() != ']') {
      arr.push_back(parse_value());
      skip_layout();
      if (peek() == ',') {
        take();
        skip_layout();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    take();
    return arr;
  }

  json parse_inline_table() {
    expect('{');
    json table = json::object();
    skip_spaces();
    if (peek() == '}') {
      take();
      return table;
    }
    while (true) {
      parse_key_value(table);
      skip_spaces();
      if (peek() == ',') {
        take();
        skip_spaces();
        continue;
      }
      expect('}');
      return table;
    }
  }

  json parse_scalar() {
    std::string token;
    while (!at_end()) {
      const char c = peek();
      if (c == ',' || c == ']' || c == '}' || c == '#' || c == '\n' || c == '\r' || c == ' ' || c == '\t') break;
      token.push_back(take());
    }
    if (token.empty()) fail("expected a value");
    if (token == "true") return true;
    if (token == "false") return false;

    std::string digits;
    for (char c : token) {
      if (c != '_') digits.push_back(c);
    }
    std::string_view body = digits;
    double sign = 1.0;
    if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
      sign = body.front() == '-' ? -1.0 : 1.0;
      body.remove_prefix(1);
    }
    if (body == "inf") return sign * std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();

    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    const char* first = digits.data() + (digits.front() == '+' ? 1 : 0);
    const char* last = digits.data() + digits.size();
    if (!is_float) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return v;
    } else {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return v;
    }
    fail("cannot parse value '" + token + "'");
  }
};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

}  // namespace nelson::cli
