#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rattack/core.hpp"

namespace rattack {

/// Reader for the flat TOML subset used by sweep configs: `key = value`
/// lines, `[table]` headers, `#` comments, and values that are strings,
/// integers, floats, booleans or single-line arrays of those.
class TomlReader {
 public:
  static nlohmann::ordered_json parse(const std::string& text) {
    nlohmann::ordered_json root = nlohmann::ordered_json::object();
    nlohmann::ordered_json* table = &root;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      TomlReader r(strip_comment(line), line_no);
      r.skip_space();
      if (r.done()) continue;
      if (r.peek() == '[') {
        ++r.pos_;
        std::string name = r.bare_key();
        r.skip_space();
        r.expect(']');
        r.finish();
        root[name] = nlohmann::ordered_json::object();
        table = &root[name];
        continue;
      }
      std::string key = r.peek() == '"' ? r.string_value() : r.bare_key();
      r.skip_space();
      r.expect('=');
      nlohmann::ordered_json value = r.value();
      r.finish();
      if (table->contains(key)) r.fail("duplicate key '" + key + "'");
      (*table)[key] = std::move(value);
    }
    return root;
  }

  static nlohmann::ordered_json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
  }

 private:
  TomlReader(std::string line, int line_no) : text_(std::move(line)), line_no_(line_no) {}

  static std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
      if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("bad-config", "TOML line " + std::to_string(line_no_) + ": " + msg);
  }

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!done() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void finish() {
    skip_space();
    if (!done()) fail("unexpected trailing text");
  }

  std::string bare_key() {
    skip_space();
    std::size_t start = pos_;
    while (!done() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-' ||
                       peek() == '.')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return text_.substr(start, pos_ - start);
  }

  std::string string_value() {
    expect('"');
    std::string out;
    while (!done() && peek() != '"') {
      char c = text_[pos_++];
      if (c == '\\' && !done()) {
        char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: out += e;
        }
      } else {
        out += c;
      }
    }
    if (done()) fail("unterminated string");
    ++pos_;
    return out;
  }

  nlohmann::ordered_json value() {
    skip_space();
    if (peek() == '"') return string_value();
    if (peek() == '[') {
      ++pos_;
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      skip_space();
      while (peek() != ']') {
        arr.push_back(value());
        skip_space();
        if (peek() == ',') {
          ++pos_;
          skip_space();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      ++pos_;
      return arr;
    }
    std::size_t start = pos_;
    while (!done() && peek() != ',' && peek() != ']' && !std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    std::string token = text_.substr(start, pos_ - start);
    if (token == "true") return true;
    if (token == "false") return false;
    if (token == "inf" || token == "+inf") return "inf";
    std::string digits;
    for (char c : token) {
      if (c != '_') digits += c;
    }
    if (digits.empty()) fail("missing value");
    try {
      std::size_t used = 0;
      if (digits.find_first_of(".eE") == std::string::npos) {
        long long v = std::stoll(digits, &used);
        if (used == digits.size()) return v;
      } else {
        double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("cannot parse value '" + token + "'");
  }

  std::string text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

}  // namespace rattack
