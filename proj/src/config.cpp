#include "locpert/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "locpert/error.hpp"

namespace locpert {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::string& source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + what);
  }

  int line() const { return line_; }
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  char take() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  // Skips blanks and comments; newlines too when `newlines` is set.
  void skip(bool newlines) {
    while (!done()) {
      const char c = peek();
      if (c == '#') {
        while (!done() && peek() != '\n') take();
      } else if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
        take();
      } else {
        break;
      }
    }
  }

  void end_of_statement() {
    skip(false);
    if (!done() && peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
  }

  std::string identifier() {
    std::string out;
    while (!done()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
        out += take();
      } else {
        break;
      }
    }
    if (out.empty()) fail("expected a key");
    return out;
  }

  Json value() {
    skip(true);
    const char c = peek();
    if (c == '"') return string();
    if (c == '[') return array();
    if (c == '{') return table();
    if (c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::string word = identifier();
      if (word == "true") return true;
      if (word == "false") return false;
      if (word == "pi") return std::numbers::pi;
      fail("unknown bare word '" + word + "' (strings need double quotes)");
    }
    fail(done() ? "missing value" : std::string("unexpected '") + c + "'");
  }

 private:
  Json string() {
    take();
    std::string out;
    while (true) {
      if (done() || peek() == '\n') fail("unterminated string");
      const char c = take();
      if (c == '"') break;
      if (c == '\\') {
        if (done()) fail("unterminated string");
        const char e = take();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  Json number() {
    const std::size_t start = pos_;
    while (!done()) {
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-') {
        take();
      } else {
        break;
      }
    }
    const std::string_view tok = text_.substr(start, pos_ - start);
    double v = 0.0;
    const char* first = tok.data();
    if (!tok.empty() && tok.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("malformed number '" + std::string(tok) + "'");
    if (peek() == '*') {
      take();
      if (identifier() != "pi") fail("only '*pi' may follow a number");
      return v * std::numbers::pi;
    }
    const bool integral = tok.find_first_of(".eE") == std::string_view::npos;
    if (integral && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
    return v;
  }

  Json array() {
    take();
    Json out = Json::array();
    skip(true);
    if (peek() == ']') {
      take();
      return out;
    }
    while (true) {
      out.push_back(value());
      skip(true);
      const char c = done() ? '\0' : take();
      if (c == ']') return out;
      if (c != ',') fail("expected ',' or ']' in array");
    }
  }

  Json table() {
    take();
    Json out = Json::object();
    skip(true);
    if (peek() == '}') {
      take();
      return out;
    }
    while (true) {
      skip(true);
      const std::string key = identifier();
      if (out.contains(key)) fail("duplicate key '" + key + "' in inline table");
      skip(false);
      if (done() || take() != '=') fail("expected '=' after '" + key + "'");
      out[key] = value();
      skip(true);
      const char c = done() ? '\0' : take();
      if (c == '}') return out;
      if (c != ',') fail("expected ',' or '}' in inline table");
    }
  }

  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

ConfigDocument ConfigDocument::parse(std::string_view text, const std::string& source) {
  ConfigDocument doc;
  doc.source_ = source;
  Parser p(text, source);
  Section* current = nullptr;
  while (true) {
    p.skip(true);
    if (p.done()) break;
    if (p.peek() == '[') {
      p.take();
      p.skip(false);
      const std::string name = p.identifier();
      p.skip(false);
      if (p.done() || p.take() != ']') p.fail("expected ']' after section name");
      p.end_of_statement();
      if (doc.find(name)) p.fail("section [" + name + "] appears twice");
      doc.sections_.push_back(Section{name, {}});
      current = &doc.sections_.back();
      continue;
    }
    const int line = p.line();
    const std::string key = p.identifier();
    if (!current) p.fail("key '" + key + "' outside of any [section]");
    p.skip(false);
    if (p.done() || p.take() != '=') p.fail("expected '=' after '" + key + "'");
    Json v = p.value();
    p.end_of_statement();
    current->entries.push_back(Entry{key, std::move(v), line});
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const ConfigDocument::Section* ConfigDocument::find(const std::string& section) const {
  for (const auto& s : sections_) {
    if (s.name == section) return &s;
  }
  return nullptr;
}

bool ConfigDocument::has(const std::string& section, const std::string& key) const {
  const Section* s = find(section);
  if (!s) return false;
  for (const auto& e : s->entries) {
    if (e.key == key) return true;
  }
  return false;
}

const Json& ConfigDocument::get(const std::string& section, const std::string& key) const {
  const Section* s = find(section);
  const Entry* hit = nullptr;
  if (s) {
    for (const auto& e : s->entries) {
      if (e.key != key) continue;
      if (hit) throw ConfigError(source_ + ":" + std::to_string(e.line) + ": [" + section + "] " + key + " is repeated");
      hit = &e;
    }
  }
  if (!hit) throw ConfigError(source_ + ": missing [" + section + "] " + key);
  return hit->value;
}

std::vector<Json> ConfigDocument::get_all(const std::string& section, const std::string& key) const {
  std::vector<Json> out;
  if (const Section* s = find(section)) {
    for (const auto& e : s->entries) {
      if (e.key == key) out.push_back(e.value);
    }
  }
  return out;
}

void ConfigDocument::set(const std::string& section, const std::string& key, Json value) {
  Section* s = nullptr;
  for (auto& sec : sections_) {
    if (sec.name == section) s = &sec;
  }
  if (!s) {
    sections_.push_back(Section{section, {}});
    s = &sections_.back();
  }
  std::erase_if(s->entries, [&](const Entry& e) { return e.key == key; });
  s->entries.push_back(Entry{key, std::move(value), 0});
}

std::vector<std::string> ConfigDocument::sections() const {
  std::vector<std::string> out;
  for (const auto& s : sections_) out.push_back(s.name);
  return out;
}

std::vector<std::string> ConfigDocument::keys(const std::string& section) const {
  std::vector<std::string> out;
  if (const Section* s = find(section)) {
    for (const auto& e : s->entries) {
      if (std::find(out.begin(), out.end(), e.key) == out.end()) out.push_back(e.key);
    }
  }
  return out;
}

Json ConfigDocument::to_json() const {
  Json out = Json::object();
  for (const auto& s : sections_) {
    Json sec = Json::object();
    for (const auto& key : keys(s.name)) {
      const auto all = get_all(s.name, key);
      sec[key] = all.size() == 1 ? all.front() : Json(all);
    }
    out[s.name] = std::move(sec);
  }
  return out;
}

}  // namespace locpert
