#include "ntriples_check.hpp"

#include <cctype>
#include <cstdint>
#include <stdexcept>

namespace nt {
namespace {

struct Fail : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void put_utf8(std::string& out, std::uint32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) throw Fail("bad code point in escape");
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_hex(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }

class LineParser {
 public:
  explicit LineParser(std::string_view s) : s_(s) {}

  bool at_end() {
    skip_ws();
    return i_ >= s_.size() || s_[i_] == '#';
  }

  Triple statement() {
    Triple t;
    skip_ws();
    t.s = peek() == '_' ? blank() : iriref();
    skip_ws();
    t.p = iriref();
    skip_ws();
    if (peek() == '<') {
      t.o = iriref();
    } else if (peek() == '_') {
      t.o = blank();
    } else if (peek() == '"') {
      t.o = literal();
    } else {
      throw Fail("expected object");
    }
    skip_ws();
    if (peek() != '.') throw Fail("expected '.'");
    ++i_;
    if (!at_end()) throw Fail("trailing content after '.'");
    return t;
  }

 private:
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }

  std::uint32_t uchar() {
    // at backslash
    const char kind = s_.at(i_ + 1);
    const std::size_t n = kind == 'u' ? 4 : 8;
    if (i_ + 2 + n > s_.size()) throw Fail("short \\u escape");
    std::uint32_t cp = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const char c = s_[i_ + 2 + k];
      if (!is_hex(c)) throw Fail("bad hex in escape");
      cp = cp * 16 + static_cast<std::uint32_t>(std::stoi(std::string(1, c), nullptr, 16));
    }
    i_ += 2 + n;
    return cp;
  }

  Term iriref() {
    if (peek() != '<') throw Fail("expected IRI");
    ++i_;
    Term t{Term::iri, "", ""};
    while (true) {
      if (i_ >= s_.size()) throw Fail("unterminated IRI");
      const unsigned char c = static_cast<unsigned char>(s_[i_]);
      if (c == '>') {
        ++i_;
        break;
      }
      if (c == '\\') {
        const char k = peek_at(1);
        if (k != 'u' && k != 'U') throw Fail("only \\u escapes allowed in IRIs");
        put_utf8(t.value, uchar());
        continue;
      }
      if (c <= 0x20 || c == '<' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' || c == '`') {
        throw Fail("illegal character in IRI");
      }
      t.value += static_cast<char>(c);
      ++i_;
    }
    // absolute: scheme ":" ...
    const auto colon = t.value.find(':');
    if (colon == std::string::npos || colon == 0) throw Fail("relative IRI");
    for (std::size_t k = 0; k < colon; ++k) {
      const char c = t.value[k];
      const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
      if (!(alpha || (k > 0 && ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.')))) {
        throw Fail("bad IRI scheme");
      }
    }
    return t;
  }

  char peek_at(std::size_t k) const { return i_ + k < s_.size() ? s_[i_ + k] : '\0'; }

  Term blank() {
    if (peek() != '_' || peek_at(1) != ':') throw Fail("expected blank node");
    i_ += 2;
    Term t{Term::blank, "", ""};
    while (i_ < s_.size() && s_[i_] != ' ' && s_[i_] != '\t' && s_[i_] != '.') t.value += s_[i_++];
    if (t.value.empty()) throw Fail("empty blank node label");
    return t;
  }

  Term literal() {
    ++i_;  // opening quote
    Term t{Term::literal, "", ""};
    while (true) {
      if (i_ >= s_.size()) throw Fail("unterminated literal");
      const char c = s_[i_];
      if (c == '"') {
        ++i_;
        break;
      }
      if (c == '\n' || c == '\r') throw Fail("raw line break in literal");
      if (c == '\\') {
        const char k = peek_at(1);
        switch (k) {
          case 't': t.value += '\t'; break;
          case 'b': t.value += '\b'; break;
          case 'n': t.value += '\n'; break;
          case 'r': t.value += '\r'; break;
          case 'f': t.value += '\f'; break;
          case '"': t.value += '"'; break;
          case '\'': t.value += '\''; break;
          case '\\': t.value += '\\'; break;
          case 'u':
          case 'U': put_utf8(t.value, uchar()); continue;
          default: throw Fail("bad escape in literal");
        }
        i_ += 2;
        continue;
      }
      t.value += c;
      ++i_;
    }
    if (peek() == '^' && peek_at(1) == '^') {
      i_ += 2;
      t.datatype_or_lang = "^^" + iriref().value;
    } else if (peek() == '@') {
      ++i_;
      std::string lang;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '-')) lang += s_[i_++];
      if (lang.empty()) throw Fail("empty language tag");
      t.datatype_or_lang = "@" + lang;
    }
    return t;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t n;
    if (c < 0x80) n = 0;
    else if ((c & 0xE0) == 0xC0) n = 1;
    else if ((c & 0xF0) == 0xE0) n = 2;
    else if ((c & 0xF8) == 0xF0) n = 3;
    else return false;
    if (i + n >= s.size()) return false;
    for (std::size_t k = 1; k <= n; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += n + 1;
  }
  return true;
}

}  // namespace

Result parse(std::string_view doc) {
  Result r;
  if (!valid_utf8(doc)) {
    r.ok = false;
    r.error = "document is not valid UTF-8";
    return r;
  }
  std::size_t start = 0, line = 0;
  while (start < doc.size()) {
    ++line;
    std::size_t end = doc.find_first_of("\r\n", start);
    if (end == std::string_view::npos) end = doc.size();
    LineParser p(doc.substr(start, end - start));
    try {
      if (!p.at_end()) r.triples.push_back(p.statement());
    } catch (const std::exception& e) {
      r.ok = false;
      r.line = line;
      r.error = e.what();
      return r;
    }
    start = end;
    if (start < doc.size() && doc[start] == '\r') ++start;
    if (start < doc.size() && doc[start] == '\n') ++start;
  }
  return r;
}

}  // namespace nt
