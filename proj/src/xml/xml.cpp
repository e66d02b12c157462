#include "rtm/xml/xml.hpp"

#include <algorithm>
#include <cctype>

namespace rtm::xml {

const Attribute* Element::attribute(std::string_view attr) const {
  auto it = std::find_if(attributes.begin(), attributes.end(),
                         [&](const Attribute& a) { return a.name == attr; });
  return it == attributes.end() ? nullptr : &*it;
}

namespace {

bool name_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || c == ':' || u >= 0x80;
}

bool name_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return name_start(c) || std::isdigit(u) || c == '-' || c == '.';
}

void append_utf8(std::string& out, unsigned long cp) {
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

class Reader {
 public:
  explicit Reader(std::string_view doc) : doc_(doc) {}

  Element document() {
    skip_misc(true);
    if (at_end() || peek() != '<') fail("expected root element");
    Element root = element();
    skip_misc(false);
    if (!at_end()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) { throw XmlError(line_, col_, what); }
  [[noreturn]] void fail_at(int line, int col, const std::string& what) {
    throw XmlError(line, col, what);
  }

  bool at_end() const { return pos_ >= doc_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < doc_.size() ? doc_[pos_ + ahead] : '\0';
  }
  bool starts_with(std::string_view s) const { return doc_.substr(pos_).starts_with(s); }

  void advance(std::size_t n = 1) {
    while (n-- && pos_ < doc_.size()) {
      if (doc_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  void skip_until(std::string_view terminator, const char* what) {
    int line = line_, col = col_;
    auto end = doc_.find(terminator, pos_);
    if (end == std::string_view::npos) fail_at(line, col, std::string("unterminated ") + what);
    advance(end - pos_ + terminator.size());
  }

  // Prolog / epilog: whitespace, comments, processing instructions, doctype.
  void skip_misc(bool prolog) {
    while (true) {
      skip_space();
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (prolog && starts_with("<!DOCTYPE")) {
        skip_until(">", "doctype");
      } else {
        return;
      }
    }
  }

  std::string name() {
    if (!name_start(peek())) fail("name expected");
    std::size_t start = pos_;
    while (!at_end() && name_char(peek())) advance();
    return std::string(doc_.substr(start, pos_ - start));
  }

  void reference(std::string& out) {
    int line = line_, col = col_;
    auto semi = doc_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 12) fail_at(line, col, "bad entity reference");
    std::string_view ent = doc_.substr(pos_ + 1, semi - pos_ - 1);
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (ent.size() > 1 && ent[0] == '#') {
      bool hex = ent[1] == 'x';
      std::string digits(ent.substr(hex ? 2 : 1));
      if (digits.empty()) fail_at(line, col, "bad character reference");
      unsigned long cp = 0;
      for (char c : digits) {
        int v;
        if (std::isdigit(static_cast<unsigned char>(c))) v = c - '0';
        else if (hex && std::isxdigit(static_cast<unsigned char>(c))) v = std::tolower(c) - 'a' + 10;
        else fail_at(line, col, "bad character reference");
        cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(v);
        if (cp > 0x10FFFF) fail_at(line, col, "character reference out of range");
      }
      append_utf8(out, cp);
    } else {
      fail_at(line, col, "unknown entity '&" + std::string(ent) + ";'");
    }
    advance(semi - pos_ + 1);
  }

  Element element() {
    Element el;
    el.line = line_;
    el.column = col_;
    advance();  // '<'
    el.name = name();
    while (true) {
      bool spaced = !at_end() && std::isspace(static_cast<unsigned char>(peek()));
      skip_space();
      if (at_end()) fail_at(el.line, el.column, "unterminated start tag <" + el.name + ">");
      if (peek() == '/') {
        if (peek(1) != '>') fail("expected '/>'");
        advance(2);
        return el;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!spaced) fail("whitespace expected before attribute");
      Attribute attr;
      int attr_line = line_, attr_col = col_;
      attr.name = name();
      if (el.attribute(attr.name)) fail_at(attr_line, attr_col, "duplicate attribute '" + attr.name + "'");
      skip_space();
      if (peek() != '=') fail("expected '=' after attribute name");
      advance();
      skip_space();
      char quote = peek();
      if (quote != '"' && quote != '\'') fail("attribute value must be quoted");
      advance();
      attr.line = line_;
      attr.column = col_;
      while (true) {
        if (at_end()) fail_at(attr_line, attr_col, "unterminated attribute value");
        char c = peek();
        if (c == quote) break;
        if (c == '<') fail("'<' in attribute value");
        if (c == '&') {
          reference(attr.value);
        } else {
          attr.value += c;
          advance();
        }
      }
      advance();
      el.attributes.push_back(std::move(attr));
    }

    // Content.
    while (true) {
      if (at_end()) fail_at(el.line, el.column, "unclosed tag <" + el.name + ">");
      if (starts_with("</")) {
        int close_line = line_, close_col = col_;
        advance(2);
        std::string closing = name();
        skip_space();
        if (peek() != '>') fail("expected '>' in end tag");
        advance();
        if (closing != el.name) {
          fail_at(el.line, el.column,
                  "unclosed tag <" + el.name + ">: found </" + closing + "> at " +
                      std::to_string(close_line) + ":" + std::to_string(close_col));
        }
        return el;
      }
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        int line = line_, col = col_;
        auto end = doc_.find("]]>", pos_);
        if (end == std::string_view::npos) fail_at(line, col, "unterminated CDATA section");
        advance(9);
        if (el.text_line == 0) el.text_line = line_;
        el.text += doc_.substr(pos_, end - pos_);
        advance(end - pos_ + 3);
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (peek() == '<') {
        el.children.push_back(element());
      } else if (peek() == '&') {
        if (el.text_line == 0) el.text_line = line_;
        reference(el.text);
      } else {
        char c = peek();
        if (el.text_line == 0) el.text_line = line_;
        el.text += c;
        advance();
      }
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::pair<int, int> position_in(const Attribute& attr, std::size_t offset) {
  int line = attr.line, col = attr.column;
  for (std::size_t i = 0; i < offset && i < attr.value.size(); ++i) {
    if (attr.value[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Element parse(std::string_view document) { return Reader(document).document(); }

}  // namespace rtm::xml
