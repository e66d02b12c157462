#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rtm/error.hpp"

namespace rtm::xml {

// Small XML reader for the rule and scenario documents: elements,
// attributes, character data, comments, CDATA, the predefined entities and
// numeric character references. DTDs are skipped, namespaces are not
// interpreted. Every node remembers where it started.

class XmlError : public Error {
 public:
  XmlError(int line, int column, const std::string& what)
      : Error("XmlMalformed at " + std::to_string(line) + ":" + std::to_string(column) + ": " +
              what),
        line_(line),
        column_(column),
        message_(what) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

struct Attribute {
  std::string name;
  std::string value;
  int line = 0;
  int column = 0;  // column of the value's first character
};

struct Element {
  std::string name;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  std::string text;  // concatenated character data of direct children
  int line = 0;
  int column = 0;
  int text_line = 0;  // line where `text` starts

  const Attribute* attribute(std::string_view attr) const;
};

/// Line and column of the character at `offset` inside an attribute's
/// decoded value. Entity references count as one character each.
std::pair<int, int> position_in(const Attribute& attr, std::size_t offset);

/// Parses a complete document and returns its root element.
Element parse(std::string_view document);

}  // namespace rtm::xml
