#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "rtm/error.hpp"
#include "rtm/meta/metamodel.hpp"

namespace rtm::meta {

// Line-oriented class definition format:
//
//   # comment
//   class Socket
//     attr dev_id:String:readonly
//     attr mode:Enum(eco|boost)
//     ref owner->SmartHomeOS[0..1]
//   end
//
// Multiplicity is one of 0..1, 1, 0..* and defaults to 0..*. See
// docs/formats.md.

class MetamodelTextError : public Error {
 public:
  MetamodelTextError(int line, int column, const std::string& what)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
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

/// `first_line` lets callers embedding the text in a larger document report
/// lines relative to that document.
std::shared_ptr<Metamodel> parse_metamodel(std::string_view text, std::string name = {},
                                           int first_line = 1);

/// Canonical text; parse(serialize(m)) == m.
std::string serialize_metamodel(const Metamodel& metamodel);

}  // namespace rtm::meta
