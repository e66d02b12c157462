#pragma once

#include <span>
#include <string>
#include <vector>

namespace rtm {

struct SourceLocation {
  std::string file;
  int line = 0;    // 1-based; 0 when unknown
  int column = 0;  // 1-based; 0 when unknown
  std::string pointer;  // JSON pointer for documents without line info

  bool known() const { return line > 0 || !pointer.empty(); }
};

enum class Severity { Error, Warning };

/// A located message about a document or a running rule. `subject` names the
/// rule, element or device the message is about, when there is one.
struct Diagnostic {
  Severity severity = Severity::Error;
  SourceLocation where;
  std::string subject;
  std::string message;

  std::string format() const;
};

bool has_errors(std::span<const Diagnostic> diags);

}  // namespace rtm
