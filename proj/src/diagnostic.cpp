#include "rtm/diagnostic.hpp"

#include <algorithm>

namespace rtm {

std::string Diagnostic::format() const {
  std::string out;
  if (!where.file.empty()) out += where.file + ":";
  if (where.line > 0) {
    out += std::to_string(where.line) + ":" + std::to_string(where.column) + ":";
  } else if (!where.pointer.empty()) {
    out += where.pointer + ":";
  }
  if (!out.empty()) out += " ";
  out += severity == Severity::Error ? "error: " : "warning: ";
  if (!subject.empty()) out += "[" + subject + "] ";
  out += message;
  return out;
}

bool has_errors(std::span<const Diagnostic> diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

}  // namespace rtm
