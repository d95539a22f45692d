#pragma once

#include <string>
#include <vector>

namespace skillmc {

/// 1-based source position; line 0 means "no position".
struct SourcePos {
  int line = 0;
  int column = 0;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  SourcePos pos;

  static Diagnostic error(std::string msg, SourcePos p = {}) {
    return {Severity::Error, std::move(msg), p};
  }
  static Diagnostic warning(std::string msg, SourcePos p = {}) {
    return {Severity::Warning, std::move(msg), p};
  }
};

using Diagnostics = std::vector<Diagnostic>;

bool has_errors(const Diagnostics& diags);

/// Renders "line:col: error: message" (position omitted when unknown).
std::string to_string(const Diagnostic& d);

}  // namespace skillmc
