#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace g2s {

enum class ErrorKind {
  // gcode_frontend
  MalformedWord,
  UnbalancedComment,
  UnsupportedMacro,
  NonAsciiInput,
  ModalConflict,
  // canon_ir
  UnsupportedCode,
  UndefinedTool,
  MotionWithoutFeedrate,
  MissingCycleWord,
  UnsupportedCycle,
  // stepnc_model / cc1
  InvalidSetup,
  DanglingFeed,
  // p21_io
  UnserializableModel,
  SyntaxError,
  UnknownEntity,
  DanglingReference,
  // cli
  SchemaError,
  UnknownToolType,
  Io,
  Internal,
};

std::string_view to_string(ErrorKind kind);

// Process exit status for an error kind: 1 input error, 2 unsupported
// construct, 3 internal.
int exit_code(ErrorKind kind);

struct Diagnostic {
  ErrorKind kind;
  int line = 0;  // 1-based source line, 0 when not tied to a line
  std::string message;

  std::string format() const;
};

class ConversionError : public std::runtime_error {
 public:
  ConversionError(ErrorKind kind, std::string message, int line = 0);
  explicit ConversionError(std::vector<Diagnostic> diagnostics);

  ErrorKind kind() const { return diagnostics_.front().kind; }
  int line() const { return diagnostics_.front().line; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace g2s
