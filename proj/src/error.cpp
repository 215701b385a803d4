#include "g2s/error.hpp"

namespace g2s {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedWord: return "MalformedWord";
    case ErrorKind::UnbalancedComment: return "UnbalancedComment";
    case ErrorKind::UnsupportedMacro: return "UnsupportedMacro";
    case ErrorKind::NonAsciiInput: return "NonAsciiInput";
    case ErrorKind::ModalConflict: return "ModalConflict";
    case ErrorKind::UnsupportedCode: return "UnsupportedCode";
    case ErrorKind::UndefinedTool: return "UndefinedTool";
    case ErrorKind::MotionWithoutFeedrate: return "MotionWithoutFeedrate";
    case ErrorKind::MissingCycleWord: return "MissingCycleWord";
    case ErrorKind::UnsupportedCycle: return "UnsupportedCycle";
    case ErrorKind::InvalidSetup: return "InvalidSetup";
    case ErrorKind::DanglingFeed: return "DanglingFeed";
    case ErrorKind::UnserializableModel: return "UnserializableModel";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownEntity: return "UnknownEntity";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::UnknownToolType: return "UnknownToolType";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Internal: return "InternalError";
  }
  return "?";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnsupportedMacro:
    case ErrorKind::UnsupportedCode:
    case ErrorKind::UnsupportedCycle:
    case ErrorKind::UnknownEntity:
      return 2;
    case ErrorKind::Internal:
    case ErrorKind::UnserializableModel:
      return 3;
    default:
      return 1;
  }
}

std::string Diagnostic::format() const {
  std::string out(to_string(kind));
  if (!message.empty()) out += " " + message;
  if (line > 0) out += " at line " + std::to_string(line);
  return out;
}

static std::string join(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "\n";
    out += d.format();
  }
  return out;
}

ConversionError::ConversionError(ErrorKind kind, std::string message, int line)
    : ConversionError(std::vector<Diagnostic>{{kind, line, std::move(message)}}) {}

ConversionError::ConversionError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {
  if (diagnostics_.empty())
    diagnostics_.push_back({ErrorKind::Internal, 0, "empty diagnostic list"});
}

}  // namespace g2s
