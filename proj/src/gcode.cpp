#include "g2s/gcode.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cctype>

namespace g2s {

namespace {

bool code_is(double value, double code) { return std::fabs(value - code) < 1e-6; }

char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

// Parses [+-]?(digits[.digits]|.digits) starting at pos, skipping blanks
// between sign and digits. Returns false on failure.
bool scan_number(std::string_view line, std::size_t& pos, double& out) {
  std::string buf;
  if (pos < line.size() && (line[pos] == '+' || line[pos] == '-')) {
    if (line[pos] == '-') buf.push_back('-');
    ++pos;
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  }
  bool digits = false;
  bool dot = false;
  while (pos < line.size()) {
    char c = line[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = true;
      buf.push_back(c);
    } else if (c == '.' && !dot) {
      dot = true;
      buf.push_back(c);
    } else {
      break;
    }
    ++pos;
  }
  if (!digits) return false;
  if (buf.back() == '.') buf.pop_back();
  if (buf.size() > 1 && buf[0] == '-' && buf[1] == '.') buf.insert(1, "0");
  if (!buf.empty() && buf[0] == '.') buf.insert(0, "0");
  auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), out);
  return ec == std::errc() && ptr == buf.data() + buf.size() && std::isfinite(out);
}

}  // namespace

bool Block::has(char letter) const {
  for (const auto& w : words)
    if (w.letter == letter) return true;
  return false;
}

std::optional<double> Block::get(char letter) const {
  for (const auto& w : words)
    if (w.letter == letter) return w.value;
  return std::nullopt;
}

bool Block::has_g(double code) const {
  for (const auto& w : words)
    if (w.letter == 'G' && code_is(w.value, code)) return true;
  return false;
}

bool Block::has_m(double code) const {
  for (const auto& w : words)
    if (w.letter == 'M' && code_is(w.value, code)) return true;
  return false;
}

bool is_accepted_letter(char letter) {
  static constexpr std::string_view kLetters = "GMXYZABCIJKRFSTHLNPQ";
  return kLetters.find(letter) != std::string_view::npos;
}

std::optional<Block> tokenize_block(std::string_view line, int line_index,
                                    std::string* standalone_comment) {
  Block block;
  block.line_index = line_index;
  std::string comment;
  bool have_comment = false;

  auto add_comment = [&](std::string_view text) {
    // Trim surrounding blanks but keep the body verbatim.
    std::size_t b = 0, e = text.size();
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (have_comment) comment += " ";
    comment += text.substr(b, e - b);
    have_comment = true;
  };

  std::size_t pos = 0;
  // Percent lines delimit the program on tape; they carry nothing.
  {
    std::size_t p = 0;
    while (p < line.size() && is_space(line[p])) ++p;
    if (p < line.size() && line[p] == '%') return std::nullopt;
  }

  while (pos < line.size()) {
    char c = line[pos];
    if (is_space(c)) {
      ++pos;
      continue;
    }
    if (c == '(') {
      std::size_t close = line.find(')', pos + 1);
      if (close == std::string_view::npos)
        throw ConversionError(ErrorKind::UnbalancedComment, "missing ')'", line_index);
      add_comment(line.substr(pos + 1, close - pos - 1));
      pos = close + 1;
      continue;
    }
    if (c == ')')
      throw ConversionError(ErrorKind::UnbalancedComment, "unexpected ')'", line_index);
    if (c == ';') {
      add_comment(line.substr(pos + 1));
      break;
    }
    if (static_cast<unsigned char>(c) >= 0x80)
      throw ConversionError(ErrorKind::NonAsciiInput,
                            "non-ASCII character outside a comment", line_index);
    if (c == '#' || c == '[' || c == '<')
      throw ConversionError(ErrorKind::UnsupportedMacro,
                            std::string("parameter or expression syntax '") + c + "'",
                            line_index);
    if (c == '/' && block.words.empty()) {  // block delete switch is not modeled
      ++pos;
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(c)))
      throw ConversionError(ErrorKind::MalformedWord,
                            std::string("unexpected character '") + c + "'", line_index);
    char letter = upper(c);
    if (!is_accepted_letter(letter))
      throw ConversionError(ErrorKind::MalformedWord,
                            std::string("unsupported address '") + letter + "'", line_index);
    ++pos;
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos < line.size() && (line[pos] == '#' || line[pos] == '['))
      throw ConversionError(ErrorKind::UnsupportedMacro,
                            std::string("parameterized value for '") + letter + "'",
                            line_index);
    double value = 0.0;
    if (!scan_number(line, pos, value))
      throw ConversionError(ErrorKind::MalformedWord,
                            std::string("address '") + letter + "' without a valid number",
                            line_index);
    block.words.push_back({letter, value});
  }

  if (block.words.empty()) {
    if (have_comment && standalone_comment) *standalone_comment = comment;
    return std::nullopt;
  }
  if (have_comment) block.comment = comment;
  return block;
}

std::vector<Diagnostic> validate_modal_groups(const Block& block) {
  struct Group {
    const char* name;
    char letter;
    std::vector<double> codes;
  };
  static const std::array<Group, 12> kGroups = {{
      {"motion", 'G', {0, 1, 2, 3, 80, 81, 82, 83, 84, 85, 86, 87, 88, 89}},
      {"plane", 'G', {17, 18, 19}},
      {"units", 'G', {20, 21}},
      {"distance mode", 'G', {90, 91}},
      {"work offset", 'G', {54, 55, 56, 57, 58, 59}},
      {"radius compensation", 'G', {40, 41, 42}},
      {"length compensation", 'G', {43, 49}},
      {"cycle retract", 'G', {98, 99}},
      {"feed mode", 'G', {93, 94}},
      {"spindle", 'M', {3, 4, 5}},
      {"stopping", 'M', {0, 1, 2, 30}},
      {"tool change", 'M', {6}},
  }};

  std::vector<Diagnostic> out;
  for (const auto& group : kGroups) {
    int count = 0;
    for (const auto& w : block.words) {
      if (w.letter != group.letter) continue;
      for (double code : group.codes)
        if (code_is(w.value, code)) ++count;
    }
    if (count > 1 && group.codes.size() > 1)
      out.push_back({ErrorKind::ModalConflict, block.line_index,
                     std::string("two words from the ") + group.name + " modal group"});
  }
  // Coolant: M7 and M8 may combine, M9 may not join either.
  if (block.has_m(9) && (block.has_m(7) || block.has_m(8)))
    out.push_back({ErrorKind::ModalConflict, block.line_index,
                   "coolant off combined with coolant on"});
  // Axis and parameter letters may appear at most once.
  for (char letter : std::string_view("XYZABCIJKRFSTHLNPQ")) {
    int count = 0;
    for (const auto& w : block.words)
      if (w.letter == letter) ++count;
    if (count > 1)
      out.push_back({ErrorKind::ModalConflict, block.line_index,
                     std::string("repeated '") + letter + "' word"});
  }
  return out;
}

Program parse_program(std::string_view text, std::string source_name) {
  Program program;
  program.source_name = std::move(source_name);
  std::vector<Diagnostic> errors;
  std::vector<std::string> pending_notes;

  int line_index = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_index;
    start = end + 1;
    if (end == text.size() && line.empty() && line_index > 1) break;

    try {
      std::string note;
      auto block = tokenize_block(line, line_index, &note);
      if (!block) {
        if (!note.empty()) pending_notes.push_back(note);
        continue;
      }
      if (program.end_block) continue;  // nothing executes after M2/M30
      auto conflicts = validate_modal_groups(*block);
      errors.insert(errors.end(), conflicts.begin(), conflicts.end());
      block->notes = std::move(pending_notes);
      pending_notes.clear();
      if (block->has_m(2) || block->has_m(30)) program.end_block = program.blocks.size();
      program.blocks.push_back(std::move(*block));
    } catch (const ConversionError& e) {
      errors.insert(errors.end(), e.diagnostics().begin(), e.diagnostics().end());
    }
    if (end == text.size()) break;
  }
  if (!errors.empty()) throw ConversionError(std::move(errors));
  return program;
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // drop negative zero
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  if (ec != std::errc()) return "0";
  return std::string(buf, ptr);
}

std::string render_block(const Block& block) {
  std::string out;
  for (const auto& w : block.words) {
    if (!out.empty()) out += ' ';
    out += w.letter;
    out += format_number(w.value);
  }
  if (block.comment) {
    out += " (";
    out += *block.comment;
    out += ')';
  }
  return out;
}

std::string render_program(const Program& program) {
  std::string out;
  for (const auto& block : program.blocks) {
    for (const auto& note : block.notes) out += "(" + note + ")\n";
    out += render_block(block);
    out += '\n';
  }
  return out;
}

}  // namespace g2s
