#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "g2s/error.hpp"

namespace g2s {

// One address word such as "X-13.5". Values stay dimensionless here; units
// are resolved by the interpreter.
struct Word {
  char letter = 'G';
  double value = 0.0;

  bool operator==(const Word&) const = default;
};

struct Block {
  int line_index = 0;  // 1-based physical source line
  std::vector<Word> words;
  std::optional<std::string> comment;
  // Comment-only lines immediately preceding this block.
  std::vector<std::string> notes;

  bool operator==(const Block&) const = default;

  bool has(char letter) const;
  std::optional<double> get(char letter) const;
  // True if a G or M word with the given code is present (e.g. code 43.1).
  bool has_g(double code) const;
  bool has_m(double code) const;
};

struct Program {
  std::string source_name;
  std::vector<Block> blocks;
  // Index into blocks of the M2/M30 block, if any.
  std::optional<std::size_t> end_block;

  bool operator==(const Program&) const = default;
};

bool is_accepted_letter(char letter);

// Returns nullopt for blank, '%' and comment-only lines. A comment-only
// line's text is reported through `standalone_comment` when non-null.
std::optional<Block> tokenize_block(std::string_view line, int line_index,
                                    std::string* standalone_comment = nullptr);

// Throws ConversionError carrying every per-line diagnostic if any line is
// malformed or has modal conflicts.
Program parse_program(std::string_view text, std::string source_name = {});

std::vector<Diagnostic> validate_modal_groups(const Block& block);

// Canonical text form; parse_program(render_program(p)) reproduces p's
// words, comments and notes.
std::string render_program(const Program& program);
std::string render_block(const Block& block);
std::string format_number(double value);

}  // namespace g2s
