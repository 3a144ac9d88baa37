#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace escape::wordio {

// Shared line-oriented file conventions: '#' starts a comment, blank lines
// are skipped, fields on a line are comma-separated decimal integers.

// Forbidden-factor file: one word per line.
std::vector<std::vector<uint8_t>> read_factor_file(const std::string& path);

// List-assignment file: line n holds the allowed symbols for position n.
std::vector<std::vector<uint32_t>> read_list_file(const std::string& path);

// Denominator file: one positive integer per line, strictly ascending.
std::vector<uint64_t> read_denominator_file(const std::string& path);

// Words are rendered as space-separated decimal symbols; bit sequences as a
// run of '0'/'1' characters.  Both get a trailing newline at the CLI level.
std::string render_word(std::span<const uint32_t> symbols);
std::string render_word(std::span<const uint8_t> symbols);
std::string render_bits(std::span<const uint8_t> bits);

// Inverse parsers; accept arbitrary whitespace between symbols.
std::vector<uint32_t> parse_word(const std::string& text);
std::vector<uint8_t> parse_bits(const std::string& text);

// Whole-stream slurp helper for CLI "--input path|-".
std::string read_stream(std::istream& in);

} // namespace escape::wordio
