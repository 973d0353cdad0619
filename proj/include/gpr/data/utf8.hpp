#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace gpr {

/// Maps between code-point offsets (what GAP files and the evidence format
/// use) and byte offsets into a UTF-8 string.
class Utf8Index {
 public:
  explicit Utf8Index(std::string_view text);

  std::size_t code_points() const { return byte_of_.size() - 1; }
  /// Byte offset of code point `cp` (cp == code_points() maps to the end).
  std::size_t to_byte(std::size_t cp) const;
  /// Code point containing byte `byte` (must be a boundary or the end).
  std::size_t to_code_point(std::size_t byte) const;

 private:
  std::vector<std::size_t> byte_of_;
};

/// Number of bytes of the UTF-8 sequence starting with `lead`.
std::size_t utf8_sequence_length(unsigned char lead);

}  // namespace gpr
