#include "gpr/data/utf8.hpp"

#include <algorithm>

#include "gpr/tensor/errors.hpp"

namespace gpr {

std::size_t utf8_sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;  // stray continuation or invalid lead: treat as a single byte
}

Utf8Index::Utf8Index(std::string_view text) {
  byte_of_.reserve(text.size() + 1);
  std::size_t i = 0;
  while (i < text.size()) {
    byte_of_.push_back(i);
    i += std::min(utf8_sequence_length(static_cast<unsigned char>(text[i])), text.size() - i);
  }
  byte_of_.push_back(text.size());
}

std::size_t Utf8Index::to_byte(std::size_t cp) const {
  if (cp >= byte_of_.size()) {
    throw DataError("code point offset " + std::to_string(cp) + " beyond text of " +
                    std::to_string(code_points()) + " code points");
  }
  return byte_of_[cp];
}

std::size_t Utf8Index::to_code_point(std::size_t byte) const {
  auto it = std::lower_bound(byte_of_.begin(), byte_of_.end(), byte);
  if (it == byte_of_.end() || *it != byte) {
    throw DataError("byte offset " + std::to_string(byte) + " is not on a code point boundary");
  }
  return static_cast<std::size_t>(it - byte_of_.begin());
}

}  // namespace gpr
