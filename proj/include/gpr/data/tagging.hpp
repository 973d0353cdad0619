#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpr/data/gap_sample.hpp"

namespace gpr {

enum class Role { kPronoun = 0, kA = 1, kB = 2 };
inline constexpr std::array<std::string_view, 3> kTagTokens = {"<P>", "<A>", "<B>"};

/// Labeled spans overlap, so they cannot be bracketed independently.
class TaggingError : public DataError {
 public:
  using DataError::DataError;
};

/// Snippet with each labeled mention bracketed by its tag on both sides,
/// e.g. "<A> Bob Suter <A>", plus the offset map back to the raw text.
struct TaggedText {
  struct Insertion {
    std::size_t original_offset;
    std::string text;
  };

  std::string text;
  /// Tagged-text spans of the P, A, B mentions (inside their tags).
  std::array<Span, 3> mentions;
  /// Tagged-text offsets where each opening/closing tag literal starts.
  std::array<std::size_t, 3> open_tags{};
  std::array<std::size_t, 3> close_tags{};
  /// Insertions in application order (ascending original offset, closing
  /// tags before opening tags at the same offset).
  std::vector<Insertion> insertions;

  /// Offset of raw position `original` when it starts a span (after every
  /// tag inserted at that position).
  std::size_t to_tagged_start(std::size_t original) const;
  /// Offset of raw position `original` when it ends a span (before tags
  /// inserted at that position).
  std::size_t to_tagged_end(std::size_t original) const;
  Span to_tagged(const Span& original) const;
  /// Raw offset of a tagged position outside any inserted tag string.
  std::size_t to_original(std::size_t tagged) const;
  /// Smallest raw span covering the non-inserted bytes of a tagged span;
  /// nullopt when the span holds only inserted tag text.
  std::optional<Span> to_original(const Span& tagged) const;
};

/// Wraps P, A and B as "<X> span <X>". Throws TaggingError when spans overlap.
TaggedText insert_mention_tags(const GapSample& sample);

/// Removes the inserted tag strings, recovering the raw snippet.
std::string strip_mention_tags(const TaggedText& tagged);

}  // namespace gpr
