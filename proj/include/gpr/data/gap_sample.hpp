#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "gpr/tensor/errors.hpp"

namespace gpr {

enum class Gender { kMasculine, kFeminine };

/// Resolution classes, in the column order of the prediction files.
enum class Label { kA = 0, kB = 1, kNeither = 2 };
inline constexpr int kNumClasses = 3;
inline constexpr std::array<Label, 3> kAllLabels = {Label::kA, Label::kB, Label::kNeither};

std::string_view label_name(Label label);
/// Accepts "A", "B", "NEITHER" (case-insensitive).
Label parse_label(std::string_view name);
char gender_code(Gender gender);

/// Both flags set: the pronoun cannot corefer with both candidates.
class ContradictoryGoldError : public DataError {
 public:
  using DataError::DataError;
};

/// Pronoun outside the six-form gender lexicon.
class GenderError : public DataError {
 public:
  using DataError::DataError;
};

/// Offsets that do not point at the stated surface string.
class IntegrityError : public DataError {
 public:
  using DataError::DataError;
};

/// Half-open byte range [offset, offset + length).
struct Span {
  std::size_t offset = 0;
  std::size_t length = 0;

  std::size_t end() const { return offset + length; }
  bool overlaps(const Span& other) const { return offset < other.end() && other.offset < end(); }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct Mention {
  std::string text;
  std::size_t offset = 0;  // byte offset into GapSample::text

  Span span() const { return {offset, text.size()}; }
};

/// (a_coref, b_coref) -> class. Throws ContradictoryGoldError on (true, true).
Label derive_label(bool a_coref, bool b_coref);

/// he/him/his -> M, she/her/hers -> F, case-insensitive; nullopt otherwise.
std::optional<Gender> pronoun_gender(std::string_view surface);

/// One row of a GAP-format corpus. Offsets are bytes into `text`.
struct GapSample {
  std::string id;
  std::string text;
  Mention pronoun;
  Mention a;
  Mention b;
  bool a_coref = false;
  bool b_coref = false;
  std::string url;
  Gender gender = Gender::kMasculine;

  Label label() const { return derive_label(a_coref, b_coref); }
  void set_label(Label label);

  /// Role order P, A, B.
  std::array<const Mention*, 3> mentions() const { return {&pronoun, &a, &b}; }

  /// Throws IntegrityError/GenderError/ContradictoryGoldError on violation.
  void validate() const;
};

}  // namespace gpr
