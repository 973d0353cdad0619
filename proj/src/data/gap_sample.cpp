#include "gpr/data/gap_sample.hpp"

#include <algorithm>
#include <cctype>

namespace gpr {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view label_name(Label label) {
  switch (label) {
    case Label::kA:
      return "A";
    case Label::kB:
      return "B";
    case Label::kNeither:
      return "NEITHER";
  }
  return "?";
}

Label parse_label(std::string_view name) {
  const std::string l = lower(name);
  if (l == "a") return Label::kA;
  if (l == "b") return Label::kB;
  if (l == "neither") return Label::kNeither;
  throw DataError("unknown label '" + std::string(name) + "'");
}

char gender_code(Gender gender) { return gender == Gender::kMasculine ? 'M' : 'F'; }

Label derive_label(bool a_coref, bool b_coref) {
  if (a_coref && b_coref) throw ContradictoryGoldError("pronoun marked coreferent with both A and B");
  if (a_coref) return Label::kA;
  if (b_coref) return Label::kB;
  return Label::kNeither;
}

std::optional<Gender> pronoun_gender(std::string_view surface) {
  const std::string l = lower(surface);
  if (l == "he" || l == "him" || l == "his") return Gender::kMasculine;
  if (l == "she" || l == "her" || l == "hers") return Gender::kFeminine;
  return std::nullopt;
}

void GapSample::set_label(Label label) {
  a_coref = label == Label::kA;
  b_coref = label == Label::kB;
}

void GapSample::validate() const {
  static constexpr const char* kRoles[] = {"pronoun", "A", "B"};
  const auto ms = mentions();
  for (int r = 0; r < 3; ++r) {
    const Mention& m = *ms[r];
    if (m.text.empty()) throw IntegrityError(id + ": empty " + kRoles[r] + " mention");
    if (m.offset + m.text.size() > text.size() || text.compare(m.offset, m.text.size(), m.text) != 0) {
      throw IntegrityError(id + ": " + kRoles[r] + " '" + m.text + "' not found at offset " +
                           std::to_string(m.offset));
    }
  }
  if (!pronoun_gender(pronoun.text)) throw GenderError(id + ": pronoun '" + pronoun.text + "' is not gendered");
  derive_label(a_coref, b_coref);
}

}  // namespace gpr
