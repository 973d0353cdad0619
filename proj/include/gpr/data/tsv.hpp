#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpr/data/gap_sample.hpp"

namespace gpr {

/// Malformed row; the message carries the 1-based line number.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

/// The GAP column set, in file order.
inline constexpr const char* kGapColumns[] = {"ID",       "Text", "Pronoun", "Pronoun-offset", "A",  "A-offset",
                                              "A-coref", "B",    "B-offset", "B-coref",        "URL"};

/// Reads a GAP TSV. Offsets in the file are code points; they are converted
/// to byte offsets and validated against the text. Gender comes from the
/// pronoun lexicon.
std::vector<GapSample> parse_tsv(const std::filesystem::path& path);
std::vector<GapSample> parse_tsv(std::istream& in, const std::string& source = "<stream>");

/// Writes the GAP TSV format (booleans as TRUE/FALSE, code-point offsets).
void write_tsv(const std::filesystem::path& path, const std::vector<GapSample>& samples);
void write_tsv(std::ostream& out, const std::vector<GapSample>& samples);

}  // namespace gpr
