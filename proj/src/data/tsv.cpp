#include "gpr/data/tsv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gpr/data/utf8.hpp"

namespace gpr {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

bool parse_bool(const std::string& field, const std::string& where) {
  std::string l(field);
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "true") return true;
  if (l == "false") return false;
  throw ParseError(where + ": expected TRUE/FALSE, got '" + field + "'");
}

std::size_t parse_offset(const std::string& field, const std::string& where) {
  std::size_t v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(where + ": bad offset '" + field + "'");
  return v;
}

}  // namespace

std::vector<GapSample> parse_tsv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_tabs(line);
  const std::size_t ncols = std::size(kGapColumns);
  bool header_ok = header.size() == ncols;
  for (std::size_t i = 0; header_ok && i < ncols; ++i) header_ok = header[i] == kGapColumns[i];
  if (!header_ok) throw ParseError(source + ":1: header does not match the GAP column set");

  std::vector<GapSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto f = split_tabs(line);
    if (f.size() != ncols) {
      throw ParseError(where + ": expected " + std::to_string(ncols) + " fields, got " + std::to_string(f.size()));
    }
    GapSample s;
    s.id = f[0];
    s.text = f[1];
    const Utf8Index index(s.text);
    auto mention = [&](const std::string& surface, const std::string& offset) {
      const std::size_t cp = parse_offset(offset, where);
      if (cp > index.code_points()) throw IntegrityError(where + ": offset " + offset + " beyond text");
      return Mention{surface, index.to_byte(cp)};
    };
    s.pronoun = mention(f[2], f[3]);
    s.a = mention(f[4], f[5]);
    s.a_coref = parse_bool(f[6], where);
    s.b = mention(f[7], f[8]);
    s.b_coref = parse_bool(f[9], where);
    s.url = f[10];
    const auto gender = pronoun_gender(s.pronoun.text);
    if (!gender) throw GenderError(where + ": pronoun '" + s.pronoun.text + "' is not in the gender lexicon");
    s.gender = *gender;
    try {
      s.validate();
    } catch (const DataError& e) {
      if (dynamic_cast<const IntegrityError*>(&e)) throw IntegrityError(where + ": " + e.what());
      if (dynamic_cast<const ContradictoryGoldError*>(&e)) throw ContradictoryGoldError(where + ": " + e.what());
      throw;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<GapSample> parse_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_tsv(in, path.string());
}

void write_tsv(std::ostream& out, const std::vector<GapSample>& samples) {
  for (std::size_t i = 0; i < std::size(kGapColumns); ++i) out << (i ? "\t" : "") << kGapColumns[i];
  out << '\n';
  for (const auto& s : samples) {
    const Utf8Index index(s.text);
    auto cp = [&](const Mention& m) { return index.to_code_point(m.offset); };
    out << s.id << '\t' << s.text << '\t' << s.pronoun.text << '\t' << cp(s.pronoun) << '\t' << s.a.text << '\t'
        << cp(s.a) << '\t' << (s.a_coref ? "TRUE" : "FALSE") << '\t' << s.b.text << '\t' << cp(s.b) << '\t'
        << (s.b_coref ? "TRUE" : "FALSE") << '\t' << s.url << '\n';
  }
}

void write_tsv(const std::filesystem::path& path, const std::vector<GapSample>& samples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_tsv(out, samples);
}

}  // namespace gpr
