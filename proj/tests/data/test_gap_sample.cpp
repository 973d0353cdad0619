#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "gpr/data/tsv.hpp"
#include "gpr/data/utf8.hpp"

using namespace gpr;

namespace {

const std::string kHeader =
    "ID\tText\tPronoun\tPronoun-offset\tA\tA-offset\tA-coref\tB\tB-offset\tB-coref\tURL\n";

std::vector<GapSample> parse(const std::string& body) {
  std::istringstream in(kHeader + body);
  return parse_tsv(in, "fixture");
}

}  // namespace

TEST_CASE("derive_label") {
  CHECK(derive_label(true, false) == Label::kA);
  CHECK(derive_label(false, true) == Label::kB);
  CHECK(derive_label(false, false) == Label::kNeither);
  CHECK_THROWS_AS(derive_label(true, true), ContradictoryGoldError);
}

TEST_CASE("pronoun gender lexicon") {
  for (const char* p : {"he", "him", "his", "He", "HIS"}) CHECK(pronoun_gender(p) == Gender::kMasculine);
  for (const char* p : {"she", "her", "hers", "She", "HER"}) CHECK(pronoun_gender(p) == Gender::kFeminine);
  for (const char* p : {"they", "it", "hi", ""}) CHECK_FALSE(pronoun_gender(p).has_value());
}

TEST_CASE("utf8 index maps code points to bytes and back") {
  const std::string text = "a\xc3\xa9\xe5\x94\x90z";  // a, e-acute, CJK, z
  Utf8Index idx(text);
  CHECK(idx.code_points() == 4);
  CHECK(idx.to_byte(0) == 0);
  CHECK(idx.to_byte(1) == 1);
  CHECK(idx.to_byte(2) == 3);
  CHECK(idx.to_byte(3) == 6);
  CHECK(idx.to_byte(4) == 7);
  for (std::size_t cp = 0; cp <= 4; ++cp) CHECK(idx.to_code_point(idx.to_byte(cp)) == cp);
}

TEST_CASE("parse_tsv on the fixture corpus") {
  const auto samples = parse_tsv(std::filesystem::path(GPR_FIXTURE_DIR) / "gap_fixture.tsv");
  REQUIRE(samples.size() == 10);

  const GapSample& s282 = samples[0];
  CHECK(s282.id == "test-282");
  CHECK(s282.pronoun.text == "her");
  CHECK(s282.a.text == "Anna MacIntosh");
  CHECK(s282.b.text == "Mildred Vergosen");
  CHECK(s282.a_coref);
  CHECK_FALSE(s282.b_coref);
  CHECK(s282.gender == Gender::kFeminine);
  CHECK(s282.label() == Label::kA);
  CHECK(s282.url == "http://en.wikipedia.org/wiki/Cyrus_S._Ching");
  // File offsets are code points; the snippet starts with multi-byte characters.
  Utf8Index idx282(s282.text);
  CHECK(idx282.to_code_point(s282.pronoun.offset) == 410);
  CHECK(idx282.to_code_point(s282.a.offset) == 338);
  CHECK(idx282.to_code_point(s282.b.offset) == 475);
  CHECK(s282.pronoun.offset > 410);

  const GapSample& s406 = samples[1];
  CHECK(s406.id == "test-406");
  CHECK(s406.pronoun.text == "he");
  CHECK(s406.a.text == "Yang");
  CHECK(s406.b.text == "Wei");
  CHECK(s406.label() == Label::kNeither);
  CHECK(s406.gender == Gender::kMasculine);
  Utf8Index idx406(s406.text);
  CHECK(idx406.to_code_point(s406.pronoun.offset) == 803);
  CHECK(idx406.to_code_point(s406.a.offset) == 636);
  CHECK(idx406.to_code_point(s406.b.offset) == 916);

  for (const auto& s : samples) {
    for (const Mention* m : s.mentions()) CHECK(s.text.compare(m->offset, m->text.size(), m->text) == 0);
  }
}

TEST_CASE("parse_tsv errors carry row numbers") {
  SUBCASE("wrong header") {
    std::istringstream in("ID\tText\n");
    CHECK_THROWS_AS(parse_tsv(in, "x"), ParseError);
  }
  SUBCASE("missing columns") {
    try {
      parse("a\tHe ran.\the\t0\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("fixture:2") != std::string::npos);
    }
  }
  SUBCASE("bad boolean on row 3") {
    const std::string good = "r1\tAl met Bo and he left.\the\t14\tAl\t0\tTRUE\tBo\t7\tFALSE\tu\n";
    const std::string bad = "r2\tAl met Bo and he left.\the\t14\tAl\t0\tyes\tBo\t7\tFALSE\tu\n";
    try {
      parse(good + bad);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("fixture:3") != std::string::npos);
    }
  }
  SUBCASE("offset does not match surface") {
    CHECK_THROWS_AS(parse("r1\tAl met Bo and he left.\the\t13\tAl\t0\tTRUE\tBo\t7\tFALSE\tu\n"), IntegrityError);
  }
  SUBCASE("pronoun outside the lexicon") {
    CHECK_THROWS_AS(parse("r1\tAl met Bo and it left.\tit\t14\tAl\t0\tTRUE\tBo\t7\tFALSE\tu\n"), GenderError);
  }
  SUBCASE("both flags set") {
    CHECK_THROWS_AS(parse("r1\tAl met Bo and he left.\the\t14\tAl\t0\tTRUE\tBo\t7\tTRUE\tu\n"),
                    ContradictoryGoldError);
  }
}

TEST_CASE("write_tsv then parse_tsv round trips") {
  const auto samples = parse_tsv(std::filesystem::path(GPR_FIXTURE_DIR) / "gap_fixture.tsv");
  std::stringstream buf;
  write_tsv(buf, samples);
  const auto again = parse_tsv(buf, "roundtrip");
  REQUIRE(again.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(again[i].id == samples[i].id);
    CHECK(again[i].text == samples[i].text);
    CHECK(again[i].pronoun.offset == samples[i].pronoun.offset);
    CHECK(again[i].a.offset == samples[i].a.offset);
    CHECK(again[i].b.offset == samples[i].b.offset);
    CHECK(again[i].label() == samples[i].label());
  }
}

TEST_CASE("gap-development corpus counts" * doctest::skip(std::getenv("GREP_DATA_DIR") == nullptr)) {
  const auto path = std::filesystem::path(std::getenv("GREP_DATA_DIR")) / "gap-development.tsv";
  if (!std::filesystem::exists(path)) return;
  const auto samples = parse_tsv(path);
  std::size_t m = 0;
  for (const auto& s : samples) m += s.gender == Gender::kMasculine;
  CHECK(samples.size() == 2000);
  CHECK(m == 1000);
  CHECK(samples.size() - m == 1000);
}
