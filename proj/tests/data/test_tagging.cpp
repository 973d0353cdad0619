#include <doctest.h>

#include <algorithm>

#include "gpr/data/tagging.hpp"
#include "gpr/tensor/rng.hpp"

using namespace gpr;

namespace {

GapSample make(std::string text, std::string p, std::string a, std::string b) {
  GapSample s;
  s.id = "t";
  s.pronoun = {p, text.find(p)};
  s.a = {a, text.find(a)};
  s.b = {b, text.find(b)};
  s.text = std::move(text);
  s.gender = *pronoun_gender(p);
  return s;
}

void check_round_trip(const GapSample& s) {
  const TaggedText t = insert_mention_tags(s);
  CHECK(strip_mention_tags(t) == s.text);
  const auto ms = s.mentions();
  for (std::size_t r = 0; r < 3; ++r) {
    const Span tagged = t.mentions[r];
    CHECK(t.text.substr(tagged.offset, tagged.length) == ms[r]->text);
    CHECK(t.to_tagged(ms[r]->span()) == tagged);
    CHECK(t.to_original(tagged.offset) == ms[r]->offset);
    CHECK(t.to_original(tagged) == ms[r]->span());
    CHECK(t.text.compare(t.open_tags[r], 3, kTagTokens[r]) == 0);
    CHECK(t.text.compare(t.close_tags[r], 3, kTagTokens[r]) == 0);
  }
}

}  // namespace

TEST_CASE("insert_mention_tags reproduces the published tagging example") {
  const GapSample s = make(
      "... NHLer Gary Suter and Olympic-medalist Bob Suter are Dehner's uncles. His cousin is Minnesota Wild's "
      "alternate captain Ryan ...",
      "His", "Bob Suter", "Dehner");
  const TaggedText t = insert_mention_tags(s);
  CHECK(t.text ==
        "... NHLer Gary Suter and Olympic-medalist <A> Bob Suter <A> are <B> Dehner <B>'s uncles. <P> His <P> cousin "
        "is Minnesota Wild's alternate captain Ryan ...");
  check_round_trip(s);
}

TEST_CASE("span at position zero") {
  const GapSample s = make("Ann met Beth and she smiled.", "she", "Ann", "Beth");
  const TaggedText t = insert_mention_tags(s);
  CHECK(t.text.rfind("<A> Ann <A>", 0) == 0);
  CHECK(t.mentions[1].offset == 4);
  // Everything after A's closing tag shifts by the length of both inserted tags.
  CHECK(t.to_tagged_start(4) == 4 + 8);
  check_round_trip(s);
}

TEST_CASE("adjacent spans nest without overlap") {
  GapSample s;
  s.id = "adj";
  s.text = "AnnBeth said he left.";
  s.a = {"Ann", 0};
  s.b = {"Beth", 3};
  s.pronoun = {"he", 13};
  s.gender = Gender::kMasculine;
  const TaggedText t = insert_mention_tags(s);
  CHECK(t.text == "<A> Ann <A><B> Beth <B> said <P> he <P> left.");
  check_round_trip(s);
}

TEST_CASE("overlapping spans are rejected") {
  GapSample s;
  s.id = "ovl";
  s.text = "Ann Beth said he left.";
  s.a = {"Ann Beth", 0};
  s.b = {"Beth", 4};
  s.pronoun = {"he", 14};
  CHECK_THROWS_AS(insert_mention_tags(s), TaggingError);
}

TEST_CASE("tag then strip is the identity on random snippets") {
  Rng rng(5);
  const std::string alphabet = "abcdefg XYZ.,'";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const std::size_t n = 12 + rng.index(40);
    for (std::size_t i = 0; i < n; ++i) text += alphabet[rng.index(alphabet.size())];
    // Three disjoint spans in random order; the pronoun surface is written in.
    std::vector<std::size_t> cuts;
    while (cuts.size() < 6) {
      const std::size_t c = rng.index(n + 1);
      if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    std::array<Span, 3> spans = {Span{cuts[0], cuts[1] - cuts[0]}, Span{cuts[2], cuts[3] - cuts[2]},
                                 Span{cuts[4], cuts[5] - cuts[4]}};
    std::shuffle(spans.begin(), spans.end(), rng);
    GapSample s;
    s.id = "rand";
    s.text = text;
    Mention* ms[3] = {&s.pronoun, &s.a, &s.b};
    for (int r = 0; r < 3; ++r) *ms[r] = {text.substr(spans[r].offset, spans[r].length), spans[r].offset};
    check_round_trip(s);
  }
}
