#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "gpr/data/corrections.hpp"
#include "gpr/tensor/rng.hpp"

using namespace gpr;

namespace {

std::vector<GapSample> corpus_with_counts(std::size_t a, std::size_t b, std::size_t n) {
  std::vector<GapSample> out;
  auto add = [&](Label l, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      GapSample s;
      s.id = "development-" + std::to_string(out.size() + 1);
      s.text = "Al met Bo and he left.";
      s.a = {"Al", 0};
      s.b = {"Bo", 7};
      s.pronoun = {"he", 14};
      s.set_label(l);
      out.push_back(std::move(s));
    }
  };
  add(Label::kA, a);
  add(Label::kB, b);
  add(Label::kNeither, n);
  return out;
}

// Corrections moving `count` samples of class `from` to class `to`, taking
// the next unused ids of that class.
void move(std::vector<CorrectionRecord>& ledger, const std::vector<GapSample>& corpus, std::vector<bool>& used,
          Label from, Label to, std::size_t count) {
  for (std::size_t i = 0; i < corpus.size() && count > 0; ++i) {
    if (used[i] || corpus[i].label() != from) continue;
    used[i] = true;
    ledger.push_back({corpus[i].id, from, to, "fixture", "2019-04-01T00:00:00Z"});
    --count;
  }
  REQUIRE(count == 0);
}

}  // namespace

TEST_CASE("published development-set sanitization deltas") {
  const auto corpus = corpus_with_counts(874, 925, 201);
  std::vector<bool> used(corpus.size(), false);
  std::vector<CorrectionRecord> ledger;
  move(ledger, corpus, used, Label::kA, Label::kB, 24);
  move(ledger, corpus, used, Label::kA, Label::kNeither, 13);
  move(ledger, corpus, used, Label::kB, Label::kA, 18);
  move(ledger, corpus, used, Label::kB, Label::kNeither, 14);
  move(ledger, corpus, used, Label::kNeither, Label::kA, 2);
  move(ledger, corpus, used, Label::kNeither, Label::kB, 2);

  // Through the on-disk ledger format.
  const auto path = std::filesystem::temp_directory_path() / "gpr_corrections_fixture.jsonl";
  save_corrections(path, ledger);
  const auto loaded = load_corrections(path);
  std::filesystem::remove(path);
  REQUIRE(loaded.size() == ledger.size());

  const auto result = apply_corrections(corpus, loaded, "gap-development");
  const auto& c = result.report.classes;
  CHECK(c[0].before == 874);
  CHECK(c[1].before == 925);
  CHECK(c[2].before == 201);
  CHECK(c[0].after == 857);
  CHECK(c[0].moved_out == 37);
  CHECK(c[0].moved_in == 20);
  CHECK(c[1].after == 919);
  CHECK(c[1].moved_out == 32);
  CHECK(c[1].moved_in == 26);
  CHECK(c[2].after == 224);
  CHECK(c[2].moved_out == 4);
  CHECK(c[2].moved_in == 27);
  CHECK(result.report.total == 2000);

  const std::string table = result.report.table();
  CHECK(table.find("Before sanitization") != std::string::npos);
  CHECK(table.find("857(-37)(+20)") != std::string::npos);
  CHECK(table.find("919(-32)(+26)") != std::string::npos);
  CHECK(table.find("224(-4)(+27)") != std::string::npos);
  CHECK(table.find("2000") != std::string::npos);
}

TEST_CASE("apply_corrections properties") {
  const auto corpus = corpus_with_counts(30, 30, 10);
  SUBCASE("empty ledger is the identity") {
    const auto r = apply_corrections(corpus, {});
    for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(r.samples[i].label() == corpus[i].label());
    for (const auto& c : r.report.classes) {
      CHECK(c.moved_in == 0);
      CHECK(c.moved_out == 0);
      CHECK(c.before == c.after);
    }
  }
  SUBCASE("random ledgers preserve size, deltas cancel, revert restores") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Label> current;
      for (const auto& s : corpus) current.push_back(s.label());
      std::vector<CorrectionRecord> ledger;
      for (int k = 0; k < 25; ++k) {
        const std::size_t i = rng.index(corpus.size());
        Label to = kAllLabels[rng.index(3)];
        if (to == current[i]) continue;
        ledger.push_back({corpus[i].id, current[i], to, "", ""});
        current[i] = to;
      }
      const auto r = apply_corrections(corpus, ledger);
      CHECK(r.samples.size() == corpus.size());
      long net = 0;
      for (const auto& c : r.report.classes) {
        net += static_cast<long>(c.moved_in) - static_cast<long>(c.moved_out);
        CHECK(c.after == c.before + c.moved_in - c.moved_out);
      }
      CHECK(net == 0);
      const auto back = apply_corrections(r.samples, revert_corrections(ledger));
      for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(back.samples[i].label() == corpus[i].label());
    }
  }
  SUBCASE("unknown id") {
    CHECK_THROWS_AS(apply_corrections(corpus, {{"nope", Label::kA, Label::kB, "", ""}}), UnknownSampleError);
  }
  SUBCASE("stale old label") {
    CHECK_THROWS_AS(apply_corrections(corpus, {{corpus[0].id, Label::kB, Label::kA, "", ""}}), StaleCorrectionError);
  }
}

TEST_CASE("correction ledger io") {
  const auto path = std::filesystem::temp_directory_path() / "gpr_ledger_io.jsonl";
  std::filesystem::remove(path);
  CHECK(load_corrections(path).empty());
  append_correction(path, {"x-1", Label::kA, Label::kNeither, "ambiguous", utc_timestamp()});
  append_correction(path, {"x-2", Label::kB, Label::kA, "", utc_timestamp()});
  const auto records = load_corrections(path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].sample_id == "x-1");
  CHECK(records[0].new_label == Label::kNeither);
  CHECK(records[0].note == "ambiguous");
  CHECK(records[0].timestamp.size() == 20);

  { std::ofstream(path, std::ios::app) << "{\"sample_id\": \"x-3\", \"old_label\": \"A\", \"new_label\": \"A\"}\n"; }
  try {
    load_corrections(path);
    FAIL("expected ParseError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  std::filesystem::remove(path);
}
