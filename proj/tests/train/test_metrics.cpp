#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gpr/data/tsv.hpp"
#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/rng.hpp"
#include "gpr/train/prediction_io.hpp"

using namespace gpr;

namespace {

GapSample sample(const std::string& id, Gender gender, Label gold) {
  GapSample s;
  s.id = id;
  s.gender = gender;
  s.set_label(gold);
  return s;
}

PredictionRecord pred(const std::string& id, Label label) {
  PredictionRecord p;
  p.id = id;
  p.probs[static_cast<std::size_t>(label)] = 1.0;
  return p;
}

std::vector<GapSample> random_gold(Rng& rng, std::size_t n) {
  std::vector<GapSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(sample("s" + std::to_string(i), rng.bernoulli(0.5) ? Gender::kMasculine : Gender::kFeminine,
                         kAllLabels[rng.index(3)]));
  }
  return out;
}

PredictionSet random_predictions(Rng& rng, const std::vector<GapSample>& gold) {
  PredictionSet out;
  for (const auto& s : gold) {
    PredictionRecord p;
    p.id = s.id;
    double z = 0;
    for (double& v : p.probs) z += (v = rng.uniform() + 1e-3);
    for (double& v : p.probs) v /= z;
    p.gold = s.label();
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("gap_f1") {
  SUBCASE("gold as predictions scores 1 everywhere") {
    std::vector<GapSample> gold{sample("a", Gender::kMasculine, Label::kA), sample("b", Gender::kFeminine, Label::kB),
                                sample("c", Gender::kFeminine, Label::kNeither),
                                sample("d", Gender::kMasculine, Label::kB)};
    ScoreReport r = gap_f1(predictions_from_gold(gold), gold);
    CHECK(r.f1_m == 1.0);
    CHECK(r.f1_f == 1.0);
    CHECK(r.f1_overall == 1.0);
    CHECK(r.bias == 1.0);
    CHECK(r.logloss <= 1.2e-15);
    CHECK(r.missing == 0);
  }
  SUBCASE("six-sample hand fixture") {
    // M: A->A (tp), B->A (fp on A, fn on B), N->B (fp on B): tp 1, fp 2, fn 1 -> 2/5
    // F: A->N (fn), B->B (tp), N->N: tp 1, fp 0, fn 1 -> 2/3
    // all: tp 2, fp 2, fn 2 -> 1/2
    std::vector<GapSample> gold{sample("m1", Gender::kMasculine, Label::kA), sample("m2", Gender::kMasculine, Label::kB),
                                sample("m3", Gender::kMasculine, Label::kNeither),
                                sample("f1", Gender::kFeminine, Label::kA), sample("f2", Gender::kFeminine, Label::kB),
                                sample("f3", Gender::kFeminine, Label::kNeither)};
    PredictionSet p{pred("m1", Label::kA), pred("m2", Label::kA), pred("m3", Label::kB),
                    pred("f1", Label::kNeither), pred("f2", Label::kB), pred("f3", Label::kNeither)};
    ScoreReport r = gap_f1(p, gold);
    CHECK(r.f1_m == 2.0 / 5.0);
    CHECK(r.f1_f == 2.0 / 3.0);
    CHECK(r.f1_overall == 0.5);
    CHECK(r.bias == r.f1_f / r.f1_m);
    CHECK(r.counts_m.tp == 1);
    CHECK(r.counts_m.fp == 2);
    CHECK(r.counts_m.fn == 1);
    CHECK(r.counts_m.tn == 2);
    CHECK(r.predicted_counts == std::array<std::size_t, 3>{2, 2, 2});
  }
  SUBCASE("all NEITHER against gold without NEITHER scores zero") {
    std::vector<GapSample> gold{sample("a", Gender::kMasculine, Label::kA), sample("b", Gender::kFeminine, Label::kB)};
    ScoreReport r = gap_f1({pred("a", Label::kNeither), pred("b", Label::kNeither)}, gold);
    CHECK(r.f1_overall == 0.0);
    CHECK(r.f1_m == 0.0);
  }
  SUBCASE("missing predictions count as no coreference") {
    std::vector<GapSample> gold{sample("a", Gender::kMasculine, Label::kA), sample("b", Gender::kMasculine, Label::kB)};
    ScoreReport r = gap_f1({pred("a", Label::kA)}, gold);
    CHECK(r.missing == 1);
    CHECK(r.f1_m == 2.0 / 3.0);
  }
  SUBCASE("argmax ties go A, then B") {
    PredictionRecord p;
    p.probs = {0.4, 0.4, 0.2};
    CHECK(p.predicted() == Label::kA);
    p.probs = {0.2, 0.4, 0.4};
    CHECK(p.predicted() == Label::kB);
    p.probs = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    CHECK(p.predicted() == Label::kA);
  }
  SUBCASE("report formats") {
    ScoreReport r;
    r.f1_m = 0.940;
    r.f1_f = 0.911;
    r.bias = r.f1_f / r.f1_m;
    r.f1_overall = 0.925;
    r.logloss = 0.317;
    CHECK(format_bias(r.bias) == "0.97");
    CHECK(format_logloss(r.logloss) == ".317");
    const std::string t = r.table("GREP");
    CHECK(t.find("      M      F      B      O  logloss") != std::string::npos);
    CHECK(t.find("GREP    94.0   91.1   0.97   92.5     .317") != std::string::npos);
    nlohmann::json j = r.to_json();
    CHECK(j["bias"].get<double>() == r.bias);
  }
}

TEST_CASE("logloss") {
  CHECK(std::abs(logloss({{1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}, {Label::kA, Label::kNeither}) -
                 std::log(3.0)) < 1e-9);
  CHECK(logloss({{1, 0, 0}}, {Label::kA}) <= 1.2e-15);
  CHECK(std::abs(logloss({{0, 1, 0}}, {Label::kA}) + std::log(1e-15)) < 1e-12);
  CHECK_THROWS_AS(logloss({{1, 0, 0}}, {}), DimensionError);
}

TEST_CASE("confusion_compare reproduces the class-wise agreement layout") {
  // Cells as published: per class {a wrong & b wrong, a wrong & b right, a right & b wrong, a right & b right}.
  const std::array<std::array<std::size_t, 4>, 3> published{{{44, 38, 28, 784}, {37, 39, 9, 775}, {45, 44, 11, 146}}};
  std::vector<GapSample> gold;
  PredictionSet a, b;
  for (std::size_t c = 0; c < 3; ++c) {
    const Label g = kAllLabels[c];
    const Label wrong = kAllLabels[(c + 1) % 3];
    for (std::size_t cell = 0; cell < 4; ++cell) {
      for (std::size_t n = 0; n < published[c][cell]; ++n) {
        const std::string id = "c" + std::to_string(c) + "-" + std::to_string(cell) + "-" + std::to_string(n);
        gold.push_back(sample(id, n % 2 ? Gender::kFeminine : Gender::kMasculine, g));
        a.push_back(pred(id, cell >= 2 ? g : wrong));
        b.push_back(pred(id, cell % 2 ? g : wrong));
      }
    }
  }
  ConfusionComparison t = confusion_compare(a, b, gold);
  CHECK(t.cells[2][0][1] == 44);
  CHECK(t.cells[2][1][0] == 11);
  CHECK(t.cells[3][0][0] == 126);
  CHECK(t.cells[3][0][1] == 121);
  CHECK(t.cells[3][1][0] == 48);
  CHECK(t.cells[3][1][1] == 1705);
  const std::string table = t.table();
  CHECK(table.find("NEITHER  Incorrect         45         44") != std::string::npos);
  CHECK(table.find("         Correct           11        146") != std::string::npos);
  CHECK(table.find("Overall  Incorrect        126        121") != std::string::npos);
  CHECK(t.to_json()["classes"]["NEITHER"]["a_incorrect"]["b_correct"] == 44);

  SUBCASE("identical models have empty off-diagonals; cells partition each class") {
    ConfusionComparison same = confusion_compare(a, a, gold);
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(same.cells[c][0][1] == 0);
      CHECK(same.cells[c][1][0] == 0);
    }
    CHECK(same.cells[0][0][0] + same.cells[0][1][1] == 894);
  }
  SUBCASE("coverage mismatch") {
    PredictionSet short_a(a.begin(), a.end() - 1);
    CHECK_THROWS_AS(confusion_compare(short_a, b, gold), DataError);
  }
}

TEST_CASE("prob_histograms") {
  std::vector<GapSample> gold{sample("a", Gender::kMasculine, Label::kA), sample("b", Gender::kFeminine, Label::kB),
                              sample("c", Gender::kFeminine, Label::kB)};
  SUBCASE("perfect predictions fill the top bin") {
    ProbHistograms h = prob_histograms(predictions_from_gold(gold), gold);
    CHECK(h.counts[0][19] == 1);
    CHECK(h.counts[1][19] == 2);
    CHECK(h.counts[2][19] == 0);
  }
  SUBCASE("uniform predictions land in the bin holding 1/3") {
    PredictionSet p;
    for (const auto& s : gold) p.push_back({s.id, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {}, {}});
    ProbHistograms h = prob_histograms(p, gold);
    CHECK(h.counts[1][6] == 2);
    std::size_t total = 0;
    for (const auto& c : h.counts)
      for (std::size_t n : c) total += n;
    CHECK(total == gold.size());
    CHECK(h.csv().rfind("class,bin_low,bin_high,count\nA,0.0000,0.0500,0\n", 0) == 0);
  }
}

TEST_CASE("ensemble_mean") {
  Rng rng(8);
  const auto gold = random_gold(rng, 40);
  SUBCASE("idempotent and hand case") {
    PredictionSet p = random_predictions(rng, gold);
    PredictionSet e = ensemble_mean({p, p, p});
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(e[i].probs[k] - p[i].probs[k]) < 1e-15);
    PredictionSet e2 = ensemble_mean({{pred("x", Label::kA)}, {pred("x", Label::kB)}});
    CHECK(e2[0].probs == std::array<double, 3>{0.5, 0.5, 0.0});
  }
  SUBCASE("rows sum to one and log loss obeys Jensen") {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<PredictionSet> sets;
      double member_mean = 0;
      const int k = 2 + static_cast<int>(rng.index(5));
      for (int s = 0; s < k; ++s) {
        sets.push_back(random_predictions(rng, gold));
        member_mean += gap_f1(sets.back(), gold).logloss / k;
      }
      PredictionSet e = ensemble_mean(sets);
      for (const auto& r : e) CHECK(std::abs(r.probs[0] + r.probs[1] + r.probs[2] - 1.0) < 1e-9);
      CHECK(gap_f1(e, gold).logloss <= member_mean + 1e-12);
    }
  }
  SUBCASE("weights and id mismatches") {
    PredictionSet e = ensemble_mean({{pred("x", Label::kA)}, {pred("x", Label::kB)}}, {3.0, 1.0});
    CHECK(e[0].probs == std::array<double, 3>{0.75, 0.25, 0.0});
    CHECK_THROWS_AS(ensemble_mean({{pred("x", Label::kA)}, {pred("y", Label::kA)}}), DataError);
    CHECK_THROWS_AS(ensemble_mean({{pred("x", Label::kA)}, {}}), DataError);
    CHECK_THROWS_AS(ensemble_mean({}), ConfigError);
    CHECK_THROWS_AS(ensemble_mean({{pred("x", Label::kA)}}, {-1.0}), ConfigError);
  }
}

TEST_CASE("prediction files") {
  const auto dir = std::filesystem::temp_directory_path() / "gpr_test_metrics";
  std::filesystem::create_directories(dir);
  Rng rng(12);
  const auto gold = random_gold(rng, 25);
  SUBCASE("round trip is exact") {
    PredictionSet p = random_predictions(rng, gold);
    write_predictions(dir / "p.csv", p);
    PredictionSet back = read_predictions(dir / "p.csv");
    REQUIRE(back.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(back[i].id == p[i].id);
      CHECK(back[i].probs == p[i].probs);
    }
    std::ifstream in(dir / "p.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "ID,A,B,NEITHER");
  }
  SUBCASE("malformed rows name the line") {
    auto write = [&](const std::string& body) {
      std::ofstream(dir / "bad.csv") << "ID,A,B,NEITHER\n" << body;
    };
    write("x,0.5,0.5,0\ny,0.5,0.6,0\n");
    try {
      read_predictions(dir / "bad.csv");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("bad.csv:3:") != std::string::npos);
    }
    write("x,0.5,0.5\n");
    CHECK_THROWS_AS(read_predictions(dir / "bad.csv"), ParseError);
    write("x,1,0,0\nx,1,0,0\n");
    CHECK_THROWS_AS(read_predictions(dir / "bad.csv"), ParseError);
    write("x,abc,0,0\n");
    CHECK_THROWS_AS(read_predictions(dir / "bad.csv"), ParseError);
  }
  SUBCASE("report files") {
    ScoreReport r = gap_f1(predictions_from_gold(gold), gold);
    write_report(dir / "report", r, "gold");
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "report.txt"));
    std::ifstream in(dir / "report.json");
    CHECK(nlohmann::json::parse(in)["f1_overall"] == 1.0);
  }
}
