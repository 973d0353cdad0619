#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "gpr/data/neither.hpp"
#include "gpr/data/synthetic.hpp"
#include "gpr/data/tsv.hpp"

using namespace gpr;

namespace {

std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Multinomial logistic regression on word counts, full-batch gradient descent.
struct BagOfWords {
  std::map<std::string, Eigen::Index> index;
  Eigen::MatrixXd w;

  Eigen::RowVectorXd features(const std::string& text) const {
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(index.size()) + 1);
    x(x.size() - 1) = 1.0;
    for (const auto& t : words(text)) {
      if (auto it = index.find(t); it != index.end()) x(it->second) += 1.0;
    }
    return x;
  }

  void fit(const std::vector<GapSample>& train) {
    for (const auto& s : train)
      for (const auto& t : words(s.text)) index.emplace(t, static_cast<Eigen::Index>(index.size()));
    const auto d = static_cast<Eigen::Index>(index.size()) + 1;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(train.size()), d);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), 3);
    for (std::size_t i = 0; i < train.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = features(train[i].text);
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(train[i].label())) = 1.0;
    }
    w = Eigen::MatrixXd::Zero(d, 3);
    for (int it = 0; it < 400; ++it) {
      Eigen::MatrixXd logits = x * w;
      for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        logits.row(r).array() -= logits.row(r).maxCoeff();
        logits.row(r) = logits.row(r).array().exp().matrix();
        logits.row(r) /= logits.row(r).sum();
      }
      w -= 0.5 * (x.transpose() * (logits - y) / static_cast<double>(x.rows()) + 1e-4 * w);
    }
  }

  Label predict(const std::string& text) const {
    Eigen::RowVectorXd logits = features(text) * w;
    Eigen::Index best;
    logits.maxCoeff(&best);
    return static_cast<Label>(best);
  }
};

// Label implied by which candidate span the gold cluster contains.
Label implied_by_gold(const GapSample& s, const SyntheticInfo& info) {
  const auto cluster = info.gold_cluster();
  const bool has_a = std::find(cluster.begin(), cluster.end(), s.a.span()) != cluster.end();
  const bool has_b = std::find(cluster.begin(), cluster.end(), s.b.span()) != cluster.end();
  return derive_label(has_a, has_b);
}

SyntheticConfig config(std::size_t size, std::uint64_t seed, double insufficient = 0.5) {
  SyntheticConfig c = SyntheticConfig::defaults();
  c.size = size;
  c.seed = seed;
  c.insufficient_fraction = insufficient;
  return c;
}

}  // namespace

TEST_CASE("minimal synthetic corpus covers classes and genders") {
  const auto corpus = generate_synthetic(config(6, 1));
  REQUIRE(corpus.samples.size() == 6);
  std::map<std::pair<int, int>, int> cells;
  for (const auto& s : corpus.samples) ++cells[{static_cast<int>(s.label()), static_cast<int>(s.gender)}];
  CHECK(cells.size() == 6);
  for (const auto& [k, v] : cells) CHECK(v == 1);
  CHECK_THROWS_AS(generate_synthetic(config(5, 1)), ConfigError);
}

TEST_CASE("synthetic corpus construction") {
  SyntheticConfig c = config(901, 3, 0.4);
  c.class_mix = {0.5, 0.3, 0.2};
  const auto corpus = generate_synthetic(c);
  std::array<long, 3> hist{};
  std::size_t m = 0;
  std::size_t insufficient = 0;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const auto& s = corpus.samples[i];
    const auto& info = corpus.info[i];
    s.validate();
    ++hist[static_cast<std::size_t>(s.label())];
    m += s.gender == Gender::kMasculine;
    insufficient += info.insufficient;
    CHECK(s.a.offset < s.b.offset);
    CHECK(s.a.text != s.b.text);
    CHECK(implied_by_gold(s, info) == s.label());
    CHECK(info.sample_id == s.id);
  }
  CHECK(std::abs(hist[0] - 450.5) <= 1);
  CHECK(std::abs(hist[1] - 270.3) <= 1);
  CHECK(std::abs(hist[2] - 180.2) <= 1);
  CHECK(std::abs(static_cast<double>(m) - 450.5) <= 1);
  CHECK(std::abs(static_cast<double>(insufficient) - 360.4) <= 1);

  const auto again = generate_synthetic(c);
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) CHECK(again.samples[i].text == corpus.samples[i].text);
}

TEST_CASE("config validation") {
  SyntheticConfig c = config(10, 1);
  c.templates.erase(std::remove_if(c.templates.begin(), c.templates.end(),
                                   [](const SyntheticTemplate& t) { return t.label == Label::kB; }),
                    c.templates.end());
  c.templates.push_back({"b-only", Label::kB, "{A} saw {B} when {SUBJ} fell."});
  CHECK_THROWS_AS(generate_synthetic(c), ConfigError);
  c.templates.push_back({"b-bad", Label::kB, "{B} saw {A} when {SUBJ} fell."});
  CHECK_THROWS_AS(generate_synthetic(c), ConfigError);
}

TEST_CASE("bag-of-words baseline cannot resolve context-insufficient samples") {
  const auto train = generate_synthetic(config(2000, 11));
  auto test_cfg = config(2000, 12);
  test_cfg.id_prefix = "heldout";
  const auto test = generate_synthetic(test_cfg);
  BagOfWords bow;
  bow.fit(train.samples);

  std::size_t correct = 0;
  std::array<std::size_t, 2> sub_correct{};
  std::array<std::size_t, 2> sub_total{};
  std::size_t oracle_correct = 0;
  for (std::size_t i = 0; i < test.samples.size(); ++i) {
    const auto& s = test.samples[i];
    const bool ok = bow.predict(s.text) == s.label();
    correct += ok;
    sub_correct[test.info[i].insufficient] += ok;
    ++sub_total[test.info[i].insufficient];
    oracle_correct += implied_by_gold(s, test.info[i]) == s.label();
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(test.samples.size());
  const double sufficient_acc = static_cast<double>(sub_correct[0]) / static_cast<double>(sub_total[0]);
  const double insufficient_acc = static_cast<double>(sub_correct[1]) / static_cast<double>(sub_total[1]);
  MESSAGE("bag-of-words accuracy " << acc << " (sufficient " << sufficient_acc << ", insufficient "
                                   << insufficient_acc << ")");
  CHECK(acc <= 0.70);
  CHECK(sufficient_acc >= 0.95);
  CHECK(insufficient_acc <= 0.45);
  CHECK(oracle_correct == test.samples.size());
}

TEST_CASE("synthetic sidecar round trip") {
  const auto corpus = generate_synthetic(config(30, 4));
  const auto dir = std::filesystem::temp_directory_path();
  write_tsv(dir / "gpr_synth.tsv", corpus.samples);
  write_synthetic_info(dir / "gpr_synth.info.jsonl", corpus);
  const auto samples = parse_tsv(dir / "gpr_synth.tsv");
  const auto info = read_synthetic_info(dir / "gpr_synth.info.jsonl", samples);
  std::filesystem::remove(dir / "gpr_synth.tsv");
  std::filesystem::remove(dir / "gpr_synth.info.jsonl");
  REQUIRE(info.size() == corpus.info.size());
  for (std::size_t i = 0; i < info.size(); ++i) {
    CHECK(info[i].gold_cluster() == corpus.info[i].gold_cluster());
    CHECK(info[i].clusters() == corpus.info[i].clusters());
    CHECK(info[i].insufficient == corpus.info[i].insufficient);
  }
}

TEST_CASE("generate_neither") {
  SUBCASE("three disjoint clusters") {
    DocumentClusters doc;
    doc.id = "d";
    doc.text = "First line here. Maria Lopez met Jane Smith. Later she left. Nobody saw it. End.";
    const std::size_t p = doc.text.find("she");
    doc.clusters = {{{p, 3}}, {{doc.text.find("Maria Lopez"), 11}}, {{doc.text.find("Jane Smith"), 10}}};
    Rng rng(1);
    const auto row = generate_neither(doc, rng, "n-1");
    REQUIRE(row.has_value());
    CHECK(row->label() == Label::kNeither);
    CHECK(row->a.text == "Maria Lopez");
    CHECK(row->b.text == "Jane Smith");
    CHECK(row->pronoun.text == "she");
    CHECK(row->gender == Gender::kFeminine);
    // Covering sentences plus one sentence of padding on each side.
    CHECK(row->text == "First line here. Maria Lopez met Jane Smith. Later she left. Nobody saw it.");
    row->validate();
  }
  SUBCASE("cluster sharing a mention with the pronoun cluster is ineligible") {
    DocumentClusters doc;
    doc.text = "Maria Lopez met Jane Smith and Ann Lee. She left.";
    const Span maria{0, 11};
    const Span she{doc.text.find("She"), 3};
    doc.clusters = {{maria, she}, {maria, {doc.text.find("Jane Smith"), 10}}, {{doc.text.find("Ann Lee"), 7}}};
    Rng rng(2);
    CHECK_FALSE(generate_neither(doc, rng, "n").has_value());
    doc.clusters[1] = {{doc.text.find("Jane Smith"), 10}};
    const auto row = generate_neither(doc, rng, "n");
    REQUIRE(row.has_value());
    CHECK(row->a.text == "Jane Smith");
    CHECK(row->b.text == "Ann Lee");
  }
  SUBCASE("no valid triple is a skip") {
    DocumentClusters doc;
    doc.text = "Maria Lopez smiled. She left.";
    doc.clusters = {{{0, 11}, {doc.text.find("She"), 3}}};
    Rng rng(3);
    CHECK_FALSE(generate_neither(doc, rng, "n").has_value());
  }
}

TEST_CASE("NEITHER augmentation set over the synthetic corpus") {
  SyntheticConfig c = config(1200, 21);
  c.max_fillers = 2;
  const auto corpus = generate_synthetic(c);
  std::vector<DocumentClusters> docs;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i)
    docs.push_back(document_from_synthetic(corpus.samples[i], corpus.info[i]));
  const auto rows = generate_neither_set(docs, NeitherSetConfig{});
  std::size_t m = 0;
  for (const auto& r : rows) {
    CHECK(r.label() == Label::kNeither);
    r.validate();
    m += r.gender == Gender::kMasculine;
  }
  CHECK(rows.size() == 253);
  CHECK(m == 129);
  CHECK(rows.size() - m == 124);
}
