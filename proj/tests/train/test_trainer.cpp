#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "gpr/data/synthetic.hpp"
#include "gpr/evidence/providers.hpp"
#include "gpr/tensor/errors.hpp"
#include "gpr/train/kfold.hpp"

using namespace gpr;

namespace {

struct ToyData {
  SyntheticCorpus corpus;
  Vocab vocab;
  Dataset data;
};

const ToyData& toy() {
  static const ToyData t = [] {
    ToyData d;
    SyntheticConfig config = SyntheticConfig::defaults();
    config.size = 60;
    d.corpus = generate_synthetic(config);
    const EvidenceSet ev = run_providers(d.corpus.samples, d.corpus.info, {ProviderSpec::parse("oracle")}, 1);
    d.vocab = vocab_for(d.corpus.samples, 300);
    d.data = prepare_dataset(d.corpus.samples, &ev, d.vocab);
    return d;
  }();
  return t;
}

TrainConfig toy_config(ModelKind kind) {
  TrainConfig c;
  c.model.kind = kind;
  c.model.encoder.vocab_size = toy().vocab.size();
  c.model.encoder.hidden = 8;
  c.model.encoder.layers = 1;
  c.model.encoder.heads = 2;
  c.model.grep.heads = 2;
  c.batch_size = 4;
  c.eval_every = 3;
  c.max_steps = 12;
  c.folds = 3;
  return c;
}

std::vector<std::size_t> range(std::size_t from, std::size_t to) {
  std::vector<std::size_t> out;
  for (std::size_t i = from; i < to; ++i) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("early stopping") {
  SUBCASE("patience 1 stops at the first worsening evaluation") {
    EarlyStopping s(1);
    CHECK(s.update(80, 0.9));
    CHECK_FALSE(s.should_stop());
    CHECK(s.update(160, 0.7));
    CHECK_FALSE(s.update(240, 0.8));
    CHECK(s.should_stop());
    CHECK(s.best_step() == 160);
    CHECK(s.best_loss() == 0.7);
  }
  SUBCASE("ties do not count as improvement; improvement resets patience") {
    EarlyStopping s(2);
    s.update(1, 0.5);
    CHECK_FALSE(s.update(2, 0.5));
    CHECK(s.update(3, 0.4));
    CHECK_FALSE(s.update(4, 0.45));
    CHECK_FALSE(s.should_stop());
    CHECK_FALSE(s.update(5, 0.41));
    CHECK(s.should_stop());
    CHECK(s.best_step() == 3);
  }
}

TEST_CASE("train") {
  const Dataset& data = toy().data;
  const Dataset train_set = data.subset(range(0, 48));
  const Dataset val = data.subset(range(48, 60));

  SUBCASE("fixed seed gives identical histories") {
    TrainConfig c = toy_config(ModelKind::kGrep);
    Model m1(c.model, c.seed), m2(c.model, c.seed);
    TrainResult r1 = train(m1, c, train_set, val);
    TrainResult r2 = train(m2, c, train_set, val);
    REQUIRE(r1.history.size() == 4);
    for (std::size_t i = 0; i < r1.history.size(); ++i) {
      CHECK(r1.history[i].step == r2.history[i].step);
      CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
      CHECK(r1.history[i].val_loss == r2.history[i].val_loss);
    }
    CHECK(predict(m1, val)[0].probs == predict(m2, val)[0].probs);
  }
  SUBCASE("returned weights are the best evaluated checkpoint") {
    TrainConfig c = toy_config(ModelKind::kProbert);
    c.max_steps = 30;
    c.patience = 100;
    Model m(c.model, 5);
    TrainResult r = train(m, c, train_set, val);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : r.history) best = std::min(best, row.val_loss);
    CHECK(r.best_val_loss == best);
    CHECK(std::abs(mean_logloss(predict(m, val)) - best) < 1e-12);
  }
  SUBCASE("history csv") {
    TrainConfig c = toy_config(ModelKind::kProbert);
    Model m(c.model, 5);
    TrainResult r = train(m, c, train_set, val);
    const auto path = std::filesystem::temp_directory_path() / "gpr_test_history.csv";
    write_history(path, r.history);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,train_loss,val_loss,val_f1");
  }
  SUBCASE("overlapping train and validation ids are rejected") {
    TrainConfig c = toy_config(ModelKind::kProbert);
    Model m(c.model, 5);
    CHECK_THROWS_AS(train(m, c, train_set, data.subset({0, 50})), DataError);
  }
  SUBCASE("non-finite loss aborts with the batch ids") {
    TrainConfig c = toy_config(ModelKind::kProbert);
    Model m(c.model, 5);
    m.params().at("head.weight").mutable_value()(0, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
      train(m, c, train_set, val);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      const std::string what = e.what();
      CHECK(what.find("batch ids: synth-") != std::string::npos);
      CHECK(what.find("grad norms:") != std::string::npos);
    }
  }
  SUBCASE("config validation and json") {
    TrainConfig c = toy_config(ModelKind::kGrep);
    c.eval_every = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = toy_config(ModelKind::kGrep);
    c.adam.bias_correction = false;
    CHECK(TrainConfig::from_json(c.to_json()).to_json() == c.to_json());
  }
}

TEST_CASE("fold assignment") {
  std::vector<std::string> ids;
  for (int i = 0; i < 103; ++i) ids.push_back("id-" + std::to_string(i));
  const auto folds = assign_folds(ids, 5, 42);
  std::vector<int> sizes(5, 0);
  for (int f : folds) ++sizes[static_cast<std::size_t>(f)];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
  CHECK(assign_folds(ids, 5, 42) == folds);
  CHECK(assign_folds(ids, 5, 43) != folds);
  std::vector<std::string> reversed(ids.rbegin(), ids.rend());
  const auto rf = assign_folds(reversed, 5, 42);
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(rf[ids.size() - 1 - i] == folds[i]);
  CHECK_THROWS_AS(assign_folds(ids, 1, 42), ConfigError);
  CHECK_THROWS_AS(assign_folds({"a"}, 2, 42), ConfigError);
}

TEST_CASE("kfold_ensemble") {
  const Dataset& data = toy().data;
  const Dataset full = data.subset(range(0, 45));
  const Dataset test = data.subset(range(45, 60));
  TrainConfig c = toy_config(ModelKind::kProbert);
  c.max_steps = 6;
  CvOptions opts;
  opts.workers = 2;
  const std::vector<std::uint64_t> seeds{42, 59};
  CvResult r = kfold_ensemble(c, full, &test, seeds, opts);

  CHECK(r.jobs.size() == 6);
  REQUIRE(r.oof.size() == 2);
  for (const auto& set : r.oof) {
    REQUIRE(set.size() == full.size());
    for (std::size_t i = 0; i < set.size(); ++i) CHECK(set[i].id == full.examples[i].id);
  }
  CHECK(r.test_sets.size() == 6);
  CHECK(r.test_ensemble.size() == test.size());
  for (const auto& job : r.jobs) {
    std::set<std::string> held;
    for (const auto& p : job.held_out) held.insert(p.id);
    for (std::size_t i = 0; i < full.size(); ++i) {
      CHECK((r.folds[i] == job.fold) == (held.count(full.examples[i].id) == 1));
    }
  }
  SUBCASE("worker count does not change results") {
    opts.workers = 1;
    CvResult serial = kfold_ensemble(c, full, &test, seeds, opts);
    for (std::size_t i = 0; i < full.size(); ++i) CHECK(serial.oof_ensemble[i].probs == r.oof_ensemble[i].probs);
  }
  SUBCASE("checkpoints per job") {
    opts.checkpoint_dir = std::filesystem::temp_directory_path() / "gpr_test_cv";
    std::filesystem::remove_all(*opts.checkpoint_dir);
    kfold_ensemble(c, full, nullptr, {7}, opts);
    CHECK(std::filesystem::exists(*opts.checkpoint_dir / "model_f2_s7.ckpt"));
    CHECK(std::filesystem::exists(*opts.checkpoint_dir / "model_f0_s7_history.csv"));
    nlohmann::json meta;
    Model::load(*opts.checkpoint_dir / "model_f1_s7.ckpt", &meta);
    CHECK(meta["fold"] == 1);
  }
  SUBCASE("duplicate seeds are rejected") { CHECK_THROWS_AS(kfold_ensemble(c, full, nullptr, {1, 1}), ConfigError); }
}
