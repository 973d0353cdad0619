#include "gpr/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/log.hpp"
#include "gpr/train/prediction_io.hpp"

namespace gpr {

namespace {

std::vector<Label> gold_labels(const PredictionSet& p) {
  std::vector<Label> out;
  for (const auto& r : p) out.push_back(r.gold.value());
  return out;
}

std::string describe_batch(const Dataset& data, const std::vector<std::size_t>& batch, const ParamSet& params) {
  std::ostringstream os;
  os << "batch ids:";
  for (std::size_t i : batch) os << " " << data.examples[i].id;
  os << "; grad norms:";
  for (const auto& [name, t] : params.entries()) {
    if (t.has_grad()) os << " " << name << "=" << t.grad().norm();
  }
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
  if (eval_every < 1) throw ConfigError("eval-every must be at least 1");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (max_steps < 1) throw ConfigError("max steps must be at least 1");
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (adam.learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"model", model.to_json()},
          {"batch_size", batch_size},
          {"adam",
           {{"learning_rate", adam.learning_rate},
            {"beta1", adam.beta1},
            {"beta2", adam.beta2},
            {"epsilon", adam.epsilon},
            {"weight_decay", adam.weight_decay},
            {"bias_correction", adam.bias_correction}}},
          {"eval_every", eval_every},
          {"patience", patience},
          {"max_steps", max_steps},
          {"seed", seed},
          {"folds", folds}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model"));
  c.batch_size = j.value("batch_size", c.batch_size);
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    c.adam.learning_rate = a.value("learning_rate", c.adam.learning_rate);
    c.adam.beta1 = a.value("beta1", c.adam.beta1);
    c.adam.beta2 = a.value("beta2", c.adam.beta2);
    c.adam.epsilon = a.value("epsilon", c.adam.epsilon);
    c.adam.weight_decay = a.value("weight_decay", c.adam.weight_decay);
    c.adam.bias_correction = a.value("bias_correction", c.adam.bias_correction);
  }
  c.eval_every = j.value("eval_every", c.eval_every);
  c.patience = j.value("patience", c.patience);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.seed = j.value("seed", c.seed);
  c.folds = j.value("folds", c.folds);
  c.validate();
  return c;
}

bool EarlyStopping::update(int step, double loss) {
  if (best_step_ < 0 || loss < best_loss_) {
    best_step_ = step;
    best_loss_ = loss;
    bad_evals_ = 0;
    return true;
  }
  ++bad_evals_;
  return false;
}

void write_history(const std::filesystem::path& path, const std::vector<HistoryRow>& history) {
  std::ostringstream os;
  os.precision(10);
  os << "step,train_loss,val_loss,val_f1\n";
  for (const auto& r : history) os << r.step << "," << r.train_loss << "," << r.val_loss << "," << r.val_f1 << "\n";
  write_file_atomic(path, os.str());
}

double mean_logloss(const PredictionSet& predictions) {
  std::vector<std::array<double, 3>> probs;
  for (const auto& p : predictions) probs.push_back(p.probs);
  return logloss(probs, gold_labels(predictions));
}

PredictionSet predict(const Model& model, const Dataset& data) {
  NoGradGuard no_grad;
  PredictionSet out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Matrix probs = model.forward(data.input(i)).probs.value();
    PredictionRecord p;
    p.id = data.examples[i].id;
    for (std::size_t k = 0; k < 3; ++k) p.probs[k] = probs(0, static_cast<Index>(k));
    p.gold = data.examples[i].label;
    p.gender = data.examples[i].gender;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<EvidenceTrace> export_traces(const Model& model, const Dataset& data) {
  NoGradGuard no_grad;
  std::vector<EvidenceTrace> out;
  if (model.config().kind != ModelKind::kGrep) return out;
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(*model.forward(data.input(i)).trace);
  return out;
}

TrainResult train(Model& model, const TrainConfig& config, const Dataset& train_set, const Dataset& validation) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  {
    std::unordered_set<std::string> ids;
    for (const auto& ex : train_set.examples) ids.insert(ex.id);
    for (const auto& ex : validation.examples) {
      if (ids.count(ex.id)) throw DataError("sample '" + ex.id + "' is in both the training and validation sets");
    }
  }
  ParamSet params = model.trainable();
  Adam adam(params, config.adam);
  const Rng base(config.seed);
  Rng shuffle_rng = base.stream(rng_stream::kShuffle);
  Rng dropout_rng = base.stream(rng_stream::kDropout);
  EarlyStopping stopping(config.patience);
  std::vector<Matrix> best = params.snapshot();

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  double loss_since_eval = 0.0;
  int steps_since_eval = 0;

  auto evaluate = [&](int step) {
    HistoryRow row;
    row.step = step;
    row.train_loss = steps_since_eval > 0 ? loss_since_eval / steps_since_eval : 0.0;
    loss_since_eval = 0.0;
    steps_since_eval = 0;
    if (validation.empty()) {
      result.history.push_back(row);
      return;
    }
    const PredictionSet preds = predict(model, validation);
    row.val_loss = mean_logloss(preds);
    row.val_f1 = gap_f1(preds, validation.samples).f1_overall;
    result.history.push_back(row);
    if (stopping.update(step, row.val_loss)) best = params.snapshot();
  };

  for (int step = 1; step <= config.max_steps; ++step) {
    std::vector<std::size_t> batch;
    while (static_cast<int>(batch.size()) < std::min<int>(config.batch_size, static_cast<int>(order.size()))) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }
    params.zero_grad();
    double batch_loss = 0.0;
    const double weight = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i : batch) {
      const Tensor probs = model.forward(train_set.input(i), {true, &dropout_rng}).probs;
      const Tensor loss = scale(cross_entropy(probs, {static_cast<int>(train_set.examples[i].label)}), weight);
      batch_loss += loss.item();
      loss.backward();
    }
    bool finite = std::isfinite(batch_loss);
    for (auto& [name, t] : params.entries()) {
      if (!t.has_grad()) t.mutable_grad();
      finite = finite && t.grad().allFinite();
    }
    if (!finite) {
      throw NumericError("non-finite loss " + std::to_string(batch_loss) + " at step " + std::to_string(step) + "; " +
                         describe_batch(train_set, batch, params));
    }
    adam.step(params);
    loss_since_eval += batch_loss;
    ++steps_since_eval;
    result.steps = step;
    if (step % config.eval_every == 0 || step == config.max_steps) {
      evaluate(step);
      if (!validation.empty() && stopping.should_stop()) {
        result.stopped_early = step < config.max_steps;
        break;
      }
    }
  }
  if (!validation.empty()) {
    params.restore(best);
    result.best_step = stopping.best_step();
    result.best_val_loss = stopping.best_loss();
  } else {
    result.best_step = result.steps;
  }
  return result;
}

}  // namespace gpr
