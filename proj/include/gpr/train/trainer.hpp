#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpr/tensor/optim.hpp"
#include "gpr/train/metrics.hpp"
#include "gpr/train/pipeline.hpp"

namespace gpr {

struct TrainConfig {
  ModelConfig model;
  int batch_size = 16;
  AdamConfig adam;
  /// Gradient steps between validation passes.
  int eval_every = 80;
  /// Validation passes without improvement before stopping.
  int patience = 5;
  int max_steps = 2000;
  std::uint64_t seed = 42;
  int folds = 5;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Patience-based stopping on a loss to minimize.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  /// Records one evaluation; returns true when it is a new best.
  bool update(int step, double loss);
  bool should_stop() const { return bad_evals_ >= patience_; }
  int best_step() const { return best_step_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  int bad_evals_ = 0;
  int best_step_ = -1;
  double best_loss_ = 0.0;
};

struct HistoryRow {
  int step = 0;
  double train_loss = 0.0;  // mean over the steps since the previous row
  double val_loss = 0.0;
  double val_f1 = 0.0;
};

void write_history(const std::filesystem::path& path, const std::vector<HistoryRow>& history);

struct TrainResult {
  std::vector<HistoryRow> history;
  int best_step = 0;
  double best_val_loss = 0.0;
  int steps = 0;
  bool stopped_early = false;
};

/// Trains `model` in place; on return it holds the best-validation weights
/// (final weights when `validation` is empty). Throws NumericError on a
/// non-finite loss or gradient, naming the batch ids and grad norms.
TrainResult train(Model& model, const TrainConfig& config, const Dataset& train_set, const Dataset& validation);

/// Eval-mode predictions with gold/gender attached.
PredictionSet predict(const Model& model, const Dataset& data);

/// Eval-mode traces (GREP only; empty for ProBERT).
std::vector<EvidenceTrace> export_traces(const Model& model, const Dataset& data);

/// Mean cross entropy of `predictions` against their attached gold labels.
double mean_logloss(const PredictionSet& predictions);

}  // namespace gpr
