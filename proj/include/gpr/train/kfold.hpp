#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gpr/train/trainer.hpp"

namespace gpr {

/// Fold index per sample: ids ordered by stable_hash(id, fold_seed), dealt
/// round-robin, so sizes differ by at most one.
std::vector<int> assign_folds(const std::vector<std::string>& ids, int folds, std::uint64_t fold_seed);

struct CvOptions {
  /// Parallel (fold, seed) jobs; 0 uses the hardware concurrency.
  unsigned workers = 0;
  std::uint64_t fold_seed = 42;
  /// When set, each job writes model_f<fold>_s<seed>.ckpt and a history CSV here.
  std::optional<std::filesystem::path> checkpoint_dir;
};

struct CvJobResult {
  int fold = 0;
  std::uint64_t seed = 0;
  TrainResult train;
  PredictionSet held_out;
  PredictionSet test;
};

struct CvResult {
  std::vector<int> folds;                // per sample of the full dataset
  std::vector<CvJobResult> jobs;         // ordered by (seed, fold)
  std::vector<PredictionSet> oof;        // per seed, dataset order
  std::vector<PredictionSet> test_sets;  // per job, empty without a test set
  PredictionSet oof_ensemble;
  PredictionSet test_ensemble;
};

/// Trains one model per (fold, seed): k-1 folds train, the held-out fold
/// early-stops and receives out-of-fold predictions, and `test` (optional) is
/// predicted by every model.
CvResult kfold_ensemble(const TrainConfig& config, const Dataset& data, const Dataset* test,
                        const std::vector<std::uint64_t>& seeds, const CvOptions& options = {});

}  // namespace gpr
