#include "gpr/train/kfold.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/log.hpp"

namespace gpr {

std::vector<int> assign_folds(const std::vector<std::string>& ids, int folds, std::uint64_t fold_seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (ids.size() < static_cast<std::size_t>(folds)) {
    throw ConfigError(std::to_string(ids.size()) + " samples cannot fill " + std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::uint64_t> keys(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) keys[i] = stable_hash(ids[i], fold_seed);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] != keys[b] ? keys[a] < keys[b] : ids[a] < ids[b];
  });
  std::vector<int> out(ids.size());
  for (std::size_t r = 0; r < order.size(); ++r) out[order[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));
  return out;
}

CvResult kfold_ensemble(const TrainConfig& config, const Dataset& data, const Dataset* test,
                        const std::vector<std::uint64_t>& seeds, const CvOptions& options) {
  config.validate();
  if (seeds.empty()) throw ConfigError("cross-validation needs at least one seed");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (std::count(seeds.begin(), seeds.end(), seeds[i]) > 1) {
      throw ConfigError("seed " + std::to_string(seeds[i]) + " listed twice");
    }
  }
  CvResult result;
  std::vector<std::string> ids;
  for (const auto& ex : data.examples) ids.push_back(ex.id);
  result.folds = assign_folds(ids, config.folds, options.fold_seed);

  std::vector<std::vector<std::size_t>> train_idx(static_cast<std::size_t>(config.folds));
  std::vector<std::vector<std::size_t>> held_idx(static_cast<std::size_t>(config.folds));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (int f = 0; f < config.folds; ++f) {
      (result.folds[i] == f ? held_idx : train_idx)[static_cast<std::size_t>(f)].push_back(i);
    }
  }

  for (std::uint64_t seed : seeds) {
    for (int f = 0; f < config.folds; ++f) result.jobs.push_back({f, seed, {}, {}, {}});
  }
  if (options.checkpoint_dir) std::filesystem::create_directories(*options.checkpoint_dir);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next++;
      if (j >= result.jobs.size()) return;
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      CvJobResult& job = result.jobs[j];
      try {
        TrainConfig jc = config;
        jc.seed = job.seed;
        const auto f = static_cast<std::size_t>(job.fold);
        const Dataset train_set = data.subset(train_idx[f]);
        const Dataset held = data.subset(held_idx[f]);
        Model model(jc.model, job.seed);
        job.train = train(model, jc, train_set, held);
        job.held_out = predict(model, held);
        if (test) job.test = predict(model, *test);
        if (options.checkpoint_dir) {
          const std::string stem = "model_f" + std::to_string(job.fold) + "_s" + std::to_string(job.seed);
          model.save(*options.checkpoint_dir / (stem + ".ckpt"),
                     {{"seed", job.seed}, {"step", job.train.best_step}, {"fold", job.fold}});
          write_history(*options.checkpoint_dir / (stem + "_history.csv"), job.train.history);
        }
        log_info("fold " + std::to_string(job.fold) + " seed " + std::to_string(job.seed) + ": best step " +
                 std::to_string(job.train.best_step) + ", val loss " + std::to_string(job.train.best_val_loss));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(result.jobs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t s = 0; s < seeds.size(); ++s) {
    PredictionSet oof(data.size());
    std::vector<bool> filled(data.size(), false);
    for (const CvJobResult& job : result.jobs) {
      if (job.seed != seeds[s]) continue;
      const auto& held = held_idx[static_cast<std::size_t>(job.fold)];
      for (std::size_t k = 0; k < held.size(); ++k) {
        if (filled[held[k]]) throw DataError("sample '" + ids[held[k]] + "' predicted twice for one seed");
        oof[held[k]] = job.held_out[k];
        filled[held[k]] = true;
      }
    }
    result.oof.push_back(std::move(oof));
  }
  result.oof_ensemble = ensemble_mean(result.oof);
  if (test) {
    for (const auto& job : result.jobs) result.test_sets.push_back(job.test);
    result.test_ensemble = ensemble_mean(result.test_sets);
  }
  return result;
}

}  // namespace gpr
