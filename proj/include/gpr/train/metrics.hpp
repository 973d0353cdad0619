#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpr/data/gap_sample.hpp"

namespace gpr {

/// One model output over (A, B, NEITHER).
struct PredictionRecord {
  std::string id;
  std::array<double, 3> probs{};
  std::optional<Label> gold;
  std::optional<Gender> gender;

  /// Argmax, ties resolved A < B < NEITHER.
  Label predicted() const;
};

using PredictionSet = std::vector<PredictionRecord>;

/// Binary coreference counts behind a micro F1.
struct BinaryCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  /// 2tp / (2tp + fp + fn); 0 when tp = 0 (undefined precision counts as 0).
  double f1() const;
  BinaryCounts& operator+=(const BinaryCounts& o);
};

struct ScoreReport {
  double f1_m = 0.0;
  double f1_f = 0.0;
  double bias = 0.0;  // f1_f / f1_m, unrounded
  double f1_overall = 0.0;
  double logloss = 0.0;
  BinaryCounts counts_m, counts_f;
  std::array<std::size_t, 3> gold_counts{};
  std::array<std::size_t, 3> predicted_counts{};
  std::size_t samples = 0;
  std::size_t missing = 0;

  nlohmann::json to_json() const;
  /// M, F, B, O, logloss: F1 in percent with one decimal, bias with two,
  /// log loss as ".317".
  std::string table(const std::string& row_name = "model") const;
};

/// A -> (T,F), B -> (F,T), NEITHER -> (F,F).
std::array<bool, 2> coref_decisions(Label label);

/// GAP scorer. Gold samples without a prediction count as (F,F) and are
/// reported in `missing`; predictions for ids outside `gold` are ignored.
ScoreReport gap_f1(const PredictionSet& predictions, const std::vector<GapSample>& gold);

/// Mean -ln p[gold] with probabilities clipped to [1e-15, 1 - 1e-15].
double logloss(const std::vector<std::array<double, 3>>& probs, const std::vector<Label>& gold);

/// "0.317" -> ".317" style formatting used for log loss columns.
std::string format_logloss(double value);
/// Bias at two decimals, e.g. 0.911 / 0.940 -> "0.97".
std::string format_bias(double value);

/// Agreement of two models per gold class: cells[class][a_correct][b_correct],
/// class index 3 is the overall total.
struct ConfusionComparison {
  std::array<std::array<std::array<std::size_t, 2>, 2>, 4> cells{};
  std::string name_a = "ProBERT";
  std::string name_b = "GREP";

  nlohmann::json to_json() const;
  std::string table() const;
};

/// Throws DataError when the two sets or gold cover different ids.
ConfusionComparison confusion_compare(const PredictionSet& a, const PredictionSet& b,
                                      const std::vector<GapSample>& gold);

/// Per gold class: counts of p[gold class] in `bins` equal bins on [0, 1]
/// (1.0 falls in the last bin).
struct ProbHistograms {
  int bins = 20;
  std::array<std::vector<std::size_t>, 3> counts;

  nlohmann::json to_json() const;
  std::string csv() const;
};

ProbHistograms prob_histograms(const PredictionSet& predictions, const std::vector<GapSample>& gold, int bins = 20);

/// Per-sample mean of the member probability vectors, renormalized. Weights,
/// when given, must be one nonnegative value per set. Throws DataError when
/// sets cover different ids.
PredictionSet ensemble_mean(const std::vector<PredictionSet>& sets, const std::vector<double>& weights = {});

/// Fills gold/gender of each prediction from the matching sample.
void attach_gold(PredictionSet& predictions, const std::vector<GapSample>& gold);

}  // namespace gpr
