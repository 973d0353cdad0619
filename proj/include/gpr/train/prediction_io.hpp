#pragma once

#include <filesystem>
#include <string>

#include "gpr/train/metrics.hpp"

namespace gpr {

/// Kaggle submission shape: header ID,A,B,NEITHER, probabilities printed
/// with round-trip precision.
void write_predictions(const std::filesystem::path& path, const PredictionSet& predictions);
/// Throws ParseError (path:line) on malformed rows, duplicate ids, negative
/// probabilities or rows not summing to 1 within 1e-6.
PredictionSet read_predictions(const std::filesystem::path& path);

/// One-hot predictions equal to the gold labels.
PredictionSet predictions_from_gold(const std::vector<GapSample>& gold);

/// <stem>.json (ScoreReport) and <stem>.txt (table).
void write_report(const std::filesystem::path& stem, const ScoreReport& report, const std::string& row_name);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace gpr
