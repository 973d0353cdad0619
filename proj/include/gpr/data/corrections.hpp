#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpr/data/gap_sample.hpp"

namespace gpr {

/// A human label fix. Ledgers are JSON lines, one record per line.
struct CorrectionRecord {
  std::string sample_id;
  Label old_label = Label::kNeither;
  Label new_label = Label::kNeither;
  std::string note;
  std::string timestamp;  // ISO 8601, UTC

  nlohmann::json to_json() const;
  /// Throws DataError when fields are missing or old == new.
  static CorrectionRecord from_json(const nlohmann::json& j);
};

class UnknownSampleError : public DataError {
 public:
  using DataError::DataError;
};

/// The correction's old label disagrees with the sample's current label.
class StaleCorrectionError : public DataError {
 public:
  using DataError::DataError;
};

/// Missing file reads as an empty ledger; a malformed line throws with its
/// line number.
std::vector<CorrectionRecord> load_corrections(const std::filesystem::path& path);
void save_corrections(const std::filesystem::path& path, const std::vector<CorrectionRecord>& records);
/// Appends one line and fsyncs before returning.
void append_correction(const std::filesystem::path& path, const CorrectionRecord& record);

std::string utc_timestamp();

/// Per-class movement, counted on the net change of each sample.
struct ClassDelta {
  std::size_t before = 0;
  std::size_t after = 0;
  std::size_t moved_out = 0;
  std::size_t moved_in = 0;
};

struct DeltaReport {
  std::string corpus;
  std::array<ClassDelta, 3> classes{};
  std::size_t total = 0;
  std::size_t changed_samples = 0;
  std::size_t records_applied = 0;

  /// "before | after(-out)(+in) ... | total" row layout with a two-line header.
  std::string table() const;
  nlohmann::json to_json() const;
};

struct CorrectionResult {
  std::vector<GapSample> samples;
  DeltaReport report;
};

/// Applies records in order. Each record's old label must match the
/// sample's label at that point in the sequence.
CorrectionResult apply_corrections(const std::vector<GapSample>& samples,
                                   const std::vector<CorrectionRecord>& corrections, const std::string& corpus = "");

/// Records that undo `corrections` when applied after them.
std::vector<CorrectionRecord> revert_corrections(const std::vector<CorrectionRecord>& corrections);

/// Label histogram in Label order.
std::array<std::size_t, 3> label_counts(const std::vector<GapSample>& samples);

}  // namespace gpr
