#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "gpr/data/corrections.hpp"
#include "gpr/evidence/cluster.hpp"
#include "gpr/model/grep.hpp"
#include "gpr/train/metrics.hpp"

namespace httplib {
class Server;
}

namespace gpr {

/// Everything the review service shows; loaded once, never mutated.
struct ReviewData {
  std::vector<GapSample> samples;  // labels before any ledger correction
  EvidenceSet evidence;
  /// Exported attention traces by sample id, served as stored.
  std::unordered_map<std::string, nlohmann::json> traces;
  /// model name -> predictions (e.g. "ProBERT", "GREP").
  std::map<std::string, PredictionSet> predictions;
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

/// Label-review backend. State is the loaded data plus the fold of the
/// corrections ledger; POSTs are serialized and fsync'ed to the ledger before
/// they are acknowledged.
class ReviewService {
 public:
  /// Replays the existing ledger; throws when it does not apply cleanly.
  ReviewService(ReviewData data, std::filesystem::path ledger);
  ~ReviewService();

  ServiceResponse list_samples(std::size_t page, std::size_t per_page) const;
  ServiceResponse get_sample(const std::string& id) const;
  ServiceResponse post_label(const std::string& id, const std::string& body);
  ServiceResponse metrics() const;
  ServiceResponse health() const;

  /// Routes: GET /samples, GET /samples/{id}, POST /samples/{id}/label,
  /// GET /metrics, GET /health.
  void bind(httplib::Server& server);

  /// Blocks serving on host:port until stop(). Returns false if binding failed.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

  const std::filesystem::path& ledger() const { return ledger_; }

 private:
  Label current_label(std::size_t index) const;
  nlohmann::json sample_summary(std::size_t index) const;

  ReviewData data_;
  std::filesystem::path ledger_;
  std::unordered_map<std::string, std::size_t> index_;

  mutable std::shared_mutex state_mutex_;
  std::vector<CorrectionRecord> records_;
  std::unordered_map<std::string, std::vector<std::size_t>> records_by_sample_;
  std::unordered_map<std::string, Label> current_;

  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<std::thread> thread_;
};

}  // namespace gpr
