#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "gpr/data/gap_sample.hpp"

namespace gpr {

/// One provider's mentions predicted coreferent with the labeled pronoun.
/// Spans are bytes into the sample text; the file format uses code points.
struct EvidenceCluster {
  std::string provider;
  std::string sample_id;
  std::vector<Span> mentions;

  /// Sorts by offset and removes duplicates.
  void canonicalize();
  bool contains(const Span& span) const;
};

/// Clusters grouped by sample, each group in provider order.
class EvidenceSet {
 public:
  EvidenceSet() = default;
  explicit EvidenceSet(std::vector<std::string> providers) : providers_(std::move(providers)) {}

  const std::vector<std::string>& providers() const { return providers_; }
  /// Empty when the sample has no evidence (N = 0).
  const std::vector<EvidenceCluster>& for_sample(const std::string& sample_id) const;
  /// Inserts or replaces the sample's cluster for `cluster.provider`, keeping
  /// provider order. Unknown providers are appended to the order.
  void put(EvidenceCluster cluster);
  std::size_t sample_count() const { return by_sample_.size(); }
  std::size_t cluster_count() const;

  /// Load diagnostics.
  std::size_t dropped_mentions = 0;
  std::size_t duplicate_lines = 0;
  std::size_t unknown_samples = 0;

 private:
  std::vector<std::string> providers_;
  std::unordered_map<std::string, std::vector<EvidenceCluster>> by_sample_;
};

/// Reads evidence JSON lines ({sample_id, provider, mentions:[{offset,length}]}).
/// `providers` fixes inclusion and order; empty keeps every provider in
/// sorted name order. Out-of-bounds spans are dropped with a warning, a
/// repeated (sample, provider) line replaces the earlier one.
EvidenceSet load_evidence(const std::filesystem::path& path, const std::vector<GapSample>& samples,
                          const std::vector<std::string>& providers = {});

/// Canonical form: samples in corpus order, providers in set order, mentions
/// sorted.
void save_evidence(const std::filesystem::path& path, const EvidenceSet& evidence,
                   const std::vector<GapSample>& samples);

/// "a,b,c" -> {"a","b","c"}; empty entries rejected.
std::vector<std::string> parse_provider_list(const std::string& csv);

}  // namespace gpr
