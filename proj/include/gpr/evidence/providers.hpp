#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gpr/data/synthetic.hpp"
#include "gpr/evidence/cluster.hpp"

namespace gpr {

/// Syntactic stand-in: the candidate nearest before the pronoun, else the
/// nearest after it; equal distance goes to the lower offset.
EvidenceCluster heuristic_parallelism(const GapSample& sample, const std::string& provider = "parallelism");

/// True coreferent mentions of the pronoun (the pronoun included). Throws
/// DataError without construction info.
EvidenceCluster oracle_provider(const GapSample& sample, const SyntheticInfo* info,
                                const std::string& provider = "oracle");

/// Class implied by a cluster: which candidate spans it contains. nullopt
/// when it holds both.
std::optional<Label> implied_label(const EvidenceCluster& cluster, const GapSample& sample);

/// Deterministic per-sample coin: stable_uniform(sample id, seed) < rate.
bool corruption_hit(const std::string& sample_id, double rate, std::uint64_t seed);

/// With probability `rate` per sample, replaces `base` by a cluster holding
/// only the wrong candidate: A for B, B for A, and A or B (by a second
/// coin) for NEITHER. The misleading cluster omits the pronoun.
EvidenceCluster corrupt_cluster(const EvidenceCluster& base, const GapSample& sample, double rate,
                                std::uint64_t seed, const std::string& provider);

/// Named provider recipe: "parallelism", "oracle", "adversarial" (oracle
/// corrupted at rate 1) or "noisy:<rate>" (oracle corrupted at that rate).
struct ProviderSpec {
  std::string name;
  std::string kind;
  double rate = 0.0;

  static ProviderSpec parse(const std::string& text);
};

/// Runs each provider over the corpus. `info` may be empty when no provider
/// needs construction records.
EvidenceSet run_providers(const std::vector<GapSample>& samples, const std::vector<SyntheticInfo>& info,
                          const std::vector<ProviderSpec>& providers, std::uint64_t seed);

}  // namespace gpr
