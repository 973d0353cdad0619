#pragma once

#include <string>
#include <vector>

#include "gpr/data/tokenizer.hpp"
#include "gpr/evidence/cluster.hpp"

namespace gpr {

/// One provider's cluster mapped onto token positions.
struct AlignedCluster {
  std::string provider;
  std::vector<TokenRange> mentions;
  std::vector<Span> spans;  // raw spans of the kept mentions
  std::size_t dropped = 0;
};

struct AlignedEvidence {
  std::vector<AlignedCluster> clusters;  // provider order
  std::size_t dropped = 0;
};

struct AlignOptions {
  /// Remove the labeled pronoun's own span before pooling.
  bool exclude_pronoun = false;
};

/// Minimal covering token range per mention. Mentions not fully inside the
/// tokenized window are dropped and counted.
AlignedCluster align_cluster_tokens(const EvidenceCluster& cluster, const TokenizedExample& example,
                                    const AlignOptions& options = {});

AlignedEvidence align_evidence(const std::vector<EvidenceCluster>& clusters, const TokenizedExample& example,
                               const AlignOptions& options = {});

}  // namespace gpr
