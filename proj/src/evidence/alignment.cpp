#include "gpr/evidence/alignment.hpp"

#include <algorithm>

namespace gpr {

AlignedCluster align_cluster_tokens(const EvidenceCluster& cluster, const TokenizedExample& example,
                                    const AlignOptions& options) {
  AlignedCluster out;
  out.provider = cluster.provider;
  const auto pronoun = example.tagged.to_original(example.tagged.mentions[0]);
  const auto& spans = example.spans;
  for (const Span& m : cluster.mentions) {
    if (options.exclude_pronoun && pronoun && m == *pronoun) continue;
    if (m.length == 0 || spans.empty()) {
      ++out.dropped;
      continue;
    }
    const Span t = example.tagged.to_tagged(m);
    if (t.offset < spans.front().offset || t.end() > spans.back().end()) {
      ++out.dropped;
      continue;
    }
    // First token ending after the start, last token starting before the end.
    auto first = std::partition_point(spans.begin(), spans.end(), [&](const Span& s) { return s.end() <= t.offset; });
    auto last = std::partition_point(first, spans.end(), [&](const Span& s) { return s.offset < t.end(); });
    if (first == last) {
      ++out.dropped;
      continue;
    }
    out.mentions.push_back({first - spans.begin(), last - spans.begin()});
    out.spans.push_back(m);
  }
  return out;
}

AlignedEvidence align_evidence(const std::vector<EvidenceCluster>& clusters, const TokenizedExample& example,
                               const AlignOptions& options) {
  AlignedEvidence out;
  for (const auto& c : clusters) {
    out.clusters.push_back(align_cluster_tokens(c, example, options));
    out.dropped += out.clusters.back().dropped;
  }
  return out;
}

}  // namespace gpr
