#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gpr/data/gap_sample.hpp"
#include "gpr/data/synthetic.hpp"
#include "gpr/tensor/rng.hpp"

namespace gpr {

/// A document with one provider's coreference clusters (byte spans).
struct DocumentClusters {
  std::string id;
  std::string text;
  std::string url;
  std::vector<std::vector<Span>> clusters;
};

/// Capitalized, non-pronoun surface.
bool person_like(std::string_view surface);

/// Picks a gendered pronoun and two person-like candidates from three
/// pairwise-disjoint clusters and emits a NEITHER row. The snippet is the
/// sentences covering the three spans plus one sentence on each side.
/// Returns nullopt when the document has no valid triple.
std::optional<GapSample> generate_neither(const DocumentClusters& doc, Rng& rng, const std::string& id);

struct NeitherSetConfig {
  std::size_t masculine = 129;
  std::size_t feminine = 124;
  std::string id_prefix = "neither";
  std::uint64_t seed = 42;
};

/// Draws rows from shuffled documents until both gender quotas are met (or
/// the documents run out, which is logged).
std::vector<GapSample> generate_neither_set(const std::vector<DocumentClusters>& docs, const NeitherSetConfig& config);

DocumentClusters document_from_synthetic(const GapSample& sample, const SyntheticInfo& info);

}  // namespace gpr
