#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gpr/evidence/alignment.hpp"
#include "gpr/model/classifier.hpp"
#include "gpr/model/embeddings.hpp"

namespace gpr {

/// Tokenized samples with their aligned evidence, ready for a model.
struct Dataset {
  std::vector<GapSample> samples;
  std::vector<TokenizedExample> examples;
  std::vector<AlignedEvidence> evidence;
  /// Frozen embeddings per example (null entries when unused).
  std::vector<const Matrix*> embeddings;
  /// Keeps precomputed embeddings alive for the pointers above.
  std::shared_ptr<const PrecomputedEmbeddings> embedding_store;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  ModelInput input(std::size_t i) const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct PrepareOptions {
  Index max_length = 256;
  AlignOptions align;
};

/// Tokenizes every sample, cuts it to `max_length` and aligns its evidence
/// (`evidence` may be null for N = 0). Precomputed embeddings, when given, are
/// looked up per sample and may replace the tokenization.
Dataset prepare_dataset(std::vector<GapSample> samples, const EvidenceSet* evidence, const Vocab& vocab,
                        const PrepareOptions& options = {},
                        std::shared_ptr<const PrecomputedEmbeddings> embeddings = nullptr);

/// Vocabulary from the tagged texts of `samples`.
Vocab vocab_for(const std::vector<GapSample>& samples, int size);

}  // namespace gpr
