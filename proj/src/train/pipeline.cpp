#include "gpr/train/pipeline.hpp"

#include "gpr/tensor/errors.hpp"

namespace gpr {

ModelInput Dataset::input(std::size_t i) const {
  return {&examples.at(i), evidence.empty() ? nullptr : &evidence[i], embeddings.empty() ? nullptr : embeddings[i]};
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.embedding_store = embedding_store;
  for (std::size_t i : indices) {
    out.samples.push_back(samples.at(i));
    out.examples.push_back(examples.at(i));
    if (!evidence.empty()) out.evidence.push_back(evidence[i]);
    if (!embeddings.empty()) out.embeddings.push_back(embeddings[i]);
  }
  return out;
}

Dataset prepare_dataset(std::vector<GapSample> samples, const EvidenceSet* evidence, const Vocab& vocab,
                        const PrepareOptions& options, std::shared_ptr<const PrecomputedEmbeddings> embeddings) {
  Dataset out;
  out.embedding_store = embeddings;
  out.samples = std::move(samples);
  out.examples.reserve(out.samples.size());
  for (const GapSample& s : out.samples) {
    TokenizedExample ex = tokenize_sample(s, vocab);
    if (embeddings) {
      out.embeddings.push_back(&embeddings->for_example(ex, vocab));
    } else {
      ex = fit_to_max_length(ex, options.max_length);
    }
    out.evidence.push_back(evidence ? align_evidence(evidence->for_sample(s.id), ex, options.align)
                                    : AlignedEvidence{});
    out.examples.push_back(std::move(ex));
  }
  return out;
}

Vocab vocab_for(const std::vector<GapSample>& samples, int size) {
  std::vector<std::string> texts;
  texts.reserve(samples.size());
  for (const auto& s : samples) texts.push_back(insert_mention_tags(s).text);
  return build_vocab(texts, size);
}

}  // namespace gpr
