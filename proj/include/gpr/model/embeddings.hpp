#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gpr/data/tokenizer.hpp"
#include "gpr/tensor/archive.hpp"

namespace gpr {

/// Precomputed token embeddings do not line up with an example's tokens.
class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

/// Frozen per-token embeddings keyed by sample id, stored as an Archive whose
/// metadata holds {"format":"gpr-embeddings","hidden":H,"tokens":{id:[...]}}.
/// Token strings are optional; when present they let an example adopt the
/// archive's tokenization.
class PrecomputedEmbeddings {
 public:
  PrecomputedEmbeddings() = default;
  explicit PrecomputedEmbeddings(Index hidden) : hidden_(hidden) {}

  Index hidden() const { return hidden_; }
  std::size_t size() const { return values_.size(); }
  bool contains(const std::string& id) const { return values_.count(id) > 0; }
  /// Throws LookupError naming the id.
  const Matrix& lookup(const std::string& id) const;
  /// Empty when the archive carries no tokenization for `id`.
  const std::vector<std::string>& tokens(const std::string& id) const;

  void put(const std::string& id, Matrix values, std::vector<std::string> tokens = {});

  /// Embeddings for `example`, adopting the stored tokenization when the row
  /// count differs. Throws AlignmentError when neither fits.
  const Matrix& for_example(TokenizedExample& example, const Vocab& vocab) const;

  void save(const std::filesystem::path& path) const;
  static PrecomputedEmbeddings load(const std::filesystem::path& path);

 private:
  Index hidden_ = 0;
  std::map<std::string, Matrix> values_;
  std::map<std::string, std::vector<std::string>> tokens_;
};

/// Re-tokenizes `example` with explicit token surfaces, which must concatenate
/// to the tagged text. Mention ranges are recovered from the tag tokens.
TokenizedExample adopt_tokenization(const TokenizedExample& example, const std::vector<std::string>& tokens,
                                    const Vocab& vocab);

}  // namespace gpr
