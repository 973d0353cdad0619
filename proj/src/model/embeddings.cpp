#include "gpr/model/embeddings.hpp"

#include "gpr/tensor/errors.hpp"

namespace gpr {

const Matrix& PrecomputedEmbeddings::lookup(const std::string& id) const {
  auto it = values_.find(id);
  if (it == values_.end()) throw LookupError("no precomputed embeddings for sample '" + id + "'");
  return it->second;
}

const std::vector<std::string>& PrecomputedEmbeddings::tokens(const std::string& id) const {
  static const std::vector<std::string> kNone;
  auto it = tokens_.find(id);
  return it == tokens_.end() ? kNone : it->second;
}

void PrecomputedEmbeddings::put(const std::string& id, Matrix values, std::vector<std::string> tokens) {
  if (hidden_ == 0) hidden_ = values.cols();
  if (values.cols() != hidden_) {
    throw DimensionError("embeddings for '" + id + "' have " + std::to_string(values.cols()) +
                         " columns, archive holds " + std::to_string(hidden_));
  }
  if (!tokens.empty() && static_cast<Index>(tokens.size()) != values.rows()) {
    throw DimensionError("embeddings for '" + id + "': " + std::to_string(values.rows()) + " rows but " +
                         std::to_string(tokens.size()) + " token strings");
  }
  values_[id] = std::move(values);
  if (tokens.empty()) {
    tokens_.erase(id);
  } else {
    tokens_[id] = std::move(tokens);
  }
}

const Matrix& PrecomputedEmbeddings::for_example(TokenizedExample& example, const Vocab& vocab) const {
  const Matrix& values = lookup(example.id);
  if (values.rows() == example.length()) return values;
  const auto& toks = tokens(example.id);
  if (toks.empty()) {
    throw AlignmentError(example.id + ": " + std::to_string(values.rows()) + " embedding rows for " +
                         std::to_string(example.length()) + " tokens and no stored tokenization");
  }
  example = adopt_tokenization(example, toks, vocab);
  return values;
}

void PrecomputedEmbeddings::save(const std::filesystem::path& path) const {
  Archive archive;
  archive.metadata = {{"format", "gpr-embeddings"}, {"hidden", hidden_}, {"tokens", tokens_}};
  archive.entries = values_;
  archive.save(path);
}

PrecomputedEmbeddings PrecomputedEmbeddings::load(const std::filesystem::path& path) {
  Archive archive = Archive::load(path);
  if (archive.metadata.value("format", "") != "gpr-embeddings") {
    throw DataError(path.string() + ": not an embeddings archive");
  }
  PrecomputedEmbeddings out(archive.metadata.at("hidden").get<Index>());
  const auto tokens = archive.metadata.value("tokens", nlohmann::json::object());
  for (auto& [id, values] : archive.entries) {
    std::vector<std::string> t;
    if (tokens.contains(id)) t = tokens.at(id).get<std::vector<std::string>>();
    out.put(id, std::move(values), std::move(t));
  }
  return out;
}

TokenizedExample adopt_tokenization(const TokenizedExample& example, const std::vector<std::string>& tokens,
                                    const Vocab& vocab) {
  std::string joined;
  for (const auto& t : tokens) joined += t;
  if (joined != example.tagged.text) {
    throw AlignmentError(example.id + ": stored tokens do not reproduce the tagged text");
  }
  TokenizedExample out;
  out.id = example.id;
  out.tagged = example.tagged;
  out.label = example.label;
  out.gender = example.gender;
  std::array<std::array<bool, 2>, 3> found{};
  std::size_t offset = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    out.spans.push_back(Span{offset, t.size()});
    int id = vocab.find(t).value_or(kPadId);
    for (std::size_t r = 0; r < 3; ++r) {
      const std::string_view tag = kTagTokens[r];
      if (t.size() < tag.size() || t.compare(t.size() - tag.size(), tag.size(), tag) != 0) continue;
      const std::size_t literal = offset + t.size() - tag.size();
      for (int side = 0; side < 2; ++side) {
        const std::size_t at = side == 0 ? out.tagged.open_tags[r] : out.tagged.close_tags[r];
        if (literal == at) {
          out.tag_positions[r][static_cast<std::size_t>(side)] = static_cast<Index>(i);
          found[r][static_cast<std::size_t>(side)] = true;
          id = tag_id(static_cast<Role>(r));
        }
      }
    }
    out.ids.push_back(id);
    offset += t.size();
  }
  for (std::size_t r = 0; r < 3; ++r) {
    if (!found[r][0] || !found[r][1]) {
      throw AlignmentError(example.id + ": stored tokens split the " + std::string(kTagTokens[r]) + " tag");
    }
    out.mentions[r] = {out.tag_positions[r][0] + 1, out.tag_positions[r][1]};
    if (out.mentions[r].empty()) {
      throw AlignmentError(example.id + ": mention " + std::string(kTagTokens[r]) + " has no stored tokens");
    }
  }
  return out;
}

}  // namespace gpr
