#include "gpr/data/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>

#include "gpr/data/utf8.hpp"
#include "gpr/tensor/log.hpp"

namespace gpr {

namespace {

constexpr std::size_t kMaxPieceCodePoints = 16;
constexpr std::size_t kMaxPieceBytes = 32;

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::optional<Role> tag_at(std::string_view text, std::size_t pos) {
  for (int r = 0; r < 3; ++r) {
    if (text.compare(pos, kTagTokens[r].size(), kTagTokens[r]) == 0) return static_cast<Role>(r);
  }
  return std::nullopt;
}

// Tag chunk: optional whitespace followed by exactly one tag literal.
std::optional<Role> tag_chunk(std::string_view chunk) {
  std::size_t i = 0;
  while (i < chunk.size() && is_space(static_cast<unsigned char>(chunk[i]))) ++i;
  if (chunk.size() - i != 3) return std::nullopt;
  return tag_at(chunk, i);
}

std::vector<std::size_t> code_point_starts(std::string_view s) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < s.size();) {
    starts.push_back(i);
    i += std::max<std::size_t>(1, utf8_sequence_length(static_cast<unsigned char>(s[i])));
  }
  starts.push_back(s.size());
  return starts;
}

}  // namespace

Vocab::Vocab() {
  pieces_.reserve(kFirstPieceId);
  pieces_.emplace_back("");
  for (auto t : kTagTokens) pieces_.emplace_back(t);
  for (int b = 0; b < 256; ++b) pieces_.emplace_back(1, static_cast<char>(b));
}

std::optional<int> Vocab::find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::piece(int id) const {
  if (id < 0 || id >= size()) throw LookupError("token id " + std::to_string(id) + " outside vocabulary");
  return pieces_[static_cast<std::size_t>(id)];
}

std::string Vocab::display(int id) const {
  if (id == kPadId) return "<pad>";
  if (is_byte(id)) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "<0x%02X>", id - kByteIdBase);
    return buf;
  }
  return piece(id);
}

int Vocab::add(std::string piece) {
  if (piece.empty()) throw ConfigError("vocabulary pieces must be nonempty");
  if (auto it = index_.find(piece); it != index_.end()) return it->second;
  const int id = size();
  max_piece_bytes_ = std::max(max_piece_bytes_, piece.size());
  index_.emplace(piece, id);
  pieces_.push_back(std::move(piece));
  return id;
}

nlohmann::json Vocab::to_json() const {
  nlohmann::json learned = nlohmann::json::array();
  for (int id = kFirstPieceId; id < size(); ++id) learned.push_back(pieces_[static_cast<std::size_t>(id)]);
  return {{"format", "gpr-vocab"}, {"version", 1}, {"first_piece_id", kFirstPieceId}, {"pieces", learned}};
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "gpr-vocab" || j.value("first_piece_id", -1) != kFirstPieceId) {
    throw DataError("not a vocabulary file with the current reserved layout");
  }
  Vocab v;
  for (const auto& p : j.at("pieces")) v.add(p.get<std::string>());
  return v;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump(1) << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return from_json(nlohmann::json::parse(in));
}

std::vector<Span> pre_split(std::string_view text) {
  std::vector<Span> chunks;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const std::size_t start = i;
    while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i == n) {
      chunks.push_back({start, n - start});
      break;
    }
    if (tag_at(text, i)) {
      i += 3;
    } else if (is_word(static_cast<unsigned char>(text[i]))) {
      while (i < n && is_word(static_cast<unsigned char>(text[i]))) ++i;
    } else {
      ++i;
    }
    chunks.push_back({start, i - start});
  }
  return chunks;
}

Vocab build_vocab(const std::vector<std::string>& corpus, int size) {
  if (size < kFirstPieceId) {
    throw ConfigError("vocabulary size " + std::to_string(size) + " is below the " + std::to_string(kFirstPieceId) +
                      " reserved ids");
  }
  std::map<std::string, std::size_t> chunk_counts;
  for (const auto& text : corpus) {
    for (const Span& c : pre_split(text)) {
      std::string_view chunk(text.data() + c.offset, c.length);
      if (tag_chunk(chunk)) {
        std::size_t ws = 0;
        while (ws < chunk.size() && is_space(static_cast<unsigned char>(chunk[ws]))) ++ws;
        if (ws == 0) continue;
        chunk = chunk.substr(0, ws);
      }
      ++chunk_counts[std::string(chunk)];
    }
  }
  if (chunk_counts.empty()) throw DataError("cannot build a vocabulary from an empty corpus");

  std::map<std::string, std::size_t> singles;
  std::map<std::string, std::size_t> multis;
  for (const auto& [chunk, count] : chunk_counts) {
    const auto starts = code_point_starts(chunk);
    const std::size_t ncp = starts.size() - 1;
    for (std::size_t a = 0; a < ncp; ++a) {
      singles[chunk.substr(starts[a], starts[a + 1] - starts[a])] += count;
      for (std::size_t b = a + 2; b <= std::min(ncp, a + kMaxPieceCodePoints); ++b) {
        const std::size_t bytes = starts[b] - starts[a];
        if (bytes > kMaxPieceBytes) break;
        multis[chunk.substr(starts[a], bytes)] += count;
      }
    }
  }

  struct Candidate {
    const std::string* piece;
    std::size_t score;
  };
  auto ranked = [](const std::map<std::string, std::size_t>& counts, bool weight_by_length) {
    std::vector<Candidate> out;
    out.reserve(counts.size());
    for (const auto& [p, c] : counts) out.push_back({&p, weight_by_length ? c * (p.size() - 1) : c});
    std::sort(out.begin(), out.end(), [](const Candidate& x, const Candidate& y) {
      if (x.score != y.score) return x.score > y.score;
      if (x.piece->size() != y.piece->size()) return x.piece->size() > y.piece->size();
      return *x.piece < *y.piece;
    });
    return out;
  };

  Vocab vocab;
  for (const auto& group : {ranked(singles, false), ranked(multis, true)}) {
    for (const auto& c : group) {
      if (vocab.size() >= size) return vocab;
      vocab.add(*c.piece);
    }
  }
  return vocab;
}

Tokenization tokenize(std::string_view text, const Vocab& vocab) {
  Tokenization out;
  for (const Span& c : pre_split(text)) {
    const std::string_view chunk = text.substr(c.offset, c.length);
    if (auto role = tag_chunk(chunk)) {
      out.ids.push_back(tag_id(*role));
      out.spans.push_back(c);
      continue;
    }
    std::size_t pos = 0;
    while (pos < chunk.size()) {
      std::size_t len = std::min(vocab.max_piece_bytes(), chunk.size() - pos);
      std::optional<int> id;
      for (; len > 0; --len) {
        if ((id = vocab.find(chunk.substr(pos, len)))) break;
      }
      if (!id) {
        len = 1;
        id = kByteIdBase + static_cast<unsigned char>(chunk[pos]);
        ++out.fallback_tokens;
      }
      out.ids.push_back(*id);
      out.spans.push_back({c.offset + pos, len});
      pos += len;
    }
  }
  return out;
}

std::string TokenizedExample::surface(const TokenRange& range) const {
  std::string out;
  for (Index i = range.begin; i < range.end; ++i) {
    const Span& s = spans[static_cast<std::size_t>(i)];
    out.append(tagged.text, s.offset, s.length);
  }
  return out;
}

Span TokenizedExample::raw_span(const TokenRange& range) const {
  if (range.empty()) throw DataError(id + ": empty token range");
  const Span first = spans[static_cast<std::size_t>(range.begin)];
  const Span last = spans[static_cast<std::size_t>(range.end - 1)];
  auto raw = tagged.to_original(Span{first.offset, last.end() - first.offset});
  if (!raw) throw DataError(id + ": token range covers only tag text");
  return *raw;
}

TokenizedExample tokenize_sample(const GapSample& sample, const Vocab& vocab) {
  TokenizedExample ex;
  ex.id = sample.id;
  ex.tagged = insert_mention_tags(sample);
  Tokenization tok = tokenize(ex.tagged.text, vocab);
  ex.ids = std::move(tok.ids);
  ex.spans = std::move(tok.spans);
  ex.label = sample.label();
  ex.gender = sample.gender;

  std::array<std::array<bool, 2>, 3> found{};
  for (std::size_t i = 0; i < ex.ids.size(); ++i) {
    if (!vocab.is_tag(ex.ids[i])) continue;
    const std::size_t literal = ex.spans[i].end() - 3;
    const auto r = static_cast<std::size_t>(ex.ids[i] - kTagIdBase);
    if (literal == ex.tagged.open_tags[r]) {
      ex.tag_positions[r][0] = static_cast<Index>(i);
      found[r][0] = true;
    } else if (literal == ex.tagged.close_tags[r]) {
      ex.tag_positions[r][1] = static_cast<Index>(i);
      found[r][1] = true;
    }
  }
  for (std::size_t r = 0; r < 3; ++r) {
    if (!found[r][0] || !found[r][1]) {
      throw DataError(sample.id + ": tag " + std::string(kTagTokens[r]) + " not tokenized as a tag pair");
    }
    ex.mentions[r] = {ex.tag_positions[r][0] + 1, ex.tag_positions[r][1]};
    if (ex.mentions[r].empty()) {
      throw DataError(sample.id + ": mention " + std::string(kTagTokens[r]) + " has no tokens");
    }
  }
  return ex;
}

TokenizedExample fit_to_max_length(const TokenizedExample& example, Index max_length) {
  if (example.length() <= max_length) return example;
  Index lo = example.length();
  Index hi = 0;
  for (const auto& pair : example.tag_positions) {
    lo = std::min(lo, pair[0]);
    hi = std::max(hi, pair[1] + 1);
  }
  if (hi - lo > max_length) {
    throw TruncationError(example.id + ": labeled mentions span " + std::to_string(hi - lo) +
                          " tokens, more than the maximum of " + std::to_string(max_length));
  }
  const Index slack = max_length - (hi - lo);
  const Index start = std::clamp(lo - slack / 2, Index{0}, example.length() - max_length);
  log_warning(example.id + ": truncated from " + std::to_string(example.length()) + " to " +
              std::to_string(max_length) + " tokens");

  TokenizedExample out = example;
  out.ids.assign(example.ids.begin() + start, example.ids.begin() + start + max_length);
  out.spans.assign(example.spans.begin() + start, example.spans.begin() + start + max_length);
  for (std::size_t r = 0; r < 3; ++r) {
    out.mentions[r] = {example.mentions[r].begin - start, example.mentions[r].end - start};
    out.tag_positions[r] = {example.tag_positions[r][0] - start, example.tag_positions[r][1] - start};
  }
  out.window_offset = example.window_offset + start;
  return out;
}

}  // namespace gpr
