#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "gpr/data/gap_sample.hpp"
#include "gpr/data/tagging.hpp"
#include "gpr/tensor/types.hpp"

namespace gpr {

/// Reserved ids: padding, the three mention tags, then one id per byte value
/// (the fallback range). Learned pieces start at kFirstPieceId.
inline constexpr int kPadId = 0;
inline constexpr int kTagIdBase = 1;  // <P>, <A>, <B> in Role order
inline constexpr int kByteIdBase = 4;
inline constexpr int kFirstPieceId = kByteIdBase + 256;

inline constexpr int tag_id(Role role) { return kTagIdBase + static_cast<int>(role); }

class Vocab {
 public:
  /// Reserved ids only.
  Vocab();

  int size() const { return static_cast<int>(pieces_.size()); }
  /// Id of a learned piece (never a reserved id).
  std::optional<int> find(std::string_view piece) const;
  /// Surface bytes of `id` (tags return their literal).
  const std::string& piece(int id) const;
  /// Printable form; byte ids render as <0xNN>.
  std::string display(int id) const;
  bool is_tag(int id) const { return id >= kTagIdBase && id < kByteIdBase; }
  bool is_byte(int id) const { return id >= kByteIdBase && id < kFirstPieceId; }
  std::size_t max_piece_bytes() const { return max_piece_bytes_; }

  /// Appends a learned piece; returns its id (existing id if already present).
  int add(std::string piece);

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
  std::size_t max_piece_bytes_ = 0;
};

/// Frequency-ranked subword vocabulary of `size` ids total. Every code point
/// seen in the corpus becomes a piece first, then multi-character substrings
/// of pre-split chunks ranked by count x (bytes - 1).
Vocab build_vocab(const std::vector<std::string>& corpus, int size);

/// Whitespace/punctuation pre-split. Each chunk is a run of whitespace plus
/// the following tag literal, word, or punctuation character; trailing
/// whitespace forms its own chunk. Concatenation reproduces `text`.
std::vector<Span> pre_split(std::string_view text);

struct Tokenization {
  std::vector<int> ids;
  std::vector<Span> spans;  // byte spans into the input
  std::size_t fallback_tokens = 0;
};

/// Greedy longest-match within each chunk, byte fallback where nothing matches.
Tokenization tokenize(std::string_view text, const Vocab& vocab);

/// Half-open token index range.
struct TokenRange {
  Index begin = 0;
  Index end = 0;

  Index size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

/// Labeled mention would fall outside the token window.
class TruncationError : public DataError {
 public:
  using DataError::DataError;
};

struct TokenizedExample {
  std::string id;
  TaggedText tagged;
  std::vector<int> ids;
  std::vector<Span> spans;  // byte spans into tagged.text
  /// Tokens strictly between each mention's tag pair, Role order.
  std::array<TokenRange, 3> mentions;
  /// Token index of the opening and closing tag, Role order.
  std::array<std::array<Index, 2>, 3> tag_positions{};
  Label label = Label::kNeither;
  Gender gender = Gender::kMasculine;
  /// Tokens removed from the front by fit_to_max_length.
  Index window_offset = 0;

  Index length() const { return static_cast<Index>(ids.size()); }
  /// Concatenated surface of tokens [range.begin, range.end).
  std::string surface(const TokenRange& range) const;
  /// Raw (untagged) text span covered by a mention range.
  Span raw_span(const TokenRange& range) const;
};

/// Tag, tokenize and locate the mention ranges. Throws TaggingError on
/// overlapping spans.
TokenizedExample tokenize_sample(const GapSample& sample, const Vocab& vocab);

/// Cuts the example to at most `max_length` tokens with a window centered on
/// the tagged mentions. Throws TruncationError when the tags alone do not fit.
TokenizedExample fit_to_max_length(const TokenizedExample& example, Index max_length);

}  // namespace gpr
