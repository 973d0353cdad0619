#include "gpr/data/tagging.hpp"

#include <algorithm>

namespace gpr {

namespace {

struct PendingInsertion {
  std::size_t offset;
  bool closing;
  int role;
};

}  // namespace

std::size_t TaggedText::to_tagged_start(std::size_t original) const {
  std::size_t shift = 0;
  for (const auto& ins : insertions) {
    if (ins.original_offset > original) break;
    shift += ins.text.size();
  }
  return original + shift;
}

std::size_t TaggedText::to_tagged_end(std::size_t original) const {
  std::size_t shift = 0;
  for (const auto& ins : insertions) {
    if (ins.original_offset >= original) break;
    shift += ins.text.size();
  }
  return original + shift;
}

Span TaggedText::to_tagged(const Span& original) const {
  const std::size_t start = to_tagged_start(original.offset);
  const std::size_t end = std::max(start, to_tagged_end(original.end()));
  return {start, end - start};
}

std::size_t TaggedText::to_original(std::size_t tagged) const {
  std::size_t shift = 0;
  for (const auto& ins : insertions) {
    const std::size_t at = ins.original_offset + shift;
    if (tagged < at) break;
    if (tagged < at + ins.text.size()) {
      throw DataError("tagged offset " + std::to_string(tagged) + " falls inside an inserted tag");
    }
    shift += ins.text.size();
  }
  return tagged - shift;
}

std::optional<Span> TaggedText::to_original(const Span& tagged) const {
  // Walk the tagged span in segments between insertions.
  std::optional<std::size_t> first;
  std::size_t last_end = 0;
  std::size_t shift = 0;
  std::size_t segment_start = 0;  // tagged offset where the current raw segment begins
  auto take = [&](std::size_t seg_begin, std::size_t seg_end) {
    const std::size_t lo = std::max(seg_begin, tagged.offset);
    const std::size_t hi = std::min(seg_end, tagged.end());
    if (lo >= hi) return;
    if (!first) first = lo - shift;
    last_end = hi - shift;
  };
  for (const auto& ins : insertions) {
    const std::size_t at = ins.original_offset + shift;
    take(segment_start, at);
    shift += ins.text.size();
    segment_start = at + ins.text.size();
  }
  take(segment_start, text.size());
  if (!first) return std::nullopt;
  return Span{*first, last_end - *first};
}

TaggedText insert_mention_tags(const GapSample& sample) {
  const auto ms = sample.mentions();
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (ms[i]->span().overlaps(ms[j]->span())) {
        throw TaggingError(sample.id + ": labeled spans " + std::string(kTagTokens[i]) + " and " +
                           std::string(kTagTokens[j]) + " overlap");
      }
    }
  }
  std::vector<PendingInsertion> pending;
  for (int r = 0; r < 3; ++r) {
    pending.push_back({ms[r]->offset, false, r});
    pending.push_back({ms[r]->span().end(), true, r});
  }
  std::sort(pending.begin(), pending.end(), [](const PendingInsertion& x, const PendingInsertion& y) {
    if (x.offset != y.offset) return x.offset < y.offset;
    return x.closing && !y.closing;
  });

  TaggedText out;
  out.text.reserve(sample.text.size() + 24);
  std::size_t cursor = 0;
  for (const auto& p : pending) {
    out.text.append(sample.text, cursor, p.offset - cursor);
    cursor = p.offset;
    const std::string tag(kTagTokens[static_cast<std::size_t>(p.role)]);
    if (p.closing) {
      out.close_tags[static_cast<std::size_t>(p.role)] = out.text.size() + 1;
      out.mentions[static_cast<std::size_t>(p.role)].length =
          out.text.size() - out.mentions[static_cast<std::size_t>(p.role)].offset;
      out.insertions.push_back({p.offset, " " + tag});
      out.text += " " + tag;
    } else {
      out.open_tags[static_cast<std::size_t>(p.role)] = out.text.size();
      out.insertions.push_back({p.offset, tag + " "});
      out.text += tag + " ";
      out.mentions[static_cast<std::size_t>(p.role)].offset = out.text.size();
    }
  }
  out.text.append(sample.text, cursor, std::string::npos);
  return out;
}

std::string strip_mention_tags(const TaggedText& tagged) {
  std::string out;
  out.reserve(tagged.text.size());
  std::size_t cursor = 0;
  std::size_t shift = 0;
  for (const auto& ins : tagged.insertions) {
    const std::size_t at = ins.original_offset + shift;
    out.append(tagged.text, cursor, at - cursor);
    cursor = at + ins.text.size();
    shift += ins.text.size();
  }
  out.append(tagged.text, cursor, std::string::npos);
  return out;
}

}  // namespace gpr
