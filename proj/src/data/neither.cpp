#include "gpr/data/neither.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "gpr/tensor/log.hpp"

namespace gpr {

namespace {

bool clusters_disjoint(const std::vector<Span>& x, const std::vector<Span>& y) {
  for (const auto& a : x)
    for (const auto& b : y)
      if (a.overlaps(b)) return false;
  return true;
}

bool is_sentence_end(const std::string& text, std::size_t i) {
  const char c = text[i];
  return (c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || text[i + 1] == ' ' || text[i + 1] == '\n');
}

// Sentence start offsets, each sentence running to the next start.
std::vector<std::size_t> sentence_starts(const std::string& text) {
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_sentence_end(text, i)) continue;
    std::size_t j = i + 1;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j < text.size()) starts.push_back(j);
  }
  return starts;
}

std::size_t sentence_of(const std::vector<std::size_t>& starts, std::size_t offset) {
  return static_cast<std::size_t>(std::upper_bound(starts.begin(), starts.end(), offset) - starts.begin()) - 1;
}

}  // namespace

bool person_like(std::string_view surface) {
  static constexpr std::array<std::string_view, 14> kPronouns = {
      "he", "him", "his", "she", "her", "hers", "it", "its", "they", "them", "their", "i", "we", "you"};
  if (surface.empty() || !std::isupper(static_cast<unsigned char>(surface[0]))) return false;
  std::string l(surface);
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  return std::find(kPronouns.begin(), kPronouns.end(), l) == kPronouns.end();
}

std::optional<GapSample> generate_neither(const DocumentClusters& doc, Rng& rng, const std::string& id) {
  struct Choice {
    Span pronoun;
    std::size_t pronoun_cluster;
    std::vector<std::size_t> eligible;
  };
  auto surface = [&](const Span& s) { return doc.text.substr(s.offset, s.length); };

  std::vector<Choice> choices;
  for (std::size_t c = 0; c < doc.clusters.size(); ++c) {
    for (const Span& m : doc.clusters[c]) {
      if (m.end() > doc.text.size() || !pronoun_gender(surface(m))) continue;
      Choice ch{m, c, {}};
      for (std::size_t o = 0; o < doc.clusters.size(); ++o) {
        if (o == c || !clusters_disjoint(doc.clusters[c], doc.clusters[o])) continue;
        const bool has_person = std::any_of(doc.clusters[o].begin(), doc.clusters[o].end(), [&](const Span& s) {
          return s.end() <= doc.text.size() && person_like(surface(s));
        });
        if (has_person) ch.eligible.push_back(o);
      }
      if (ch.eligible.size() >= 2) choices.push_back(std::move(ch));
    }
  }

  // Try choices in random order; a pair of eligible clusters must itself be disjoint.
  std::shuffle(choices.begin(), choices.end(), rng);
  for (auto& ch : choices) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < ch.eligible.size(); ++i)
      for (std::size_t j = i + 1; j < ch.eligible.size(); ++j)
        if (clusters_disjoint(doc.clusters[ch.eligible[i]], doc.clusters[ch.eligible[j]]))
          pairs.emplace_back(ch.eligible[i], ch.eligible[j]);
    if (pairs.empty()) continue;
    const auto [x, y] = pairs[rng.index(pairs.size())];
    auto pick_person = [&](std::size_t cluster) {
      std::vector<Span> people;
      for (const Span& s : doc.clusters[cluster])
        if (s.end() <= doc.text.size() && person_like(surface(s))) people.push_back(s);
      return people[rng.index(people.size())];
    };
    Span a = pick_person(x);
    Span b = pick_person(y);
    if (b.offset < a.offset) std::swap(a, b);
    if (a.overlaps(b) || a.overlaps(ch.pronoun) || b.overlaps(ch.pronoun)) continue;

    const auto starts = sentence_starts(doc.text);
    const std::size_t lo = std::min({a.offset, b.offset, ch.pronoun.offset});
    const std::size_t hi = std::max({a.end(), b.end(), ch.pronoun.end()});
    std::size_t first = sentence_of(starts, lo);
    std::size_t last = sentence_of(starts, hi - 1);
    if (first > 0) --first;
    if (last + 1 < starts.size()) ++last;
    std::size_t begin = starts[first];
    std::size_t end = last + 1 < starts.size() ? starts[last + 1] : doc.text.size();
    while (end > begin && std::isspace(static_cast<unsigned char>(doc.text[end - 1]))) --end;

    GapSample s;
    s.id = id;
    s.text = doc.text.substr(begin, end - begin);
    s.url = doc.url;
    s.pronoun = {surface(ch.pronoun), ch.pronoun.offset - begin};
    s.a = {surface(a), a.offset - begin};
    s.b = {surface(b), b.offset - begin};
    s.gender = *pronoun_gender(s.pronoun.text);
    s.set_label(Label::kNeither);
    s.validate();
    return s;
  }
  return std::nullopt;
}

std::vector<GapSample> generate_neither_set(const std::vector<DocumentClusters>& docs,
                                            const NeitherSetConfig& config) {
  Rng rng = Rng(config.seed).stream(rng_stream::kData);
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<GapSample> out;
  std::size_t m = 0;
  std::size_t f = 0;
  for (std::size_t i : order) {
    if (m >= config.masculine && f >= config.feminine) break;
    auto row = generate_neither(docs[i], rng, config.id_prefix + "-" + std::to_string(out.size() + 1));
    if (!row) continue;
    std::size_t& count = row->gender == Gender::kMasculine ? m : f;
    const std::size_t quota = row->gender == Gender::kMasculine ? config.masculine : config.feminine;
    if (count >= quota) continue;
    ++count;
    out.push_back(std::move(*row));
  }
  if (m < config.masculine || f < config.feminine) {
    log_warning("NEITHER augmentation: documents exhausted at " + std::to_string(m) + " M / " + std::to_string(f) +
                " F rows");
  }
  return out;
}

DocumentClusters document_from_synthetic(const GapSample& sample, const SyntheticInfo& info) {
  return {sample.id, sample.text, sample.url, info.clusters()};
}

}  // namespace gpr
