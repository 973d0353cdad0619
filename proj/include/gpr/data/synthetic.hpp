#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpr/data/gap_sample.hpp"
#include "gpr/tensor/rng.hpp"

namespace gpr {

/// A snippet pattern. Placeholders: {A} {B} {C} for persons, {SUBJ} {OBJ}
/// {POSS} for the pronoun, {PLACE}. A must precede B; the pronoun appears
/// once. Context-insufficient templates carry no label: their gold referent
/// is drawn at random and only evidence can recover it.
struct SyntheticTemplate {
  std::string id;
  std::optional<Label> label;
  std::string text;
};

struct SyntheticLexicon {
  std::vector<std::string> masculine_names;
  std::vector<std::string> feminine_names;
  std::vector<std::string> surnames;
  std::vector<std::string> places;
  std::vector<std::string> fillers;
};

struct SyntheticConfig {
  std::size_t size = 2000;
  /// Fraction of context-insufficient samples.
  double insufficient_fraction = 0.5;
  /// Target class proportions in Label order.
  std::array<double, 3> class_mix = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  /// Up to this many neutral filler sentences before and after the snippet.
  int max_fillers = 1;
  std::string id_prefix = "synth";
  std::uint64_t seed = 42;
  std::vector<SyntheticTemplate> templates;
  SyntheticLexicon lexicon;

  /// Built-in templates and lexicon.
  static SyntheticConfig defaults();
  /// Throws ConfigError on fewer than two templates per class, malformed
  /// templates, or an empty lexicon list.
  void validate() const;
};

/// Persons in a synthetic snippet, with every mention span (bytes).
struct SyntheticEntity {
  std::string role;  // "A", "B" or "C"
  std::vector<Span> mentions;
};

/// Construction record kept next to each synthetic sample.
struct SyntheticInfo {
  std::string sample_id;
  std::string template_id;
  bool insufficient = false;
  std::vector<SyntheticEntity> entities;
  /// Index into entities of the pronoun's referent.
  std::size_t referent = 0;
  Span pronoun;

  /// The referent's mentions plus the pronoun, sorted.
  std::vector<Span> gold_cluster() const;
  /// Entity clusters with the pronoun placed in its referent's cluster.
  std::vector<std::vector<Span>> clusters() const;
};

struct SyntheticCorpus {
  std::vector<GapSample> samples;
  std::vector<SyntheticInfo> info;  // parallel to samples

  const SyntheticInfo* find(const std::string& id) const;
};

/// Throws ConfigError when size < 6 or the config is invalid.
SyntheticCorpus generate_synthetic(const SyntheticConfig& config);

/// Sidecar: one JSON line per sample with entities, referent and pronoun
/// (code-point offsets, like the TSV).
void write_synthetic_info(const std::filesystem::path& path, const SyntheticCorpus& corpus);
std::vector<SyntheticInfo> read_synthetic_info(const std::filesystem::path& path,
                                               const std::vector<GapSample>& samples);

}  // namespace gpr
