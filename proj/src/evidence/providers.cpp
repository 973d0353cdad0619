#include "gpr/evidence/providers.hpp"

#include <cstdlib>
#include <unordered_map>

#include "gpr/tensor/rng.hpp"

namespace gpr {

EvidenceCluster heuristic_parallelism(const GapSample& sample, const std::string& provider) {
  const std::size_t p = sample.pronoun.offset;
  const Mention* best = nullptr;
  auto better = [&](const Mention& c, bool before) {
    if (best == nullptr) return true;
    const bool best_before = best->offset < p;
    if (before != best_before) return before;
    const std::size_t d = before ? p - c.offset : c.offset - p;
    const std::size_t bd = best_before ? p - best->offset : best->offset - p;
    if (d != bd) return d < bd;
    return c.offset < best->offset;
  };
  for (const Mention* c : {&sample.a, &sample.b}) {
    if (better(*c, c->offset < p)) best = c;
  }
  return {provider, sample.id, {best->span()}};
}

EvidenceCluster oracle_provider(const GapSample& sample, const SyntheticInfo* info, const std::string& provider) {
  if (info == nullptr || info->sample_id != sample.id) {
    throw DataError("oracle provider needs synthetic construction info for " + sample.id);
  }
  EvidenceCluster c{provider, sample.id, info->gold_cluster()};
  c.canonicalize();
  return c;
}

std::optional<Label> implied_label(const EvidenceCluster& cluster, const GapSample& sample) {
  bool a = false;
  bool b = false;
  for (const Span& m : cluster.mentions) {
    a = a || m.overlaps(sample.a.span());
    b = b || m.overlaps(sample.b.span());
  }
  if (a && b) return std::nullopt;
  return derive_label(a, b);
}

bool corruption_hit(const std::string& sample_id, double rate, std::uint64_t seed) {
  return stable_uniform(sample_id, seed) < rate;
}

EvidenceCluster corrupt_cluster(const EvidenceCluster& base, const GapSample& sample, double rate,
                                std::uint64_t seed, const std::string& provider) {
  if (rate < 0.0 || rate > 1.0) throw ConfigError("corruption rate outside [0,1]");
  EvidenceCluster out = base;
  out.provider = provider;
  if (!corruption_hit(sample.id, rate, seed)) return out;
  const auto implied = implied_label(base, sample);
  const bool coin = stable_uniform(sample.id, seed ^ 0x5bd1e995ULL) < 0.5;
  const Mention* wrong = nullptr;
  if (implied == Label::kA) {
    wrong = &sample.b;
  } else if (implied == Label::kB) {
    wrong = &sample.a;
  } else {
    wrong = coin ? &sample.a : &sample.b;
  }
  out.mentions = {wrong->span()};
  return out;
}

ProviderSpec ProviderSpec::parse(const std::string& text) {
  ProviderSpec s;
  s.name = text;
  if (text == "parallelism" || text == "oracle") {
    s.kind = text;
  } else if (text == "adversarial") {
    s.kind = "corrupt";
    s.rate = 1.0;
  } else if (text.rfind("noisy:", 0) == 0) {
    s.kind = "corrupt";
    char* end = nullptr;
    s.rate = std::strtod(text.c_str() + 6, &end);
    if (end == text.c_str() + 6 || *end != '\0' || s.rate < 0.0 || s.rate > 1.0) {
      throw ConfigError("bad noise rate in provider '" + text + "'");
    }
  } else {
    throw ConfigError("unknown provider '" + text + "' (parallelism, oracle, adversarial, noisy:<rate>)");
  }
  return s;
}

EvidenceSet run_providers(const std::vector<GapSample>& samples, const std::vector<SyntheticInfo>& info,
                          const std::vector<ProviderSpec>& providers, std::uint64_t seed) {
  std::unordered_map<std::string, const SyntheticInfo*> by_id;
  for (const auto& i : info) by_id.emplace(i.sample_id, &i);
  std::vector<std::string> names;
  for (const auto& p : providers) names.push_back(p.name);
  EvidenceSet set(names);
  for (std::size_t k = 0; k < providers.size(); ++k) {
    const ProviderSpec& p = providers[k];
    const std::uint64_t provider_seed = Rng::mix(seed ^ stable_hash(p.name));
    for (const auto& s : samples) {
      auto it = by_id.find(s.id);
      const SyntheticInfo* si = it == by_id.end() ? nullptr : it->second;
      if (p.kind == "parallelism") {
        set.put(heuristic_parallelism(s, p.name));
      } else if (p.kind == "oracle") {
        set.put(oracle_provider(s, si, p.name));
      } else {
        set.put(corrupt_cluster(oracle_provider(s, si, p.name), s, p.rate, provider_seed, p.name));
      }
    }
  }
  return set;
}

}  // namespace gpr
