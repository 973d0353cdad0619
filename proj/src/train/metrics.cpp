#include "gpr/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/log.hpp"

namespace gpr {

namespace {

std::unordered_map<std::string, const PredictionRecord*> index_by_id(const PredictionSet& set) {
  std::unordered_map<std::string, const PredictionRecord*> out;
  for (const auto& p : set) out[p.id] = &p;
  return out;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

Label PredictionRecord::predicted() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < 3; ++k) {
    if (probs[k] > probs[best]) best = k;
  }
  return static_cast<Label>(best);
}

double BinaryCounts::f1() const {
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

BinaryCounts& BinaryCounts::operator+=(const BinaryCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

std::array<bool, 2> coref_decisions(Label label) { return {label == Label::kA, label == Label::kB}; }

double logloss(const std::vector<std::array<double, 3>>& probs, const std::vector<Label>& gold) {
  if (probs.size() != gold.size()) {
    throw DimensionError("logloss: " + std::to_string(probs.size()) + " predictions for " +
                         std::to_string(gold.size()) + " labels");
  }
  if (probs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i][static_cast<std::size_t>(gold[i])];
    total -= std::log(std::clamp(p, 1e-15, 1.0 - 1e-15));
  }
  return total / static_cast<double>(probs.size());
}

ScoreReport gap_f1(const PredictionSet& predictions, const std::vector<GapSample>& gold) {
  const auto by_id = index_by_id(predictions);
  ScoreReport r;
  std::vector<std::array<double, 3>> probs;
  std::vector<Label> labels;
  for (const GapSample& s : gold) {
    const Label g = s.label();
    auto it = by_id.find(s.id);
    Label predicted = Label::kNeither;
    if (it == by_id.end()) {
      ++r.missing;
    } else {
      predicted = it->second->predicted();
      probs.push_back(it->second->probs);
      labels.push_back(g);
    }
    ++r.samples;
    ++r.gold_counts[static_cast<std::size_t>(g)];
    ++r.predicted_counts[static_cast<std::size_t>(predicted)];
    BinaryCounts& c = s.gender == Gender::kMasculine ? r.counts_m : r.counts_f;
    const auto gd = coref_decisions(g);
    const auto pd = coref_decisions(predicted);
    for (std::size_t k = 0; k < 2; ++k) {
      if (gd[k] && pd[k]) ++c.tp;
      if (!gd[k] && pd[k]) ++c.fp;
      if (gd[k] && !pd[k]) ++c.fn;
      if (!gd[k] && !pd[k]) ++c.tn;
    }
  }
  if (r.missing > 0) log_warning(std::to_string(r.missing) + " gold samples have no prediction; scored as NEITHER");
  BinaryCounts all = r.counts_m;
  all += r.counts_f;
  r.f1_m = r.counts_m.f1();
  r.f1_f = r.counts_f.f1();
  r.f1_overall = all.f1();
  r.bias = r.f1_f / r.f1_m;
  r.logloss = logloss(probs, labels);
  return r;
}

std::string format_logloss(double value) {
  std::string s = fixed(value, 3);
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  return s;
}

std::string format_bias(double value) { return std::isfinite(value) ? fixed(value, 2) : "-"; }

nlohmann::json ScoreReport::to_json() const {
  auto counts = [](const BinaryCounts& c) { return nlohmann::json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}}; };
  nlohmann::json j = {{"f1_m", f1_m},
                      {"f1_f", f1_f},
                      {"bias", std::isfinite(bias) ? nlohmann::json(bias) : nlohmann::json(nullptr)},
                      {"f1_overall", f1_overall},
                      {"logloss", logloss},
                      {"samples", samples},
                      {"missing", missing},
                      {"counts_m", counts(counts_m)},
                      {"counts_f", counts(counts_f)}};
  for (Label l : kAllLabels) {
    j["gold_counts"][std::string(label_name(l))] = gold_counts[static_cast<std::size_t>(l)];
    j["predicted_counts"][std::string(label_name(l))] = predicted_counts[static_cast<std::size_t>(l)];
  }
  return j;
}

std::string ScoreReport::table(const std::string& row_name) const {
  const std::size_t w = std::max<std::size_t>(row_name.size(), 5);
  std::ostringstream os;
  os << pad_right("", w) << pad("M", 7) << pad("F", 7) << pad("B", 7) << pad("O", 7) << pad("logloss", 9) << "\n";
  os << pad_right(row_name, w) << pad(fixed(100 * f1_m, 1), 7) << pad(fixed(100 * f1_f, 1), 7)
     << pad(format_bias(bias), 7) << pad(fixed(100 * f1_overall, 1), 7) << pad(format_logloss(logloss), 9) << "\n";
  return os.str();
}

ConfusionComparison confusion_compare(const PredictionSet& a, const PredictionSet& b,
                                      const std::vector<GapSample>& gold) {
  if (a.size() != gold.size() || b.size() != gold.size()) {
    throw DataError("confusion_compare: prediction sets cover " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()) + " samples, gold has " + std::to_string(gold.size()));
  }
  const auto ia = index_by_id(a);
  const auto ib = index_by_id(b);
  ConfusionComparison out;
  for (const GapSample& s : gold) {
    auto pa = ia.find(s.id);
    auto pb = ib.find(s.id);
    if (pa == ia.end() || pb == ib.end()) throw DataError("confusion_compare: no prediction for '" + s.id + "'");
    const Label g = s.label();
    const int ca = pa->second->predicted() == g;
    const int cb = pb->second->predicted() == g;
    ++out.cells[static_cast<std::size_t>(g)][ca][cb];
    ++out.cells[3][ca][cb];
  }
  return out;
}

nlohmann::json ConfusionComparison::to_json() const {
  nlohmann::json j = {{"model_a", name_a}, {"model_b", name_b}};
  const char* names[] = {"A", "B", "NEITHER", "Overall"};
  for (std::size_t c = 0; c < 4; ++c) {
    j["classes"][names[c]] = {{"a_incorrect", {{"b_incorrect", cells[c][0][0]}, {"b_correct", cells[c][0][1]}}},
                              {"a_correct", {{"b_incorrect", cells[c][1][0]}, {"b_correct", cells[c][1][1]}}}};
  }
  return j;
}

std::string ConfusionComparison::table() const {
  const char* names[] = {"A", "B", "NEITHER", "Overall"};
  const std::size_t w0 = 9, w1 = std::max<std::size_t>(name_a.size(), 9), w = 11;
  std::ostringstream os;
  os << pad_right("", w0) << pad_right("", w1) << pad(name_b, 2 * w) << "\n";
  os << pad_right("", w0) << pad_right(name_a, w1) << pad("Incorrect", w) << pad("Correct", w) << "\n";
  for (std::size_t c = 0; c < 4; ++c) {
    os << pad_right(names[c], w0) << pad_right("Incorrect", w1) << pad(std::to_string(cells[c][0][0]), w)
       << pad(std::to_string(cells[c][0][1]), w) << "\n";
    os << pad_right("", w0) << pad_right("Correct", w1) << pad(std::to_string(cells[c][1][0]), w)
       << pad(std::to_string(cells[c][1][1]), w) << "\n";
  }
  return os.str();
}

ProbHistograms prob_histograms(const PredictionSet& predictions, const std::vector<GapSample>& gold, int bins) {
  if (bins <= 0) throw ConfigError("histogram needs at least one bin");
  ProbHistograms h;
  h.bins = bins;
  for (auto& c : h.counts) c.assign(static_cast<std::size_t>(bins), 0);
  const auto by_id = index_by_id(predictions);
  for (const GapSample& s : gold) {
    auto it = by_id.find(s.id);
    if (it == by_id.end()) continue;
    const std::size_t g = static_cast<std::size_t>(s.label());
    const double p = std::clamp(it->second->probs[g], 0.0, 1.0);
    const auto bin = std::min(static_cast<std::size_t>(p * bins), static_cast<std::size_t>(bins - 1));
    ++h.counts[g][bin];
  }
  return h;
}

nlohmann::json ProbHistograms::to_json() const {
  nlohmann::json j = {{"bins", bins}};
  for (Label l : kAllLabels) j["counts"][std::string(label_name(l))] = counts[static_cast<std::size_t>(l)];
  return j;
}

std::string ProbHistograms::csv() const {
  std::ostringstream os;
  os << "class,bin_low,bin_high,count\n";
  for (Label l : kAllLabels) {
    for (int b = 0; b < bins; ++b) {
      os << label_name(l) << "," << fixed(static_cast<double>(b) / bins, 4) << ","
         << fixed(static_cast<double>(b + 1) / bins, 4) << ","
         << counts[static_cast<std::size_t>(l)][static_cast<std::size_t>(b)] << "\n";
    }
  }
  return os.str();
}

PredictionSet ensemble_mean(const std::vector<PredictionSet>& sets, const std::vector<double>& weights) {
  if (sets.empty()) throw ConfigError("ensemble_mean: no prediction sets");
  if (!weights.empty() && weights.size() != sets.size()) {
    throw ConfigError("ensemble_mean: " + std::to_string(weights.size()) + " weights for " +
                      std::to_string(sets.size()) + " sets");
  }
  double weight_total = 0.0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w < 0.0 || !std::isfinite(w)) throw ConfigError("ensemble_mean: weights must be finite and nonnegative");
    weight_total += w;
  }
  if (weight_total <= 0.0) throw ConfigError("ensemble_mean: weights sum to zero");

  PredictionSet out = sets.front();
  std::unordered_map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!row.emplace(out[i].id, i).second) throw DataError("ensemble_mean: duplicate id '" + out[i].id + "'");
    out[i].probs = {0.0, 0.0, 0.0};
  }
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (sets[s].size() != out.size()) {
      throw DataError("ensemble_mean: set " + std::to_string(s) + " has " + std::to_string(sets[s].size()) +
                      " predictions, expected " + std::to_string(out.size()));
    }
    const double w = (weights.empty() ? 1.0 : weights[s]) / weight_total;
    std::unordered_set<std::string> seen;
    for (const auto& p : sets[s]) {
      auto it = row.find(p.id);
      if (it == row.end() || !seen.insert(p.id).second) {
        throw DataError("ensemble_mean: set " + std::to_string(s) + " does not cover the same ids ('" + p.id + "')");
      }
      for (std::size_t k = 0; k < 3; ++k) out[it->second].probs[k] += w * p.probs[k];
    }
  }
  for (auto& p : out) {
    const double z = p.probs[0] + p.probs[1] + p.probs[2];
    for (double& v : p.probs) v /= z;
  }
  return out;
}

void attach_gold(PredictionSet& predictions, const std::vector<GapSample>& gold) {
  std::unordered_map<std::string, const GapSample*> by_id;
  for (const auto& s : gold) by_id[s.id] = &s;
  for (auto& p : predictions) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) continue;
    p.gold = it->second->label();
    p.gender = it->second->gender;
  }
}

}  // namespace gpr
