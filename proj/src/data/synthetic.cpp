#include "gpr/data/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "gpr/data/utf8.hpp"

namespace gpr {

namespace {

constexpr std::array<std::string_view, 7> kPlaceholders = {"{A}", "{B}", "{C}", "{SUBJ}", "{OBJ}", "{POSS}", "{PLACE}"};

std::size_t count_of(const std::string& text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::string pronoun_form(std::string_view slot, Gender g) {
  const bool m = g == Gender::kMasculine;
  if (slot == "{SUBJ}") return m ? "he" : "she";
  if (slot == "{OBJ}") return m ? "him" : "her";
  return m ? "his" : "her";
}

bool sentence_start(const std::string& text) {
  if (text.empty()) return true;
  std::size_t i = text.size();
  while (i > 0 && text[i - 1] == ' ') --i;
  return i == 0 || text[i - 1] == '.';
}

// Largest-remainder apportionment of `total` over `weights`.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> out(weights.size());
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = sum > 0 ? total * weights[i] / sum : 0.0;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += out[i];
    rema.emplace_back(exact - out[i], i);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[rema[k % rema.size()].second];
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.index(v.size())];
}

struct Job {
  Label label;
  bool insufficient;
  Gender gender;
};

}  // namespace

SyntheticConfig SyntheticConfig::defaults() {
  SyntheticConfig c;
  using L = Label;
  c.templates = {
      {"a-final", L::kA, "{A} beat {B} in the final, and {SUBJ} lifted the trophy to loud cheers."},
      {"a-hire", L::kA, "{A} hired {B} last spring because {POSS} company was growing quickly."},
      {"a-letter", L::kA, "{A} wrote a long letter to {B}, and {SUBJ} signed it with a flourish."},
      {"a-wedding", L::kA, "{A} invited {B} to the wedding that {SUBJ} had planned for months."},
      {"b-final", L::kB, "{A} beat {B} in the final, and {SUBJ} went home without a medal."},
      {"b-hire", L::kB, "{A} hired {B} last spring, shortly after {SUBJ} graduated from college."},
      {"b-hospital", L::kB, "{A} visited {B} in the hospital while {SUBJ} was recovering from surgery."},
      {"b-paint", L::kB, "{A} taught {B} to paint when {SUBJ} was still a small child."},
      {"n-ovation", L::kNeither, "{A} and {B} watched {C} perform, and the crowd gave {OBJ} a standing ovation."},
      {"n-premiere", L::kNeither, "{A} met {B} at the premiere of {C}'s film, where {SUBJ} spoke as the director."},
      {"n-novel", L::kNeither, "{A} and {B} read the novel by {C} that made {OBJ} famous overnight."},
      {"n-funeral", L::kNeither, "{A} and {B} attended the funeral of {C}, who died after {POSS} long illness."},
      {"x-met", std::nullopt, "{A} and {B} met {C} at the {PLACE}. Later that evening, {SUBJ} went home alone."},
      {"x-called", std::nullopt, "{A} called {B} after {C} left the {PLACE}, and then {SUBJ} fell asleep."},
      {"x-phone", std::nullopt, "{C} was at the {PLACE} with {A} and {B} when {POSS} phone started ringing."},
      {"x-coffee", std::nullopt, "{A} sat next to {B} and {C} at the {PLACE}, and {SUBJ} ordered coffee."},
  };
  c.lexicon.masculine_names = {"James", "Robert", "Daniel", "Thomas", "Peter",  "Martin", "George", "Henry",
                               "Samuel", "Oliver", "Victor", "Walter", "Arthur", "Edward", "Felix",  "Hugo",
                               "Julian", "Lucas",  "Marcus", "Nathan", "Oscar",  "Simon",  "Tobias", "Adrian"};
  c.lexicon.feminine_names = {"Mary",   "Anna",   "Laura", "Emma",  "Sarah",  "Helen",    "Alice",  "Clara",
                              "Diana",  "Eva",    "Fiona", "Grace", "Irene",  "Julia",    "Karen",  "Lucy",
                              "Maria",  "Nora",   "Olivia", "Paula", "Rachel", "Sophia", "Teresa", "Vera"};
  c.lexicon.surnames = {"Walker", "Bennett", "Fischer", "Morgan", "Hughes",  "Novak",  "Larsen", "Costa",
                        "Weber",  "Duval",   "Okafor",  "Tanaka", "Murphy",  "Keller", "Rossi",  "Silva",
                        "Brandt", "Ivanova", "Lindqvist", "Moreau", "Petrov", "Quinn", "Romero", "Stone"};
  c.lexicon.places = {"library", "station", "museum", "cafe", "park", "market", "theatre", "harbour"};
  c.lexicon.fillers = {"It was a quiet week in the town.", "The weather had been mild all season.",
                       "Few people remembered the details afterwards.", "The local paper covered the story briefly.",
                       "Nobody expected much from that year."};
  return c;
}

void SyntheticConfig::validate() const {
  std::array<int, 3> per_class{};
  int insufficient = 0;
  for (const auto& t : templates) {
    const auto a = t.text.find("{A}");
    const auto b = t.text.find("{B}");
    if (count_of(t.text, "{A}") != 1 || count_of(t.text, "{B}") != 1 || a > b) {
      throw ConfigError("template " + t.id + ": needs one {A} before one {B}");
    }
    const std::size_t pronouns = count_of(t.text, "{SUBJ}") + count_of(t.text, "{OBJ}") + count_of(t.text, "{POSS}");
    if (pronouns != 1) throw ConfigError("template " + t.id + ": needs exactly one pronoun slot");
    const std::size_t cs = count_of(t.text, "{C}");
    if (cs > 1) throw ConfigError("template " + t.id + ": at most one {C}");
    if ((!t.label || *t.label == Label::kNeither) && cs != 1) {
      throw ConfigError("template " + t.id + ": NEITHER and insufficient templates need a {C}");
    }
    if (t.label) {
      ++per_class[static_cast<std::size_t>(*t.label)];
    } else {
      ++insufficient;
    }
  }
  for (Label l : kAllLabels) {
    if (per_class[static_cast<std::size_t>(l)] < 2) {
      throw ConfigError("synthetic config needs at least two templates for class " + std::string(label_name(l)));
    }
  }
  if (insufficient_fraction > 0 && insufficient == 0) {
    throw ConfigError("insufficient fraction > 0 but no context-insufficient template");
  }
  if (insufficient_fraction < 0 || insufficient_fraction > 1) throw ConfigError("insufficient fraction outside [0,1]");
  for (double m : class_mix) {
    if (m < 0) throw ConfigError("negative class proportion");
  }
  if (lexicon.masculine_names.size() < 3 || lexicon.feminine_names.size() < 3 || lexicon.surnames.size() < 3) {
    throw ConfigError("synthetic lexicon needs at least three names per gender and three surnames");
  }
  if (lexicon.places.empty()) throw ConfigError("synthetic lexicon has no places");
  if (max_fillers > 0 && lexicon.fillers.empty()) throw ConfigError("synthetic lexicon has no filler sentences");
}

std::vector<Span> SyntheticInfo::gold_cluster() const {
  std::vector<Span> c = entities.at(referent).mentions;
  c.push_back(pronoun);
  std::sort(c.begin(), c.end());
  return c;
}

std::vector<std::vector<Span>> SyntheticInfo::clusters() const {
  std::vector<std::vector<Span>> out;
  for (std::size_t e = 0; e < entities.size(); ++e) {
    out.push_back(entities[e].mentions);
    if (e == referent) out.back().push_back(pronoun);
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

const SyntheticInfo* SyntheticCorpus::find(const std::string& id) const {
  for (const auto& i : info) {
    if (i.sample_id == id) return &i;
  }
  return nullptr;
}

SyntheticCorpus generate_synthetic(const SyntheticConfig& config) {
  if (config.size < 6) {
    throw ConfigError("synthetic corpus size " + std::to_string(config.size) +
                      " cannot cover three classes and two genders (minimum 6)");
  }
  config.validate();

  const auto per_class = apportion(config.size, {config.class_mix.begin(), config.class_mix.end()});
  std::vector<double> class_w(per_class.begin(), per_class.end());
  const auto insufficient_per_class = apportion(
      static_cast<std::size_t>(std::llround(config.insufficient_fraction * static_cast<double>(config.size))), class_w);

  std::vector<Job> jobs;
  for (Label l : kAllLabels) {
    const auto c = static_cast<std::size_t>(l);
    for (std::size_t i = 0; i < per_class[c]; ++i) {
      jobs.push_back({l, i < insufficient_per_class[c], Gender::kMasculine});
    }
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i].gender = i % 2 == 0 ? Gender::kMasculine : Gender::kFeminine;

  Rng rng = Rng(config.seed).stream(rng_stream::kData);
  std::shuffle(jobs.begin(), jobs.end(), rng);

  std::vector<const SyntheticTemplate*> insufficient_templates;
  std::array<std::vector<const SyntheticTemplate*>, 3> class_templates;
  for (const auto& t : config.templates) {
    if (t.label) {
      class_templates[static_cast<std::size_t>(*t.label)].push_back(&t);
    } else {
      insufficient_templates.push_back(&t);
    }
  }

  const int width = std::max(4, static_cast<int>(std::to_string(config.size).size()));
  SyntheticCorpus corpus;
  corpus.samples.reserve(jobs.size());
  corpus.info.reserve(jobs.size());
  for (std::size_t n = 0; n < jobs.size(); ++n) {
    const Job& job = jobs[n];
    const SyntheticTemplate& tpl = job.insufficient ? *pick(insufficient_templates, rng)
                                                    : *pick(class_templates[static_cast<std::size_t>(job.label)], rng);
    const auto& first_names =
        job.gender == Gender::kMasculine ? config.lexicon.masculine_names : config.lexicon.feminine_names;
    std::vector<std::size_t> fi(first_names.size()), si(config.lexicon.surnames.size());
    std::iota(fi.begin(), fi.end(), 0);
    std::iota(si.begin(), si.end(), 0);
    std::shuffle(fi.begin(), fi.end(), rng);
    std::shuffle(si.begin(), si.end(), rng);
    std::array<std::string, 3> names;
    for (std::size_t p = 0; p < 3; ++p) names[p] = first_names[fi[p]] + " " + config.lexicon.surnames[si[p]];
    const std::string& place = pick(config.lexicon.places, rng);

    std::string number = std::to_string(n + 1);
    number.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(number.size()))), '0');

    GapSample s;
    s.id = config.id_prefix + "-" + number;
    s.gender = job.gender;
    SyntheticInfo info;
    info.sample_id = s.id;
    info.template_id = tpl.id;
    info.insufficient = job.insufficient;
    std::array<std::optional<Span>, 3> person_spans;

    auto add_fillers = [&] {
      const auto k = config.max_fillers > 0 ? rng.index(static_cast<std::size_t>(config.max_fillers) + 1) : 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (!s.text.empty()) s.text += ' ';
        s.text += pick(config.lexicon.fillers, rng);
      }
    };
    add_fillers();
    if (!s.text.empty()) s.text += ' ';

    const std::string& t = tpl.text;
    for (std::size_t pos = 0; pos < t.size();) {
      std::string_view slot;
      if (t[pos] == '{') {
        for (auto ph : kPlaceholders) {
          if (t.compare(pos, ph.size(), ph) == 0) slot = ph;
        }
      }
      if (slot.empty()) {
        s.text += t[pos++];
        continue;
      }
      pos += slot.size();
      const std::size_t at = s.text.size();
      if (slot == "{PLACE}") {
        s.text += place;
      } else if (slot == "{A}" || slot == "{B}" || slot == "{C}") {
        const auto p = static_cast<std::size_t>(slot[1] - 'A');
        s.text += names[p];
        person_spans[p] = Span{at, names[p].size()};
      } else {
        std::string form = pronoun_form(slot, job.gender);
        if (sentence_start(s.text.substr(0, at))) form[0] = static_cast<char>(std::toupper(form[0]));
        s.text += form;
        s.pronoun = {form, at};
        info.pronoun = {at, form.size()};
      }
    }
    const std::size_t before_suffix = s.text.size();
    s.text += ' ';
    add_fillers();
    if (s.text.size() == before_suffix + 1) s.text.pop_back();

    s.a = {names[0], person_spans[0]->offset};
    s.b = {names[1], person_spans[1]->offset};
    s.set_label(job.label);
    for (std::size_t p = 0; p < 3; ++p) {
      if (person_spans[p]) info.entities.push_back({std::string(1, static_cast<char>('A' + p)), {*person_spans[p]}});
    }
    info.referent = static_cast<std::size_t>(job.label);
    s.validate();
    corpus.samples.push_back(std::move(s));
    corpus.info.push_back(std::move(info));
  }
  return corpus;
}

void write_synthetic_info(const std::filesystem::path& path, const SyntheticCorpus& corpus) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const GapSample& s = corpus.samples[i];
    const SyntheticInfo& info = corpus.info[i];
    const Utf8Index idx(s.text);
    auto span_json = [&](const Span& sp) {
      const std::size_t cp = idx.to_code_point(sp.offset);
      return nlohmann::json{{"offset", cp}, {"length", idx.to_code_point(sp.end()) - cp}};
    };
    nlohmann::json entities = nlohmann::json::array();
    for (const auto& e : info.entities) {
      nlohmann::json ms = nlohmann::json::array();
      for (const auto& m : e.mentions) ms.push_back(span_json(m));
      entities.push_back({{"role", e.role}, {"mentions", ms}});
    }
    out << nlohmann::json{{"sample_id", info.sample_id},
                          {"template", info.template_id},
                          {"insufficient", info.insufficient},
                          {"referent", info.entities.at(info.referent).role},
                          {"pronoun", span_json(info.pronoun)},
                          {"entities", entities}}
               .dump()
        << '\n';
  }
}

std::vector<SyntheticInfo> read_synthetic_info(const std::filesystem::path& path,
                                               const std::vector<GapSample>& samples) {
  std::unordered_map<std::string, const GapSample*> by_id;
  for (const auto& s : samples) by_id.emplace(s.id, &s);
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<SyntheticInfo> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      SyntheticInfo info;
      info.sample_id = j.at("sample_id").get<std::string>();
      auto it = by_id.find(info.sample_id);
      if (it == by_id.end()) throw DataError("unknown sample " + info.sample_id);
      const Utf8Index idx(it->second->text);
      auto span_of = [&](const nlohmann::json& sj) {
        const std::size_t cp = sj.at("offset").get<std::size_t>();
        const std::size_t len = sj.at("length").get<std::size_t>();
        if (cp + len > idx.code_points()) throw DataError("span out of bounds");
        const std::size_t b = idx.to_byte(cp);
        return Span{b, idx.to_byte(cp + len) - b};
      };
      info.template_id = j.value("template", "");
      info.insufficient = j.value("insufficient", false);
      info.pronoun = span_of(j.at("pronoun"));
      const std::string referent = j.at("referent").get<std::string>();
      bool found = false;
      for (const auto& e : j.at("entities")) {
        SyntheticEntity ent;
        ent.role = e.at("role").get<std::string>();
        for (const auto& m : e.at("mentions")) ent.mentions.push_back(span_of(m));
        if (ent.role == referent) {
          info.referent = info.entities.size();
          found = true;
        }
        info.entities.push_back(std::move(ent));
      }
      if (!found) throw DataError("referent " + referent + " is not among the entities");
      out.push_back(std::move(info));
    } catch (const std::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace gpr
