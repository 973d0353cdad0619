#include "gpr/cli/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "gpr/data/corrections.hpp"
#include "gpr/data/neither.hpp"
#include "gpr/data/synthetic.hpp"
#include "gpr/data/tagging.hpp"
#include "gpr/data/tsv.hpp"
#include "gpr/data/utf8.hpp"
#include "gpr/evidence/providers.hpp"
#include "gpr/service/manifest.hpp"
#include "gpr/service/review_service.hpp"
#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/log.hpp"
#include "gpr/train/kfold.hpp"
#include "gpr/train/prediction_io.hpp"

namespace gpr {

namespace {

namespace fs = std::filesystem;

/// A flag value that failed validation after parsing (exit 1).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

fs::path data_root() {
  const char* dir = std::getenv("GREP_DATA_DIR");
  return dir ? fs::path(dir) : fs::path();
}

/// Relative paths missing from the working directory are looked up under
/// GREP_DATA_DIR.
fs::path resolve(const std::string& path) {
  fs::path p(path);
  if (p.is_relative() && !fs::exists(p) && !data_root().empty() && fs::exists(data_root() / p)) {
    return data_root() / p;
  }
  return p;
}

fs::path require(const std::string& flag, const std::string& value) {
  if (value.empty()) throw UsageError(flag + " is required");
  const fs::path p = resolve(value);
  if (!fs::exists(p)) throw DataError(flag + ": no such file " + p.string());
  return p;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> out;
  for (const auto& s : parse_provider_list(csv)) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw UsageError("bad seed '" + s + "'");
    out.push_back(v);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

struct Common {
  std::string data;
  std::string evidence;
  std::string providers;
  std::string out = "out";
  std::uint64_t seed = 42;
};

struct ModelFlags {
  std::string model = "grep";
  int vocab_size = 2000;
  Index hidden = 64;
  int layers = 2;
  int heads = 4;
  int ep_heads = 4;
  Index max_length = 256;
  Index ffn_hidden = 0;
  double dropout = 0.1;
  bool no_layer_norm = false;
  bool no_head_bias = false;
  bool reattend = false;
  bool raw_token_keys = false;
  bool separate_entity_pool = false;
  bool exclude_pronoun = false;
  int freeze_depth = 0;
  int batch_size = 16;
  double lr = 0.0;  // 0: 3e-4 for the toy encoder, 4e-6 with precomputed embeddings
  double weight_decay = 0.01;
  bool no_bias_correction = false;
  int eval_every = 80;
  int patience = 5;
  int max_steps = 2000;
  std::string embeddings;
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
  app->add_option("--model", f.model, "probert or grep")->check(CLI::IsMember({"probert", "grep"}));
  app->add_option("--vocab-size", f.vocab_size, "subword vocabulary size");
  app->add_option("--hidden", f.hidden, "encoder width H");
  app->add_option("--layers", f.layers, "encoder blocks");
  app->add_option("--heads", f.heads, "encoder attention heads");
  app->add_option("--ep-heads", f.ep_heads, "evidence pooling attention heads");
  app->add_option("--max-length", f.max_length, "token window");
  app->add_option("--ffn-hidden", f.ffn_hidden, "encoder feed-forward width (0 = 2H)");
  app->add_option("--dropout", f.dropout, "dropout rate");
  app->add_flag("--no-layer-norm", f.no_layer_norm, "disable encoder layer norm");
  app->add_flag("--no-head-bias", f.no_head_bias, "classifier without bias");
  app->add_flag("--reattend", f.reattend, "cascade stages re-attend the cluster mentions");
  app->add_flag("--raw-token-keys", f.raw_token_keys, "cascade keys are raw cluster tokens");
  app->add_flag("--separate-entity-pool", f.separate_entity_pool, "own AttnPool for cluster mentions");
  app->add_flag("--exclude-pronoun", f.exclude_pronoun, "drop the pronoun span from clusters");
  app->add_option("--freeze-depth", f.freeze_depth, "freeze embeddings and the lowest k blocks");
  app->add_option("--batch-size", f.batch_size, "mini-batch size");
  app->add_option("--lr", f.lr, "learning rate");
  app->add_option("--weight-decay", f.weight_decay, "decoupled weight decay");
  app->add_flag("--no-bias-correction", f.no_bias_correction, "Adam without bias correction");
  app->add_option("--eval-every", f.eval_every, "gradient steps between validations");
  app->add_option("--patience", f.patience, "validations without improvement before stopping");
  app->add_option("--steps", f.max_steps, "maximum gradient steps");
  app->add_option("--embeddings", f.embeddings, "precomputed embeddings archive (bypasses the encoder)");
}

TrainConfig train_config(const ModelFlags& f, int vocab_size, Index hidden, std::uint64_t seed, int folds) {
  TrainConfig c;
  c.model.kind = parse_model_kind(f.model);
  c.model.encoder.vocab_size = vocab_size;
  c.model.encoder.hidden = hidden;
  c.model.encoder.layers = f.layers;
  c.model.encoder.heads = f.heads;
  c.model.encoder.max_length = f.max_length;
  c.model.encoder.ffn_hidden = f.ffn_hidden;
  c.model.encoder.dropout = f.dropout;
  c.model.encoder.layer_norm = !f.no_layer_norm;
  c.model.encoder.freeze_depth = f.freeze_depth;
  c.model.grep.heads = f.ep_heads;
  c.model.grep.dropout = f.dropout;
  c.model.grep.reattend = f.reattend;
  c.model.grep.raw_token_keys = f.raw_token_keys;
  c.model.grep.separate_entity_pool = f.separate_entity_pool;
  c.model.head_bias = !f.no_head_bias;
  c.model.exclude_pronoun = f.exclude_pronoun;
  c.model.precomputed = !f.embeddings.empty();
  c.batch_size = f.batch_size;
  c.adam.learning_rate = f.lr > 0 ? f.lr : (c.model.precomputed ? 4e-6 : 3e-4);
  c.adam.weight_decay = f.weight_decay;
  c.adam.bias_correction = !f.no_bias_correction;
  c.eval_every = f.eval_every;
  c.patience = f.patience;
  c.max_steps = f.max_steps;
  c.seed = seed;
  c.folds = folds;
  c.validate();
  return c;
}

std::string display_name(ModelKind kind) { return kind == ModelKind::kGrep ? "GREP" : "ProBERT"; }

std::vector<std::string> provider_names(const std::string& csv) {
  return csv.empty() ? std::vector<std::string>{} : parse_provider_list(csv);
}

/// Samples plus optional evidence, inputs registered with the manifest.
struct Loaded {
  std::vector<GapSample> samples;
  std::optional<EvidenceSet> evidence;
};

Loaded load_corpus(const std::string& data_flag, const std::string& data, const std::string& evidence,
                   const std::vector<std::string>& providers, RunManifest& manifest) {
  Loaded out;
  const fs::path dp = require(data_flag, data);
  manifest.add_input(dp);
  out.samples = parse_tsv(dp);
  if (!evidence.empty()) {
    const fs::path ep = require("--evidence", evidence);
    manifest.add_input(ep);
    out.evidence = load_evidence(ep, out.samples, providers);
  }
  return out;
}

void finish(RunManifest& manifest, const fs::path& out_dir) {
  manifest.write(out_dir / "manifest.json");
  std::cout << "manifest: " << (out_dir / "manifest.json").string() << "\n";
}

void output(RunManifest& manifest, const fs::path& path) { manifest.add_output(path); }

void write_json(const fs::path& path, const nlohmann::json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

// ---------------------------------------------------------------------------

struct PreprocessArgs {
  Common common;
  std::string corrections;
  int vocab_size = 2000;
  Index max_length = 256;
  std::string corpus_name;
};

int cmd_preprocess(const PreprocessArgs& a) {
  RunManifest manifest("preprocess");
  const std::string data = a.common.data.empty() && !data_root().empty()
                               ? (data_root() / "gap-development.tsv").string()
                               : a.common.data;
  const fs::path dp = require("--data", data);
  manifest.add_input(dp);
  std::vector<GapSample> samples = parse_tsv(dp);
  const fs::path out(a.common.out);
  fs::create_directories(out);

  std::vector<CorrectionRecord> records;
  if (!a.corrections.empty()) {
    const fs::path cp = require("--corrections", a.corrections);
    manifest.add_input(cp);
    records = load_corrections(cp);
  }
  CorrectionResult corrected =
      apply_corrections(samples, records, a.corpus_name.empty() ? dp.stem().string() : a.corpus_name);
  const std::string table = corrected.report.table();
  std::cout << table;
  write_text(out / "delta.txt", table);
  write_json(out / "delta.json", corrected.report.to_json());
  write_tsv(out / "samples.tsv", corrected.samples);

  const Vocab vocab = vocab_for(corrected.samples, a.vocab_size);
  vocab.save(out / "vocab.json");
  std::size_t tokens = 0, fallback = 0, truncated = 0, unfittable = 0;
  std::array<std::array<std::size_t, 3>, 2> by_gender{};
  for (const auto& s : corrected.samples) {
    const TokenizedExample ex = tokenize_sample(s, vocab);
    tokens += static_cast<std::size_t>(ex.length());
    for (int id : ex.ids) fallback += vocab.is_byte(id);
    if (ex.length() > a.max_length) {
      try {
        fit_to_max_length(ex, a.max_length);
        ++truncated;
      } catch (const DataError& e) {
        log_warning(e.what());
        ++unfittable;
      }
    }
    ++by_gender[s.gender == Gender::kMasculine ? 0 : 1][static_cast<std::size_t>(s.label())];
  }
  nlohmann::json stats = {{"samples", corrected.samples.size()},
                          {"masculine", by_gender[0][0] + by_gender[0][1] + by_gender[0][2]},
                          {"feminine", by_gender[1][0] + by_gender[1][1] + by_gender[1][2]},
                          {"mean_tokens", corrected.samples.empty() ? 0.0 : double(tokens) / corrected.samples.size()},
                          {"byte_fallback_tokens", fallback},
                          {"truncated", truncated},
                          {"unfittable", unfittable},
                          {"vocab_size", vocab.size()}};
  for (Label l : kAllLabels) {
    stats["labels"][std::string(label_name(l))] = corrected.report.classes[static_cast<std::size_t>(l)].after;
  }
  write_json(out / "preprocess.json", stats);
  std::cout << "samples " << stats["samples"] << " (M " << stats["masculine"] << ", F " << stats["feminine"]
            << "), vocab " << vocab.size() << "\n";
  for (const char* f : {"delta.txt", "delta.json", "samples.tsv", "vocab.json", "preprocess.json"}) output(manifest, out / f);
  manifest.config() = {{"corrections", a.corrections}, {"vocab_size", a.vocab_size}, {"max_length", a.max_length}};
  finish(manifest, out);
  return 0;
}

struct GenSynthArgs {
  Common common;
  std::size_t size = 2000;
  double insufficient = 0.5;
  std::string prefix = "synth";
};

int cmd_gen_synth(const GenSynthArgs& a) {
  RunManifest manifest("gen-synth");
  manifest.seed = a.common.seed;
  SyntheticConfig config = SyntheticConfig::defaults();
  config.size = a.size;
  config.insufficient_fraction = a.insufficient;
  config.seed = a.common.seed;
  config.id_prefix = a.prefix;
  const SyntheticCorpus corpus = generate_synthetic(config);
  const fs::path out(a.common.out);
  fs::create_directories(out);
  write_tsv(out / "synth.tsv", corpus.samples);
  write_synthetic_info(out / "synth.info.jsonl", corpus);
  output(manifest, out / "synth.tsv");
  output(manifest, out / "synth.info.jsonl");
  manifest.config() = {{"size", a.size}, {"insufficient_fraction", a.insufficient}, {"id_prefix", a.prefix}};
  const auto counts = label_counts(corpus.samples);
  std::cout << "generated " << corpus.samples.size() << " samples (A " << counts[0] << ", B " << counts[1]
            << ", NEITHER " << counts[2] << ")\n";
  finish(manifest, out);
  return 0;
}

std::vector<DocumentClusters> read_documents(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<DocumentClusters> docs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DocumentClusters d;
      d.id = j.at("id").get<std::string>();
      d.text = j.at("text").get<std::string>();
      d.url = j.value("url", "");
      const Utf8Index utf8(d.text);
      for (const auto& cluster : j.at("clusters")) {
        std::vector<Span> spans;
        for (const auto& m : cluster) {
          const std::size_t cp = m.at("offset").get<std::size_t>();
          const std::size_t len = m.at("length").get<std::size_t>();
          if (cp + len > utf8.code_points()) throw DataError("mention outside the text");
          const std::size_t begin = utf8.to_byte(cp);
          spans.push_back(Span{begin, utf8.to_byte(cp + len) - begin});
        }
        d.clusters.push_back(std::move(spans));
      }
      docs.push_back(std::move(d));
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return docs;
}

struct GenNeitherArgs {
  Common common;
  std::string info;
  std::string clusters;
  std::size_t masculine = 129;
  std::size_t feminine = 124;
  std::string prefix = "neither";
};

int cmd_gen_neither(const GenNeitherArgs& a) {
  RunManifest manifest("gen-neither");
  manifest.seed = a.common.seed;
  std::vector<DocumentClusters> docs;
  if (!a.clusters.empty()) {
    const fs::path cp = require("--clusters", a.clusters);
    manifest.add_input(cp);
    docs = read_documents(cp);
  } else {
    const fs::path dp = require("--data", a.common.data);
    const fs::path ip = require("--info", a.info);
    manifest.add_input(dp);
    manifest.add_input(ip);
    const auto samples = parse_tsv(dp);
    const auto info = read_synthetic_info(ip, samples);
    for (std::size_t i = 0; i < samples.size(); ++i) docs.push_back(document_from_synthetic(samples[i], info[i]));
  }
  NeitherSetConfig config;
  config.masculine = a.masculine;
  config.feminine = a.feminine;
  config.id_prefix = a.prefix;
  config.seed = a.common.seed;
  const auto rows = generate_neither_set(docs, config);
  const fs::path out(a.common.out);
  fs::create_directories(out);
  write_tsv(out / "neither.tsv", rows);
  output(manifest, out / "neither.tsv");
  std::size_t m = 0;
  for (const auto& r : rows) m += r.gender == Gender::kMasculine;
  std::cout << "generated " << rows.size() << " NEITHER samples (M " << m << ", F " << rows.size() - m << ")\n";
  manifest.config() = {{"masculine", a.masculine}, {"feminine", a.feminine}, {"id_prefix", a.prefix}};
  finish(manifest, out);
  return 0;
}

struct EvidenceArgs {
  Common common;
  std::string info;
  std::string import_path;
};

int cmd_evidence(const EvidenceArgs& a) {
  RunManifest manifest("evidence");
  manifest.seed = a.common.seed;
  const fs::path dp = require("--data", a.common.data);
  manifest.add_input(dp);
  const auto samples = parse_tsv(dp);
  const fs::path out(a.common.out);
  fs::create_directories(out);
  EvidenceSet evidence;
  if (!a.import_path.empty()) {
    const fs::path ip = require("--import", a.import_path);
    manifest.add_input(ip);
    evidence = load_evidence(ip, samples, provider_names(a.common.providers));
  } else {
    if (a.common.providers.empty()) throw UsageError("--providers or --import is required");
    std::vector<ProviderSpec> specs;
    for (const auto& p : parse_provider_list(a.common.providers)) specs.push_back(ProviderSpec::parse(p));
    std::vector<SyntheticInfo> info;
    if (!a.info.empty()) {
      const fs::path ip = require("--info", a.info);
      manifest.add_input(ip);
      info = read_synthetic_info(ip, samples);
    }
    evidence = run_providers(samples, info, specs, a.common.seed);
  }
  save_evidence(out / "evidence.jsonl", evidence, samples);
  output(manifest, out / "evidence.jsonl");
  std::cout << evidence.cluster_count() << " clusters from " << evidence.providers().size() << " providers over "
            << evidence.sample_count() << " samples";
  if (evidence.dropped_mentions + evidence.duplicate_lines + evidence.unknown_samples > 0) {
    std::cout << " (dropped mentions " << evidence.dropped_mentions << ", duplicate lines "
              << evidence.duplicate_lines << ", unknown samples " << evidence.unknown_samples << ")";
  }
  std::cout << "\n";
  manifest.config() = {{"providers", join(evidence.providers())}, {"import", a.import_path}};
  finish(manifest, out);
  return 0;
}

struct TrainArgs {
  Common common;
  ModelFlags model;
  std::string validation;
  std::string validation_evidence;
  double val_fraction = 0.1;
};

std::shared_ptr<const PrecomputedEmbeddings> load_embeddings(const ModelFlags& f, RunManifest& manifest) {
  if (f.embeddings.empty()) return nullptr;
  const fs::path p = require("--embeddings", f.embeddings);
  manifest.add_input(p);
  return std::make_shared<const PrecomputedEmbeddings>(PrecomputedEmbeddings::load(p));
}

nlohmann::json checkpoint_meta(const TrainConfig& config, const Vocab& vocab, const std::vector<std::string>& providers) {
  return {{"train_config", config.to_json()}, {"vocab", vocab.to_json()}, {"providers", providers},
          {"max_length", config.model.encoder.max_length}};
}

int cmd_train(const TrainArgs& a) {
  RunManifest manifest("train");
  manifest.seed = a.common.seed;
  const auto providers = provider_names(a.common.providers);
  Loaded corpus = load_corpus("--data", a.common.data, a.common.evidence, providers, manifest);
  const auto embeddings = load_embeddings(a.model, manifest);

  std::vector<GapSample> train_samples, val_samples;
  std::optional<EvidenceSet> val_evidence = corpus.evidence;
  if (!a.validation.empty()) {
    Loaded v = load_corpus("--validation", a.validation,
                           a.validation_evidence.empty() ? a.common.evidence : a.validation_evidence, providers,
                           manifest);
    train_samples = corpus.samples;
    val_samples = v.samples;
    val_evidence = v.evidence;
  } else {
    if (a.val_fraction < 0.0 || a.val_fraction >= 1.0) throw UsageError("--val-fraction must be in [0, 1)");
    for (const auto& s : corpus.samples) {
      (stable_uniform(s.id, a.common.seed) < a.val_fraction ? val_samples : train_samples).push_back(s);
    }
  }
  const Vocab vocab = vocab_for(train_samples, a.model.vocab_size);
  const Index hidden = embeddings ? embeddings->hidden() : a.model.hidden;
  const TrainConfig config = train_config(a.model, vocab.size(), hidden, a.common.seed, 5);
  PrepareOptions prep;
  prep.max_length = config.model.encoder.max_length;
  prep.align.exclude_pronoun = config.model.exclude_pronoun;
  const Dataset train_set =
      prepare_dataset(train_samples, corpus.evidence ? &*corpus.evidence : nullptr, vocab, prep, embeddings);
  const Dataset val_set =
      prepare_dataset(val_samples, val_evidence ? &*val_evidence : nullptr, vocab, prep, embeddings);

  Model model(config.model, config.seed);
  const TrainResult result = train(model, config, train_set, val_set);

  const fs::path out(a.common.out);
  fs::create_directories(out);
  const auto used = corpus.evidence ? corpus.evidence->providers() : std::vector<std::string>{};
  nlohmann::json meta = checkpoint_meta(config, vocab, used);
  meta["step"] = result.best_step;
  meta["seed"] = config.seed;
  model.save(out / "model.ckpt", meta);
  vocab.save(out / "vocab.json");
  write_history(out / "history.csv", result.history);
  for (const char* f : {"model.ckpt", "vocab.json", "history.csv"}) output(manifest, out / f);
  if (!val_set.empty()) {
    const PredictionSet preds = predict(model, val_set);
    write_predictions(out / "val_predictions.csv", preds);
    const ScoreReport report = gap_f1(preds, val_set.samples);
    write_report(out / "val_report", report, display_name(config.model.kind));
    std::cout << report.table(display_name(config.model.kind));
    for (const char* f : {"val_predictions.csv", "val_report.json", "val_report.txt"}) output(manifest, out / f);
  }
  std::cout << "trained " << result.steps << " steps, best step " << result.best_step << "\n";
  manifest.config() = config.to_json();
  manifest.config()["providers"] = used;
  manifest.config()["val_fraction"] = a.validation.empty() ? a.val_fraction : 0.0;
  finish(manifest, out);
  return 0;
}

struct CvArgs {
  Common common;
  ModelFlags model;
  int folds = 5;
  std::string seeds = "42,59,75,46,91";
  std::string test;
  std::string test_evidence;
  unsigned workers = 0;
};

int cmd_cv_ensemble(const CvArgs& a) {
  RunManifest manifest("cv-ensemble");
  manifest.seed = a.common.seed;
  const auto providers = provider_names(a.common.providers);
  Loaded corpus = load_corpus("--data", a.common.data, a.common.evidence, providers, manifest);
  const auto embeddings = load_embeddings(a.model, manifest);
  const auto seeds = parse_seeds(a.seeds);
  const Vocab vocab = vocab_for(corpus.samples, a.model.vocab_size);
  const Index hidden = embeddings ? embeddings->hidden() : a.model.hidden;
  const TrainConfig config = train_config(a.model, vocab.size(), hidden, a.common.seed, a.folds);
  PrepareOptions prep;
  prep.max_length = config.model.encoder.max_length;
  prep.align.exclude_pronoun = config.model.exclude_pronoun;
  const Dataset data =
      prepare_dataset(corpus.samples, corpus.evidence ? &*corpus.evidence : nullptr, vocab, prep, embeddings);
  std::optional<Dataset> test;
  if (!a.test.empty()) {
    Loaded t = load_corpus("--test", a.test, a.test_evidence.empty() ? a.common.evidence : a.test_evidence,
                           providers, manifest);
    test = prepare_dataset(t.samples, t.evidence ? &*t.evidence : nullptr, vocab, prep, embeddings);
  }
  const fs::path out(a.common.out);
  fs::create_directories(out);
  CvOptions options;
  options.workers = a.workers;
  options.fold_seed = a.common.seed;
  options.checkpoint_dir = out / "models";
  const CvResult r = kfold_ensemble(config, data, test ? &*test : nullptr, seeds, options);

  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const fs::path p = out / ("oof_seed" + std::to_string(seeds[s]) + ".csv");
    write_predictions(p, r.oof[s]);
    output(manifest, p);
  }
  write_predictions(out / "oof_ensemble.csv", r.oof_ensemble);
  const ScoreReport oof = gap_f1(r.oof_ensemble, data.samples);
  write_report(out / "oof_report", oof, display_name(config.model.kind) + " OOF");
  std::cout << oof.table(display_name(config.model.kind) + " OOF");
  if (test) {
    write_predictions(out / "test_ensemble.csv", r.test_ensemble);
    output(manifest, out / "test_ensemble.csv");
    const ScoreReport tr = gap_f1(r.test_ensemble, test->samples);
    write_report(out / "test_report", tr, display_name(config.model.kind) + " test");
    std::cout << tr.table(display_name(config.model.kind) + " test");
  }
  for (const auto& job : r.jobs) {
    output(manifest, out / "models" / ("model_f" + std::to_string(job.fold) + "_s" + std::to_string(job.seed) + ".ckpt"));
  }
  output(manifest, out / "oof_ensemble.csv");
  std::cout << "trained " << r.jobs.size() << " models (" << a.folds << " folds x " << seeds.size() << " seeds)\n";
  manifest.config() = config.to_json();
  manifest.config()["seeds"] = seeds;
  manifest.config()["providers"] = corpus.evidence ? corpus.evidence->providers() : std::vector<std::string>{};
  finish(manifest, out);
  return 0;
}

struct ScoreArgs {
  Common common;
  std::string pred;
  std::string gold;
  std::string name = "model";
};

int cmd_score(const ScoreArgs& a) {
  RunManifest manifest("score");
  const fs::path pp = require("--pred", a.pred);
  const fs::path gp = require("--gold", a.gold.empty() ? a.common.data : a.gold);
  manifest.add_input(pp);
  manifest.add_input(gp);
  const auto gold = parse_tsv(gp);
  const ScoreReport r = gap_f1(read_predictions(pp), gold);
  const fs::path out(a.common.out);
  fs::create_directories(out);
  write_report(out / "report", r, a.name);
  output(manifest, out / "report.json");
  output(manifest, out / "report.txt");
  std::cout << r.table(a.name);
  manifest.config() = {{"name", a.name}};
  finish(manifest, out);
  return 0;
}

struct CompareArgs {
  Common common;
  std::string pred_a, pred_b, gold;
  std::string name_a = "ProBERT", name_b = "GREP";
};

int cmd_compare(const CompareArgs& a) {
  RunManifest manifest("compare");
  const fs::path pa = require("--pred-a", a.pred_a);
  const fs::path pb = require("--pred-b", a.pred_b);
  const fs::path gp = require("--gold", a.gold.empty() ? a.common.data : a.gold);
  for (const auto& p : {pa, pb, gp}) manifest.add_input(p);
  const auto gold = parse_tsv(gp);
  ConfusionComparison c = confusion_compare(read_predictions(pa), read_predictions(pb), gold);
  c.name_a = a.name_a;
  c.name_b = a.name_b;
  const fs::path out(a.common.out);
  fs::create_directories(out);
  write_json(out / "confusion.json", c.to_json());
  write_text(out / "confusion.txt", c.table());
  output(manifest, out / "confusion.json");
  output(manifest, out / "confusion.txt");
  std::cout << c.table();
  manifest.config() = {{"name_a", a.name_a}, {"name_b", a.name_b}};
  finish(manifest, out);
  return 0;
}

struct HistArgs {
  Common common;
  std::string pred, gold;
  int bins = 20;
};

int cmd_histograms(const HistArgs& a) {
  RunManifest manifest("histograms");
  const fs::path pp = require("--pred", a.pred);
  const fs::path gp = require("--gold", a.gold.empty() ? a.common.data : a.gold);
  manifest.add_input(pp);
  manifest.add_input(gp);
  const ProbHistograms h = prob_histograms(read_predictions(pp), parse_tsv(gp), a.bins);
  const fs::path out(a.common.out);
  fs::create_directories(out);
  write_text(out / "histograms.csv", h.csv());
  write_json(out / "histograms.json", h.to_json());
  output(manifest, out / "histograms.csv");
  output(manifest, out / "histograms.json");
  manifest.config() = {{"bins", a.bins}};
  finish(manifest, out);
  return 0;
}

struct ExportArgs {
  Common common;
  std::string checkpoint;
  std::string embeddings;
};

int cmd_export_attention(const ExportArgs& a) {
  RunManifest manifest("export-attention");
  const fs::path cp = require("--checkpoint", a.checkpoint);
  manifest.add_input(cp);
  nlohmann::json meta;
  const Model model = Model::load(cp, &meta);
  if (!meta.contains("vocab")) throw DataError(cp.string() + ": checkpoint carries no vocabulary");
  const Vocab vocab = Vocab::from_json(meta.at("vocab"));
  auto providers = provider_names(a.common.providers);
  if (providers.empty()) providers = meta.value("providers", std::vector<std::string>{});
  Loaded corpus = load_corpus("--data", a.common.data, a.common.evidence, providers, manifest);
  std::shared_ptr<const PrecomputedEmbeddings> embeddings;
  if (model.config().precomputed) {
    const fs::path ep = require("--embeddings", a.embeddings);
    manifest.add_input(ep);
    embeddings = std::make_shared<const PrecomputedEmbeddings>(PrecomputedEmbeddings::load(ep));
  }
  PrepareOptions prep;
  prep.max_length = model.config().encoder.max_length;
  prep.align.exclude_pronoun = model.config().exclude_pronoun;
  const Dataset data =
      prepare_dataset(corpus.samples, corpus.evidence ? &*corpus.evidence : nullptr, vocab, prep, embeddings);
  const fs::path out(a.common.out);
  fs::create_directories(out);
  std::string lines;
  for (const auto& t : export_traces(model, data)) lines += t.to_json().dump() + "\n";
  write_text(out / "traces.jsonl", lines);
  write_predictions(out / "predictions.csv", predict(model, data));
  output(manifest, out / "traces.jsonl");
  output(manifest, out / "predictions.csv");
  std::cout << "exported " << data.size() << " samples\n";
  manifest.config() = {{"providers", providers}, {"model", model.config().to_json()}};
  finish(manifest, out);
  return 0;
}

struct ServeArgs {
  Common common;
  std::string traces;
  std::vector<std::string> preds;
  std::string corrections = "corrections.jsonl";
  std::string host = "127.0.0.1";
  int port = 8080;
};

ReviewService* g_service = nullptr;

int cmd_serve(const ServeArgs& a) {
  RunManifest manifest("serve");
  const auto providers = provider_names(a.common.providers);
  Loaded corpus = load_corpus("--data", a.common.data, a.common.evidence, providers, manifest);
  ReviewData data;
  data.samples = corpus.samples;
  if (corpus.evidence) data.evidence = *corpus.evidence;
  if (!a.traces.empty()) {
    const fs::path tp = require("--traces", a.traces);
    manifest.add_input(tp);
    std::ifstream in(tp);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      data.traces[j.at("sample_id").get<std::string>()] = j;
    }
  }
  for (const auto& spec : a.preds) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--pred expects NAME=PATH, got '" + spec + "'");
    const fs::path pp = require("--pred", spec.substr(eq + 1));
    manifest.add_input(pp);
    data.predictions[spec.substr(0, eq)] = read_predictions(pp);
  }
  ReviewService service(std::move(data), fs::path(a.corrections));
  const fs::path out(a.common.out);
  fs::create_directories(out);
  manifest.config() = {{"host", a.host}, {"port", a.port}, {"corrections", a.corrections}};
  output(manifest, fs::path(a.corrections));
  finish(manifest, out);
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cout << "serving " << corpus.samples.size() << " samples on http://" << a.host << ":" << a.port << std::endl;
  const bool ok = service.listen(a.host, a.port);
  g_service = nullptr;
  if (!ok) throw std::runtime_error("could not listen on " + a.host + ":" + std::to_string(a.port));
  return 0;
}

void add_common(CLI::App* app, Common& c, bool data = true, bool evidence = false) {
  if (data) app->add_option("--data", c.data, "GAP-format TSV (relative paths also searched in GREP_DATA_DIR)");
  if (evidence) {
    app->add_option("--evidence", c.evidence, "evidence JSON lines");
    app->add_option("--providers", c.providers, "comma-separated provider names (order matters)");
  }
  app->add_option("--seed", c.seed, "run seed");
  app->add_option("--out", c.out, "output directory");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Gendered pronoun resolution: data pipeline, ProBERT/GREP training, scoring and label review", "gpr"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log progress");

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "parse, apply corrections, tag and tokenize");
  add_common(c_pre, pre.common);
  c_pre->add_option("--corrections", pre.corrections, "corrections ledger (JSON lines)");
  c_pre->add_option("--vocab-size", pre.vocab_size, "subword vocabulary size");
  c_pre->add_option("--max-length", pre.max_length, "token window");
  c_pre->add_option("--corpus", pre.corpus_name, "corpus name in the delta report");

  GenSynthArgs synth;
  auto* c_synth = app.add_subcommand("gen-synth", "generate a synthetic GAP-format corpus");
  add_common(c_synth, synth.common, false);
  c_synth->add_option("--size", synth.size, "number of samples");
  c_synth->add_option("--insufficient", synth.insufficient, "fraction of context-insufficient samples");
  c_synth->add_option("--prefix", synth.prefix, "sample id prefix");

  GenNeitherArgs neither;
  auto* c_neither = app.add_subcommand("gen-neither", "build NEITHER samples from disjoint clusters");
  add_common(c_neither, neither.common);
  c_neither->add_option("--info", neither.info, "synthetic sidecar for --data");
  c_neither->add_option("--clusters", neither.clusters, "documents with clusters (JSON lines)");
  c_neither->add_option("--masculine", neither.masculine, "masculine quota");
  c_neither->add_option("--feminine", neither.feminine, "feminine quota");
  c_neither->add_option("--prefix", neither.prefix, "sample id prefix");

  EvidenceArgs ev;
  auto* c_ev = app.add_subcommand("evidence", "run evidence providers or import an evidence file");
  add_common(c_ev, ev.common);
  c_ev->add_option("--providers", ev.common.providers, "providers: parallelism, oracle, adversarial, noisy:<rate>");
  c_ev->add_option("--info", ev.info, "synthetic sidecar (needed by oracle providers)");
  c_ev->add_option("--import", ev.import_path, "existing evidence file to validate and normalize");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train one model with early stopping");
  add_common(c_train, tr.common, true, true);
  add_model_flags(c_train, tr.model);
  c_train->add_option("--validation", tr.validation, "validation TSV (default: hash split of --data)");
  c_train->add_option("--validation-evidence", tr.validation_evidence, "evidence for --validation");
  c_train->add_option("--val-fraction", tr.val_fraction, "held-out fraction when --validation is absent");

  CvArgs cv;
  auto* c_cv = app.add_subcommand("cv-ensemble", "k-fold x seed training and ensembling");
  add_common(c_cv, cv.common, true, true);
  add_model_flags(c_cv, cv.model);
  c_cv->add_option("--folds", cv.folds, "fold count");
  c_cv->add_option("--seeds", cv.seeds, "comma-separated seeds");
  c_cv->add_option("--test", cv.test, "test TSV predicted by every model");
  c_cv->add_option("--test-evidence", cv.test_evidence, "evidence for --test");
  c_cv->add_option("--workers", cv.workers, "parallel jobs (0 = all cores)");

  ScoreArgs sc;
  auto* c_score = app.add_subcommand("score", "GAP F1 by gender, bias and log loss");
  add_common(c_score, sc.common);
  c_score->add_option("--pred", sc.pred, "predictions CSV (ID,A,B,NEITHER)");
  c_score->add_option("--gold", sc.gold, "gold TSV (defaults to --data)");
  c_score->add_option("--name", sc.name, "row name in the report table");

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare", "class-wise agreement of two models");
  add_common(c_cmp, cmp.common);
  c_cmp->add_option("--pred-a", cmp.pred_a, "first model predictions")->required();
  c_cmp->add_option("--pred-b", cmp.pred_b, "second model predictions")->required();
  c_cmp->add_option("--gold", cmp.gold, "gold TSV (defaults to --data)");
  c_cmp->add_option("--name-a", cmp.name_a, "first model name");
  c_cmp->add_option("--name-b", cmp.name_b, "second model name");

  HistArgs hist;
  auto* c_hist = app.add_subcommand("histograms", "distribution of p[gold class] per class");
  add_common(c_hist, hist.common);
  c_hist->add_option("--pred", hist.pred, "predictions CSV")->required();
  c_hist->add_option("--gold", hist.gold, "gold TSV (defaults to --data)");
  c_hist->add_option("--bins", hist.bins, "bin count");

  ExportArgs ex;
  auto* c_ex = app.add_subcommand("export-attention", "per-sample attention traces and probabilities");
  add_common(c_ex, ex.common, true, true);
  c_ex->add_option("--checkpoint,--model", ex.checkpoint, "trained checkpoint");
  c_ex->add_option("--embeddings", ex.embeddings, "precomputed embeddings for frozen-encoder checkpoints");

  ServeArgs sv;
  auto* c_sv = app.add_subcommand("serve", "HTTP backend for label review");
  add_common(c_sv, sv.common, true, true);
  c_sv->add_option("--traces", sv.traces, "traces.jsonl from export-attention");
  c_sv->add_option("--pred", sv.preds, "NAME=predictions.csv (repeatable)");
  c_sv->add_option("--corrections", sv.corrections, "corrections ledger (appended)");
  c_sv->add_option("--host", sv.host, "bind address");
  c_sv->add_option("--port", sv.port, "port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const LogLevel previous_level = verbose ? LogLevel::kInfo : LogLevel::kWarning;
  set_log_level(previous_level);

  try {
    if (*c_pre) return cmd_preprocess(pre);
    if (*c_synth) return cmd_gen_synth(synth);
    if (*c_neither) return cmd_gen_neither(neither);
    if (*c_ev) return cmd_evidence(ev);
    if (*c_train) return cmd_train(tr);
    if (*c_cv) return cmd_cv_ensemble(cv);
    if (*c_score) return cmd_score(sc);
    if (*c_cmp) return cmd_compare(cmp);
    if (*c_hist) return cmd_histograms(hist);
    if (*c_ex) return cmd_export_attention(ex);
    if (*c_sv) return cmd_serve(sv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const LookupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace gpr
