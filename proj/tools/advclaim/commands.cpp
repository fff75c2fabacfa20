#include "commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "advclaim/attribution/shapley.hpp"
#include "advclaim/data/csv.hpp"
#include "advclaim/data/snapshot.hpp"
#include "advclaim/errors.hpp"
#include "advclaim/io.hpp"
#include "advclaim/metrics/report.hpp"
#include "advclaim/models/knn.hpp"
#include "advclaim/models/model_io.hpp"
#include "advclaim/numkit/hash.hpp"

namespace advclaim::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Writes artifacts and records them in manifest.json with the config hash
// and seed that produced them.
class ArtifactWriter {
 public:
  ArtifactWriter(const Layout& layout, std::string command, const ExperimentConfig& cfg)
      : layout_(layout), command_(std::move(command)), config_hash_(config_hash(cfg)), seed_(cfg.seed) {}

  ~ArtifactWriter() {
    try {
      commit();
    } catch (...) {
    }
  }

  const std::string& config_hash_value() const { return config_hash_; }

  std::string write(const fs::path& rel, const std::string& contents) {
    write_text_file(layout_.root / rel, contents);
    const std::string h = content_hash(contents);
    entries_[rel.generic_string()] = {
        {"hash", h}, {"command", command_}, {"config_hash", config_hash_}, {"seed", seed_}};
    return h;
  }

  void commit() {
    if (entries_.empty()) return;
    json manifest = {{"artifacts", json::object()}};
    if (fs::exists(layout_.manifest())) {
      try {
        manifest = json::parse(read_text_file(layout_.manifest()));
      } catch (const json::exception&) {
      }
    }
    for (const auto& [k, v] : entries_) manifest["artifacts"][k] = v;
    write_text_file(layout_.manifest(), manifest.dump(1) + "\n");
    entries_.clear();
  }

 private:
  Layout layout_;
  std::string command_;
  std::string config_hash_;
  std::uint64_t seed_;
  std::map<std::string, json> entries_;
};

Dataset build_dataset(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  if (d.source == "synth") return synth_generate(d.synth, d.split);
  CsvOptions copt;
  copt.delimiter = d.csv.delimiter;
  copt.missing_tokens = d.csv.missing_tokens;
  const RawTable table = load_csv(d.csv.path, d.csv.label_column, copt);
  EncodingOptions eopt;
  eopt.drop_columns = d.csv.drop_columns;
  for (const auto& c : d.csv.categorical) eopt.declared[c] = FeatureKind::categorical;
  for (const auto& c : d.csv.numeric) eopt.declared[c] = FeatureKind::numeric;
  Dataset ds = prepare_csv_dataset(table, eopt, d.split, d.seed);
  ds.source = d.csv.path;
  return ds;
}

LoadedSnapshot require_snapshot(const Layout& layout) {
  if (!fs::exists(layout.snapshot())) {
    throw IoError("no snapshot at " + layout.snapshot().string() + "; run 'advclaim prepare' first");
  }
  return load_snapshot(layout.snapshot());
}

std::unique_ptr<Classifier> train_model(const ModelSection& m, const Dataset& ds) {
  if (m.family == "birecurrent") return std::make_unique<BiRecurrentModel>(train_birecurrent(ds, m.birecurrent));
  if (m.family == "tree_ensemble") return std::make_unique<TreeEnsemble>(train_gbt(ds, m.tree));
  if (m.family == "knn") return std::make_unique<KnnModel>(train_knn(ds, m.k));
  if (m.family == "margin") return std::make_unique<MarginModel>(train_margin(ds, m.margin));
  throw ConfigError("unknown family '" + m.family + "'");
}

std::uint64_t model_seed(const ModelSection& m, std::uint64_t fallback) {
  if (m.family == "birecurrent") return m.birecurrent.seed;
  if (m.family == "margin") return m.margin.seed;
  return fallback;
}

std::vector<const ModelSection*> selected_models(const ExperimentConfig& cfg, const RunOptions& opt) {
  std::vector<const ModelSection*> out;
  if (opt.model) {
    const ModelSection* m = cfg.find_model(*opt.model);
    if (!m) throw ConfigError("--model '" + *opt.model + "' is not defined in the config");
    out.push_back(m);
  } else {
    for (const auto& m : cfg.models) out.push_back(&m);
  }
  return out;
}

LoadedModel open_model(const Layout& layout, const std::string& name, const LoadedSnapshot& snap,
                       const RunOptions& opt, std::ostream& log) {
  const fs::path p = layout.model(name);
  if (!fs::exists(p)) throw IoError("no trained model at " + p.string() + "; run 'advclaim train' first");
  LoadedModel lm = load_model(p, snap.hash, opt.allow_mismatch);
  if (lm.hash_mismatch) {
    log << "warning: " << name << " was trained on snapshot " << lm.provenance.dataset_hash
        << " but the current snapshot is " << snap.hash << " (--allow-mismatch)\n";
  }
  return lm;
}

ModelRow evaluate_row(const std::string& name, const Classifier& model, const Dataset& ds, std::uint64_t seed) {
  ModelRow row;
  row.model_id = name;
  row.family = model.family();
  row.seed = seed;
  const Matrix x = ds.part_features(SplitPart::test);
  const std::vector<int> y = ds.part_labels(SplitPart::test);
  row.counts = confusion(y, model.predict_label(x));
  return row;
}

std::string fmt_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string describe(const ModelRow& r) {
  std::string s = r.model_id + " (" + r.family + "): ";
  if (!r.error.empty()) return s + "FAILED: " + r.error;
  s += "accuracy " + fmt_rate(accuracy(*r.counts));
  try {
    s += ", f1 " + fmt_rate(f1(*r.counts));
  } catch (const UndefinedMetric&) {
    s += ", f1 n/a";
  }
  return s;
}

void write_report(ArtifactWriter& w, const MetricsReport& r, const std::string& stem) {
  w.write(fs::path("reports") / (stem + ".json"), report_to_json(r).dump(1) + "\n");
  w.write(fs::path("reports") / (stem + ".csv"), report_csv(r));
}

bool is_gradient_attack(AttackKind k) { return k != AttackKind::noise; }

}  // namespace

int cmd_prepare(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const Layout layout{opt.out};
  ArtifactWriter w(layout, "prepare", cfg);
  const Dataset ds = build_dataset(cfg);
  const std::string text = serialize_snapshot(ds);
  const std::string hash = w.write("snapshot/dataset.json", text);
  const auto fraud = static_cast<std::size_t>(std::count(ds.labels.begin(), ds.labels.end(), 1));
  const json summary = {{"source", ds.source},
                        {"n_samples", ds.n_samples()},
                        {"n_features", ds.n_features()},
                        {"labels", {{"fraud", fraud}, {"legitimate", ds.n_samples() - fraud}}},
                        {"split",
                         {{"train", ds.split.train.size()}, {"val", ds.split.val.size()}, {"test", ds.split.test.size()}}},
                        {"warnings", ds.warnings},
                        {"snapshot_hash", hash},
                        {"config_hash", w.config_hash_value()},
                        {"seed", ds.seed}};
  w.write("snapshot/summary.json", summary.dump(1) + "\n");
  w.write("config.resolved.json", config_to_json(cfg).dump(1) + "\n");
  log << "snapshot " << hash << ": " << ds.n_samples() << " x " << ds.n_features() << " (train "
      << ds.split.train.size() << ", val " << ds.split.val.size() << ", test " << ds.split.test.size() << ")\n";
  for (const auto& warning : ds.warnings) log << "warning: " << warning << "\n";
  return kOk;
}

int cmd_train(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const Layout layout{opt.out};
  const LoadedSnapshot snap = require_snapshot(layout);
  ArtifactWriter w(layout, "train", cfg);
  MetricsReport report;
  report.kind = "train";
  report.dataset_hash = snap.hash;
  report.config_hash = w.config_hash_value();
  report.seed = cfg.seed;
  int failures = 0;
  for (const ModelSection* m : selected_models(cfg, opt)) {
    const std::uint64_t seed = model_seed(*m, cfg.seed);
    ModelRow row;
    try {
      const auto model = train_model(*m, snap.dataset);
      const ModelProvenance prov{m->name, snap.hash, seed, w.config_hash_value()};
      w.write(fs::path("models") / (m->name + ".json"), serialize_model(*model, prov));
      row = evaluate_row(m->name, *model, snap.dataset, seed);
    } catch (const Error& e) {
      row.model_id = m->name;
      row.family = m->family;
      row.seed = seed;
      row.error = e.what();
      ++failures;
    }
    log << describe(row) << "\n";
    report.models.push_back(std::move(row));
  }
  write_report(w, report, opt.model ? "train_" + *opt.model : "train");
  return failures ? kPartialFailure : kOk;
}

int cmd_attack(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const Layout layout{opt.out};
  const LoadedSnapshot snap = require_snapshot(layout);
  ArtifactWriter w(layout, "attack", cfg);
  MetricsReport report;
  report.kind = "attack";
  report.dataset_hash = snap.hash;
  report.config_hash = w.config_hash_value();
  report.seed = cfg.seed;
  const Matrix x = snap.dataset.part_features(SplitPart::test);
  const std::vector<int> y = snap.dataset.part_labels(SplitPart::test);
  int failures = 0;
  for (const ModelSection* m : selected_models(cfg, opt)) {
    LoadedModel lm;
    try {
      lm = open_model(layout, m->name, snap, opt, log);
    } catch (const IoError& e) {
      log << m->name << ": " << e.what() << "\n";
      ++failures;
      continue;
    }
    const Classifier& model = *lm.model;
    for (const AttackSection& a : cfg.attacks) {
      AttackRow row;
      row.model_id = m->name;
      row.attack = a.name;
      row.epsilon = a.report_epsilon;
      row.seed = a.config.seed;
      if (is_gradient_attack(a.kind) && !model.differentiable()) {
        row.note = "n/a: NotDifferentiable (" + model.family() + ")";
        log << m->name << " / " << a.name << ": " << row.note << "\n";
        report.attacks.push_back(std::move(row));
        continue;
      }
      const auto points = sweep(model, a.kind, a.epsilon_grid, x, y, a.config);
      for (const auto& p : points) {
        if (!p.error.empty()) {
          log << m->name << " / " << a.name << " eps " << p.epsilon << ": " << p.error << "\n";
          ++failures;
        }
      }
      w.write(fs::path("attacks") / (m->name + "__" + a.name + ".csv"), sweep_csv(points, a.kind, a.config.seed));
      try {
        AttackConfig c = a.config;
        c.epsilon = a.report_epsilon;
        const AttackOutcome o = run_attack(a.kind, model, x, y, c);
        row.accuracy_before = o.accuracy_before;
        row.accuracy_after = o.accuracy_after;
        row.asr = 1.0 - o.accuracy_after;
        log << m->name << " / " << a.name << " eps " << fmt_rate(a.report_epsilon) << ": accuracy "
            << fmt_rate(o.accuracy_before) << " -> " << fmt_rate(o.accuracy_after) << "\n";
      } catch (const Error& e) {
        row.note = std::string("failed: ") + e.what();
        ++failures;
      }
      report.attacks.push_back(std::move(row));
    }
  }
  write_report(w, report, opt.model ? "attack_" + *opt.model : "attack");
  return failures ? kPartialFailure : kOk;
}

int cmd_gan_attack(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const Layout layout{opt.out};
  const LoadedSnapshot snap = require_snapshot(layout);
  const std::string target = opt.model ? *opt.model : cfg.ganrl.target;
  if (!cfg.find_model(target)) throw ConfigError("gan-attack target '" + target + "' is not defined in the config");
  const LoadedModel lm = open_model(layout, target, snap, opt, log);
  ArtifactWriter w(layout, "gan-attack", cfg);
  const fs::path dir = fs::path("ganrl") / target;
  const auto& g = cfg.ganrl;
  const Dataset& ds = snap.dataset;
  const Matrix train_x = ds.part_features(SplitPart::train);

  GeneratorNet gen = make_generator(g.latent_dim, ds.n_features(), g.rl.seed, g.pretrain.gen_lr);
  DiscriminatorNet disc = make_discriminator(ds.n_features(), g.rl.seed, g.pretrain.disc_lr);
  GanHistory hist;
  const auto losses_json = [](const GanHistory& h) {
    return json{{"disc_loss", h.disc_loss}, {"gen_loss", h.gen_loss}}.dump() + "\n";
  };
  try {
    hist = pretrain_gan(gen, disc, train_x, g.pretrain);
  } catch (const DivergenceError& e) {
    w.write(dir / "pretrain_losses.json", losses_json(e.history()));
    log << "gan-attack: " << e.what() << "\n";
    return kPartialFailure;
  }
  w.write(dir / "pretrain_losses.json", losses_json(hist));
  log << "pretrained generator: " << hist.disc_loss.size() << " steps, final discriminator loss "
      << fmt_rate(hist.disc_loss.empty() ? 0.0 : hist.disc_loss.back()) << "\n";

  const SurrogateHandle handle = attach_target_as_surrogate(*lm.model, g.query_budget);
  RlOptions ropt;
  if (g.rl.anchor) ropt.anchors = &train_x;
  std::vector<EpisodeTrace> traces;
  try {
    traces = rl_refine(gen, handle, g.rl, ropt);
  } catch (const BudgetError& e) {
    w.write(dir / "traces.jsonl", traces_jsonl(e.partial_traces()));
    w.write(dir / "query_audit.json", handle.audit().dump(1) + "\n");
    log << "gan-attack: " << e.what() << " after " << e.partial_traces().size() << " episodes\n";
    return kPartialFailure;
  }
  w.write(dir / "traces.jsonl", traces_jsonl(traces));
  w.write(dir / "generator.json", json{{"generator", gen.to_json()},
                                       {"target", target},
                                       {"dataset_hash", snap.hash},
                                       {"config_hash", w.config_hash_value()},
                                       {"seed", g.rl.seed}}
                                      .dump() +
                                      "\n");

  std::vector<Matrix> batches;
  std::vector<std::vector<int>> labels;
  try {
    labels = label_generated_batches(gen, handle, g.eval_batches, g.eval_batch_size, g.rl.seed, &batches);
  } catch (const QueryBudgetExceeded& e) {
    w.write(dir / "query_audit.json", handle.audit().dump(1) + "\n");
    log << "gan-attack: " << e.what() << " during evaluation\n";
    return kPartialFailure;
  }
  w.write(dir / "generated_batch.csv", generated_batch_csv(batches.front(), ds.meta));
  w.write(dir / "query_audit.json", handle.audit().dump(1) + "\n");

  const int y_target = g.rl.y_target;
  const Fraction asr_sample = asr_exact(labels, y_target, AsrMode::sample_rate);
  const Fraction asr_batch = asr_exact(labels, y_target, AsrMode::batch_all);
  // Every generated record is fraud-intent (the opposite of the target label).
  ConfusionCounts counts;
  for (const auto& b : labels) {
    const std::vector<int> intent(b.size(), 1 - y_target);
    const ConfusionCounts c = confusion(intent, b);
    counts.tp += c.tp;
    counts.fp += c.fp;
    counts.tn += c.tn;
    counts.fn += c.fn;
  }
  const Fraction acc = accuracy_exact(counts);
  const bool identity = asr_sample.num * acc.den + acc.num * asr_sample.den == asr_sample.den * acc.den;

  const auto decile_mean = [&](bool last) {
    if (traces.empty()) return 0.0;
    const std::size_t n = std::max<std::size_t>(1, traces.size() / 10);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += traces[last ? traces.size() - 1 - i : i].mean_reward();
    return s / static_cast<double>(n);
  };

  MetricsReport report;
  report.kind = "gan_attack";
  report.dataset_hash = snap.hash;
  report.config_hash = w.config_hash_value();
  report.seed = g.rl.seed;
  AttackRow row;
  row.model_id = target;
  row.attack = "ganrl";
  row.accuracy_after = acc.value();
  row.asr = cfg.asr_mode == AsrMode::sample_rate ? asr_sample.value() : asr_batch.value();
  row.seed = g.rl.seed;
  row.note = std::string("asr_mode=") + to_string(cfg.asr_mode);
  report.attacks.push_back(row);
  const json audit = handle.audit();
  report.extra = {{"asr_sample_rate", asr_sample.value()},
                  {"asr_batch_all", asr_batch.value()},
                  {"asr_mode", to_string(cfg.asr_mode)},
                  {"target_accuracy_on_generated", acc.value()},
                  {"asr_identity_holds", identity},
                  {"generated_batches", labels.size()},
                  {"generated_batch_size", g.eval_batch_size},
                  {"episodes", traces.size()},
                  {"mean_reward_first_decile", decile_mean(false)},
                  {"mean_reward_last_decile", decile_mean(true)},
                  {"final_generator_loss", traces.empty() ? 0.0 : traces.back().generator_loss},
                  {"pretrain_steps", hist.disc_loss.size()},
                  {"es_space", to_string(g.rl.es_space)},
                  {"surrogate_differentiable", handle.differentiable()},
                  {"queries", audit.at("queries")},
                  {"parameter_accesses", audit.at("parameter_accesses")}};
  write_report(w, report, "gan_attack_" + target);
  log << "gan-attack " << target << ": ASR " << fmt_rate(asr_sample.value()) << " (sample_rate), "
      << fmt_rate(asr_batch.value()) << " (batch_all); target accuracy on generated batches " << fmt_rate(acc.value())
      << "; " << handle.queries() << " queries, 0 parameter accesses\n";
  if (!identity) {
    log << "gan-attack: ASR/accuracy identity violated\n";
    return kPartialFailure;
  }
  return kOk;
}

int cmd_eval(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const Layout layout{opt.out};
  const LoadedSnapshot snap = require_snapshot(layout);
  ArtifactWriter w(layout, "eval", cfg);
  MetricsReport report;
  report.kind = "eval";
  report.dataset_hash = snap.hash;
  report.config_hash = w.config_hash_value();
  report.seed = cfg.seed;
  int failures = 0;
  for (const ModelSection* m : selected_models(cfg, opt)) {
    ModelRow row;
    try {
      const LoadedModel lm = open_model(layout, m->name, snap, opt, log);
      row = evaluate_row(m->name, *lm.model, snap.dataset, lm.provenance.seed);
    } catch (const IoError& e) {
      row.model_id = m->name;
      row.family = m->family;
      row.error = e.what();
      ++failures;
    }
    log << describe(row) << "\n";
    report.models.push_back(std::move(row));
  }
  write_report(w, report, opt.model ? "eval_" + *opt.model : "eval");
  return failures ? kPartialFailure : kOk;
}

int cmd_explain(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const Layout layout{opt.out};
  const LoadedSnapshot snap = require_snapshot(layout);
  const std::string name = opt.model ? *opt.model : cfg.explain.model;
  if (!cfg.find_model(name)) throw ConfigError("explain model '" + name + "' is not defined in the config");
  const LoadedModel lm = open_model(layout, name, snap, opt, log);
  ArtifactWriter w(layout, "explain", cfg);
  const auto& e = cfg.explain;
  const std::size_t top_k = opt.top_k ? *opt.top_k : e.top_k;
  const auto entries = global_importance(score_fn(*lm.model), snap.dataset, e.n_explained, e.n_permutations, e.seed,
                                         e.background_size);
  const std::size_t shown = top_k == 0 ? entries.size() : std::min(top_k, entries.size());
  json rows = json::array();
  for (std::size_t i = 0; i < shown; ++i) {
    rows.push_back({{"feature", entries[i].feature},
                    {"mean_abs_shapley", entries[i].mean_abs_shapley},
                    {"rank", entries[i].rank}});
  }
  w.write(fs::path("reports") / ("importance_" + name + ".csv"), importance_csv(entries, top_k));
  w.write(fs::path("reports") / ("importance_" + name + ".json"),
          json{{"model", name},
               {"dataset_hash", snap.hash},
               {"config_hash", w.config_hash_value()},
               {"seed", e.seed},
               {"n_explained", e.n_explained},
               {"n_permutations", e.n_permutations},
               {"background_size", e.background_size},
               {"timestamp", report_timestamp()},
               {"importance", rows}}
                  .dump(1) +
              "\n");
  for (std::size_t i = 0; i < shown; ++i) {
    log << entries[i].rank << ". " << entries[i].feature << " " << fmt_rate(entries[i].mean_abs_shapley) << "\n";
  }
  return kOk;
}

int run_command(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
  if (command == "prepare") return cmd_prepare(cfg, opt, log);
  if (command == "train") return cmd_train(cfg, opt, log);
  if (command == "attack") return cmd_attack(cfg, opt, log);
  if (command == "gan-attack") return cmd_gan_attack(cfg, opt, log);
  if (command == "eval") return cmd_eval(cfg, opt, log);
  if (command == "explain") return cmd_explain(cfg, opt, log);
  throw ConfigError("unknown command '" + command + "'");
}

namespace {

class DirLock {
 public:
  explicit DirLock(fs::path path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw IoError("output directory is locked by another run (" + path_.string() +
                    "); remove the file if no run is active");
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd_, pid.data(), pid.size());
  }
  ~DirLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

std::vector<fs::path> artifact_files(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root);
    if (rel.filename() == ".advclaim.lock") continue;
    out.push_back(rel);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Re-runs the command in a scratch copy of the output directory and compares
// every artifact byte for byte.
int verify(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& out) {
  const fs::path scratch =
      opt.out.parent_path() / (".verify-" + opt.out.filename().string() + "-" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  for (const auto& rel : artifact_files(opt.out)) {
    fs::create_directories((scratch / rel).parent_path());
    fs::copy_file(opt.out / rel, scratch / rel);
  }
  RunOptions o = opt;
  o.out = scratch;
  std::ostringstream sink;
  const int rc = run_command(command, cfg, o, sink);
  int mismatches = 0;
  std::size_t checked = 0;
  for (const auto& rel : artifact_files(scratch)) {
    ++checked;
    const fs::path orig = opt.out / rel;
    if (!fs::exists(orig)) {
      out << "verify: missing " << rel.generic_string() << "\n";
      ++mismatches;
    } else if (content_hash(read_text_file(orig)) != content_hash(read_text_file(scratch / rel))) {
      out << "verify: differs " << rel.generic_string() << "\n";
      ++mismatches;
    }
  }
  fs::remove_all(scratch);
  out << "verify " << command << ": " << checked << " artifacts, " << mismatches << " mismatches\n";
  if (rc != kOk) return rc;
  return mismatches ? kPartialFailure : kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"advclaim: tabular fraud-detector training, adversarial attacks and reports"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<std::size_t> top_k;
  bool allow_mismatch = false;
  bool do_verify = false;
  app.add_option("command", command, "prepare | train | attack | gan-attack | eval | explain")
      ->required()
      ->check(CLI::IsMember({"prepare", "train", "attack", "gan-attack", "eval", "explain"}));
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_dir in the config)");
  app.add_option("--seed", seed, "global seed override");
  app.add_option("--model", model, "restrict to one configured model");
  app.add_option("--top-k", top_k, "explain: number of features to report");
  app.add_flag("--allow-mismatch", allow_mismatch, "accept models trained on a different snapshot");
  app.add_flag("--verify", do_verify, "re-run into a scratch copy and compare artifacts byte for byte");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    const ExperimentConfig cfg = load_config(config_path, seed);
    RunOptions opt;
    opt.out = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
    if (opt.out.empty()) throw ConfigError("no output directory: pass --out or set output_dir in the config");
    opt.allow_mismatch = allow_mismatch;
    opt.model = model;
    opt.top_k = top_k;
    fs::create_directories(opt.out);
    const DirLock lock(Layout{opt.out}.lock());
    return do_verify ? verify(command, cfg, opt, out) : run_command(command, cfg, opt, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const IngestionError& e) {
    err << "ingestion error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPartialFailure;
  }
}

}  // namespace advclaim::cli
