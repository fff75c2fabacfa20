#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "advclaim/errors.hpp"
#include "advclaim/io.hpp"
#include "advclaim/numkit/hash.hpp"

namespace advclaim::cli {

namespace {

using json = nlohmann::json;

// Reads keys from one object and remembers which were consumed, so finish()
// can reject the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  bool read(const std::string& key, T& out) {
    if (!j_.contains(key)) return false;
    used_.insert(key);
    try {
      out = convert<T>(j_.at(key));
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
    return true;
  }

  const json* child(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError("unknown configuration key '" + path_ + "." + item.key() + "'");
    }
  }

 private:
  template <typename T>
  static T convert(const json& v) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw json::type_error::create(302, "bool expected", v);
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
        throw json::type_error::create(302, "integer expected", v);
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw json::type_error::create(302, "number expected", v);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw json::type_error::create(302, "string expected", v);
    }
    return v.get<T>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void check_name(const std::string& name, const std::string& where) {
  if (name.empty()) throw ConfigError(where + ": name must not be empty");
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      throw ConfigError(where + ": name '" + name + "' may only contain letters, digits, '_' and '-'");
    }
  }
}

void parse_dataset(const json& j, DatasetSection& d, std::uint64_t seed, bool seed_forced) {
  Section s(j, "dataset");
  s.read("source", d.source);
  if (d.source != "synth" && d.source != "csv") throw ConfigError("dataset.source must be 'synth' or 'csv'");
  if (!s.read("seed", d.seed) || seed_forced) d.seed = seed;
  if (const json* sj = s.child("synth")) {
    Section ss(*sj, "dataset.synth");
    ss.read("n_samples", d.synth.n_samples);
    ss.read("n_features", d.synth.n_features);
    ss.read("class_separation", d.synth.class_separation);
    ss.read("fraud_fraction", d.synth.fraud_fraction);
    ss.read("noise_std", d.synth.noise_std);
    ss.finish();
  }
  d.synth.seed = d.seed;
  validate(d.synth);
  if (const json* cj = s.child("csv")) {
    Section cs(*cj, "dataset.csv");
    cs.read("path", d.csv.path);
    cs.read("label_column", d.csv.label_column);
    std::string delim(1, d.csv.delimiter);
    if (cs.read("delimiter", delim)) {
      if (delim.size() != 1) throw ConfigError("dataset.csv.delimiter must be a single character");
      d.csv.delimiter = delim[0];
    }
    cs.read("missing_tokens", d.csv.missing_tokens);
    cs.read("drop_columns", d.csv.drop_columns);
    cs.read("categorical", d.csv.categorical);
    cs.read("numeric", d.csv.numeric);
    cs.finish();
  }
  if (d.source == "csv" && d.csv.path.empty()) throw ConfigError("dataset.csv.path is required for a csv source");
  if (const json* pj = s.child("split")) {
    Section ps(*pj, "dataset.split");
    ps.read("train", d.split.train);
    ps.read("val", d.split.val);
    ps.read("test", d.split.test);
    ps.finish();
  }
  if (std::abs(d.split.train + d.split.val + d.split.test - 1.0) > 1e-9 || d.split.train <= 0.0 ||
      d.split.val < 0.0 || d.split.test <= 0.0) {
    throw ConfigError("dataset.split ratios must be positive and sum to 1");
  }
  s.finish();
}

ModelSection default_model(const std::string& name, const std::string& family) {
  ModelSection m;
  m.name = name;
  m.family = family;
  if (name == "gbt_leaf") {
    m.tree.growth = TreeGrowth::leaf_wise;
    m.tree.histogram_bins = 32;
  }
  return m;
}

std::vector<ModelSection> default_models() {
  return {default_model("birecurrent", "birecurrent"), default_model("gbt_level", "tree_ensemble"),
          default_model("gbt_leaf", "tree_ensemble"), default_model("knn", "knn"), default_model("margin", "margin")};
}

ModelSection parse_model(const json& j, std::size_t idx, std::uint64_t seed, bool seed_forced) {
  const std::string where = "models[" + std::to_string(idx) + "]";
  Section s(j, where);
  ModelSection m;
  s.read("name", m.name);
  s.read("family", m.family);
  check_name(m.name, where);
  const json* pj = s.child("params");
  const json empty = json::object();
  Section p(pj ? *pj : empty, where + ".params");
  std::uint64_t mseed = seed;
  if (!p.read("seed", mseed) || seed_forced) mseed = seed;
  if (m.family == "birecurrent") {
    auto& b = m.birecurrent;
    p.read("hidden_size", b.hidden_size);
    p.read("timesteps", b.timesteps);
    p.read("dropout_rate", b.dropout_rate);
    p.read("epochs", b.epochs);
    p.read("batch_size", b.batch_size);
    p.read("learning_rate", b.learning_rate);
    b.seed = mseed;
    if (b.hidden_size == 0 || b.timesteps == 0 || b.batch_size == 0) {
      throw ConfigError(where + ": hidden_size, timesteps and batch_size must be >= 1");
    }
    if (!(b.dropout_rate >= 0.0 && b.dropout_rate < 1.0)) throw ConfigError(where + ": dropout_rate must be in [0,1)");
    if (!(b.learning_rate > 0.0)) throw ConfigError(where + ": learning_rate must be > 0");
  } else if (m.family == "tree_ensemble") {
    auto& t = m.tree;
    p.read("n_trees", t.n_trees);
    p.read("max_leaves", t.max_leaves);
    p.read("lambda_reg", t.lambda_reg);
    p.read("shrinkage", t.shrinkage);
    p.read("min_child_hessian", t.min_child_hessian);
    std::string growth = to_string(t.growth);
    if (p.read("growth", growth)) t.growth = tree_growth_from_string(growth);
    p.read("histogram_bins", t.histogram_bins);
    if (t.n_trees < 1 || t.max_leaves < 2) throw ConfigError(where + ": n_trees >= 1 and max_leaves >= 2 required");
    if (t.lambda_reg < 0.0 || !(t.shrinkage > 0.0)) throw ConfigError(where + ": invalid lambda_reg or shrinkage");
  } else if (m.family == "knn") {
    p.read("k", m.k);
    if (m.k % 2 == 0) throw ConfigError(where + ": k must be odd");
  } else if (m.family == "margin") {
    p.read("c", m.margin.c);
    p.read("epochs", m.margin.epochs);
    p.read("learning_rate", m.margin.learning_rate);
    m.margin.seed = mseed;
    if (!(m.margin.c > 0.0) || !(m.margin.learning_rate > 0.0)) {
      throw ConfigError(where + ": c and learning_rate must be > 0");
    }
  } else {
    throw ConfigError(where + ": unknown family '" + m.family + "'");
  }
  p.finish();
  s.finish();
  return m;
}

AttackSection default_attack(AttackKind kind) {
  AttackSection a;
  a.name = to_string(kind);
  a.kind = kind;
  a.epsilon_grid = default_epsilon_grid();
  return a;
}

AttackSection parse_attack(const json& j, std::size_t idx, std::uint64_t seed, bool seed_forced) {
  const std::string where = "attacks[" + std::to_string(idx) + "]";
  Section s(j, where);
  std::string kind;
  if (!s.read("attack", kind)) throw ConfigError(where + ".attack is required");
  AttackSection a = default_attack(attack_kind_from_string(kind));
  s.read("name", a.name);
  check_name(a.name, where);
  s.read("epsilon_grid", a.epsilon_grid);
  s.read("report_epsilon", a.report_epsilon);
  auto& c = a.config;
  s.read("steps", c.steps);
  s.read("step_size", c.step_size);
  s.read("random_start", c.random_start);
  s.read("max_iters", c.max_iters);
  std::string mode = to_string(c.noise_mode);
  if (s.read("noise_mode", mode)) c.noise_mode = noise_acceptance_from_string(mode);
  if (!s.read("seed", c.seed) || seed_forced) c.seed = seed;
  s.finish();
  if (a.epsilon_grid.empty()) throw ConfigError(where + ".epsilon_grid must not be empty");
  for (std::size_t i = 0; i < a.epsilon_grid.size(); ++i) {
    const double e = a.epsilon_grid[i];
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError(where + ".epsilon_grid values must lie in [0, 1]");
    if (i > 0 && !(e > a.epsilon_grid[i - 1])) throw ConfigError(where + ".epsilon_grid must be strictly ascending");
  }
  c.epsilon = a.report_epsilon;
  validate(c);
  return a;
}

void parse_ganrl(const json& j, GanrlSection& g, std::uint64_t seed, bool seed_forced) {
  Section s(j, "ganrl");
  s.read("target", g.target);
  s.read("latent_dim", g.latent_dim);
  s.read("eval_batches", g.eval_batches);
  s.read("eval_batch_size", g.eval_batch_size);
  s.read("query_budget", g.query_budget);
  std::uint64_t gseed = seed;
  if (!s.read("seed", gseed) || seed_forced) gseed = seed;
  if (const json* pj = s.child("pretrain")) {
    Section p(*pj, "ganrl.pretrain");
    p.read("epochs", g.pretrain.epochs);
    p.read("batch_size", g.pretrain.batch_size);
    p.read("gen_lr", g.pretrain.gen_lr);
    p.read("disc_lr", g.pretrain.disc_lr);
    p.read("beta1", g.pretrain.beta1);
    p.read("non_saturating", g.pretrain.non_saturating);
    p.finish();
  }
  if (const json* rj = s.child("rl")) {
    Section r(*rj, "ganrl.rl");
    r.read("batch", g.rl.batch);
    r.read("horizon", g.rl.horizon);
    r.read("alpha", g.rl.alpha);
    r.read("gamma", g.rl.gamma);
    r.read("episodes", g.rl.episodes);
    r.read("y_target", g.rl.y_target);
    r.read("generator_lr", g.rl.generator_lr);
    r.read("es_samples", g.rl.es_samples);
    r.read("es_sigma", g.rl.es_sigma);
    std::string space = to_string(g.rl.es_space);
    if (r.read("es_space", space)) g.rl.es_space = es_space_from_string(space);
    r.read("anchor", g.rl.anchor);
    r.read("anchor_candidates", g.rl.anchor_candidates);
    r.finish();
  }
  s.finish();
  g.pretrain.seed = gseed;
  g.rl.seed = gseed;
  g.rl.latent = g.latent_dim;
  if (g.latent_dim == 0) throw ConfigError("ganrl.latent_dim must be >= 1");
  if (g.pretrain.batch_size == 0) throw ConfigError("ganrl.pretrain.batch_size must be >= 1");
  if (g.eval_batches == 0 || g.eval_batch_size == 0) throw ConfigError("ganrl eval batches must be non-empty");
  validate(g.rl);
}

void parse_explain(const json& j, ExplainSection& e, std::uint64_t seed, bool seed_forced) {
  Section s(j, "explain");
  s.read("model", e.model);
  s.read("n_explained", e.n_explained);
  s.read("n_permutations", e.n_permutations);
  s.read("background_size", e.background_size);
  s.read("top_k", e.top_k);
  if (!s.read("seed", e.seed) || seed_forced) e.seed = seed;
  s.finish();
  if (e.n_permutations == 0 || e.background_size == 0) {
    throw ConfigError("explain: n_permutations and background_size must be >= 1");
  }
}

}  // namespace

const ModelSection* ExperimentConfig::find_model(const std::string& name) const {
  for (const auto& m : models) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

ExperimentConfig parse_config(const json& doc, std::optional<std::uint64_t> seed_override) {
  ExperimentConfig cfg;
  Section s(doc, "config");
  s.read("seed", cfg.seed);
  const bool forced = seed_override.has_value();
  if (forced) cfg.seed = *seed_override;
  s.read("output_dir", cfg.output_dir);

  const json empty = json::object();
  const json* dj = s.child("dataset");
  parse_dataset(dj ? *dj : empty, cfg.dataset, cfg.seed, forced);

  if (const json* mj = s.child("models")) {
    if (!mj->is_array() || mj->empty()) throw ConfigError("models must be a non-empty array");
    for (std::size_t i = 0; i < mj->size(); ++i) cfg.models.push_back(parse_model((*mj)[i], i, cfg.seed, forced));
  } else {
    cfg.models = default_models();
    for (auto& m : cfg.models) {
      m.birecurrent.seed = cfg.seed;
      m.margin.seed = cfg.seed;
    }
  }
  std::set<std::string> names;
  for (const auto& m : cfg.models) {
    if (!names.insert(m.name).second) throw ConfigError("duplicate model name '" + m.name + "'");
  }

  if (const json* aj = s.child("attacks")) {
    if (!aj->is_array()) throw ConfigError("attacks must be an array");
    for (std::size_t i = 0; i < aj->size(); ++i) cfg.attacks.push_back(parse_attack((*aj)[i], i, cfg.seed, forced));
  } else {
    for (AttackKind k : {AttackKind::fgsm, AttackKind::bim, AttackKind::pgd, AttackKind::noise}) {
      cfg.attacks.push_back(default_attack(k));
      cfg.attacks.back().config.seed = cfg.seed;
      cfg.attacks.back().config.epsilon = cfg.attacks.back().report_epsilon;
    }
  }
  names.clear();
  for (const auto& a : cfg.attacks) {
    if (!names.insert(a.name).second) throw ConfigError("duplicate attack name '" + a.name + "'");
  }

  const json* gj = s.child("ganrl");
  parse_ganrl(gj ? *gj : empty, cfg.ganrl, cfg.seed, forced);
  if (cfg.ganrl.target.empty()) {
    for (const auto& m : cfg.models) {
      if (m.family == "tree_ensemble") {
        cfg.ganrl.target = m.name;
        break;
      }
    }
    if (cfg.ganrl.target.empty()) cfg.ganrl.target = cfg.models.front().name;
  }
  if (!cfg.find_model(cfg.ganrl.target)) throw ConfigError("ganrl.target '" + cfg.ganrl.target + "' is not a model");

  if (const json* mj = s.child("metrics")) {
    Section ms(*mj, "metrics");
    std::string mode = to_string(cfg.asr_mode);
    if (ms.read("asr_mode", mode)) cfg.asr_mode = asr_mode_from_string(mode);
    ms.finish();
  }

  const json* ej = s.child("explain");
  parse_explain(ej ? *ej : empty, cfg.explain, cfg.seed, forced);
  if (cfg.explain.model.empty()) cfg.explain.model = cfg.ganrl.target;
  if (!cfg.find_model(cfg.explain.model)) throw ConfigError("explain.model '" + cfg.explain.model + "' is not a model");

  s.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc, seed_override);
}

json config_to_json(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  json models = json::array();
  for (const auto& m : cfg.models) {
    json p;
    if (m.family == "birecurrent") {
      const auto& b = m.birecurrent;
      p = {{"hidden_size", b.hidden_size}, {"timesteps", b.timesteps},   {"dropout_rate", b.dropout_rate},
           {"epochs", b.epochs},           {"batch_size", b.batch_size}, {"learning_rate", b.learning_rate},
           {"seed", b.seed}};
    } else if (m.family == "tree_ensemble") {
      const auto& t = m.tree;
      p = {{"n_trees", t.n_trees},
           {"max_leaves", t.max_leaves},
           {"lambda_reg", t.lambda_reg},
           {"shrinkage", t.shrinkage},
           {"min_child_hessian", t.min_child_hessian},
           {"growth", to_string(t.growth)},
           {"histogram_bins", t.histogram_bins}};
    } else if (m.family == "knn") {
      p = {{"k", m.k}};
    } else {
      p = {{"c", m.margin.c},
           {"epochs", m.margin.epochs},
           {"learning_rate", m.margin.learning_rate},
           {"seed", m.margin.seed}};
    }
    models.push_back({{"name", m.name}, {"family", m.family}, {"params", p}});
  }
  json attacks = json::array();
  for (const auto& a : cfg.attacks) {
    const auto& c = a.config;
    attacks.push_back({{"name", a.name},
                       {"attack", to_string(a.kind)},
                       {"epsilon_grid", a.epsilon_grid},
                       {"report_epsilon", a.report_epsilon},
                       {"steps", c.steps},
                       {"step_size", c.step_size},
                       {"random_start", c.random_start},
                       {"max_iters", c.max_iters},
                       {"noise_mode", to_string(c.noise_mode)},
                       {"seed", c.seed}});
  }
  const auto& g = cfg.ganrl;
  const auto& r = g.rl;
  return {
      {"seed", cfg.seed},
      {"dataset",
       {{"source", d.source},
        {"seed", d.seed},
        {"synth",
         {{"n_samples", d.synth.n_samples},
          {"n_features", d.synth.n_features},
          {"class_separation", d.synth.class_separation},
          {"fraud_fraction", d.synth.fraud_fraction},
          {"noise_std", d.synth.noise_std}}},
        {"csv",
         {{"path", d.csv.path},
          {"label_column", d.csv.label_column},
          {"delimiter", std::string(1, d.csv.delimiter)},
          {"missing_tokens", d.csv.missing_tokens},
          {"drop_columns", d.csv.drop_columns},
          {"categorical", d.csv.categorical},
          {"numeric", d.csv.numeric}}},
        {"split", {{"train", d.split.train}, {"val", d.split.val}, {"test", d.split.test}}}}},
      {"models", models},
      {"attacks", attacks},
      {"ganrl",
       {{"target", g.target},
        {"latent_dim", g.latent_dim},
        {"eval_batches", g.eval_batches},
        {"eval_batch_size", g.eval_batch_size},
        {"query_budget", g.query_budget},
        {"seed", r.seed},
        {"pretrain",
         {{"epochs", g.pretrain.epochs},
          {"batch_size", g.pretrain.batch_size},
          {"gen_lr", g.pretrain.gen_lr},
          {"disc_lr", g.pretrain.disc_lr},
          {"beta1", g.pretrain.beta1},
          {"non_saturating", g.pretrain.non_saturating}}},
        {"rl",
         {{"batch", r.batch},
          {"horizon", r.horizon},
          {"alpha", r.alpha},
          {"gamma", r.gamma},
          {"episodes", r.episodes},
          {"y_target", r.y_target},
          {"generator_lr", r.generator_lr},
          {"es_samples", r.es_samples},
          {"es_sigma", r.es_sigma},
          {"es_space", to_string(r.es_space)},
          {"anchor", r.anchor},
          {"anchor_candidates", r.anchor_candidates}}}}},
      {"metrics", {{"asr_mode", to_string(cfg.asr_mode)}}},
      {"explain",
       {{"model", cfg.explain.model},
        {"n_explained", cfg.explain.n_explained},
        {"n_permutations", cfg.explain.n_permutations},
        {"background_size", cfg.explain.background_size},
        {"top_k", cfg.explain.top_k},
        {"seed", cfg.explain.seed}}}};
}

std::string config_hash(const ExperimentConfig& cfg) { return content_hash(config_to_json(cfg).dump()); }

}  // namespace advclaim::cli
