#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "advclaim/errors.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "test_support.hpp"

using namespace advclaim;
using namespace advclaim::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct CliResult {
  int rc = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "advclaim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {rc, out.str(), err.str()};
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const char* kSmallGan = R"({
  "seed": 7,
  "dataset": {"source": "synth", "synth": {"n_samples": 1000, "n_features": 12}},
  "ganrl": {"target": "gbt_level", "pretrain": {"epochs": 1}, "rl": {"episodes": 4, "es_space": "output"},
            "eval_batches": 5},
  "explain": {"n_explained": 5, "n_permutations": 20}
})";

// One experiment directory shared by the tests that only read from it.
struct Experiment {
  fs::path dir;
  fs::path config;
  fs::path out;
  CliResult prepare, train, attack, gan, eval, explain;
};

const Experiment& experiment() {
  static const Experiment e = [] {
    Experiment x;
    x.dir = test::scratch_dir("cli_main");
    x.config = x.dir / "config.json";
    x.out = x.dir / "run";
    write_file(x.config, kSmallGan);
    const std::string c = x.config.string(), o = x.out.string();
    x.prepare = run({"prepare", "--config", c, "--out", o});
    x.train = run({"train", "--config", c, "--out", o});
    x.attack = run({"attack", "--config", c, "--out", o});
    x.gan = run({"gan-attack", "--config", c, "--out", o});
    x.eval = run({"eval", "--config", c, "--out", o});
    x.explain = run({"explain", "--config", c, "--out", o, "--top-k", "4"});
    return x;
  }();
  return e;
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_THROWS_WITH_AS((void)parse_config(nlohmann::json::parse(R"({"dataset": {"synth": {"n_sample": 5}}})")),
                       doctest::Contains("dataset.synth.n_sample"), ConfigError);
  CHECK_THROWS_AS((void)parse_config(nlohmann::json::parse(R"({"seed": "x"})")), ConfigError);
  CHECK_THROWS_AS((void)parse_config(nlohmann::json::parse(
                      R"({"models": [{"name": "k", "family": "knn", "params": {"k": 4}}]})")),
                  ConfigError);
  CHECK_THROWS_AS((void)parse_config(nlohmann::json::parse(R"({"models": [{"name": "m", "family": "svm"}]})")),
                  ConfigError);
}

TEST_CASE("config defaults cover five models and four attacks") {
  const ExperimentConfig cfg = parse_config(nlohmann::json::object());
  CHECK(cfg.models.size() == 5);
  CHECK(cfg.attacks.size() == 4);
  const ModelSection* lstm = cfg.find_model("birecurrent");
  REQUIRE(lstm != nullptr);
  CHECK(lstm->birecurrent.hidden_size == 220);
  CHECK(lstm->birecurrent.epochs == 10);
  CHECK(lstm->birecurrent.dropout_rate == 0.5);
  CHECK(lstm->birecurrent.learning_rate == 1e-3);
  CHECK(cfg.attacks[0].epsilon_grid.size() == 10);
  CHECK(cfg.dataset.split.train == 0.75);

  const ExperimentConfig a = parse_config(nlohmann::json::object(), 11);
  const ExperimentConfig b = parse_config(nlohmann::json::object(), 11);
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(cfg));
  CHECK(a.dataset.synth.seed == 11);
}

TEST_CASE("exit codes for configuration and I/O problems") {
  const auto dir = test::scratch_dir("cli_codes");
  write_file(dir / "bad.json", R"({"bogus": 1})");
  const auto bad = run({"prepare", "--config", (dir / "bad.json").string(), "--out", (dir / "o").string()});
  CHECK(bad.rc == kConfigError);
  CHECK(bad.err.find("bogus") != std::string::npos);

  write_file(dir / "broken.json", "{not json");
  CHECK(run({"prepare", "--config", (dir / "broken.json").string(), "--out", (dir / "o").string()}).rc ==
        kConfigError);

  const std::string missing = (dir / "nope.json").string();
  const auto nofile = run({"prepare", "--config", missing, "--out", (dir / "o").string()});
  CHECK(nofile.rc == kIoError);
  CHECK(nofile.err.find(missing) != std::string::npos);

  write_file(dir / "csv.json", R"({"dataset": {"source": "csv", "csv": {"path": "/no/such/claims.csv"}}})");
  const auto nocsv = run({"prepare", "--config", (dir / "csv.json").string(), "--out", (dir / "o").string()});
  CHECK(nocsv.rc == kIoError);
  CHECK(nocsv.err.find("/no/such/claims.csv") != std::string::npos);

  CHECK(run({"frobnicate", "--config", missing}).rc == kConfigError);
  CHECK(run({"train", "--config", (dir / "bad.json").string(), "--out", (dir / "o").string()}).rc == kConfigError);
}

TEST_CASE("prepare is byte-identical across runs") {
  const auto dir = test::scratch_dir("cli_prepare");
  write_file(dir / "c.json", R"({"seed": 7})");
  const std::string c = (dir / "c.json").string();
  CHECK(run({"prepare", "--config", c, "--out", (dir / "a").string()}).rc == kOk);
  CHECK(run({"prepare", "--config", c, "--out", (dir / "b").string()}).rc == kOk);
  CHECK(slurp(dir / "a/snapshot/dataset.json") == slurp(dir / "b/snapshot/dataset.json"));
  const auto summary = nlohmann::json::parse(slurp(dir / "a/snapshot/summary.json"));
  CHECK(summary.dump().find("1000") != std::string::npos);
  CHECK(run({"prepare", "--config", c, "--out", (dir / "c").string(), "--seed", "8"}).rc == kOk);
  CHECK(slurp(dir / "a/snapshot/dataset.json") != slurp(dir / "c/snapshot/dataset.json"));

  const auto v = run({"prepare", "--config", c, "--out", (dir / "a").string(), "--verify"});
  CHECK(v.rc == kOk);
  CHECK(v.out.find(" 0 mismatches") != std::string::npos);
}

TEST_CASE("train writes five models with their hyperparameters and a report") {
  const auto& e = experiment();
  REQUIRE(e.prepare.rc == kOk);
  CHECK(e.train.rc == kOk);
  for (const char* name : {"birecurrent", "gbt_level", "gbt_leaf", "knn", "margin"})
    CHECK(fs::exists(e.out / "models" / (std::string(name) + ".json")));
  const auto lstm = nlohmann::json::parse(slurp(e.out / "models/birecurrent.json"));
  CHECK(lstm["hyperparameters"]["epochs"] == 10);
  CHECK(lstm["hyperparameters"]["learning_rate"] == 1e-3);
  CHECK(lstm["hyperparameters"]["hidden_size"] == 220);
  CHECK(lstm["hyperparameters"]["dropout_rate"] == 0.5);
  CHECK_FALSE(lstm["dataset_hash"].get<std::string>().empty());
  const auto report = nlohmann::json::parse(slurp(e.out / "reports/train.json"));
  CHECK(report["models"].size() == 5);
  for (const auto& row : report["models"]) CHECK(row["accuracy"].get<double>() >= 0.8);

  const auto manifest = nlohmann::json::parse(slurp(e.out / "manifest.json"));
  CHECK(manifest.dump().find("models/knn.json") != std::string::npos);
}

TEST_CASE("attack writes sweeps and marks non-differentiable rows") {
  const auto& e = experiment();
  CHECK(e.attack.rc == kOk);
  const auto report = nlohmann::json::parse(slurp(e.out / "reports/attack.json"));
  bool tree_fgsm_na = false;
  std::size_t lstm_rows = 0;
  for (const auto& row : report["attacks"]) {
    if (row["model_id"] == "gbt_level" && row["attack"] == "fgsm") {
      tree_fgsm_na = row["accuracy_after"] == "n/a" &&
                     row["note"].get<std::string>().find("NotDifferentiable") != std::string::npos;
    }
    if (row["model_id"] == "birecurrent") {
      ++lstm_rows;
      CHECK(row["epsilon"] == 0.5);
      CHECK(row["accuracy_after"].is_number());
    }
  }
  CHECK(tree_fgsm_na);
  CHECK(lstm_rows == 4);
  const std::string sweep = slurp(e.out / "attacks/birecurrent__pgd.csv");
  CHECK(line_count(sweep) == 11);
  CHECK(sweep.rfind("attack,epsilon,accuracy,flip_rate,seed\n", 0) == 0);
  CHECK_FALSE(fs::exists(e.out / "attacks/gbt_level__fgsm.csv"));
  CHECK(fs::exists(e.out / "attacks/gbt_level__noise.csv"));
}

TEST_CASE("gan-attack writes its artifacts through the gray-box handle") {
  const auto& e = experiment();
  CHECK(e.gan.rc == kOk);
  const fs::path g = e.out / "ganrl/gbt_level";
  for (const char* f : {"pretrain_losses.json", "traces.jsonl", "generator.json", "generated_batch.csv",
                        "query_audit.json"})
    CHECK(fs::exists(g / f));
  const auto audit = nlohmann::json::parse(slurp(g / "query_audit.json"));
  CHECK(audit["parameter_accesses"] == 0);
  CHECK(audit["queries"].get<std::size_t>() > 0);
  const auto report = nlohmann::json::parse(slurp(e.out / "reports/gan_attack_gbt_level.json"));
  CHECK(report["extra"]["asr_identity_holds"] == true);
  CHECK(report["extra"]["asr_sample_rate"].get<double>() ==
        doctest::Approx(1.0 - report["extra"]["target_accuracy_on_generated"].get<double>()));
  CHECK(line_count(slurp(g / "traces.jsonl")) == 4 * 16);
  CHECK(slurp(g / "generated_batch.csv").rfind("f00,", 0) == 0);
}

TEST_CASE("eval and explain") {
  const auto& e = experiment();
  CHECK(e.eval.rc == kOk);
  CHECK(fs::exists(e.out / "reports/eval.json"));
  CHECK(e.explain.rc == kOk);
  const std::string csv = slurp(e.out / "reports/importance_gbt_level.csv");
  CHECK(line_count(csv) == 5);  // header + top 4
}

TEST_CASE("every command is reproducible under --verify") {
  const auto& e = experiment();
  const std::string c = e.config.string(), o = e.out.string();
  for (const char* cmd : {"train", "attack", "gan-attack", "eval", "explain"}) {
    std::vector<std::string> args{cmd, "--config", c, "--out", o, "--verify"};
    if (std::string(cmd) == "explain") args.insert(args.end(), {"--top-k", "4"});
    const auto v = run(args);
    CHECK_MESSAGE(v.rc == kOk, cmd);
    CHECK_MESSAGE(v.out.find(" 0 mismatches") != std::string::npos, v.out);
  }
}

TEST_CASE("models trained on another snapshot are refused unless allowed") {
  const auto& e = experiment();
  const auto dir = test::scratch_dir("cli_mismatch");
  fs::create_directories(dir / "run");
  fs::copy(e.out / "models", dir / "run/models", fs::copy_options::recursive);
  write_file(dir / "c.json", R"({"dataset": {"synth": {"n_samples": 400}},
    "attacks": [{"name": "noise", "attack": "noise", "max_iters": 5}]})");
  const std::string c = (dir / "c.json").string(), o = (dir / "run").string();
  REQUIRE(run({"prepare", "--config", c, "--out", o}).rc == kOk);
  const auto refused = run({"attack", "--config", c, "--out", o, "--model", "margin"});
  CHECK(refused.rc == kConfigError);
  CHECK(refused.err.find("snapshot") != std::string::npos);
  const auto allowed = run({"attack", "--config", c, "--out", o, "--model", "margin", "--allow-mismatch"});
  CHECK(allowed.rc == kOk);
  CHECK(fs::exists(dir / "run/reports/attack_margin.json"));
}

TEST_CASE("a held lock blocks a second writer") {
  const auto dir = test::scratch_dir("cli_lock");
  write_file(dir / "c.json", "{}");
  fs::create_directories(dir / "run");
  write_file(dir / "run/.advclaim.lock", "12345\n");
  const auto r = run({"prepare", "--config", (dir / "c.json").string(), "--out", (dir / "run").string()});
  CHECK(r.rc == kIoError);
  CHECK(r.err.find("locked") != std::string::npos);
  fs::remove(dir / "run/.advclaim.lock");
  CHECK(run({"prepare", "--config", (dir / "c.json").string(), "--out", (dir / "run").string()}).rc == kOk);
  CHECK_FALSE(fs::exists(dir / "run/.advclaim.lock"));
}

TEST_CASE("missing snapshot is an I/O error") {
  const auto dir = test::scratch_dir("cli_nosnap");
  write_file(dir / "c.json", "{}");
  CHECK(run({"train", "--config", (dir / "c.json").string(), "--out", (dir / "run").string()}).rc == kIoError);
}
