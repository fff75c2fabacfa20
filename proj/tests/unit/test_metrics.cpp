#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "advclaim/errors.hpp"
#include "advclaim/metrics/metrics.hpp"
#include "advclaim/metrics/report.hpp"
#include "advclaim/numkit/rng.hpp"
#include "test_support.hpp"

using namespace advclaim;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

MetricsReport sample_report() {
  MetricsReport r;
  r.kind = "models";
  r.dataset_hash = "abc";
  r.config_hash = "def";
  r.seed = 7;
  const char* names[] = {"birecurrent", "gbt_level", "gbt_leaf", "knn", "margin"};
  for (int i = 0; i < 5; ++i)
    r.models.push_back({names[i], "family", ConfusionCounts{10u + static_cast<unsigned>(i), 3, 20, 4}, 7, ""});
  r.models.push_back({"empty", "margin", ConfusionCounts{0, 0, 5, 0}, 7, ""});
  r.attacks.push_back({"birecurrent", "fgsm", 0.5, 0.9, 0.3, 0.7, 7, ""});
  r.attacks.push_back({"gbt_level", "fgsm", 0.5, std::nullopt, std::nullopt, std::nullopt, 7, "model family 'x', y"});
  return r;
}

}  // namespace

TEST_CASE("confusion examples") {
  CHECK(confusion(std::vector<int>{1, 0}, std::vector<int>{1, 0}) == ConfusionCounts{1, 0, 1, 0});
  CHECK(confusion(std::vector<int>{1}, std::vector<int>{0}) == ConfusionCounts{0, 0, 0, 1});
  CHECK_THROWS_AS((void)confusion(std::vector<int>{1, 0}, std::vector<int>{1}), ShapeError);
  CHECK_THROWS_AS((void)confusion(std::vector<int>{2}, std::vector<int>{1}), EvaluationError);
}

TEST_CASE("confusion matches a per-element recount") {
  Rng rng(1000);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> y(1000), p(1000);
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = static_cast<int>(rng.uniform_index(2));
      p[i] = static_cast<int>(rng.uniform_index(2));
      if (y[i] == 1 && p[i] == 1) ++tp;
      if (y[i] == 0 && p[i] == 1) ++fp;
      if (y[i] == 0 && p[i] == 0) ++tn;
      if (y[i] == 1 && p[i] == 0) ++fn;
    }
    const ConfusionCounts c = confusion(y, p);
    CHECK(c == ConfusionCounts{tp, fp, tn, fn});
    CHECK(c.total() == 1000);
  }
}

TEST_CASE("accuracy examples") {
  CHECK(accuracy(ConfusionCounts{3, 1, 2, 2}) == 0.625);
  CHECK(accuracy(ConfusionCounts{4, 0, 5, 0}) == 1.0);
  CHECK(accuracy(ConfusionCounts{0, 1, 0, 1}) == 0.0);
  CHECK_THROWS_AS((void)accuracy(ConfusionCounts{}), UndefinedMetric);
}

TEST_CASE("f1 examples") {
  CHECK(f1(ConfusionCounts{2, 1, 0, 1}) == doctest::Approx(4.0 / 6.0));
  CHECK(f1(ConfusionCounts{5, 0, 3, 0}) == 1.0);
  CHECK(f1(ConfusionCounts{0, 0, 0, 3}) == 0.0);
  CHECK_THROWS_AS((void)f1(ConfusionCounts{0, 0, 9, 0}), UndefinedMetric);
  CHECK(f1_exact(ConfusionCounts{2, 1, 0, 1}) == Fraction::make(2, 3));
}

TEST_CASE("metric identities on random counts") {
  Rng rng(5);
  for (int rep = 0; rep < 500; ++rep) {
    ConfusionCounts c{rng.uniform_index(50), rng.uniform_index(50), rng.uniform_index(50), rng.uniform_index(50)};
    if (c.total() == 0) continue;
    const Fraction sum = accuracy_exact(c) + error_rate_exact(c);
    CHECK(sum == Fraction::make(1, 1));
    CHECK(accuracy(c) >= 0.0);
    CHECK(accuracy(c) <= 1.0);
    if (2 * c.tp + c.fp + c.fn > 0) {
      ConfusionCounts other = c;
      other.tn = rng.uniform_index(1000);
      CHECK(f1_exact(c) == f1_exact(other));
    }
  }
}

TEST_CASE("asr examples") {
  std::vector<std::vector<int>> one(1, std::vector<int>(100, 0));
  one[0][42] = 1;
  CHECK(asr(one, 0) == doctest::Approx(0.99));

  const std::vector<std::vector<int>> fail{{1, 1}, {1, 1, 1}};
  CHECK(asr(fail, 0, AsrMode::sample_rate) == 0.0);
  CHECK(asr(fail, 0, AsrMode::batch_all) == 0.0);

  const std::vector<std::vector<int>> two{{0, 0, 0, 0}, {0, 1, 0, 1}};
  CHECK(asr(two, 0, AsrMode::batch_all) == 0.5);
  CHECK(asr(two, 0, AsrMode::sample_rate) == 0.75);

  CHECK_THROWS_AS((void)asr({}, 0), UndefinedMetric);
  CHECK_THROWS_AS((void)asr({{}, {}}, 0), UndefinedMetric);
  CHECK(asr_mode_from_string("batch_all") == AsrMode::batch_all);
}

TEST_CASE("asr identities on random batches") {
  Rng rng(77);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::vector<int>> batches(1 + rng.uniform_index(10));
    std::vector<int> all_pred;
    const std::size_t width = 1 + rng.uniform_index(8);
    for (auto& b : batches) {
      b.resize(width);
      const double p = rng.uniform();
      for (int& v : b) {
        v = rng.uniform() < p ? 0 : 1;
        all_pred.push_back(v);
      }
    }
    CHECK(asr(batches, 0, AsrMode::batch_all) <= asr(batches, 0, AsrMode::sample_rate));
    // Every generated record carries fraud intent (label 1).
    const std::vector<int> truth(all_pred.size(), 1);
    const Fraction acc = accuracy_exact(confusion(truth, all_pred));
    CHECK(asr_exact(batches, 0) + acc == Fraction::make(1, 1));
  }
}

TEST_CASE("batch_all can exceed sample_rate when batch sizes differ") {
  // A small fully deceiving batch next to a large failing one.
  const std::vector<std::vector<int>> uneven{{0}, {1, 1, 1}};
  CHECK(asr(uneven, 0, AsrMode::batch_all) == 0.5);
  CHECK(asr(uneven, 0, AsrMode::sample_rate) == 0.25);
}

TEST_CASE("report files are deterministic and mark undefined values") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  CHECK(report_timestamp() == "2023-11-14T22:13:20Z");
  const auto dir = test::scratch_dir("report");
  const MetricsReport r = sample_report();
  emit_report(r, dir / "a");
  emit_report(r, dir / "b");
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  const auto j = nlohmann::json::parse(slurp(dir / "a.json"));
  CHECK(j["models"].size() == 6);
  CHECK(j["models"][5]["f1"] == "n/a");
  CHECK(j["attacks"][1]["accuracy_after"] == "n/a");
  CHECK(j["timestamp"] == "2023-11-14T22:13:20Z");

  const std::string csv = slurp(dir / "a.csv");
  CHECK(csv.rfind("section,model_id,family_or_attack,epsilon,accuracy,f1_or_accuracy_after,asr,seed,note\n", 0) == 0);
  CHECK(csv.find("\"model family 'x', y\"") != std::string::npos);
  CHECK(csv.find("attack,birecurrent,fgsm,0.5000,0.900000,0.300000,0.700000,7,") != std::string::npos);
  unsetenv("SOURCE_DATE_EPOCH");
  CHECK(report_timestamp() == "unset");

  {
    std::ofstream blocker(dir / "blocker");
  }
  CHECK_THROWS_AS(emit_report(r, dir / "blocker" / "report"), IoError);
}
