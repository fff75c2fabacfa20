#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "advclaim/data/csv.hpp"
#include "advclaim/data/encoding.hpp"
#include "advclaim/data/snapshot.hpp"
#include "advclaim/data/split.hpp"
#include "advclaim/data/synth.hpp"
#include "advclaim/errors.hpp"
#include "advclaim/models/margin.hpp"
#include "advclaim/numkit/rng.hpp"
#include "test_support.hpp"

using namespace advclaim;

namespace {

RawTable table_from(const std::string& text, const std::string& label = "fraud_reported") {
  std::istringstream in(text);
  return parse_csv(in, label);
}

double hit_rate(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

}  // namespace

TEST_CASE("csv with header and three rows") {
  const RawTable t = table_from("a,b,fraud_reported\n1,x,Y\n2,,N\n3,z,N\n");
  CHECK(t.rows.size() == 3);
  CHECK(t.columns.size() == 3);
  CHECK(t.label_index == 2);
  CHECK_FALSE(t.rows[1][1].has_value());
  CHECK(parse_labels(t) == std::vector<int>{1, 0, 0});
}

TEST_CASE("csv quoted fields keep delimiters") {
  const RawTable t = table_from("a,fraud_reported\n\"x, y\",1\n\"say \"\"hi\"\"\",0\n");
  CHECK(*t.rows[0][0] == "x, y");
  CHECK(*t.rows[1][0] == "say \"hi\"");
}

TEST_CASE("ragged row error names the row") {
  try {
    (void)table_from("a,b,fraud_reported\n1,2,Y\n1,2\n");
    FAIL("expected IngestionError");
  } catch (const IngestionError& e) {
    CHECK(e.row() == 2);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("missing label column and missing file") {
  CHECK_THROWS_AS((void)table_from("a,b\n1,2\n"), IngestionError);
  CHECK_THROWS_AS((void)load_csv("/nonexistent/claims.csv", "fraud_reported"), IngestionError);
  const RawTable t = table_from("a,fraud_reported\n1,\n");
  CHECK_THROWS_AS((void)parse_labels(t), IngestionError);
}

TEST_CASE("label column name is configurable") {
  const RawTable t = table_from("x,is_fraud\n0.5,true\n0.1,no\n", "is_fraud");
  CHECK(parse_labels(t) == std::vector<int>{1, 0});
}

TEST_CASE("categorical encoding is lexicographic") {
  const RawTable t = table_from("c,fraud_reported\nb,1\na,0\nb,0\n");
  const auto meta = fit_encoding(t, all_rows(3));
  REQUIRE(meta.size() == 1);
  CHECK(meta[0].kind == FeatureKind::categorical);
  CHECK(meta[0].categories == std::vector<std::string>{"a", "b"});
  CHECK(category_code(meta[0], "a") == 0);
  CHECK(category_code(meta[0], "b") == 1);
}

TEST_CASE("numeric column records fit-row min and max") {
  const RawTable t = table_from("n,fraud_reported\n0,1\n5,0\n10,0\n");
  const auto meta = fit_encoding(t, all_rows(3));
  CHECK(meta[0].kind == FeatureKind::numeric);
  CHECK(meta[0].min == 0.0);
  CHECK(meta[0].max == 10.0);
  EncodeReport rep;
  Matrix raw = encode(t, meta, rep);
  normalize_inplace(raw, meta);
  CHECK(raw == Matrix{{0.0}, {0.5}, {1.0}});
}

TEST_CASE("unseen category maps to the reserved code and is counted") {
  const RawTable fit = table_from("c,fraud_reported\na,1\nb,0\n");
  const auto meta = fit_encoding(fit, all_rows(2));
  const RawTable later = table_from("c,fraud_reported\na,1\nq,0\n");
  EncodeReport rep;
  Matrix raw = encode(later, meta, rep);
  CHECK(rep.unknown_categories == 1);
  CHECK(raw(1, 0) == static_cast<double>(meta[0].unknown_code()));
  normalize_inplace(raw, meta);
  CHECK(raw(1, 0) == 1.0);
  CHECK(decode_value(meta[0], raw(1, 0)) == "<unknown>");
}

TEST_CASE("all-missing fit column is a schema error") {
  const RawTable t = table_from("c,d,fraud_reported\n,1,1\n,2,0\n");
  CHECK_THROWS_AS((void)fit_encoding(t, all_rows(2)), SchemaError);
}

TEST_CASE("missing numeric cells take the fit median") {
  const RawTable t = table_from("n,fraud_reported\n1,1\n3,0\n100,0\n,1\n");
  const std::vector<std::size_t> fit{0, 1, 2};
  const auto meta = fit_encoding(t, fit);
  EncodeReport rep;
  const Matrix raw = encode(t, meta, rep);
  CHECK(raw(3, 0) == 3.0);
  CHECK(rep.imputed_numeric == 1);
}

TEST_CASE("normalization: constant column and clipping") {
  FeatureMeta constant{"k", FeatureKind::numeric, {}, 7.0, 7.0, 7.0};
  CHECK(normalize_value(constant, 7.0) == 0.0);
  FeatureMeta m{"n", FeatureKind::numeric, {}, 0.0, 10.0, 5.0};
  CHECK(normalize_value(m, 15.0) == 1.0);
  CHECK(normalize_value(m, -3.0) == 0.0);
  Matrix raw{{7.0}, {7.0}};
  normalize_inplace(raw, {constant});
  CHECK(raw == Matrix{{0.0}, {0.0}});
}

TEST_CASE("categorical encode/decode round trip for seen categories") {
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    std::string csv = "c,fraud_reported\n";
    std::vector<std::string> values;
    const std::size_t n = 2 + rng.uniform_index(20);
    for (std::size_t i = 0; i < n; ++i) {
      std::string v = "cat" + std::to_string(rng.uniform_index(6));
      values.push_back(v);
      csv += v + "," + std::to_string(i % 2) + "\n";
    }
    const RawTable t = table_from(csv);
    const auto meta = fit_encoding(t, all_rows(n));
    EncodeReport er;
    Matrix x = encode(t, meta, er);
    normalize_inplace(x, meta);
    for (std::size_t i = 0; i < n; ++i) CHECK(decode_value(meta[0], x(i, 0)) == values[i]);
  }
}

TEST_CASE("split sizes follow the floor rule") {
  std::vector<int> labels(1000, 0);
  for (std::size_t i = 0; i < 250; ++i) labels[i] = 1;
  const auto r = stratified_split(labels, {}, 3);
  CHECK(r.indices.train.size() == 750);
  CHECK(r.indices.val.size() == 50);
  CHECK(r.indices.test.size() == 200);

  const std::vector<int> small{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto s = stratified_split(small, {}, 3);
  CHECK(s.indices.train.size() == 8);
  CHECK(s.indices.val.size() == 0);
  CHECK(s.indices.test.size() == 2);
  CHECK_FALSE(s.warnings.empty());

  const auto again = stratified_split(small, {}, 3);
  CHECK(again.indices.train == s.indices.train);
  CHECK(again.indices.test == s.indices.test);
  CHECK_THROWS_AS((void)stratified_split(small, {0.5, 0.5, 0.5}, 3), ConfigError);
}

TEST_CASE("split property: disjoint, exhaustive, stratified within one sample") {
  Rng gen(2024);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 10 + gen.uniform_index(500);
    const double p = gen.uniform(0.05, 0.95);
    std::vector<int> labels(n);
    for (int& y : labels) y = gen.uniform() < p ? 1 : 0;
    const auto r = stratified_split(labels, {}, gen.next_u64());
    std::vector<int> seen(n, 0);
    for (const auto* part : {&r.indices.train, &r.indices.val, &r.indices.test})
      for (std::size_t i : *part) seen[i]++;
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    CHECK(r.indices.val.size() == static_cast<std::size_t>(std::floor(n * 0.05)));
    CHECK(r.indices.test.size() == static_cast<std::size_t>(std::floor(n * 0.20)));

    const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const auto count_pos = [&](const std::vector<std::size_t>& idx) {
      return static_cast<double>(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return labels[i] == 1; }));
    };
    const double fp = pos / static_cast<double>(n);
    CHECK(std::abs(count_pos(r.indices.test) - fp * static_cast<double>(r.indices.test.size())) <= 1.0 + 1e-9);
    CHECK(std::abs(count_pos(r.indices.val) - fp * static_cast<double>(r.indices.val.size())) <= 1.0 + 1e-9);
  }
}

TEST_CASE("prepare_csv_dataset fits normalization on train rows only") {
  std::string csv = "v,fraud_reported\n";
  for (int i = 0; i < 40; ++i) csv += std::to_string(i) + "," + (i % 2 ? "Y" : "N") + "\n";
  const RawTable t = table_from(csv);
  const Dataset ds = prepare_csv_dataset(t, {}, {}, 5);
  validate(ds);
  double lo = 1e9, hi = -1e9;
  for (std::size_t i : ds.split.train) {
    lo = std::min(lo, ds.features(i, 0));
    hi = std::max(hi, ds.features(i, 0));
  }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
  double train_max_raw = -1;
  for (std::size_t i : ds.split.train) train_max_raw = std::max(train_max_raw, std::stod(*t.rows[i][0]));
  CHECK(ds.meta[0].max == train_max_raw);
}

TEST_CASE("synth determinism and domain") {
  SynthConfig cfg;
  const Dataset a = synth_generate(cfg);
  const Dataset b = synth_generate(cfg);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  validate(a);
  CHECK(serialize_snapshot(a) == serialize_snapshot(b));
  CHECK_THROWS_AS((void)synth_generate(SynthConfig{5, 12, 2.0, 0.25, 7, 0.1}), ConfigError);
  CHECK_THROWS_AS((void)synth_generate(SynthConfig{100, 1, 2.0, 0.25, 7, 0.1}), ConfigError);
}

TEST_CASE("synth: zero separation leaves a linear model at chance") {
  SynthConfig cfg;
  cfg.class_separation = 0.0;
  cfg.fraud_fraction = 0.5;
  const Dataset ds = synth_generate(cfg);
  const MarginModel m = train_margin(ds, MarginParams{1.0, 200, 0.01, 7});
  const Matrix xt = ds.part_features(SplitPart::test);
  const double acc = hit_rate(ds.part_labels(SplitPart::test), m.predict_label(xt));
  CHECK(std::abs(acc - 0.5) <= 0.05);
}

TEST_CASE("synth: large separation is linearly separable") {
  SynthConfig cfg;
  cfg.class_separation = 4.0;
  const Dataset ds = synth_generate(cfg);
  const MarginModel m = train_margin(ds, MarginParams{1.0, 200, 0.01, 7});
  const Matrix xt = ds.part_features(SplitPart::test);
  CHECK(hit_rate(ds.part_labels(SplitPart::test), m.predict_label(xt)) >= 0.95);
}

TEST_CASE("snapshot round trip preserves everything") {
  SynthConfig cfg;
  cfg.n_samples = 60;
  cfg.n_features = 4;
  const Dataset ds = synth_generate(cfg);
  const auto dir = test::scratch_dir("snapshot_rt");
  const std::string h = save_snapshot(ds, dir / "ds.json");
  const LoadedSnapshot back = load_snapshot(dir / "ds.json");
  CHECK(back.hash == h);
  CHECK(back.dataset.features == ds.features);
  CHECK(back.dataset.labels == ds.labels);
  CHECK(back.dataset.split.test == ds.split.test);
  CHECK(back.dataset.feature_names() == ds.feature_names());
  CHECK(serialize_snapshot(back.dataset) == serialize_snapshot(ds));
  CHECK_THROWS_AS((void)parse_snapshot("{\"format\":\"other\"}"), SchemaError);
  CHECK_THROWS_AS((void)parse_snapshot("not json"), SchemaError);
}

TEST_CASE("validate catches broken invariants") {
  SynthConfig cfg;
  cfg.n_samples = 20;
  cfg.n_features = 2;
  Dataset ds = synth_generate(cfg);
  Dataset overlap = ds;
  overlap.split.val.push_back(overlap.split.train.front());
  CHECK_THROWS_AS(validate(overlap), SchemaError);
  Dataset bad_value = ds;
  bad_value.features(0, 0) = 1.5;
  CHECK_THROWS_AS(validate(bad_value), SchemaError);
}
