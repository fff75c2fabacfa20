#include "advclaim/data/snapshot.hpp"

#include <nlohmann/json.hpp>

#include "advclaim/errors.hpp"
#include "advclaim/io.hpp"
#include "advclaim/numkit/hash.hpp"

namespace advclaim {

using nlohmann::json;

Dataset prepare_csv_dataset(const RawTable& table, const EncodingOptions& options, const SplitRatios& ratios,
                            std::uint64_t seed) {
  Dataset ds;
  ds.labels = parse_labels(table);
  SplitResult sr = stratified_split(ds.labels, ratios, seed);
  ds.split = std::move(sr.indices);
  ds.warnings = std::move(sr.warnings);
  ds.meta = fit_encoding(table, ds.split.train, options);
  EncodeReport report;
  ds.features = encode(table, ds.meta, report);
  normalize_inplace(ds.features, ds.meta);
  ds.seed = seed;
  if (report.unknown_categories > 0) {
    ds.warnings.push_back("encoding: " + std::to_string(report.unknown_categories) +
                          " cells carried categories unseen in the train split (mapped to the unknown code)");
  }
  if (report.missing_categorical > 0) {
    ds.warnings.push_back("encoding: " + std::to_string(report.missing_categorical) +
                          " missing categorical cells mapped to the unknown code");
  }
  if (report.imputed_numeric > 0) {
    ds.warnings.push_back("encoding: " + std::to_string(report.imputed_numeric) +
                          " missing numeric cells imputed with the train median");
  }
  validate(ds);
  return ds;
}

std::string serialize_snapshot(const Dataset& ds) {
  json schema = json::array();
  for (const auto& m : ds.meta) {
    json col{{"name", m.name}, {"kind", to_string(m.kind)}, {"min", m.min}, {"max", m.max}};
    if (m.kind == FeatureKind::categorical) {
      col["categories"] = m.categories;
    } else {
      col["median"] = m.median;
    }
    schema.push_back(std::move(col));
  }
  json rows = json::array();
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    const auto r = ds.features.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  json doc{{"format", "advclaim-snapshot"},
           {"version", 1},
           {"source", ds.source},
           {"seed", ds.seed},
           {"n_samples", ds.n_samples()},
           {"n_features", ds.n_features()},
           {"schema", std::move(schema)},
           {"split", {{"train", ds.split.train}, {"val", ds.split.val}, {"test", ds.split.test}}},
           {"warnings", ds.warnings},
           {"labels", ds.labels},
           {"features", std::move(rows)}};
  return doc.dump(1) + "\n";
}

Dataset parse_snapshot(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("snapshot is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "advclaim-snapshot") throw SchemaError("not an advclaim snapshot");
    Dataset ds;
    ds.source = doc.at("source").get<std::string>();
    ds.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& col : doc.at("schema")) {
      FeatureMeta m;
      m.name = col.at("name").get<std::string>();
      m.kind = feature_kind_from_string(col.at("kind").get<std::string>());
      m.min = col.at("min").get<double>();
      m.max = col.at("max").get<double>();
      if (m.kind == FeatureKind::categorical) {
        m.categories = col.at("categories").get<std::vector<std::string>>();
      } else {
        m.median = col.at("median").get<double>();
      }
      ds.meta.push_back(std::move(m));
    }
    const auto n = doc.at("n_samples").get<std::size_t>();
    const auto f = doc.at("n_features").get<std::size_t>();
    ds.features = Matrix(n, f);
    const auto& rows = doc.at("features");
    if (rows.size() != n) throw SchemaError("snapshot feature rows do not match n_samples");
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rows[i].get<std::vector<double>>();
      if (r.size() != f) throw SchemaError("snapshot row " + std::to_string(i) + " has wrong width");
      std::copy(r.begin(), r.end(), ds.features.row(i).begin());
    }
    ds.labels = doc.at("labels").get<std::vector<int>>();
    ds.split.train = doc.at("split").at("train").get<std::vector<std::size_t>>();
    ds.split.val = doc.at("split").at("val").get<std::vector<std::size_t>>();
    ds.split.test = doc.at("split").at("test").get<std::vector<std::size_t>>();
    ds.warnings = doc.at("warnings").get<std::vector<std::string>>();
    validate(ds);
    return ds;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed snapshot: ") + e.what());
  }
}

std::string snapshot_hash(const Dataset& ds) { return content_hash(serialize_snapshot(ds)); }

std::string save_snapshot(const Dataset& ds, const std::filesystem::path& path) {
  const std::string text = serialize_snapshot(ds);
  write_text_file(path, text);
  return content_hash(text);
}

LoadedSnapshot load_snapshot(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return {parse_snapshot(text), content_hash(text)};
}

}  // namespace advclaim
