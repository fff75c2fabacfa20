#include "advclaim/metrics/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "advclaim/data/csv.hpp"
#include "advclaim/errors.hpp"
#include "advclaim/io.hpp"

namespace advclaim {

std::string report_timestamp() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (env == nullptr || *env == '\0') return "unset";
  char* end = nullptr;
  const long long secs = std::strtoll(env, &end, 10);
  if (end == env || *end != '\0' || secs < 0) return "unset";
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json("n/a"); }

std::string fmt(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

template <typename F>
std::optional<double> try_metric(const std::optional<ConfusionCounts>& c, F f) {
  if (!c) return std::nullopt;
  try {
    return f(*c);
  } catch (const UndefinedMetric&) {
    return std::nullopt;
  }
}

}  // namespace

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : r.models) {
    nlohmann::json row = {{"model_id", m.model_id}, {"family", m.family}, {"seed", m.seed}};
    row["accuracy"] = opt(try_metric(m.counts, [](const ConfusionCounts& c) { return accuracy(c); }));
    row["f1"] = opt(try_metric(m.counts, [](const ConfusionCounts& c) { return f1(c); }));
    if (m.counts) {
      row["confusion"] = {{"tp", m.counts->tp}, {"fp", m.counts->fp}, {"tn", m.counts->tn}, {"fn", m.counts->fn}};
    }
    if (!m.error.empty()) row["error"] = m.error;
    models.push_back(std::move(row));
  }
  nlohmann::json attacks = nlohmann::json::array();
  for (const auto& a : r.attacks) {
    nlohmann::json row = {{"model_id", a.model_id},
                          {"attack", a.attack},
                          {"epsilon", a.epsilon},
                          {"accuracy_before", opt(a.accuracy_before)},
                          {"accuracy_after", opt(a.accuracy_after)},
                          {"asr", opt(a.asr)},
                          {"seed", a.seed}};
    if (!a.note.empty()) row["note"] = a.note;
    attacks.push_back(std::move(row));
  }
  return {{"kind", r.kind},
          {"dataset_hash", r.dataset_hash},
          {"config_hash", r.config_hash},
          {"seed", r.seed},
          {"timestamp", report_timestamp()},
          {"models", std::move(models)},
          {"attacks", std::move(attacks)},
          {"extra", r.extra}};
}

std::string report_csv(const MetricsReport& r) {
  std::ostringstream os;
  write_csv_row(os, {"section", "model_id", "family_or_attack", "epsilon", "accuracy", "f1_or_accuracy_after", "asr",
                     "seed", "note"});
  for (const auto& m : r.models) {
    const auto acc = try_metric(m.counts, [](const ConfusionCounts& c) { return accuracy(c); });
    const auto f = try_metric(m.counts, [](const ConfusionCounts& c) { return f1(c); });
    write_csv_row(os, {"model", m.model_id, m.family, "", fmt(acc), fmt(f), "", std::to_string(m.seed), m.error});
  }
  for (const auto& a : r.attacks) {
    char eps[32];
    std::snprintf(eps, sizeof(eps), "%.4f", a.epsilon);
    write_csv_row(os, {"attack", a.model_id, a.attack, eps, fmt(a.accuracy_before), fmt(a.accuracy_after), fmt(a.asr),
                       std::to_string(a.seed), a.note});
  }
  return os.str();
}

void emit_report(const MetricsReport& report, const std::filesystem::path& stem) {
  std::filesystem::path json_path = stem;
  json_path += ".json";
  std::filesystem::path csv_path = stem;
  csv_path += ".csv";
  write_text_file(json_path, report_to_json(report).dump(1) + "\n");
  write_text_file(csv_path, report_csv(report));
}

}  // namespace advclaim
