#include "advclaim/data/encoding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>

#include "advclaim/errors.hpp"

namespace advclaim {

namespace {

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_dropped(const EncodingOptions& options, const std::string& name) {
  return std::find(options.drop_columns.begin(), options.drop_columns.end(), name) != options.drop_columns.end();
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::vector<FeatureMeta> fit_encoding(const RawTable& table, std::span<const std::size_t> fit_rows,
                                      const EncodingOptions& options) {
  for (const auto& [name, kind] : options.declared) {
    (void)kind;
    table.column_index(name);
  }
  std::vector<FeatureMeta> meta;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const std::string& name = table.columns[c];
    if (c == table.label_index || is_dropped(options, name)) continue;

    FeatureMeta fm;
    fm.name = name;
    if (const auto it = options.declared.find(name); it != options.declared.end()) {
      fm.kind = it->second;
    } else {
      bool all_numeric = true;
      for (const auto& row : table.rows)
        if (row[c] && !parse_number(*row[c])) {
          all_numeric = false;
          break;
        }
      fm.kind = all_numeric ? FeatureKind::numeric : FeatureKind::categorical;
    }

    std::vector<double> numbers;
    std::set<std::string> cats;
    for (std::size_t r : fit_rows) {
      const Cell& cell = table.rows.at(r)[c];
      if (!cell) continue;
      if (fm.kind == FeatureKind::categorical) {
        cats.insert(*cell);
      } else {
        const auto v = parse_number(*cell);
        if (!v) throw SchemaError("column '" + name + "' declared numeric but has value '" + *cell + "'");
        numbers.push_back(*v);
      }
    }
    if (fm.kind == FeatureKind::categorical) {
      if (cats.empty()) throw SchemaError("column '" + name + "' has no values in the fit rows");
      fm.categories.assign(cats.begin(), cats.end());
      fm.min = 0.0;
      fm.max = static_cast<double>(fm.categories.size());
    } else {
      if (numbers.empty()) throw SchemaError("column '" + name + "' has no values in the fit rows");
      const auto [lo, hi] = std::minmax_element(numbers.begin(), numbers.end());
      fm.min = *lo;
      fm.max = *hi;
      fm.median = median_of(numbers);
    }
    meta.push_back(std::move(fm));
  }
  if (meta.empty()) throw SchemaError("no feature columns remain after dropping");
  return meta;
}

std::size_t category_code(const FeatureMeta& meta, const std::string& value) {
  const auto it = std::lower_bound(meta.categories.begin(), meta.categories.end(), value);
  if (it == meta.categories.end() || *it != value) return meta.unknown_code();
  return static_cast<std::size_t>(it - meta.categories.begin());
}

Matrix encode(const RawTable& table, const std::vector<FeatureMeta>& meta, EncodeReport& report) {
  std::vector<std::size_t> cols;
  cols.reserve(meta.size());
  for (const auto& fm : meta) cols.push_back(table.column_index(fm.name));

  Matrix out(table.rows.size(), meta.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < meta.size(); ++j) {
      const FeatureMeta& fm = meta[j];
      const Cell& cell = table.rows[r][cols[j]];
      if (fm.kind == FeatureKind::categorical) {
        if (!cell) {
          ++report.missing_categorical;
          out(r, j) = static_cast<double>(fm.unknown_code());
          continue;
        }
        const std::size_t code = category_code(fm, *cell);
        if (code == fm.unknown_code()) ++report.unknown_categories;
        out(r, j) = static_cast<double>(code);
      } else {
        const auto v = cell ? parse_number(*cell) : std::nullopt;
        if (cell && !v) throw IngestionError("non-numeric value '" + *cell + "' in column '" + fm.name + "'", r + 1);
        if (!v) ++report.imputed_numeric;
        out(r, j) = v ? *v : fm.median;
      }
    }
  }
  return out;
}

double normalize_value(const FeatureMeta& meta, double raw) noexcept {
  const double range = meta.max - meta.min;
  if (!(range > 0.0)) return 0.0;
  return std::clamp((raw - meta.min) / range, 0.0, 1.0);
}

double denormalize_value(const FeatureMeta& meta, double normalized) noexcept {
  return meta.min + std::clamp(normalized, 0.0, 1.0) * (meta.max - meta.min);
}

void normalize_inplace(Matrix& raw, const std::vector<FeatureMeta>& meta) {
  if (raw.cols() != meta.size()) throw ShapeError("normalize: metadata width does not match matrix");
  for (std::size_t r = 0; r < raw.rows(); ++r)
    for (std::size_t j = 0; j < raw.cols(); ++j) raw(r, j) = normalize_value(meta[j], raw(r, j));
}

std::string decode_value(const FeatureMeta& meta, double normalized) {
  const double raw = denormalize_value(meta, normalized);
  if (meta.kind == FeatureKind::categorical) {
    const auto code = static_cast<std::size_t>(std::llround(raw));
    if (code >= meta.categories.size()) return "<unknown>";
    return meta.categories[code];
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", raw);
  return buf;
}

std::vector<std::string> decode_row(const std::vector<FeatureMeta>& meta, std::span<const double> row) {
  if (row.size() != meta.size()) throw ShapeError("decode_row: width does not match metadata");
  std::vector<std::string> out;
  out.reserve(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out.push_back(decode_value(meta[j], row[j]));
  return out;
}

}  // namespace advclaim
