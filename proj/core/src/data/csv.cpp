#include "advclaim/data/csv.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

#include "advclaim/errors.hpp"

namespace advclaim {

namespace {

std::string trim(const std::string& s) {
  const auto first = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  const auto last = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return first < last ? std::string(first, last) : std::string();
}

// Splits one logical record; quoted fields may contain delimiters, doubled
// quotes and newlines (pulled from `in` as needed).
bool read_record(std::istream& in, char delim, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == line.size()) {
      if (quoted) {
        std::string next;
        if (!std::getline(in, next)) throw IngestionError("unterminated quoted field", line_no);
        ++line_no;
        if (!next.empty() && next.back() == '\r') next.pop_back();
        field += '\n';
        line = std::move(next);
        i = 0;
        continue;
      }
      fields.push_back(std::move(field));
      return true;
    }
    const char c = line[i++];
    if (quoted) {
      if (c == '"') {
        if (i < line.size() && line[i] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::size_t RawTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw SchemaError("column '" + name + "' not found");
  return static_cast<std::size_t>(it - columns.begin());
}

RawTable parse_csv(std::istream& in, const std::string& label_column, const CsvOptions& options) {
  RawTable table;
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  if (!read_record(in, options.delimiter, fields, line_no)) throw IngestionError("empty file: missing header row");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  for (auto& f : fields) table.columns.push_back(trim(f));

  const auto label_it = std::find(table.columns.begin(), table.columns.end(), label_column);
  if (label_it == table.columns.end()) throw IngestionError("label column '" + label_column + "' not in header");
  table.label_index = static_cast<std::size_t>(label_it - table.columns.begin());

  std::size_t data_row = 0;
  while (read_record(in, options.delimiter, fields, line_no)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    ++data_row;
    if (fields.size() != table.columns.size()) {
      throw IngestionError("expected " + std::to_string(table.columns.size()) + " fields, found " +
                               std::to_string(fields.size()),
                           data_row);
    }
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (auto& f : fields) {
      std::string v = trim(f);
      const bool missing =
          std::find(options.missing_tokens.begin(), options.missing_tokens.end(), v) != options.missing_tokens.end();
      row.push_back(missing ? Cell{} : Cell{std::move(v)});
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const std::string& label_column, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'");
  try {
    return parse_csv(in, label_column, options);
  } catch (const IngestionError& e) {
    throw IngestionError(path.string() + ": " + e.what());
  }
}

std::vector<int> parse_labels(const RawTable& table) {
  std::vector<int> labels;
  labels.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const Cell& cell = table.rows[r][table.label_index];
    if (!cell) throw IngestionError("missing label", r + 1);
    const std::string v = lower(*cell);
    if (v == "y" || v == "yes" || v == "true" || v == "1") {
      labels.push_back(1);
    } else if (v == "n" || v == "no" || v == "false" || v == "0") {
      labels.push_back(0);
    } else {
      throw IngestionError("unrecognized label value '" + *cell + "'", r + 1);
    }
  }
  return labels;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n\r") != std::string::npos) {
      out << '"';
      for (char ch : c) {
        if (ch == '"') out << '"';
        out << ch;
      }
      out << '"';
    } else {
      out << c;
    }
  }
  out << '\n';
}

}  // namespace advclaim
