#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace advclaim {

inline constexpr const char* kDefaultLabelColumn = "fraud_reported";

struct CsvOptions {
  char delimiter = ',';
  // Cells equal to any of these (after trimming) are recorded as missing.
  std::vector<std::string> missing_tokens{""};
};

using Cell = std::optional<std::string>;

struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::size_t label_index = 0;

  std::size_t column_index(const std::string& name) const;  // throws SchemaError
};

RawTable parse_csv(std::istream& in, const std::string& label_column, const CsvOptions& options = {});
RawTable load_csv(const std::filesystem::path& path, const std::string& label_column,
                  const CsvOptions& options = {});

// Accepts Y/N, yes/no, true/false, 1/0 (case-insensitive).
std::vector<int> parse_labels(const RawTable& table);

// Writes a header plus rows, quoting cells that need it.
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace advclaim
