#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semimnar/data.hpp"

namespace semimnar {

/// Raw CSV contents: a header row and string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column or nullopt.
  std::optional<std::size_t> column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
void write_csv(std::ostream& out, const CsvTable& table);

struct KindSpec {
  bool discrete = false;
  std::optional<std::vector<double>> levels;  // inferred from data when absent
};

/// Maps CSV columns to roles. An empty `delta` means the response indicator
/// is derived from whether the y cell is empty.
struct ColumnMapping {
  std::vector<std::string> x1;
  std::vector<std::string> x2;
  std::string y = "y";
  std::string delta;
  std::map<std::string, KindSpec> kinds;  // columns absent here are continuous
};

/// Throws ConfigError when the mapping names an absent column and DataError
/// when a cell cannot be parsed.
Dataset dataset_from_table(const CsvTable& table, const ColumnMapping& mapping);

CsvTable table_from_dataset(const Dataset& data, const std::string& y_name = "y",
                            const std::string& delta_name = "delta");

std::string format_number(double v);

}  // namespace semimnar
