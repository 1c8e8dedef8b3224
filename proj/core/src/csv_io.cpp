#include "semimnar/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "semimnar/errors.hpp"

namespace semimnar {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  std::string t = trim(cell);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw DataError("row " + std::to_string(row) + ", column '" + col + "': cannot parse '" +
                    cell + "' as a number");
  return v;
}

std::size_t require_column(const CsvTable& t, const std::string& name) {
  auto idx = t.column(name);
  if (!idx) throw ConfigError("column '" + name + "' not found in CSV header");
  return *idx;
}

}  // namespace

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (trim(line).empty()) continue;
      for (auto& h : split_line(line)) t.header.push_back(trim(h));
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size())
      throw DataError("row " + std::to_string(t.rows.size()) + " has " +
                      std::to_string(cells.size()) + " fields, header has " +
                      std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw DataError("CSV input has no header row");
  return t;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  auto write_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out << ',';
      out << quote_if_needed(cells[k]);
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& r : table.rows) write_row(r);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Dataset dataset_from_table(const CsvTable& table, const ColumnMapping& mapping) {
  if (mapping.x1.empty()) throw ConfigError("column mapping needs at least one x1 column");
  std::vector<std::size_t> x1_idx, x2_idx;
  for (const auto& c : mapping.x1) x1_idx.push_back(require_column(table, c));
  for (const auto& c : mapping.x2) x2_idx.push_back(require_column(table, c));
  const std::size_t y_idx = require_column(table, mapping.y);
  std::optional<std::size_t> d_idx;
  if (!mapping.delta.empty()) d_idx = require_column(table, mapping.delta);

  std::vector<Observation> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    Observation o;
    for (std::size_t k = 0; k < x1_idx.size(); ++k)
      o.x1.push_back(parse_cell(r[x1_idx[k]], i, mapping.x1[k]));
    for (std::size_t k = 0; k < x2_idx.size(); ++k)
      o.x2.push_back(parse_cell(r[x2_idx[k]], i, mapping.x2[k]));
    const std::string ycell = trim(r[y_idx]);
    if (!ycell.empty()) o.y = parse_cell(ycell, i, mapping.y);
    if (d_idx) {
      double d = parse_cell(r[*d_idx], i, mapping.delta);
      if (d != 0.0 && d != 1.0)
        throw DataError("row " + std::to_string(i) + ": delta must be 0 or 1");
      o.delta = static_cast<int>(d);
    } else {
      o.delta = o.y ? 1 : 0;
    }
    rows.push_back(std::move(o));
  }

  auto make_kinds = [&](const std::vector<std::string>& names, bool first_block) {
    std::vector<VariableKind> kinds;
    for (std::size_t k = 0; k < names.size(); ++k) {
      auto it = mapping.kinds.find(names[k]);
      if (it == mapping.kinds.end() || !it->second.discrete) {
        kinds.push_back(VariableKind::continuous());
        continue;
      }
      if (it->second.levels) {
        kinds.push_back(VariableKind::discrete(*it->second.levels));
        continue;
      }
      std::set<double> seen;
      for (const auto& o : rows) seen.insert(first_block ? o.x1[k] : o.x2[k]);
      kinds.push_back(VariableKind::discrete({seen.begin(), seen.end()}));
    }
    return kinds;
  };
  auto x1_kinds = make_kinds(mapping.x1, true);
  auto x2_kinds = make_kinds(mapping.x2, false);
  return Dataset(mapping.x1, std::move(x1_kinds), mapping.x2, std::move(x2_kinds),
                 std::move(rows));
}

CsvTable table_from_dataset(const Dataset& data, const std::string& y_name,
                            const std::string& delta_name) {
  CsvTable t;
  t.header = data.x1_names();
  t.header.insert(t.header.end(), data.x2_names().begin(), data.x2_names().end());
  t.header.push_back(y_name);
  t.header.push_back(delta_name);
  for (const auto& o : data.rows()) {
    std::vector<std::string> cells;
    for (double v : o.x1) cells.push_back(format_number(v));
    for (double v : o.x2) cells.push_back(format_number(v));
    cells.push_back(o.y ? format_number(*o.y) : std::string{});
    cells.push_back(std::to_string(o.delta));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace semimnar
