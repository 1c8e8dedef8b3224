#include "semimnar/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "semimnar/errors.hpp"

namespace semimnar {

VariableKind VariableKind::discrete(std::vector<double> levels) {
  if (levels.empty()) throw ConfigError("discrete variable needs at least one level");
  std::vector<double> sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("discrete levels must be distinct");
  VariableKind k;
  k.discrete_ = true;
  k.levels_ = std::move(levels);
  return k;
}

bool VariableKind::has_level(double v) const {
  return std::find(levels_.begin(), levels_.end(), v) != levels_.end();
}

Dataset::Dataset(std::vector<std::string> x1_names, std::vector<VariableKind> x1_kinds,
                 std::vector<std::string> x2_names, std::vector<VariableKind> x2_kinds,
                 std::vector<Observation> rows)
    : x1_names_(std::move(x1_names)),
      x1_kinds_(std::move(x1_kinds)),
      x2_names_(std::move(x2_names)),
      x2_kinds_(std::move(x2_kinds)),
      rows_(std::move(rows)) {
  if (x1_names_.size() != x1_kinds_.size() || x2_names_.size() != x2_kinds_.size())
    throw ConfigError("covariate names and kinds must have matching lengths");
}

std::size_t Dataset::respondent_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(rows_.begin(), rows_.end(), [](const Observation& o) { return o.delta == 1; }));
}

Dataset Dataset::with_rows(std::vector<Observation> rows) const {
  return Dataset(x1_names_, x1_kinds_, x2_names_, x2_kinds_, std::move(rows));
}

std::optional<std::size_t> Dataset::covariate_index(const std::string& name) const {
  for (std::size_t k = 0; k < x1_names_.size(); ++k)
    if (x1_names_[k] == name) return k;
  for (std::size_t k = 0; k < x2_names_.size(); ++k)
    if (x2_names_[k] == name) return x1_names_.size() + k;
  return std::nullopt;
}

namespace {

void check_coords(const std::vector<double>& values, const std::vector<VariableKind>& kinds,
                  const char* block, std::size_t row, std::vector<Violation>& out) {
  if (values.size() != kinds.size()) {
    std::ostringstream msg;
    msg << block << " has dimension " << values.size() << ", expected " << kinds.size();
    out.push_back({row, msg.str()});
    return;
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      out.push_back({row, std::string(block) + "[" + std::to_string(k) + "] is not finite"});
    } else if (kinds[k].is_discrete() && !kinds[k].has_level(values[k])) {
      std::ostringstream msg;
      msg << block << "[" << k << "] value " << values[k] << " is not a declared level";
      out.push_back({row, msg.str()});
    }
  }
}

}  // namespace

std::vector<Violation> validate(const Dataset& data) {
  std::vector<Violation> out;
  if (data.empty()) {
    out.push_back({std::nullopt, "n >= 1"});
    return out;
  }
  for (const auto* kinds : {&data.x1_kinds(), &data.x2_kinds()}) {
    for (const auto& k : *kinds) {
      if (!k.is_discrete()) continue;
      std::set<double> uniq(k.levels().begin(), k.levels().end());
      if (k.levels().empty() || uniq.size() != k.levels().size())
        out.push_back({std::nullopt, "discrete levels must be non-empty and distinct"});
    }
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Observation& o = data[i];
    if (o.delta != 0 && o.delta != 1) out.push_back({i, "delta must be 0 or 1"});
    if (o.delta == 1 && !o.y) out.push_back({i, "y missing although delta = 1"});
    if (o.delta == 0 && o.y) out.push_back({i, "y present although delta = 0"});
    if (o.y && !std::isfinite(*o.y)) out.push_back({i, "y is not finite"});
    check_coords(o.x1, data.x1_kinds(), "x1", i, out);
    check_coords(o.x2, data.x2_kinds(), "x2", i, out);
  }
  return out;
}

std::pair<Dataset, Dataset> respondent_split(const Dataset& data) {
  std::vector<Observation> resp, nonresp;
  for (const auto& o : data.rows()) (o.delta == 1 ? resp : nonresp).push_back(o);
  return {data.with_rows(std::move(resp)), data.with_rows(std::move(nonresp))};
}

std::string to_string(const Violation& v) {
  if (v.row) return "row " + std::to_string(*v.row) + ": " + v.rule;
  return v.rule;
}

}  // namespace semimnar
