#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace semimnar {

/// Measurement scale of one covariate coordinate. Discrete coordinates carry
/// their ordered level codes; smoothing stratifies on them exactly.
class VariableKind {
 public:
  static VariableKind continuous() { return VariableKind{}; }
  static VariableKind discrete(std::vector<double> levels);

  bool is_discrete() const noexcept { return discrete_; }
  const std::vector<double>& levels() const noexcept { return levels_; }
  bool has_level(double v) const;

  friend bool operator==(const VariableKind&, const VariableKind&) = default;

 private:
  bool discrete_ = false;
  std::vector<double> levels_;
};

struct Observation {
  std::vector<double> x1;  // enters the response model through g(x1)
  std::vector<double> x2;  // nonresponse instrument
  std::optional<double> y;
  int delta = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Violation {
  std::optional<std::size_t> row;
  std::string rule;
};

/// In-memory sample. Immutable after construction by convention: every
/// consumer takes it by const reference.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> x1_names, std::vector<VariableKind> x1_kinds,
          std::vector<std::string> x2_names, std::vector<VariableKind> x2_kinds,
          std::vector<Observation> rows);

  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  std::size_t dim_x1() const noexcept { return x1_kinds_.size(); }
  std::size_t dim_x2() const noexcept { return x2_kinds_.size(); }

  const std::vector<Observation>& rows() const noexcept { return rows_; }
  const Observation& operator[](std::size_t i) const { return rows_[i]; }

  const std::vector<std::string>& x1_names() const noexcept { return x1_names_; }
  const std::vector<std::string>& x2_names() const noexcept { return x2_names_; }
  const std::vector<VariableKind>& x1_kinds() const noexcept { return x1_kinds_; }
  const std::vector<VariableKind>& x2_kinds() const noexcept { return x2_kinds_; }

  std::size_t respondent_count() const noexcept;

  /// Same schema, different rows.
  Dataset with_rows(std::vector<Observation> rows) const;

  /// Column index of a covariate by name within the concatenated (x1, x2)
  /// layout, or nullopt.
  std::optional<std::size_t> covariate_index(const std::string& name) const;

 private:
  std::vector<std::string> x1_names_;
  std::vector<VariableKind> x1_kinds_;
  std::vector<std::string> x2_names_;
  std::vector<VariableKind> x2_kinds_;
  std::vector<Observation> rows_;
};

/// Checks every structural invariant; an empty result means the dataset is
/// usable. Never throws.
std::vector<Violation> validate(const Dataset& data);

/// Partition by response indicator, preserving input order in each part.
std::pair<Dataset, Dataset> respondent_split(const Dataset& data);

std::string to_string(const Violation& v);

}  // namespace semimnar
