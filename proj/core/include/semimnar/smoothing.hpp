#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "semimnar/data.hpp"

namespace semimnar {

enum class KernelId { gaussian, epanechnikov };

KernelId parse_kernel(const std::string& name);
std::string to_string(KernelId k);

/// Kernel bandwidth; always strictly positive.
class Bandwidth {
 public:
  explicit Bandwidth(double h);
  double value() const noexcept { return h_; }

 private:
  double h_;
};

/// Denominators below this floor are reported as degenerate instead of
/// producing 0/0 or huge ratios.
inline constexpr double kDenominatorFloor = 1e-30;

/// Unnormalized kernel profile evaluated at squared scaled distance u2.
double kernel_weight(KernelId kernel, double u2);

struct CellPoint {
  double x;
  double z;
};

struct KernelPoint {
  std::vector<double> x;
  double z;
};

/// Exact per-level averages of z.
class CellMean {
 public:
  explicit CellMean(std::span<const CellPoint> points);
  double evaluate(double code) const;
  std::size_t count(double code) const;

 private:
  std::map<double, std::pair<double, std::size_t>> cells_;  // code -> (sum, count)
};

/// Nadaraya-Watson regression of z on x. Multi-dimensional x uses a product
/// kernel with one shared bandwidth applied to standardized coordinates.
class KernelMean {
 public:
  KernelMean(std::vector<KernelPoint> points, Bandwidth h, KernelId kernel);
  double evaluate(std::span<const double> x0) const;
  const std::vector<double>& scales() const noexcept { return scales_; }

 private:
  std::vector<KernelPoint> points_;
  Bandwidth h_;
  KernelId kernel_;
  std::vector<double> scales_;
};

/// A fitted conditional-mean engine, either form.
class Smoother {
 public:
  explicit Smoother(CellMean cell, std::string target = {})
      : form_(std::move(cell)), target_(std::move(target)) {}
  explicit Smoother(KernelMean kernel, std::string target = {})
      : form_(std::move(kernel)), target_(std::move(target)) {}

  double evaluate(std::span<const double> x0) const;
  bool is_cell() const noexcept { return std::holds_alternative<CellMean>(form_); }
  const std::string& target() const noexcept { return target_; }

 private:
  std::variant<CellMean, KernelMean> form_;
  std::string target_;
};

Smoother fit_cell_mean(std::span<const CellPoint> points);
Smoother fit_kernel_mean(std::vector<KernelPoint> points, Bandwidth h,
                         KernelId kernel = KernelId::gaussian);

/// Leave-one-out CV over 25 log-spaced multiples in [0.05, 5] of the
/// rule-of-thumb bandwidth. Ties go to the smallest h.
Bandwidth select_bandwidth_cv(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& z,
                              KernelId kernel = KernelId::gaussian);

/// The LOO curve behind select_bandwidth_cv: (h, mean squared LOO error),
/// NaN where the grid point is degenerate.
std::vector<std::pair<double, double>> loo_cv_curve(const std::vector<std::vector<double>>& x,
                                                    const std::vector<double>& z,
                                                    KernelId kernel = KernelId::gaussian);

/// Silverman-style 1.06 sd n^{-1/5} in one dimension; on standardized
/// coordinates 1.06 n^{-1/(d+4)} otherwise. Zero when a coordinate has no spread.
double rule_of_thumb_bandwidth(const std::vector<std::vector<double>>& x);

/// Per-coordinate scale used by the product kernel: 1 in one dimension,
/// the sample standard deviation otherwise.
std::vector<double> kernel_scales(const std::vector<std::vector<double>>& x);

/// Smoothing engine over a fixed set of sample points with mixed coordinate
/// kinds: exact stratification on discrete coordinates, product kernel on the
/// continuous ones. All estimators evaluate conditional means at sample points
/// only, so the engine exposes weighted sums s_i = sum_j K(x_i, x_j) v_j.
class ConditionalSmoother {
 public:
  /// `points` is n rows of d coordinates. A bandwidth is required whenever a
  /// continuous coordinate is present.
  ConditionalSmoother(std::vector<std::vector<double>> points, std::vector<VariableKind> kinds,
                      std::optional<Bandwidth> h, KernelId kernel = KernelId::gaussian,
                      std::vector<std::string> names = {});

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t num_strata() const noexcept { return strata_.size(); }
  std::size_t stratum_of(std::size_t i) const noexcept { return stratum_of_[i]; }
  bool purely_discrete() const noexcept { return continuous_.empty(); }
  const std::vector<double>& point(std::size_t i) const { return points_[i]; }

  Eigen::VectorXd sums(const Eigen::VectorXd& v) const;
  double sum_at(std::span<const double> x0, const Eigen::VectorXd& v) const;

  /// num/den elementwise after checking every denominator's kernel mass
  /// (sums of `mass`) against the floor.
  Eigen::VectorXd ratio(const Eigen::VectorXd& num, const Eigen::VectorXd& den,
                        const Eigen::VectorXd& mass) const;

  /// Throws EmptyCell / DegenerateWindow naming the first row whose kernel
  /// mass of `mass` is below the floor.
  void check_mass(const Eigen::VectorXd& mass_sums) const;

  std::string describe(std::size_t i) const;
  std::string describe_point(std::span<const double> x0) const;

 private:
  double distance_weight(const std::vector<double>& a, std::span<const double> b) const;

  std::vector<std::vector<double>> points_;
  std::vector<VariableKind> kinds_;
  std::vector<std::string> names_;
  std::optional<Bandwidth> h_;
  KernelId kernel_;
  std::vector<std::size_t> discrete_, continuous_;
  std::vector<double> scales_;
  std::vector<std::size_t> stratum_of_;
  std::vector<std::vector<std::size_t>> strata_;
  std::map<std::vector<double>, std::size_t> stratum_index_;
  std::vector<Eigen::MatrixXd> kernel_cache_;  // per stratum, when small enough
};

}  // namespace semimnar
