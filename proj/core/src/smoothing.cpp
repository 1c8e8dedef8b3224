#include "semimnar/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "semimnar/errors.hpp"

namespace semimnar {

namespace {

constexpr std::size_t kCvGridSize = 25;
constexpr double kCvGridLow = 0.05;
constexpr double kCvGridHigh = 5.0;
constexpr std::size_t kKernelCacheEntries = 16'000'000;  // 128 MB of doubles

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string format_point(std::span<const double> x, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k) os << ", ";
    if (k < names.size()) os << names[k] << '=';
    os << x[k];
  }
  os << ')';
  return os.str();
}

}  // namespace

KernelId parse_kernel(const std::string& name) {
  if (name == "gaussian") return KernelId::gaussian;
  if (name == "epanechnikov") return KernelId::epanechnikov;
  throw ConfigError("unknown kernel '" + name + "' (valid: gaussian, epanechnikov)");
}

std::string to_string(KernelId k) {
  return k == KernelId::gaussian ? "gaussian" : "epanechnikov";
}

Bandwidth::Bandwidth(double h) : h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("bandwidth must be positive and finite");
}

double kernel_weight(KernelId kernel, double u2) {
  switch (kernel) {
    case KernelId::gaussian:
      return std::exp(-0.5 * u2);
    case KernelId::epanechnikov:
      return u2 < 1.0 ? 1.0 - u2 : 0.0;
  }
  return 0.0;
}

std::vector<double> kernel_scales(const std::vector<std::vector<double>>& x) {
  if (x.empty()) return {};
  const std::size_t d = x.front().size();
  if (d == 1) return {1.0};
  std::vector<double> scales(d);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> col;
    col.reserve(x.size());
    for (const auto& row : x) col.push_back(row[k]);
    scales[k] = sample_sd(col);
  }
  return scales;
}

// ---------------------------------------------------------------------------

CellMean::CellMean(std::span<const CellPoint> points) {
  if (points.empty()) throw DataError("cell mean needs at least one point");
  for (const auto& p : points) {
    auto& c = cells_[p.x];
    c.first += p.z;
    c.second += 1;
  }
}

double CellMean::evaluate(double code) const {
  auto it = cells_.find(code);
  if (it == cells_.end() || it->second.second == 0) {
    std::ostringstream os;
    os << code;
    throw EmptyCell(os.str());
  }
  return it->second.first / static_cast<double>(it->second.second);
}

std::size_t CellMean::count(double code) const {
  auto it = cells_.find(code);
  return it == cells_.end() ? 0 : it->second.second;
}

KernelMean::KernelMean(std::vector<KernelPoint> points, Bandwidth h, KernelId kernel)
    : points_(std::move(points)), h_(h), kernel_(kernel) {
  if (points_.size() < 2) throw DataError("kernel mean needs at least two points");
  const std::size_t d = points_.front().x.size();
  for (const auto& p : points_)
    if (p.x.size() != d) throw DataError("kernel points must share one dimension");
  std::vector<std::vector<double>> xs;
  xs.reserve(points_.size());
  for (const auto& p : points_) xs.push_back(p.x);
  scales_ = kernel_scales(xs);
  for (double s : scales_)
    if (!(s > 0.0)) throw DataError("kernel coordinate has zero spread");
}

double KernelMean::evaluate(std::span<const double> x0) const {
  if (x0.size() != scales_.size()) throw DataError("evaluation point has wrong dimension");
  double num = 0.0, den = 0.0;
  for (const auto& p : points_) {
    double w = 1.0;
    for (std::size_t k = 0; k < x0.size(); ++k) {
      const double u = (x0[k] - p.x[k]) / (h_.value() * scales_[k]);
      w *= kernel_weight(kernel_, u * u);
    }
    num += w * p.z;
    den += w;
  }
  if (den < kDenominatorFloor) throw DegenerateWindow(format_point(x0, {}));
  return num / den;
}

double Smoother::evaluate(std::span<const double> x0) const {
  if (const auto* cell = std::get_if<CellMean>(&form_)) {
    if (x0.size() != 1) throw DataError("cell smoother takes a single code");
    return cell->evaluate(x0[0]);
  }
  return std::get<KernelMean>(form_).evaluate(x0);
}

Smoother fit_cell_mean(std::span<const CellPoint> points) { return Smoother(CellMean(points)); }

Smoother fit_kernel_mean(std::vector<KernelPoint> points, Bandwidth h, KernelId kernel) {
  return Smoother(KernelMean(std::move(points), h, kernel));
}

// ---------------------------------------------------------------------------

double rule_of_thumb_bandwidth(const std::vector<std::vector<double>>& x) {
  if (x.empty()) return 0.0;
  const auto n = static_cast<double>(x.size());
  const std::size_t d = x.front().size();
  if (d == 1) {
    std::vector<double> col;
    col.reserve(x.size());
    for (const auto& r : x) col.push_back(r[0]);
    return 1.06 * sample_sd(col) * std::pow(n, -0.2);
  }
  // coordinates are standardized by the product kernel
  for (double s : kernel_scales(x))
    if (!(s > 0.0)) return 0.0;
  return 1.06 * std::pow(n, -1.0 / (static_cast<double>(d) + 4.0));
}

std::vector<std::pair<double, double>> loo_cv_curve(const std::vector<std::vector<double>>& x,
                                                    const std::vector<double>& z,
                                                    KernelId kernel) {
  const std::size_t n = x.size();
  if (n < 10) throw DataError("bandwidth selection needs at least 10 points");
  if (z.size() != n) throw DataError("x and z lengths differ");
  const std::size_t d = x.front().size();
  const auto scales = kernel_scales(x);
  const double h_rot = rule_of_thumb_bandwidth(x);

  std::vector<std::pair<double, double>> curve;
  curve.reserve(kCvGridSize);
  const double log_lo = std::log(kCvGridLow), log_hi = std::log(kCvGridHigh);
  for (std::size_t g = 0; g < kCvGridSize; ++g) {
    const double mult =
        std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(g) / (kCvGridSize - 1));
    const double h = h_rot * mult;
    if (!(h > 0.0)) {
      curve.emplace_back(h, std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double sse = 0.0;
    bool degenerate = false;
    for (std::size_t i = 0; i < n && !degenerate; ++i) {
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double w = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double u = (x[i][k] - x[j][k]) / (h * scales[k]);
          w *= kernel_weight(kernel, u * u);
        }
        num += w * z[j];
        den += w;
      }
      if (den < kDenominatorFloor) {
        degenerate = true;
      } else {
        const double r = z[i] - num / den;
        sse += r * r;
      }
    }
    curve.emplace_back(h, degenerate ? std::numeric_limits<double>::quiet_NaN()
                                     : sse / static_cast<double>(n));
  }
  return curve;
}

Bandwidth select_bandwidth_cv(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& z, KernelId kernel) {
  const auto curve = loo_cv_curve(x, z, kernel);
  std::optional<std::pair<double, double>> best;
  for (const auto& [h, cv] : curve) {
    if (!std::isfinite(cv)) continue;
    if (!best || cv < best->second) best = {h, cv};
  }
  if (!best) throw BandwidthSelectionFailed("every bandwidth grid point is degenerate");
  return Bandwidth(best->first);
}

// ---------------------------------------------------------------------------

ConditionalSmoother::ConditionalSmoother(std::vector<std::vector<double>> points,
                                         std::vector<VariableKind> kinds,
                                         std::optional<Bandwidth> h, KernelId kernel,
                                         std::vector<std::string> names)
    : points_(std::move(points)),
      kinds_(std::move(kinds)),
      names_(std::move(names)),
      h_(h),
      kernel_(kernel) {
  for (std::size_t k = 0; k < kinds_.size(); ++k)
    (kinds_[k].is_discrete() ? discrete_ : continuous_).push_back(k);
  if (!continuous_.empty() && !h_)
    throw ConfigError("a bandwidth is required to smooth over continuous coordinates");

  stratum_of_.resize(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].size() != kinds_.size()) throw DataError("smoother point has wrong dimension");
    std::vector<double> key;
    key.reserve(discrete_.size());
    for (auto k : discrete_) key.push_back(points_[i][k]);
    auto [it, inserted] = stratum_index_.try_emplace(std::move(key), strata_.size());
    if (inserted) strata_.emplace_back();
    stratum_of_[i] = it->second;
    strata_[it->second].push_back(i);
  }

  if (continuous_.empty()) return;

  scales_.assign(kinds_.size(), 1.0);
  if (continuous_.size() > 1) {
    for (auto k : continuous_) {
      std::vector<double> col;
      col.reserve(points_.size());
      for (const auto& p : points_) col.push_back(p[k]);
      scales_[k] = sample_sd(col);
      if (!(scales_[k] > 0.0)) throw DataError("continuous coordinate has zero spread");
    }
  }

  std::size_t entries = 0;
  for (const auto& s : strata_) entries += s.size() * s.size();
  if (entries <= kKernelCacheEntries) {
    kernel_cache_.reserve(strata_.size());
    for (const auto& s : strata_) {
      Eigen::MatrixXd k(s.size(), s.size());
      for (std::size_t a = 0; a < s.size(); ++a) {
        k(a, a) = 1.0;
        for (std::size_t b = a + 1; b < s.size(); ++b) {
          const double w = distance_weight(points_[s[a]], points_[s[b]]);
          k(a, b) = w;
          k(b, a) = w;
        }
      }
      kernel_cache_.push_back(std::move(k));
    }
  }
}

double ConditionalSmoother::distance_weight(const std::vector<double>& a,
                                            std::span<const double> b) const {
  double w = 1.0;
  for (auto k : continuous_) {
    const double u = (a[k] - b[k]) / (h_->value() * scales_[k]);
    w *= kernel_weight(kernel_, u * u);
  }
  return w;
}

Eigen::VectorXd ConditionalSmoother::sums(const Eigen::VectorXd& v) const {
  const auto n = static_cast<Eigen::Index>(points_.size());
  if (v.size() != n) throw DataError("smoother input has wrong length");
  Eigen::VectorXd out(n);
  if (continuous_.empty()) {
    std::vector<double> acc(strata_.size(), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) acc[stratum_of_[i]] += v[i];
    for (Eigen::Index i = 0; i < n; ++i) out[i] = acc[stratum_of_[i]];
    return out;
  }
  for (std::size_t s = 0; s < strata_.size(); ++s) {
    const auto& rows = strata_[s];
    Eigen::VectorXd local(rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a) local[a] = v[rows[a]];
    if (!kernel_cache_.empty()) {
      Eigen::VectorXd r = kernel_cache_[s] * local;
      for (std::size_t a = 0; a < rows.size(); ++a) out[rows[a]] = r[a];
    } else {
      for (std::size_t a = 0; a < rows.size(); ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < rows.size(); ++b)
          acc += distance_weight(points_[rows[a]], points_[rows[b]]) * local[b];
        out[rows[a]] = acc;
      }
    }
  }
  return out;
}

double ConditionalSmoother::sum_at(std::span<const double> x0, const Eigen::VectorXd& v) const {
  if (x0.size() != kinds_.size()) throw DataError("evaluation point has wrong dimension");
  std::vector<double> key;
  for (auto k : discrete_) key.push_back(x0[k]);
  auto it = stratum_index_.find(key);
  if (it == stratum_index_.end()) return 0.0;
  double acc = 0.0;
  for (auto j : strata_[it->second]) {
    const double w = continuous_.empty() ? 1.0 : distance_weight(points_[j], x0);
    acc += w * v[static_cast<Eigen::Index>(j)];
  }
  return acc;
}

void ConditionalSmoother::check_mass(const Eigen::VectorXd& mass_sums) const {
  for (Eigen::Index i = 0; i < mass_sums.size(); ++i) {
    if (!(mass_sums[i] >= kDenominatorFloor)) {
      if (continuous_.empty()) throw EmptyCell(describe(static_cast<std::size_t>(i)));
      throw DegenerateWindow(describe(static_cast<std::size_t>(i)));
    }
  }
}

Eigen::VectorXd ConditionalSmoother::ratio(const Eigen::VectorXd& num, const Eigen::VectorXd& den,
                                           const Eigen::VectorXd& mass) const {
  check_mass(sums(mass));
  return sums(num).cwiseQuotient(sums(den));
}

std::string ConditionalSmoother::describe(std::size_t i) const {
  return format_point(points_[i], names_);
}

std::string ConditionalSmoother::describe_point(std::span<const double> x0) const {
  return format_point(x0, names_);
}

}  // namespace semimnar
