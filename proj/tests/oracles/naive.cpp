#include "naive.hpp"

#include <cmath>
#include <limits>

namespace naive {

double k_x1(const Observation& a, const Observation& b) { return a.x1 == b.x1 ? 1.0 : 0.0; }

double k_x(const Dataset& d, const Observation& a, const Observation& b, double h) {
  if (a.x1 != b.x1) return 0.0;
  double w = 1.0;
  for (std::size_t k = 0; k < d.dim_x2(); ++k) {
    if (d.x2_kinds()[k].is_discrete()) {
      if (a.x2[k] != b.x2[k]) return 0.0;
    } else {
      const double u = (a.x2[k] - b.x2[k]) / h;
      w *= std::exp(-0.5 * u * u);
    }
  }
  return w;
}

std::vector<double> log_g(const Dataset& d, double gamma) {
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      const double k = k_x1(d[i], d[j]);
      if (d[j].delta) num += k * std::exp(gamma * *d[j].y);
      else den += k;
    }
    out[i] = std::log(num / den);
  }
  return out;
}

std::vector<double> pi(const Dataset& d, double gamma) {
  const auto g = log_g(d, gamma);
  std::vector<double> out(d.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i].delta) out[i] = 1.0 / (1.0 + std::exp(-g[i] + gamma * *d[i].y));
  return out;
}

std::vector<double> tilted(const Dataset& d, double gamma, double h, bool by_x1,
                           const std::function<double(std::size_t)>& v) {
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (!d[j].delta) continue;
      const double k = by_x1 ? k_x1(d[i], d[j]) : k_x(d, d[i], d[j], h);
      const double w = k * std::exp(gamma * *d[j].y);
      num += w * v(j);
      den += w;
    }
    out[i] = num / den;
  }
  return out;
}

double calibration_residual(const Dataset& d, double gamma, const std::vector<double>& m) {
  const auto p = pi(d, gamma);
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) acc += ((d[i].delta ? 1.0 / p[i] : 0.0) - 1.0) * m[i];
  return acc / static_cast<double>(d.size());
}

double score_residual(const Dataset& d, double gamma, double h) {
  const auto p = pi(d, gamma);
  const auto e0 = tilted(d, gamma, h, false, [&](std::size_t j) { return p[j] * *d[j].y; });
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    acc += d[i].delta ? (1.0 - p[i]) * *d[i].y : -e0[i];
  return acc / static_cast<double>(d.size());
}

std::vector<double> ca1(const Dataset& d, double gamma, double h) {
  const auto p = pi(d, gamma);
  return tilted(d, gamma, h, false, [&](std::size_t j) { return p[j] * *d[j].y; });
}

std::vector<double> ca2(const Dataset& d, double gamma, double h) {
  const auto p = pi(d, gamma);
  const auto ey = tilted(d, gamma, h, false, [&](std::size_t j) { return *d[j].y; });
  const auto einv = tilted(d, gamma, h, false, [&](std::size_t j) { return 1.0 / p[j]; });
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = ey[i] / einv[i];
  return out;
}

Sandwich sandwich(const Dataset& d, double gamma, const std::vector<double>& m) {
  const auto p = pi(d, gamma);
  const auto ey1 = tilted(d, gamma, 0.0, true, [&](std::size_t j) { return *d[j].y; });
  const auto em1 = tilted(d, gamma, 0.0, true, [&](std::size_t j) { return m[j]; });
  Sandwich s;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double mc = m[i] - em1[i];
    if (d[i].delta) {
      const double odds = (1.0 - p[i]) / p[i];
      s.A += odds * (*d[i].y - ey1[i]) * mc;
      const double w = 1.0 / p[i] - 1.0;
      s.B += w * w * mc * mc;
    } else {
      s.B += mc * mc;
    }
  }
  const double n = static_cast<double>(d.size());
  s.A /= n;
  s.B /= n;
  return s;
}

double mu_ipw(const Dataset& d, double gamma) {
  const auto p = pi(d, gamma);
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i].delta) acc += *d[i].y / p[i];
  return acc / static_cast<double>(d.size());
}

double mu_mp(const Dataset& d, double gamma, double h) {
  const auto e0 = tilted(d, gamma, h, false, [&](std::size_t j) { return *d[j].y; });
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) acc += d[i].delta ? *d[i].y : e0[i];
  return acc / static_cast<double>(d.size());
}

double mu_db(const Dataset& d, double gamma, double h) {
  const auto p = pi(d, gamma);
  const auto e0 = tilted(d, gamma, h, false, [&](std::size_t j) { return *d[j].y; });
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].delta) acc += *d[i].y / p[i] + (1.0 - 1.0 / p[i]) * e0[i];
    else acc += e0[i];
  }
  return acc / static_cast<double>(d.size());
}

}  // namespace naive
