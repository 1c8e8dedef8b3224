#include "semimnar/working_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semimnar/errors.hpp"
#include "semimnar/profile.hpp"

namespace semimnar {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

DesignTerm parse_term(const std::string& raw, const Dataset& schema) {
  DesignTerm t;
  t.label = trim(raw);
  if (t.label.empty()) throw ConfigError("empty design term");
  if (t.label == "1") return t;
  std::stringstream ss(t.label);
  std::string factor;
  while (std::getline(ss, factor, '*')) {
    factor = trim(factor);
    int power = 1;
    std::string name = factor;
    if (const auto caret = factor.find('^'); caret != std::string::npos) {
      name = trim(factor.substr(0, caret));
      const std::string p = trim(factor.substr(caret + 1));
      try {
        std::size_t used = 0;
        power = std::stoi(p, &used);
        if (used != p.size()) throw std::invalid_argument(p);
      } catch (const std::exception&) {
        throw ConfigError("design term '" + t.label + "': bad power '" + p + "'");
      }
      if (power < 1) throw ConfigError("design term '" + t.label + "': power must be >= 1");
    }
    const auto idx = schema.covariate_index(name);
    if (!idx) throw ConfigError("design term '" + t.label + "' names unknown covariate '" + name + "'");
    t.factors.emplace_back(*idx, power);
  }
  return t;
}

}  // namespace

Design::Design(const std::vector<std::string>& terms, const Dataset& schema) {
  if (terms.empty()) throw ConfigError("working design has no terms");
  for (const auto& raw : terms) terms_.push_back(parse_term(raw, schema));
}

std::vector<std::string> Design::labels() const {
  std::vector<std::string> out;
  for (const auto& t : terms_) out.push_back(t.label);
  return out;
}

void Design::features(std::span<const double> x, Eigen::Ref<Eigen::VectorXd> out) const {
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    double v = 1.0;
    for (const auto& [idx, power] : terms_[k].factors) {
      const double b = x[idx];
      for (int p = 0; p < power; ++p) v *= b;
    }
    out[static_cast<Eigen::Index>(k)] = v;
  }
}

Eigen::VectorXd Design::features(std::span<const double> x) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(terms_.size()));
  features(x, out);
  return out;
}

double OutcomeWorkingModel::mean(std::span<const double> x) const {
  return design.features(x).dot(beta);
}

std::vector<std::string> default_design(const Dataset& schema) {
  std::vector<std::string> t{"1"};
  for (const auto& nm : schema.x1_names()) t.push_back(nm);
  for (const auto& nm : schema.x2_names()) t.push_back(nm);
  return t;
}

OutcomeWorkingModel fit_working_model(const Dataset& data, const Design& design) {
  const auto p = static_cast<Eigen::Index>(design.size());
  std::vector<std::size_t> resp;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].delta == 1) resp.push_back(i);
  if (static_cast<Eigen::Index>(resp.size()) < p + 1)
    throw DataError("working model needs at least " + std::to_string(p + 1) +
                    " respondents, have " + std::to_string(resp.size()));

  const auto m = static_cast<Eigen::Index>(resp.size());
  Eigen::MatrixXd X(m, p);
  Eigen::VectorXd y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& o = data[resp[static_cast<std::size_t>(r)]];
    const auto x = full_covariates(o);
    Eigen::VectorXd f = design.features(x);
    X.row(r) = f.transpose();
    y[r] = *o.y;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < p; ++k) {
      if (!cols.empty()) cols += ", ";
      cols += design.terms()[static_cast<std::size_t>(perm[k])].label;
    }
    throw SingularDesign("working design is rank deficient; collinear columns: " + cols);
  }

  OutcomeWorkingModel model;
  model.design = design;
  model.beta = qr.solve(y);
  model.sigma2 = (y - X * model.beta).squaredNorm() / static_cast<double>(m);
  return model;
}

OutcomeWorkingModel fit_working_model(const Dataset& data, const std::vector<std::string>& terms) {
  return fit_working_model(data, Design(terms, data));
}

FractionalSample draw_fractional(const OutcomeWorkingModel& model, std::span<const double> x,
                                 std::size_t s, std::mt19937_64& rng) {
  if (s == 0) throw ConfigError("fractional sample size must be >= 1");
  const double mu = model.mean(x);
  const double sd = std::sqrt(model.sigma2);
  std::normal_distribution<double> z;
  FractionalSample out;
  out.draws.resize(s);
  for (auto& d : out.draws) d = mu + sd * z(rng);
  return out;
}

std::vector<double> fi_tilt_weights(const FractionalSample& sample, double gamma) {
  if (sample.draws.empty()) throw ConfigError("empty fractional sample");
  double c = -std::numeric_limits<double>::infinity();
  for (double y : sample.draws) c = std::max(c, gamma * y);
  std::vector<double> w(sample.draws.size());
  double total = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = std::exp(gamma * sample.draws[j] - c);
    total += w[j];
  }
  for (auto& v : w) v /= total;
  return w;
}

double fi_tilted_expectation(const FractionalSample& sample, double gamma,
                             const std::function<double(double)>& e_fn) {
  const auto w = fi_tilt_weights(sample, gamma);
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * e_fn(sample.draws[j]);
  return acc;
}

TiltedMoments analytic_tilted_moments(double mu, double sigma2, double gamma) {
  TiltedMoments m;
  m.m0 = std::exp(gamma * mu + 0.5 * gamma * gamma * sigma2);
  m.m1 = m.m0 * (mu + gamma * sigma2);
  const double g2 = 2.0 * gamma;
  m.m0_2g = std::exp(g2 * mu + 0.5 * g2 * g2 * sigma2);
  m.m1_2g = m.m0_2g * (mu + g2 * sigma2);
  return m;
}

TiltedMoments analytic_tilted_moments(const OutcomeWorkingModel& model, std::span<const double> x,
                                      double gamma) {
  return analytic_tilted_moments(model.mean(x), model.sigma2, gamma);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace semimnar
