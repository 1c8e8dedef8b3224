#include "semimnar/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "semimnar/errors.hpp"
#include "semimnar/root_finding.hpp"

namespace semimnar {

double ResponseSpec::g(double x1) const {
  auto coef = [&](std::size_t k) { return k < phi.size() ? phi[k] : 0.0; };
  switch (basis) {
    case GBasis::linear: return coef(0) + coef(1) * x1;
    case GBasis::quadratic: return coef(0) + coef(1) * x1 + coef(2) * x1 * x1;
    case GBasis::sine: return coef(0) + coef(1) * std::sin(x1);
    case GBasis::sqrt_linear: return coef(0) + coef(1) * std::sqrt(x1) + coef(2) * x1;
  }
  return 0.0;
}

double ResponseSpec::pi(double x1, double y) const { return expit(g(x1) - gamma * y); }

DgpFamily parse_dgp_family(const std::string& s) {
  if (s == "discrete") return DgpFamily::discrete;
  if (s == "mixed") return DgpFamily::mixed;
  if (s == "impose") return DgpFamily::impose;
  throw ConfigError("unknown dgp family '" + s + "' (valid: discrete, mixed, impose)");
}

std::string to_string(DgpFamily f) {
  switch (f) {
    case DgpFamily::discrete: return "discrete";
    case DgpFamily::mixed: return "mixed";
    case DgpFamily::impose: return "impose";
  }
  return "?";
}

ResponseModelId parse_response_model(const std::string& s) {
  if (s == "M1" || s == "m1") return ResponseModelId::M1;
  if (s == "M2" || s == "m2") return ResponseModelId::M2;
  if (s == "M3" || s == "m3") return ResponseModelId::M3;
  throw ConfigError("unknown response model '" + s + "' (valid: M1, M2, M3)");
}

std::string to_string(ResponseModelId m) {
  switch (m) {
    case ResponseModelId::M1: return "M1";
    case ResponseModelId::M2: return "M2";
    case ResponseModelId::M3: return "M3";
  }
  return "?";
}

ResponseSpec discrete_response(ResponseModelId m, bool as_printed) {
  switch (m) {
    case ResponseModelId::M1:
      return {GBasis::linear, {0.2, 0.8}, 0.6};
    case ResponseModelId::M2:
      if (as_printed) return {GBasis::quadratic, {-0.2, 0.4, -0.7}, 0.6};
      return {GBasis::quadratic, {0.2, -0.4, 0.7}, 0.6};
    case ResponseModelId::M3:
      if (as_printed) return {GBasis::sine, {1.6, 0.8}, 0.6};
      return {GBasis::sine, {1.6, -0.8}, 0.6};
  }
  throw ConfigError("unknown response model");
}

ResponseSpec mixed_response(ResponseModelId m) {
  switch (m) {
    case ResponseModelId::M1: return {GBasis::linear, {0.3, 0.4}, 0.5};
    case ResponseModelId::M2: return {GBasis::quadratic, {0.3, 0.3, 0.2}, 0.5};
    case ResponseModelId::M3: return {GBasis::sine, {0.3, 0.3}, 0.5};
  }
  throw ConfigError("unknown response model");
}

ResponseSpec impose_response(ResponseModelId m) {
  switch (m) {
    case ResponseModelId::M1: return {GBasis::sqrt_linear, {1.3, 0.3, 0.2}, 0.6};
    case ResponseModelId::M2: return {GBasis::linear, {1.2, 0.5}, 0.6};
    case ResponseModelId::M3: break;
  }
  throw ConfigError("the impose family defines only M1 and M2");
}

DgpSpec make_dgp(DgpFamily family, ResponseModelId model, std::size_t n, bool as_printed) {
  DgpSpec d;
  d.family = family;
  d.model = model;
  d.n = n;
  switch (family) {
    case DgpFamily::discrete: d.response = discrete_response(model, as_printed); break;
    case DgpFamily::mixed: d.response = mixed_response(model); break;
    case DgpFamily::impose: d.response = impose_response(model); break;
  }
  return d;
}

namespace {

double discrete_y_prob(int x1, int x2) {
  const double t = x1 - 1.6;
  return 1.0 / (1.0 + std::exp(1.3 - t * t - 1.5 * x2));
}

double mixed_mu1(double x1, double x2) { return -1.0 - 0.4 * x1 + 0.5 * x2 * x2; }

// P(delta = 1 | x) when Y | x, delta = 1 ~ N(mu1, 1) and the odds of
// nonresponse are exp(-g + gamma y).
double mixed_response_prob(const ResponseSpec& r, double x1, double x2) {
  const double mu = mixed_mu1(x1, x2);
  return expit(r.g(x1) - r.gamma * mu - 0.5 * r.gamma * r.gamma);
}

}  // namespace

Dataset gen_discrete(const DgpSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> level(0, 3);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Observation> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int x1 = level(rng);
    const int x2 = coin(rng) ? 1 : 0;
    const double y = u(rng) < discrete_y_prob(x1, x2) ? 1.0 : 0.0;
    const int delta = u(rng) < spec.response.pi(x1, y) ? 1 : 0;
    Observation o;
    o.x1 = {static_cast<double>(x1)};
    o.x2 = {static_cast<double>(x2)};
    o.delta = delta;
    if (delta) o.y = y;
    rows.push_back(std::move(o));
  }
  return Dataset({"x1"}, {VariableKind::discrete({0, 1, 2, 3})}, {"x2"},
                 {VariableKind::discrete({0, 1})}, std::move(rows));
}

Dataset gen_mixed(const DgpSpec& spec, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  const double gamma = spec.response.gamma;
  std::vector<Observation> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x1 = coin(rng) ? 1.0 : 0.0;
    const double x2 = ux(rng);
    const int delta = u(rng) < mixed_response_prob(spec.response, x1, x2) ? 1 : 0;
    const double y = mixed_mu1(x1, x2) + (delta ? 0.0 : gamma) + z(rng);
    Observation o;
    o.x1 = {x1};
    o.x2 = {x2};
    o.delta = delta;
    if (delta) o.y = y;
    rows.push_back(std::move(o));
  }
  return Dataset({"x1"}, {VariableKind::discrete({0, 1})}, {"x2"}, {VariableKind::continuous()},
                 std::move(rows));
}

Dataset impose_missingness(const Dataset& complete, const ResponseSpec& response,
                           std::mt19937_64& rng) {
  if (complete.dim_x1() < 1) throw DataError("imposing missingness needs an x1 column");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Observation> rows;
  rows.reserve(complete.size());
  for (std::size_t i = 0; i < complete.size(); ++i) {
    Observation o = complete[i];
    if (!o.y) throw DataError("row " + std::to_string(i) + ": y is missing in the complete data");
    const double x1 = o.x1[0];
    if (response.basis == GBasis::sqrt_linear && x1 < 0.0)
      throw DataError("row " + std::to_string(i) + ": sqrt response model needs x1 >= 0");
    o.delta = u(rng) < response.pi(x1, *o.y) ? 1 : 0;
    if (!o.delta) o.y.reset();
    rows.push_back(std::move(o));
  }
  return complete.with_rows(std::move(rows));
}

double discrete_true_mean() {
  double acc = 0.0;
  for (int x1 = 0; x1 < 4; ++x1)
    for (int x2 = 0; x2 < 2; ++x2) acc += discrete_y_prob(x1, x2);
  return acc / 8.0;
}

double mixed_true_mean(const ResponseSpec& response) {
  const double gamma = response.gamma;
  double acc = 0.0;
  for (double x1 : {0.0, 1.0}) {
    auto f = [&](double x2) {
      const double p1 = mixed_response_prob(response, x1, x2);
      return mixed_mu1(x1, x2) + gamma * (1.0 - p1);
    };
    acc += 0.5 * 0.5 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -1.0, 1.0);
  }
  return acc;
}

// --- study runner ----------------------------------------------------------

void validate_config(const StudyConfig& cfg) {
  if (cfg.reps < 1) throw ConfigError("reps must be >= 1");
  if (cfg.dgp.family != DgpFamily::impose && cfg.dgp.n < 1) throw ConfigError("n must be >= 1");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.gamma_estimators.empty()) throw ConfigError("no gamma estimators requested");
  for (const auto& id : cfg.gamma_estimators) parse_gamma_method(id);
  for (const auto& id : cfg.mu_estimators) parse_mu_method(id);
  if (!std::isfinite(cfg.dgp.response.gamma)) throw ConfigError("response gamma must be finite");
  for (double c : cfg.dgp.response.phi)
    if (!std::isfinite(c)) throw ConfigError("response coefficients must be finite");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (cfg.dgp.family == DgpFamily::impose && !cfg.complete)
    throw ConfigError("the impose family needs a complete dataset");
}

std::vector<std::string> outcome_design(DgpFamily family) {
  if (family == DgpFamily::mixed) return {"1", "x1", "x2^2"};
  return {};
}

Dataset generate(const StudyConfig& cfg, std::uint64_t rep_seed) {
  std::mt19937_64 rng(derive_seed(rep_seed, 0));
  switch (cfg.dgp.family) {
    case DgpFamily::discrete: return gen_discrete(cfg.dgp, rng);
    case DgpFamily::mixed: return gen_mixed(cfg.dgp, rng);
    case DgpFamily::impose: return impose_missingness(*cfg.complete, cfg.dgp.response, rng);
  }
  throw ConfigError("unknown dgp family");
}

namespace {

std::vector<ReplicationRecord> run_one(const StudyConfig& cfg, std::size_t rep) {
  const std::uint64_t rep_seed = cfg.base_seed + rep;
  std::vector<ReplicationRecord> out;
  auto fail_all = [&](const std::string& est, const std::string& msg) {
    out.push_back({rep, est, "gamma", false, 0.0, std::nullopt, msg});
    for (const auto& mu : cfg.mu_estimators) out.push_back({rep, est, mu, false, 0.0, std::nullopt, msg});
  };

  std::optional<Sample> sample;
  try {
    sample.emplace(generate(cfg, rep_seed), cfg.smoothing);
  } catch (const NumericalError& e) {
    for (const auto& est : cfg.gamma_estimators) fail_all(est, e.what());
    return out;
  } catch (const DataError& e) {
    for (const auto& est : cfg.gamma_estimators) fail_all(est, e.what());
    return out;
  }

  for (const auto& est : cfg.gamma_estimators) {
    GammaOptions gopt = cfg.gamma_options;
    gopt.seed = rep_seed;
    if (gopt.design.empty()) gopt.design = outcome_design(cfg.dgp.family);
    GammaFit fit;
    try {
      fit = estimate_gamma(*sample, parse_gamma_method(est), gopt);
    } catch (const NumericalError& e) {
      fail_all(est, e.what());
      continue;
    } catch (const DataError& e) {
      fail_all(est, e.what());
      continue;
    }
    std::optional<GammaSandwich> gs;
    std::string var_error;
    if (cfg.variances) {
      try {
        gs = gamma_sandwich(*sample, fit);
      } catch (const NumericalError& e) {
        var_error = e.what();
      }
    }
    out.push_back({rep, est, "gamma", true, fit.result.gamma_hat,
                   gs ? std::optional<double>(gs->variance) : std::nullopt, var_error});

    for (const auto& mu_id : cfg.mu_estimators) {
      MuOptions mopt = cfg.mu_options;
      mopt.seed = rep_seed;
      if (mopt.design.empty()) mopt.design = outcome_design(cfg.dgp.family);
      const MuMethod mm = parse_mu_method(mu_id);
      try {
        const MuEstimate mu = estimate_mu(*sample, fit, mm, mopt);
        std::optional<double> var;
        if (gs) var = variance_mu(*sample, fit.state, mm, mu.e0_y, *gs);
        out.push_back({rep, est, mu_id, true, mu.value, var, var_error});
      } catch (const NumericalError& e) {
        out.push_back({rep, est, mu_id, false, 0.0, std::nullopt, e.what()});
      } catch (const DataError& e) {
        out.push_back({rep, est, mu_id, false, 0.0, std::nullopt, e.what()});
      }
    }
  }
  return out;
}

}  // namespace

const SummaryRow& SimulationReport::row(const std::string& estimator,
                                        const std::string& target) const {
  for (const auto& r : rows)
    if (r.estimator == estimator && r.target == target) return r;
  throw ConfigError("report has no row for " + estimator + " / " + target);
}

SimulationReport run_study(const StudyConfig& cfg) {
  validate_config(cfg);

  SimulationReport rep;
  rep.dgp = to_string(cfg.dgp.family) + "-" + to_string(cfg.dgp.model);
  rep.n = cfg.dgp.family == DgpFamily::impose ? cfg.complete->size() : cfg.dgp.n;
  rep.reps = cfg.reps;
  rep.base_seed = cfg.base_seed;
  rep.alpha = cfg.alpha;
  rep.gamma_true = cfg.dgp.response.gamma;
  switch (cfg.dgp.family) {
    case DgpFamily::discrete: rep.mu_true = discrete_true_mean(); break;
    case DgpFamily::mixed: rep.mu_true = mixed_true_mean(cfg.dgp.response); break;
    case DgpFamily::impose: {
      double acc = 0.0;
      for (const auto& o : cfg.complete->rows()) {
        if (!o.y) throw ConfigError("complete dataset has missing y");
        acc += *o.y;
      }
      rep.mu_true = acc / static_cast<double>(cfg.complete->size());
      break;
    }
  }

  std::vector<std::vector<ReplicationRecord>> per_rep(cfg.reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.reps; r = next++) per_rep[r] = run_one(cfg, r);
  };
  const std::size_t nthreads = std::min(cfg.workers, cfg.reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& v : per_rep)
    for (auto& r : v) rep.records.push_back(std::move(r));

  const double z = normal_quantile(1.0 - cfg.alpha / 2.0);
  std::vector<std::string> targets{"gamma"};
  targets.insert(targets.end(), cfg.mu_estimators.begin(), cfg.mu_estimators.end());
  std::size_t failure_lines = 0;
  for (const auto& est : cfg.gamma_estimators) {
    for (const auto& tgt : targets) {
      SummaryRow row;
      row.estimator = est;
      row.target = tgt;
      row.truth = tgt == "gamma" ? rep.gamma_true : rep.mu_true;
      double sum = 0.0, sq = 0.0, hw = 0.0;
      std::size_t covered = 0;
      for (const auto& r : rep.records) {
        if (r.estimator != est || r.target != tgt) continue;
        if (!r.ok) {
          ++row.failures;
          if (failure_lines++ < 20)
            rep.diagnostics.push_back("rep " + std::to_string(r.rep) + " " + est + "/" + tgt +
                                      ": " + r.error);
          continue;
        }
        ++row.ok;
        const double e = r.value - row.truth;
        sum += e;
        sq += e * e;
        if (r.variance) {
          const double h = z * std::sqrt(*r.variance);
          ++row.ci_count;
          hw += h;
          if (std::fabs(e) <= h) ++covered;
        }
      }
      if (row.ok) {
        row.bias = sum / static_cast<double>(row.ok);
        row.mse = sq / static_cast<double>(row.ok);
      } else {
        row.bias = row.mse = std::numeric_limits<double>::quiet_NaN();
      }
      if (row.ci_count) {
        row.coverage = static_cast<double>(covered) / static_cast<double>(row.ci_count);
        row.mean_half_width = hw / static_cast<double>(row.ci_count);
      } else {
        row.coverage = row.mean_half_width = std::numeric_limits<double>::quiet_NaN();
      }
      rep.rows.push_back(row);
    }
  }
  if (failure_lines > 20)
    rep.diagnostics.push_back(std::to_string(failure_lines - 20) + " further failures not listed");
  return rep;
}

}  // namespace semimnar
