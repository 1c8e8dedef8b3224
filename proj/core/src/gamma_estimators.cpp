#include "semimnar/gamma_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "semimnar/errors.hpp"

namespace semimnar {

namespace {

struct MethodInfo {
  GammaMethod method;
  const char* id;
};

constexpr MethodInfo kMethods[] = {
    {GammaMethod::p_gmm, "p-gmm"},       {GammaMethod::p_score, "p-score"},
    {GammaMethod::p_ca1, "p-ca1"},       {GammaMethod::p_ca2, "p-ca2"},
    {GammaMethod::pw_score, "pw-score"}, {GammaMethod::pw_ca1, "pw-ca1"},
    {GammaMethod::pw_ca2_s, "pw-ca2-s"}, {GammaMethod::pw_ca2_a, "pw-ca2-a"},
    {GammaMethod::p_mle, "p-mle"},
};

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& gamma_method_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& m : kMethods) v.emplace_back(m.id);
    return v;
  }();
  return ids;
}

GammaMethod parse_gamma_method(const std::string& id) {
  for (const auto& m : kMethods)
    if (id == m.id) return m.method;
  throw ConfigError("unknown gamma estimator '" + id + "'; valid ids: " + join(gamma_method_ids()));
}

std::string to_string(GammaMethod m) {
  for (const auto& info : kMethods)
    if (info.method == m) return info.id;
  return "?";
}

bool uses_working_model(GammaMethod m) {
  switch (m) {
    case GammaMethod::pw_score:
    case GammaMethod::pw_ca1:
    case GammaMethod::pw_ca2_s:
    case GammaMethod::pw_ca2_a:
      return true;
    default:
      return false;
  }
}

InstrumentMode parse_instrument_mode(const std::string& s) {
  if (s == "x2") return InstrumentMode::x2;
  if (s == "x2-levels") return InstrumentMode::x2_levels;
  if (s == "x1") return InstrumentMode::x1;
  throw ConfigError("unknown instrument mode '" + s + "'; valid: x2, x2-levels, x1");
}

std::string to_string(InstrumentMode m) {
  switch (m) {
    case InstrumentMode::x2: return "x2";
    case InstrumentMode::x2_levels: return "x2-levels";
    case InstrumentMode::x1: return "x1";
  }
  return "?";
}

// --- moments ---------------------------------------------------------------

Eigen::MatrixXd Ca1Moment::evaluate(const ProfileState& st) const {
  return e_.evaluate(E0Functional::pi_y, st);
}

Eigen::MatrixXd Ca2Moment::evaluate(const ProfileState& st) const {
  constexpr E0Functional fs[] = {E0Functional::y, E0Functional::inv_pi};
  const Eigen::MatrixXd v = e_.evaluate_many(fs, st);
  return v.col(0).cwiseQuotient(v.col(1));
}

FixedMoment instrument_moment(const Sample& s, InstrumentMode mode) {
  const Dataset& d = s.data();
  const auto n = static_cast<Eigen::Index>(s.size());
  std::vector<Eigen::VectorXd> cols;
  std::vector<std::string> names;
  auto coord = [&](bool from_x2, std::size_t k) {
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& o = d[static_cast<std::size_t>(i)];
      c[i] = from_x2 ? o.x2[k] : o.x1[k];
    }
    return c;
  };
  switch (mode) {
    case InstrumentMode::x2:
      for (std::size_t k = 0; k < d.dim_x2(); ++k) {
        cols.push_back(coord(true, k));
        names.push_back(d.x2_names()[k]);
      }
      break;
    case InstrumentMode::x1:
      for (std::size_t k = 0; k < d.dim_x1(); ++k) {
        cols.push_back(coord(false, k));
        names.push_back(d.x1_names()[k]);
      }
      break;
    case InstrumentMode::x2_levels:
      for (std::size_t k = 0; k < d.dim_x2(); ++k) {
        const auto& kind = d.x2_kinds()[k];
        if (!kind.is_discrete())
          throw ConfigError("instrument mode x2-levels needs discrete instruments; '" +
                            d.x2_names()[k] + "' is continuous");
        const Eigen::VectorXd raw = coord(true, k);
        const auto& levels = kind.levels();
        for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
          cols.push_back((raw.array() == levels[l]).cast<double>().matrix());
          std::ostringstream os;
          os << d.x2_names()[k] << "==" << levels[l];
          names.push_back(os.str());
        }
      }
      break;
  }
  if (cols.empty()) throw ConfigError("instrument moment has no columns");
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = cols[c];
  return FixedMoment(std::move(m), "instrument(" + join(names) + ")");
}

// --- residuals -------------------------------------------------------------

Eigen::VectorXd calibration_residual(const Sample& s, const ProfileState& st,
                                     const Eigen::MatrixXd& m) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w[i] = st.calibration_weight(s, static_cast<std::size_t>(i));
  return m.transpose() * w / static_cast<double>(n);
}

Eigen::VectorXd calibration_residual(const ResponseFitter& fitter, double gamma,
                                     const MomentFunction& m) {
  const ProfileState st = fitter.fit(gamma);
  return calibration_residual(fitter.sample(), st, m.evaluate(st));
}

double score_residual(const Sample& s, const ProfileState& st, const E0Engine& e0) {
  double acc = 0.0;
  for (auto j : s.respondents()) {
    const auto idx = static_cast<Eigen::Index>(j);
    acc += (1.0 - st.pi[idx]) * s.y()[idx];
  }
  if (!s.nonrespondents().empty()) acc -= e0.evaluate(E0Functional::pi_y, st, s.nonrespondents()).sum();
  return acc / static_cast<double>(s.size());
}

double score_residual(const ResponseFitter& fitter, double gamma, const E0Engine& e0) {
  return score_residual(fitter.sample(), fitter.fit(gamma), e0);
}

// --- solvers ---------------------------------------------------------------

GammaSolveResult solve_scalar_root(const std::function<double(double)>& f,
                                   const GammaOptions& opt) {
  if (!(opt.lo < opt.hi)) throw ConfigError("gamma bracket must satisfy lo < hi");
  if (opt.scan_points < 1) throw ConfigError("scan_points must be >= 1");
  GammaSolveResult res;
  int evals = 0;

  struct Cell {
    double a, b, fa, fb;
  };
  auto scan = [&](double lo, double hi, int cells) {
    std::vector<double> xs(static_cast<std::size_t>(cells) + 1), fs(xs.size());
    const double step = (hi - lo) / cells;
    for (int k = 0; k <= cells; ++k) {
      xs[k] = k == cells ? hi : lo + step * k;
      fs[k] = f(xs[k]);
      ++evals;
    }
    auto changes = [](double fa, double fb) {
      return std::isfinite(fa) && std::isfinite(fb) && (fa == 0.0 || (fa < 0.0) != (fb < 0.0));
    };
    std::vector<Cell> out;
    for (int k = 0; k < cells; ++k)
      if (changes(fs[k], fs[k + 1])) out.push_back({xs[k], xs[k + 1], fs[k], fs[k + 1]});

    // A dip narrower than one cell shows up only as a local minimum of |f|
    // on the grid. Look for the extremum between the neighbours.
    for (int k = 0; k <= cells; ++k) {
      const int l = std::max(k - 1, 0), r = std::min(k + 1, cells);
      if (!std::isfinite(fs[k]) || fs[k] == 0.0) continue;
      bool candidate = true;
      for (int j : {l, r})
        if (j != k && (!std::isfinite(fs[j]) || changes(fs[k], fs[j]) ||
                       std::fabs(fs[j]) < std::fabs(fs[k])))
          candidate = false;
      if (!candidate) continue;
      const double sgn = fs[k] > 0.0 ? 1.0 : -1.0;
      std::uintmax_t iters = 60;
      const auto [xm, vm] = boost::math::tools::brent_find_minima(
          [&](double x) {
            ++evals;
            const double v = f(x);
            return std::isfinite(v) ? sgn * v : std::numeric_limits<double>::infinity();
          },
          xs[l], xs[r], 30, iters);
      if (vm < 0.0) {
        const double fm = sgn * vm;
        if (xm > xs[l]) out.push_back({xs[l], xm, fs[l], fm});
        if (xm < xs[r]) out.push_back({xm, xs[r], fm, fs[r]});
      }
    }
    std::sort(out.begin(), out.end(), [](const Cell& x, const Cell& y) { return x.a < y.a; });
    return out;
  };

  double lo = opt.lo, hi = opt.hi;
  std::vector<Cell> cells = scan(lo, hi, opt.scan_points);
  if (cells.empty()) {
    std::ostringstream os;
    os << "no sign change on [" << lo << ", " << hi << "]; bracket doubled";
    res.diagnostics.push_back(os.str());
    res.bracket_expanded = true;
    lo *= 2.0;
    hi *= 2.0;
    cells = scan(lo, hi, 2 * opt.scan_points);
    if (cells.empty()) throw NoSignChange(lo, hi, f(lo), f(hi));
  }

  // Several crossings: prefer the upward ones (the sign of the sandwich
  // derivative at a consistent root), then the one nearest gamma_init.
  auto dist = [&](const Cell& c) {
    if (opt.gamma_init >= c.a && opt.gamma_init <= c.b) return 0.0;
    return std::min(std::fabs(c.a - opt.gamma_init), std::fabs(c.b - opt.gamma_init));
  };
  const Cell* pick = nullptr;
  for (const auto& c : cells) {
    const bool up = c.fa < c.fb;
    const bool pick_up = pick && pick->fa < pick->fb;
    if (!pick || (up && !pick_up) || (up == pick_up && dist(c) < dist(*pick))) pick = &c;
  }
  if (cells.size() > 1)
    res.diagnostics.push_back(std::to_string(cells.size()) +
                              " sign changes on the bracket; took the upward crossing nearest "
                              "the starting value");

  const RootResult r = brent_root(f, pick->a, pick->b, pick->fa, pick->fb, opt.root);
  res.gamma_hat = r.x;
  res.residual = std::fabs(r.f);
  res.iterations = r.iterations;
  res.evaluations = r.evaluations + evals;
  res.lo = lo;
  res.hi = hi;
  return res;
}

namespace {

void finish(GammaSolveResult& res, const ResponseFitter& fitter, const char* method) {
  res.method = method;
  res.clip_count = fitter.fit(res.gamma_hat).clip_count;
  if (res.clip_count > 0)
    res.diagnostics.push_back(std::to_string(res.clip_count) + " response probabilities clipped");
}

/// Coarse scan followed by Brent minimization around the best grid point.
std::pair<double, double> minimize_1d(const std::function<double(double)>& f, double lo, double hi,
                                      int grid, int& evaluations) {
  double best_x = lo, best_f = std::numeric_limits<double>::infinity();
  const double step = (hi - lo) / grid;
  for (int k = 0; k <= grid; ++k) {
    const double x = lo + step * k;
    const double v = f(x);
    ++evaluations;
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  const double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
  std::uintmax_t iters = 200;
  const auto [x, v] = boost::math::tools::brent_find_minima(
      [&](double g) {
        ++evaluations;
        return f(g);
      },
      a, b, 40, iters);
  if (v <= best_f) return {x, v};
  return {best_x, best_f};
}

}  // namespace

GammaSolveResult solve_p_gmm(const ResponseFitter& fitter, const MomentFunction& m,
                             const GammaOptions& opt) {
  const Sample& s = fitter.sample();
  if (m.arity() == 1) {
    auto f = [&](double g) { return calibration_residual(fitter, g, m)[0]; };
    GammaSolveResult res;
    try {
      res = solve_scalar_root(f, opt);
    } catch (const NoSignChange&) {
      // No exact solution: minimize the GMM objective r^2 instead.
      int evals = 0;
      const auto [g, q] = minimize_1d([&](double x) { const double v = f(x); return v * v; },
                                      opt.lo, opt.hi, 60, evals);
      res = GammaSolveResult{};
      res.gamma_hat = g;
      res.residual = std::sqrt(q);
      res.evaluations = evals;
      res.lo = opt.lo;
      res.hi = opt.hi;
      res.diagnostics.push_back("moment has no root; minimized its square over the bracket");
    }
    finish(res, fitter, "p-gmm");
    return res;
  }

  // Two-step GMM over the bracket.
  GammaSolveResult res;
  const auto k = static_cast<Eigen::Index>(m.arity());
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(k, k);
  auto objective = [&](double g) {
    const Eigen::VectorXd q = calibration_residual(fitter, g, m);
    return q.dot(W * q);
  };
  int evals = 0;
  auto [g1, q1] = minimize_1d(objective, opt.lo, opt.hi, 60, evals);

  const ProfileState st = fitter.fit(g1);
  const Eigen::MatrixXd mv = m.evaluate(st);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Eigen::VectorXd psi =
        st.calibration_weight(s, i) * mv.row(static_cast<Eigen::Index>(i)).transpose();
    S += psi * psi.transpose();
  }
  S /= static_cast<double>(s.size());
  S += 1e-8 * S.trace() * Eigen::MatrixXd::Identity(k, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const double emin = eig.eigenvalues().minCoeff(), emax = eig.eigenvalues().maxCoeff();
  if (!(emin > 1e-12 * emax) || !(emax > 0.0)) {
    res.diagnostics.push_back("moment covariance ill-conditioned; identity weighting kept");
    res.gamma_hat = g1;
  } else {
    W = S.inverse();
    auto [g2, q2] = minimize_1d(objective, opt.lo, opt.hi, 60, evals);
    res.gamma_hat = g2;
  }
  res.residual = calibration_residual(fitter, res.gamma_hat, m).norm();
  res.evaluations = evals;
  res.lo = opt.lo;
  res.hi = opt.hi;
  finish(res, fitter, "p-gmm");
  return res;
}

GammaSolveResult solve_ca(const ResponseFitter& fitter, const MomentFunction& m,
                          const GammaOptions& opt) {
  if (m.arity() != 1) throw ConfigError("calibration solver expects a scalar moment");
  auto f = [&](double g) { return calibration_residual(fitter, g, m)[0]; };
  GammaSolveResult res = solve_scalar_root(f, opt);
  finish(res, fitter, m.name() == "ca2" ? "p-ca2" : "p-ca1");
  return res;
}

GammaSolveResult solve_score(const ResponseFitter& fitter, const E0Engine& e0,
                             const GammaOptions& opt) {
  auto f = [&](double g) { return score_residual(fitter, g, e0); };
  GammaSolveResult res = solve_scalar_root(f, opt);
  finish(res, fitter, "p-score");
  return res;
}

double em_objective(const ResponseFitter& fitter, const E0Engine& e0, double gamma_t,
                    double gamma) {
  const Sample& s = fitter.sample();
  const ProfileState st = fitter.fit(gamma);
  double acc = 0.0;
  for (auto j : s.respondents()) acc += std::log(st.pi[static_cast<Eigen::Index>(j)]);
  if (!s.nonrespondents().empty()) acc += e0.log1m_pi(gamma_t, st, s.nonrespondents()).sum();
  return acc;
}

GammaSolveResult solve_em_p_mle(const ResponseFitter& fitter, const E0Engine& e0,
                                double gamma_init, double tol, int max_iter,
                                const GammaOptions& opt) {
  if (!(gamma_init >= opt.lo && gamma_init <= opt.hi))
    throw ConfigError("EM starting value lies outside the gamma bracket");
  if (max_iter < 1) throw ConfigError("EM needs max_iter >= 1");
  GammaSolveResult res;
  res.lo = opt.lo;
  res.hi = opt.hi;
  double g = gamma_init;
  int evals = 0;
  for (int t = 1; t <= max_iter; ++t) {
    const double gt = g;
    auto neg = [&](double x) { return -em_objective(fitter, e0, gt, x); };
    g = minimize_1d(neg, opt.lo, opt.hi, 24, evals).first;
    res.iterations = t;
    if (std::fabs(g - gt) < tol) {
      res.gamma_hat = g;
      res.residual = std::fabs(g - gt);
      res.evaluations = evals;
      if (!std::isfinite(tol)) res.diagnostics.push_back("stopped after one EM iteration (tol is infinite)");
      finish(res, fitter, "p-mle");
      return res;
    }
  }
  throw MaxIterations("EM did not converge within " + std::to_string(max_iter) + " iterations");
}

// --- dispatch --------------------------------------------------------------

std::unique_ptr<E0Engine> make_engine(const Sample& s, GammaMethod method,
                                      const GammaOptions& opt) {
  if (!uses_working_model(method)) return std::make_unique<NonparametricE0>(s);
  OutcomeWorkingModel wm = fit_working_model(
      s.data(), opt.design.empty() ? default_design(s.data()) : opt.design);
  if (method == GammaMethod::pw_ca2_a) return std::make_unique<AnalyticE0>(s, std::move(wm));
  return std::make_unique<FractionalE0>(s, std::move(wm), opt.fi_draws, derive_seed(opt.seed, 1));
}

GammaFit estimate_gamma(const Sample& s, GammaMethod method, const GammaOptions& opt) {
  GammaFit fit;
  fit.method = method;
  fit.engine = make_engine(s, method, opt);
  if (auto* fi = dynamic_cast<FractionalE0*>(fit.engine.get())) fit.working = fi->model();
  if (auto* an = dynamic_cast<AnalyticE0*>(fit.engine.get())) fit.working = an->model();

  const ProfileFitter fitter(s);
  switch (method) {
    case GammaMethod::p_gmm:
      fit.moment = std::make_unique<FixedMoment>(instrument_moment(s, opt.instrument));
      fit.result = solve_p_gmm(fitter, *fit.moment, opt);
      break;
    case GammaMethod::p_score:
    case GammaMethod::pw_score:
      fit.moment = std::make_unique<Ca1Moment>(*fit.engine);
      fit.result = solve_score(fitter, *fit.engine, opt);
      break;
    case GammaMethod::p_ca1:
    case GammaMethod::pw_ca1:
      fit.moment = std::make_unique<Ca1Moment>(*fit.engine);
      fit.result = solve_ca(fitter, *fit.moment, opt);
      break;
    case GammaMethod::p_ca2:
    case GammaMethod::pw_ca2_s:
    case GammaMethod::pw_ca2_a:
      fit.moment = std::make_unique<Ca2Moment>(*fit.engine);
      fit.result = solve_ca(fitter, *fit.moment, opt);
      break;
    case GammaMethod::p_mle:
      fit.moment = std::make_unique<Ca1Moment>(*fit.engine);
      fit.result = solve_em_p_mle(fitter, *fit.engine, opt.gamma_init, opt.em_tol,
                                  opt.em_max_iter, opt);
      break;
  }
  fit.result.method = to_string(method);
  fit.state = fitter.fit(fit.result.gamma_hat);
  return fit;
}

}  // namespace semimnar
