#include "semimnar/root_finding.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "semimnar/errors.hpp"

namespace semimnar {

namespace {

std::string no_sign_change_message(double lo, double hi, double f_lo, double f_hi) {
  std::ostringstream os;
  os << "no sign change on [" << lo << ", " << hi << "]: f(lo)=" << f_lo << ", f(hi)=" << f_hi;
  return os.str();
}

}  // namespace

NoSignChange::NoSignChange(double lo, double hi, double f_lo, double f_hi)
    : NumericalError(no_sign_change_message(lo, hi, f_lo, f_hi)), lo_(lo), hi_(hi) {}

double expit(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log_expit(double t) {
  if (t >= 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

RootResult brent_root(const std::function<double(double)>& f, double lo, double hi,
                      const RootOptions& opt) {
  return brent_root(f, lo, hi, f(lo), f(hi), opt);
}

RootResult brent_root(const std::function<double(double)>& f, double lo, double hi, double f_lo,
                      double f_hi, const RootOptions& opt) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (!std::isfinite(f_lo) || !std::isfinite(f_hi))
    throw SolverFailure("residual is not finite at a bracket end");

  RootResult res;
  res.lo = lo;
  res.hi = hi;
  res.evaluations = 2;
  if (f_lo == 0.0) {
    res.x = lo;
    res.f = 0.0;
    return res;
  }
  if (f_hi == 0.0) {
    res.x = hi;
    res.f = 0.0;
    return res;
  }
  if ((f_lo > 0.0) == (f_hi > 0.0)) throw NoSignChange(lo, hi, f_lo, f_hi);

  double a = lo, b = hi, c = hi;
  double fa = f_lo, fb = f_hi, fc = f_hi;
  double d = b - a, e = d;
  double x_tol = opt.x_tol;

  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::fabs(b) + 0.5 * x_tol;
    const double m = 0.5 * (c - b);
    if (fb == 0.0 || std::fabs(m) <= tol1) {
      if (std::fabs(fb) <= opt.f_tol) {
        res.x = b;
        res.f = fb;
        res.iterations = iter;
        return res;
      }
      if (x_tol > 0.0) {
        // Bracket is narrow but the residual is not yet small: tighten to
        // machine precision before giving up.
        x_tol = 0.0;
        continue;
      }
      std::ostringstream os;
      os << "bracket collapsed at " << b << " with residual " << fb
         << " (sign change across a discontinuity)";
      throw SolverFailure(os.str());
    }
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      const double min1 = 3.0 * m * q - std::fabs(tol1 * q);
      const double min2 = std::fabs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = d;
      }
    } else {
      d = m;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::fabs(d) > tol1 ? d : (m > 0.0 ? tol1 : -tol1);
    fb = f(b);
    ++res.evaluations;
    if (!std::isfinite(fb)) throw SolverFailure("residual is not finite inside the bracket");
  }
  throw MaxIterations("root finder exceeded " + std::to_string(opt.max_iter) + " iterations");
}

}  // namespace semimnar
