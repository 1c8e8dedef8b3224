#pragma once

#include <functional>

namespace semimnar {

struct RootOptions {
  double f_tol = 1e-8;   // |f| at the returned root
  double x_tol = 1e-10;  // bracket width
  int max_iter = 200;
};

struct RootResult {
  double x = 0.0;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  double lo = 0.0, hi = 0.0;  // bracket the search started from
};

/// Brent's bracketed root finder (inverse quadratic interpolation with
/// bisection safeguard). Requires a sign change on [lo, hi]; throws
/// NoSignChange otherwise. The returned root satisfies |f| <= f_tol, or the
/// call throws SolverFailure (sign change across a jump).
RootResult brent_root(const std::function<double(double)>& f, double lo, double hi,
                      const RootOptions& opt = {});

/// Same, reusing already computed end-point values.
RootResult brent_root(const std::function<double(double)>& f, double lo, double hi, double f_lo,
                      double f_hi, const RootOptions& opt = {});

/// Numerically stable logistic function and its log-space helpers.
double expit(double t);
double log_expit(double t);  // log(expit(t))

}  // namespace semimnar
