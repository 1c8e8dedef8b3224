#pragma once

// Direct double-loop reimplementations used as oracles. They read the
// Dataset only, with x1 discrete and x2 either discrete or one continuous
// coordinate smoothed with a Gaussian kernel of bandwidth h.

#include <functional>
#include <vector>

#include "semimnar/data.hpp"

namespace naive {

using semimnar::Dataset;
using semimnar::Observation;

double k_x1(const Observation& a, const Observation& b);
double k_x(const Dataset& d, const Observation& a, const Observation& b, double h);

std::vector<double> log_g(const Dataset& d, double gamma);
/// pi at respondents, NaN elsewhere.
std::vector<double> pi(const Dataset& d, double gamma);

/// sum_j K delta_j e^{gamma y_j} v_j / sum_j K delta_j e^{gamma y_j}, K over
/// x1 (by_x1 = true) or over the full x.
std::vector<double> tilted(const Dataset& d, double gamma, double h, bool by_x1,
                           const std::function<double(std::size_t)>& v);

double calibration_residual(const Dataset& d, double gamma, const std::vector<double>& m);
double score_residual(const Dataset& d, double gamma, double h);

std::vector<double> ca1(const Dataset& d, double gamma, double h);
std::vector<double> ca2(const Dataset& d, double gamma, double h);

struct Sandwich {
  double A = 0.0;
  double B = 0.0;
};
Sandwich sandwich(const Dataset& d, double gamma, const std::vector<double>& m);

double mu_ipw(const Dataset& d, double gamma);
double mu_mp(const Dataset& d, double gamma, double h);
double mu_db(const Dataset& d, double gamma, double h);

}  // namespace naive
