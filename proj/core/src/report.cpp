#include "semimnar/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace semimnar {

namespace {

using nlohmann::json;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fixed(double v, int prec) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// Very large values (e.g. an uninformative interval) switch to %g so the
// columns stay aligned.
std::string cell(double v, int prec) {
  if (std::isfinite(v) && std::fabs(v) >= 1e5) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  return fixed(v, prec);
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

}  // namespace

std::string format_table(const SimulationReport& r, double mu_scale) {
  std::ostringstream os;
  os << "dgp " << r.dgp << "  n=" << r.n << "  reps=" << r.reps << "  seed=" << r.base_seed
     << "  gamma=" << fixed(r.gamma_true, 4) << "  mu=" << fixed(r.mu_true, 4) << "\n";
  os << "(mean targets: bias and MSE x" << fixed(mu_scale, 0) << ")\n";
  const char* head[] = {"estimator", "target", "bias", "mse", "coverage", "half-width", "ok", "fail"};
  const std::size_t w[] = {12, 10, 11, 11, 10, 12, 6, 6};
  for (int c = 0; c < 8; ++c) os << pad(head[c], w[c]);
  os << "\n";
  for (const auto& row : r.rows) {
    const double k = row.target == "gamma" ? 1.0 : mu_scale;
    os << pad(row.estimator, w[0]) << pad(row.target, w[1]) << pad(cell(row.bias * k, 4), w[2])
       << pad(cell(row.mse * k, 4), w[3])
       << pad(fixed(row.coverage, 3), w[4]) << pad(cell(row.mean_half_width, 4), w[5])
       << pad(std::to_string(row.ok), w[6]) << pad(std::to_string(row.failures), w[7]) << "\n";
  }
  for (const auto& d : r.diagnostics) os << "# " << d << "\n";
  return os.str();
}

std::string to_json_lines(const SimulationReport& r) {
  std::string out;
  for (const auto& row : r.rows) {
    json j = {{"dgp", r.dgp},          {"n", r.n},
              {"reps", r.reps},        {"base_seed", r.base_seed},
              {"estimator", row.estimator}, {"target", row.target},
              {"truth", row.truth},    {"bias", num(row.bias)},
              {"mse", num(row.mse)},   {"coverage", num(row.coverage)},
              {"mean_half_width", num(row.mean_half_width)},
              {"ok", row.ok},          {"failures", row.failures},
              {"ci_count", row.ci_count}, {"alpha", r.alpha}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string records_to_json_lines(const SimulationReport& r) {
  std::string out;
  for (const auto& rec : r.records) {
    json j = {{"rep", rec.rep}, {"estimator", rec.estimator}, {"target", rec.target},
              {"ok", rec.ok}};
    if (rec.ok) j["value"] = num(rec.value);
    j["variance"] = rec.variance ? num(*rec.variance) : json(nullptr);
    if (!rec.error.empty()) j["error"] = rec.error;
    out += j.dump() + "\n";
  }
  return out;
}

std::string to_json(const EstimateReport& r) {
  json j = {{"target", r.target},   {"method", r.estimator}, {"estimate", num(r.estimate)},
            {"variance", num(r.variance)}, {"ci_lo", num(r.ci_lo)}, {"ci_hi", num(r.ci_hi)},
            {"alpha", r.alpha},     {"n", r.n},              {"engine", r.engine}};
  j["bandwidth_g"] = r.bandwidth_g ? json(*r.bandwidth_g) : json(nullptr);
  j["bandwidth_x"] = r.bandwidth_x ? json(*r.bandwidth_x) : json(nullptr);
  j["diagnostics"] = r.diagnostics;
  return j.dump();
}

}  // namespace semimnar
