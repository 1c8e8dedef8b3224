#include "semimnar/mu_estimators.hpp"

#include "semimnar/errors.hpp"

namespace semimnar {

namespace {

struct MuInfo {
  MuMethod method;
  const char* id;
};

constexpr MuInfo kMu[] = {
    {MuMethod::ipw, "mu-ipw"}, {MuMethod::mp, "mu-mp"},     {MuMethod::db, "mu-db"},
    {MuMethod::w_mp, "mu-w-mp"}, {MuMethod::w_db, "mu-w-db"},
};

}  // namespace

const std::vector<std::string>& mu_method_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& m : kMu) v.emplace_back(m.id);
    return v;
  }();
  return ids;
}

MuMethod parse_mu_method(const std::string& id) {
  for (const auto& m : kMu)
    if (id == m.id) return m.method;
  std::string valid;
  for (const auto& v : mu_method_ids()) valid += (valid.empty() ? "" : ", ") + v;
  throw ConfigError("unknown mean estimator '" + id + "'; valid ids: " + valid);
}

std::string to_string(MuMethod m) {
  for (const auto& info : kMu)
    if (info.method == m) return info.id;
  return "?";
}

double mu_ipw(const Sample& s, const ProfileState& st) {
  double acc = 0.0;
  for (auto j : s.respondents()) {
    const auto idx = static_cast<Eigen::Index>(j);
    acc += s.y()[idx] / st.pi[idx];
  }
  return acc / static_cast<double>(s.size());
}

double mu_ipw(const ProfiledResponseModel& model) {
  return mu_ipw(model.sample(), model.state());
}

double mu_mp(const Sample& s, const Eigen::VectorXd& e0y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    acc += s.is_respondent(i) ? s.y()[idx] : e0y[idx];
  }
  return acc / static_cast<double>(s.size());
}

double mu_db(const Sample& s, const ProfileState& st, const Eigen::VectorXd& e0y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (s.is_respondent(i)) {
      const double pi = st.pi[idx];
      acc += s.y()[idx] / pi + (1.0 - 1.0 / pi) * e0y[idx];
    } else {
      acc += e0y[idx];
    }
  }
  return acc / static_cast<double>(s.size());
}

MuEstimate estimate_mu(const Sample& s, const GammaFit& fit, MuMethod method,
                       const MuOptions& opt) {
  MuEstimate out;
  out.method = method;
  out.gamma_used = fit.result.gamma_hat;
  const ProfileState& st = fit.state;

  if (method == MuMethod::ipw) {
    out.engine = "none";
    out.value = mu_ipw(s, st);
    return out;
  }

  if (method == MuMethod::mp || method == MuMethod::db) {
    out.engine = "nonparam";
    out.e0_y = NonparametricE0(s).evaluate(E0Functional::y, st);
  } else {
    OutcomeWorkingModel wm =
        fit.working ? *fit.working
                    : fit_working_model(s.data(),
                                        opt.design.empty() ? default_design(s.data()) : opt.design);
    if (opt.working_mean == WorkingMean::analytic) {
      out.engine = "analytic";
      out.e0_y = AnalyticE0(s, std::move(wm)).evaluate(E0Functional::y, st);
    } else {
      out.engine = "fi";
      out.e0_y = FractionalE0(s, std::move(wm), opt.fi_draws, derive_seed(opt.seed, 2))
                     .evaluate(E0Functional::y, st);
    }
  }
  out.value = (method == MuMethod::mp || method == MuMethod::w_mp) ? mu_mp(s, out.e0_y)
                                                                   : mu_db(s, st, out.e0_y);
  return out;
}

}  // namespace semimnar
