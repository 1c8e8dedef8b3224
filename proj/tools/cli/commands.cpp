#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "semimnar/errors.hpp"
#include "semimnar/inference.hpp"
#include "semimnar/report.hpp"
#include "semimnar/smoothing.hpp"

namespace semimnar::cli {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "study.family",        "study.model",          "study.n",
      "study.reps",          "study.as_printed",     "study.gamma_estimators",
      "study.mu_estimators", "study.alpha",          "study.variances",
      "study.complete",      "study.workers",        "response.basis",
      "response.phi",        "response.gamma",       "gamma.lo",
      "gamma.hi",            "gamma.scan_points",    "gamma.fi_draws",
      "gamma.instrument",    "gamma.design",         "gamma.em_tol",
      "gamma.em_max_iter",   "gamma.gamma_init",     "gamma.f_tol",
      "gamma.x_tol",         "mu.working_mean",      "mu.design",
      "mu.fi_draws",         "smoothing.kernel",     "smoothing.bandwidth_g",
      "smoothing.bandwidth_x", "smoothing.select",   "data.csv",
      "data.x1",             "data.x2",              "data.y",
      "data.delta",          "data.discrete",        "estimate.gamma",
      "estimate.mu",         "estimate.alpha",       "impose.model",
  };
  return keys;
}

bool is_level_key(const std::string& key) { return key.rfind("data.levels.", 0) == 0; }

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("setting '" + section + "' must live inside a [section]");
    for (const auto& [key, _] : body) {
      const std::string full = section + "." + key;
      if (!known_keys().count(full) && !is_level_key(full))
        throw ConfigError("unknown setting '" + full + "'");
    }
  }
}

template <class T>
std::optional<T> get(const pt::ptree& s, const std::string& key) {
  const auto raw = s.get_optional<std::string>(key);
  if (!raw) return std::nullopt;
  const std::string v = boost::trim_copy(*raw);
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<T, bool>) {
      const std::string l = boost::to_lower_copy(v);
      if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
      if (l == "false" || l == "0" || l == "no" || l == "off") return false;
      throw std::invalid_argument(v);
    } else {
      std::size_t used = 0;
      T out{};
      if constexpr (std::is_floating_point_v<T>) {
        out = static_cast<T>(std::stod(v, &used));
      } else if constexpr (std::is_signed_v<T>) {
        out = static_cast<T>(std::stoll(v, &used));
      } else {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        out = static_cast<T>(std::stoull(v, &used));
      }
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    }
  } catch (const std::logic_error&) {
    throw ConfigError("setting '" + key + "' has an invalid value '" + v + "'");
  }
}

std::vector<std::string> get_list(const pt::ptree& s, const std::string& key) {
  std::vector<std::string> out;
  const auto raw = get<std::string>(s, key);
  if (!raw) return out;
  boost::split(out, *raw, boost::is_any_of(","));
  for (auto& v : out) boost::trim(v);
  out.erase(std::remove(out.begin(), out.end(), std::string{}), out.end());
  return out;
}

std::vector<double> parse_doubles(const std::vector<std::string>& items, const std::string& key) {
  std::vector<double> out;
  for (const auto& v : items) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(v, &used));
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw ConfigError("setting '" + key + "' has an invalid number '" + v + "'");
  }
  return out;
}

GBasis parse_basis(const std::string& s) {
  if (s == "linear") return GBasis::linear;
  if (s == "quadratic") return GBasis::quadratic;
  if (s == "sine") return GBasis::sine;
  if (s == "sqrt_linear") return GBasis::sqrt_linear;
  throw ConfigError("unknown response basis '" + s + "' (valid: linear, quadratic, sine, sqrt_linear)");
}

void apply_response_overrides(const pt::ptree& s, ResponseSpec& r) {
  if (auto b = get<std::string>(s, "response.basis")) r.basis = parse_basis(*b);
  if (s.get_optional<std::string>("response.phi"))
    r.phi = parse_doubles(get_list(s, "response.phi"), "response.phi");
  if (auto g = get<double>(s, "response.gamma")) r.gamma = *g;
}

std::string data_path(const pt::ptree& s, const CommandOptions& opt) {
  if (opt.data) return *opt.data;
  if (auto p = get<std::string>(s, "data.csv")) return *p;
  throw ConfigError("no input data: pass --data or set data.csv");
}

CsvTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_csv(in);
}

Dataset load_dataset(const CsvTable& table, const ColumnMapping& mapping) {
  Dataset d = dataset_from_table(table, mapping);
  const auto violations = validate(d);
  if (!violations.empty()) {
    std::ostringstream os;
    os << violations.size() << " validation violation(s):";
    for (std::size_t k = 0; k < violations.size() && k < 10; ++k) os << "\n  " << to_string(violations[k]);
    throw DataError(os.str());
  }
  return d;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

std::vector<std::vector<double>> continuous_coords(const Dataset& d, bool include_x2,
                                                   bool respondents_only) {
  std::vector<std::vector<double>> pts;
  for (const auto& o : d.rows()) {
    if (respondents_only && !o.delta) continue;
    std::vector<double> p;
    for (std::size_t k = 0; k < d.dim_x1(); ++k)
      if (!d.x1_kinds()[k].is_discrete()) p.push_back(o.x1[k]);
    if (include_x2)
      for (std::size_t k = 0; k < d.dim_x2(); ++k)
        if (!d.x2_kinds()[k].is_discrete()) p.push_back(o.x2[k]);
    pts.push_back(std::move(p));
  }
  return pts;
}

struct CvBandwidths {
  std::optional<double> g, x;
};

// bandwidth_g: LOO CV of the nonresponse indicator on the continuous part of
// x1. bandwidth_x: LOO CV of y on the continuous part of x among respondents.
CvBandwidths cv_bandwidths(const Dataset& d, KernelId kernel) {
  CvBandwidths out;
  auto pts_g = continuous_coords(d, false, false);
  if (!pts_g.empty() && !pts_g[0].empty()) {
    std::vector<double> z;
    for (const auto& o : d.rows()) z.push_back(o.delta ? 0.0 : 1.0);
    out.g = select_bandwidth_cv(pts_g, z, kernel).value();
  }
  auto pts_x = continuous_coords(d, true, true);
  if (!pts_x.empty() && !pts_x[0].empty()) {
    std::vector<double> z;
    for (const auto& o : d.rows())
      if (o.delta) z.push_back(*o.y);
    out.x = select_bandwidth_cv(pts_x, z, kernel).value();
  }
  return out;
}

}  // namespace

pt::ptree load_settings(const CommandOptions& opt) {
  pt::ptree tree;
  if (opt.config) {
    std::ifstream in(*opt.config);
    if (!in) throw ConfigError("cannot open config '" + *opt.config + "'");
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError("config '" + *opt.config + "': " + e.message() + " (line " +
                        std::to_string(e.line()) + ")");
    }
  }
  for (const auto& kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override '" + kv + "' is not of the form section.key=value");
    const std::string key = boost::trim_copy(kv.substr(0, eq));
    if (key.find('.') == std::string::npos)
      throw ConfigError("override key '" + key + "' needs a section, e.g. study.reps");
    tree.put(key, kv.substr(eq + 1));
  }
  check_keys(tree);
  return tree;
}

ColumnMapping column_mapping(const pt::ptree& s) {
  ColumnMapping m;
  m.x1 = get_list(s, "data.x1");
  m.x2 = get_list(s, "data.x2");
  if (m.x1.empty()) m.x1 = {"x1"};
  if (m.x2.empty()) m.x2 = {"x2"};
  m.y = get<std::string>(s, "data.y").value_or("y");
  m.delta = get<std::string>(s, "data.delta").value_or("");
  for (const auto& c : get_list(s, "data.discrete")) m.kinds[c].discrete = true;
  if (auto levels = s.get_child_optional("data.levels")) {
    for (const auto& [col, _] : *levels) {
      const std::string key = "data.levels." + col;
      m.kinds[col].discrete = true;
      m.kinds[col].levels = parse_doubles(get_list(s, key), key);
    }
  }
  return m;
}

SmoothingOptions smoothing_options(const pt::ptree& s) {
  SmoothingOptions o;
  if (auto k = get<std::string>(s, "smoothing.kernel")) o.kernel = parse_kernel(*k);
  o.bandwidth_g = get<double>(s, "smoothing.bandwidth_g");
  o.bandwidth_x = get<double>(s, "smoothing.bandwidth_x");
  for (const auto& h : {o.bandwidth_g, o.bandwidth_x})
    if (h && !(*h > 0.0)) throw ConfigError("bandwidths must be positive");
  return o;
}

GammaOptions gamma_options(const pt::ptree& s) {
  GammaOptions o;
  o.lo = get<double>(s, "gamma.lo").value_or(o.lo);
  o.hi = get<double>(s, "gamma.hi").value_or(o.hi);
  if (!(o.lo < o.hi)) throw ConfigError("gamma.lo must be below gamma.hi");
  o.scan_points = get<int>(s, "gamma.scan_points").value_or(o.scan_points);
  if (o.scan_points < 1) throw ConfigError("gamma.scan_points must be >= 1");
  o.fi_draws = get<std::size_t>(s, "gamma.fi_draws").value_or(o.fi_draws);
  if (o.fi_draws < 1) throw ConfigError("gamma.fi_draws must be >= 1");
  if (auto m = get<std::string>(s, "gamma.instrument")) o.instrument = parse_instrument_mode(*m);
  o.design = get_list(s, "gamma.design");
  o.em_tol = get<double>(s, "gamma.em_tol").value_or(o.em_tol);
  o.em_max_iter = get<int>(s, "gamma.em_max_iter").value_or(o.em_max_iter);
  o.gamma_init = get<double>(s, "gamma.gamma_init").value_or(o.gamma_init);
  o.root.f_tol = get<double>(s, "gamma.f_tol").value_or(o.root.f_tol);
  o.root.x_tol = get<double>(s, "gamma.x_tol").value_or(o.root.x_tol);
  return o;
}

MuOptions mu_options(const pt::ptree& s) {
  MuOptions o;
  if (auto w = get<std::string>(s, "mu.working_mean")) {
    if (*w == "analytic") o.working_mean = WorkingMean::analytic;
    else if (*w == "fractional") o.working_mean = WorkingMean::fractional;
    else throw ConfigError("mu.working_mean must be 'analytic' or 'fractional'");
  }
  o.design = get_list(s, "mu.design");
  o.fi_draws = get<std::size_t>(s, "mu.fi_draws").value_or(o.fi_draws);
  if (o.fi_draws < 1) throw ConfigError("mu.fi_draws must be >= 1");
  return o;
}

StudyConfig study_config(const pt::ptree& s, const CommandOptions& opt) {
  StudyConfig c;
  const DgpFamily family = parse_dgp_family(get<std::string>(s, "study.family").value_or("discrete"));
  const ResponseModelId model = parse_response_model(get<std::string>(s, "study.model").value_or("M1"));
  const long long n = get<long long>(s, "study.n").value_or(1000);
  if (n < 1) throw ConfigError("study.n must be >= 1");
  c.dgp = make_dgp(family, model, static_cast<std::size_t>(n),
                   get<bool>(s, "study.as_printed").value_or(false));
  apply_response_overrides(s, c.dgp.response);

  const long long reps = get<long long>(s, "study.reps").value_or(1);
  if (reps < 1) throw ConfigError("study.reps must be >= 1");
  c.reps = static_cast<std::size_t>(reps);
  c.gamma_estimators = get_list(s, "study.gamma_estimators");
  c.mu_estimators = get_list(s, "study.mu_estimators");
  if (c.gamma_estimators.empty()) throw ConfigError("study.gamma_estimators is empty");
  c.alpha = get<double>(s, "study.alpha").value_or(c.alpha);
  c.variances = get<bool>(s, "study.variances").value_or(true);
  c.workers = opt.workers;
  if (opt.workers == 1) c.workers = get<std::size_t>(s, "study.workers").value_or(1);
  if (!opt.seed) throw ConfigError("simulate needs --seed");
  c.base_seed = *opt.seed;
  c.gamma_options = gamma_options(s);
  c.mu_options = mu_options(s);
  c.smoothing = smoothing_options(s);
  if (family == DgpFamily::impose) {
    const auto path = get<std::string>(s, "study.complete");
    if (!path) throw ConfigError("the impose family needs study.complete (a CSV path)");
    c.complete = load_dataset(read_table(*path), column_mapping(s));
  }
  validate_config(c);
  return c;
}

int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream&) {
  const pt::ptree s = load_settings(opt);
  const StudyConfig cfg = study_config(s, opt);
  const SimulationReport rep = run_study(cfg);
  const std::string table = format_table(rep);
  out << table;
  if (opt.out) {
    write_file(*opt.out + ".txt", table);
    write_file(*opt.out + ".jsonl", to_json_lines(rep));
    write_file(*opt.out + ".records.jsonl", records_to_json_lines(rep));
  }
  return ok;
}

int cmd_estimate(const CommandOptions& opt, std::ostream& out, std::ostream&) {
  const pt::ptree s = load_settings(opt);
  const auto gamma_id = get<std::string>(s, "estimate.gamma").value_or("p-ca1");
  const auto mu_id = get<std::string>(s, "estimate.mu").value_or("mu-db");
  const GammaMethod gm = parse_gamma_method(gamma_id);
  const MuMethod mm = parse_mu_method(mu_id);
  const double alpha = get<double>(s, "estimate.alpha").value_or(0.05);
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("estimate.alpha must lie in (0, 1)");

  GammaOptions gopt = gamma_options(s);
  MuOptions mopt = mu_options(s);
  const bool random = (uses_working_model(gm) && gm != GammaMethod::pw_ca2_a) ||
                      ((mm == MuMethod::w_mp || mm == MuMethod::w_db) &&
                       mopt.working_mean == WorkingMean::fractional);
  if (random && !opt.seed) throw ConfigError("fractional imputation needs --seed");
  gopt.seed = mopt.seed = opt.seed.value_or(0);

  const ColumnMapping mapping = column_mapping(s);
  const Dataset data = load_dataset(read_table(data_path(s, opt)), mapping);
  SmoothingOptions sm = smoothing_options(s);
  if (get<std::string>(s, "smoothing.select").value_or("rule") == "cv") {
    const CvBandwidths cv = cv_bandwidths(data, sm.kernel);
    if (!sm.bandwidth_g) sm.bandwidth_g = cv.g;
    if (!sm.bandwidth_x) sm.bandwidth_x = cv.x;
  }
  const Sample sample(data, sm);
  const GammaFit fit = estimate_gamma(sample, gm, gopt);
  const GammaSandwich gs = gamma_sandwich(sample, fit);
  const MuEstimate mu = estimate_mu(sample, fit, mm, mopt);
  const double var_mu = variance_mu(sample, fit.state, mm, mu.e0_y, gs);

  SmoothingOptions used = sm;
  used.bandwidth_g = sample.bandwidth_g();
  used.bandwidth_x = sample.bandwidth_x();
  EstimateReport rg = make_report("gamma", gamma_id, fit.result.gamma_hat, gs.variance, alpha,
                                  data.size(), fit.engine->name(), used);
  rg.diagnostics = fit.result.diagnostics;
  EstimateReport rm = make_report("mu", mu_id, mu.value, var_mu, alpha, data.size(), mu.engine, used);
  rm.diagnostics.push_back("gamma from " + gamma_id);
  const std::string text = to_json(rg) + "\n" + to_json(rm) + "\n";
  out << text;
  if (opt.out) write_file(*opt.out, text);
  return ok;
}

int cmd_impose(const CommandOptions& opt, std::ostream& out, std::ostream&) {
  const pt::ptree s = load_settings(opt);
  if (!opt.seed) throw ConfigError("impose needs --seed");
  ResponseSpec response = impose_response(parse_response_model(get<std::string>(s, "impose.model").value_or("M1")));
  apply_response_overrides(s, response);

  ColumnMapping mapping = column_mapping(s);
  CsvTable table = read_table(data_path(s, opt));
  const bool has_delta = !mapping.delta.empty() && table.column(mapping.delta);
  if (mapping.delta.empty()) mapping.delta = "delta";
  ColumnMapping complete_mapping = mapping;
  if (!has_delta) complete_mapping.delta.clear();
  const Dataset complete = load_dataset(table, complete_mapping);

  std::mt19937_64 rng(derive_seed(*opt.seed, 0));
  const Dataset masked = impose_missingness(complete, response, rng);

  const std::size_t ycol = *table.column(mapping.y);
  std::size_t dcol = table.header.size();
  if (auto c = table.column(mapping.delta)) {
    dcol = *c;
  } else {
    table.header.push_back(mapping.delta);
    for (auto& row : table.rows) row.emplace_back();
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const int d = masked[i].delta;
    table.rows[i][dcol] = d ? "1" : "0";
    if (!d) table.rows[i][ycol].clear();
  }
  std::ostringstream os;
  write_csv(os, table);
  if (opt.out) write_file(*opt.out, os.str());
  else out << os.str();
  return ok;
}

int cmd_bandwidth(const CommandOptions& opt, std::ostream& out, std::ostream&) {
  const pt::ptree s = load_settings(opt);
  const Dataset data = load_dataset(read_table(data_path(s, opt)), column_mapping(s));
  const SmoothingOptions sm = smoothing_options(s);
  const CvBandwidths cv = cv_bandwidths(data, sm.kernel);
  std::ostringstream os;
  os << "[smoothing]\n";
  os << "kernel = " << to_string(sm.kernel) << "\n";
  if (cv.g) os << "bandwidth_g = " << format_number(*cv.g) << "\n";
  else os << "; x1 is purely discrete: cells, no bandwidth\n";
  if (cv.x) os << "bandwidth_x = " << format_number(*cv.x) << "\n";
  else os << "; x is purely discrete: cells, no bandwidth\n";
  out << os.str();
  if (opt.out) write_file(*opt.out, os.str());
  return ok;
}

int run_guarded(int (*cmd)(const CommandOptions&, std::ostream&, std::ostream&),
                const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    return cmd(opt, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return data_error;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical_error;
  } catch (const pt::ptree_error& e) {
    err << "config error: " << e.what() << "\n";
    return config_error;
  }
}

}  // namespace semimnar::cli
