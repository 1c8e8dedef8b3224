#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "semimnar/csv_io.hpp"
#include "semimnar/simulation.hpp"

namespace semimnar::cli {

enum ExitCode { ok = 0, config_error = 1, data_error = 2, numerical_error = 3 };

struct CommandOptions {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::vector<std::string> overrides;  // section.key=value
};

/// INI file (if any) with the overrides applied on top. Unknown keys are
/// rejected.
boost::property_tree::ptree load_settings(const CommandOptions& opt);

StudyConfig study_config(const boost::property_tree::ptree& s, const CommandOptions& opt);
ColumnMapping column_mapping(const boost::property_tree::ptree& s);
SmoothingOptions smoothing_options(const boost::property_tree::ptree& s);
GammaOptions gamma_options(const boost::property_tree::ptree& s);
MuOptions mu_options(const boost::property_tree::ptree& s);

/// Each command reports on `out`/`err` and returns the exit code; library
/// errors are mapped to codes by `run_guarded`.
int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_estimate(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_impose(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_bandwidth(const CommandOptions& opt, std::ostream& out, std::ostream& err);

int run_guarded(int (*cmd)(const CommandOptions&, std::ostream&, std::ostream&),
                const CommandOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace semimnar::cli
