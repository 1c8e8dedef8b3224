#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace semimnar::cli;

int main(int argc, char** argv) {
  CLI::App app{"Semiparametric estimation under nonignorable nonresponse"};
  app.require_subcommand(1);

  CommandOptions opt;
  struct Verb {
    const char* name;
    const char* help;
    int (*fn)(const CommandOptions&, std::ostream&, std::ostream&);
  };
  const Verb verbs[] = {
      {"simulate", "run a Monte Carlo study and write table + JSON-lines reports", cmd_simulate},
      {"estimate", "estimate gamma and the outcome mean on a CSV file", cmd_estimate},
      {"impose", "impose artificial nonresponse on a complete CSV file", cmd_impose},
      {"bandwidth", "select kernel bandwidths by leave-one-out cross validation", cmd_bandwidth},
  };
  std::vector<std::pair<CLI::App*, const Verb*>> subs;
  for (const auto& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    sub->add_option("--config", opt.config, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output path (simulate: file prefix)");
    sub->add_option("--seed", opt.seed, "base seed for all randomness");
    sub->add_option("--workers", opt.workers, "replication workers")->check(CLI::PositiveNumber);
    if (std::string(v.name) != "simulate")
      sub->add_option("--data", opt.data, "input CSV (overrides data.csv)");
    sub->add_option("overrides", opt.overrides, "section.key=value settings (win over --config)");
    subs.emplace_back(sub, &v);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : config_error;
  }
  for (const auto& [sub, verb] : subs)
    if (sub->parsed()) return run_guarded(verb->fn, opt, std::cout, std::cerr);
  return config_error;
}
