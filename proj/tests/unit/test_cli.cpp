#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "fixtures.hpp"
#include "semimnar/csv_io.hpp"

using namespace semimnar;
using namespace semimnar::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
  int code;
  std::string out, err;
};

CmdResult run(int (*cmd)(const CommandOptions&, std::ostream&, std::ostream&), CommandOptions opt) {
  std::ostringstream out, err;
  const int code = run_guarded(cmd, opt, out, err);
  return {code, out.str(), err.str()};
}

CommandOptions sim(std::vector<std::string> overrides, std::optional<std::uint64_t> seed = 5) {
  CommandOptions o;
  o.seed = seed;
  o.overrides = {"study.family=discrete", "study.n=300", "study.reps=3",
                 "study.gamma_estimators=p-gmm,p-ca1", "study.mu_estimators=mu-ipw,mu-mp"};
  o.overrides.insert(o.overrides.end(), overrides.begin(), overrides.end());
  return o;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("semimnar_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  write_csv(out, table_from_dataset(d));
}

std::vector<std::string> mixed_columns() {
  return {"data.x1=x1", "data.x2=x2", "data.discrete=x1"};
}

}  // namespace

TEST(CliSimulate, PrintsTableAndWritesReports) {
  TempDir tmp;
  CommandOptions o = sim({});
  o.out = tmp.file("study");
  const CmdResult r = run(cmd_simulate, o);
  ASSERT_EQ(r.code, ok) << r.err;
  EXPECT_NE(r.out.find("p-ca1"), std::string::npos);
  EXPECT_EQ(slurp(tmp.file("study.txt")), r.out);
  std::istringstream lines(slurp(tmp.file("study.jsonl")));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    json parsed;
    EXPECT_NO_THROW(parsed = json::parse(line));
    ++count;
  }
  EXPECT_EQ(count, 6);
  EXPECT_FALSE(slurp(tmp.file("study.records.jsonl")).empty());
}

TEST(CliSimulate, SameSeedSameTableAnyWorkers) {
  const CmdResult a = run(cmd_simulate, sim({}));
  CommandOptions o = sim({});
  o.workers = 3;
  const CmdResult b = run(cmd_simulate, o);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run(cmd_simulate, sim({}, 6)).out);
}

TEST(CliSimulate, ConfigErrors) {
  const CmdResult no_seed = run(cmd_simulate, sim({}, std::nullopt));
  EXPECT_EQ(no_seed.code, config_error);
  EXPECT_NE(no_seed.err.find("--seed"), std::string::npos);
  EXPECT_EQ(run(cmd_simulate, sim({"study.reps=0"})).code, config_error);
  const CmdResult bad_id = run(cmd_simulate, sim({"study.gamma_estimators=p-nope"}));
  EXPECT_EQ(bad_id.code, config_error);
  EXPECT_NE(bad_id.err.find("pw-ca2-a"), std::string::npos);
  EXPECT_EQ(run(cmd_simulate, sim({"study.colour=red"})).code, config_error);
  EXPECT_EQ(run(cmd_simulate, sim({"study.n"})).code, config_error);
}

TEST(CliSimulate, ConfigFileWithOverridesOnTop) {
  TempDir tmp;
  std::ofstream(tmp.file("c.ini")) << "[study]\nfamily = discrete\nn = 300\nreps = 2\n"
                                      "gamma_estimators = p-ca1\nmu_estimators = mu-mp\n";
  CommandOptions o;
  o.config = tmp.file("c.ini");
  o.seed = 1;
  const CmdResult base = run(cmd_simulate, o);
  ASSERT_EQ(base.code, ok) << base.err;
  EXPECT_NE(base.out.find("reps=2"), std::string::npos);
  o.overrides = {"study.reps=3"};
  EXPECT_NE(run(cmd_simulate, o).out.find("reps=3"), std::string::npos);
}

TEST(CliImpose, RoundTripThroughEstimate) {
  TempDir tmp;
  const Dataset complete = fixtures::complete_version(fixtures::mixed(1500, 3), 3, false);
  write_dataset(complete, tmp.file("complete.csv"));

  CommandOptions imp;
  imp.data = tmp.file("complete.csv");
  imp.out = tmp.file("masked.csv");
  imp.seed = 11;
  imp.overrides = mixed_columns();
  imp.overrides.push_back("impose.model=M2");
  const CmdResult ri = run(cmd_impose, imp);
  ASSERT_EQ(ri.code, ok) << ri.err;

  std::ifstream in(tmp.file("masked.csv"));
  const CsvTable t = read_csv(in);
  ASSERT_TRUE(t.column("delta").has_value());
  const std::size_t dcol = *t.column("delta"), ycol = *t.column("y");
  std::size_t missing = 0;
  for (const auto& row : t.rows) {
    if (row[dcol] == "0") {
      ++missing;
      EXPECT_TRUE(row[ycol].empty());
    } else {
      EXPECT_FALSE(row[ycol].empty());
    }
  }
  EXPECT_GT(missing, 0u);
  EXPECT_LT(missing, t.rows.size());

  // same seed, same mask
  CommandOptions again = imp;
  again.out = tmp.file("masked2.csv");
  ASSERT_EQ(run(cmd_impose, again).code, ok);
  EXPECT_EQ(slurp(tmp.file("masked.csv")), slurp(tmp.file("masked2.csv")));

  CommandOptions est;
  est.data = tmp.file("masked.csv");
  est.overrides = mixed_columns();
  est.overrides.insert(est.overrides.end(),
                       {"data.delta=delta", "estimate.gamma=pw-ca2-a", "estimate.mu=mu-w-db"});
  const CmdResult re = run(cmd_estimate, est);
  ASSERT_EQ(re.code, ok) << re.err;
  std::istringstream lines(re.out);
  std::string g, m;
  std::getline(lines, g);
  std::getline(lines, m);
  const json jg = json::parse(g), jm = json::parse(m);
  EXPECT_EQ(jg["target"], "gamma");
  EXPECT_EQ(jm["target"], "mu");
  EXPECT_TRUE(std::isfinite(jg["estimate"].get<double>()));
  EXPECT_LT(jm["ci_lo"].get<double>(), jm["ci_hi"].get<double>());
  EXPECT_GT(jm["variance"].get<double>(), 0.0);
}

TEST(CliImpose, NeedsSeedAndCompleteOutcomes) {
  TempDir tmp;
  write_dataset(fixtures::mixed(100, 4), tmp.file("partial.csv"));
  CommandOptions o;
  o.data = tmp.file("partial.csv");
  o.overrides = mixed_columns();
  EXPECT_EQ(run(cmd_impose, o).code, config_error);
  o.seed = 1;
  o.overrides.push_back("data.delta=delta");
  EXPECT_EQ(run(cmd_impose, o).code, data_error);
}

TEST(CliEstimate, DataProblems) {
  TempDir tmp;
  const Dataset d = fixtures::mixed(200, 5);
  std::vector<Observation> rows = d.rows();
  for (auto& o : rows) {
    o.y.reset();
    o.delta = 0;
  }
  write_dataset(d.with_rows(rows), tmp.file("allmissing.csv"));
  CommandOptions o;
  o.data = tmp.file("allmissing.csv");
  o.overrides = mixed_columns();
  const CmdResult all = run(cmd_estimate, o);
  EXPECT_EQ(all.code, data_error) << all.err;

  write_dataset(d, tmp.file("ok.csv"));
  o.data = tmp.file("ok.csv");
  o.overrides = {"data.x1=x1", "data.x2=missing_column"};
  EXPECT_EQ(run(cmd_estimate, o).code, config_error);

  o.data = tmp.file("does_not_exist.csv");
  o.overrides = mixed_columns();
  EXPECT_EQ(run(cmd_estimate, o).code, config_error);
}

TEST(CliEstimate, FractionalNeedsSeed) {
  TempDir tmp;
  write_dataset(fixtures::mixed(300, 6), tmp.file("d.csv"));
  CommandOptions o;
  o.data = tmp.file("d.csv");
  o.overrides = mixed_columns();
  o.overrides.push_back("estimate.gamma=pw-ca1");
  EXPECT_EQ(run(cmd_estimate, o).code, config_error);
  o.seed = 2;
  o.overrides.push_back("gamma.fi_draws=50");
  const CmdResult a = run(cmd_estimate, o);
  ASSERT_EQ(a.code, ok) << a.err;
  EXPECT_EQ(a.out, run(cmd_estimate, o).out);
}

TEST(CliBandwidth, ReportsIniBlock) {
  TempDir tmp;
  write_dataset(fixtures::mixed(300, 7), tmp.file("d.csv"));
  CommandOptions o;
  o.data = tmp.file("d.csv");
  o.overrides = mixed_columns();
  const CmdResult r = run(cmd_bandwidth, o);
  ASSERT_EQ(r.code, ok) << r.err;
  EXPECT_NE(r.out.find("[smoothing]"), std::string::npos);
  EXPECT_NE(r.out.find("bandwidth_x = "), std::string::npos);
  EXPECT_NE(r.out.find("x1 is purely discrete"), std::string::npos);
}

TEST(CliBinary, ExitCodes) {
  const std::string exe = SEMIMNAR_CLI_PATH;
  auto code = [&](const std::string& args) {
    const int rc = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  EXPECT_EQ(code("--help"), 0);
  EXPECT_EQ(code(""), 1);
  EXPECT_EQ(code("frobnicate"), 1);
  EXPECT_EQ(code("simulate --config /no/such/file.ini --seed 1"), 1);
  EXPECT_EQ(code("simulate study.reps=0 --seed 1"), 1);
  EXPECT_EQ(code("simulate study.n=200 study.reps=1 study.gamma_estimators=p-ca1 --seed 1"), 0);
}
