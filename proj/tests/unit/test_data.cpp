#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "semimnar/csv_io.hpp"
#include "semimnar/data.hpp"
#include "semimnar/errors.hpp"

using namespace semimnar;

namespace {

Dataset tiny(std::vector<Observation> rows) {
  return Dataset({"a"}, {VariableKind::discrete({0, 1})}, {"b"}, {VariableKind::continuous()},
                 std::move(rows));
}

bool has_rule(const std::vector<Violation>& v, const std::string& text) {
  for (const auto& x : v)
    if (x.rule.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Dataset, ValidDataHasNoViolations) {
  const Dataset d = fixtures::discrete(200, 1);
  EXPECT_TRUE(validate(d).empty());
  EXPECT_EQ(d.size(), 200u);
  EXPECT_EQ(d.dim_x1(), 1u);
  EXPECT_EQ(d.dim_x2(), 1u);
}

TEST(Dataset, ResponseIndicatorMustMatchOutcome) {
  const Dataset d = tiny({{{0}, {0.5}, std::nullopt, 1}, {{1}, {0.1}, 2.0, 0}, {{1}, {0.2}, 1.0, 1}});
  const auto v = validate(d);
  EXPECT_TRUE(has_rule(v, "y missing although delta = 1"));
  EXPECT_TRUE(has_rule(v, "y present although delta = 0"));
  ASSERT_TRUE(v[0].row.has_value());
}

TEST(Dataset, DeltaOutsideZeroOne) {
  const Dataset d = tiny({{{0}, {0.5}, 1.0, 2}});
  EXPECT_TRUE(has_rule(validate(d), "delta must be 0 or 1"));
}

TEST(Dataset, UnknownDiscreteLevelAndNonFiniteCovariate) {
  const Dataset d = tiny({{{5}, {0.5}, 1.0, 1}, {{0}, {NAN}, 1.0, 1}});
  const auto v = validate(d);
  EXPECT_GE(v.size(), 2u);
}

TEST(Dataset, EmptyIsInvalid) {
  EXPECT_FALSE(validate(tiny({})).empty());
}

TEST(Dataset, RespondentSplitPreservesOrder) {
  const Dataset d = fixtures::discrete(100, 2);
  const auto [r, m] = respondent_split(d);
  EXPECT_EQ(r.size() + m.size(), d.size());
  EXPECT_EQ(r.size(), d.respondent_count());
  std::size_t ri = 0, mi = 0;
  for (const auto& o : d.rows()) {
    if (o.delta) EXPECT_EQ(r[ri++], o);
    else EXPECT_EQ(m[mi++], o);
  }
}

TEST(Dataset, CovariateIndexSpansBothBlocks) {
  const Dataset d = fixtures::discrete(10, 3);
  EXPECT_EQ(d.covariate_index("x1"), 0u);
  EXPECT_EQ(d.covariate_index("x2"), 1u);
  EXPECT_FALSE(d.covariate_index("zz").has_value());
}

TEST(Csv, RoundTripThroughTable) {
  const Dataset d = fixtures::mixed(50, 4);
  std::stringstream ss;
  write_csv(ss, table_from_dataset(d));
  const CsvTable t = read_csv(ss);
  ColumnMapping m;
  m.x1 = {"x1"};
  m.x2 = {"x2"};
  m.delta = "delta";
  m.kinds["x1"] = {true, std::vector<double>{0, 1}};
  const Dataset back = dataset_from_table(t, m);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(back[i], d[i]);
}

TEST(Csv, DeltaDerivedFromEmptyOutcome) {
  std::istringstream in("x1,x2,y\n0,1.5,2\n1,0.5,\n");
  ColumnMapping m;
  m.x1 = {"x1"};
  m.x2 = {"x2"};
  m.kinds["x1"].discrete = true;
  const Dataset d = dataset_from_table(read_csv(in), m);
  EXPECT_EQ(d[0].delta, 1);
  EXPECT_EQ(d[1].delta, 0);
  EXPECT_EQ(d.x1_kinds()[0].levels(), (std::vector<double>{0, 1}));
}

TEST(Csv, MissingColumnIsConfigError) {
  std::istringstream in("x1,x2,y\n0,1,2\n");
  ColumnMapping m;
  m.x1 = {"x1"};
  m.x2 = {"nope"};
  EXPECT_THROW(dataset_from_table(read_csv(in), m), ConfigError);
}

TEST(Csv, UnparsableCellIsDataError) {
  std::istringstream in("x1,x2,y\n0,abc,2\n");
  ColumnMapping m;
  m.x1 = {"x1"};
  m.x2 = {"x2"};
  EXPECT_THROW(dataset_from_table(read_csv(in), m), DataError);
}

TEST(Csv, QuotedCellsAndRaggedRows) {
  std::istringstream in("a,\"b,c\"\n\"1\",\"x\"\"y\"\n");
  const CsvTable t = read_csv(in);
  EXPECT_EQ(t.header[1], "b,c");
  EXPECT_EQ(t.rows[0][1], "x\"y");
  std::istringstream bad("a,b\n1,2,3\n");
  EXPECT_THROW(read_csv(bad), DataError);
}
