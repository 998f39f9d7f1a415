#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "mrp/data_model.hpp"
#include "mrp/error.hpp"

using namespace mrp;

namespace {

DiscretePanel two_by_one() {
  DiscretePanel p("X", 2, 1);
  for (std::size_t i = 0; i < 2; ++i) {
    p.at(i, 0).grid = {0.0, 0.5, 1.0};
    p.at(i, 0).values = {1.0, 2.0, 3.0};
  }
  return p;
}

std::string expect_input_error(const std::string& csv) {
  std::istringstream in(csv);
  try {
    load_long_csv(in);
  } catch (const InputError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no InputError for:\n" << csv;
  return {};
}

void expect_same(const DiscretePanel& a, const DiscretePanel& b) {
  ASSERT_EQ(a.n(), b.n());
  ASSERT_EQ(a.p(), b.p());
  EXPECT_EQ(a.sample_ids, b.sample_ids);
  EXPECT_EQ(a.dim_labels, b.dim_labels);
  for (std::size_t i = 0; i < a.n(); ++i) {
    for (std::size_t k = 0; k < a.p(); ++k) {
      EXPECT_EQ(a.at(i, k).grid, b.at(i, k).grid);
      EXPECT_EQ(a.at(i, k).values, b.at(i, k).values);
    }
  }
}

}  // namespace

TEST(ValidatePanel, WellFormedIsClean) { EXPECT_TRUE(validate_panel(two_by_one()).empty()); }

TEST(ValidatePanel, DecreasingGrid) {
  auto p = two_by_one();
  p.at(1, 0).grid = {0.5, 0.2};
  p.at(1, 0).values = {0.0, 0.0};
  const auto v = validate_panel(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].sample, 1u);
  EXPECT_EQ(v[0].dim, 0u);
  EXPECT_NE(v[0].message.find("not increasing"), std::string::npos) << v[0].message;
}

TEST(ValidatePanel, NonFiniteValue) {
  auto p = two_by_one();
  p.at(0, 0).values[1] = std::numeric_limits<double>::quiet_NaN();
  const auto v = validate_panel(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].message.find("non-finite"), std::string::npos) << v[0].message;
}

TEST(ValidatePanel, OutOfDomainAndTooShort) {
  auto p = two_by_one();
  p.at(0, 0).grid = {0.0, 0.5, 1.5};
  p.at(1, 0).grid = {0.3};
  p.at(1, 0).values = {1.0};
  EXPECT_EQ(validate_panel(p).size(), 2u);
}

TEST(LoadLongCsv, MinimalInput) {
  std::istringstream in(
      "group,sample_id,dim,t,value\n"
      "X,a,temp,0,1.5\n"
      "X,a,temp,1,2.5\n"
      "Y,b,temp,0.25,-1\n"
      "Y,b,temp,0.75,3\n");
  const auto [x, y] = load_long_csv(in);
  EXPECT_EQ(x.n(), 1u);
  EXPECT_EQ(y.n(), 1u);
  EXPECT_EQ(x.p(), 1u);
  EXPECT_EQ(y.p(), 1u);
  EXPECT_EQ(y.at(0, 0).grid, (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(x.at(0, 0).values, (std::vector<double>{1.5, 2.5}));
}

TEST(LoadLongCsv, DimensionMismatch) {
  const auto msg = expect_input_error(
      "group,sample_id,dim,t,value\n"
      "X,1,1,0,1\nX,1,1,1,1\nX,1,2,0,1\nX,1,2,1,1\n"
      "Y,1,1,0,1\nY,1,1,1,1\n");
  EXPECT_NE(msg.find("dimension mismatch"), std::string::npos) << msg;
}

TEST(LoadLongCsv, TimeOutsideDomain) {
  const auto msg = expect_input_error(
      "group,sample_id,dim,t,value\n"
      "X,1,1,0,1\nX,1,1,1.5,1\nY,1,1,0,1\nY,1,1,1,1\n");
  EXPECT_FALSE(msg.empty());
}

TEST(LoadLongCsv, DuplicateRow) {
  const auto msg = expect_input_error(
      "group,sample_id,dim,t,value\n"
      "X,1,1,0,1\nX,1,1,0,2\nX,1,1,1,1\nY,1,1,0,1\nY,1,1,1,1\n");
  EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(LoadLongCsv, ParseErrorNamesLine) {
  const auto msg = expect_input_error(
      "group,sample_id,dim,t,value\n"
      "X,1,1,0,1\nX,1,1,zero,1\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(LoadLongCsv, BadHeaderAndGroup) {
  EXPECT_FALSE(expect_input_error("a,b,c\nX,1,1,0,1\n").empty());
  EXPECT_FALSE(expect_input_error("group,sample_id,dim,t,value\nZ,1,1,0,1\n").empty());
}

TEST(LoadLongCsv, NumericLabelOrder) {
  std::ostringstream csv;
  csv << "group,sample_id,dim,t,value\n";
  for (const char* g : {"X", "Y"}) {
    for (const char* d : {"10", "2", "1"}) {
      csv << g << ",s," << d << ",0,1\n" << g << ",s," << d << ",1,2\n";
    }
  }
  std::istringstream in(csv.str());
  const auto [x, y] = load_long_csv(in);
  EXPECT_EQ(x.dim_labels, (std::vector<std::string>{"1", "2", "10"}));
  EXPECT_TRUE(label_less("9", "10"));
  EXPECT_TRUE(label_less("a", "b"));
}

TEST(LoadLongCsv, RowOrderInsensitive) {
  std::mt19937_64 rng(7);
  auto x = testkit::sampled_panel("X", 3, 2, 6, 0.0, rng);
  auto y = testkit::sampled_panel("Y", 4, 2, 6, 1.0, rng);
  std::ostringstream out;
  write_long_csv(out, x, y);
  std::istringstream in1(out.str());
  const auto ref = load_long_csv(in1);

  std::vector<std::string> lines;
  std::istringstream split(out.str());
  std::string header, line;
  std::getline(split, header);
  while (std::getline(split, line)) lines.push_back(line);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string shuffled = header + "\n";
    for (const auto& l : lines) shuffled += l + "\n";
    std::istringstream in2(shuffled);
    const auto got = load_long_csv(in2);
    expect_same(ref.x, got.x);
    expect_same(ref.y, got.y);
  }
}

TEST(LoadLongCsv, RoundTripBitExact) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  DiscretePanel x("X", 2, 3), y("Y", 2, 3);
  for (auto* panel : {&x, &y}) {
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t k = 0; k < 3; ++k) {
        auto& c = panel->at(i, k);
        std::vector<double> g;
        for (int j = 0; j < 7; ++j) g.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
        std::sort(g.begin(), g.end());
        c.grid = g;
        for (int j = 0; j < 7; ++j) c.values.push_back(u(rng) * std::exp(u(rng) / 100.0));
      }
    }
  }
  std::ostringstream out;
  write_long_csv(out, x, y);
  std::istringstream in(out.str());
  const auto back = load_long_csv(in);
  expect_same(x, back.x);
  expect_same(y, back.y);
}

TEST(LoadGroupCsv, IgnoresOtherGroup) {
  std::istringstream in(
      "group,sample_id,dim,t,value\n"
      "X,1,1,0,1\nX,1,1,1,1\nY,1,1,0,1\nY,1,1,1,1\nY,2,1,0,1\nY,2,1,1,1\n");
  const auto y = load_group_csv(in, "Y");
  EXPECT_EQ(y.n(), 2u);
  EXPECT_EQ(y.group_label(), "Y");
}
