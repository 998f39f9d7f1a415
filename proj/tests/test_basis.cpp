#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "mrp/basis.hpp"
#include "mrp/error.hpp"

using namespace mrp;

TEST(KnotCount, Examples) {
  EXPECT_EQ(knot_count(365, 0.5), 19u);
  EXPECT_EQ(knot_count(2, 1.0), 2u);
  EXPECT_EQ(knot_count(100, 0.5), 10u);
  EXPECT_EQ(knot_count(3, 0.1), 1u);
}

TEST(KnotCount, RateOutsideDomain) {
  EXPECT_THROW(knot_count(100, 0.0), std::domain_error);
  EXPECT_THROW(knot_count(100, 1.5), std::domain_error);
  EXPECT_THROW(knot_count(1, 0.5), std::domain_error);
}

TEST(BuildBasis, Sizes) {
  EXPECT_EQ(build_basis(4, 0).size(), 4u);
  EXPECT_EQ(build_basis(4, 6).size(), 10u);
  const auto b = build_basis(2, 1);
  EXPECT_EQ(b.size(), 3u);
  ASSERT_EQ(b.interior_knots().size(), 1u);
  EXPECT_DOUBLE_EQ(b.interior_knots()[0], 0.5);
  const auto k6 = build_basis(4, 6).interior_knots();
  for (std::size_t j = 0; j < k6.size(); ++j) EXPECT_DOUBLE_EQ(k6[j], (j + 1) / 7.0);
}

TEST(EvaluateBasis, LinearHats) {
  const auto v = build_basis(2, 1).evaluate(0.25);
  ASSERT_EQ(v.size(), 3);
  EXPECT_NEAR(v(0), 0.5, 1e-15);
  EXPECT_NEAR(v(1), 0.5, 1e-15);
  EXPECT_NEAR(v(2), 0.0, 1e-15);
}

TEST(EvaluateBasis, ClampedEndpoints) {
  for (int order : {1, 2, 3, 4, 5}) {
    for (std::size_t K : {0u, 1u, 5u}) {
      const auto b = build_basis(order, K);
      const auto v0 = b.evaluate(0.0);
      const auto v1 = b.evaluate(1.0);
      EXPECT_EQ(v0(0), 1.0);
      EXPECT_NEAR(v0.sum(), 1.0, 1e-15);
      EXPECT_EQ(v1(v1.size() - 1), 1.0);
      EXPECT_NEAR(v1.sum(), 1.0, 1e-15);
    }
  }
}

TEST(EvaluateBasis, DomainError) {
  const auto b = build_basis(4, 3);
  EXPECT_THROW(b.evaluate(-1e-9), std::domain_error);
  EXPECT_THROW(b.evaluate(1.0 + 1e-9), std::domain_error);
}

TEST(EvaluateBasis, PartitionOfUnity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int order : {2, 3, 4, 6}) {
    for (std::size_t K : {0u, 3u, 17u}) {
      const auto b = build_basis(order, K);
      for (int i = 0; i < 1000; ++i) {
        const auto v = b.evaluate(u(rng));
        EXPECT_NEAR(v.sum(), 1.0, 1e-12);
        EXPECT_GE(v.minCoeff(), 0.0);
      }
    }
  }
}

TEST(FitCurve, ReproducesSplineSpace) {
  const auto b = build_basis(4, 5);
  Eigen::VectorXd c(9);
  c << 0.3, -1.0, 2.0, 0.5, 0.0, 1.5, -0.7, 0.2, 1.1;
  DiscreteCurve curve;
  for (int j = 0; j < 40; ++j) {
    const double t = j / 39.0;
    curve.grid.push_back(t);
    curve.values.push_back(b.evaluate(t).dot(c));
  }
  const auto fit = fit_curve(curve, b);
  EXPECT_LT((fit - c).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FitCurve, ConstantAndLine) {
  const auto b = build_basis(4, 4);
  DiscreteCurve one, line;
  for (int j = 0; j < 30; ++j) {
    const double t = std::pow(j / 29.0, 1.3);
    one.grid.push_back(t);
    one.values.push_back(1.0);
    line.grid.push_back(t);
    line.values.push_back(t);
  }
  const auto c1 = fit_curve(one, b);
  EXPECT_LT((c1.array() - 1.0).abs().maxCoeff(), 1e-12);
  const auto c2 = fit_curve(line, b);
  for (double t : line.grid) EXPECT_NEAR(b.evaluate(t).dot(c2), t, 1e-9);
}

TEST(FitCurve, Underdetermined) {
  const auto b = build_basis(4, 6);
  DiscreteCurve c{{0.0, 0.3, 0.6, 1.0}, {1, 2, 3, 4}};
  try {
    fit_curve(c, b);
    FAIL();
  } catch (const FitError& e) {
    EXPECT_NE(std::string(e.what()).find("underdetermined"), std::string::npos);
  }
}

TEST(FitCurve, RankDeficient) {
  const auto b = build_basis(4, 6);
  DiscreteCurve c;
  for (int j = 0; j < 20; ++j) {
    c.grid.push_back(0.1 * j / 19.0);
    c.values.push_back(j);
  }
  try {
    fit_curve(c, b);
    FAIL();
  } catch (const FitError& e) {
    EXPECT_NE(std::string(e.what()).find("rank-deficient"), std::string::npos);
  }
}

TEST(FitCurve, LeastSquaresOptimality) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  const auto b = build_basis(4, 4);
  for (int trial = 0; trial < 20; ++trial) {
    DiscreteCurve c;
    for (int j = 0; j < 25; ++j) {
      const double t = j / 24.0;
      c.grid.push_back(t);
      c.values.push_back(std::sin(5 * t) + z(rng));
    }
    const Eigen::MatrixXd B = design_matrix(c.grid, b);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(c.values.data(), 25);
    const Eigen::VectorXd fit = fit_curve(c, b);
    const double rss = (B * fit - y).squaredNorm();
    for (Eigen::Index l = 0; l < fit.size(); ++l) {
      for (double d : {-1e-3, 1e-3}) {
        Eigen::VectorXd moved = fit;
        moved(l) += d;
        EXPECT_GE((B * moved - y).squaredNorm(), rss);
      }
    }
  }
}

TEST(Reconstruction, ErrorShrinksWithN) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  auto f = [](double t) { return std::sin(2 * M_PI * t) + t * t; };
  std::vector<double> err;
  for (std::size_t N : {50u, 200u, 800u}) {
    const auto b = build_basis(4, knot_count(N, 0.5));
    double total = 0.0;
    const int curves = 20;
    for (int r = 0; r < curves; ++r) {
      DiscreteCurve c;
      for (std::size_t j = 0; j < N; ++j) {
        const double t = j / double(N - 1);
        c.grid.push_back(t);
        c.values.push_back(f(t) + 0.2 * z(rng));
      }
      const auto coef = fit_curve(c, b);
      for (int j = 0; j < 200; ++j) {
        const double t = (j + 0.5) / 200.0;
        total += std::abs(b.evaluate(t).dot(coef) - f(t));
      }
    }
    err.push_back(total / (curves * 200));
  }
  EXPECT_GT(err[0], err[1]);
  EXPECT_GT(err[1], err[2]);
}

TEST(ReconstructPanel, ZeroPanel) {
  DiscretePanel p("X", 3, 2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      for (int j = 0; j < 20; ++j) {
        p.at(i, k).grid.push_back(j / 19.0);
        p.at(i, k).values.push_back(0.0);
      }
    }
  const auto cp = reconstruct_panel(p, 0.5, 4);
  ASSERT_EQ(cp.n(), 3u);
  for (const auto& s : cp.samples) EXPECT_EQ(s.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ReconstructPanel, SharedBasisAndSize) {
  std::mt19937_64 rng(2);
  const auto p = testkit::sampled_panel("X", 4, 3, 365, 0.0, rng);
  const auto cp = reconstruct_panel(p, 0.5, 4);
  EXPECT_EQ(cp.L(), 23u);
  for (const auto& s : cp.samples) {
    EXPECT_EQ(s.rows(), 3);
    EXPECT_EQ(s.cols(), 23);
  }
  const auto q = testkit::sampled_panel("Y", 5, 3, 100, 0.0, rng);
  const auto [a, c] = reconstruct_panels(p, q);
  EXPECT_EQ(a.basis.get(), c.basis.get());
  EXPECT_EQ(a.L(), 14u);  // sized by the smaller N = 100
}

TEST(ReconstructPanel, ShortCellIsNamed) {
  std::mt19937_64 rng(2);
  auto p = testkit::sampled_panel("X", 3, 2, 40, 0.0, rng);
  auto basis = std::make_shared<const SplineBasis>(build_basis(4, 6));
  p.at(2, 1).grid = {0.0, 0.5, 1.0};
  p.at(2, 1).values = {0.0, 0.5, 1.0};
  try {
    reconstruct_panel(p, basis);
    FAIL();
  } catch (const FitError& e) {
    EXPECT_EQ(e.sample(), 2u);
    EXPECT_EQ(e.dim(), 1u);
  }
}
