#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "helpers.hpp"
#include "mrp/engine.hpp"
#include "mrp/oracle.hpp"
#include "mrp/sim.hpp"

using namespace mrp;
using mrp::testkit::rel_err;

namespace {

// Trapezoid tr(M V M V) for M = min(s,t) on g points.
double trapezoid_brownian_itr(const ProjectionKernel& v, int g) {
  const double h = 1.0 / (g - 1);
  Eigen::MatrixXd M(g, g), V(g, g);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double wi = (i == 0 || i == g - 1) ? h / 2 : h;
      M(i, j) = std::min(i, j) * h * wi;
      V(i, j) = v(i * h, j * h) * wi;
    }
  }
  const Eigen::MatrixXd MV = M * V;
  return (MV * MV).trace();
}

}  // namespace

TEST(OracleConfig, Validation) {
  OracleConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.grid_size = 8;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.grid_size = 64;
  cfg.num_gamma_draws = 50;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(KernelSqrt, ReproducesCovariance) {
  const auto k = ProjectionKernel::ornstein_uhlenbeck(1);
  const auto S = kernel_sqrt(k, 32);
  const Eigen::MatrixXd V = S * S.transpose();
  EXPECT_NEAR(V(3, 10), k(3 / 31.0, 10 / 31.0), 1e-8);
  const auto Sw = kernel_sqrt(ProjectionKernel::wiener(), 64);
  EXPECT_TRUE(Sw.allFinite());
}

TEST(McMrp, ZeroAndWiener) {
  OracleConfig cfg;
  const auto w = ProjectionKernel::wiener();
  const auto zero = mc_mrp(MeanFunction::zero(1), MeanFunction::zero(1), w, cfg);
  EXPECT_LE(std::abs(zero.estimate), 3 * zero.standard_error + 1e-15);
  const auto one = mc_mrp(MeanFunction::constant(1, 1.0), MeanFunction::zero(1), w, cfg);
  EXPECT_LT(std::abs(one.estimate - 1.0 / 3.0), 3 * one.standard_error);
}

TEST(McMrp, AlphaLawInvariance) {
  OracleConfig a, b;
  b.alpha_law = AlphaLaw::Rademacher;
  b.seed = 99;
  const auto mu = sim1_mean(Dependence::CaseI, 3, 0);
  const auto k = ProjectionKernel::ornstein_uhlenbeck(1);
  const auto ra = mc_mrp(mu, MeanFunction::zero(3), k, a);
  const auto rb = mc_mrp(mu, MeanFunction::zero(3), k, b);
  const double se = std::hypot(ra.standard_error, rb.standard_error);
  EXPECT_LT(std::abs(ra.estimate - rb.estimate), 3 * se);
}

TEST(OracleChecks, PassAtDefaultSeed) {
  const auto mc = check_mc(1);
  EXPECT_TRUE(mc.pass) << mc.worst;
  const auto m = check_mrp(1);
  EXPECT_TRUE(m.pass) << m.worst;
  const auto t = check_itr(1);
  EXPECT_TRUE(t.pass) << t.worst;
}

TEST(OracleChecks, TamperedGramFails) {
  const auto m = check_mrp(1, true);
  EXPECT_FALSE(m.pass);
  EXPECT_GT(m.worst, 1e-2);
  const auto t = check_itr(1, true, 2);
  EXPECT_FALSE(t.pass);
}

TEST(DenseMrpHat, Examples) {
  const auto b = testkit::constant_basis();
  const auto w = ProjectionKernel::wiener();
  const auto one = testkit::constant_panel(b, 2, 1, 1.0);
  const auto zero = testkit::constant_panel(b, 2, 1, 0.0);
  EXPECT_EQ(dense_mrp_hat(zero, zero, w, 50), 0.0);
  EXPECT_NEAR(dense_mrp_hat(one, zero, w, 200), 1.0 / 3.0, 1e-4);
}

TEST(DenseMrpHat, AgreesWithGramAndConverges) {
  const auto b = testkit::cubic_basis(2);
  const auto k = ProjectionKernel::ornstein_uhlenbeck(1);
  const auto x = random_curve_panel(b, 6, 3, 1.0, 5);
  const auto y = random_curve_panel(b, 6, 3, 0.0, 6);
  const double d100 = dense_mrp_hat(x, y, k, 100);
  const double d200 = dense_mrp_hat(x, y, k, 200);
  EXPECT_LT(rel_err(d100, d200), 5e-4);
  EXPECT_LT(rel_err(mrp_hat(x, y, kernel_gram(b, k).W).value, d200), 1e-3);
}

TEST(DenseItrHat, Properties) {
  const auto b = testkit::cubic_basis(2);
  const auto k = ProjectionKernel::wiener();
  const auto x = random_curve_panel(b, 6, 2, 0.5, 7);
  const auto y = random_curve_panel(b, 6, 2, 0.0, 8);
  auto same = x;
  for (auto& s : same.samples) s = x.samples[0];
  EXPECT_NEAR(dense_itr_hat(same, y, k, 20, 11), 0.0, 1e-12);
  const double base = dense_itr_hat(x, y, k, 20, 12);
  EXPECT_LT(rel_err(dense_itr_hat(x, y, k.scaled(2.0), 20, 12), 4 * base), 1e-12);
  EXPECT_THROW(dense_itr_hat(x, y, k, 65, 11), std::invalid_argument);
  // raw trapezoid: second order across the kernel kink
  for (int which : {11, 22, 12}) {
    const double d16 = dense_itr_hat(x, y, k, 16, which);
    const double d32 = dense_itr_hat(x, y, k, 32, which);
    const double d64 = dense_itr_hat(x, y, k, 64, which);
    const double ratio = (d32 - d16) / (d64 - d32);
    EXPECT_GT(ratio, 3.0) << which;
    EXPECT_LT(ratio, 6.0) << which;
  }
}

TEST(DenseItrHat, ExtrapolatedStableUnderDoubling) {
  const auto b = testkit::cubic_basis(2);
  const auto x = random_curve_panel(b, 6, 2, 0.5, 7);
  const auto y = random_curve_panel(b, 6, 2, 0.0, 8);
  for (const auto& k : {ProjectionKernel::wiener(), ProjectionKernel::ornstein_uhlenbeck(1.0)}) {
    for (int which : {11, 22, 12}) {
      EXPECT_LT(rel_err(dense_itr_extrapolated(x, y, k, 16, which),
                        dense_itr_extrapolated(x, y, k, 32, which)),
                5e-4)
          << which;
    }
  }
}

TEST(PopulationItr, SeparableIdentity) {
  CovarianceSpec I2;
  I2.p = 2;
  I2.terms.push_back({[](double, double) { return 1.0; }, Eigen::MatrixXd::Identity(2, 2)});
  EXPECT_NEAR(population_itr(I2, I2, ProjectionKernel::wiener()), 2.0 / 9.0, 1e-12);
}

TEST(PopulationItr, BrownianWienerClosedForm) {
  // tr(M^4) for the Brownian covariance operator: sum (k - 1/2)^-8 pi^-8 = 255/9450
  const auto G = sim3_covariance(1);
  EXPECT_NEAR(population_itr(G, G, ProjectionKernel::wiener()), 255.0 / 9450.0, 1e-10);
  const auto G4 = sim3_covariance(4);
  EXPECT_NEAR(population_itr(G4, G4, ProjectionKernel::wiener()), 4 * 255.0 / 9450.0, 1e-10);
}

TEST(PopulationItr, BrownianOuMatchesRomberg) {
  const auto k = ProjectionKernel::ornstein_uhlenbeck(1);
  const double t1 = trapezoid_brownian_itr(k, 101);
  const double t2 = trapezoid_brownian_itr(k, 201);
  const double t3 = trapezoid_brownian_itr(k, 401);
  const double r1 = (4 * t2 - t1) / 3, r2 = (4 * t3 - t2) / 3;
  const double romberg = (16 * r2 - r1) / 15;
  const std::size_t p = 3;
  const auto G = sim3_covariance(p);
  EXPECT_LT(rel_err(population_itr(G, G, k), p * romberg), 1e-6);
}

TEST(PopulationItr, Symmetric) {
  const auto k = ProjectionKernel::ornstein_uhlenbeck(1);
  const auto G = sim1_covariance(ma_weights(Dependence::CaseI, 5, 0));
  const auto H = sim2_covariance(ma_weights(Dependence::CaseII, 5, 3));
  EXPECT_LT(rel_err(population_itr(G, H, k), population_itr(H, G, k)), 1e-10);
  PopulationOptions tight;
  tight.budget = 10;
  EXPECT_THROW(population_itr(G, G, k, tight), std::invalid_argument);
}

TEST(PopulationImd, ZeroForEqualMeans) {
  const auto k = ProjectionKernel::ornstein_uhlenbeck(1);
  const auto G = sim1_covariance(ma_weights(Dependence::CaseI, 4, 0));
  const auto mu = sim1_mean(Dependence::CaseI, 4, 0);
  EXPECT_NEAR(population_imd(G, mu, mu, k), 0.0, 1e-14);
  EXPECT_GT(population_imd(G, mu, MeanFunction::zero(4), k), 0.0);
}

TEST(PopulationSigma2, MatchesFormula) {
  const auto k = ProjectionKernel::ornstein_uhlenbeck(1);
  const auto G = sim3_covariance(2);
  const double itr = population_itr(G, G, k);
  EXPECT_LT(rel_err(population_sigma2(G, G, k, 10, 12),
                    2 * itr / 90 + 2 * itr / 132 + 4 * itr / 120),
            1e-12);
}
