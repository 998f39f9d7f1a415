#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrp/basis.hpp"
#include "mrp/engine.hpp"
#include "mrp/kernels.hpp"

namespace mrp {

enum class AlphaLaw { StandardNormal, Rademacher };

struct OracleConfig {
  std::size_t num_alpha_draws = 200;
  std::size_t num_gamma_draws = 2000;
  std::size_t grid_size = 64;
  AlphaLaw alpha_law = AlphaLaw::StandardNormal;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument unless grid_size >= 16 and draws >= 100.
  void validate() const;
};

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Symmetric square root of v on a uniform grid of `grid_size` points in
/// [0,1], with diagonal jitter 1e-10, escalated to 1e-8 and 1e-6 when the
/// spectrum is not numerically PSD. Throws std::runtime_error past 1e-6.
Eigen::MatrixXd kernel_sqrt(const ProjectionKernel& kernel, std::size_t grid_size);

/// Monte Carlo of E[(int alpha^T (mu1-mu2)(t) gamma(t) dt)^2] with gamma a
/// Gaussian process of covariance v on the grid and trapezoid integrals.
McEstimate mc_mrp(const MeanFunction& mu1, const MeanFunction& mu2,
                  const ProjectionKernel& kernel, const OracleConfig& cfg);

/// The three-term statistic with each pair integral done by a 2-D trapezoid
/// rule over the reconstructed curves on grid_size^2 points.
double dense_mrp_hat(const CurvePanel& x, const CurvePanel& y, const ProjectionKernel& kernel,
                     std::size_t grid_size);

inline constexpr std::size_t kDenseItrMaxGrid = 64;

/// Trace estimator by literal 4-D trapezoid quadrature of the curve
/// products; grid_size <= 64.
double dense_itr_hat(const CurvePanel& x, const CurvePanel& y, const ProjectionKernel& kernel,
                     std::size_t grid_size, int which);

/// Richardson extrapolation of dense_itr_hat on grids g and 2g-1 (step
/// halved), cancelling the O(h^2) trapezoid error; 2g-1 <= 64.
double dense_itr_extrapolated(const CurvePanel& x, const CurvePanel& y,
                              const ProjectionKernel& kernel, std::size_t grid_size, int which);

/// Covariance G(s,t) = sum_r a_r(s,t) K_r of a p-dimensional process, with
/// scalar functions a_r (smooth away from s = t) and p x p matrices K_r.
struct CovarianceSpec {
  struct Term {
    std::function<double(double, double)> a;
    Eigen::MatrixXd K;
  };
  std::size_t p = 0;
  std::vector<Term> terms;

  Eigen::MatrixXd operator()(double s, double t) const;
};

struct PopulationOptions {
  int quad_order = 12;
  int panels = 8;
  /// Upper bound on p * quad_order.
  std::size_t budget = 1'000'000;
};

/// Quadruple integral of tr{G(s,s1) H(t,t1)} v(s,t) v(s1,t1).
double population_itr(const CovarianceSpec& G, const CovarianceSpec& H,
                      const ProjectionKernel& kernel, const PopulationOptions& opt = {});

/// Quadruple integral of d(t)^T G(s,s1) d(t1) v(s,t) v(s1,t1), d = mu1 - mu2.
double population_imd(const CovarianceSpec& G, const MeanFunction& mu1, const MeanFunction& mu2,
                      const ProjectionKernel& kernel, const PopulationOptions& opt = {});

/// Null variance of the statistic from population trace functionals.
double population_sigma2(const CovarianceSpec& g1, const CovarianceSpec& g2,
                         const ProjectionKernel& kernel, std::size_t n, std::size_t m,
                         const PopulationOptions& opt = {});

/// Outcome of one verification entry point.
struct OracleCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;       // worst observed discrepancy
  double tolerance = 0.0;
  std::vector<std::string> lines;
};

/// Closed form vs Monte Carlo on random mean pairs (p = 3), within 3 SE.
OracleCheck check_mc(std::uint64_t seed, std::size_t cases = 10);

/// Gram reduction vs dense quadrature for mrp_hat (relative 1e-3). With
/// `tamper`, W is deliberately perturbed as a negative control.
OracleCheck check_mrp(std::uint64_t seed, bool tamper = false, std::size_t cases = 5);

/// Gram reduction vs dense quadrature for the three trace estimators.
OracleCheck check_itr(std::uint64_t seed, bool tamper = false, std::size_t cases = 5);

/// Random smooth curve panel over `basis` with an optional mean shift.
CurvePanel random_curve_panel(std::shared_ptr<const SplineBasis> basis, std::size_t n,
                              std::size_t p, double shift, std::uint64_t seed);

}  // namespace mrp
