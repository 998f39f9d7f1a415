#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "mrp/basis.hpp"
#include "mrp/data_model.hpp"
#include "mrp/kernels.hpp"

namespace mrp {

struct MrpTestResult {
  double mrp_hat = 0.0;
  double itr11_hat = 0.0;
  double itr22_hat = 0.0;
  double itr12_hat = 0.0;
  double sigma2_hat = 0.0;
  double q_stat = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t p = 0;
  std::size_t L = 0;
};

/// A p-vector of mean curves, evaluated one coordinate at a time.
struct MeanFunction {
  std::size_t p = 0;
  std::function<double(std::size_t k, double t)> eval;

  double operator()(std::size_t k, double t) const { return eval(k, t); }

  static MeanFunction zero(std::size_t p);
  static MeanFunction constant(std::size_t p, double c);
};

/// Statistic plus the pair integrals it was built from: xx(i,j), yy(i,j),
/// xy(i,j) for every ordered pair (diagonals of xx/yy are left at zero).
struct MrpEstimate {
  double value = 0.0;
  Eigen::MatrixXd xx;
  Eigen::MatrixXd yy;
  Eigen::MatrixXd xy;
};

MrpEstimate mrp_hat(const CurvePanel& x, const CurvePanel& y, const Eigen::MatrixXd& W);

/// which = 11, 22 or 12.
double itr_hat(const CurvePanel& x, const CurvePanel& y, const Eigen::MatrixXd& W, int which);

struct ItrEstimates {
  double itr11 = 0.0;
  double itr22 = 0.0;
  double itr12 = 0.0;
};

/// All three trace estimators from a single Gram product; needs n, m >= 4.
ItrEstimates itr_hat_all(const CurvePanel& x, const CurvePanel& y, const Eigen::MatrixXd& W);

double sigma2_hat(double itr11, double itr22, double itr12, std::size_t n, std::size_t m);

MrpTestResult run_test(const CurvePanel& x, const CurvePanel& y, const KernelGram& gram,
                       double alpha = 0.05);

/// Reconstructs both panels over one shared basis, builds W, and tests.
MrpTestResult run_test(const DiscretePanel& x, const DiscretePanel& y,
                       const ProjectionKernel& kernel, double alpha = 0.05,
                       const ReconstructionOptions& options = {});

/// Double integral of (mu1-mu2)(s)^T (mu1-mu2)(t) v(s,t).
double mrp_population(const MeanFunction& mu1, const MeanFunction& mu2,
                      const ProjectionKernel& kernel, int quad_order = kDefaultQuadOrder);

double delta_nm(double mrp, double itr_tau, std::size_t n, std::size_t m);
double power_estimate(double delta, double alpha = 0.05);
double delta_nm2(double mrp, double imd_tau, std::size_t n, std::size_t m);
double power2(double delta2);

}  // namespace mrp
