#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrp/basis.hpp"

namespace mrp {

/// Covariance function v(s,t) of the projection process on [0,1]^2.
///
/// Ornstein-Uhlenbeck: exp(-a|s-t|)/a. Wiener: min(s,t). Tabulated: bilinear
/// interpolation of a symmetric table on a grid spanning [0,1]. Any kernel
/// can be rescaled by c > 0; the scale is applied after the base kernel.
class ProjectionKernel {
 public:
  enum class Kind { OrnsteinUhlenbeck, Wiener, Tabulated };

  static ProjectionKernel ornstein_uhlenbeck(double a);
  static ProjectionKernel wiener();
  static ProjectionKernel tabulated(std::vector<double> grid, Eigen::MatrixXd table);

  /// Scaled(this, c).
  ProjectionKernel scaled(double c) const;

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }
  double ou_rate() const noexcept { return a_; }

  /// v(s,t); throws std::domain_error outside [0,1].
  double operator()(double s, double t) const;

  /// Unscaled base kernel value, no domain check.
  double base_value(double s, double t) const;

  std::string describe() const;

 private:
  struct Table {
    std::vector<double> grid;
    Eigen::MatrixXd values;
  };

  Kind kind_ = Kind::OrnsteinUhlenbeck;
  double a_ = 1.0;
  double scale_ = 1.0;
  std::shared_ptr<const Table> table_;
};

double kernel_value(const ProjectionKernel& kernel, double s, double t);

/// W_lm = double integral of B_l(s) B_m(t) v(s,t) over [0,1]^2.
struct KernelGram {
  Eigen::MatrixXd W;
  std::shared_ptr<const SplineBasis> basis;
  ProjectionKernel kernel;
  int quad_order = 16;
};

inline constexpr int kDefaultQuadOrder = 16;

/// Piecewise tensor Gauss-Legendre over knot-span rectangles, with the
/// diagonal squares split into triangles along s = t.
KernelGram kernel_gram(std::shared_ptr<const SplineBasis> basis, const ProjectionKernel& kernel,
                       int quad_order = kDefaultQuadOrder);

/// Double integral of X_i(s)^T X_j(t) v(s,t) for p x L coefficient
/// matrices: trace(W c_j^T c_i).
double pair_integral(const Eigen::MatrixXd& ci, const Eigen::MatrixXd& cj,
                     const Eigen::MatrixXd& W);

/// Quadruple integral of tr{A(s) B(s1)^T C(t) D(t1)^T} v(s,t) v(s1,t1) for
/// p x L coefficient matrices: trace(W (C^T B) W (D^T A)).
double quad_trace(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                  const Eigen::MatrixXd& D, const Eigen::MatrixXd& W);

}  // namespace mrp
