#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mrp/data_model.hpp"

namespace mrp {

/// Clamped B-spline basis on [0,1] with uniform interior knots. Boundary
/// knots carry multiplicity `order`, so L = interior knots + order.
class SplineBasis {
 public:
  SplineBasis(int order, std::vector<double> interior_knots);

  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return size_; }
  const std::vector<double>& interior_knots() const noexcept { return interior_; }
  const std::vector<double>& knots() const noexcept { return knots_; }

  /// Knot-span boundaries 0 = b_0 < ... < b_{K+1} = 1.
  std::vector<double> breakpoints() const;
  std::size_t span_count() const noexcept { return interior_.size() + 1; }

  /// Index of the knot span containing t (the last span is closed at 1).
  std::size_t span_of(double t) const;

  /// Values of the `order` basis functions that are nonzero on `span`,
  /// i.e. B_span .. B_{span+order-1}, at t (Cox-de Boor recursion).
  void nonzero(std::size_t span, double t, double* out) const;

  /// All L basis values at t. Throws std::domain_error outside [0,1].
  Eigen::VectorXd evaluate(double t) const;

  bool operator==(const SplineBasis& other) const {
    return order_ == other.order_ && interior_ == other.interior_;
  }

 private:
  int order_;
  std::vector<double> interior_;
  std::vector<double> knots_;
  std::size_t size_;
};

/// K = max(1, floor(N^r)). Throws std::domain_error unless 0 < r <= 1 and N >= 2.
std::size_t knot_count(std::size_t observations, double rate);

/// Interior knots at j/(K+1), j = 1..K.
SplineBasis build_basis(int order, std::size_t interior_knots);

/// Ordinary least-squares spline coefficients for one curve, via a
/// column-pivoted Householder QR of the design matrix.
Eigen::VectorXd fit_curve(const DiscreteCurve& curve, const SplineBasis& basis);

/// Design matrix B(t_j)_l for a grid.
Eigen::MatrixXd design_matrix(const std::vector<double>& grid, const SplineBasis& basis);

/// A reconstructed group: every sample is a p x L coefficient matrix (row k
/// holds the coefficients of dimension k) over one shared basis.
struct CurvePanel {
  std::shared_ptr<const SplineBasis> basis;
  std::vector<Eigen::MatrixXd> samples;

  std::size_t n() const noexcept { return samples.size(); }
  std::size_t p() const noexcept { return samples.empty() ? 0 : samples.front().rows(); }
  std::size_t L() const noexcept { return basis ? basis->size() : 0; }

  /// Value of dimension k of sample i at t.
  double value(std::size_t sample, std::size_t dim, double t) const;
};

struct ReconstructionOptions {
  int order = 4;
  double knot_rate = 0.5;
};

/// Fits every cell of `panel` on its own grid against `basis`. Fit errors
/// are rethrown as FitError naming the offending cell.
CurvePanel reconstruct_panel(const DiscretePanel& panel,
                             std::shared_ptr<const SplineBasis> basis);

/// Builds the basis from the smallest observation count in the panel, then
/// reconstructs.
CurvePanel reconstruct_panel(const DiscretePanel& panel, double knot_rate, int order);

/// Reconstructs both groups over a single basis sized by the smallest
/// observation count across both panels.
std::pair<CurvePanel, CurvePanel> reconstruct_panels(const DiscretePanel& x,
                                                     const DiscretePanel& y,
                                                     const ReconstructionOptions& options = {});

}  // namespace mrp
