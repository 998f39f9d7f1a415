#include "mrp/basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "mrp/error.hpp"
#include "mrp/parallel.hpp"

namespace mrp {

SplineBasis::SplineBasis(int order, std::vector<double> interior_knots)
    : order_(order), interior_(std::move(interior_knots)) {
  if (order_ < 1) throw std::invalid_argument("spline order must be at least 1");
  for (std::size_t j = 0; j < interior_.size(); ++j) {
    if (!(interior_[j] > 0.0 && interior_[j] < 1.0) || (j > 0 && !(interior_[j] > interior_[j - 1]))) {
      throw std::invalid_argument("interior knots must be strictly increasing in (0,1)");
    }
  }
  knots_.assign(static_cast<std::size_t>(order_), 0.0);
  knots_.insert(knots_.end(), interior_.begin(), interior_.end());
  knots_.insert(knots_.end(), static_cast<std::size_t>(order_), 1.0);
  size_ = interior_.size() + static_cast<std::size_t>(order_);
}

std::vector<double> SplineBasis::breakpoints() const {
  std::vector<double> b;
  b.reserve(interior_.size() + 2);
  b.push_back(0.0);
  b.insert(b.end(), interior_.begin(), interior_.end());
  b.push_back(1.0);
  return b;
}

std::size_t SplineBasis::span_of(double t) const {
  // number of interior knots <= t
  return static_cast<std::size_t>(std::upper_bound(interior_.begin(), interior_.end(), t) -
                                  interior_.begin());
}

void SplineBasis::nonzero(std::size_t span, double t, double* out) const {
  const int degree = order_ - 1;
  const std::size_t i = span + static_cast<std::size_t>(degree);
  double left[32];
  double right[32];
  if (order_ > 31) throw std::invalid_argument("spline order too large");
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = t - knots_[i + 1 - static_cast<std::size_t>(j)];
    right[j] = knots_[i + static_cast<std::size_t>(j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

Eigen::VectorXd SplineBasis::evaluate(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("basis evaluation outside [0,1]");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
  const std::size_t span = span_of(t) == span_count() ? span_count() - 1 : span_of(t);
  double vals[32];
  nonzero(span, t, vals);
  for (int r = 0; r < order_; ++r) v(static_cast<Eigen::Index>(span) + r) = vals[r];
  return v;
}

std::size_t knot_count(std::size_t observations, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) throw std::domain_error("knot rate must lie in (0,1]");
  if (observations < 2) throw std::domain_error("knot_count needs at least two observations");
  const double k = std::floor(std::pow(static_cast<double>(observations), rate) + 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

SplineBasis build_basis(int order, std::size_t interior_knots) {
  std::vector<double> knots(interior_knots);
  for (std::size_t j = 0; j < interior_knots; ++j) {
    knots[j] = static_cast<double>(j + 1) / static_cast<double>(interior_knots + 1);
  }
  return SplineBasis(order, std::move(knots));
}

Eigen::MatrixXd design_matrix(const std::vector<double>& grid, const SplineBasis& basis) {
  const auto L = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()), L);
  double vals[32];
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("grid point outside [0,1]");
    std::size_t span = basis.span_of(t);
    if (span == basis.span_count()) span = basis.span_count() - 1;
    basis.nonzero(span, t, vals);
    for (int r = 0; r < basis.order(); ++r) {
      B(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(span) + r) = vals[r];
    }
  }
  return B;
}

namespace {

constexpr double kRankThreshold = 1e-10;

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> factor_design(const std::vector<double>& grid,
                                                          const SplineBasis& basis) {
  if (grid.size() < basis.size()) {
    throw FitError("underdetermined fit: " + std::to_string(grid.size()) +
                   " observations for " + std::to_string(basis.size()) + " basis functions");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design_matrix(grid, basis));
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < static_cast<Eigen::Index>(basis.size())) {
    throw FitError("rank-deficient design: rank " + std::to_string(qr.rank()) + " < " +
                   std::to_string(basis.size()));
  }
  return qr;
}

}  // namespace

Eigen::VectorXd fit_curve(const DiscreteCurve& curve, const SplineBasis& basis) {
  if (curve.grid.size() != curve.values.size()) {
    throw std::invalid_argument("fit_curve: grid and values differ in length");
  }
  const auto qr = factor_design(curve.grid, basis);
  const Eigen::Map<const Eigen::VectorXd> y(curve.values.data(),
                                            static_cast<Eigen::Index>(curve.values.size()));
  return qr.solve(y);
}

double CurvePanel::value(std::size_t sample, std::size_t dim, double t) const {
  return samples[sample].row(static_cast<Eigen::Index>(dim)).dot(basis->evaluate(t));
}

CurvePanel reconstruct_panel(const DiscretePanel& panel,
                             std::shared_ptr<const SplineBasis> basis) {
  const std::size_t n = panel.n();
  const std::size_t p = panel.p();
  const auto L = static_cast<Eigen::Index>(basis->size());

  // Cells sharing a grid share one factorization; each column is still an
  // independent least-squares fit.
  std::map<std::vector<double>, std::vector<std::size_t>> by_grid;
  for (std::size_t c = 0; c < n * p; ++c) {
    by_grid[panel.at(c / p, c % p).grid].push_back(c);
  }
  std::vector<const std::pair<const std::vector<double>, std::vector<std::size_t>>*> groups;
  groups.reserve(by_grid.size());
  for (const auto& entry : by_grid) groups.push_back(&entry);

  CurvePanel out;
  out.basis = basis;
  out.samples.assign(n, Eigen::MatrixXd(static_cast<Eigen::Index>(p), L));

  parallel_for(groups.size(), [&](std::size_t g) {
    const auto& [grid, cells] = *groups[g];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    try {
      qr = factor_design(grid, *basis);
    } catch (const FitError& e) {
      const std::size_t c = cells.front();
      throw FitError(std::string(e.what()) + " (group " + panel.group_label() + ", sample " +
                         panel.sample_ids[c / p] + ", dim " + panel.dim_labels[c % p] + ")",
                     c / p, c % p);
    }
    Eigen::MatrixXd rhs(static_cast<Eigen::Index>(grid.size()),
                        static_cast<Eigen::Index>(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto& values = panel.at(cells[j] / p, cells[j] % p).values;
      rhs.col(static_cast<Eigen::Index>(j)) =
          Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    }
    const Eigen::MatrixXd coef = qr.solve(rhs);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      out.samples[cells[j] / p].row(static_cast<Eigen::Index>(cells[j] % p)) =
          coef.col(static_cast<Eigen::Index>(j)).transpose();
    }
  });
  return out;
}

CurvePanel reconstruct_panel(const DiscretePanel& panel, double knot_rate, int order) {
  auto basis = std::make_shared<const SplineBasis>(
      build_basis(order, knot_count(panel.min_observations(), knot_rate)));
  return reconstruct_panel(panel, std::move(basis));
}

std::pair<CurvePanel, CurvePanel> reconstruct_panels(const DiscretePanel& x,
                                                     const DiscretePanel& y,
                                                     const ReconstructionOptions& options) {
  if (x.p() != y.p()) throw InputError("dimension mismatch between groups");
  const std::size_t min_obs = std::min(x.min_observations(), y.min_observations());
  auto basis = std::make_shared<const SplineBasis>(
      build_basis(options.order, knot_count(min_obs, options.knot_rate)));
  return {reconstruct_panel(x, basis), reconstruct_panel(y, basis)};
}

}  // namespace mrp
