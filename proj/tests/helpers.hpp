#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrp/basis.hpp"
#include "mrp/data_model.hpp"

namespace mrp::testkit {

inline std::shared_ptr<const SplineBasis> constant_basis() {
  return std::make_shared<const SplineBasis>(build_basis(1, 0));
}

inline std::shared_ptr<const SplineBasis> cubic_basis(std::size_t K) {
  return std::make_shared<const SplineBasis>(build_basis(4, K));
}

inline CurvePanel constant_panel(std::shared_ptr<const SplineBasis> basis, std::size_t n,
                                 std::size_t p, double value) {
  CurvePanel out;
  out.basis = basis;
  const auto L = static_cast<Eigen::Index>(basis->size());
  for (std::size_t i = 0; i < n; ++i) {
    out.samples.push_back(Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(p), L, value));
  }
  return out;
}

// Gaussian coefficients plus a per-group shift of the first column.
inline CurvePanel gaussian_panel(std::shared_ptr<const SplineBasis> basis, std::size_t n,
                                 std::size_t p, double shift, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  CurvePanel out;
  out.basis = basis;
  const auto L = static_cast<Eigen::Index>(basis->size());
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::MatrixXd c(static_cast<Eigen::Index>(p), L);
    for (Eigen::Index a = 0; a < c.rows(); ++a) {
      for (Eigen::Index b = 0; b < L; ++b) c(a, b) = z(rng) + shift * (1.0 + 0.3 * b);
    }
    out.samples.push_back(std::move(c));
  }
  return out;
}

inline DiscretePanel sampled_panel(const std::string& label, std::size_t n, std::size_t p,
                                   std::size_t N, double shift, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  DiscretePanel out(label, n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      auto& cell = out.at(i, k);
      const double a = z(rng), b = z(rng);
      for (std::size_t j = 0; j < N; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(N - 1);
        cell.grid.push_back(t);
        cell.values.push_back(shift + a * std::sin(3.0 * t) + b * t * t + 0.1 * z(rng));
      }
    }
  }
  return out;
}

inline double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace mrp::testkit
