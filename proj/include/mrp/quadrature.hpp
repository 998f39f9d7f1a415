#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mrp {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` nodes on [0,1] (Golub-Welsch).
const QuadratureRule& gauss_legendre(int order);

/// The rule mapped onto [a,b].
QuadratureRule gauss_legendre(int order, double a, double b);

/// Piecewise Gauss-Legendre integral of f over [a,b], with the interval first
/// split at every point of `breaks` that falls strictly inside it and then
/// into `panels` equal pieces per sub-interval.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    std::vector<double> breaks, int order, int panels = 1);

/// A 2-D quadrature point with weight.
struct Node2 {
  double s;
  double t;
  double w;
};

/// Nodes for a piecewise Gauss-Legendre integral over [0,1]^2 on the grid
/// of panels given by `breakpoints`. Off-diagonal panel rectangles use a
/// tensor rule; diagonal squares are split along s = t into two triangles,
/// each integrated with a collapsed tensor rule, so integrands that are
/// smooth except for a kink on the diagonal keep spectral accuracy.
std::vector<Node2> diagonal_split_nodes(const std::vector<double>& breakpoints, int order);

/// Uniform breakpoints 0, 1/panels, ..., 1.
std::vector<double> uniform_breakpoints(int panels);

}  // namespace mrp
