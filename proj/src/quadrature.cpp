#include "mrp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace mrp {

namespace {

QuadratureRule golub_welsch(int order) {
  // Jacobi matrix of the Legendre recurrence on [-1,1].
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = beta;
    J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int k = 0; k < order; ++k) {
    // Polish each node with Newton steps on P_order.
    double x = eig.eigenvalues()(k);
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= order; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int j = 2; j <= order; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(k)] = 0.5 * (x + 1.0);
    rule.weights[static_cast<std::size_t>(k)] = 0.5 * w;
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be positive");
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, golub_welsch(order)).first;
  return it->second;
}

QuadratureRule gauss_legendre(int order, double a, double b) {
  QuadratureRule rule = gauss_legendre(order);
  const double h = b - a;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = a + h * rule.nodes[i];
    rule.weights[i] *= h;
  }
  return rule;
}

double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    std::vector<double> breaks, int order, int panels) {
  std::vector<double> cuts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks) {
    if (x > cuts.back() && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  const QuadratureRule& base = gauss_legendre(order);
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double h = (cuts[c + 1] - cuts[c]) / panels;
    for (int q = 0; q < panels; ++q) {
      const double lo = cuts[c] + q * h;
      for (std::size_t i = 0; i < base.nodes.size(); ++i) {
        total += h * base.weights[i] * f(lo + h * base.nodes[i]);
      }
    }
  }
  return total;
}

std::vector<Node2> diagonal_split_nodes(const std::vector<double>& breakpoints, int order) {
  const QuadratureRule& base = gauss_legendre(order);
  const std::size_t spans = breakpoints.size() - 1;
  std::vector<Node2> out;
  out.reserve(spans * spans * base.nodes.size() * base.nodes.size());
  for (std::size_t I = 0; I < spans; ++I) {
    const double a = breakpoints[I];
    const double ha = breakpoints[I + 1] - a;
    for (std::size_t J = 0; J < spans; ++J) {
      const double c = breakpoints[J];
      const double hc = breakpoints[J + 1] - c;
      if (I != J) {
        for (std::size_t q = 0; q < base.nodes.size(); ++q) {
          for (std::size_t r = 0; r < base.nodes.size(); ++r) {
            out.push_back({a + ha * base.nodes[q], c + hc * base.nodes[r],
                           ha * hc * base.weights[q] * base.weights[r]});
          }
        }
        continue;
      }
      // Triangle s < t: t over the span, s over [a, t]; and its mirror.
      for (std::size_t q = 0; q < base.nodes.size(); ++q) {
        const double t = a + ha * base.nodes[q];
        const double len = t - a;
        for (std::size_t r = 0; r < base.nodes.size(); ++r) {
          const double s = a + len * base.nodes[r];
          const double w = ha * base.weights[q] * len * base.weights[r];
          out.push_back({s, t, w});
          out.push_back({t, s, w});
        }
      }
    }
  }
  return out;
}

std::vector<double> uniform_breakpoints(int panels) {
  std::vector<double> b(static_cast<std::size_t>(panels) + 1);
  for (int i = 0; i <= panels; ++i) b[static_cast<std::size_t>(i)] = static_cast<double>(i) / panels;
  return b;
}

}  // namespace mrp
