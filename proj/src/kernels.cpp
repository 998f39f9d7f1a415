#include "mrp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mrp/quadrature.hpp"

namespace mrp {

ProjectionKernel ProjectionKernel::ornstein_uhlenbeck(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("OU rate a must be positive");
  ProjectionKernel k;
  k.kind_ = Kind::OrnsteinUhlenbeck;
  k.a_ = a;
  return k;
}

ProjectionKernel ProjectionKernel::wiener() {
  ProjectionKernel k;
  k.kind_ = Kind::Wiener;
  return k;
}

ProjectionKernel ProjectionKernel::tabulated(std::vector<double> grid, Eigen::MatrixXd table) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (n < 2 || table.rows() != n || table.cols() != n) {
    throw std::invalid_argument("tabulated kernel: table must be square and match the grid");
  }
  if (grid.front() != 0.0 || grid.back() != 1.0) {
    throw std::invalid_argument("tabulated kernel: grid must span [0,1]");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("tabulated kernel: grid must be strictly increasing");
    }
  }
  if (!table.isApprox(table.transpose(), 1e-12) && (table - table.transpose()).norm() > 0.0) {
    throw std::invalid_argument("tabulated kernel: table must be symmetric");
  }
  ProjectionKernel k;
  k.kind_ = Kind::Tabulated;
  k.table_ = std::make_shared<const Table>(Table{std::move(grid), std::move(table)});
  return k;
}

ProjectionKernel ProjectionKernel::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("kernel scale must be positive");
  ProjectionKernel k = *this;
  k.scale_ *= c;
  return k;
}

double ProjectionKernel::base_value(double s, double t) const {
  switch (kind_) {
    case Kind::OrnsteinUhlenbeck:
      return std::exp(-a_ * std::fabs(s - t)) / a_;
    case Kind::Wiener:
      return std::min(s, t);
    case Kind::Tabulated: {
      const auto& g = table_->grid;
      const auto& M = table_->values;
      auto cell = [&](double x) {
        auto it = std::upper_bound(g.begin(), g.end(), x);
        std::size_t i = static_cast<std::size_t>(it - g.begin());
        i = std::clamp<std::size_t>(i, 1, g.size() - 1) - 1;
        return i;
      };
      const std::size_t i = cell(s);
      const std::size_t j = cell(t);
      const double u = (s - g[i]) / (g[i + 1] - g[i]);
      const double w = (t - g[j]) / (g[j + 1] - g[j]);
      const auto I = static_cast<Eigen::Index>(i);
      const auto J = static_cast<Eigen::Index>(j);
      return (1 - u) * (1 - w) * M(I, J) + u * (1 - w) * M(I + 1, J) + (1 - u) * w * M(I, J + 1) +
             u * w * M(I + 1, J + 1);
    }
  }
  return 0.0;
}

double ProjectionKernel::operator()(double s, double t) const {
  if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("kernel evaluated outside [0,1]^2");
  }
  return scale_ * base_value(s, t);
}

std::string ProjectionKernel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::OrnsteinUhlenbeck:
      os << "ou(a=" << a_ << ")";
      break;
    case Kind::Wiener:
      os << "wiener";
      break;
    case Kind::Tabulated:
      os << "tabulated(" << table_->grid.size() << ")";
      break;
  }
  if (scale_ != 1.0) os << "*" << scale_;
  return os.str();
}

double kernel_value(const ProjectionKernel& kernel, double s, double t) { return kernel(s, t); }

KernelGram kernel_gram(std::shared_ptr<const SplineBasis> basis, const ProjectionKernel& kernel,
                       int quad_order) {
  if (quad_order < 2) throw std::invalid_argument("quad_order must be at least 2");
  const SplineBasis& B = *basis;
  const auto L = static_cast<Eigen::Index>(B.size());
  const int order = B.order();
  const std::vector<double> bp = B.breakpoints();
  const std::size_t spans = bp.size() - 1;
  const QuadratureRule& rule = gauss_legendre(quad_order);
  const auto Q = static_cast<Eigen::Index>(quad_order);

  // Per-span nodes, weights and nonzero basis values.
  std::vector<Eigen::VectorXd> nodes(spans);
  std::vector<Eigen::VectorXd> weights(spans);
  std::vector<Eigen::MatrixXd> values(spans);
  std::vector<double> buf(static_cast<std::size_t>(order));
  for (std::size_t I = 0; I < spans; ++I) {
    const double h = bp[I + 1] - bp[I];
    nodes[I].resize(Q);
    weights[I].resize(Q);
    values[I].resize(Q, order);
    for (Eigen::Index q = 0; q < Q; ++q) {
      const double x = bp[I] + h * rule.nodes[static_cast<std::size_t>(q)];
      nodes[I](q) = x;
      weights[I](q) = h * rule.weights[static_cast<std::size_t>(q)];
      B.nonzero(I, x, buf.data());
      for (int l = 0; l < order; ++l) values[I](q, l) = buf[static_cast<std::size_t>(l)];
    }
  }

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(L, L);
  Eigen::MatrixXd V(Q, Q);

  for (std::size_t I = 0; I < spans; ++I) {
    const auto I0 = static_cast<Eigen::Index>(I);
    for (std::size_t J = I + 1; J < spans; ++J) {
      const auto J0 = static_cast<Eigen::Index>(J);
      for (Eigen::Index q = 0; q < Q; ++q) {
        for (Eigen::Index r = 0; r < Q; ++r) {
          V(q, r) = weights[I](q) * weights[J](r) * kernel.base_value(nodes[I](q), nodes[J](r));
        }
      }
      const Eigen::MatrixXd block = values[I].transpose() * V * values[J];
      W.block(I0, J0, order, order) += block;
      W.block(J0, I0, order, order) += block.transpose();
    }

    // Diagonal square: integrate the triangle s < t and add its mirror.
    const double a = bp[I];
    const double h = bp[I + 1] - a;
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(order, order);
    for (Eigen::Index q = 0; q < Q; ++q) {
      const double t = nodes[I](q);
      const double len = t - a;
      Eigen::VectorXd inner = Eigen::VectorXd::Zero(order);
      for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
        const double s = a + len * rule.nodes[r];
        B.nonzero(I, s, buf.data());
        const double w = len * rule.weights[r] * kernel.base_value(s, t);
        for (int l = 0; l < order; ++l) inner(l) += w * buf[static_cast<std::size_t>(l)];
      }
      tri += (h * rule.weights[static_cast<std::size_t>(q)]) * inner * values[I].row(q);
    }
    W.block(I0, I0, order, order) += tri + tri.transpose();
  }

  Eigen::MatrixXd sym = 0.5 * (W + W.transpose());
  sym *= kernel.scale();
  return KernelGram{std::move(sym), std::move(basis), kernel, quad_order};
}

double pair_integral(const Eigen::MatrixXd& ci, const Eigen::MatrixXd& cj,
                     const Eigen::MatrixXd& W) {
  if (ci.rows() != cj.rows() || ci.cols() != W.rows() || cj.cols() != W.cols() ||
      W.rows() != W.cols()) {
    throw std::invalid_argument("pair_integral: shape mismatch");
  }
  // both orders, so swapping the arguments is bit-identical
  return 0.5 * ((ci * W).cwiseProduct(cj).sum() + (cj * W).cwiseProduct(ci).sum());
}

double quad_trace(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                  const Eigen::MatrixXd& D, const Eigen::MatrixXd& W) {
  const auto p = A.rows();
  const auto L = W.rows();
  for (const Eigen::MatrixXd* M : {&A, &B, &C, &D}) {
    if (M->rows() != p || M->cols() != L) throw std::invalid_argument("quad_trace: shape mismatch");
  }
  if (W.cols() != L) throw std::invalid_argument("quad_trace: W must be square");
  const Eigen::MatrixXd left = W * (C.transpose() * B);
  const Eigen::MatrixXd right = W * (D.transpose() * A);
  // trace(left * right) without forming the product
  return left.cwiseProduct(right.transpose()).sum();
}

}  // namespace mrp
