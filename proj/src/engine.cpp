#include "mrp/engine.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrp/error.hpp"
#include "mrp/numeric.hpp"
#include "mrp/parallel.hpp"
#include "mrp/quadrature.hpp"

namespace mrp {

MeanFunction MeanFunction::zero(std::size_t p) {
  return {p, [](std::size_t, double) { return 0.0; }};
}

MeanFunction MeanFunction::constant(std::size_t p, double c) {
  return {p, [c](std::size_t, double) { return c; }};
}

namespace {

// Dot product in twice the working precision (Ogita-Rump-Oishi Dot2), so the
// result barely depends on the order of the terms.
double dot2(const double* a, const double* b, std::size_t len) {
  double s = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double prod = a[i] * b[i];
    const double perr = std::fma(a[i], b[i], -prod);
    const double t = s + prod;
    const double z = t - s;
    c += ((s - (t - z)) + (prod - z)) + perr;
    s = t;
  }
  return s + c;
}

void check_panels(const CurvePanel& x, const CurvePanel& y, const Eigen::MatrixXd& W) {
  if (!x.basis || !y.basis) throw std::invalid_argument("curve panel without basis");
  if (x.basis != y.basis && !(*x.basis == *y.basis)) {
    throw std::invalid_argument("basis mismatch between groups");
  }
  if (x.n() > 0 && y.n() > 0 && x.p() != y.p()) {
    throw InputError("dimension mismatch between groups");
  }
  const auto L = static_cast<Eigen::Index>(x.L());
  if (W.rows() != L || W.cols() != L) throw std::invalid_argument("W does not conform to the basis");
  for (const CurvePanel* panel : {&x, &y}) {
    for (const auto& c : panel->samples) {
      if (c.cols() != L || c.rows() != static_cast<Eigen::Index>(x.p())) {
        throw std::invalid_argument("coefficient matrix does not conform to the basis");
      }
    }
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InsufficientSamples("insufficient samples: " + what);
}

}  // namespace

MrpEstimate mrp_hat(const CurvePanel& x, const CurvePanel& y, const Eigen::MatrixXd& W) {
  const std::size_t n = x.n();
  const std::size_t m = y.n();
  require(n >= 2 && m >= 2, "need n >= 2 and m >= 2, got n=" + std::to_string(n) +
                                " m=" + std::to_string(m));
  check_panels(x, y, W);

  const std::size_t N = n + m;
  auto sample = [&](std::size_t a) -> const Eigen::MatrixXd& {
    return a < n ? x.samples[a] : y.samples[a - n];
  };
  std::vector<Eigen::MatrixXd> weighted(N);
  parallel_for(N, [&](std::size_t a) { weighted[a] = sample(a) * W; });

  const std::size_t len = x.p() * x.L();
  Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N),
                                               static_cast<Eigen::Index>(N));
  parallel_for(N, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < N; ++b) {
      const double v = 0.5 * (dot2(sample(a).data(), weighted[b].data(), len) +
                              dot2(sample(b).data(), weighted[a].data(), len));
      pair(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
    }
  });
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t b = a + 1; b < N; ++b) {
      pair(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) =
          pair(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }

  const auto ni = static_cast<Eigen::Index>(n);
  const auto mi = static_cast<Eigen::Index>(m);
  MrpEstimate out;
  out.xx = pair.topLeftCorner(ni, ni);
  out.yy = pair.bottomRightCorner(mi, mi);
  out.xy = pair.topRightCorner(ni, mi);

  ExactSum sxx;
  ExactSum syy;
  ExactSum sxy;
  for (Eigen::Index j = 0; j < ni; ++j) {
    for (Eigen::Index i = 0; i < ni; ++i) {
      if (i != j) sxx.add(out.xx(i, j));
    }
  }
  for (Eigen::Index j = 0; j < mi; ++j) {
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (i != j) syy.add(out.yy(i, j));
    }
  }
  for (Eigen::Index j = 0; j < mi; ++j) {
    for (Eigen::Index i = 0; i < ni; ++i) sxy.add(out.xy(i, j));
  }
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  ExactSum total;
  total.add(sxx.value() / (dn * (dn - 1.0)));
  total.add(syy.value() / (dm * (dm - 1.0)));
  total.add(-2.0 * sxy.value() / (dn * dm));
  out.value = total.value();
  return out;
}

namespace {

struct ItrRequest {
  bool d11 = false;
  bool d22 = false;
  bool d12 = false;
};

ItrEstimates compute_itr(const CurvePanel& x, const CurvePanel& y, const Eigen::MatrixXd& W,
                         ItrRequest req) {
  check_panels(x, y, W);
  const std::size_t n = x.n();
  const std::size_t m = y.n();
  const std::size_t N = n + m;
  const auto L = static_cast<Eigen::Index>(x.L());
  const auto p = static_cast<Eigen::Index>(x.p());

  // Gamma = M^T M for M = [X_1 .. X_n Y_1 .. Y_m]; block (a,b) is Z_a^T Z_b.
  Eigen::MatrixXd M(p, static_cast<Eigen::Index>(N) * L);
  for (std::size_t a = 0; a < N; ++a) {
    M.middleCols(static_cast<Eigen::Index>(a) * L, L) = a < n ? x.samples[a] : y.samples[a - n];
  }
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(M.cols(), M.cols());
  gamma.selfadjointView<Eigen::Lower>().rankUpdate(M.transpose());
  gamma.triangularView<Eigen::StrictlyUpper>() = gamma.transpose();
  auto G = [&](std::size_t a, std::size_t b) {
    return gamma.block(static_cast<Eigen::Index>(a) * L, static_cast<Eigen::Index>(b) * L, L, L);
  };

  // colsum[g][b] = sum over samples a of group g of Z_a^T Z_b.
  std::vector<Eigen::MatrixXd> sum_x(N, Eigen::MatrixXd::Zero(L, L));
  std::vector<Eigen::MatrixXd> sum_y(N, Eigen::MatrixXd::Zero(L, L));
  parallel_for(N, [&](std::size_t b) {
    for (std::size_t a = 0; a < n; ++a) sum_x[b] += G(a, b);
    for (std::size_t a = n; a < N; ++a) sum_y[b] += G(a, b);
  });

  auto term = [&](const Eigen::MatrixXd& ctb, const Eigen::MatrixXd& dta) {
    const Eigen::MatrixXd left = W * ctb;
    const Eigen::MatrixXd right = W * dta;
    return left.cwiseProduct(right.transpose()).sum();
  };

  // Leave-two-out estimator for one group occupying [lo, lo + k).
  auto within = [&](std::size_t lo, std::size_t k, const std::vector<Eigen::MatrixXd>& sums) {
    std::vector<double> terms(k * k, 0.0);
    const double denom = static_cast<double>(k) - 2.0;
    parallel_for(k, [&](std::size_t jj) {
      const std::size_t j = lo + jj;
      for (std::size_t kk = 0; kk < k; ++kk) {
        if (kk == jj) continue;
        const std::size_t q = lo + kk;
        const Eigen::MatrixXd gkj = G(q, j);
        const Eigen::MatrixXd ctb = gkj - (sums[j] - G(j, j) - gkj) / denom;
        const Eigen::MatrixXd dta = gkj - (sums[q].transpose() - gkj - G(q, q)) / denom;
        terms[jj * k + kk] = term(ctb, dta);
      }
    });
    ExactSum s;
    for (double v : terms) s.add(v);
    const double dk = static_cast<double>(k);
    return s.value() / (dk * (dk - 1.0));
  };

  ItrEstimates out;
  if (req.d11) out.itr11 = within(0, n, sum_x);
  if (req.d22) out.itr22 = within(n, m, sum_y);
  if (req.d12) {
    std::vector<double> terms(n * m, 0.0);
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    parallel_for(n, [&](std::size_t j) {
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t q = n + k;
        const Eigen::MatrixXd gkj = G(q, j);
        const Eigen::MatrixXd ctb = gkj - (sum_y[j] - gkj) / (dm - 1.0);
        const Eigen::MatrixXd dta = gkj - (sum_x[q].transpose() - gkj) / (dn - 1.0);
        terms[j * m + k] = term(ctb, dta);
      }
    });
    ExactSum s;
    for (double v : terms) s.add(v);
    out.itr12 = s.value() / (dn * dm);
  }
  return out;
}

}  // namespace

double itr_hat(const CurvePanel& x, const CurvePanel& y, const Eigen::MatrixXd& W, int which) {
  const std::size_t n = x.n();
  const std::size_t m = y.n();
  ItrRequest req;
  switch (which) {
    case 11:
      require(n >= 4, "itr 11 needs n >= 4, got " + std::to_string(n));
      req.d11 = true;
      return compute_itr(x, y, W, req).itr11;
    case 22:
      require(m >= 4, "itr 22 needs m >= 4, got " + std::to_string(m));
      req.d22 = true;
      return compute_itr(x, y, W, req).itr22;
    case 12:
      require(n >= 2 && m >= 2, "itr 12 needs n, m >= 2");
      req.d12 = true;
      return compute_itr(x, y, W, req).itr12;
    default:
      throw std::invalid_argument("itr_hat: which must be 11, 22 or 12");
  }
}

ItrEstimates itr_hat_all(const CurvePanel& x, const CurvePanel& y, const Eigen::MatrixXd& W) {
  require(x.n() >= 4 && y.n() >= 4, "need n >= 4 and m >= 4, got n=" + std::to_string(x.n()) +
                                        " m=" + std::to_string(y.n()));
  return compute_itr(x, y, W, {true, true, true});
}

double sigma2_hat(double itr11, double itr22, double itr12, std::size_t n, std::size_t m) {
  require(n >= 2 && m >= 2, "sigma2 needs n, m >= 2");
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  const double s2 = 2.0 / (dn * (dn - 1.0)) * itr11 + 2.0 / (dm * (dm - 1.0)) * itr22 +
                    4.0 / (dn * dm) * itr12;
  if (!(s2 > 0.0) || !std::isfinite(s2)) {
    throw DegenerateVariance("degenerate variance: sigma2_hat = " + std::to_string(s2));
  }
  return s2;
}

namespace {

double mean_self_norm(const CurvePanel& panel, const Eigen::MatrixXd& W) {
  double acc = 0.0;
  for (const auto& c : panel.samples) acc += std::abs((c * W).cwiseProduct(c).sum());
  return acc / static_cast<double>(panel.n());
}

// sigma2_hat assembled from uncentered fourth moments: the size of the
// rounding noise in the itr estimates when every sample coincides
double sigma2_scale(const CurvePanel& x, const CurvePanel& y, const Eigen::MatrixXd& W) {
  const double a = mean_self_norm(x, W), b = mean_self_norm(y, W);
  const double dn = static_cast<double>(x.n()), dm = static_cast<double>(y.n());
  return 2.0 / (dn * (dn - 1.0)) * a * a + 2.0 / (dm * (dm - 1.0)) * b * b +
         4.0 / (dn * dm) * a * b;
}

}  // namespace

MrpTestResult run_test(const CurvePanel& x, const CurvePanel& y, const KernelGram& gram,
                       double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  require(x.n() >= 4 && y.n() >= 4, "the test needs n >= 4 and m >= 4, got n=" +
                                        std::to_string(x.n()) + " m=" + std::to_string(y.n()));
  MrpTestResult r;
  r.mrp_hat = mrp_hat(x, y, gram.W).value;
  const ItrEstimates itr = itr_hat_all(x, y, gram.W);
  r.itr11_hat = itr.itr11;
  r.itr22_hat = itr.itr22;
  r.itr12_hat = itr.itr12;
  r.sigma2_hat = sigma2_hat(itr.itr11, itr.itr22, itr.itr12, x.n(), y.n());
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * sigma2_scale(x, y, gram.W);
  if (r.sigma2_hat <= floor) {
    std::ostringstream msg;
    msg << "degenerate variance: sigma2_hat = " << r.sigma2_hat
        << " is at rounding level (floor " << floor << ")";
    throw DegenerateVariance(msg.str());
  }
  r.q_stat = r.mrp_hat / std::sqrt(r.sigma2_hat);
  r.p_value = normal_sf(r.q_stat);
  r.alpha = alpha;
  r.reject = r.q_stat > upper_quantile(alpha);
  r.n = x.n();
  r.m = y.n();
  r.p = x.p();
  r.L = x.L();
  return r;
}

MrpTestResult run_test(const DiscretePanel& x, const DiscretePanel& y,
                       const ProjectionKernel& kernel, double alpha,
                       const ReconstructionOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  require(x.n() >= 4 && y.n() >= 4, "the test needs n >= 4 and m >= 4, got n=" +
                                        std::to_string(x.n()) + " m=" + std::to_string(y.n()));
  auto [cx, cy] = reconstruct_panels(x, y, options);
  const KernelGram gram = kernel_gram(cx.basis, kernel);
  return run_test(cx, cy, gram, alpha);
}

double mrp_population(const MeanFunction& mu1, const MeanFunction& mu2,
                      const ProjectionKernel& kernel, int quad_order) {
  if (mu1.p != mu2.p) throw std::invalid_argument("mean functions differ in dimension");
  const std::size_t p = mu1.p;
  auto diff = [&](double t, Eigen::VectorXd& out) {
    for (std::size_t k = 0; k < p; ++k) {
      out(static_cast<Eigen::Index>(k)) = mu1(k, t) - mu2(k, t);
    }
  };
  const std::vector<double> bp = uniform_breakpoints(16);
  const std::size_t panels = bp.size() - 1;
  const QuadratureRule& rule = gauss_legendre(quad_order);
  const auto Q = static_cast<Eigen::Index>(quad_order);
  const auto P = static_cast<Eigen::Index>(p);

  std::vector<Eigen::MatrixXd> vals(panels, Eigen::MatrixXd(Q, P));
  std::vector<Eigen::VectorXd> nodes(panels, Eigen::VectorXd(Q));
  std::vector<Eigen::VectorXd> wts(panels, Eigen::VectorXd(Q));
  Eigen::VectorXd d(P);
  for (std::size_t I = 0; I < panels; ++I) {
    const double h = bp[I + 1] - bp[I];
    for (Eigen::Index q = 0; q < Q; ++q) {
      const double s = bp[I] + h * rule.nodes[static_cast<std::size_t>(q)];
      nodes[I](q) = s;
      wts[I](q) = h * rule.weights[static_cast<std::size_t>(q)];
      diff(s, d);
      vals[I].row(q) = d.transpose();
    }
  }

  double total = 0.0;
  Eigen::MatrixXd V(Q, Q);
  for (std::size_t I = 0; I < panels; ++I) {
    for (std::size_t J = I + 1; J < panels; ++J) {
      for (Eigen::Index q = 0; q < Q; ++q) {
        for (Eigen::Index r = 0; r < Q; ++r) {
          V(q, r) = wts[I](q) * wts[J](r) * kernel(nodes[I](q), nodes[J](r));
        }
      }
      total += 2.0 * (vals[I] * vals[J].transpose()).cwiseProduct(V).sum();
    }
    const double a = bp[I];
    for (Eigen::Index q = 0; q < Q; ++q) {
      const double t = nodes[I](q);
      const double len = t - a;
      double inner = 0.0;
      for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
        const double s = a + len * rule.nodes[r];
        diff(s, d);
        inner += len * rule.weights[r] * kernel(s, t) * d.dot(vals[I].row(q).transpose());
      }
      total += 2.0 * wts[I](q) * inner;
    }
  }
  return total;
}

double delta_nm(double mrp, double itr_tau, std::size_t n, std::size_t m) {
  if (!(itr_tau > 0.0)) throw std::domain_error("delta_nm: itr_tau must be positive");
  const double N = static_cast<double>(n + m);
  const double tau = static_cast<double>(n) / N;
  return N * tau * (1.0 - tau) * mrp / std::sqrt(2.0 * itr_tau);
}

double power_estimate(double delta, double alpha) {
  return normal_cdf(-upper_quantile(alpha) + delta);
}

double delta_nm2(double mrp, double imd_tau, std::size_t n, std::size_t m) {
  if (!(imd_tau > 0.0)) throw std::domain_error("delta_nm2: imd_tau must be positive");
  const double N = static_cast<double>(n + m);
  const double tau = static_cast<double>(n) / N;
  return std::sqrt(N * tau * (1.0 - tau)) * mrp / std::sqrt(4.0 * imd_tau);
}

double power2(double delta2) { return normal_cdf(delta2); }

}  // namespace mrp
