#include "mrp/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "mrp/error.hpp"
#include "mrp/numeric.hpp"
#include "mrp/parallel.hpp"
#include "mrp/quadrature.hpp"

namespace mrp {

void OracleConfig::validate() const {
  if (grid_size < 16) throw std::invalid_argument("oracle grid_size must be at least 16");
  if (num_alpha_draws < 100 || num_gamma_draws < 100) {
    throw std::invalid_argument("oracle draws must be at least 100");
  }
}

namespace {

std::vector<double> uniform_grid(std::size_t g) {
  std::vector<double> t(g);
  for (std::size_t i = 0; i < g; ++i) t[i] = static_cast<double>(i) / static_cast<double>(g - 1);
  return t;
}

Eigen::VectorXd trapezoid_weights(std::size_t g) {
  const double h = 1.0 / static_cast<double>(g - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g), h);
  w(0) = w(static_cast<Eigen::Index>(g) - 1) = 0.5 * h;
  return w;
}

Eigen::MatrixXd kernel_matrix(const ProjectionKernel& kernel, const std::vector<double>& t) {
  const auto g = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd K(g, g);
  for (Eigen::Index i = 0; i < g; ++i) {
    for (Eigen::Index j = 0; j < g; ++j) {
      K(i, j) = kernel(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)]);
    }
  }
  return K;
}

// Curves of every sample evaluated on the grid: p x g each.
std::vector<Eigen::MatrixXd> evaluate_panel(const CurvePanel& panel, const Eigen::MatrixXd& B) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(panel.n());
  for (const auto& c : panel.samples) out.emplace_back(c * B.transpose());
  return out;
}

}  // namespace

Eigen::MatrixXd kernel_sqrt(const ProjectionKernel& kernel, std::size_t grid_size) {
  const Eigen::MatrixXd K = kernel_matrix(kernel, uniform_grid(grid_size));
  const double scale = std::max(1.0, K.diagonal().cwiseAbs().maxCoeff());
  for (double jitter : {1e-10, 1e-8, 1e-6}) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter * scale;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Kj);
    if (eig.info() != Eigen::Success) continue;
    if (eig.eigenvalues().minCoeff() <= 0.0) continue;
    return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() *
           eig.eigenvectors().transpose();
  }
  throw std::runtime_error("kernel covariance factorization failed after jitter 1e-6");
}

McEstimate mc_mrp(const MeanFunction& mu1, const MeanFunction& mu2,
                  const ProjectionKernel& kernel, const OracleConfig& cfg) {
  cfg.validate();
  if (mu1.p != mu2.p) throw std::invalid_argument("mean functions differ in dimension");
  const std::size_t p = mu1.p;
  const std::size_t g = cfg.grid_size;
  const std::vector<double> t = uniform_grid(g);
  const Eigen::VectorXd w = trapezoid_weights(g);
  const Eigen::MatrixXd S = kernel_sqrt(kernel, g);

  // Weighted mean difference: Dw(k, i) = w_i (mu1 - mu2)_k(t_i).
  Eigen::MatrixXd Dw(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(g));
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t i = 0; i < g; ++i) {
      Dw(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
          w(static_cast<Eigen::Index>(i)) * (mu1(k, t[i]) - mu2(k, t[i]));
    }
  }

  std::vector<double> per_gamma(cfg.num_gamma_draws);
  parallel_for(cfg.num_gamma_draws, [&](std::size_t d) {
    Rng rng = make_rng(cfg.seed, d);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(static_cast<Eigen::Index>(g));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const Eigen::VectorXd gamma = S * z;
    const Eigen::VectorXd f = Dw * gamma;
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(p));
    std::bernoulli_distribution coin;
    double acc = 0.0;
    for (std::size_t a = 0; a < cfg.num_alpha_draws; ++a) {
      for (Eigen::Index k = 0; k < alpha.size(); ++k) {
        alpha(k) = cfg.alpha_law == AlphaLaw::StandardNormal ? normal(rng)
                                                             : (coin(rng) ? 1.0 : -1.0);
      }
      const double proj = alpha.dot(f);
      acc += proj * proj;
    }
    per_gamma[d] = acc / static_cast<double>(cfg.num_alpha_draws);
  });

  const double G = static_cast<double>(cfg.num_gamma_draws);
  double mean = 0.0;
  for (double v : per_gamma) mean += v;
  mean /= G;
  double ss = 0.0;
  for (double v : per_gamma) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (G - 1.0) / G)};
}

double dense_mrp_hat(const CurvePanel& x, const CurvePanel& y, const ProjectionKernel& kernel,
                     std::size_t grid_size) {
  if (grid_size < 2) throw std::invalid_argument("dense_mrp_hat: grid_size must be at least 2");
  const std::vector<double> t = uniform_grid(grid_size);
  const Eigen::VectorXd w = trapezoid_weights(grid_size);
  const Eigen::MatrixXd Kw = w.asDiagonal() * kernel_matrix(kernel, t) * w.asDiagonal();
  const Eigen::MatrixXd B = design_matrix(t, *x.basis);
  const auto ex = evaluate_panel(x, B);
  const auto ey = evaluate_panel(y, B);

  auto pair = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a * Kw).cwiseProduct(b).sum();
  };
  const double n = static_cast<double>(x.n());
  const double m = static_cast<double>(y.n());
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    for (std::size_t j = 0; j < ex.size(); ++j) {
      if (i != j) sxx += pair(ex[i], ex[j]);
    }
  }
  for (std::size_t i = 0; i < ey.size(); ++i) {
    for (std::size_t j = 0; j < ey.size(); ++j) {
      if (i != j) syy += pair(ey[i], ey[j]);
    }
  }
  for (const auto& a : ex) {
    for (const auto& b : ey) sxy += pair(a, b);
  }
  return sxx / (n * (n - 1.0)) + syy / (m * (m - 1.0)) - 2.0 * sxy / (n * m);
}

double dense_itr_hat(const CurvePanel& x, const CurvePanel& y, const ProjectionKernel& kernel,
                     std::size_t grid_size, int which) {
  if (grid_size > kDenseItrMaxGrid) {
    throw std::invalid_argument("dense_itr_hat: grid_size exceeds the cost guard of 64");
  }
  if (grid_size < 2) throw std::invalid_argument("dense_itr_hat: grid_size must be at least 2");
  if (which != 11 && which != 22 && which != 12) {
    throw std::invalid_argument("dense_itr_hat: which must be 11, 22 or 12");
  }
  const std::vector<double> t = uniform_grid(grid_size);
  const Eigen::VectorXd w = trapezoid_weights(grid_size);
  const Eigen::MatrixXd Kw = w.asDiagonal() * kernel_matrix(kernel, t) * w.asDiagonal();
  const Eigen::MatrixXd B = design_matrix(t, *x.basis);
  const auto ex = evaluate_panel(x, B);
  const auto ey = evaluate_panel(y, B);
  const auto g = static_cast<Eigen::Index>(grid_size);

  // sum over s, t, s1, t1 of Kw(s,t) Kw(s1,t1) [B(s1).C(t)] [D(t1).A(s)]
  auto quad = [&](const Eigen::MatrixXd& A, const Eigen::MatrixXd& Bm, const Eigen::MatrixXd& C,
                  const Eigen::MatrixXd& D) {
    const Eigen::MatrixXd P1 = Bm.transpose() * C;  // (s1, t)
    const Eigen::MatrixXd P2 = D.transpose() * A;   // (t1, s)
    double total = 0.0;
    for (Eigen::Index s = 0; s < g; ++s) {
      for (Eigen::Index tt = 0; tt < g; ++tt) {
        double inner = 0.0;
        for (Eigen::Index s1 = 0; s1 < g; ++s1) {
          for (Eigen::Index t1 = 0; t1 < g; ++t1) {
            inner += Kw(s1, t1) * P1(s1, tt) * P2(t1, s);
          }
        }
        total += Kw(s, tt) * inner;
      }
    }
    return total;
  };

  auto mean_excluding = [](const std::vector<Eigen::MatrixXd>& e, std::size_t j, std::size_t k) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(e[0].rows(), e[0].cols());
    std::size_t count = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i == j || i == k) continue;
      acc += e[i];
      ++count;
    }
    return Eigen::MatrixXd(acc / static_cast<double>(count));
  };

  if (which == 11 || which == 22) {
    const auto& e = which == 11 ? ex : ey;
    const std::size_t k = e.size();
    if (k < 4) throw InsufficientSamples("insufficient samples for the trace oracle");
    std::vector<double> terms(k * k, 0.0);
    parallel_for(k, [&](std::size_t j) {
      for (std::size_t q = 0; q < k; ++q) {
        if (q == j) continue;
        const Eigen::MatrixXd mean = mean_excluding(e, j, q);
        terms[j * k + q] = quad(e[j] - mean, e[j], e[q] - mean, e[q]);
      }
    });
    double s = 0.0;
    for (double v : terms) s += v;
    const double dk = static_cast<double>(k);
    return s / (dk * (dk - 1.0));
  }
  const std::size_t n = ex.size();
  const std::size_t m = ey.size();
  if (n < 2 || m < 2) throw InsufficientSamples("insufficient samples for the trace oracle");
  std::vector<double> terms(n * m, 0.0);
  parallel_for(n, [&](std::size_t j) {
    const Eigen::MatrixXd mx = mean_excluding(ex, j, j);
    for (std::size_t k = 0; k < m; ++k) {
      const Eigen::MatrixXd my = mean_excluding(ey, k, k);
      terms[j * m + k] = quad(ex[j] - mx, ex[j], ey[k] - my, ey[k]);
    }
  });
  double s = 0.0;
  for (double v : terms) s += v;
  return s / (static_cast<double>(n) * static_cast<double>(m));
}

double dense_itr_extrapolated(const CurvePanel& x, const CurvePanel& y,
                              const ProjectionKernel& kernel, std::size_t grid_size, int which) {
  const double coarse = dense_itr_hat(x, y, kernel, grid_size, which);
  const double fine = dense_itr_hat(x, y, kernel, 2 * grid_size - 1, which);
  return (4.0 * fine - coarse) / 3.0;
}

Eigen::MatrixXd CovarianceSpec::operator()(double s, double t) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                              static_cast<Eigen::Index>(p));
  for (const auto& term : terms) out += term.a(s, t) * term.K;
  return out;
}

namespace {

void check_budget(std::size_t p, const PopulationOptions& opt) {
  if (p * static_cast<std::size_t>(opt.quad_order) > opt.budget) {
    throw std::invalid_argument("population quadrature exceeds the configured budget");
  }
}

double inner_integral(const std::function<double(double)>& f, double k1, double k2,
                      const PopulationOptions& opt) {
  return integrate_1d(f, 0.0, 1.0, {k1, k2}, opt.quad_order, 2);
}

}  // namespace

double population_itr(const CovarianceSpec& G, const CovarianceSpec& H,
                      const ProjectionKernel& kernel, const PopulationOptions& opt) {
  if (G.p != H.p) throw std::invalid_argument("covariance specs differ in dimension");
  check_budget(G.p, opt);
  const std::vector<Node2> nodes =
      diagonal_split_nodes(uniform_breakpoints(opt.panels), opt.quad_order);
  const std::size_t rg = G.terms.size();
  const std::size_t rh = H.terms.size();

  // J(r, r') = int int A1_r(s,t1) B1_r'(s,t1) ds dt1 with
  // A1(s,t1) = int a(s,x) v(x,t1) dx and B1(s,t1) = int b(x,t1) v(s,x) dx.
  std::vector<Eigen::MatrixXd> partial(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    const double s = nodes[i].s;
    const double t1 = nodes[i].t;
    Eigen::VectorXd a1(static_cast<Eigen::Index>(rg));
    Eigen::VectorXd b1(static_cast<Eigen::Index>(rh));
    for (std::size_t r = 0; r < rg; ++r) {
      const auto& a = G.terms[r].a;
      a1(static_cast<Eigen::Index>(r)) = inner_integral(
          [&](double x) { return a(s, x) * kernel(x, t1); }, s, t1, opt);
    }
    for (std::size_t r = 0; r < rh; ++r) {
      const auto& b = H.terms[r].a;
      b1(static_cast<Eigen::Index>(r)) = inner_integral(
          [&](double x) { return b(x, t1) * kernel(s, x); }, s, t1, opt);
    }
    partial[i] = nodes[i].w * a1 * b1.transpose();
  });
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rg),
                                            static_cast<Eigen::Index>(rh));
  for (const auto& pm : partial) J += pm;

  double total = 0.0;
  for (std::size_t r = 0; r < rg; ++r) {
    for (std::size_t q = 0; q < rh; ++q) {
      const double tr = G.terms[r].K.cwiseProduct(H.terms[q].K.transpose()).sum();
      total += tr * J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q));
    }
  }
  return total;
}

double population_imd(const CovarianceSpec& G, const MeanFunction& mu1, const MeanFunction& mu2,
                      const ProjectionKernel& kernel, const PopulationOptions& opt) {
  if (mu1.p != mu2.p || mu1.p != G.p) throw std::invalid_argument("dimension mismatch");
  check_budget(G.p, opt);
  const std::size_t p = G.p;
  const std::vector<Node2> nodes =
      diagonal_split_nodes(uniform_breakpoints(opt.panels), opt.quad_order);

  // e(s) = int d(t) v(s,t) dt at every distinct abscissa.
  std::vector<double> xs;
  xs.reserve(2 * nodes.size());
  for (const auto& nd : nodes) {
    xs.push_back(nd.s);
    xs.push_back(nd.t);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<Eigen::VectorXd> e(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    const double s = xs[i];
    e[i].resize(static_cast<Eigen::Index>(p));
    for (std::size_t k = 0; k < p; ++k) {
      e[i](static_cast<Eigen::Index>(k)) = inner_integral(
          [&](double t) { return (mu1(k, t) - mu2(k, t)) * kernel(s, t); }, s, s, opt);
    }
  });
  auto lookup = [&](double s) -> const Eigen::VectorXd& {
    return e[static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), s) - xs.begin())];
  };

  double total = 0.0;
  for (const auto& term : G.terms) {
    for (const auto& nd : nodes) {
      total += nd.w * term.a(nd.s, nd.t) * lookup(nd.s).dot(term.K * lookup(nd.t));
    }
  }
  return total;
}

double population_sigma2(const CovarianceSpec& g1, const CovarianceSpec& g2,
                         const ProjectionKernel& kernel, std::size_t n, std::size_t m,
                         const PopulationOptions& opt) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  const double i11 = population_itr(g1, g1, kernel, opt);
  const double i22 = population_itr(g2, g2, kernel, opt);
  const double i12 = population_itr(g1, g2, kernel, opt);
  return 2.0 / (dn * (dn - 1.0)) * i11 + 2.0 / (dm * (dm - 1.0)) * i22 + 4.0 / (dn * dm) * i12;
}

CurvePanel random_curve_panel(std::shared_ptr<const SplineBasis> basis, std::size_t n,
                              std::size_t p, double shift, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal;
  CurvePanel out;
  out.basis = basis;
  const auto L = static_cast<Eigen::Index>(basis->size());
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::MatrixXd c(static_cast<Eigen::Index>(p), L);
    for (Eigen::Index l = 0; l < L; ++l) {
      for (Eigen::Index k = 0; k < c.rows(); ++k) c(k, l) = normal(rng) + shift;
    }
    out.samples.push_back(std::move(c));
  }
  return out;
}

namespace {

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

ProjectionKernel random_kernel(Rng& rng) {
  std::uniform_real_distribution<double> unit;
  if (unit(rng) < 0.3) return ProjectionKernel::wiener();
  return ProjectionKernel::ornstein_uhlenbeck(0.5 + 2.5 * unit(rng));
}

MeanFunction random_mean(Rng& rng, std::size_t p) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<std::array<double, 5>> c(p);
  for (auto& row : c) {
    for (double& v : row) v = coef(rng);
  }
  return {p, [c](std::size_t k, double t) {
            const auto& r = c[k];
            return r[0] + r[1] * t + r[2] * std::sin(2.0 * std::numbers::pi * t + 3.0 * r[3]) +
                   r[4] * t * t;
          }};
}

struct Instance {
  CurvePanel x;
  CurvePanel y;
  ProjectionKernel kernel;
  std::size_t p;
};

Instance small_instance(std::uint64_t seed, std::size_t index) {
  const std::size_t p = 1 + index % 3;
  auto basis = std::make_shared<const SplineBasis>(build_basis(4, 2));
  const std::uint64_t s = derive_seed(seed, index);
  ProjectionKernel kernel =
      index % 2 == 0 ? ProjectionKernel::ornstein_uhlenbeck(1.0) : ProjectionKernel::wiener();
  return {random_curve_panel(basis, 6, p, 1.0, derive_seed(s, 1)),
          random_curve_panel(basis, 6, p, 0.0, derive_seed(s, 2)), kernel, p};
}

Eigen::MatrixXd gram_for(const Instance& in, bool tamper) {
  Eigen::MatrixXd W = kernel_gram(in.x.basis, in.kernel).W;
  if (tamper) W *= 1.05;
  return W;
}

double rel_err(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace

OracleCheck check_mc(std::uint64_t seed, std::size_t cases) {
  OracleCheck out;
  out.name = "mc";
  out.tolerance = 3.0;
  out.pass = true;
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng = make_rng(seed, 1000 + c);
    const ProjectionKernel kernel = random_kernel(rng);
    const MeanFunction mu1 = random_mean(rng, 3);
    const MeanFunction mu2 = random_mean(rng, 3);
    OracleConfig cfg;
    cfg.seed = derive_seed(seed, c);
    const McEstimate mc = mc_mrp(mu1, mu2, kernel, cfg);
    const double pop = mrp_population(mu1, mu2, kernel);
    const double z = std::fabs(mc.estimate - pop) / mc.standard_error;
    out.worst = std::max(out.worst, z);
    const bool ok = z <= out.tolerance;
    out.pass = out.pass && ok;
    out.lines.push_back(format("case %zu kernel=%s closed_form=%.6g mc=%.6g se=%.3g z=%.2f %s", c,
                               kernel.describe().c_str(), pop, mc.estimate, mc.standard_error, z,
                               ok ? "ok" : "FAIL"));
  }
  Rng rng = make_rng(seed, 7);
  const MeanFunction mu = random_mean(rng, 3);
  const double self = mrp_population(mu, mu, ProjectionKernel::ornstein_uhlenbeck(1.0));
  const bool zero_ok = std::fabs(self) <= 1e-12;
  out.pass = out.pass && zero_ok;
  out.lines.push_back(format("identical means closed_form=%.3g %s", self, zero_ok ? "ok" : "FAIL"));
  return out;
}

OracleCheck check_mrp(std::uint64_t seed, bool tamper, std::size_t cases) {
  OracleCheck out;
  out.name = "mrp";
  out.tolerance = 1e-3;
  out.pass = true;
  for (std::size_t c = 0; c < cases; ++c) {
    const Instance in = small_instance(seed, c);
    const double fast = mrp_hat(in.x, in.y, gram_for(in, tamper)).value;
    const double dense = dense_mrp_hat(in.x, in.y, in.kernel, 200);
    const double err = rel_err(fast, dense);
    out.worst = std::max(out.worst, err);
    const bool ok = err <= out.tolerance;
    out.pass = out.pass && ok;
    out.lines.push_back(format("case %zu p=%zu kernel=%s gram=%.9g dense=%.9g rel_err=%.2e %s", c,
                               in.p, in.kernel.describe().c_str(), fast, dense, err,
                               ok ? "ok" : "FAIL"));
  }
  return out;
}

OracleCheck check_itr(std::uint64_t seed, bool tamper, std::size_t cases) {
  OracleCheck out;
  out.name = "itr";
  out.tolerance = 1e-3;
  out.pass = true;
  for (std::size_t c = 0; c < cases; ++c) {
    const Instance in = small_instance(seed, c);
    const ItrEstimates fast = itr_hat_all(in.x, in.y, gram_for(in, tamper));
    const double fv[3] = {fast.itr11, fast.itr22, fast.itr12};
    const int which[3] = {11, 22, 12};
    for (int w = 0; w < 3; ++w) {
      const double coarse = dense_itr_hat(in.x, in.y, in.kernel, 21, which[w]);
      const double fine = dense_itr_hat(in.x, in.y, in.kernel, 41, which[w]);
      const double dense = (4.0 * fine - coarse) / 3.0;
      const double err = rel_err(fv[w], dense);
      out.worst = std::max(out.worst, err);
      const bool ok = err <= out.tolerance;
      out.pass = out.pass && ok;
      out.lines.push_back(
          format("case %zu p=%zu kernel=%s itr%d gram=%.9g dense=%.9g rel_err=%.2e "
                 "(grid 41 alone %.2e) %s",
                 c, in.p, in.kernel.describe().c_str(), which[w], fv[w], dense, err,
                 rel_err(fv[w], fine), ok ? "ok" : "FAIL"));
    }
  }
  return out;
}

}  // namespace mrp
