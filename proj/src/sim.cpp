#include "mrp/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "mrp/error.hpp"
#include "mrp/numeric.hpp"
#include "mrp/parallel.hpp"
#include "mrp/quadrature.hpp"

namespace mrp {

std::string to_string(Family f) {
  switch (f) {
    case Family::Sim1:
      return "sim1";
    case Family::Sim2:
      return "sim2";
    case Family::Sim3:
      return "sim3";
  }
  return "?";
}

std::string to_string(Dependence d) { return d == Dependence::CaseI ? "I" : "II"; }

void SimConfig::validate() const {
  if (n < 4 || m < 4) throw InputError("n and m must be at least 4");
  if (p < 1) throw InputError("p must be at least 1");
  if (grid_size < 2) throw InputError("grid size must be at least 2");
  if (replications < 1) throw InputError("replications must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  if (family == Family::Sim3) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw InputError("eps must be non-negative");
    if (!(c > 0.0 && c <= 1.0)) throw InputError("c must lie in (0,1]");
  } else {
    static constexpr int menu[] = {0, 50, 75, 90, 95, 98, 100};
    if (std::find(std::begin(menu), std::end(menu), percent_equal) == std::end(menu)) {
      throw InputError("percent must be one of 0, 50, 75, 90, 95, 98, 100");
    }
  }
}

bool SimConfig::is_null() const {
  return family == Family::Sim3 ? eps == 0.0 : percent_equal == 100;
}

std::vector<double> observation_grid(std::size_t N) {
  std::vector<double> t(N);
  for (std::size_t j = 0; j < N; ++j) t[j] = static_cast<double>(j) / static_cast<double>(N - 1);
  return t;
}

Eigen::MatrixXd gen_brownian(const std::vector<double>& grid, std::size_t count,
                             std::uint64_t seed) {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!(grid[j] >= 0.0 && grid[j] <= 1.0) || (j > 0 && !(grid[j] > grid[j - 1]))) {
      throw std::invalid_argument("gen_brownian: grid must be increasing in [0,1]");
    }
  }
  const auto N = static_cast<Eigen::Index>(grid.size());
  std::vector<double> sd(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    sd[j] = std::sqrt(grid[j] - (j == 0 ? 0.0 : grid[j - 1]));
  }
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), N);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double b = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      const double z = normal(rng);
      b += sd[static_cast<std::size_t>(j)] * z;
      out(i, j) = b;
    }
  }
  return out;
}

std::size_t equal_dimensions(std::size_t p, int percent) {
  return (static_cast<std::size_t>(percent) * p + 99) / 100;
}

std::size_t sparse_dimensions(std::size_t p, double c) {
  return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(p), c) + 1e-9));
}

std::vector<double> ma_weights(Dependence dep, std::size_t p, std::uint64_t seed) {
  std::vector<double> w(p, 0.0);
  if (dep == Dependence::CaseI) {
    if (p >= 1) w[0] = 0.5;
    if (p >= 2) w[1] = 0.3;
    return w;
  }
  Rng rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> u(0.1, 0.6);
  for (double& v : w) v = u(rng);
  return w;
}

Eigen::MatrixXd ma_matrix(const std::vector<double>& weights) {
  const std::size_t p = weights.size();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                            static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t l = 1; l <= p; ++l) {
      const std::size_t j = (k + p * l - l) % p;  // k - l mod p
      C(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) += weights[l - 1];
    }
  }
  return C;
}

double sim1_weight(double t) { return std::exp(-0.5 * t * t) / std::sqrt(0.7468); }
double sim2_weight(double t) { return std::exp(-0.5 * t * t) / 0.7468; }

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

MeanFunction moving_average_mean(Dependence dep, std::size_t p, int percent_equal, bool cosine) {
  const std::size_t active = p - equal_dimensions(p, percent_equal);
  const double dp = static_cast<double>(p);
  const double scale = dep == Dependence::CaseII ? std::log(dp * dp / 2.0) : 1.0;
  return {p, [=](std::size_t k, double t) {
            if (k >= active) return 0.0;
            const double kk = static_cast<double>(k + 1) / dp;
            const double s = std::sin(kTwoPi * t + kk);
            double v = t * std::log(kk + 1.0) + s * s;
            if (cosine) v += std::cos(kTwoPi * t + kk);
            return v * scale;
          }};
}

void check_family(const SimConfig& cfg, Family f) {
  if (cfg.family != f) {
    throw InputError("configuration family " + to_string(cfg.family) + " does not match " +
                     to_string(f));
  }
  cfg.validate();
}

// paths row (i * p + k) -> panel cell (i, k), plus mean.
DiscretePanel to_panel(const std::string& label, const Eigen::MatrixXd& values, std::size_t n,
                       std::size_t p, const std::vector<double>& grid, const MeanFunction* mean) {
  DiscretePanel panel(label, n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      DiscreteCurve& cell = panel.at(i, k);
      cell.grid = grid;
      cell.values.resize(grid.size());
      const auto row = static_cast<Eigen::Index>(i * p + k);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        double v = values(row, static_cast<Eigen::Index>(j));
        if (mean) v += (*mean)(k, grid[j]);
        cell.values[j] = v;
      }
    }
  }
  return panel;
}

// Rows (i*p + k) of the result are sum_l c_l Z_{i, k-l}.
Eigen::MatrixXd apply_ma(const std::vector<double>& weights, const Eigen::MatrixXd& Z,
                         std::size_t n) {
  const std::size_t p = weights.size();
  std::vector<std::size_t> lags;
  for (std::size_t l = 1; l <= p; ++l) {
    if (weights[l - 1] != 0.0) lags.push_back(l);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Z.rows(), Z.cols());
  if (lags.size() * 4 <= p) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < p; ++k) {
        auto row = out.row(static_cast<Eigen::Index>(i * p + k));
        for (std::size_t l : lags) {
          row += weights[l - 1] * Z.row(static_cast<Eigen::Index>(i * p + (k + p * l - l) % p));
        }
      }
    }
    return out;
  }
  const Eigen::MatrixXd C = ma_matrix(weights);
  const auto P = static_cast<Eigen::Index>(p);
  for (std::size_t i = 0; i < n; ++i) {
    out.middleRows(static_cast<Eigen::Index>(i * p), P).noalias() =
        C * Z.middleRows(static_cast<Eigen::Index>(i * p), P);
  }
  return out;
}

std::vector<double> case_weights(const SimConfig& cfg) {
  return ma_weights(cfg.dependence, cfg.p, derive_seed(cfg.seed, 3));
}

}  // namespace

MeanFunction sim1_mean(Dependence dep, std::size_t p, int percent_equal) {
  return moving_average_mean(dep, p, percent_equal, true);
}

MeanFunction sim2_mean(Dependence dep, std::size_t p, int percent_equal) {
  return moving_average_mean(dep, p, percent_equal, false);
}

MeanFunction sim3_mean(std::size_t p, double eps, double c) {
  const std::size_t q = sparse_dimensions(p, c);
  const double amp = eps * std::sqrt(2.0 * std::log(static_cast<double>(p)));
  return {p, [=](std::size_t k, double t) { return k < q ? amp * t : 0.0; }};
}

PanelPair gen_sim1(const SimConfig& cfg) {
  check_family(cfg, Family::Sim1);
  const auto grid = observation_grid(cfg.grid_size);
  const auto weights = case_weights(cfg);
  const MeanFunction mean = sim1_mean(cfg.dependence, cfg.p, cfg.percent_equal);
  Eigen::RowVectorXd g(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) g(static_cast<Eigen::Index>(j)) = sim1_weight(grid[j]);

  auto group = [&](std::size_t count, std::uint64_t stream) {
    const Eigen::MatrixXd Z = gen_brownian(grid, count * cfg.p, derive_seed(cfg.seed, stream));
    Eigen::MatrixXd X = apply_ma(weights, Z, count);
    X.array().rowwise() *= g.array();
    return X;
  };
  PanelPair out;
  out.x = to_panel("X", group(cfg.n, 1), cfg.n, cfg.p, grid, &mean);
  out.y = to_panel("Y", group(cfg.m, 2), cfg.m, cfg.p, grid, nullptr);
  return out;
}

PanelPair gen_sim2(const SimConfig& cfg) {
  check_family(cfg, Family::Sim2);
  const auto grid = observation_grid(cfg.grid_size);
  const auto weights = case_weights(cfg);
  const MeanFunction mean = sim2_mean(cfg.dependence, cfg.p, cfg.percent_equal);
  const auto N = static_cast<Eigen::Index>(grid.size());
  Eigen::RowVectorXd g(N);
  Eigen::VectorXd trap(N);  // trapezoid weights times exp(-u^2/2)
  for (Eigen::Index j = 0; j < N; ++j) {
    const double t = grid[static_cast<std::size_t>(j)];
    g(j) = sim2_weight(t);
    const double left = j > 0 ? t - grid[static_cast<std::size_t>(j - 1)] : 0.0;
    const double right = j + 1 < N ? grid[static_cast<std::size_t>(j + 1)] - t : 0.0;
    trap(j) = 0.5 * (left + right) * std::exp(-0.5 * t * t);
  }

  auto group = [&](std::size_t count, std::uint64_t stream) {
    Eigen::MatrixXd Z = gen_brownian(grid, count * cfg.p, derive_seed(cfg.seed, stream));
    const Eigen::MatrixXd xi = Z * trap;  // one integral per path
    const Eigen::MatrixXd mixed = apply_ma(weights, xi, count);
    Z += mixed * g;
    return Z;
  };
  PanelPair out;
  out.x = to_panel("X", group(cfg.n, 1), cfg.n, cfg.p, grid, &mean);
  out.y = to_panel("Y", group(cfg.m, 2), cfg.m, cfg.p, grid, nullptr);
  return out;
}

PanelPair gen_sim3(const SimConfig& cfg) {
  check_family(cfg, Family::Sim3);
  const auto grid = observation_grid(cfg.grid_size);
  const MeanFunction mean = sim3_mean(cfg.p, cfg.eps, cfg.c);
  PanelPair out;
  out.x = to_panel("X", gen_brownian(grid, cfg.n * cfg.p, derive_seed(cfg.seed, 1)), cfg.n,
                   cfg.p, grid, &mean);
  out.y = to_panel("Y", gen_brownian(grid, cfg.m * cfg.p, derive_seed(cfg.seed, 2)), cfg.m,
                   cfg.p, grid, nullptr);
  return out;
}

PanelPair generate(const SimConfig& cfg) {
  switch (cfg.family) {
    case Family::Sim1:
      return gen_sim1(cfg);
    case Family::Sim2:
      return gen_sim2(cfg);
    case Family::Sim3:
      return gen_sim3(cfg);
  }
  throw InputError("unknown family");
}

namespace {

double brownian_min(double s, double t) { return std::min(s, t); }

// int_0^1 exp(-u^2/2) min(s,u) du
double sim2_h(double s) {
  const double tail = std::sqrt(std::numbers::pi / 2.0) *
                      (std::erf(1.0 / std::numbers::sqrt2) - std::erf(s / std::numbers::sqrt2));
  return (1.0 - std::exp(-0.5 * s * s)) + s * tail;
}

}  // namespace

CovarianceSpec sim1_covariance(const std::vector<double>& weights) {
  const Eigen::MatrixXd C = ma_matrix(weights);
  CovarianceSpec spec;
  spec.p = weights.size();
  spec.terms.push_back(
      {[](double s, double t) { return std::min(s, t) * sim1_weight(s) * sim1_weight(t); },
       C * C.transpose()});
  return spec;
}

CovarianceSpec sim2_covariance(const std::vector<double>& weights) {
  const Eigen::MatrixXd C = ma_matrix(weights);
  const std::size_t p = weights.size();
  // Var of int exp(-u^2/2) B(u) du
  const double var_xi = integrate_1d([](double s) { return std::exp(-0.5 * s * s) * sim2_h(s); },
                                     0.0, 1.0, {}, 20, 4);
  CovarianceSpec spec;
  spec.p = p;
  spec.terms.push_back({brownian_min, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                                                static_cast<Eigen::Index>(p))});
  spec.terms.push_back({[](double s, double t) { return sim2_h(s) * sim2_weight(t); },
                        C.transpose()});
  spec.terms.push_back({[](double s, double t) { return sim2_weight(s) * sim2_h(t); }, C});
  spec.terms.push_back({[](double s, double t) { return sim2_weight(s) * sim2_weight(t); },
                        var_xi * C * C.transpose()});
  return spec;
}

CovarianceSpec sim3_covariance(std::size_t p) {
  CovarianceSpec spec;
  spec.p = p;
  spec.terms.push_back({brownian_min, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                                                static_cast<Eigen::Index>(p))});
  return spec;
}

SimConfig replication_config(const SimConfig& cfg, std::size_t r) {
  SimConfig rep = cfg;
  rep.seed = derive_seed(cfg.seed, r);
  rep.replications = 1;
  return rep;
}

ExperimentReport run_size_power(const SimConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t reps = cfg.replications;
  std::vector<double> q(reps, 0.0);
  std::vector<char> reject(reps, 0);
  std::vector<std::size_t> basis_size(reps, 0);
  std::vector<std::exception_ptr> errors(reps);

  parallel_for(reps, [&](std::size_t r) {
    try {
      const SimConfig rep = replication_config(cfg, r);
      const PanelPair panels = generate(rep);
      const MrpTestResult res =
          run_test(panels.x, panels.y, cfg.kernel, cfg.alpha, cfg.reconstruction);
      q[r] = res.q_stat;
      reject[r] = res.reject ? 1 : 0;
      basis_size[r] = res.L;
    } catch (...) {
      errors[r] = std::current_exception();
    }
  });
  for (std::size_t r = 0; r < reps; ++r) {
    if (!errors[r]) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(errors[r]);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw ReplicationError(r, errors[r], "replication " + std::to_string(r) + ": " + what);
  }

  ExperimentReport report;
  report.config = cfg;
  report.q_stats = std::move(q);
  for (char v : reject) report.rejections += static_cast<std::size_t>(v);
  const double rate = static_cast<double>(report.rejections) / static_cast<double>(reps);
  report.rejection_rate = rate;
  report.mc_standard_error = std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
  report.L = basis_size.front();
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<QqPoint> run_qq(const SimConfig& cfg) {
  cfg.validate();
  if (!cfg.is_null()) throw InputError("QQ diagnostics need null data (percent 100 or eps 0)");
  ExperimentReport report = run_size_power(cfg);
  std::vector<double> q = std::move(report.q_stats);
  std::sort(q.begin(), q.end());
  std::vector<QqPoint> out(q.size());
  const double reps = static_cast<double>(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out[i] = {normal_quantile((static_cast<double>(i) + 0.5) / reps), q[i]};
  }
  return out;
}

double qq_slope(const std::vector<QqPoint>& points) {
  if (points.size() < 2) throw std::invalid_argument("qq_slope needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& pt : points) {
    mx += pt.theoretical;
    my += pt.empirical;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& pt : points) {
    sxy += (pt.theoretical - mx) * (pt.empirical - my);
    sxx += (pt.theoretical - mx) * (pt.theoretical - mx);
  }
  return sxy / sxx;
}

}  // namespace mrp
