#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrp/basis.hpp"
#include "mrp/data_model.hpp"
#include "mrp/engine.hpp"
#include "mrp/kernels.hpp"
#include "mrp/oracle.hpp"

namespace mrp {

enum class Family { Sim1, Sim2, Sim3 };
enum class Dependence { CaseI, CaseII };

std::string to_string(Family f);
std::string to_string(Dependence d);

struct SimConfig {
  Family family = Family::Sim1;
  Dependence dependence = Dependence::CaseI;
  std::size_t n = 25;
  std::size_t m = 25;
  std::size_t p = 20;
  std::size_t grid_size = 100;
  int percent_equal = 100;  // Sim1 / Sim2
  double eps = 0.0;         // Sim3
  double c = 0.5;           // Sim3
  std::size_t replications = 400;
  double alpha = 0.05;
  ProjectionKernel kernel = ProjectionKernel::ornstein_uhlenbeck(1.0);
  ReconstructionOptions reconstruction;
  std::uint64_t seed = 1;

  /// Throws InputError when a parameter is off its menu.
  void validate() const;
  bool is_null() const;
};

struct ExperimentReport {
  SimConfig config;
  double rejection_rate = 0.0;
  double mc_standard_error = 0.0;
  std::size_t rejections = 0;
  std::size_t L = 0;
  std::vector<double> q_stats;  // per replication, in replication order
  double wall_ms = 0.0;
};

/// A replication failed; `index` is the lowest failing replication and
/// `cause` the original exception.
class ReplicationError : public std::runtime_error {
 public:
  ReplicationError(std::size_t index, std::exception_ptr cause, const std::string& what)
      : std::runtime_error(what), index_(index), cause_(std::move(cause)) {}
  std::size_t index() const noexcept { return index_; }
  const std::exception_ptr& cause() const noexcept { return cause_; }

 private:
  std::size_t index_;
  std::exception_ptr cause_;
};

/// Equispaced observation grid t_j = j/(N-1).
std::vector<double> observation_grid(std::size_t N);

/// `count` standard Brownian paths on `grid` (rows), B(grid[0]) = 0 when
/// grid[0] = 0, independent N(0, dt) increments.
Eigen::MatrixXd gen_brownian(const std::vector<double>& grid, std::size_t count,
                             std::uint64_t seed);

/// Number of dimensions with equal means: ceil(percent * p / 100).
std::size_t equal_dimensions(std::size_t p, int percent);
/// floor(p^c) signal dimensions for the sparse model.
std::size_t sparse_dimensions(std::size_t p, double c);

/// Moving-average weights c_1..c_p: Case I (0.5, 0.3, 0, ...); Case II iid
/// U[0.1, 0.6] drawn from `seed`.
std::vector<double> ma_weights(Dependence dep, std::size_t p, std::uint64_t seed);
/// C(k, j) = sum_l c_l [j == k - l mod p].
Eigen::MatrixXd ma_matrix(const std::vector<double>& weights);

MeanFunction sim1_mean(Dependence dep, std::size_t p, int percent_equal);
MeanFunction sim2_mean(Dependence dep, std::size_t p, int percent_equal);
MeanFunction sim3_mean(std::size_t p, double eps, double c);

/// Generators for one replication; the configuration's seed drives all draws.
PanelPair gen_sim1(const SimConfig& cfg);
PanelPair gen_sim2(const SimConfig& cfg);
PanelPair gen_sim3(const SimConfig& cfg);
PanelPair generate(const SimConfig& cfg);

/// Sim1 weight function exp(-t^2/2)/sqrt(0.7468) and Sim2 exp(-t^2/2)/0.7468.
double sim1_weight(double t);
double sim2_weight(double t);

/// Covariance functions of the generated processes (before reconstruction).
CovarianceSpec sim1_covariance(const std::vector<double>& weights);
CovarianceSpec sim2_covariance(const std::vector<double>& weights);
CovarianceSpec sim3_covariance(std::size_t p);

/// Replication r runs with seed derive_seed(cfg.seed, r).
SimConfig replication_config(const SimConfig& cfg, std::size_t r);

ExperimentReport run_size_power(const SimConfig& cfg);

struct QqPoint {
  double theoretical;
  double empirical;
};

/// Sorted null statistics against normal quantiles at (i - 0.5)/reps.
std::vector<QqPoint> run_qq(const SimConfig& cfg);

/// OLS slope of empirical on theoretical quantiles.
double qq_slope(const std::vector<QqPoint>& points);

}  // namespace mrp
