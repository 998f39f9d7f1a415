#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mrp {

/// Correctly rounded floating-point sum (Shewchuk partials, as in Python's
/// math.fsum). The result does not depend on the order of the summands, so
/// statistics built on it are bit-identical under sample permutation and
/// thread scheduling.
class ExactSum {
 public:
  void add(double x);
  double value() const;

 private:
  std::vector<double> partials_;
  double special_ = 0.0;  // running sum of non-finite inputs
  bool has_special_ = false;
};

double exact_sum(std::span<const double> values);

/// Standard normal CDF and upper tail.
double normal_cdf(double x);
double normal_sf(double x);
double normal_quantile(double prob);
/// Upper alpha quantile z_alpha, i.e. P(N(0,1) > z_alpha) = alpha.
double upper_quantile(double alpha);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against N(0,1). The p-value uses the
/// asymptotic Kolmogorov series with Stephens' small-sample correction.
KsResult ks_test_standard_normal(std::vector<double> sample);

/// Mixes a master seed and a stream counter into an independent 64-bit seed
/// (SplitMix64 finalizer). Used for counter-based per-draw / per-replication
/// streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
  return Rng(derive_seed(master, stream));
}

}  // namespace mrp
