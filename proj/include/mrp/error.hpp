#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrp {

/// Bad user input: malformed CSV, inconsistent panels, unfittable curves,
/// too few samples. The CLI maps this family to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientSamples : public InputError {
 public:
  using InputError::InputError;
};

/// Raised by curve fitting; carries the (sample, dim) cell when known.
class FitError : public InputError {
 public:
  FitError(const std::string& what, std::size_t sample = npos, std::size_t dim = npos)
      : InputError(what), sample_(sample), dim_(dim) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t sample() const noexcept { return sample_; }
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t sample_;
  std::size_t dim_;
};

/// The variance estimate came out non-positive; no p-value can be formed.
class DegenerateVariance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mrp
