#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace finslerkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Malformed arguments: dimension mismatches, non-positive parameters,
/// unknown names.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A stated precondition of an operation does not hold for the supplied data
/// (for instance a McShane input that is not L-Lipschitz).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method failed to reach its stopping criterion.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A discrete structure (graph, cover, partition) could not be built.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

inline Vec random_normal(Rng& rng, int dim) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n01(rng);
  return v;
}

inline double random_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

}  // namespace finslerkit
