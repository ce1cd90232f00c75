#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ogl {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

/// Malformed user input: bad dimensions, bad group files, bad parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to produce a usable answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Floor applied to every denominator of a relative residual.
inline constexpr double kDenominatorFloor = 1e-12;

template <class Scalar>
inline Scalar guarded(Scalar denominator) {
  return std::max(denominator, static_cast<Scalar>(kDenominatorFloor));
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

}  // namespace ogl
