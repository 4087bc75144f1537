#ifndef FRAGCOAL_TYPES_HPP
#define FRAGCOAL_TYPES_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace fragcoal {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or non-finite kernel evaluation.
struct KernelError : Error {
  using Error::Error;
};

// Adaptive quadrature failed to reach the requested tolerance, or the
// integral is known to diverge.
struct QuadratureError : Error {
  QuadratureError(const std::string& what, double achieved_error)
      : Error(what), achieved(achieved_error) {}
  double achieved;
};

// Operator assembly violated a structural contract (negative entries,
// unsatisfiable conservation correction, ...).
struct AssemblyError : Error {
  using Error::Error;
};

// Bad run configuration or precondition violation at an API boundary.
struct ConfigError : Error {
  using Error::Error;
};

// A study sub-run failed (blow-up, step underflow, ...).
struct StudyError : Error {
  using Error::Error;
};

}  // namespace fragcoal

#endif
