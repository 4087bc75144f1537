#ifndef FRAGCOAL_QUADRATURE_HPP
#define FRAGCOAL_QUADRATURE_HPP

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <utility>

#include "fragcoal/types.hpp"

namespace fragcoal {

struct QuadTol {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
};

template <class Scalar>
struct QuadResult {
  Scalar value{};
  Scalar error{};  // absolute error estimate
  bool converged = false;
};

// Adaptive Gauss-Kronrod (G7,K15) on [a, b].
template <class Scalar, class F>
QuadResult<Scalar> integrate(F&& f, Scalar a, Scalar b, QuadTol tol = {}) {
  using GK = boost::math::quadrature::gauss_kronrod<Scalar, 15>;
  if (!(a <= b)) std::swap(a, b);
  if (a == b) return {Scalar(0), Scalar(0), true};
  Scalar err = Scalar(0);
  const Scalar value =
      GK::integrate(std::forward<F>(f), a, b, 15, Scalar(tol.rel_tol), &err);
  const bool ok =
      std::isfinite(static_cast<double>(value)) &&
      err <= std::max(Scalar(tol.abs_tol), Scalar(tol.rel_tol) * std::abs(value));
  return {value, err, ok};
}

// Throwing convenience wrapper.
template <class Scalar, class F>
Scalar integrate_or_throw(F&& f, Scalar a, Scalar b, QuadTol tol = {},
                          const char* what = "quadrature") {
  const auto q = integrate(std::forward<F>(f), a, b, tol);
  if (!q.converged) {
    throw QuadratureError(std::string(what) + ": did not converge, achieved error " +
                              std::to_string(static_cast<double>(q.error)),
                          static_cast<double>(q.error));
  }
  return q.value;
}

}  // namespace fragcoal

#endif
