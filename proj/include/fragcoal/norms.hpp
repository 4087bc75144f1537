#ifndef FRAGCOAL_NORMS_HPP
#define FRAGCOAL_NORMS_HPP

#include <cmath>

#include "fragcoal/grid.hpp"
#include "fragcoal/kernels.hpp"
#include "fragcoal/types.hpp"

namespace fragcoal {

template <class Scalar>
Vector<Scalar> rate_on_centers(const FragmentationRate<Scalar>& a, const MassGrid<Scalar>& grid) {
  Vector<Scalar> r(grid.cells());
  for (Index j = 0; j < grid.cells(); ++j) r[j] = eval_a(a, grid.centers()[j]);
  return r;
}

// M_m(f) = sum x_j^m f_j w_j
template <class Scalar, class D>
Scalar moment(const MassGrid<Scalar>& grid, const Eigen::MatrixBase<D>& f, Scalar m) {
  if (m == Scalar(0)) return (f.derived().array() * grid.widths().array()).sum();
  if (m == Scalar(1)) return (f.derived().array() * grid.mass_weights().array()).sum();
  return (grid.centers().array().pow(m) * f.derived().array() * grid.widths().array()).sum();
}

// ||f||_[0,m] = sum (1 + x^m)|f| w
template <class Scalar, class D>
Scalar weighted_norm(const MassGrid<Scalar>& grid, const Eigen::MatrixBase<D>& f, Scalar m) {
  return ((Scalar(1) + grid.centers().array().pow(m)) * f.derived().array().abs() *
          grid.widths().array())
      .sum();
}

// ||f||^(alpha)_[0,m] = sum (omega + a)^alpha (1 + x^m)|f| w, alpha in [0, 1]
template <class Scalar, class D>
Scalar alpha_norm(const MassGrid<Scalar>& grid, const Eigen::MatrixBase<D>& f, Scalar m,
                  Scalar alpha, Scalar omega, const Vector<Scalar>& rate) {
  return ((omega + rate.array()).pow(alpha) * (Scalar(1) + grid.centers().array().pow(m)) *
          f.derived().array().abs() * grid.widths().array())
      .sum();
}

// ||f||^(alpha)_[r] = sum x^r (omega + a)^alpha |f| w  (pure-moment weight)
template <class Scalar, class D>
Scalar alpha_moment(const MassGrid<Scalar>& grid, const Eigen::MatrixBase<D>& f, Scalar r,
                    Scalar alpha, Scalar omega, const Vector<Scalar>& rate) {
  return (grid.centers().array().pow(r) * (omega + rate.array()).pow(alpha) *
          f.derived().array().abs() * grid.widths().array())
      .sum();
}

}  // namespace fragcoal

#endif
