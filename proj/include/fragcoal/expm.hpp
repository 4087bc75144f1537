#ifndef FRAGCOAL_EXPM_HPP
#define FRAGCOAL_EXPM_HPP

#include <cmath>
#include <cstdint>

#include "fragcoal/types.hpp"

namespace fragcoal {
namespace detail {

template <class Scalar>
Scalar one_norm(const Matrix<Scalar>& A) {
  return A.cwiseAbs().colwise().sum().maxCoeff();
}

// Plain truncated Taylor series; callers keep ||A||_1 at order one.
template <class Scalar>
Matrix<Scalar> taylor_exp(const Matrix<Scalar>& A) {
  const Index n = A.rows();
  Matrix<Scalar> E = Matrix<Scalar>::Identity(n, n);
  Matrix<Scalar> term = Matrix<Scalar>::Identity(n, n);
  for (int k = 1; k <= 64; ++k) {
    term = (term * A / Scalar(k)).eval();
    E += term;
    if (one_norm(term) <= Scalar(1e-18) * one_norm(E)) break;
  }
  return E;
}

template <class Scalar>
Matrix<Scalar> taylor_phi1(const Matrix<Scalar>& A) {
  const Index n = A.rows();
  Matrix<Scalar> P = Matrix<Scalar>::Identity(n, n);
  Matrix<Scalar> term = Matrix<Scalar>::Identity(n, n);
  for (int k = 1; k <= 64; ++k) {
    term = (term * A / Scalar(k + 1)).eval();
    P += term;
    if (one_norm(term) <= Scalar(1e-18) * one_norm(P)) break;
  }
  return P;
}

// Scaling parameters: diagonal shift c making H + cI nonnegative for Metzler
// H, and the squaring count s with ||(H + cI)/2^s||_1 <= theta.
template <class Scalar>
std::pair<Scalar, int> shift_and_scale(const Matrix<Scalar>& H, Scalar theta = Scalar(1)) {
  const Scalar c = std::max(Scalar(0), -H.diagonal().minCoeff());
  Matrix<Scalar> M = H;
  M.diagonal().array() += c;
  const Scalar norm = one_norm(M);
  int s = 0;
  if (norm > theta) s = static_cast<int>(std::ceil(std::log2(static_cast<double>(norm / theta))));
  return {c, std::min(s, 64)};
}

}  // namespace detail

// e^H by shifted scaling-and-squaring. The shift keeps every Taylor term of
// the scaled matrix nonnegative when H is Metzler, so the result is
// entrywise nonnegative without cancellation.
template <class Scalar>
Matrix<Scalar> expm(const Matrix<Scalar>& H) {
  const auto [c, s] = detail::shift_and_scale(H);
  const Scalar inv = Scalar(1) / std::exp2(Scalar(s));
  Matrix<Scalar> M = H * inv;
  M.diagonal().array() += c * inv;
  Matrix<Scalar> E = detail::taylor_exp(M) * std::exp(-c * inv);
  for (int j = 0; j < s; ++j) E = (E * E).eval();
  return E;
}

template <class Scalar>
struct SemigroupStep {
  Matrix<Scalar> exp;   // e^H
  Matrix<Scalar> phi1;  // H^{-1}(e^H - I), continuously extended
};

// Coupled computation of e^H and phi1(H) using the doubling identity
// phi1(2H) = (e^H + I) phi1(H) / 2.
template <class Scalar>
SemigroupStep<Scalar> expm_phi1(const Matrix<Scalar>& H) {
  const auto [c, s] = detail::shift_and_scale(H);
  const Scalar inv = Scalar(1) / std::exp2(Scalar(s));
  Matrix<Scalar> Hs = H * inv;
  Matrix<Scalar> M = Hs;
  M.diagonal().array() += c * inv;
  SemigroupStep<Scalar> out;
  out.exp = detail::taylor_exp(M) * std::exp(-c * inv);
  out.phi1 = detail::taylor_phi1(Hs);
  const Index n = H.rows();
  for (int j = 0; j < s; ++j) {
    out.phi1 = (Scalar(0.5) * ((out.exp + Matrix<Scalar>::Identity(n, n)) * out.phi1)).eval();
    out.exp = (out.exp * out.exp).eval();
  }
  return out;
}

// Derive the step at 2H from the step at H (one squaring level).
template <class Scalar>
SemigroupStep<Scalar> double_step(const SemigroupStep<Scalar>& half) {
  const Index n = half.exp.rows();
  SemigroupStep<Scalar> out;
  out.phi1 = Scalar(0.5) * ((half.exp + Matrix<Scalar>::Identity(n, n)) * half.phi1);
  out.exp = half.exp * half.exp;
  return out;
}

// e^H v by segmented, shifted Taylor action (uniformization style): every
// term is nonnegative for Metzler H and nonnegative v.
template <class Scalar>
Vector<Scalar> expm_action(const Matrix<Scalar>& H, const Vector<Scalar>& v,
                           Scalar theta = Scalar(2)) {
  const Scalar c = std::max(Scalar(0), -H.diagonal().minCoeff());
  Matrix<Scalar> M = H;
  M.diagonal().array() += c;
  const Scalar norm = detail::one_norm(M);
  const int nseg = std::max(1, static_cast<int>(std::ceil(static_cast<double>(norm / theta))));
  const Scalar seg_scale = std::exp(-c / Scalar(nseg));
  Vector<Scalar> w = v;
  for (int seg = 0; seg < nseg; ++seg) {
    Vector<Scalar> term = w;
    Vector<Scalar> acc = w;
    for (int k = 1; k <= 96; ++k) {
      term = (M * term) / (Scalar(k) * Scalar(nseg));
      acc += term;
      if (term.template lpNorm<1>() <= Scalar(1e-18) * acc.template lpNorm<1>()) break;
    }
    w = acc * seg_scale;
  }
  return w;
}

// Spectral-abscissa estimate by power iteration on the nonnegatively shifted
// matrix (Perron root minus shift).
template <class Scalar>
Scalar spectral_abscissa_estimate(const Matrix<Scalar>& L, int iters = 200) {
  const Index n = L.rows();
  const Scalar c = std::max(Scalar(0), -L.diagonal().minCoeff()) + Scalar(1);
  Matrix<Scalar> M = L;
  M.diagonal().array() += c;
  Vector<Scalar> v = Vector<Scalar>::Ones(n);
  v /= v.norm();
  Scalar lambda = Scalar(0);
  for (int it = 0; it < iters; ++it) {
    Vector<Scalar> w = M * v;
    const Scalar nw = w.norm();
    if (nw == Scalar(0)) return -c;
    lambda = nw;
    v = w / nw;
  }
  return lambda - c;
}

}  // namespace fragcoal

#endif
