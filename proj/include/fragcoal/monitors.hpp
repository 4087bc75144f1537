#ifndef FRAGCOAL_MONITORS_HPP
#define FRAGCOAL_MONITORS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fragcoal/norms.hpp"
#include "fragcoal/operators.hpp"
#include "fragcoal/solver.hpp"
#include "fragcoal/types.hpp"

namespace fragcoal {

// Constants shared by the inequality monitors. The K constants come from the
// admissibility domination fits; K_moment and c_m are fitted on a calibration
// set and then frozen.
template <class Scalar = double>
struct MonitorContext {
  Scalar m = Scalar(2);
  Scalar alpha = Scalar(0.5);
  Scalar omega = Scalar(2);
  Scalar ledger_order = Scalar(2);  // integer i >= 2 of the moment ledger
  Scalar delta_i = Scalar(0);       // moment-gap certificate at ledger_order
  Scalar sup_rate_01 = Scalar(0);   // ess sup of a on [0, 1]
  Scalar K_product = Scalar(0), alpha_product = Scalar(0.5);
  Scalar K_sum = Scalar(0), alpha_sum = Scalar(0.5);
  Scalar margin = Scalar(0.05);     // allowed violation of frozen constants
};

template <class Scalar = double>
struct MonitorReport {
  std::string name;
  Scalar max_violation = Scalar(0);  // positive means the inequality failed
  Scalar tol = Scalar(0);
  bool pass = true;
  std::vector<Scalar> residuals;

  void add(Scalar residual) {
    residuals.push_back(residual);
    max_violation = std::max(max_violation, residual);
    pass = max_violation <= tol;
  }
};

// --------------------------------------------------------------------------
// Moment production by coagulation:
//   int x^i Cf <= K_i (||f||^(a)_[i-1] ||f||_[1] + ||f||_[i-1] ||f||^(a)_[1]).

template <class Scalar>
Scalar coag_moment_lhs(const DiscreteOperators<Scalar>& ops, const Vector<Scalar>& f, Scalar i) {
  return moment(ops.grid, apply_coagulation(ops, f), i);
}

template <class Scalar>
Scalar coag_moment_rhs(const MassGrid<Scalar>& grid, const Vector<Scalar>& rate,
                       const Vector<Scalar>& f, Scalar i, Scalar alpha, Scalar omega) {
  const Scalar m1 = moment(grid, f, Scalar(1));
  const Scalar mi1 = moment(grid, f, i - Scalar(1));
  const Scalar a_i1 = alpha_moment(grid, f, i - Scalar(1), alpha, omega, rate);
  const Scalar a_1 = alpha_moment(grid, f, Scalar(1), alpha, omega, rate);
  return a_i1 * m1 + mi1 * a_1;
}

// Fitted production constant: max observed ratio over the calibration set.
template <class Scalar>
Scalar calibrate_coag_moment_constant(const DiscreteOperators<Scalar>& ops,
                                      const Vector<Scalar>& rate,
                                      const std::vector<Vector<Scalar>>& fields, Scalar i,
                                      Scalar alpha, Scalar omega) {
  Scalar K = Scalar(0);
  for (const auto& f : fields) {
    const Scalar rhs = coag_moment_rhs(ops.grid, rate, f, i, alpha, omega);
    if (!(rhs > Scalar(1e-300))) continue;
    K = std::max(K, coag_moment_lhs(ops, f, i) / rhs);
  }
  return K;
}

template <class Scalar>
Scalar coag_moment_violation(const DiscreteOperators<Scalar>& ops, const Vector<Scalar>& rate,
                             const Vector<Scalar>& f, const MonitorContext<Scalar>& ctx,
                             Scalar K_frozen) {
  const Scalar i = ctx.ledger_order;
  if (i == Scalar(1)) return std::abs(coag_moment_lhs(ops, f, i));  // exact zero case
  const Scalar rhs = K_frozen * coag_moment_rhs(ops.grid, rate, f, i, ctx.alpha, ctx.omega);
  const Scalar lhs = coag_moment_lhs(ops, f, i);
  if (rhs <= Scalar(0)) return std::max(lhs, Scalar(0));
  return lhs / rhs - Scalar(1);  // violation iff > margin
}

// --------------------------------------------------------------------------
// Fragmentation moment dissipation:
//   int x^i (Af + Bf) <= -delta_i ||f||^(1)_[i] + omega_1 ||f||_[i],
//   omega_1 = delta_i ess sup_[0,1] a + omega (1 + delta_i).

template <class Scalar>
Scalar frag_dissipation_residual(const DiscreteOperators<Scalar>& ops, const Vector<Scalar>& rate,
                                 const Vector<Scalar>& f, Scalar i, Scalar delta_i, Scalar omega,
                                 Scalar sup_rate_01) {
  const Scalar lhs = moment(ops.grid, Vector<Scalar>(ops.generator * f), i);
  if (i == Scalar(1)) return std::abs(lhs);  // exact conservation case
  const Scalar omega1 = delta_i * sup_rate_01 + omega * (Scalar(1) + delta_i);
  const Scalar rhs = -delta_i * alpha_moment(ops.grid, f, i, Scalar(1), omega, rate) +
                     omega1 * moment(ops.grid, f, i);
  return lhs - rhs;
}

// --------------------------------------------------------------------------
// Hoelder interpolation between moment scales:
//   ||f||^(a)_[r] <= c_a ||f||_[1] + ||f||_[i-1]^(1-a) (||f||^(1)_[i])^a,
//   c_a = sup over sub-unit cells of (omega + a)^a x^(r-1).

template <class Scalar>
Scalar holder_residual(const MassGrid<Scalar>& grid, const Vector<Scalar>& rate,
                       const Vector<Scalar>& f, Scalar i, Scalar r, Scalar alpha, Scalar omega) {
  if (!(i >= Scalar(2)) || !(r >= Scalar(1)) || !(r <= i - Scalar(1)))
    throw ConfigError("holder monitor requires i >= 2 and 1 <= r <= i-1");
  Scalar c_a = Scalar(0);
  for (Index j = 0; j < grid.cells(); ++j) {
    const Scalar x = grid.centers()[j];
    if (x >= Scalar(1)) break;
    c_a = std::max(c_a, std::pow(omega + rate[j], alpha) * std::pow(x, r - Scalar(1)));
  }
  const Scalar lhs = alpha_moment(grid, f, r, alpha, omega, rate);
  const Scalar rhs = c_a * moment(grid, f, Scalar(1)) +
                     std::pow(moment(grid, f, i - Scalar(1)), Scalar(1) - alpha) *
                         std::pow(alpha_moment(grid, f, i, Scalar(1), omega, rate), alpha);
  return lhs - rhs;
}

// --------------------------------------------------------------------------
// Bilinear coagulation bound ||C~(f,g)||_[0,m] <= (1+2^m) K ||f||^(a) ||g||^(a)
// and the one-sided form ||Cf||_[0,m] <= 2^(m+1) K ||f||^(a) ||f||_[0,m].

template <class Scalar>
Scalar coag_bilinear_ratio(const DiscreteOperators<Scalar>& ops, const Vector<Scalar>& rate,
                           const Vector<Scalar>& f, const Vector<Scalar>& g, Scalar m, Scalar K,
                           Scalar alpha, Scalar omega) {
  const Scalar lhs = weighted_norm(ops.grid, coag_bilinear(ops, f, g), m);
  const Scalar rhs = (Scalar(1) + std::pow(Scalar(2), m)) * K *
                     alpha_norm(ops.grid, f, m, alpha, omega, rate) *
                     alpha_norm(ops.grid, g, m, alpha, omega, rate);
  if (rhs <= Scalar(0)) return lhs > Scalar(0) ? std::numeric_limits<Scalar>::infinity() : Scalar(0);
  return lhs / rhs;
}

template <class Scalar>
Scalar coag_onesided_ratio(const DiscreteOperators<Scalar>& ops, const Vector<Scalar>& rate,
                           const Vector<Scalar>& f, Scalar m, Scalar K, Scalar alpha,
                           Scalar omega) {
  const Scalar lhs = weighted_norm(ops.grid, apply_coagulation(ops, f), m);
  const Scalar rhs = std::pow(Scalar(2), m + Scalar(1)) * K *
                     alpha_norm(ops.grid, f, m, alpha, omega, rate) *
                     weighted_norm(ops.grid, f, m);
  if (rhs <= Scalar(0)) return lhs > Scalar(0) ? std::numeric_limits<Scalar>::infinity() : Scalar(0);
  return lhs / rhs;
}

// --------------------------------------------------------------------------
// Superadditivity: 0 <= (x+y)^m - x^m - y^m <= c_m (x y^(m-1) + x^(m-1) y).

template <class Scalar>
Scalar superadditivity_ratio(Scalar x, Scalar y, Scalar m) {
  const Scalar num = std::pow(x + y, m) - std::pow(x, m) - std::pow(y, m);
  const Scalar den = x * std::pow(y, m - Scalar(1)) + std::pow(x, m - Scalar(1)) * y;
  return den > Scalar(0) ? num / den : Scalar(0);
}

template <class Scalar>
Scalar calibrate_superadditivity_constant(const std::vector<std::pair<Scalar, Scalar>>& probes,
                                          Scalar m) {
  Scalar c = Scalar(0);
  for (const auto& [x, y] : probes) c = std::max(c, superadditivity_ratio(x, y, m));
  return c;
}

// --------------------------------------------------------------------------
// Exponential envelopes fitted on a calibration trace and tested on a fresh
// one: v(t) <= e^(D1 t) v(0) + D0/D1 (e^(D1 t) - 1).

template <class Scalar = double>
struct EnvelopeFit {
  Scalar D0 = Scalar(0);
  Scalar D1 = Scalar(0);

  Scalar bound(Scalar t, Scalar v0) const {
    const Scalar g = std::exp(D1 * t);
    return g * v0 + D0 / D1 * (g - Scalar(1));
  }
};

template <class Scalar>
EnvelopeFit<Scalar> fit_exponential_envelope(const std::vector<Scalar>& t,
                                             const std::vector<Scalar>& v) {
  if (t.size() < 3 || t.size() != v.size()) throw ConfigError("envelope fit needs a series");
  EnvelopeFit<Scalar> fit;
  Scalar max_rel_slope = Scalar(0);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const Scalar dt = t[k + 1] - t[k];
    if (!(dt > Scalar(0))) continue;
    const Scalar s = (v[k + 1] - v[k]) / dt;
    max_rel_slope = std::max(max_rel_slope, s / std::max(v[k], Scalar(1e-300)));
  }
  fit.D1 = std::max(Scalar(1e-2), Scalar(1.1) * max_rel_slope);
  Scalar d0 = Scalar(0);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const Scalar dt = t[k + 1] - t[k];
    if (!(dt > Scalar(0))) continue;
    d0 = std::max(d0, (v[k + 1] - v[k]) / dt - fit.D1 * v[k]);
  }
  fit.D0 = Scalar(1.1) * d0 + Scalar(1e-8);
  return fit;
}

template <class Scalar>
Scalar envelope_violation(const EnvelopeFit<Scalar>& fit, const std::vector<Scalar>& t,
                          const std::vector<Scalar>& v) {
  Scalar worst = Scalar(-1);
  for (std::size_t k = 0; k < t.size(); ++k)
    worst = std::max(worst, v[k] / std::max(fit.bound(t[k], v[0]), Scalar(1e-300)) - Scalar(1));
  return worst;  // <= 0 means the whole series stays below the envelope
}

// --------------------------------------------------------------------------
// Moment ledger: Phi(t) = ||f(t)||_[i] + delta_i int_0^t Q(s) ds with
// Q = int_{x>=1} a x^i f. Returns the Phi series via trapezoidal accumulation
// of the recorded tail production.

template <class Scalar>
std::vector<Scalar> phi_ledger(const SimulationTrace<Scalar>& trace, Scalar delta_i) {
  const auto& t = trace.times;
  const auto& q = trace.tail_q;
  std::vector<Scalar> phi(t.size());
  Scalar acc = Scalar(0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) acc += Scalar(0.5) * (q[k] + q[k - 1]) * (t[k] - t[k - 1]);
    phi[k] = trace.m_ledger.empty() ? trace.m_order[k] + delta_i * acc
                                    : trace.m_ledger[k] + delta_i * acc;
  }
  return phi;
}

// Zeroth-moment envelope with the explicit constant a_1 = 2 b0 sup_[0,1] a w_i:
// M0(t) <= e^(a1 t) (M0(0) + 2 b0 int_0^t P ds).
template <class Scalar>
Scalar zeroth_moment_envelope_violation(const SimulationTrace<Scalar>& trace, Scalar b0,
                                        Scalar a1) {
  Scalar acc = Scalar(0), worst = Scalar(-1);
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    if (k > 0)
      acc += Scalar(0.5) * (trace.tail_p[k] + trace.tail_p[k - 1]) *
             (trace.times[k] - trace.times[k - 1]);
    const Scalar bound = std::exp(a1 * trace.times[k]) * (trace.m0[0] + Scalar(2) * b0 * acc);
    worst = std::max(worst, trace.m0[k] / std::max(bound, Scalar(1e-300)) - Scalar(1));
  }
  return worst;
}

}  // namespace fragcoal

#endif
