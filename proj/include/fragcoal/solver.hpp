#ifndef FRAGCOAL_SOLVER_HPP
#define FRAGCOAL_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fragcoal/expm.hpp"
#include "fragcoal/norms.hpp"
#include "fragcoal/operators.hpp"
#include "fragcoal/types.hpp"

namespace fragcoal {

enum class NegativityPolicy { reject, clip_tiny };
enum class Termination { reached_t_final, blowup_cap, step_underflow };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::reached_t_final: return "reached_T";
    case Termination::blowup_cap: return "blowup_cap";
    case Termination::step_underflow: return "step_underflow";
  }
  return "?";
}

template <class Scalar = double>
struct IntegratorControls {
  Scalar dt_init = Scalar(1e-3);
  Scalar dt_min = Scalar(1e-11);
  Scalar dt_max = Scalar(0.05);
  Scalar rel_tol = Scalar(1e-6);
  Scalar abs_tol = Scalar(1e-10);
  NegativityPolicy negativity = NegativityPolicy::clip_tiny;
  Scalar t_final = Scalar(1);
  Scalar blowup_cap = Scalar(1e12);  // factor over the initial alpha-norm
  bool adaptive = true;
  int snapshot_stride = 25;

  void validate() const {
    if (!(Scalar(0) < dt_min && dt_min <= dt_init && dt_init <= dt_max))
      throw ConfigError("require 0 < dt_min <= dt_init <= dt_max");
    if (!(rel_tol > Scalar(0) && abs_tol > Scalar(0))) throw ConfigError("tolerances must be > 0");
    if (!(t_final > Scalar(0))) throw ConfigError("t_final must be > 0");
    if (!(blowup_cap > Scalar(1))) throw ConfigError("blowup_cap must exceed 1");
  }
};

// Precomputed reduction weights for the recorded series. `ledger_order` is
// the moment order i used by the tail-production series Q(t), P(t).
template <class Scalar = double>
struct TraceWeights {
  Scalar m, alpha, omega, ledger_order;
  Vector<Scalar> rate;      // a(x_j)
  Vector<Scalar> w_count;   // widths
  Vector<Scalar> w_mass;    // x w
  Vector<Scalar> w_m;       // x^m w
  Vector<Scalar> w_norm;    // (1 + x^m) w
  Vector<Scalar> w_alpha;   // (omega + a)^alpha (1 + x^m) w
  Vector<Scalar> w_ledger;  // x^i w
  Vector<Scalar> w_tail_q;  // 1{x>=1} a x^i w
  Vector<Scalar> w_tail_p;  // 1{x>=1} a (1 + x^i) w

  static TraceWeights make(const MassGrid<Scalar>& grid, Vector<Scalar> rate, Scalar m,
                           Scalar alpha, Scalar omega, Scalar ledger_order) {
    TraceWeights w;
    w.m = m; w.alpha = alpha; w.omega = omega; w.ledger_order = ledger_order;
    w.rate = std::move(rate);
    const auto& x = grid.centers().array();
    const auto& dx = grid.widths().array();
    w.w_count = grid.widths();
    w.w_mass = grid.mass_weights();
    w.w_m = (x.pow(m) * dx).matrix();
    w.w_norm = ((Scalar(1) + x.pow(m)) * dx).matrix();
    w.w_alpha = ((omega + w.rate.array()).pow(alpha) * (Scalar(1) + x.pow(m)) * dx).matrix();
    w.w_ledger = (x.pow(ledger_order) * dx).matrix();
    const auto tail = (x >= Scalar(1)).template cast<Scalar>();
    w.w_tail_q = (tail * w.rate.array() * x.pow(ledger_order) * dx).matrix();
    w.w_tail_p = (tail * w.rate.array() * (Scalar(1) + x.pow(ledger_order)) * dx).matrix();
    return w;
  }
};

template <class Scalar = double>
struct SimulationTrace {
  std::vector<Scalar> times, dt_used;
  std::vector<Scalar> m0, m1, m_order;            // M_0, M_1, M_m
  std::vector<Scalar> m_ledger;                   // M_i at the ledger order
  std::vector<Scalar> norm_0m, alpha_norm_0m;     // ||.||_[0,m], ||.||^(a)_[0,m]
  std::vector<Scalar> tail_q, tail_p;             // Q(t), P(t)
  std::map<std::string, std::vector<Scalar>> monitors;
  std::vector<Scalar> snapshot_times;
  std::vector<Vector<Scalar>> snapshots;
  Termination reason = Termination::reached_t_final;
  long rejected_steps = 0;
  long clip_events = 0;

  const Vector<Scalar>& final_density() const { return snapshots.back(); }
  Scalar final_time() const { return times.back(); }
};

// Exponential-Euler stepping for f' = Lf + C(f): one step is
// f+ = e^(dt L) f + dt phi1(dt L) C(f), the discrete Duhamel formula.
// Step operators are cached per dt; a cached half step yields the full step
// by one doubling.
template <class Scalar = double>
class ExponentialStepper {
 public:
  explicit ExponentialStepper(const DiscreteOperators<Scalar>& ops) : ops_(&ops) {}

  const SemigroupStep<Scalar>& operators_for(Scalar dt) {
    auto it = cache_.find(dt);
    if (it != cache_.end()) return it->second;
    auto half = cache_.find(dt / Scalar(2));
    SemigroupStep<Scalar> step = (half != cache_.end())
                                     ? double_step(half->second)
                                     : expm_phi1(Matrix<Scalar>(dt * ops_->generator));
    return cache_.emplace(dt, std::move(step)).first->second;
  }

  // Single exponential-Euler step.
  Vector<Scalar> step(const Vector<Scalar>& f, Scalar dt) {
    const Vector<Scalar> cf = apply_coagulation(*ops_, f);
    const auto& op = operators_for(dt);
    return op.exp * f + dt * (op.phi1 * cf);
  }

  struct Attempt {
    Vector<Scalar> coarse;  // one dt step
    Vector<Scalar> fine;    // two dt/2 steps (the accepted value)
  };

  Attempt attempt(const Vector<Scalar>& f, Scalar dt) {
    operators_for(dt / Scalar(2));
    operators_for(dt);  // derived by doubling
    Attempt a;
    a.coarse = step(f, dt);
    const Vector<Scalar> mid = step(f, dt / Scalar(2));
    a.fine = step(mid, dt / Scalar(2));
    return a;
  }

  const DiscreteOperators<Scalar>& ops() const { return *ops_; }

 private:
  const DiscreteOperators<Scalar>* ops_;
  std::map<Scalar, SemigroupStep<Scalar>> cache_;
};

template <class Scalar>
Vector<Scalar> step_exponential(ExponentialStepper<Scalar>& stepper, const Vector<Scalar>& f,
                                Scalar dt) {
  return stepper.step(f, dt);
}

// e^(t L) f via the nonnegative Taylor action; round-off negatives below
// 1e-13 * ||f||_[0,m] are clipped (semigroup positivity).
template <class Scalar>
Vector<Scalar> semigroup_apply(const DiscreteOperators<Scalar>& ops, Scalar t,
                               const Vector<Scalar>& f) {
  if (!(t >= Scalar(0))) throw ConfigError("semigroup time must be >= 0");
  if (t == Scalar(0)) return f;
  Vector<Scalar> g = expm_action(Matrix<Scalar>(t * ops.generator), f);
  const Scalar floor = Scalar(-1e-13) * f.cwiseAbs().sum();
  for (Index j = 0; j < g.size(); ++j)
    if (g[j] < Scalar(0) && g[j] >= floor) g[j] = Scalar(0);
  return g;
}

namespace detail {

template <class Scalar>
Scalar ladder_snap_down(Scalar dt_max, Scalar x) {
  if (x >= dt_max) return dt_max;
  const int k = static_cast<int>(std::ceil(std::log2(static_cast<double>(dt_max / x))));
  return dt_max / std::exp2(Scalar(std::min(k, 80)));
}

}  // namespace detail

using MonitorCallback = std::function<void(double, const Vector<double>&,
                                           std::map<std::string, std::vector<double>>&)>;

// Adaptive mild-solution integrator. Steps live on the dt_max * 2^-k ladder
// (so cached step operators are reused); the accepted value is the two-half-
// step composition and the coarse/fine difference drives step control.
template <class Scalar>
SimulationTrace<Scalar> integrate(const DiscreteOperators<Scalar>& ops, const Vector<Scalar>& f0,
                                  const IntegratorControls<Scalar>& controls,
                                  const TraceWeights<Scalar>& weights,
                                  const std::function<void(Scalar, const Vector<Scalar>&,
                                                           SimulationTrace<Scalar>&)>& observer = {}) {
  controls.validate();
  if (f0.minCoeff() < Scalar(0)) throw ConfigError("initial density must be nonnegative");

  ExponentialStepper<Scalar> stepper(ops);
  SimulationTrace<Scalar> trace;
  Vector<Scalar> f = f0;
  Scalar t = Scalar(0);
  const Scalar alpha0 = weights.w_alpha.dot(f0);
  long accepted = 0;

  const auto record = [&](Scalar dt_used, bool force_snapshot) {
    trace.times.push_back(t);
    trace.dt_used.push_back(dt_used);
    trace.m0.push_back(weights.w_count.dot(f));
    trace.m1.push_back(weights.w_mass.dot(f));
    trace.m_order.push_back(weights.w_m.dot(f));
    trace.norm_0m.push_back(weights.w_norm.dot(f));
    trace.alpha_norm_0m.push_back(weights.w_alpha.dot(f));
    trace.tail_q.push_back(weights.w_tail_q.dot(f));
    trace.tail_p.push_back(weights.w_tail_p.dot(f));
    if (observer) observer(t, f, trace);
    if (force_snapshot ||
        (controls.snapshot_stride > 0 && accepted % controls.snapshot_stride == 0)) {
      trace.snapshot_times.push_back(t);
      trace.snapshots.push_back(f);
    }
  };
  record(Scalar(0), true);

  Scalar dt = detail::ladder_snap_down(controls.dt_max,
                                       std::min(controls.dt_init, controls.dt_max));
  trace.reason = Termination::reached_t_final;
  const Scalar t_end = controls.t_final;

  while (t < t_end) {
    if (weights.w_alpha.dot(f) > controls.blowup_cap * std::max(alpha0, Scalar(1e-300))) {
      trace.reason = Termination::blowup_cap;
      break;
    }
    const Scalar dt_eff = std::min(dt, t_end - t);
    auto att = stepper.attempt(f, dt_eff);

    // negativity policy on the candidate
    const Scalar worst = att.fine.minCoeff();
    const Scalar clip_floor = Scalar(1e-13) * weights.w_norm.dot(f.cwiseAbs());
    bool neg_reject = false;
    if (worst < Scalar(0)) {
      if (controls.negativity == NegativityPolicy::reject || worst < -clip_floor)
        neg_reject = true;
    }

    const Scalar err = weights.w_norm.dot((att.coarse - att.fine).cwiseAbs());
    const Scalar tol = controls.abs_tol + controls.rel_tol * weights.w_norm.dot(att.fine.cwiseAbs());
    const bool accept = !neg_reject && (!controls.adaptive || err <= tol);

    if (accept) {
      if (worst < Scalar(0)) {
        for (Index j = 0; j < att.fine.size(); ++j)
          if (att.fine[j] < Scalar(0)) {
            att.fine[j] = Scalar(0);
            ++trace.clip_events;
          }
      }
      f = std::move(att.fine);
      t += dt_eff;
      ++accepted;
      const bool is_last = !(t < t_end);
      record(dt_eff, is_last);
      if (controls.adaptive) {
        const Scalar grow = Scalar(0.9) * std::sqrt(tol / std::max(err, Scalar(1e-300)));
        if (grow >= Scalar(2)) dt = std::min(controls.dt_max, dt * Scalar(2));
      }
    } else {
      ++trace.rejected_steps;
      dt /= Scalar(2);
      if (dt < controls.dt_min) {
        trace.reason = Termination::step_underflow;
        break;
      }
    }
  }

  if (trace.snapshot_times.empty() || trace.snapshot_times.back() != t) {
    trace.snapshot_times.push_back(t);
    trace.snapshots.push_back(f);
  }
  return trace;
}

template <class Scalar = double>
struct SmoothingProbe {
  std::vector<Scalar> t;
  std::vector<Scalar> value;  // t^alpha e^(-omega t) ||G(t)f||^(a) / ||f||
  Scalar sup = Scalar(0);
};

// Analyticity probe: the sup stays finite (and the values flat) as t -> 0
// exactly when the semigroup smooths into the alpha-weighted space.
template <class Scalar>
SmoothingProbe<Scalar> smoothing_probe(const DiscreteOperators<Scalar>& ops,
                                       const Vector<Scalar>& f, Scalar m, Scalar alpha,
                                       Scalar omega, const std::vector<Scalar>& t_list) {
  if (t_list.empty()) throw ConfigError("smoothing probe needs a time list");
  Scalar tmin = t_list.front(), tmax = t_list.front();
  for (Scalar t : t_list) {
    if (!(t > Scalar(0))) throw ConfigError("probe times must be positive");
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (tmin > Scalar(1.0000001e-4) || tmax < Scalar(1e3) * tmin)
    throw ConfigError("probe times must span >= 3 decades down to 1e-4");

  const Vector<Scalar> rate = ops.loss_rate;
  const Scalar base = weighted_norm(ops.grid, f, m);
  if (!(base > Scalar(0))) throw ConfigError("probe data must be nonzero");
  SmoothingProbe<Scalar> probe;
  for (Scalar t : t_list) {
    const Vector<Scalar> g = semigroup_apply(ops, t, f);
    const Scalar v = std::pow(t, alpha) * std::exp(-omega * t) *
                     alpha_norm(ops.grid, g, m, alpha, omega, rate) / base;
    probe.t.push_back(t);
    probe.value.push_back(v);
    probe.sup = std::max(probe.sup, v);
  }
  return probe;
}

}  // namespace fragcoal

#endif
