#ifndef FRAGCOAL_KERNELS_HPP
#define FRAGCOAL_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fragcoal/quadrature.hpp"
#include "fragcoal/types.hpp"

namespace fragcoal {

// Sampled 1-D function, linear in value over log(x). Clamped outside the
// node range.
template <class Scalar>
struct LogTable1D {
  std::vector<Scalar> x;
  std::vector<Scalar> value;

  bool empty() const { return x.empty(); }

  Scalar operator()(Scalar xq) const {
    if (x.empty()) throw KernelError("empty table");
    if (xq <= x.front()) return value.front();
    if (xq >= x.back()) return value.back();
    const auto it = std::upper_bound(x.begin(), x.end(), xq);
    const std::size_t hi = static_cast<std::size_t>(it - x.begin());
    const std::size_t lo = hi - 1;
    const Scalar t = (std::log(xq) - std::log(x[lo])) / (std::log(x[hi]) - std::log(x[lo]));
    return value[lo] + t * (value[hi] - value[lo]);
  }
};

// Sampled 2-D function, bilinear in value over (log x, log y).
template <class Scalar>
struct LogTable2D {
  std::vector<Scalar> x;
  std::vector<Scalar> y;
  std::vector<Scalar> value;  // row-major, value[i*y.size()+j] = f(x[i], y[j])

  bool empty() const { return x.empty() || y.empty(); }

  Scalar at(std::size_t i, std::size_t j) const { return value[i * y.size() + j]; }

  Scalar operator()(Scalar xq, Scalar yq) const {
    if (empty()) throw KernelError("empty table");
    const auto frac = [](const std::vector<Scalar>& g, Scalar q, std::size_t& lo) {
      if (q <= g.front()) { lo = 0; return Scalar(0); }
      if (q >= g.back()) { lo = g.size() - 2; return Scalar(1); }
      const auto it = std::upper_bound(g.begin(), g.end(), q);
      lo = static_cast<std::size_t>(it - g.begin()) - 1;
      return (std::log(q) - std::log(g[lo])) / (std::log(g[lo + 1]) - std::log(g[lo]));
    };
    std::size_t i, j;
    const Scalar tx = x.size() == 1 ? Scalar(0) : frac(x, xq, i);
    const Scalar ty = y.size() == 1 ? Scalar(0) : frac(y, yq, j);
    if (x.size() == 1) i = 0;
    if (y.size() == 1) j = 0;
    const std::size_t i1 = std::min(i + 1, x.size() - 1);
    const std::size_t j1 = std::min(j + 1, y.size() - 1);
    const Scalar v0 = at(i, j) + tx * (at(i1, j) - at(i, j));
    const Scalar v1 = at(i, j1) + tx * (at(i1, j1) - at(i, j1));
    return v0 + ty * (v1 - v0);
  }
};

// ---------------------------------------------------------------------------
// Overall fragmentation rate a(x).

enum class FragFamily { power, table, composite };

template <class Scalar = double>
struct FragmentationRate {
  FragFamily family = FragFamily::power;
  Scalar a0 = Scalar(1);
  Scalar gamma = Scalar(1);
  std::vector<std::pair<Scalar, Scalar>> terms;  // composite: sum of scale * x^exponent
  LogTable1D<Scalar> table;

  static FragmentationRate power(Scalar scale, Scalar exponent) {
    FragmentationRate a;
    a.family = FragFamily::power;
    a.a0 = scale;
    a.gamma = exponent;
    if (!(scale >= 0)) throw ConfigError("fragmentation rate scale must be >= 0");
    return a;
  }
  static FragmentationRate zero() { return power(Scalar(0), Scalar(0)); }
  static FragmentationRate composite(std::vector<std::pair<Scalar, Scalar>> t) {
    FragmentationRate a;
    a.family = FragFamily::composite;
    a.terms = std::move(t);
    for (const auto& [c, g] : a.terms) {
      (void)g;
      if (!(c >= 0)) throw ConfigError("composite rate scales must be >= 0");
    }
    return a;
  }
  static FragmentationRate from_table(LogTable1D<Scalar> t) {
    FragmentationRate a;
    a.family = FragFamily::table;
    a.table = std::move(t);
    return a;
  }

  bool is_table() const { return family == FragFamily::table; }
};

template <class Scalar>
Scalar eval_a(const FragmentationRate<Scalar>& a, Scalar x) {
  Scalar v;
  switch (a.family) {
    case FragFamily::power:
      v = a.a0 == Scalar(0) ? Scalar(0) : a.a0 * std::pow(x, a.gamma);
      break;
    case FragFamily::composite: {
      v = Scalar(0);
      for (const auto& [c, g] : a.terms) v += c * std::pow(x, g);
      break;
    }
    case FragFamily::table:
      v = a.table(x);
      break;
    default:
      throw KernelError("unknown fragmentation family");
  }
  if (!std::isfinite(static_cast<double>(v)) || v < Scalar(0))
    throw KernelError("fragmentation rate evaluated to a non-finite or negative value at x=" +
                      std::to_string(static_cast<double>(x)));
  return v;
}

// Sampled sup of a over [lo, hi] (family endpoints included). For the
// built-in monotone families the endpoint values make this exact.
template <class Scalar>
Scalar sup_rate(const FragmentationRate<Scalar>& a, Scalar lo, Scalar hi, int n = 10001) {
  Scalar s = std::max(eval_a(a, std::max(lo, Scalar(1e-300))), eval_a(a, hi));
  for (int i = 1; i < n - 1; ++i) {
    const Scalar x = lo + (hi - lo) * Scalar(i) / Scalar(n - 1);
    if (x <= Scalar(0)) continue;
    s = std::max(s, eval_a(a, x));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Daughter distribution b(x, y).

enum class DaughterFamily { powerlaw, table };

template <class Scalar = double>
struct DaughterDistribution {
  DaughterFamily family = DaughterFamily::powerlaw;
  Scalar nu = Scalar(0);     // b = scale*(nu+2) x^nu / y^(nu+1), nu in (-2, 0]
  Scalar scale = Scalar(1);  // audit knob: scale != 1 intentionally breaks mass conservation
  LogTable2D<Scalar> table;

  static DaughterDistribution powerlaw(Scalar nu, Scalar scale = Scalar(1)) {
    if (!(nu > Scalar(-2) && nu <= Scalar(0)))
      throw ConfigError("daughter power-law exponent must lie in (-2, 0]");
    DaughterDistribution b;
    b.family = DaughterFamily::powerlaw;
    b.nu = nu;
    b.scale = scale;
    return b;
  }
  static DaughterDistribution from_table(LogTable2D<Scalar> t) {
    DaughterDistribution b;
    b.family = DaughterFamily::table;
    b.table = std::move(t);
    return b;
  }

  bool is_table() const { return family == DaughterFamily::table; }
  bool has_closed_moments() const { return family == DaughterFamily::powerlaw; }
};

template <class Scalar>
Scalar eval_b(const DaughterDistribution<Scalar>& b, Scalar x, Scalar y) {
  if (!(y > Scalar(0))) throw ConfigError("eval_b requires y > 0");
  if (x > y || x <= Scalar(0)) return Scalar(0);
  Scalar v;
  switch (b.family) {
    case DaughterFamily::powerlaw:
      v = b.scale * (b.nu + Scalar(2)) * std::pow(x, b.nu) / std::pow(y, b.nu + Scalar(1));
      break;
    case DaughterFamily::table:
      v = b.table(x, y);
      break;
    default:
      throw KernelError("unknown daughter family");
  }
  if (!std::isfinite(static_cast<double>(v)) || v < Scalar(0))
    throw KernelError("daughter distribution evaluated to a non-finite or negative value");
  return v;
}

// n_m(y) = int_0^y b(x,y) x^m dx, closed form for the power-law family,
// adaptive quadrature otherwise.
template <class Scalar>
QuadResult<Scalar> partial_moment_detailed(const DaughterDistribution<Scalar>& b, Scalar y,
                                           Scalar m, QuadTol tol = {}) {
  if (!(y > Scalar(0))) throw ConfigError("partial_moment requires y > 0");
  if (!(m >= Scalar(0))) throw ConfigError("partial_moment requires m >= 0");
  if (b.family == DaughterFamily::powerlaw) {
    const Scalar p = m + b.nu + Scalar(1);
    if (p <= Scalar(0)) {
      // integral of x^(m+nu) diverges at the lower limit
      return {std::numeric_limits<Scalar>::infinity(), std::numeric_limits<Scalar>::infinity(),
              false};
    }
    return {b.scale * (b.nu + Scalar(2)) / p * std::pow(y, m), Scalar(0), true};
  }
  return integrate([&](Scalar x) { return eval_b(b, x, y) * std::pow(x, m); }, Scalar(0), y, tol);
}

template <class Scalar>
Scalar partial_moment(const DaughterDistribution<Scalar>& b, Scalar y, Scalar m,
                      QuadTol tol = {}) {
  const auto q = partial_moment_detailed(b, y, m, tol);
  if (!q.converged)
    throw QuadratureError("partial moment n_m(y) did not converge (m=" +
                              std::to_string(static_cast<double>(m)) +
                              ", y=" + std::to_string(static_cast<double>(y)) +
                              "), achieved error " + std::to_string(static_cast<double>(q.error)),
                          static_cast<double>(q.error));
  return q.value;
}

// N_m(y) = y^m - n_m(y)
template <class Scalar>
Scalar moment_deficit(const DaughterDistribution<Scalar>& b, Scalar y, Scalar m,
                      QuadTol tol = {}) {
  return std::pow(y, m) - partial_moment(b, y, m, tol);
}

// int_lo^hi b(x, y) dx — expected daughter count in [lo, hi]; used by the
// operator assembly. Closed form for the power-law family.
template <class Scalar>
Scalar daughter_count_integral(const DaughterDistribution<Scalar>& b, Scalar lo, Scalar hi,
                               Scalar y, QuadTol tol = {}) {
  lo = std::max(lo, Scalar(0));
  hi = std::min(hi, y);
  if (!(hi > lo)) return Scalar(0);
  if (b.family == DaughterFamily::powerlaw) {
    const Scalar c = b.scale * (b.nu + Scalar(2)) / std::pow(y, b.nu + Scalar(1));
    if (b.nu == Scalar(-1)) {
      if (lo <= Scalar(0))
        throw AssemblyError("daughter count diverges at zero for nu = -1");
      return c * std::log(hi / lo);
    }
    const Scalar p = b.nu + Scalar(1);
    if (lo <= Scalar(0) && p <= Scalar(0))
      throw AssemblyError("daughter count diverges at zero");
    const Scalar lop = lo <= Scalar(0) ? Scalar(0) : std::pow(lo, p);
    return c * (std::pow(hi, p) - lop) / p;
  }
  return integrate_or_throw([&](Scalar x) { return eval_b(b, x, y); }, lo, hi, tol,
                            "daughter count integral");
}

// ---------------------------------------------------------------------------
// Coagulation kernel k(x, y).

enum class CoagFamily { constant, sum, product, dominated, table };

template <class Scalar = double>
struct CoagulationKernel {
  CoagFamily family = CoagFamily::constant;
  Scalar K = Scalar(1);
  Scalar alpha = Scalar(0.5);             // dominated family exponent, in (0, 1)
  FragmentationRate<Scalar> rate;         // dominated family references a
  LogTable2D<Scalar> table;

  static CoagulationKernel constant(Scalar K) {
    CoagulationKernel k;
    k.family = CoagFamily::constant;
    k.K = K;
    if (!(K >= 0)) throw ConfigError("coagulation scale must be >= 0");
    return k;
  }
  static CoagulationKernel sum(Scalar K) {
    CoagulationKernel k = constant(K);
    k.family = CoagFamily::sum;
    return k;
  }
  static CoagulationKernel product(Scalar K) {
    CoagulationKernel k = constant(K);
    k.family = CoagFamily::product;
    return k;
  }
  static CoagulationKernel dominated(Scalar K, Scalar alpha, FragmentationRate<Scalar> a) {
    CoagulationKernel k = constant(K);
    k.family = CoagFamily::dominated;
    if (!(alpha > Scalar(0) && alpha < Scalar(1)))
      throw ConfigError("dominated kernel exponent must lie in (0, 1)");
    k.alpha = alpha;
    k.rate = std::move(a);
    return k;
  }
  static CoagulationKernel from_table(LogTable2D<Scalar> t) {
    CoagulationKernel k;
    k.family = CoagFamily::table;
    k.table = std::move(t);
    return k;
  }

  bool is_table() const { return family == CoagFamily::table; }
  bool is_zero() const {
    return family != CoagFamily::table && K == Scalar(0);
  }
};

template <class Scalar>
Scalar eval_k(const CoagulationKernel<Scalar>& k, Scalar x, Scalar y) {
  Scalar v;
  switch (k.family) {
    case CoagFamily::constant:
      v = k.K;
      break;
    case CoagFamily::sum:
      v = k.K * (x + y);
      break;
    case CoagFamily::product:
      v = k.K * x * y;
      break;
    case CoagFamily::dominated:
      v = k.K * std::pow((Scalar(1) + eval_a(k.rate, x)) * (Scalar(1) + eval_a(k.rate, y)),
                         k.alpha);
      break;
    case CoagFamily::table:
      // symmetrized lookup so interpolation round-off cannot break symmetry
      v = (k.table(x, y) + k.table(y, x)) / Scalar(2);
      break;
    default:
      throw KernelError("unknown coagulation family");
  }
  if (!std::isfinite(static_cast<double>(v)) || v < Scalar(0))
    throw KernelError("coagulation kernel evaluated to a non-finite or negative value");
  return v;
}

// ---------------------------------------------------------------------------
// Initial data and the full problem description.

enum class InitialFamily { exponential, monodisperse, table };

template <class Scalar = double>
struct InitialCondition {
  InitialFamily family = InitialFamily::exponential;
  Scalar amplitude = Scalar(1);
  Scalar decay = Scalar(1);    // exponential: amplitude * exp(-decay * x)
  Scalar x0 = Scalar(1);       // monodisperse: `amplitude` particles at mass x0
  LogTable1D<Scalar> table;

  Scalar operator()(Scalar x) const {
    switch (family) {
      case InitialFamily::exponential:
        return amplitude * std::exp(-decay * x);
      case InitialFamily::table:
        return table(x);
      case InitialFamily::monodisperse:
        throw ConfigError("monodisperse data has no pointwise density; project it onto a grid");
    }
    throw ConfigError("unknown initial-condition family");
  }
};

template <class Scalar = double>
struct ProblemSpec {
  FragmentationRate<Scalar> frag;
  DaughterDistribution<Scalar> daughter;
  CoagulationKernel<Scalar> coag;
  InitialCondition<Scalar> initial;

  Scalar m = Scalar(2);        // weight order, must exceed max(1, l)
  Scalar alpha = Scalar(0.5);  // interpolation exponent
  std::optional<Scalar> omega; // nullopt: derive from the assembled operator
  std::optional<Scalar> declared_b0;
  std::optional<Scalar> declared_l;

  void validate() const {
    if (!(m > Scalar(1))) throw ConfigError("weight order m must exceed 1");
    if (declared_l && !(m > *declared_l))
      throw ConfigError("weight order m must exceed the daughter-count growth exponent l");
    if (!(alpha > Scalar(0) && alpha < Scalar(1)))
      throw ConfigError("interpolation exponent alpha must lie in (0, 1)");
    if (omega && !(*omega > Scalar(1))) throw ConfigError("shift omega must exceed 1");
  }
};

}  // namespace fragcoal

#endif
