#ifndef FRAGCOAL_ADMISSIBILITY_HPP
#define FRAGCOAL_ADMISSIBILITY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fragcoal/kernels.hpp"
#include "fragcoal/types.hpp"

namespace fragcoal {

template <class Scalar>
std::vector<Scalar> log_samples(Scalar lo, Scalar hi, int n) {
  std::vector<Scalar> s(n);
  const Scalar llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) s[i] = std::exp(llo + (lhi - llo) * Scalar(i) / Scalar(n - 1));
  s.front() = lo;
  s.back() = hi;
  return s;
}

// --------------------------------------------------------------------------
// Mass conservation of the daughter distribution: n_1(y) = y.

template <class Scalar = double>
struct MassConservationResult {
  bool pass = false;
  Scalar max_residual = Scalar(0);
  std::vector<std::pair<Scalar, std::string>> failures;  // per-sample quadrature failures
};

template <class Scalar>
MassConservationResult<Scalar> check_mass_conservation(const DaughterDistribution<Scalar>& b,
                                                       const std::vector<Scalar>& y_samples,
                                                       Scalar tol = Scalar(1e-6),
                                                       QuadTol quad = {}) {
  if (y_samples.empty()) throw ConfigError("mass-conservation check needs samples");
  MassConservationResult<Scalar> res;
  for (Scalar y : y_samples) {
    if (!(y > Scalar(0))) throw ConfigError("samples must be positive");
    try {
      const Scalar n1 = partial_moment(b, y, Scalar(1), quad);
      res.max_residual = std::max(res.max_residual, std::abs(n1 / y - Scalar(1)));
    } catch (const QuadratureError& e) {
      res.failures.emplace_back(y, e.what());
    }
  }
  res.pass = res.failures.empty() && res.max_residual <= tol;
  return res;
}

// --------------------------------------------------------------------------
// Daughter-count growth: n_0(y) <= b0 (1 + y^l).

template <class Scalar = double>
struct GrowthFit {
  bool pass = false;
  Scalar b0 = Scalar(0);
  Scalar l = Scalar(0);
  std::string detail;
};

// Least-squares b0 against 1 + y^l; `holds` iff the bound covers every sample
// (with a relative slack so exact-equality families pass deterministically).
template <class Scalar>
std::pair<Scalar, bool> fit_b0_for_l(const std::vector<Scalar>& y, const std::vector<Scalar>& n0,
                                     Scalar l) {
  Scalar num = Scalar(0), den = Scalar(0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Scalar w = Scalar(1) + std::pow(y[i], l);
    num += n0[i] * w;
    den += w * w;
  }
  const Scalar b0 = den > Scalar(0) ? num / den : Scalar(0);
  bool holds = true;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Scalar bound = b0 * (Scalar(1) + std::pow(y[i], l));
    if (n0[i] > bound * (Scalar(1) + Scalar(1e-9)) + Scalar(1e-12)) { holds = false; break; }
  }
  return {b0, holds};
}

template <class Scalar>
GrowthFit<Scalar> estimate_n0_growth(const DaughterDistribution<Scalar>& b,
                                     const std::vector<Scalar>& y_samples, QuadTol quad = {},
                                     Scalar l_max = Scalar(4)) {
  if (y_samples.size() < 3) throw ConfigError("growth fit needs at least 3 samples");
  Scalar lo = y_samples.front(), hi = y_samples.front();
  for (Scalar y : y_samples) { lo = std::min(lo, y); hi = std::max(hi, y); }
  if (!(hi >= Scalar(1e3) * lo))
    throw ConfigError("growth-fit samples must span at least 3 decades");

  GrowthFit<Scalar> fit;
  std::vector<Scalar> n0;
  n0.reserve(y_samples.size());
  for (Scalar y : y_samples) {
    try {
      n0.push_back(partial_moment(b, y, Scalar(0), quad));
    } catch (const QuadratureError& e) {
      fit.detail = "daughter count n_0 diverges or quadrature failed at y=" +
                   std::to_string(static_cast<double>(y)) + ": " + e.what();
      return fit;
    }
  }
  for (Scalar l = Scalar(0); l <= l_max + Scalar(1e-12); l += Scalar(0.25)) {
    const auto [b0, holds] = fit_b0_for_l(y_samples, n0, l);
    if (holds) {
      fit.pass = true;
      fit.b0 = b0;
      fit.l = l;
      return fit;
    }
  }
  fit.detail = "no exponent on the candidate grid bounds n_0";
  return fit;
}

// --------------------------------------------------------------------------
// Moment-gap (dissipativity) floor: inf_{y >= 1} N_m0(y)/y^m0 > 0.

template <class Scalar = double>
struct MomentGapResult {
  bool pass = false;
  Scalar m0 = Scalar(0);
  Scalar delta = Scalar(0);  // finite-range certificate for the liminf
  Scalar floor = Scalar(0);
  std::map<Scalar, Scalar> implied;  // concavity bound delta_m >= delta*(m-1)/(m0-1)
  std::string detail;
};

template <class Scalar>
MomentGapResult<Scalar> check_moment_gap(const DaughterDistribution<Scalar>& b, Scalar m0,
                                         const std::vector<Scalar>& y_probe,
                                         Scalar floor = Scalar(1e-3), QuadTol quad = {}) {
  if (!(m0 > Scalar(1))) throw ConfigError("moment-gap order must exceed 1 (N_1 vanishes)");
  if (y_probe.empty()) throw ConfigError("moment-gap probe must be nonempty");
  Scalar ymax = y_probe.front();
  for (std::size_t i = 1; i < y_probe.size(); ++i) {
    if (!(y_probe[i] > y_probe[i - 1])) throw ConfigError("probe must increase strictly");
    ymax = std::max(ymax, y_probe[i]);
  }
  if (!(ymax >= Scalar(1e3))) throw ConfigError("probe must reach y >= 1e3");

  MomentGapResult<Scalar> res;
  res.m0 = m0;
  res.floor = floor;
  Scalar inf = std::numeric_limits<Scalar>::infinity();
  try {
    for (Scalar y : y_probe) {
      if (y < Scalar(1)) continue;
      const Scalar ratio = Scalar(1) - partial_moment(b, y, m0, quad) / std::pow(y, m0);
      inf = std::min(inf, ratio);
    }
  } catch (const QuadratureError& e) {
    res.detail = e.what();
    return res;
  }
  res.delta = inf;
  res.pass = inf >= floor;
  for (int k = 1; k <= 8; ++k) {
    const Scalar m = Scalar(1) + (m0 - Scalar(1)) * Scalar(k) / Scalar(8);
    res.implied[m] = res.delta * (m - Scalar(1)) / (m0 - Scalar(1));
  }
  return res;
}

// --------------------------------------------------------------------------
// Miyadera perturbation constants.

template <class Scalar = double>
struct MiyaderaResult {
  bool pass = false;
  Scalar cprime = Scalar(0);
  Scalar r = Scalar(0);
  Scalar zeta = Scalar(0);
  Scalar gamma = Scalar(0);
  long tail_violations = -1;  // dense checks of the two tail inequalities
  long shift_violations = -1; // dense check of the resolvent-weighted sup
  std::string detail;
};

template <class Scalar = double>
struct MiyaderaOptions {
  Scalar probe_max = Scalar(1e6);
  int dense_samples = 10000;
};

// Finds c' < 1 and r with n_m(x)/x^m <= c' and b0(1+x^l)/(1+x^m) <= (1-c')/4
// for x >= r, then zeta with sup_{[0,r]} a b0 (1+x^l)/(a+zeta) <= (1-c')/4,
// and reports gamma = (c'+1)/2. All sups are finite-range certificates over
// dense samples.
template <class Scalar>
MiyaderaResult<Scalar> miyadera_constants(const FragmentationRate<Scalar>& a,
                                          const DaughterDistribution<Scalar>& b, Scalar m,
                                          Scalar b0, Scalar l, MiyaderaOptions<Scalar> opts = {},
                                          QuadTol quad = {}) {
  if (!(m > std::max(Scalar(1), l))) throw ConfigError("require m > max(1, l)");
  MiyaderaResult<Scalar> res;

  const auto ratio_nm = [&](Scalar x) { return partial_moment(b, x, m, quad) / std::pow(x, m); };
  const auto growth = [&](Scalar x) {
    return b0 * (Scalar(1) + std::pow(x, l)) / (Scalar(1) + std::pow(x, m));
  };

  const auto grid = log_samples(Scalar(1), opts.probe_max, opts.dense_samples);
  Scalar cprime = Scalar(0);
  try {
    for (Scalar x : grid) cprime = std::max(cprime, ratio_nm(x));
  } catch (const QuadratureError& e) {
    res.detail = e.what();
    return res;
  }
  if (!(cprime < Scalar(1))) {
    res.detail = "no c' < 1: sup n_m/x^m = " + std::to_string(static_cast<double>(cprime));
    return res;
  }
  res.cprime = cprime;
  const Scalar thr = (Scalar(1) - cprime) / Scalar(4);

  // smallest r beyond which the growth ratio stays at or below the threshold
  std::size_t last_bad = grid.size();  // sentinel: none
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (growth(grid[i]) > thr) last_bad = i;
  if (last_bad == grid.size() - 1) {
    res.detail = "growth ratio exceeds (1-c')/4 at the probe boundary";
    return res;
  }
  Scalar r;
  if (last_bad == grid.size()) {
    r = Scalar(1);  // holds on the whole probe; certify from 1
  } else {
    Scalar lo = grid[last_bad], hi = grid[last_bad + 1];
    for (int it = 0; it < 200; ++it) {
      const Scalar mid = (lo + hi) / Scalar(2);
      if (growth(mid) > thr) lo = mid; else hi = mid;
    }
    r = hi * (Scalar(1) + Scalar(1e-12));
  }
  res.r = r;

  // zeta via doubling + bisection on the dense sup over [0, r]
  std::vector<Scalar> xs(static_cast<std::size_t>(opts.dense_samples));
  for (std::size_t i = 0; i < xs.size(); ++i)
    xs[i] = r * Scalar(i) / Scalar(xs.size() - 1);
  const auto shifted_sup = [&](Scalar zeta) {
    Scalar s = Scalar(0);
    for (Scalar x : xs) {
      const Scalar ax = x > Scalar(0) ? eval_a(a, x) : eval_a(a, Scalar(1e-300));
      s = std::max(s, ax * b0 * (Scalar(1) + std::pow(x, l)) / (ax + zeta));
    }
    return s;
  };
  Scalar zeta = Scalar(1);
  if (shifted_sup(zeta) > thr) {
    Scalar hi_z = zeta;
    int guard = 0;
    while (shifted_sup(hi_z) > thr) {
      hi_z *= Scalar(2);
      if (++guard > 70) {
        res.detail = "no shift zeta satisfies the resolvent-weighted bound";
        return res;
      }
    }
    Scalar lo_z = hi_z / Scalar(2);
    for (int it = 0; it < 200; ++it) {
      const Scalar mid = (lo_z + hi_z) / Scalar(2);
      if (shifted_sup(mid) > thr) lo_z = mid; else hi_z = mid;
    }
    zeta = hi_z * (Scalar(1) + Scalar(1e-12));
  }
  res.zeta = zeta;

  // dense verification, required clean
  long bad_tail = 0;
  for (Scalar x : grid) {
    if (x < r) continue;
    if (ratio_nm(x) > cprime * (Scalar(1) + Scalar(1e-13))) ++bad_tail;
    if (growth(x) > thr) ++bad_tail;
  }
  long bad_shift = shifted_sup(zeta) > thr ? 1 : 0;
  res.tail_violations = bad_tail;
  res.shift_violations = bad_shift;
  res.gamma = (cprime + Scalar(1)) / Scalar(2);
  res.pass = bad_tail == 0 && bad_shift == 0 && res.gamma < Scalar(1);
  return res;
}

// --------------------------------------------------------------------------
// Coagulation domination fit.

enum class DominationMode { product, sum };

template <class Scalar = double>
struct DominationResult {
  bool pass = false;
  Scalar K = Scalar(0);
  Scalar alpha = Scalar(0);
  Scalar worst_x = Scalar(0), worst_y = Scalar(0);
  std::string detail;
};

template <class Scalar>
std::vector<std::pair<Scalar, Scalar>> domination_probe_pairs(Scalar R_probe = Scalar(1e4),
                                                              int n_axis = 48) {
  auto xs = log_samples(Scalar(1e-3) * R_probe / Scalar(1e4), R_probe, n_axis);
  xs.insert(xs.begin(), Scalar(0));
  std::vector<std::pair<Scalar, Scalar>> pairs;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i; j < xs.size(); ++j) pairs.emplace_back(xs[i], xs[j]);
  return pairs;
}

// Smallest alpha on the 0.05 grid whose max sample ratio is not attained
// strictly in the outer band (growth toward the probe boundary means the
// candidate bound cannot certify the tail); K is the max ratio, so the bound
// holds at every sample.
template <class Scalar, class KFn>
DominationResult<Scalar> check_coag_domination(KFn&& k, const FragmentationRate<Scalar>& a,
                                               DominationMode mode,
                                               const std::vector<std::pair<Scalar, Scalar>>& pairs) {
  if (pairs.empty()) throw ConfigError("domination check needs sample pairs");
  Scalar xmax = Scalar(0);
  for (const auto& [x, y] : pairs) xmax = std::max({xmax, x, y});
  const Scalar outer = xmax / Scalar(10);

  DominationResult<Scalar> res;
  const auto weight = [&](Scalar x) {
    return Scalar(1) + (x > Scalar(0) ? eval_a(a, x) : eval_a(a, Scalar(1e-300)));
  };
  Scalar last_worst_x = Scalar(0), last_worst_y = Scalar(0);
  for (int step = 1; step <= 19; ++step) {
    const Scalar alpha = Scalar(0.05) * Scalar(step);
    Scalar max_all = Scalar(0), max_inner = Scalar(0);
    Scalar wx = Scalar(0), wy = Scalar(0);
    for (const auto& [x, y] : pairs) {
      const Scalar denom = mode == DominationMode::product
                               ? std::pow(weight(x) * weight(y), alpha)
                               : std::pow(weight(x), alpha) + std::pow(weight(y), alpha);
      const Scalar ratio = k(x, y) / denom;
      if (ratio > max_all) { max_all = ratio; wx = x; wy = y; }
      if (std::max(x, y) < outer) max_inner = std::max(max_inner, ratio);
    }
    last_worst_x = wx;
    last_worst_y = wy;
    if (max_all <= max_inner * (Scalar(1) + Scalar(1e-9))) {
      res.pass = true;
      res.K = max_all;
      res.alpha = alpha;
      res.worst_x = wx;
      res.worst_y = wy;
      return res;
    }
  }
  res.worst_x = last_worst_x;
  res.worst_y = last_worst_y;
  res.detail = "ratio keeps growing toward the probe boundary; worst pair (" +
               std::to_string(static_cast<double>(last_worst_x)) + ", " +
               std::to_string(static_cast<double>(last_worst_y)) + ")";
  return res;
}

// --------------------------------------------------------------------------
// Full audit of a problem description.

template <class Scalar = double>
struct AdmissibilityReport {
  Scalar m = Scalar(0), alpha = Scalar(0);
  MassConservationResult<Scalar> mass;
  GrowthFit<Scalar> growth;
  Scalar b0_used = Scalar(0), l_used = Scalar(0);
  bool constants_declared = false;
  MomentGapResult<Scalar> gap;
  std::map<Scalar, Scalar> delta_map;  // direct finite-range certificates per order
  MiyaderaResult<Scalar> miyadera;
  DominationResult<Scalar> dom_product, dom_sum;
  bool heuristic_tables = false;

  bool all_pass() const {
    return mass.pass && growth_ok() && gap.pass && miyadera.pass && dom_product.pass;
  }
  bool growth_ok() const { return constants_declared || growth.pass; }
};

template <class Scalar = double>
struct AuditOptions {
  Scalar delta_floor = Scalar(1e-3);
  Scalar probe_max = Scalar(1e6);
  Scalar domination_probe_max = Scalar(1e4);
  QuadTol quad{};
};

template <class Scalar>
AdmissibilityReport<Scalar> run_admissibility(const ProblemSpec<Scalar>& spec,
                                              AuditOptions<Scalar> opts = {}) {
  spec.validate();
  AdmissibilityReport<Scalar> rep;
  rep.m = spec.m;
  rep.alpha = spec.alpha;
  rep.heuristic_tables =
      spec.frag.is_table() || spec.daughter.is_table() || spec.coag.is_table();

  rep.mass = check_mass_conservation(spec.daughter, log_samples(Scalar(0.1), Scalar(1e4), 25),
                                     Scalar(1e-6), opts.quad);
  rep.growth = estimate_n0_growth(spec.daughter, log_samples(Scalar(0.1), Scalar(1e6), 57),
                                  opts.quad);
  rep.constants_declared = spec.declared_b0.has_value() && spec.declared_l.has_value();
  rep.b0_used = rep.constants_declared ? *spec.declared_b0 : rep.growth.b0;
  rep.l_used = rep.constants_declared ? *spec.declared_l : rep.growth.l;

  const auto probe = log_samples(Scalar(1), opts.probe_max, 257);
  rep.gap = check_moment_gap(spec.daughter, spec.m, probe, opts.delta_floor, opts.quad);
  for (Scalar order : {Scalar(1.5), Scalar(2), Scalar(3), Scalar(4), Scalar(6), spec.m}) {
    if (rep.delta_map.count(order)) continue;
    try {
      rep.delta_map[order] =
          check_moment_gap(spec.daughter, order, probe, opts.delta_floor, opts.quad).delta;
    } catch (const Error&) {
      // order not evaluable for this family; leave it out
    }
  }

  if ((rep.growth_ok()) && rep.gap.pass) {
    MiyaderaOptions<Scalar> mo;
    mo.probe_max = opts.probe_max;
    rep.miyadera = miyadera_constants(spec.frag, spec.daughter, spec.m, rep.b0_used, rep.l_used,
                                      mo, opts.quad);
  } else {
    rep.miyadera.detail = "prerequisite hypothesis failed";
  }

  const auto pairs = domination_probe_pairs(opts.domination_probe_max);
  const auto keval = [&](Scalar x, Scalar y) {
    const Scalar xs = x > Scalar(0) ? x : Scalar(1e-300);
    const Scalar ys = y > Scalar(0) ? y : Scalar(1e-300);
    return eval_k(spec.coag, xs, ys);
  };
  rep.dom_product = check_coag_domination(keval, spec.frag, DominationMode::product, pairs);
  rep.dom_sum = check_coag_domination(keval, spec.frag, DominationMode::sum, pairs);
  return rep;
}

}  // namespace fragcoal

#endif
