#ifndef FRAGCOAL_OPERATORS_HPP
#define FRAGCOAL_OPERATORS_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "fragcoal/grid.hpp"
#include "fragcoal/kernels.hpp"
#include "fragcoal/types.hpp"

namespace fragcoal {

// Matrix/tensor realization of the truncated fragmentation operator and the
// conservative coagulation bilinear form on a fixed grid.
//
// Fragmentation: (Lf)_i = -a_i f_i + sum_j frag_gain[i][j] f_j w_j, with each
// column of frag_gain rescaled so sum_i x_i w_i frag_gain[i][j] = x_j a_j
// exactly (the discrete no-mass-loss identity).
//
// Coagulation: pair events (i, j) admitted only while x_i + x_j stays at or
// below the largest cell center; the product mass is split between the two
// bracketing centers preserving particle number and mass exactly.
template <class Scalar = double>
struct DiscreteOperators {
  MassGrid<Scalar> grid;

  Vector<Scalar> loss_rate;       // a(x_j)
  Matrix<Scalar> frag_gain;       // zero for x_i > x_j
  Vector<Scalar> column_rescale;  // conservation correction factors
  Matrix<Scalar> generator;       // L = -diag(a) + frag_gain * diag(w)

  struct PairEvent {
    std::int32_t i, j;   // colliding cells, i <= j
    std::int32_t lo;     // product lands in cells lo / lo+1
    Scalar w_lo;         // number fraction into lo (1 when exact hit)
    Scalar rate;         // k(x_i, x_j), halved for self-pairs
  };
  std::vector<PairEvent> pairs;
  Matrix<Scalar> coag_rate;       // k masked to admissible pairs (loss term)
  Scalar pair_cutoff = Scalar(0); // largest representable product mass
  bool has_coag = false;

  Index cells() const { return grid.cells(); }
};

template <class Scalar>
void assemble_fragmentation(const FragmentationRate<Scalar>& a,
                            const DaughterDistribution<Scalar>& b, DiscreteOperators<Scalar>& ops,
                            QuadTol tol = {}) {
  const MassGrid<Scalar>& grid = ops.grid;
  const Index n = grid.cells();
  ops.loss_rate.resize(n);
  for (Index j = 0; j < n; ++j) ops.loss_rate[j] = eval_a(a, grid.centers()[j]);

  ops.frag_gain = Matrix<Scalar>::Zero(n, n);
  ops.column_rescale = Vector<Scalar>::Ones(n);
  for (Index j = 0; j < n; ++j) {
    const Scalar aj = ops.loss_rate[j];
    if (aj == Scalar(0)) continue;
    const Scalar parent = grid.centers()[j];
    Scalar column_mass = Scalar(0);
    for (Index i = 0; i <= j; ++i) {
      const Scalar hi = std::min(grid.edges()[i + 1], parent);
      const Scalar count = daughter_count_integral(b, grid.edges()[i], hi, parent, tol);
      if (count < Scalar(0)) throw AssemblyError("negative gain entry");
      ops.frag_gain(i, j) = aj * count / grid.widths()[i];
      column_mass += grid.mass_weights()[i] * ops.frag_gain(i, j);
    }
    if (!(column_mass > Scalar(0)))
      throw AssemblyError("fragmenting parent cell produces no daughter mass");
    const Scalar factor = parent * aj / column_mass;
    ops.column_rescale[j] = factor;
    ops.frag_gain.col(j) *= factor;
  }

  ops.generator = ops.frag_gain * grid.widths().asDiagonal();
  ops.generator.diagonal() -= ops.loss_rate;
}

template <class Scalar>
void assemble_coagulation(const CoagulationKernel<Scalar>& k, DiscreteOperators<Scalar>& ops) {
  const MassGrid<Scalar>& grid = ops.grid;
  const Index n = grid.cells();
  const auto& x = grid.centers();
  ops.pair_cutoff = x[n - 1];
  ops.pairs.clear();
  ops.coag_rate = Matrix<Scalar>::Zero(n, n);
  ops.has_coag = !k.is_zero();
  if (!ops.has_coag) return;

  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const Scalar z = x[i] + x[j];
      if (z > ops.pair_cutoff) break;  // centers increase with j
      const Scalar rate = eval_k(k, x[i], x[j]);
      ops.coag_rate(i, j) = rate;
      ops.coag_rate(j, i) = rate;
      if (rate == Scalar(0)) continue;
      // bracketing centers x_lo <= z <= x_lo+1
      Index lo = i;
      {
        Index a_ = j, b_ = n - 1;  // z >= x_j, z <= x_{n-1}
        while (a_ < b_) {
          const Index mid = (a_ + b_ + 1) / 2;
          if (x[mid] <= z) a_ = mid; else b_ = mid - 1;
        }
        lo = a_;
      }
      Scalar w_lo = Scalar(1);
      if (lo < n - 1 && x[lo] < z)
        w_lo = (x[lo + 1] - z) / (x[lo + 1] - x[lo]);
      typename DiscreteOperators<Scalar>::PairEvent ev;
      ev.i = static_cast<std::int32_t>(i);
      ev.j = static_cast<std::int32_t>(j);
      ev.lo = static_cast<std::int32_t>(lo);
      ev.w_lo = w_lo;
      ev.rate = (i == j) ? rate / Scalar(2) : rate;
      ops.pairs.push_back(ev);
    }
  }
}

template <class Scalar>
DiscreteOperators<Scalar> assemble_operators(const FragmentationRate<Scalar>& a,
                                             const DaughterDistribution<Scalar>& b,
                                             const CoagulationKernel<Scalar>& k,
                                             MassGrid<Scalar> grid, QuadTol tol = {}) {
  DiscreteOperators<Scalar> ops;
  ops.grid = std::move(grid);
  assemble_fragmentation(a, b, ops, tol);
  assemble_coagulation(k, ops);
  return ops;
}

template <class Scalar>
Vector<Scalar> apply_fragmentation(const DiscreteOperators<Scalar>& ops,
                                   const Vector<Scalar>& f) {
  return ops.generator * f;
}

// Time-derivative contribution of coagulation, conservative fixed-pivot form.
template <class Scalar>
Vector<Scalar> apply_coagulation(const DiscreteOperators<Scalar>& ops, const Vector<Scalar>& f) {
  const Index n = ops.cells();
  if (!ops.has_coag) return Vector<Scalar>::Zero(n);
  const Vector<Scalar> F = f.cwiseProduct(ops.grid.widths());  // particle numbers per cell
  Vector<Scalar> dF = -F.cwiseProduct(ops.coag_rate * F);      // loss
  for (const auto& ev : ops.pairs) {
    const Scalar r = ev.rate * F[ev.i] * F[ev.j];
    dF[ev.lo] += ev.w_lo * r;
    if (ev.w_lo < Scalar(1)) dF[ev.lo + 1] += (Scalar(1) - ev.w_lo) * r;
  }
  return dF.cwiseQuotient(ops.grid.widths());
}

// Symmetric bilinear form with C(f) = C~(f, f).
template <class Scalar>
Vector<Scalar> coag_bilinear(const DiscreteOperators<Scalar>& ops, const Vector<Scalar>& f,
                             const Vector<Scalar>& g) {
  return (apply_coagulation(ops, Vector<Scalar>(f + g)) - apply_coagulation(ops, f) -
          apply_coagulation(ops, g)) /
         Scalar(2);
}

// (1/2) sum_{i,j} chi_theta(x_i, x_j) k(x_i, x_j) f_i f_j w_i w_j, with
// theta(x_i + x_j) evaluated through the fixed-pivot image of the product
// mass, so the value matches sum_i theta(x_i) w_i [Cf]_i to round-off for
// every theta. For theta in {1, x} the image is exact and this coincides
// with the continuous weak form.
template <class Scalar, class Theta>
Scalar weak_form_theta(const DiscreteOperators<Scalar>& ops, const Vector<Scalar>& f,
                       Theta&& theta) {
  if (!ops.has_coag) return Scalar(0);
  const auto& x = ops.grid.centers();
  const Vector<Scalar> F = f.cwiseProduct(ops.grid.widths());
  Scalar s = Scalar(0);
  for (const auto& ev : ops.pairs) {
    const Scalar t_img = ev.w_lo * theta(x[ev.lo]) +
                         (ev.w_lo < Scalar(1)
                              ? (Scalar(1) - ev.w_lo) * theta(x[ev.lo + 1])
                              : Scalar(0));
    s += ev.rate * F[ev.i] * F[ev.j] * (t_img - theta(x[ev.i]) - theta(x[ev.j]));
  }
  return s;
}

}  // namespace fragcoal

#endif
