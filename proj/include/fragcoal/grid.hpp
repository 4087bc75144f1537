#ifndef FRAGCOAL_GRID_HPP
#define FRAGCOAL_GRID_HPP

#include <cmath>
#include <utility>

#include "fragcoal/kernels.hpp"
#include "fragcoal/quadrature.hpp"
#include "fragcoal/types.hpp"

namespace fragcoal {

enum class Spacing { uniform, geometric };

// Truncated mass axis (0, R]: edges 0 = e_0 < e_1 < ... < e_n = R,
// cell centers at the arithmetic midpoints.
template <class Scalar = double>
class MassGrid {
 public:
  MassGrid() = default;

  static MassGrid from_edges(Vector<Scalar> edges) {
    if (edges.size() < 3) throw ConfigError("mass grid needs at least 2 cells");
    if (edges[0] != Scalar(0)) throw ConfigError("mass grid must start at 0");
    for (Index j = 1; j < edges.size(); ++j)
      if (!(edges[j] > edges[j - 1])) throw ConfigError("mass grid edges must increase strictly");
    return MassGrid(std::move(edges));
  }

  static MassGrid uniform(Scalar R, Index n) {
    check_params(R, n);
    Vector<Scalar> e(n + 1);
    for (Index j = 0; j <= n; ++j) e[j] = R * Scalar(j) / Scalar(n);
    e[n] = R;
    return MassGrid(std::move(e));
  }

  // First edge at R*10^-span_decades, then a fixed ratio up to R.
  static MassGrid geometric(Scalar R, Index n, Scalar span_decades = Scalar(4)) {
    check_params(R, n);
    if (!(span_decades >= Scalar(8) / Scalar(3)))
      throw ConfigError("geometric grid span must cover at least 8/3 decades");
    Vector<Scalar> e(n + 1);
    e[0] = Scalar(0);
    const Scalar l10R = std::log10(R);
    for (Index j = 1; j <= n; ++j)
      e[j] = std::pow(Scalar(10), l10R - span_decades * Scalar(n - j) / Scalar(n - 1));
    e[n] = R;
    return MassGrid(std::move(e));
  }

  // Edges at min_edge * 2^(j/q). Radii that are exact octave multiples of
  // min_edge make grids at different radii share cells bit-for-bit.
  static MassGrid geometric_octaves(Scalar min_edge, int cells_per_octave, Scalar R) {
    if (!(min_edge > Scalar(0)) || cells_per_octave < 1 || !(R > min_edge))
      throw ConfigError("bad octave-grid parameters");
    const Scalar octaves = std::log2(R / min_edge);
    const Index n = static_cast<Index>(std::lround(octaves * cells_per_octave)) + 1;
    check_params(R, n);
    Vector<Scalar> e(n + 1);
    e[0] = Scalar(0);
    for (Index j = 1; j <= n; ++j)
      e[j] = min_edge * std::exp2(Scalar(j - 1) / Scalar(cells_per_octave));
    e[n] = R;
    return MassGrid(std::move(e));
  }

  // Prefix grid with all edges <= r (plus a tiny slack for round-off).
  MassGrid truncated(Scalar r) const {
    const Scalar slack = r * Scalar(1e-12);
    Index last = 0;
    for (Index j = 0; j <= cells(); ++j)
      if (edges_[j] <= r + slack) last = j;
    if (last < 2) throw ConfigError("truncation radius leaves fewer than 2 cells");
    return MassGrid(edges_.head(last + 1).eval());
  }

  Scalar radius() const { return edges_[edges_.size() - 1]; }
  Index cells() const { return edges_.size() - 1; }
  const Vector<Scalar>& edges() const { return edges_; }
  const Vector<Scalar>& centers() const { return centers_; }
  const Vector<Scalar>& widths() const { return widths_; }
  // x_j * width_j, the discrete mass measure
  const Vector<Scalar>& mass_weights() const { return mass_w_; }

  // cell containing x (centers are strictly inside, edges resolve downward)
  Index locate(Scalar x) const {
    if (!(x > Scalar(0)) || x > radius()) throw ConfigError("mass outside the grid");
    Index lo = 0, hi = cells() - 1;
    while (lo < hi) {
      const Index mid = (lo + hi) / 2;
      if (x <= edges_[mid + 1]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

  bool operator==(const MassGrid& o) const { return edges_ == o.edges_; }

 private:
  explicit MassGrid(Vector<Scalar> edges) : edges_(std::move(edges)) {
    const Index n = edges_.size() - 1;
    centers_.resize(n);
    widths_.resize(n);
    mass_w_.resize(n);
    for (Index j = 0; j < n; ++j) {
      centers_[j] = (edges_[j] + edges_[j + 1]) / Scalar(2);
      widths_[j] = edges_[j + 1] - edges_[j];
      mass_w_[j] = centers_[j] * widths_[j];
    }
  }

  static void check_params(Scalar R, Index n) {
    if (!(R > Scalar(0))) throw ConfigError("truncation radius must be positive");
    if (n < 2) throw ConfigError("mass grid needs at least 2 cells");
  }

  Vector<Scalar> edges_;
  Vector<Scalar> centers_, widths_, mass_w_;
};

template <class Scalar>
MassGrid<Scalar> build_grid(Scalar R, Index n, Spacing spacing,
                            Scalar span_decades = Scalar(4)) {
  return spacing == Spacing::uniform ? MassGrid<Scalar>::uniform(R, n)
                                     : MassGrid<Scalar>::geometric(R, n, span_decades);
}

// Cell-averaged number density per unit mass on a grid.
template <class Scalar = double>
struct DensityField {
  const MassGrid<Scalar>* grid = nullptr;  // non-owning
  Vector<Scalar> values;

  bool nonnegative() const { return values.size() == 0 || values.minCoeff() >= Scalar(0); }
};

enum class Projection { midpoint, mass_conserving };

// Project a pointwise density f(x) onto the grid. The mass-conserving mode
// sets f_j = (cell mass)/(x_j * width_j) so the discrete first moment equals
// the exact integral of x f(x) over (0, R] to quadrature accuracy.
template <class Scalar, class F>
Vector<Scalar> project_density(const MassGrid<Scalar>& grid, F&& f,
                               Projection mode = Projection::mass_conserving) {
  const Index n = grid.cells();
  Vector<Scalar> v(n);
  if (mode == Projection::midpoint) {
    for (Index j = 0; j < n; ++j) v[j] = f(grid.centers()[j]);
    return v;
  }
  QuadTol tol{1e-14, 1e-12};
  for (Index j = 0; j < n; ++j) {
    const Scalar cell_mass = integrate_or_throw(
        [&](Scalar x) { return x * f(x); }, grid.edges()[j], grid.edges()[j + 1], tol,
        "initial-data projection");
    v[j] = cell_mass / grid.mass_weights()[j];
  }
  return v;
}

template <class Scalar>
Vector<Scalar> project_initial(const MassGrid<Scalar>& grid, const InitialCondition<Scalar>& ic,
                               Projection mode = Projection::mass_conserving) {
  if (ic.family == InitialFamily::monodisperse) {
    Vector<Scalar> v = Vector<Scalar>::Zero(grid.cells());
    const Index j = grid.locate(ic.x0);
    v[j] = ic.amplitude / grid.widths()[j];
    return v;
  }
  return project_density(grid, [&](Scalar x) { return ic(x); }, mode);
}

}  // namespace fragcoal

#endif
