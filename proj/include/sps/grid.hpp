#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

namespace sps {

/// Uniform mesh r_i = i*h on [0, R] for radial functions on the ball B_R of
/// R^3, together with the discrete volume measure and face conductances of a
/// conservative second-order stencil.
///
/// The weights q_i integrate f over the ball (4*pi is already folded in).
/// Interior weights are the trapezoid values 4*pi*h*r_i^2; the first two and the
/// last weight are calibrated so that
///   - sum_i q_i equals the ball volume 4*pi*R^3/3 exactly,
///   - the flux-form Laplacian reproduces Delta(r^2) = 6 at every interior node,
///   - node 0 sees the regularity limit Delta u(0) = 6 (u_1 - u_0)/h^2.
/// Face areas between nodes m and m+1 are 4*pi*r_m*r_{m+1} (m >= 1), which makes
/// 1/r discretely harmonic and keeps the Coulomb kernel an exact discrete
/// Green's function of the Laplacian.
class RadialGrid {
 public:
  static constexpr int kMinNodes = 16;

  RadialGrid(double radius, int nodes);

  double radius() const noexcept { return radius_; }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  double spacing() const noexcept { return spacing_; }
  double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  /// a_{m+1/2} / h for m = 0..n-2.
  std::span<const double> conductances() const noexcept { return conductances_; }

  /// Index of the last node with r_i <= r (clamped to [0, n-1]).
  int locate(double r) const noexcept;

 private:
  double radius_;
  double spacing_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> conductances_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Rejects R < 1 and n < 16.
GridPtr build_uniform(double radius, int nodes);

/// Nodal values of a radial function. Values must be finite; the Dirichlet
/// trace u_{n-1} = 0 is expected by the solvers but not enforced here so that
/// diagnostics can be run on fields such as u = 1.
class RadialField {
 public:
  RadialField(GridPtr grid, std::vector<double> values);

  static RadialField zeros(GridPtr grid);

  template <typename F>
  static RadialField sample(GridPtr grid, F&& f) {
    std::vector<double> v(static_cast<std::size_t>(grid->size()));
    for (int i = 0; i < grid->size(); ++i) v[static_cast<std::size_t>(i)] = f(grid->node(i));
    return RadialField(std::move(grid), std::move(v));
  }

  const RadialGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  double trace() const { return values_.back(); }
  bool has_zero_trace() const { return values_.back() == 0.0; }

  /// Copy with u_{n-1} set to 0.
  RadialField with_zero_trace() const;

  double sup_norm() const noexcept;

  RadialField operator-() const;
  RadialField& operator+=(const RadialField& other);
  RadialField& operator-=(const RadialField& other);
  RadialField& operator*=(double c);

  bool same_grid(const RadialField& other) const noexcept;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

RadialField operator+(RadialField a, const RadialField& b);
RadialField operator-(RadialField a, const RadialField& b);
RadialField operator*(double c, RadialField a);

/// Flux-form radial Laplacian u'' + (2/r) u'. Node 0 uses the regularity limit
/// 3 u''(0) with the reflection u(-h) = u(h); node n-1 is extrapolated linearly
/// from the interior.
RadialField laplacian(const RadialField& u);

/// Same stencil on raw nodal values.
std::vector<double> laplacian(const RadialGrid& grid, std::span<const double> u);

/// Discrete Dirichlet integral int |u'|^2 over B_R.
double gradient_norm_sq(const RadialField& u);

/// sum_i q_i f_i.
double integrate(const RadialGrid& grid, std::span<const double> f);

/// Weighted L^2 inner product sum_i q_i u_i v_i.
double inner(const RadialField& u, const RadialField& v);

double l2_norm(const RadialField& u);

/// int (|u'|^2 + u^2) over B_R.
double h1_norm_sq(const RadialField& u);

/// (int |u|^p)^{1/p}; rejects p < 1.
double lp_norm(const RadialField& u, double p);

/// int |u|^p (no root), the quantity that appears in the energy.
double lp_integral(const RadialField& u, double p);

/// Piecewise-linear evaluation at an arbitrary radius; 0 beyond R.
double interpolate(const RadialField& u, double r);

}  // namespace sps
