#include "sps/grid.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "sps/error.hpp"

namespace sps {

namespace {

constexpr double kPi = std::numbers::pi;

void require_same_grid(const RadialField& a, const RadialField& b) {
  if (!a.same_grid(b)) throw ConfigError("fields live on different grids");
}

}  // namespace

RadialGrid::RadialGrid(double radius, int nodes) : radius_(radius), spacing_(0.0) {
  if (!(radius >= 1.0) || !std::isfinite(radius)) {
    std::ostringstream msg;
    msg << "ball radius must satisfy R >= 1 (got " << radius << ")";
    throw ConfigError(msg.str());
  }
  if (nodes < kMinNodes) {
    std::ostringstream msg;
    msg << "grid needs at least " << kMinNodes << " nodes (got " << nodes << ")";
    throw ConfigError(msg.str());
  }
  const auto n = static_cast<std::size_t>(nodes);
  const double h = radius / static_cast<double>(nodes - 1);
  spacing_ = h;

  nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) nodes_[i] = static_cast<double>(i) * h;
  nodes_.back() = radius;

  const double h3 = h * h * h;
  weights_.resize(n);
  for (std::size_t i = 0; i < n; ++i) weights_[i] = 4.0 * kPi * h * nodes_[i] * nodes_[i];
  weights_[0] = kPi * h3 / 6.0;
  weights_[1] = 4.0 * kPi * h3 - weights_[0];
  // sum_{i=1}^{n-2} 4 pi h^3 i^2 + q_{n-1} = 4 pi R^3 / 3
  weights_[n - 1] = 4.0 * kPi * (radius * radius * h / 2.0 - radius * h * h / 6.0);

  conductances_.resize(n - 1);
  conductances_[0] = kPi * h;  // face area pi h^2 over h
  for (std::size_t m = 1; m + 1 < n; ++m) {
    conductances_[m] = 4.0 * kPi * nodes_[m] * nodes_[m + 1] / h;
  }
}

int RadialGrid::locate(double r) const noexcept {
  if (r <= 0.0) return 0;
  const int last = size() - 1;
  int i = std::clamp(static_cast<int>(std::floor(r / spacing_)), 0, last);
  while (i < last && nodes_[static_cast<std::size_t>(i + 1)] <= r) ++i;
  while (i > 0 && nodes_[static_cast<std::size_t>(i)] > r) --i;
  return i;
}

GridPtr build_uniform(double radius, int nodes) {
  return std::make_shared<const RadialGrid>(radius, nodes);
}

RadialField::RadialField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ConfigError("field without grid");
  if (static_cast<int>(values_.size()) != grid_->size()) {
    throw ConfigError("field size does not match grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw NumericalError("non-finite value in radial field");
  }
}

RadialField RadialField::zeros(GridPtr grid) {
  const auto n = static_cast<std::size_t>(grid->size());
  return RadialField(std::move(grid), std::vector<double>(n, 0.0));
}

RadialField RadialField::with_zero_trace() const {
  RadialField out = *this;
  out.values_.back() = 0.0;
  return out;
}

double RadialField::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

RadialField RadialField::operator-() const {
  RadialField out = *this;
  for (double& v : out.values_) v = -v;
  return out;
}

RadialField& RadialField::operator+=(const RadialField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

RadialField& RadialField::operator-=(const RadialField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

RadialField& RadialField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

bool RadialField::same_grid(const RadialField& other) const noexcept {
  if (grid_ == other.grid_) return true;
  return grid_->size() == other.grid_->size() && grid_->radius() == other.grid_->radius();
}

RadialField operator+(RadialField a, const RadialField& b) { return a += b; }
RadialField operator-(RadialField a, const RadialField& b) { return a -= b; }
RadialField operator*(double c, RadialField a) { return a *= c; }

std::vector<double> laplacian(const RadialGrid& grid, std::span<const double> u) {
  const int n = grid.size();
  const auto w = grid.weights();
  const auto c = grid.conductances();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int m = 0; m + 1 < n; ++m) {
    const double flux = c[m] * (u[m + 1] - u[m]);
    out[m] += flux;
    out[m + 1] -= flux;
  }
  for (int i = 0; i + 1 < n; ++i) out[i] /= w[i];
  out[n - 1] = 2.0 * out[n - 2] - out[n - 3];
  return out;
}

RadialField laplacian(const RadialField& u) {
  return RadialField(u.grid_ptr(), laplacian(u.grid(), u.values()));
}

double gradient_norm_sq(const RadialField& u) {
  const auto c = u.grid().conductances();
  const auto v = u.values();
  double s = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double d = v[m + 1] - v[m];
    s += c[m] * d * d;
  }
  return s;
}

double integrate(const RadialGrid& grid, std::span<const double> f) {
  const auto w = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
  return s;
}

double inner(const RadialField& u, const RadialField& v) {
  require_same_grid(u, v);
  const auto w = u.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * u.values()[i] * v.values()[i];
  return s;
}

double l2_norm(const RadialField& u) { return std::sqrt(inner(u, u)); }

double h1_norm_sq(const RadialField& u) { return gradient_norm_sq(u) + inner(u, u); }

double lp_integral(const RadialField& u, double p) {
  if (!(p >= 1.0)) throw ConfigError("Lebesgue exponent must satisfy p >= 1");
  const auto w = u.grid().weights();
  const auto v = u.values();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(std::abs(v[i]), p);
  return s;
}

double lp_norm(const RadialField& u, double p) { return std::pow(lp_integral(u, p), 1.0 / p); }

double interpolate(const RadialField& u, double r) {
  const RadialGrid& g = u.grid();
  if (r >= g.radius()) return 0.0;
  if (r <= 0.0) return u[0];
  const int i = std::min(g.locate(r), g.size() - 2);
  const double t = (r - g.node(i)) / g.spacing();
  return (1.0 - t) * u[i] + t * u[i + 1];
}

}  // namespace sps
