#pragma once

// Orthogonal 2-metrics A^2 dx^2 + B^2 dy^2, their Gauss curvature, and the slice metrics
// built from (phi, psi).

#include <stdexcept>
#include <string>

#include "field.hpp"

namespace guichard {

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A and B are stored signed; only their squares enter the metric
struct OrthogonalMetric2 {
  ScalarField A, B;
};

inline constexpr double kVanishingRatio = 1e-8;

// |q| < 1e-8 * sup|q| anywhere on the lattice counts as vanishing
inline void require_nonvanishing(const ScalarField& q, const Lattice& dom, const std::string& name) {
  const auto v = q.values_on(dom);
  double sup = 0.0, inf = std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (!std::isfinite(x)) throw MetricError(name + " is not finite on the domain");
    sup = std::max(sup, std::abs(x));
    inf = std::min(inf, std::abs(x));
  }
  if (sup == 0.0 || inf < kVanishingRatio * sup) throw MetricError(name + " vanishes on the domain");
}

namespace detail {
inline const Lattice* domain_of(const ScalarField& a, const ScalarField& b, const Lattice* dom) {
  if (dom) return dom;
  if (!a.is_closed_form()) return a.lattice().get();
  if (!b.is_closed_form()) return b.lattice().get();
  return nullptr;
}
}  // namespace detail

// K = -(1/(AB)) [ (B_x/A)_x + (A_y/B)_y ]
inline ScalarField gauss_curvature(const OrthogonalMetric2& m, const Lattice* domain = nullptr) {
  if (m.A.arity() != 2 || m.B.arity() != 2) throw MetricError("gauss_curvature: metric coefficients need arity 2");
  if (const Lattice* d = detail::domain_of(m.A, m.B, domain)) {
    require_nonvanishing(m.A, *d, "A");
    require_nonvanishing(m.B, *d, "B");
  }
  const ScalarField t = (m.B.dx() / m.A).dx() + (m.A.dy() / m.B).dy();
  return -t / (m.A * m.B);
}

// slice quantities from arity-2 data on one z-level
inline OrthogonalMetric2 slice_metric2(const ScalarField& phi, const ScalarField& phi_z, const Lattice* domain = nullptr) {
  const ScalarField s = sin(phi), c = cos(phi), pzx = phi_z.dx(), pzy = phi_z.dy();
  if (const Lattice* d = detail::domain_of(phi, phi_z, domain)) {
    require_nonvanishing(phi_z, *d, "phi_z");
    require_nonvanishing(s, *d, "sin(phi)");
    require_nonvanishing(c, *d, "cos(phi)");
    require_nonvanishing(pzx, *d, "phi_xz");
    require_nonvanishing(pzy, *d, "phi_yz");
  }
  return {-pzx / (phi_z * s), pzy / (phi_z * c)};
}

inline OrthogonalMetric2 flat_slice_metric2(const ScalarField& phi, const ScalarField& phi_z, const Lattice* domain = nullptr) {
  const ScalarField s = sin(phi), c = cos(phi), pzx = phi_z.dx(), pzy = phi_z.dy();
  if (const Lattice* d = detail::domain_of(phi, phi_z, domain)) {
    require_nonvanishing(s, *d, "sin(phi)");
    require_nonvanishing(c, *d, "cos(phi)");
    require_nonvanishing(pzx, *d, "phi_xz");
    require_nonvanishing(pzy, *d, "phi_yz");
  }
  return {-pzx / s, pzy / c};
}

// A = -phi_xz / (phi_z sin phi), B = phi_yz / (phi_z cos phi) on the slice z = z0
inline OrthogonalMetric2 slice_metric(const ScalarField& phi, const ScalarField& psi, double z0,
                                      const Lattice* domain = nullptr) {
  if (phi.arity() != 3 || psi.arity() != 3) throw MetricError("slice_metric: phi and psi need arity 3");
  return slice_metric2(phi.restrict_to_z(z0), phi.dz().restrict_to_z(z0), domain);
}

// A = -phi_xz / sin phi, B = phi_yz / cos phi
inline OrthogonalMetric2 flat_slice_metric(const ScalarField& phi, const ScalarField& psi, double z0,
                                           const Lattice* domain = nullptr) {
  if (phi.arity() != 3 || psi.arity() != 3) throw MetricError("flat_slice_metric: phi and psi need arity 3");
  return flat_slice_metric2(phi.restrict_to_z(z0), phi.dz().restrict_to_z(z0), domain);
}

// components of (1/phi_z^2) {(d phi_z)^2 + (d psi_z)^2}
struct QuadraticForm2 {
  ScalarField E, F, G;
};

inline QuadraticForm2 gradient_metric(const ScalarField& phi_z, const ScalarField& psi_z) {
  const ScalarField w = 1.0 / square(phi_z);
  const ScalarField ax = phi_z.dx(), ay = phi_z.dy(), bx = psi_z.dx(), by = psi_z.dy();
  return {w * (ax * ax + bx * bx), w * (ax * ay + bx * by), w * (ay * ay + by * by)};
}

inline QuadraticForm2 gradient_metric(const ScalarField& phi, const ScalarField& psi, double z0) {
  if (phi.arity() != 3 || psi.arity() != 3) throw MetricError("gradient_metric: phi and psi need arity 3");
  return gradient_metric(phi.dz().restrict_to_z(z0), psi.dz().restrict_to_z(z0));
}

}  // namespace guichard
