#pragma once

// Slice z = 0 data (phi, psi, phi_z, psi_z) from a curvature -1 metric, the class A / class B
// families, and the admissibility checks that gate the evolution.

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "expr.hpp"
#include "integrate.hpp"
#include "io.hpp"
#include "metric2.hpp"

namespace guichard {

// data that fails a structural condition; `residual` names the failing check
class InadmissibleError : public std::runtime_error {
 public:
  InadmissibleError(std::string residual, double value, const std::string& what)
      : std::runtime_error(what), residual(std::move(residual)), value(value) {}
  std::string residual;
  double value;
};

using ResidualMap = std::map<std::string, double>;

inline constexpr double kClosedFormTol = 1e-9;
inline constexpr int kDefaultJetDegree = 16;

// sup over the nodes where the representation is trusted: all nodes for jets and closed
// forms, the lattice margin excluded for grids
inline double interior_sup(const ScalarField& f, const Lattice& lat) {
  return sup_norm(f, lat, f.rep() == Rep::grid ? lat.margin() : 0);
}

// grid mode: ten times the truncation estimate of a third derivative
inline double grid_tolerance(const Lattice& lat) {
  const double h = std::max(lat.spacing(0), lat.spacing(1));
  return std::max(10.0 * std::pow(h, lat.fd_order() - 3), 1e-12);
}

inline double tolerance_for(const ScalarField& f, const Lattice& lat) {
  return f.rep() == Rep::grid ? grid_tolerance(lat) : kClosedFormTol;
}

struct InitialData {
  LatticePtr lattice;
  ScalarField phi0, psi0, phi_z0, psi_z0;
  double c = 1.0;
  double lambda = 0.0;
  json provenance = json::object();
};

// ---- from a metric to Cauchy data ----

namespace detail {

inline ScalarField lattice_ready(const ScalarField& f, const LatticePtr& lat, int degree) {
  return f.is_closed_form() ? f : as_jets(f, lat, degree);
}

// Taylor jet of phi at one point from its value there; A, B are metric jets of degree d.
// Every degree follows from phi_x = A_y/B + A cos phi, phi_y = -B_x/A + B sin phi.
inline Jet phi_jet(double v, const Jet& A, const Jet& B, double* compat) {
  const int d = A.degree();
  const auto& L = JetLayout::get(2);
  const Jet R1 = A.derivative(1) / B.truncated(d - 1);
  const Jet R2 = -(B.derivative(0) / A.truncated(d - 1));
  Jet phi = Jet::constant(2, d, v);
  for (int k = 0; k < d; ++k) {
    const Jet pk = phi.truncated(k);
    const Jet Fx = R1.truncated(k) + A.truncated(k) * cos(pk);
    const Jet Gy = R2.truncated(k) + B.truncated(k) * sin(pk);
    for (int a = 0; a <= k + 1; ++a) {
      const int b = k + 1 - a;
      phi[L.index({a, b, 0})] = a >= 1 ? Fx.coeff({a - 1, b, 0}) / a : Gy.coeff({0, b - 1, 0}) / b;
    }
    if (k == 1 && compat) *compat = std::max(*compat, std::abs(Fx.coeff({0, 1, 0}) - Gy.coeff({1, 0, 0})));
  }
  return phi;
}

inline int band_of(double v) { return static_cast<int>(std::floor(v / (std::numbers::pi / 2))); }

inline void require_single_band(const ScalarField& phi, const Lattice& lat, double lambda) {
  const double q = std::numbers::pi / 2;
  const int k = band_of(lambda);
  for (double v : phi.values_on(lat)) {
    if (!std::isfinite(v)) throw InadmissibleError("phi_band", v, "phi left the analyticity domain (non-finite value)");
    if (v <= k * q || v >= (k + 1) * q)
      throw InadmissibleError("phi_band", v, "phi leaves the band (k pi/2, (k+1) pi/2) containing lambda");
  }
}

}  // namespace detail

struct PhiSolution {
  ScalarField phi;
  double curvature_residual = 0.0;  // sup |K + 1|
  double compatibility = 0.0;       // max |(phi_x)_y - (phi_y)_x|
};

// phi with phi(0,0) = lambda, integrated along (0,0) -> (0,y) -> (x,y)
inline PhiSolution solve_phi(const OrthogonalMetric2& m, double lambda, const LatticePtr& lat,
                             int degree = kDefaultJetDegree, double tol = -1.0) {
  if (lat->arity() != 2) throw std::invalid_argument("solve_phi: lattice must be 2-D");
  PhiSolution r;
  const ScalarField K = gauss_curvature(m, lat.get());
  r.curvature_residual = interior_sup(K + 1.0, *lat);
  if (tol < 0) tol = std::max(tolerance_for(m.A, *lat), tolerance_for(m.B, *lat));
  if (!(r.curvature_residual <= tol))
    throw InadmissibleError("curvature", r.curvature_residual, "metric curvature differs from -1 (compatibility fails)");
  const ScalarField A = detail::lattice_ready(m.A, lat, degree), B = detail::lattice_ready(m.B, lat, degree);
  const int d = std::min({degree, A.degree(), B.degree()});
  if (d < 2) throw std::domain_error("solve_phi: metric jets of degree >= 2 are needed");
  auto jet_at = [&](double v, const Point& p) {
    return detail::phi_jet(v, field_jet(A, p, d), field_jet(B, p, d), &r.compatibility);
  };
  const int nx = lat->n(0), ny = lat->n(1);
  const int i0 = hub_index(*lat, 0), j0 = hub_index(*lat, 1);
  auto step = [](const Jet& j, double hx, double hy) {
    const double h[2] = {hx, hy};
    return j.eval_offset(h);
  };
  // column x = 0
  std::vector<Jet> col(ny);
  const Jet origin = jet_at(lambda, {0.0, 0.0, 0.0});
  col[j0] = jet_at(step(origin, 0.0, lat->coord(1, j0)), {0.0, lat->coord(1, j0), 0.0});
  const double hy = lat->spacing(1), hx = lat->spacing(0);
  for (int j = j0 + 1; j < ny; ++j) col[j] = jet_at(step(col[j - 1], 0.0, hy), {0.0, lat->coord(1, j), 0.0});
  for (int j = j0 - 1; j >= 0; --j) col[j] = jet_at(step(col[j + 1], 0.0, -hy), {0.0, lat->coord(1, j), 0.0});
  const auto& L = JetLayout::get(2);
  const std::size_t so = L.size(d);
  std::vector<double> c(lat->size() * so);
  std::vector<Jet> row(nx);
  for (int j = 0; j < ny; ++j) {
    const double y = lat->coord(1, j);
    row[i0] = jet_at(step(col[j], lat->coord(0, i0), 0.0), {lat->coord(0, i0), y, 0.0});
    for (int i = i0 + 1; i < nx; ++i) row[i] = jet_at(step(row[i - 1], hx, 0.0), {lat->coord(0, i), y, 0.0});
    for (int i = i0 - 1; i >= 0; --i) row[i] = jet_at(step(row[i + 1], -hx, 0.0), {lat->coord(0, i), y, 0.0});
    for (int i = 0; i < nx; ++i) std::copy_n(row[i].coeffs().data(), so, c.data() + lat->flat(i, j) * so);
  }
  r.phi = ScalarField::jets(lat, d, std::move(c));
  // the band is read at the hub node, since the origin may lie off the patch
  detail::require_single_band(r.phi, *lat, r.phi.values_on(*lat)[lat->flat(i0, j0)]);
  return r;
}

struct PhiZSolution {
  ScalarField phi_z;   // c * phi_z1
  ScalarField phi_z1;
  double closedness = 0.0;
};

// (log|phi_z|)_x = -A sin phi, (log|phi_z|)_y = B cos phi; phi_z1(0,0) = phi_z1_at_origin
inline PhiZSolution solve_phi_z(const OrthogonalMetric2& m, const ScalarField& phi0, double c, const LatticePtr& lat,
                                int degree = kDefaultJetDegree, double phi_z1_at_origin = 1.0, double tol = kClosedFormTol) {
  if (c == 0.0) throw std::invalid_argument("solve_phi_z: c must be nonzero");
  if (phi_z1_at_origin == 0.0) throw std::invalid_argument("solve_phi_z: normalization must be nonzero");
  const ScalarField P = -m.A * sin(phi0), Q = m.B * cos(phi0);
  auto pot = potential_from_gradient(P, Q, lat, degree);
  const double scale = std::max(1.0, std::max(interior_sup(P, *lat), interior_sup(Q, *lat)));
  if (!(pot.closedness <= tol * scale))
    throw InadmissibleError("closedness_phi_z", pot.closedness, "the 1-form -A sin(phi) dx + B cos(phi) dy is not closed");
  PhiZSolution r;
  r.closedness = pot.closedness;
  r.phi_z1 = phi_z1_at_origin * exp(pot.f);
  r.phi_z = c * r.phi_z1;
  return r;
}

struct PsiZSolution {
  ScalarField psi_z;
  double closedness = 0.0;
};

// psi_z = int -phi_xz cot(phi) dx + phi_yz tan(phi) dy with psi_z(0,0) = 0
inline PsiZSolution solve_psi_z(const ScalarField& phi0, const ScalarField& phi_z0, const LatticePtr& lat,
                                int degree = kDefaultJetDegree, double tol = kClosedFormTol) {
  const ScalarField P = -phi_z0.dx() * cot(phi0), Q = phi_z0.dy() * tan(phi0);
  auto pot = potential_from_gradient(P, Q, lat, degree);
  const double scale = std::max(1.0, std::max(interior_sup(P, *lat), interior_sup(Q, *lat)));
  if (!(pot.closedness <= tol * scale))
    throw InadmissibleError("closedness_psi_z", pot.closedness, "the 1-form for psi_z is not closed");
  return {pot.f, pot.closedness};
}

// ---- class A / B split ----

enum class CaseLabel { A, B, mixed };

inline std::string to_string(CaseLabel l) { return l == CaseLabel::A ? "A" : l == CaseLabel::B ? "B" : "MIXED"; }

struct Classification {
  CaseLabel label = CaseLabel::mixed;
  double sup = 0.0, min = 0.0;  // of |phi_xy sin 2phi - 2 phi_x phi_y cos 2phi|
};

inline ScalarField ab_expression(const ScalarField& phi0) {
  const ScalarField px = phi0.dx(), py = phi0.dy();
  return phi0.dx().dy() * sin(2.0 * phi0) - 2.0 * px * py * cos(2.0 * phi0);
}

// A: vanishes identically; B: bounded away from zero (min >= 1e-3 sup); otherwise MIXED
inline Classification classify_AB(const ScalarField& phi0, const Lattice& lat, double tol = -1.0) {
  const ScalarField E = ab_expression(phi0);
  if (tol < 0) tol = tolerance_for(phi0, lat);
  Classification r;
  r.sup = interior_sup(E, lat);
  r.min = min_abs(E, lat, phi0.rep() == Rep::grid ? lat.margin() : 0);
  const double scale = std::max(1.0, interior_sup(phi0.dx().dy(), lat) + 2.0 * interior_sup(phi0.dx() * phi0.dy(), lat));
  if (r.sup <= tol * scale) r.label = CaseLabel::A;
  else if (r.min >= 1e-3 * r.sup) r.label = CaseLabel::B;
  else r.label = CaseLabel::mixed;
  return r;
}

struct LpsiSplit {
  ScalarField Lpsi;  // c^2 P + Q
  ScalarField P, Q;
};

inline ScalarField Lop(const ScalarField& f) { return f.dx(2) - f.dy(2); }

// L(psi) from the third-order relation valid for case B data
inline LpsiSplit lpsi_from_slice(const ScalarField& phi0, const ScalarField& phi_z0, double c, const Lattice& lat) {
  if (c == 0.0) throw std::invalid_argument("lpsi_from_slice: c must be nonzero");
  const Classification cl = classify_AB(phi0, lat);
  if (cl.label != CaseLabel::B)
    throw InadmissibleError("case_split", cl.min, "denominator of the L(psi) relation is not bounded away from zero (case " +
                                                      to_string(cl.label) + ")");
  const ScalarField den = ab_expression(phi0);
  const ScalarField pz1 = phi_z0 / c;
  const ScalarField px = phi0.dx(), py = phi0.dy(), Lphi = Lop(phi0);
  const ScalarField s = sin(phi0), co = cos(phi0);
  const ScalarField num_c2 = -pz1 * pz1.dx().dy() + pz1.dx() * pz1.dy();
  const ScalarField num_0 = -(Lphi.dx().dy() + 4.0 * px * py * Lphi) * s * co - px * Lphi.dy() * s * s +
                            py * Lphi.dx() * co * co;
  LpsiSplit r;
  r.P = num_c2 / den;
  r.Q = num_0 / den;
  r.Lpsi = c * c * r.P + r.Q;
  return r;
}

struct ExtensionResiduals {
  ScalarField x, y;
};

inline ExtensionResiduals verify_extension(const ScalarField& phi0, const ScalarField& phi_z0, const ScalarField& Lpsi) {
  const ScalarField px = phi0.dx(), py = phi0.dy(), Lphi = Lop(phi0);
  const ScalarField s = sin(phi0), co = cos(phi0);
  const ScalarField cot_ = co / s, tan_ = s / co;
  ExtensionResiduals r;
  r.x = Lpsi.dx() - (phi_z0.dx() * phi_z0 / (s * s) - (Lphi.dx() + 2.0 * px * Lpsi) * cot_ + 2.0 * px * Lphi);
  r.y = Lpsi.dy() - (-phi_z0.dy() * phi_z0 / (co * co) + (Lphi.dy() + 2.0 * py * Lpsi) * tan_ + 2.0 * py * Lphi);
  return r;
}

inline double extension_sup(const ScalarField& phi0, const ScalarField& phi_z0, const ScalarField& Lpsi, const Lattice& lat) {
  const auto r = verify_extension(phi0, phi_z0, Lpsi);
  return std::max(interior_sup(r.x, lat), interior_sup(r.y, lat));
}

struct Psi0Solution {
  ScalarField psi0, psi_hat, X, Y;
  double split_spread = 0.0;  // dependence of X'' on y and of Y'' on x
};

// psi0 = psi_hat + X(x) + Y(y) with psi_hat = int int phi_x phi_y and X, Y fixed by L(psi) and the psi Laplacian relation
inline Psi0Solution solve_psi0(const ScalarField& phi0, const ScalarField& phi_z0, const ScalarField& Lpsi,
                               const LatticePtr& lat, int degree = kDefaultJetDegree, double tol = kClosedFormTol) {
  const ScalarField px = phi0.dx(), py = phi0.dy();
  Psi0Solution r;
  r.psi_hat = mixed_antiderivative(px * py, lat, degree);
  const ScalarField Lh = Lop(r.psi_hat), Dh = r.psi_hat.dx(2) + r.psi_hat.dy(2);
  const ScalarField s = sin(phi0), co = cos(phi0);
  const ScalarField R = -0.5 * (Dh - px * px - py * py - phi_z0 * phi_z0 + Lop(phi0) * sin(2.0 * phi0) - Lh * cos(2.0 * phi0));
  const ScalarField M = Lpsi - Lh;
  const auto X = double_antiderivative_profile(R + M * co * co, lat, 0, degree);
  const auto Y = double_antiderivative_profile(R - M * s * s, lat, 1, degree);
  r.split_spread = std::max(X.spread, Y.spread);
  const double scale = std::max({1.0, X.scale, Y.scale});
  if (!(r.split_spread <= tol * scale))
    throw InadmissibleError("psi0_split", r.split_spread,
                            "R is not of the form X''(x) sin^2 phi + Y''(y) cos^2 phi (data not admissible)");
  r.X = X.F;
  r.Y = Y.F;
  r.psi0 = r.psi_hat + r.X + r.Y;
  return r;
}

// ---- residual reports ----

// psi_z gradient, psi_xy, the psi Laplacian relation, the normalizations and the extension condition
inline ResidualMap initial_residuals(const InitialData& d) {
  const Lattice& lat = *d.lattice;
  const ScalarField& p = d.phi0;
  const ScalarField px = p.dx(), py = p.dy();
  const ScalarField s = sin(p), co = cos(p);
  ResidualMap r;
  r["psi_z_x"] = interior_sup(d.psi_z0.dx() + d.phi_z0.dx() * co / s, lat);
  r["psi_z_y"] = interior_sup(d.psi_z0.dy() - d.phi_z0.dy() * s / co, lat);
  r["psi_xy"] = interior_sup(d.psi0.dx().dy() - px * py, lat);
  const ScalarField lhs = -(d.psi0.dx(2) + d.psi0.dy(2)) + px * px + py * py + d.phi_z0 * d.phi_z0;
  const ScalarField rhs = Lop(p) * sin(2.0 * p) - Lop(d.psi0) * cos(2.0 * p);
  r["psi_laplacian"] = interior_sup(lhs - rhs, lat);
  r["psi_z_origin"] = std::abs(d.psi_z0.value_at({0.0, 0.0, 0.0}));
  r["phi_origin"] = std::abs(p.value_at({0.0, 0.0, 0.0}) - d.lambda);
  r["extension"] = extension_sup(p, d.phi_z0, Lop(d.psi0), lat);
  return r;
}

// phi and log phi_z gradients against the metric
inline ResidualMap reconstruction_residuals(const OrthogonalMetric2& m, const InitialData& d) {
  const Lattice& lat = *d.lattice;
  const ScalarField& p = d.phi0;
  ResidualMap r;
  r["phi_x"] = interior_sup(p.dx() - (m.A.dy() / m.B + m.A * cos(p)), lat);
  r["phi_y"] = interior_sup(p.dy() - (-m.B.dx() / m.A + m.B * sin(p)), lat);
  const ScalarField lz = d.phi_z0;
  r["log_phi_z_x"] = interior_sup(lz.dx() / lz + m.A * sin(p), lat);
  r["log_phi_z_y"] = interior_sup(lz.dy() / lz - m.B * cos(p), lat);
  return r;
}

inline double max_of(const ResidualMap& m) {
  double v = 0.0;
  for (const auto& [k, x] : m) v = std::max(v, x);
  return v;
}

// ---- full constructions ----

struct Construction {
  InitialData data;
  ScalarField Lpsi;
  LpsiSplit split;
  OrthogonalMetric2 metric;
  bool has_metric = false;
  Classification classification;
  ResidualMap residuals;
};

inline void gate_extension(const ScalarField& phi0, const ScalarField& phi_z0, const ScalarField& Lpsi, const Lattice& lat,
                        double tol, ResidualMap& out) {
  const double v = extension_sup(phi0, phi_z0, Lpsi, lat);
  out["extension"] = v;
  if (!(v <= tol)) throw InadmissibleError("extension", v, "data violates the z-extension condition");
}

// initial data from a curvature -1 metric (case B data; case A needs class_a_build)
inline Construction construct_from_metric(const OrthogonalMetric2& m, double lambda, double c, const LatticePtr& lat,
                                          int degree = kDefaultJetDegree, double phi_z1_at_origin = 1.0,
                                          double tol = kClosedFormTol) {
  Construction out;
  out.metric = m;
  out.has_metric = true;
  const auto ph = solve_phi(m, lambda, lat, degree);
  const auto pz = solve_phi_z(m, ph.phi, c, lat, degree, phi_z1_at_origin, tol);
  const auto qz = solve_psi_z(ph.phi, pz.phi_z, lat, degree, tol);
  out.residuals["curvature"] = ph.curvature_residual;
  out.residuals["phi_compatibility"] = ph.compatibility;
  out.residuals["closedness_phi_z"] = pz.closedness;
  out.residuals["closedness_psi_z"] = qz.closedness;
  out.classification = classify_AB(ph.phi, *lat);
  if (out.classification.label != CaseLabel::B)
    throw InadmissibleError("case_split", out.classification.min,
                            "metric data is of case " + to_string(out.classification.label) +
                                "; L(psi) is not determined by the metric alone");
  out.split = lpsi_from_slice(ph.phi, pz.phi_z, c, *lat);
  out.Lpsi = out.split.Lpsi;
  gate_extension(ph.phi, pz.phi_z, out.Lpsi, *lat, tol, out.residuals);
  const auto ps = solve_psi0(ph.phi, pz.phi_z, out.Lpsi, lat, degree, tol);
  out.residuals["psi0_split"] = ps.split_spread;
  out.data = {lat, ph.phi, ps.psi0, pz.phi_z, qz.psi_z, c, lambda, json::object()};
  for (const auto& [k, v] : reconstruction_residuals(m, out.data)) out.residuals[k] = v;
  for (const auto& [k, v] : initial_residuals(out.data)) out.residuals[k] = v;
  return out;
}

struct ClassAParams {
  Univariate zeta;   // of x (D variant) or of y (C variant)
  Univariate D;      // D(y), or C(x) in the mirrored variant
  bool c_of_x = false;
  std::string zeta_text, D_text;
};

namespace detail {
inline ScalarField univariate_field(const Univariate& f, int axis) {
  return ScalarField::closed_form(2, [f, axis](std::span<const Jet> v) { return f(v[axis]); });
}

inline void require_nonconstant(const ScalarField& f, int axis, const Lattice& lat, const std::string& name) {
  if (interior_sup(f.differentiate(axis), lat) <= 1e-12 * std::max(1.0, interior_sup(f, lat)))
    throw std::invalid_argument(name + " must not be constant");
}
}  // namespace detail

// class A: cos^2 phi = 1/(1+e^{D(y)}), (phi_z^c)^2 = c^2 zeta(x) sin^2 phi.
// The C(x) variant is the mirror (x, y, phi) -> (y, x, pi/2 - phi).
// lambda only selects the band of phi; NaN means (0, pi/2).
inline Construction class_a_build(const ClassAParams& p, double c, const LatticePtr& lat,
                                  int degree = kDefaultJetDegree, double lambda = std::numeric_limits<double>::quiet_NaN(),
                                  double tol = kClosedFormTol) {
  if (c == 0.0) throw std::invalid_argument("class A: c must be nonzero");
  const int ax = p.c_of_x ? 0 : 1;  // variable of D (or C)
  const int az = 1 - ax;             // variable of zeta
  const ScalarField zeta = as_jets(detail::univariate_field(p.zeta, az), lat, degree);
  const ScalarField Dv = as_jets(detail::univariate_field(p.D, ax), lat, degree);
  for (double v : zeta.values_on(*lat))
    if (!(v > 0.0)) throw std::invalid_argument("class A: zeta must be positive on the domain");
  detail::require_nonconstant(zeta, az, *lat, "zeta");
  detail::require_nonconstant(Dv, ax, *lat, p.c_of_x ? "C" : "D");
  const double q = std::numbers::pi / 2;
  const int k = std::isnan(lambda) ? 0 : detail::band_of(lambda);
  const double base = (k % 2 == 0) ? k * q : (k + 1) * q;
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  const auto Dfun = p.D;
  const ScalarField phi = as_jets(ScalarField::closed_form(2, [Dfun, ax, base, sign](std::span<const Jet> v) {
    return base + sign * atan(exp(0.5 * Dfun(v[ax])));
  }), lat, degree);
  const ScalarField rz = sqrt(zeta);
  const ScalarField s = sin(phi), co = cos(phi);
  ScalarField phi_z, psi_z, Lpsi;
  const double rz0 = rz.value_at({0.0, 0.0, 0.0});
  const double phi00 = phi.value_at({0.0, 0.0, 0.0});
  if (!p.c_of_x) {
    phi_z = c * rz * s;
    psi_z = -c * rz * co + c * rz0 * std::cos(phi00);
    const ScalarField py = phi.dy();
    Lpsi = 0.5 * (c * c * zeta - py * py / (co * co)) - phi.dy(2) * s / co;
  } else {
    phi_z = c * rz * co;
    psi_z = c * rz * s - c * rz0 * std::sin(phi00);
    const ScalarField px = phi.dx();
    Lpsi = -0.5 * c * c * zeta + 0.5 * px * px / (s * s) - phi.dx(2) * co / s;
  }
  Construction out;
  out.Lpsi = Lpsi;
  out.split.P = p.c_of_x ? -0.5 * zeta : 0.5 * zeta;
  out.split.Q = Lpsi - c * c * out.split.P;
  out.split.Lpsi = Lpsi;
  out.classification = classify_AB(phi, *lat);
  detail::require_single_band(phi, *lat, phi00);
  gate_extension(phi, phi_z, Lpsi, *lat, tol, out.residuals);
  const auto ps = solve_psi0(phi, phi_z, Lpsi, lat, degree, tol);
  out.residuals["psi0_split"] = ps.split_spread;
  out.data = {lat, phi, ps.psi0, phi_z, psi_z, c, phi00, json::object()};
  out.data.provenance = {{"source", "class-a"},
                         {"variant", p.c_of_x ? "C(x)" : "D(y)"},
                         {"zeta", p.zeta_text},
                         {p.c_of_x ? "C" : "D", p.D_text}};
  try {
    out.metric = slice_metric2(phi, phi_z, lat.get());
    out.has_metric = true;
    out.residuals["curvature"] = interior_sup(gauss_curvature(out.metric, lat.get()) + 1.0, *lat);
  } catch (const MetricError&) {
    out.has_metric = false;  // degenerate slice metric (phi_xz or phi_yz vanishes somewhere)
  }
  for (const auto& [key, v] : initial_residuals(out.data)) out.residuals[key] = v;
  return out;
}

struct ClassBParams {
  Univariate zeta;  // of x
  Univariate eta;   // of y
  ScalarField phi0;
  ScalarField S, T;  // optional certificates; pinned from phi0 when empty
  std::string zeta_text, eta_text;
};

struct ClassBCertificates {
  ScalarField S, T;
  double pin_residual = 0.0;
};

// S_x = phi_x L(phi), T_y = phi_y L(phi), L(phi) = S cot(phi) - T tan(phi): S and T are fixed up to
// s(y), t(x); these follow from the identity on the axes, leaving one constant set by least squares
inline ClassBCertificates pin_S_T(const ScalarField& phi0, const LatticePtr& lat, int degree = kDefaultJetDegree) {
  const ScalarField px = phi0.dx(), py = phi0.dy(), Lphi = Lop(phi0);
  const ScalarField S0 = antiderivative(px * Lphi, lat, 0, degree);
  const ScalarField T0 = antiderivative(py * Lphi, lat, 1, degree);
  const ScalarField tn = tan(phi0), ct = cot(phi0);
  const double t0 = tn.value_at({0.0, 0.0, 0.0});
  const double L0 = Lphi.value_at({0.0, 0.0, 0.0});
  const ScalarField sa = line_function(tn * (Lphi + T0 * tn), lat, 1, degree);
  const ScalarField sb = line_function(tn * tn, lat, 1, degree);
  const ScalarField ta = line_function(ct * (S0 * ct - Lphi), lat, 0, degree);
  const ScalarField tb = line_function(ct * ct, lat, 0, degree);
  const double u0 = t0 * L0, u1 = t0 * t0;
  const ScalarField r0 = (S0 + sa) * ct - (T0 + ta + u0 * tb) * tn - Lphi;
  const ScalarField r1 = sb * ct - u1 * tb * tn;
  const auto v0 = r0.values_on(*lat), v1 = r1.values_on(*lat);
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < v0.size(); ++t) {
    num += v0[t] * v1[t];
    den += v1[t] * v1[t];
  }
  double scale = 0.0;
  for (double v : v1) scale = std::max(scale, std::abs(v));
  if (!(den > 1e-20 * std::max(1.0, scale * scale) * v1.size()))
    throw InadmissibleError("S_T_pinning", den, "the S, T pinning system is singular");
  const double v = -num / den, u = u0 + v * u1;
  ClassBCertificates r;
  r.S = S0 + sa + v * sb;
  r.T = T0 + ta + u * tb;
  r.pin_residual = interior_sup(r.S * ct - r.T * tn - Lphi, *lat);
  return r;
}

// class B certified by zeta(x), eta(y), S, T
inline Construction class_b_build(const ClassBParams& p, double c, const LatticePtr& lat,
                                  int degree = kDefaultJetDegree, double tol = kClosedFormTol) {
  if (c == 0.0) throw std::invalid_argument("class B: c must be nonzero");
  const ScalarField phi = as_jets(p.phi0, lat, degree);
  const ScalarField zeta = as_jets(detail::univariate_field(p.zeta, 0), lat, degree);
  const ScalarField eta = as_jets(detail::univariate_field(p.eta, 1), lat, degree);
  const ScalarField s = sin(phi), co = cos(phi);
  const ScalarField w = zeta * s * s - eta * co * co;  // (phi_z1)^2
  Construction out;
  {
    double mn = std::numeric_limits<double>::infinity();
    for (double v : w.values_on(*lat)) mn = std::min(mn, v);
    if (!(mn > 0.0)) throw InadmissibleError("phi_z1_squared", mn, "zeta sin^2 phi - eta cos^2 phi must be positive");
  }
  const ScalarField px = phi.dx(), py = phi.dy(), Lphi = Lop(phi);
  const ScalarField ze = zeta + eta;
  out.metric.A = -(zeta.dx() * s + 2.0 * ze * px * co) / (2.0 * w);
  out.metric.B = (-eta.dy() * co + 2.0 * ze * py * s) / (2.0 * w);
  out.has_metric = true;
  const double cond1 =
      interior_sup(ze * phi.dx().dy() + 0.5 * (eta.dy() * px + zeta.dx() * py) + out.metric.A * out.metric.B * w, *lat);
  out.residuals["class_b_mixed"] = cond1;
  if (!(cond1 <= tol)) throw InadmissibleError("class_b_mixed", cond1, "class B mixed-derivative condition fails");
  ScalarField S = p.S, T = p.T;
  if (S.empty() || T.empty()) {
    auto pin = pin_S_T(phi, lat, degree);
    S = pin.S;
    T = pin.T;
  }
  const double c2x = interior_sup(S.dx() - px * Lphi, *lat);
  const double c2y = interior_sup(T.dy() - py * Lphi, *lat);
  const double c2 = interior_sup(Lphi - (S * co / s - T * s / co), *lat);
  out.residuals["class_b_S_x"] = c2x;
  out.residuals["class_b_T_y"] = c2y;
  out.residuals["class_b_S_T"] = c2;
  if (!(std::max({c2x, c2y, c2}) <= tol))
    throw InadmissibleError("class_b_S_T", std::max({c2x, c2y, c2}), "class B S, T condition fails");
  out.residuals["curvature"] = interior_sup(gauss_curvature(out.metric, lat.get()) + 1.0, *lat);
  const ScalarField phi_z1 = sqrt(w);
  const ScalarField phi_z = c * phi_z1;
  const auto qz = solve_psi_z(phi, phi_z, lat, degree, tol);
  out.residuals["closedness_psi_z"] = qz.closedness;
  out.split.P = 0.5 * ze;
  out.split.Q = S + T;
  out.Lpsi = c * c * out.split.P + out.split.Q;
  out.split.Lpsi = out.Lpsi;
  out.classification = classify_AB(phi, *lat);
  gate_extension(phi, phi_z, out.Lpsi, *lat, tol, out.residuals);
  const auto ps = solve_psi0(phi, phi_z, out.Lpsi, lat, degree, tol);
  out.residuals["psi0_split"] = ps.split_spread;
  const double lambda = phi.value_at({0.0, 0.0, 0.0});
  out.data = {lat, phi, ps.psi0, phi_z, qz.psi_z, c, lambda, json::object()};
  out.data.provenance = {{"source", "class-b"}, {"zeta", p.zeta_text}, {"eta", p.eta_text}};
  for (const auto& [k, v] : initial_residuals(out.data)) out.residuals[k] = v;
  return out;
}

// ---- bundles ----

inline json residuals_to_json(const ResidualMap& r) {
  json j = json::object();
  for (const auto& [k, v] : r) j[k] = v;
  return j;
}

// grid descriptor, four field arrays (with jets when the field carries them), c, lambda, provenance
inline json bundle_to_json(const InitialData& d, int jet_degree = -1) {
  auto emit = [&](const ScalarField& f) {
    if (jet_degree < 0) return field_to_json(f, d.lattice, true);
    return field_to_json(as_jets(f, d.lattice, jet_degree), d.lattice, true);
  };
  json j;
  j["grid"] = lattice_to_json(*d.lattice);
  j["c"] = d.c;
  j["lambda"] = d.lambda;
  j["provenance"] = d.provenance;
  j["fields"] = {{"phi", emit(d.phi0)}, {"psi", emit(d.psi0)}, {"phi_z", emit(d.phi_z0)}, {"psi_z", emit(d.psi_z0)}};
  return j;
}

inline InitialData bundle_from_json(const json& j) {
  try {
    InitialData d;
    d.lattice = lattice_from_json(j.at("grid"));
    d.c = j.at("c").get<double>();
    d.lambda = j.at("lambda").get<double>();
    d.provenance = j.value("provenance", json::object());
    const auto& f = j.at("fields");
    d.phi0 = field_from_json(f.at("phi"));
    d.psi0 = field_from_json(f.at("psi"));
    d.phi_z0 = field_from_json(f.at("phi_z"));
    d.psi_z0 = field_from_json(f.at("psi_z"));
    for (const ScalarField* g : {&d.phi0, &d.psi0, &d.phi_z0, &d.psi_z0})
      if (!g->lattice()->same_as(*d.lattice)) throw IoError("bundle: field grid differs from bundle grid");
    return d;
  } catch (const json::exception& e) {
    throw IoError(std::string("bundle: ") + e.what());
  }
}

}  // namespace guichard
