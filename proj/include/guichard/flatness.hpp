#pragma once

// Conformal flatness of g = cos^2 phi dx^2 + sin^2 phi dy^2 + dz^2: the four third-order
// residuals in phi, the closedness of the forms alpha and beta, and the four equations
// relating phi and psi.

#include <array>
#include <string>
#include <vector>

#include "evolution.hpp"

namespace guichard {

class FlatnessError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// g = l1^2 dx^2 + l2^2 dy^2 + l3^2 dz^2; l1^2 + l2^2 = l3^2 holds by construction
struct GuichardField3 {
  ScalarField phi, psi;  // arity 3; psi may be empty

  ScalarField l1() const { return cos(phi); }
  ScalarField l2() const { return sin(phi); }
  ScalarField l3() const { return ScalarField::constant(3, 1.0); }
};

inline constexpr double kSin2PhiFloor = 1e-8;

namespace detail {
inline ScalarField L3(const ScalarField& f) { return f.dx(2) - f.dy(2); }
}  // namespace detail

inline std::array<ScalarField, 4> conformal_flatness_residuals(const GuichardField3& f) {
  const ScalarField& p = f.phi;
  const ScalarField px = p.dx(), py = p.dy(), pz = p.dz();
  const ScalarField pxz = px.dz(), pyz = py.dz(), pzz = pz.dz();
  const ScalarField s = sin(p), c = cos(p), t = s / c, ct = c / s;
  const ScalarField s2 = sin(2.0 * p), c2 = cos(2.0 * p);
  const ScalarField Lp = detail::L3(p);
  const ScalarField q = (Lp * c2 - pzz) / s2;
  return {
      pxz.dy() + px * pyz * t - py * pxz * ct,
      0.5 * (px.dx(2) - px.dy(2) + px.dz(2)) - q * px - pxz * pz * ct,
      0.5 * (py.dx(2) - py.dy(2) - py.dz(2)) - q * py - pyz * pz * t,
      0.5 * (pz.dx(2) + pz.dy(2) + pz.dz(2)) + (Lp - pzz * c2) / s2 * pz - px * pxz * ct + py * pyz * t,
  };
}

struct Forms {
  std::array<ScalarField, 3> alpha;  // dx, dy, dz coefficients
  std::array<ScalarField, 3> beta;   // dy^dz, dz^dx, dx^dy coefficients
};

inline Forms forms_alpha_beta(const GuichardField3& f) {
  const ScalarField& p = f.phi;
  const ScalarField pxz = p.dx().dz(), pyz = p.dy().dz(), pzz = p.dz(2);
  const ScalarField s = sin(p), c = cos(p), t = s / c, ct = c / s;
  const ScalarField s2 = sin(2.0 * p), c2 = cos(2.0 * p);
  const ScalarField Lp = detail::L3(p);
  return {{-pxz * ct, pyz * t, (Lp - pzz * c2) / s2}, {pxz * ct, pyz * t, -(Lp * c2 - pzz) / s2}};
}

// alpha = d(psi_z), beta = d(psi_y dx + psi_x dy)
inline Forms forms_from_psi(const GuichardField3& f) {
  const ScalarField& q = f.psi;
  const ScalarField qz = q.dz();
  return {{qz.dx(), qz.dy(), qz.dz()}, {-qz.dx(), qz.dy(), detail::L3(q)}};
}

inline std::array<ScalarField, 4> phi_psi_residuals(const GuichardField3& f) {
  if (f.psi.empty()) throw std::invalid_argument("phi_psi_residuals: psi is required");
  const ScalarField& p = f.phi;
  const ScalarField& q = f.psi;
  const ScalarField s = sin(p), c = cos(p);
  const ScalarField Lp = detail::L3(p), Lq = detail::L3(q);
  const ScalarField s2 = sin(2.0 * p), c2 = cos(2.0 * p);
  return {q.dx().dz() + p.dx().dz() * c / s, q.dy().dz() - p.dy().dz() * s / c, q.dz(2) - Lp * s2 + Lq * c2,
          p.dz(2) - Lp * c2 - Lq * s2};
}

// d/dz [psi_zz] - d/dz [-Laplacian(psi) + phi_x^2 + phi_y^2 + phi_z^2]
inline ScalarField psi_zzz_residual(const GuichardField3& f) {
  const ScalarField& p = f.phi;
  const ScalarField& q = f.psi;
  const ScalarField px = p.dx(), py = p.dy(), pz = p.dz();
  const ScalarField rhs_z = -(q.dx(2).dz() + q.dy(2).dz()) + 2.0 * (px * px.dz() + py * py.dz() + pz * pz.dz());
  return q.dz(3) - rhs_z;
}

struct FlatnessReport {
  std::array<double, 4> phi_eqs{};
  std::array<double, 3> d_alpha{};
  double d_beta = 0.0;
  std::array<double, 4> phi_psi_eqs{};
  double psi_zzz = 0.0;
  double alpha_psi_mismatch = 0.0;  // phi-built vs psi-built alpha
  double beta_psi_mismatch = 0.0;
  double guichard = 0.0;            // sup |l1^2 + l2^2 - l3^2|
  double min_sin2phi = 0.0;
  bool has_psi = false;
  std::string region;

  double phi_eqs_max() const { return *std::max_element(phi_eqs.begin(), phi_eqs.end()); }
  double forms_max() const { return std::max(*std::max_element(d_alpha.begin(), d_alpha.end()), d_beta); }
  double phi_psi_eqs_max() const { return *std::max_element(phi_psi_eqs.begin(), phi_psi_eqs.end()); }
  bool pass(double tol) const {
    bool ok = phi_eqs_max() <= tol && forms_max() <= tol && guichard <= tol;
    if (has_psi) ok = ok && phi_psi_eqs_max() <= tol && psi_zzz <= tol;
    return ok;
  }
  std::vector<std::string> failing(double tol) const {
    std::vector<std::string> out;
    auto chk = [&](const std::string& n, double v) {
      if (!(v <= tol)) out.push_back(n);
    };
    for (int k = 0; k < 4; ++k) chk("phi_eq_" + std::to_string(k + 1), phi_eqs[k]);
    const char* da[3] = {"d_alpha_yz", "d_alpha_zx", "d_alpha_xy"};
    for (int k = 0; k < 3; ++k) chk(da[k], d_alpha[k]);
    chk("d_beta", d_beta);
    if (has_psi) {
      for (int k = 0; k < 4; ++k) chk("phi_psi_eq_" + std::to_string(k + 1), phi_psi_eqs[k]);
      chk("psi_zzz", psi_zzz);
    }
    chk("guichard", guichard);
    return out;
  }
};

inline json report_to_json(const FlatnessReport& r, double tol) {
  json j;
  j["region"] = r.region;
  j["phi_eqs"] = r.phi_eqs;
  j["d_alpha"] = r.d_alpha;
  j["d_beta"] = r.d_beta;
  j["guichard"] = r.guichard;
  j["min_sin2phi"] = r.min_sin2phi;
  if (r.has_psi) {
    j["phi_psi_eqs"] = r.phi_psi_eqs;
    j["psi_zzz"] = r.psi_zzz;
    j["alpha_psi_mismatch"] = r.alpha_psi_mismatch;
    j["beta_psi_mismatch"] = r.beta_psi_mismatch;
  }
  j["tolerance"] = tol;
  j["pass"] = r.pass(tol);
  j["failing"] = r.failing(tol);
  return j;
}

namespace detail {

using Sampler = std::function<double(const ScalarField&)>;

inline FlatnessReport assemble(const GuichardField3& f, const Sampler& sup, const Sampler& min_abs_of, std::string region) {
  FlatnessReport r;
  r.region = std::move(region);
  r.min_sin2phi = min_abs_of(sin(2.0 * f.phi));
  if (!(r.min_sin2phi > kSin2PhiFloor)) throw FlatnessError("flatness: sin 2phi vanishes on the region");
  const auto p11 = conformal_flatness_residuals(f);
  for (int k = 0; k < 4; ++k) r.phi_eqs[k] = sup(p11[k]);
  const Forms fm = forms_alpha_beta(f);
  const auto w = wedge_residuals(fm.alpha, fm.beta);
  for (int k = 0; k < 3; ++k) r.d_alpha[k] = sup(w.d_alpha[k]);
  r.d_beta = sup(w.d_beta);
  r.guichard = sup(square(f.l1()) + square(f.l2()) - 1.0);
  if (!f.psi.empty()) {
    r.has_psi = true;
    const auto t1 = phi_psi_residuals(f);
    for (int k = 0; k < 4; ++k) r.phi_psi_eqs[k] = sup(t1[k]);
    r.psi_zzz = sup(psi_zzz_residual(f));
    const Forms fp = forms_from_psi(f);
    for (int k = 0; k < 3; ++k) {
      r.alpha_psi_mismatch = std::max(r.alpha_psi_mismatch, sup(fm.alpha[k] - fp.alpha[k]));
      r.beta_psi_mismatch = std::max(r.beta_psi_mismatch, sup(fm.beta[k] - fp.beta[k]));
    }
  }
  return r;
}

}  // namespace detail

// closed-form fields at sample points
inline FlatnessReport flatness_report(const GuichardField3& f, const std::vector<Point>& pts) {
  auto sup = [&](const ScalarField& g) { return sup_norm(g, pts); };
  auto mn = [&](const ScalarField& g) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) m = std::min(m, std::abs(g.value_at(p)));
    return m;
  };
  return detail::assemble(f, sup, mn, std::to_string(pts.size()) + " sample points");
}

// fields on an arity-3 lattice (typically a slice), away from `layers` boundary layers
inline FlatnessReport flatness_report(const GuichardField3& f, const Lattice& lat3, int layers = 0) {
  auto sup = [&](const ScalarField& g) { return sup_norm(g, lat3, layers); };
  auto mn = [&](const ScalarField& g) { return min_abs(g, lat3, layers); };
  return detail::assemble(f, sup, mn, "lattice nodes, " + std::to_string(layers) + " boundary layers excluded");
}

// one evolution state, with the z-derivatives beyond the first taken from the evolution equations
inline FlatnessReport flatness_report(const State& st, int layers = 0) {
  const auto [p3, q3] = lift_to_3d(st, 3);
  return flatness_report(GuichardField3{p3, q3}, *p3.lattice(), layers);
}

struct TrajectoryVerification {
  std::vector<double> z;
  std::vector<FlatnessReport> reports;
  double tolerance = 0.0;

  bool pass() const {
    for (const auto& r : reports)
      if (!r.pass(tolerance)) return false;
    return !reports.empty();
  }
};

inline TrajectoryVerification verify_trajectory(const Trajectory& tr, double tol = 1e-6) {
  if (tr.levels.size() < 3) throw std::invalid_argument("verify: trajectory needs at least 3 levels");
  TrajectoryVerification v;
  v.tolerance = tol;
  for (const auto& l : tr.levels) {
    if (!l.state) continue;
    State st = *l.state;
    if (st.phi.rep() == Rep::jets) st = detail::diagnostic_view(st);
    v.z.push_back(l.z);
    v.reports.push_back(flatness_report(st, tr.interior_layers(l.z)));
  }
  if (v.reports.empty()) throw std::invalid_argument("verify: trajectory stores no full-state levels");
  return v;
}

inline json verification_to_json(const TrajectoryVerification& v) {
  json levels = json::array();
  for (std::size_t i = 0; i < v.reports.size(); ++i) {
    json r = report_to_json(v.reports[i], v.tolerance);
    r["z"] = v.z[i];
    levels.push_back(r);
  }
  return {{"pass", v.pass()}, {"tolerance", v.tolerance}, {"levels", levels}};
}

}  // namespace guichard
