#pragma once

// z-evolution of (phi, psi) from slice data:
//   psi_zz = L(phi) sin 2phi - L(psi) cos 2phi,   phi_zz = L(phi) cos 2phi + L(psi) sin 2phi,
// with L = d_xx - d_yy, plus the four monitors and their transport law.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "initial_data.hpp"

namespace guichard {

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scheme { rk4, taylor };
// jets: every node carries a spatial Taylor jet, so L acts exactly at the node;
// grid: node values with finite differences, re-gridded at each stage
enum class SpaceMode { jets, grid };

inline std::string to_string(Scheme s) { return s == Scheme::rk4 ? "rk4" : "taylor"; }
inline std::string to_string(SpaceMode m) { return m == SpaceMode::jets ? "jets" : "grid"; }

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "rk4") return Scheme::rk4;
  if (s == "taylor") return Scheme::taylor;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}
inline SpaceMode space_from_string(const std::string& s) {
  if (s == "jets") return SpaceMode::jets;
  if (s == "grid") return SpaceMode::grid;
  throw std::invalid_argument("unknown space mode '" + s + "'");
}

// exponential low-pass filter exp(-strength * eta^(2 order)) above cutoff, applied in a cosine basis per line
struct FilterConfig {
  bool enabled = false;
  double strength = 36.0;
  int order = 8;
  double cutoff = 0.5;
};

struct EvolutionConfig {
  double z_max = 0.05;
  int steps = 50;
  Scheme scheme = Scheme::rk4;
  int taylor_order = 6;
  SpaceMode space = SpaceMode::jets;
  int jet_degree = 8;
  std::optional<FilterConfig> filter;  // unset: off
  double max_abs_z = 0.25;
  double tripwire = 1e3;
  bool gate = true;
  double gate_tol = -1.0;  // negative: representation default
  int snapshot_every = 0;  // full-state snapshots; 0 keeps only the first and last level

  void validate() const {
    if (steps < 1) throw std::invalid_argument("evolution: steps must be >= 1");
    if (!(std::abs(z_max) > 0.0)) throw std::invalid_argument("evolution: z_max must be nonzero");
    if (std::abs(z_max) > max_abs_z) throw std::invalid_argument("evolution: |z_max| exceeds the configured cap");
    if (taylor_order < 2 || taylor_order > 20) throw std::invalid_argument("evolution: taylor order must be in [2, 20]");
    if (jet_degree < 4 || jet_degree > JetLayout::get(2).max_degree())
      throw std::invalid_argument("evolution: jet degree out of range");
    if (!(tripwire > 0.0)) throw std::invalid_argument("evolution: tripwire must be positive");
    if (snapshot_every < 0) throw std::invalid_argument("evolution: snapshot_every must be >= 0");
  }
  FilterConfig effective_filter() const {
    if (filter) return *filter;
    FilterConfig f;
    f.enabled = false;  // opt-in: on this patch the unfiltered grid scheme stays at round-off
    return f;
  }
};

inline json config_to_json(const EvolutionConfig& c) {
  const auto f = c.effective_filter();
  return {{"z_max", c.z_max},
          {"steps", c.steps},
          {"scheme", to_string(c.scheme)},
          {"taylor_order", c.taylor_order},
          {"space", to_string(c.space)},
          {"jet_degree", c.jet_degree},
          {"filter", {{"enabled", f.enabled}, {"strength", f.strength}, {"order", f.order}, {"cutoff", f.cutoff}}},
          {"max_abs_z", c.max_abs_z},
          {"tripwire", c.tripwire},
          {"gate", c.gate}};
}

struct State {
  double z = 0.0;
  ScalarField phi, psi, phi_z, psi_z;
};

struct Monitors {
  ScalarField Ix, Iy, J, K;
};

inline ScalarField L_op(const ScalarField& f) { return f.dx(2) - f.dy(2); }

namespace detail {

inline ScalarField fresh(const ScalarField& f) {
  if (f.rep() != Rep::grid) return f;
  return ScalarField::grid(f.lattice(), std::vector<double>(f.data().begin(), f.data().end()), 0);
}

// bring a result back to the working representation of degree D (jets) or budget 0 (grid)
inline ScalarField normalize(const ScalarField& f, const LatticePtr& lat, SpaceMode mode, int D) {
  if (mode == SpaceMode::grid) return f.rep() == Rep::grid ? fresh(f) : f.to_grid(lat);
  if (f.is_closed_form()) return f.to_jets(lat, D);
  if (f.rep() == Rep::grid) throw std::invalid_argument("evolution: grid data cannot seed jets mode");
  return f.degree() >= D ? f.to_jets(lat, D) : f.padded(D);
}

}  // namespace detail

// (phi_zz, psi_zz)
inline std::pair<ScalarField, ScalarField> evolution_rhs(const ScalarField& phi, const ScalarField& psi) {
  const ScalarField p = detail::fresh(phi), q = detail::fresh(psi);
  const ScalarField Lp = L_op(p), Lq = L_op(q);
  const auto [s, c] = sincos(2.0 * p);
  return {Lp * c + Lq * s, Lp * s - Lq * c};
}

// (phi_zzz, psi_zzz) by differentiating the right-hand side along z
inline std::pair<ScalarField, ScalarField> evolution_rhs_z(const ScalarField& phi, const ScalarField& psi,
                                                           const ScalarField& phi_z, const ScalarField& psi_z) {
  const ScalarField p = detail::fresh(phi), q = detail::fresh(psi), pz = detail::fresh(phi_z), qz = detail::fresh(psi_z);
  const ScalarField Lp = L_op(p), Lq = L_op(q), Lpz = L_op(pz), Lqz = L_op(qz);
  const auto [s, c] = sincos(2.0 * p);
  return {Lpz * c - 2.0 * Lp * s * pz + Lqz * s + 2.0 * Lq * c * pz,
          Lpz * s + 2.0 * Lp * c * pz - Lqz * c + 2.0 * Lq * s * pz};
}

inline Monitors monitors(const State& st) {
  const ScalarField p = detail::fresh(st.phi), q = detail::fresh(st.psi);
  const ScalarField pz = detail::fresh(st.phi_z), qz = detail::fresh(st.psi_z);
  const ScalarField px = p.dx(), py = p.dy();
  const ScalarField s = sin(p), c = cos(p);
  Monitors m;
  m.Ix = qz.dx() + pz.dx() * c / s;
  m.Iy = qz.dy() - pz.dy() * s / c;
  m.J = q.dx().dy() - px * py;
  m.K = L_op(p) * sin(2.0 * p) - L_op(q) * cos(2.0 * p) + q.dx(2) + q.dy(2) - px * px - py * py - pz * pz;
  return m;
}

// z-derivatives of the monitors predicted by the transport law
inline Monitors monitor_transport(const Monitors& m, const ScalarField& phi) {
  const ScalarField s2 = square(sin(phi)), c2 = square(cos(phi));
  const Monitors f{detail::fresh(m.Ix), detail::fresh(m.Iy), detail::fresh(m.J), detail::fresh(m.K)};
  Monitors r;
  r.Ix = (-f.J.dy() + 0.5 * f.K.dx()) / s2;
  r.Iy = (-f.J.dx() + 0.5 * f.K.dy()) / c2;
  r.J = s2 * f.Ix.dy() + c2 * f.Iy.dx();
  r.K = 2.0 * s2 * f.Ix.dx() + 2.0 * c2 * f.Iy.dy();
  return r;
}

// arity-3 jets on the slice z = st.z, using the evolution equations for the z-derivatives beyond the first
inline std::pair<ScalarField, ScalarField> lift_to_3d(const State& st, int degree = 3) {
  LatticePtr lat;
  for (const ScalarField* f : {&st.phi, &st.psi, &st.phi_z, &st.psi_z})
    if (!f->is_closed_form()) lat = f->lattice();
  if (!lat) throw std::invalid_argument("lift_to_3d: an all closed-form state has no lattice");
  const auto [pzz, qzz] = evolution_rhs(st.phi, st.psi);
  const auto [pzzz, qzzz] = evolution_rhs_z(st.phi, st.psi, st.phi_z, st.psi_z);
  return {from_z_stack({st.phi, st.phi_z, pzz, pzzz}, lat, st.z, degree),
          from_z_stack({st.psi, st.psi_z, qzz, qzzz}, lat, st.z, degree)};
}

// ---- spectral filter ----

// Each line is split as f = P + r, with P a quintic matching the first and third derivatives of f
// at both ends; the even extension of r is then smooth through five derivatives and only r is filtered.
inline void filter_lines(std::vector<double>& v, const Lattice& lat, const FilterConfig& f) {
  for (int axis = 0; axis < 2; ++axis) {
    const int n = lat.n(axis), m = lat.n(1 - axis);
    if (n < 2) continue;
    const int N = n - 1;
    const auto& st1 = lat.stencils(axis, 1);
    const auto& st3 = lat.stencils(axis, 3);
    std::vector<double> line(n), coef(n), poly(n);
    fftw_plan fwd = fftw_plan_r2r_1d(n, line.data(), coef.data(), FFTW_REDFT00, FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_r2r_1d(n, coef.data(), line.data(), FFTW_REDFT00, FFTW_ESTIMATE);
    std::vector<double> sigma(n, 1.0);
    for (int k = 0; k < n; ++k) {
      const double eta = static_cast<double>(k) / N;
      if (eta > f.cutoff) sigma[k] = std::exp(-f.strength * std::pow((eta - f.cutoff) / (1.0 - f.cutoff), 2 * f.order));
    }
    auto index_derivative = [&](const std::vector<Stencil>& st, int i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < st[i].w.size(); ++k) acc += st[i].w[k] * line[st[i].start + static_cast<int>(k)];
      return acc;
    };
    const std::size_t stride = lat.stride(axis);
    for (int j = 0; j < m; ++j) {
      const std::size_t base = axis == 0 ? lat.flat(0, j) : lat.flat(j, 0);
      for (int i = 0; i < n; ++i) line[i] = v[base + i * stride];
      // derivatives in t = i / N
      const double N3 = static_cast<double>(N) * N * N;
      const double d1a = N * index_derivative(st1, 0), d1b = N * index_derivative(st1, N);
      const double d3a = N3 * index_derivative(st3, 0), d3b = N3 * index_derivative(st3, N);
      const double a1 = d1a, a3 = d3a / 6.0;
      const double r1 = d1b - a1 - 3.0 * a3, r2 = d3b - 6.0 * a3;
      const double a5 = (r2 - 6.0 * r1) / 30.0, a4 = (r1 - 5.0 * a5) / 4.0;
      for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / N;
        poly[i] = t * (a1 + t * t * (a3 + t * (a4 + t * a5)));
        line[i] -= poly[i];
      }
      fftw_execute(fwd);
      for (int k = 0; k < n; ++k) coef[k] *= sigma[k] / (2.0 * N);
      fftw_execute(bwd);
      for (int i = 0; i < n; ++i) v[base + i * stride] = line[i] + poly[i];
    }
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
}

inline ScalarField filtered(const ScalarField& f, const FilterConfig& cfg) {
  if (!cfg.enabled || f.rep() != Rep::grid) return f;
  std::vector<double> v(f.data().begin(), f.data().end());
  filter_lines(v, *f.lattice(), cfg);
  return ScalarField::grid(f.lattice(), std::move(v), 0);
}

// ---- trajectory ----

struct LevelRecord {
  double z = 0.0;
  std::vector<double> phi, psi, phi_z, psi_z;  // node values
  std::array<std::vector<double>, 4> monitor;  // Ix, Iy, J, K at the nodes
  std::array<std::vector<double>, 4> transport;  // transport-law prediction of their z-derivatives
  std::array<double, 4> monitor_sup{};
  double slice_curvature = std::numeric_limits<double>::quiet_NaN();  // sup |K(g_hat(z)) + 1|
  double trig_identity = 0.0;                                          // sup |cos^2 + sin^2 - 1|
  std::optional<State> state;                                          // full state when snapshotted
};

struct Trajectory {
  LatticePtr lattice;
  EvolutionConfig config;
  double c = 1.0;
  std::vector<LevelRecord> levels;
  bool aborted = false;
  std::string abort_reason;
  ResidualMap gate;
  json provenance = json::object();

  int interior_layers(double z) const {
    if (config.space == SpaceMode::jets) return 0;
    const double h = std::min(lattice->spacing(0), lattice->spacing(1));
    return lattice->margin() + static_cast<int>(std::ceil(std::abs(z) / h));
  }
  const State& final_state() const {
    for (auto it = levels.rbegin(); it != levels.rend(); ++it)
      if (it->state) return *it->state;
    throw std::logic_error("trajectory: no stored state");
  }
};

inline std::array<double, 4> monitor_sups(const LevelRecord& r, const Lattice& lat, int layers) {
  std::array<double, 4> s{};
  for (int k = 0; k < 4; ++k)
    for (std::size_t t = 0; t < r.monitor[k].size(); ++t)
      if (lat.interior(t, layers)) s[k] = std::max(s[k], std::abs(r.monitor[k][t]));
  return s;
}

namespace detail {

inline double sup_interior(const std::vector<double>& v, const Lattice& lat, int layers) {
  double m = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t)
    if (lat.interior(t, layers)) {
      if (!std::isfinite(v[t])) return std::numeric_limits<double>::infinity();
      m = std::max(m, std::abs(v[t]));
    }
  return m;
}

// monitors, their transport and the slice curvature need at most three derivatives
inline constexpr int kDiagnosticDegree = 4;

inline State diagnostic_view(const State& st) {
  if (st.phi.rep() != Rep::jets) return st;
  auto cut = [](const ScalarField& f) { return f.degree() > kDiagnosticDegree ? f.to_jets(f.lattice(), kDiagnosticDegree) : f; };
  return {st.z, cut(st.phi), cut(st.psi), cut(st.phi_z), cut(st.psi_z)};
}

inline LevelRecord record_level(const State& full, const Trajectory& tr, bool keep_state) {
  const State st = diagnostic_view(full);
  const Lattice& lat = *tr.lattice;
  const int layers = tr.interior_layers(st.z);
  LevelRecord r;
  r.z = st.z;
  r.phi = st.phi.values_on(lat);
  r.psi = st.psi.values_on(lat);
  r.phi_z = st.phi_z.values_on(lat);
  r.psi_z = st.psi_z.values_on(lat);
  const Monitors m = monitors(st);
  const Monitors tm = monitor_transport(m, st.phi);
  const ScalarField* ms[4] = {&m.Ix, &m.Iy, &m.J, &m.K};
  const ScalarField* ts[4] = {&tm.Ix, &tm.Iy, &tm.J, &tm.K};
  for (int k = 0; k < 4; ++k) {
    r.monitor[k] = ms[k]->values_on(lat);
    r.transport[k] = ts[k]->values_on(lat);
  }
  r.monitor_sup = monitor_sups(r, lat, layers);
  for (double p : r.phi) r.trig_identity = std::max(r.trig_identity, std::abs(std::cos(p) * std::cos(p) + std::sin(p) * std::sin(p) - 1.0));
  try {
    const auto g = slice_metric2(fresh(st.phi), fresh(st.phi_z), &lat);
    r.slice_curvature = sup_interior((gauss_curvature(g, &lat) + 1.0).values_on(lat), lat, layers);
  } catch (const MetricError&) {
    r.slice_curvature = std::numeric_limits<double>::quiet_NaN();  // degenerate slice metric
  }
  if (keep_state) r.state = full;
  return r;
}

inline State axpy(const State& a, double h, const std::array<ScalarField, 4>& k, const LatticePtr& lat, SpaceMode mode,
                  int D) {
  State r;
  r.z = a.z + h;
  r.phi = normalize(a.phi + h * k[0], lat, mode, D);
  r.psi = normalize(a.psi + h * k[1], lat, mode, D);
  r.phi_z = normalize(a.phi_z + h * k[2], lat, mode, D);
  r.psi_z = normalize(a.psi_z + h * k[3], lat, mode, D);
  return r;
}

inline std::array<ScalarField, 4> derivative(const State& s, const LatticePtr& lat, SpaceMode mode, int D) {
  auto [pzz, qzz] = evolution_rhs(s.phi, s.psi);
  return {s.phi_z, s.psi_z, normalize(pzz, lat, mode, D), normalize(qzz, lat, mode, D)};
}

inline State rk4_step(const State& s, double h, const LatticePtr& lat, SpaceMode mode, int D) {
  const auto k1 = derivative(s, lat, mode, D);
  const auto k2 = derivative(axpy(s, h / 2, k1, lat, mode, D), lat, mode, D);
  const auto k3 = derivative(axpy(s, h / 2, k2, lat, mode, D), lat, mode, D);
  const auto k4 = derivative(axpy(s, h, k3, lat, mode, D), lat, mode, D);
  std::array<ScalarField, 4> k;
  for (int i = 0; i < 4; ++i) k[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
  return axpy(s, h, k, lat, mode, D);
}

// Taylor series in z: p_{k+2} = [L(p) cos 2p + L(q) sin 2p]_k / ((k+1)(k+2)), likewise for q
inline State taylor_step(const State& s, double h, int order, const LatticePtr& lat, SpaceMode mode, int D) {
  std::vector<ScalarField> p{s.phi, s.phi_z}, q{s.psi, s.psi_z};
  std::vector<ScalarField> Lp, Lq, sn, cs;
  for (int k = 0; k + 2 <= order; ++k) {
    Lp.push_back(normalize(L_op(fresh(p[k])), lat, mode, D));
    Lq.push_back(normalize(L_op(fresh(q[k])), lat, mode, D));
    if (k == 0) {
      const auto [s0, c0] = sincos(2.0 * p[0]);
      sn.push_back(normalize(s0, lat, mode, D));
      cs.push_back(normalize(c0, lat, mode, D));
    } else {
      ScalarField a = ScalarField::constant(2, 0.0), b = ScalarField::constant(2, 0.0);
      for (int j = 1; j <= k; ++j) {
        const ScalarField uj = (2.0 * j) * p[j];
        a = a + uj * cs[k - j];
        b = b + uj * sn[k - j];
      }
      sn.push_back(normalize(a / k, lat, mode, D));
      cs.push_back(normalize(-b / k, lat, mode, D));
    }
    ScalarField rp = ScalarField::constant(2, 0.0), rq = ScalarField::constant(2, 0.0);
    for (int j = 0; j <= k; ++j) {
      rp = rp + Lp[j] * cs[k - j] + Lq[j] * sn[k - j];
      rq = rq + Lp[j] * sn[k - j] - Lq[j] * cs[k - j];
    }
    const double w = 1.0 / ((k + 1.0) * (k + 2.0));
    p.push_back(normalize(w * rp, lat, mode, D));
    q.push_back(normalize(w * rq, lat, mode, D));
  }
  auto sum = [&](const std::vector<ScalarField>& c, bool deriv) {
    ScalarField acc = ScalarField::constant(2, 0.0);
    for (std::size_t k = deriv ? 1 : 0; k < c.size(); ++k)
      acc = acc + (deriv ? k * std::pow(h, k - 1.0) : std::pow(h, static_cast<double>(k))) * c[k];
    return normalize(acc, lat, mode, D);
  };
  State r;
  r.z = s.z + h;
  r.phi = sum(p, false);
  r.psi = sum(q, false);
  r.phi_z = sum(p, true);
  r.psi_z = sum(q, true);
  return r;
}

inline void check_tripwire(const State& s, const Lattice& lat, double tripwire) {
  for (const ScalarField* f : {&s.phi, &s.psi, &s.phi_z, &s.psi_z}) {
    for (double v : f->values_on(lat))
      if (!std::isfinite(v) || std::abs(v) > tripwire)
        throw InstabilityError("evolution: field magnitude exceeded the tripwire at z=" + fmt(s.z));
  }
}

}  // namespace detail

// gate residuals of the data, including the z-extension condition
inline ResidualMap gate_residuals(const InitialData& d) { return initial_residuals(d); }

inline void check_gate(const InitialData& d, double tol, ResidualMap& out) {
  out = gate_residuals(d);
  if (tol < 0) tol = tolerance_for(d.phi0, *d.lattice);
  const double scale = std::max(1.0, d.c * d.c);
  for (const auto& [k, v] : out)
    if (!(v <= tol * scale))
      throw InadmissibleError(k, v, "initial data fails the admissibility gate (" + k + " = " + fmt(v) + ")");
}

// evolve from the slice z = 0; an instability abort keeps the levels reached so far
inline Trajectory evolve(const InitialData& d, const EvolutionConfig& cfg) {
  cfg.validate();
  Trajectory tr;
  tr.lattice = d.lattice;
  tr.config = cfg;
  tr.c = d.c;
  tr.provenance = d.provenance;
  if (cfg.gate) check_gate(d, cfg.gate_tol, tr.gate);
  const LatticePtr& lat = d.lattice;
  const int D = cfg.jet_degree;
  const FilterConfig filt = cfg.effective_filter();
  State s;
  s.z = 0.0;
  s.phi = detail::normalize(d.phi0, lat, cfg.space, D);
  s.psi = detail::normalize(d.psi0, lat, cfg.space, D);
  s.phi_z = detail::normalize(d.phi_z0, lat, cfg.space, D);
  s.psi_z = detail::normalize(d.psi_z0, lat, cfg.space, D);
  const double h = cfg.z_max / cfg.steps;
  auto snap = [&](int n) { return n == 0 || n == cfg.steps || (cfg.snapshot_every > 0 && n % cfg.snapshot_every == 0); };
  tr.levels.push_back(detail::record_level(s, tr, true));
  for (int n = 1; n <= cfg.steps; ++n) {
    try {
      State next = cfg.scheme == Scheme::rk4 ? detail::rk4_step(s, h, lat, cfg.space, D)
                                             : detail::taylor_step(s, h, cfg.taylor_order, lat, cfg.space, D);
      next.z = n * h;
      if (filt.enabled && cfg.space == SpaceMode::grid) {
        next.phi = filtered(next.phi, filt);
        next.psi = filtered(next.psi, filt);
        next.phi_z = filtered(next.phi_z, filt);
        next.psi_z = filtered(next.psi_z, filt);
      }
      detail::check_tripwire(next, *lat, cfg.tripwire);
      s = std::move(next);
    } catch (const InstabilityError& e) {
      tr.aborted = true;
      tr.abort_reason = e.what();
      tr.levels.back().state = s;
      return tr;
    }
    tr.levels.push_back(detail::record_level(s, tr, snap(n)));
  }
  return tr;
}

// ---- transport-law check across levels ----

struct TransportReport {
  std::array<double, 4> residual{};  // sup |dM/dz - transport(M)| over checked levels
  std::array<double, 4> estimate{};  // combined discretization estimate
  std::array<double, 4> monitor_sup{};
  int levels_checked = 0;
};

// dM/dz by central differences across levels (4th order where 5 levels are available);
// estimate = |D2 - D4| + a round-off floor
inline TransportReport monitor_transport_residual(const Trajectory& tr) {
  TransportReport rep;
  const auto& L = tr.levels;
  const int n = static_cast<int>(L.size());
  if (n < 3) throw std::invalid_argument("transport residual: needs at least 3 levels");
  const Lattice& lat = *tr.lattice;
  for (int l = 1; l + 1 < n; ++l) {
    const double dz = L[l + 1].z - L[l].z;
    const bool five = l >= 2 && l + 2 < n;
    if (n >= 5 && !five) continue;
    const int layers = tr.interior_layers(L[std::min(l + 2, n - 1)].z);
    ++rep.levels_checked;
    for (int k = 0; k < 4; ++k) {
      double msup = 0.0;
      for (std::size_t t = 0; t < lat.size(); ++t)
        if (lat.interior(t, layers)) msup = std::max(msup, std::abs(L[l].monitor[k][t]));
      rep.monitor_sup[k] = std::max(rep.monitor_sup[k], msup);
      for (std::size_t t = 0; t < lat.size(); ++t) {
        if (!lat.interior(t, layers)) continue;
        const double d2 = (L[l + 1].monitor[k][t] - L[l - 1].monitor[k][t]) / (2.0 * dz);
        double d = d2, est = 0.0;
        if (five) {
          d = (-L[l + 2].monitor[k][t] + 8.0 * L[l + 1].monitor[k][t] - 8.0 * L[l - 1].monitor[k][t] +
               L[l - 2].monitor[k][t]) /
              (12.0 * dz);
          est = std::abs(d2 - d);
        } else {
          est = std::abs(d2);
        }
        est += 1e-12 * std::max(1.0, msup) / dz;
        rep.residual[k] = std::max(rep.residual[k], std::abs(d - L[l].transport[k][t]));
        rep.estimate[k] = std::max(rep.estimate[k], est);
      }
    }
  }
  return rep;
}

// ---- trajectory IO ----

inline std::string level_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "level_%04d", i);
  return buf;
}

inline json level_to_json(const LevelRecord& r, const LatticePtr& lat) {
  json j;
  j["z"] = r.z;
  j["values"] = {{"phi", r.phi}, {"psi", r.psi}, {"phi_z", r.phi_z}, {"psi_z", r.psi_z}};
  j["monitors"] = {{"Ix", r.monitor[0]}, {"Iy", r.monitor[1]}, {"J", r.monitor[2]}, {"K", r.monitor[3]}};
  j["transport"] = {{"Ix", r.transport[0]}, {"Iy", r.transport[1]}, {"J", r.transport[2]}, {"K", r.transport[3]}};
  j["monitor_sup"] = r.monitor_sup;
  j["slice_curvature"] = std::isnan(r.slice_curvature) ? json(nullptr) : json(r.slice_curvature);
  j["trig_identity"] = r.trig_identity;
  if (r.state) {
    j["state"] = {{"phi", field_to_json(r.state->phi, lat, true)},
                  {"psi", field_to_json(r.state->psi, lat, true)},
                  {"phi_z", field_to_json(r.state->phi_z, lat, true)},
                  {"psi_z", field_to_json(r.state->psi_z, lat, true)}};
  }
  return j;
}

inline LevelRecord level_from_json(const json& j) {
  LevelRecord r;
  r.z = j.at("z").get<double>();
  const auto& v = j.at("values");
  r.phi = v.at("phi").get<std::vector<double>>();
  r.psi = v.at("psi").get<std::vector<double>>();
  r.phi_z = v.at("phi_z").get<std::vector<double>>();
  r.psi_z = v.at("psi_z").get<std::vector<double>>();
  const char* names[4] = {"Ix", "Iy", "J", "K"};
  for (int k = 0; k < 4; ++k) {
    r.monitor[k] = j.at("monitors").at(names[k]).get<std::vector<double>>();
    r.transport[k] = j.at("transport").at(names[k]).get<std::vector<double>>();
  }
  r.monitor_sup = j.at("monitor_sup").get<std::array<double, 4>>();
  r.slice_curvature = j.at("slice_curvature").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                         : j.at("slice_curvature").get<double>();
  r.trig_identity = j.at("trig_identity").get<double>();
  if (j.contains("state")) {
    const auto& s = j.at("state");
    r.state = State{r.z, field_from_json(s.at("phi")), field_from_json(s.at("psi")), field_from_json(s.at("phi_z")),
                    field_from_json(s.at("psi_z"))};
  }
  return r;
}

inline json diagnostics_json(const Trajectory& tr) {
  json levels = json::array();
  for (std::size_t i = 0; i < tr.levels.size(); ++i) {
    const auto& r = tr.levels[i];
    levels.push_back({{"index", i},
                      {"z", r.z},
                      {"Ix", r.monitor_sup[0]},
                      {"Iy", r.monitor_sup[1]},
                      {"J", r.monitor_sup[2]},
                      {"K", r.monitor_sup[3]},
                      {"slice_curvature", std::isnan(r.slice_curvature) ? json(nullptr) : json(r.slice_curvature)},
                      {"trig_identity", r.trig_identity},
                      {"has_state", r.state.has_value()}});
  }
  json j;
  j["grid"] = lattice_to_json(*tr.lattice);
  j["config"] = config_to_json(tr.config);
  j["c"] = tr.c;
  j["aborted"] = tr.aborted;
  j["abort_reason"] = tr.abort_reason;
  j["gate"] = residuals_to_json(tr.gate);
  j["provenance"] = tr.provenance;
  j["levels"] = levels;
  if (tr.levels.size() >= 3) {
    const auto t = monitor_transport_residual(tr);
    j["transport"] = {{"residual", t.residual}, {"estimate", t.estimate}, {"monitor_sup", t.monitor_sup}};
  }
  return j;
}

inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& tr) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < tr.levels.size(); ++i) {
    const auto& r = tr.levels[i];
    write_json(dir / (level_name(static_cast<int>(i)) + ".json"), level_to_json(r, tr.lattice));
    const std::pair<const char*, const std::vector<double>*> fields[] = {
        {"phi", &r.phi}, {"psi", &r.psi}, {"phi_z", &r.phi_z}, {"psi_z", &r.psi_z}};
    for (const auto& [name, vals] : fields) {
      std::string csv = "x,y,value\n";
      for (std::size_t t = 0; t < vals->size(); ++t) {
        const Point p = tr.lattice->point(t);
        csv += fmt(p[0]) + "," + fmt(p[1]) + "," + fmt((*vals)[t]) + "\n";
      }
      write_text(dir / (level_name(static_cast<int>(i)) + "_" + name + ".csv"), csv);
    }
  }
  write_json(dir / "diagnostics.json", diagnostics_json(tr));
}

inline Trajectory read_trajectory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("trajectory: no directory " + dir.string());
  const json diag = read_json(dir / "diagnostics.json");
  Trajectory tr;
  try {
    tr.lattice = lattice_from_json(diag.at("grid"));
    const auto& c = diag.at("config");
    tr.config.z_max = c.at("z_max").get<double>();
    tr.config.steps = c.at("steps").get<int>();
    tr.config.scheme = scheme_from_string(c.at("scheme").get<std::string>());
    tr.config.taylor_order = c.at("taylor_order").get<int>();
    tr.config.space = space_from_string(c.at("space").get<std::string>());
    tr.config.jet_degree = c.at("jet_degree").get<int>();
    tr.c = diag.at("c").get<double>();
    tr.aborted = diag.at("aborted").get<bool>();
    tr.abort_reason = diag.at("abort_reason").get<std::string>();
    tr.provenance = diag.value("provenance", json::object());
    for (const auto& [k, v] : diag.at("gate").items()) tr.gate[k] = v.get<double>();
    const std::size_t n = diag.at("levels").size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto path = dir / (level_name(static_cast<int>(i)) + ".json");
      if (!std::filesystem::exists(path)) throw IoError("trajectory: missing " + path.filename().string());
      tr.levels.push_back(level_from_json(read_json(path)));
      if (tr.levels.back().phi.size() != tr.lattice->size()) throw IoError("trajectory: level size mismatch");
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("trajectory: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("trajectory: ") + e.what());
  }
  return tr;
}

}  // namespace guichard
