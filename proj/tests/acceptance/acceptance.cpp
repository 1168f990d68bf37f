// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>

#include "guichard/guichard.hpp"

using namespace guichard;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2e", v);
  return b;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + GUICHARD_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

ScalarField X2() { return ScalarField::coordinate(2, 0); }
ScalarField Y2() { return ScalarField::coordinate(2, 1); }

double max_monitor(const Trajectory& tr) {
  double m = 0.0;
  for (const auto& l : tr.levels)
    for (double v : l.monitor_sup) m = std::max(m, v);
  return m;
}

double phi_error(const Trajectory& tr, const CatalogEntry& e, std::size_t level) {
  const auto& L = tr.levels[level];
  const Lattice& lat = *tr.lattice;
  double err = 0.0;
  for (std::size_t t = 0; t < lat.size(); ++t) {
    const Point p = lat.point(t);
    err = std::max(err, std::abs(L.phi[t] - e.phi3.value_at({p[0], p[1], L.z})));
  }
  return err;
}

double final_distance(const Trajectory& a, const Trajectory& b) {
  double d = 0.0;
  for (std::size_t t = 0; t < a.levels.back().phi.size(); ++t)
    d = std::max(d, std::abs(a.levels.back().phi[t] - b.levels.back().phi[t]));
  return d;
}

EvolutionConfig rk4(double z_max, int steps) {
  EvolutionConfig c;
  c.z_max = z_max;
  c.steps = steps;
  return c;
}

// Bianchi benchmark shared by criteria 6-8
const CatalogEntry& bianchi(double c = 1.0) {
  static const CatalogEntry e1 = build_example("example5");
  static const CatalogEntry e2 = build_example("example5", {{"c", 2.0}});
  return c == 1.0 ? e1 : e2;
}

const Trajectory& bianchi_run() {
  static const Trajectory tr = [] {
    EvolutionConfig c = rk4(0.05, 50);
    c.snapshot_every = 10;
    return evolve(bianchi().initial_data(), c);
  }();
  return tr;
}

// ---- criteria ----

Outcome curvature_identities() {
  const CatalogEntry e1 = build_example("example1"), e2 = build_example("example2");
  const double k1 = sup_norm(gauss_curvature(*e1.metric) + 1.0, *e1.lattice, 0);
  const double k2 = sup_norm(gauss_curvature(*e2.metric) + 1.0, *e2.lattice, 0);
  double worst_order = 1e9;
  for (int p : {4, 6}) {
    double err[2];
    int i = 0;
    for (int n : {33, 65}) {
      const auto lat = Lattice::square(n, -0.25, 0.25, -1, p);
      const OrthogonalMetric2 g{e1.metric->A.to_grid(lat), e1.metric->B.to_grid(lat)};
      err[i++] = sup_norm(gauss_curvature(g) + 1.0, *lat, lat->margin());
    }
    worst_order = std::min(worst_order, std::log2(err[0] / err[1]) - (p - 1));
  }
  return {k1 <= 1e-10 && k2 <= 1e-10 && worst_order >= 0.0,
          "|K+1| example1 " + sci(k1) + ", example2 " + sci(k2) + "; grid order minus (p-1) " + sci(worst_order)};
}

Construction hyperbolic(double c, const LatticePtr& lat) {
  const double a = 2, b = 1;
  const ScalarField A = 1.0 / (Y2() + b);
  return construct_from_metric({A, A}, std::atan2(2 * a * b, a * a - b * b), c, lat, kDefaultJetDegree,
                               b / (a * a + b * b));
}

Outcome round_trip() {
  const double a = 2, b = 1, c = 1;
  const auto lat = build_example("example1").lattice;
  const Construction k = hyperbolic(c, lat);
  double e_cos = 0, e_phiz = 0, e_psiz = 0;
  const double shift = k.data.psi_z0.value_at({0, 0, 0}) + c * a / (a * a + b * b);
  for (std::size_t t = 0; t < lat->size(); ++t) {
    const Point p = lat->point(t);
    const double X = p[0] + a, Y = p[1] + b, r2 = X * X + Y * Y;
    e_cos = std::max(e_cos, std::abs(std::cos(k.data.phi0.node_value(t)) - (X * X - Y * Y) / r2));
    e_phiz = std::max(e_phiz, std::abs(k.data.phi_z0.node_value(t) - c * Y / r2));
    e_psiz = std::max(e_psiz, std::abs(k.data.psi_z0.node_value(t) - shift + c * X / r2));
  }
  const double m = std::max({e_cos, e_phiz, e_psiz});
  return {m <= 1e-8, "cos phi " + sci(e_cos) + ", phi_z " + sci(e_phiz) + ", psi_z " + sci(e_psiz)};
}

Outcome psi_reconstruction() {
  const double a = 2, b = 1;
  const auto lat = build_example("example1").lattice;
  double worst_psi = 0, worst_e = 0;
  for (double c : {0.5, 1.0, 2.0}) {
    const Construction k = hyperbolic(c, lat);
    const double kk = 1.0 + c * c / 8.0;
    const ScalarField Xs = X2() + a, Ys = Y2() + b, r2 = Xs * Xs + Ys * Ys;
    const ScalarField d = k.data.psi0 - (log(r2) - kk * log(Xs));
    const Jet j = d.jet_at({0, 0, 0}, 1);
    const ScalarField affine = j.value() + j.partial({1, 0, 0}) * X2() + j.partial({0, 1, 0}) * Y2();
    worst_psi = std::max(worst_psi, interior_sup(d - affine, *lat));
    const ScalarField& phi = k.data.phi0;
    const ScalarField lhs = -(k.data.psi0.dx(2) + k.data.psi0.dy(2)) + square(phi.dx()) + square(phi.dy()) +
                            square(k.data.phi_z0);
    const ScalarField rhs = -kk / (Xs * Xs) + 4.0 / r2 + c * c * Ys * Ys / (r2 * r2);
    worst_e = std::max(worst_e, interior_sup(lhs - rhs, *lat));
  }
  return {worst_psi <= 1e-8 && worst_e <= 1e-8,
          "psi up to gauge " + sci(worst_psi) + ", condition (e) " + sci(worst_e) + " over c in {0.5, 1, 2}"};
}

Outcome counterexample() {
  const CatalogEntry e = build_example("example2");
  const LpsiSplit L = lpsi_from_slice(e.phi0, e.phi_z0, e.c, *e.lattice);
  const double r = extension_sup(e.phi0, e.phi_z0, L.Lpsi, *e.lattice);
  const fs::path out = fs::temp_directory_path() / "guichard_acceptance_ex2";
  fs::remove_all(out);
  const int rc_construct = cli("construct --catalog example2 --out \"" + out.string() + "\"");
  const int rc_evolve = cli("evolve --catalog example2 --out \"" + (out / "evolve").string() + "\"");
  fs::remove_all(out);
  return {r > 0.1 && rc_construct == 2 && rc_evolve == 2,
          "extension residual " + sci(r) + "; CLI exit codes construct " + std::to_string(rc_construct) + ", evolve " +
              std::to_string(rc_evolve)};
}

Outcome class_b_consistency() {
  const CatalogEntry e4 = build_example("example4"), e1 = build_example("example1"), e3 = build_example("example3");
  const auto pts = halton_points(100, 2, {-0.25, -0.25, 0}, {0.25, 0.25, 0});
  const double dm = std::max(sup_norm(e4.metric->A - e1.metric->A, pts), sup_norm(e4.metric->B - e1.metric->B, pts));
  const ScalarField& phi = e3.phi0;
  const ScalarField Lp = phi.dx(2) - phi.dy(2), S = e3.extras.at("S"), T = e3.extras.at("T");
  const double st = std::max({sup_norm(S.dx() - phi.dx() * Lp, pts), sup_norm(T.dy() - phi.dy() * Lp, pts),
                              sup_norm(Lp - (S * cos(phi) / sin(phi) - T * sin(phi) / cos(phi)), pts)});
  return {dm <= 1e-9 && st <= 1e-9, "example4 vs example1 metric " + sci(dm) + "; example3 S, T identities " + sci(st)};
}

Outcome bianchi_end_to_end() {
  const Trajectory& tr = bianchi_run();
  double phi_err = 0, curv = 0;
  for (std::size_t l = 0; l < tr.levels.size(); ++l) {
    phi_err = std::max(phi_err, phi_error(tr, bianchi(), l));
    const double k = tr.levels[l].slice_curvature;
    curv = std::isfinite(k) ? std::max(curv, k) : INFINITY;
  }
  const double mon = max_monitor(tr);
  const auto v = verify_trajectory(tr, 1e-6);
  double p11 = 0, t1 = 0;
  for (const auto& r : v.reports) {
    p11 = std::max(p11, r.phi_eqs_max());
    t1 = std::max(t1, r.phi_psi_eqs_max());
  }
  const bool ok = !tr.aborted && phi_err <= 1e-6 && mon <= 1e-6 && curv <= 1e-6 && p11 <= 1e-6 && t1 <= 1e-6;
  return {ok, "64^2 jets, 50 RK4 steps: phi error " + sci(phi_err) + ", monitors " + sci(mon) + ", |K+1| " + sci(curv) +
                  ", flatness " + sci(p11) + ", phi-psi " + sci(t1) + " (" + std::to_string(v.reports.size()) +
                  " verified slices)"};
}

Outcome scheme_convergence() {
  const InitialData d = bianchi().initial_data();
  // at 50 steps the endpoint error is already at round-off, so the halving is measured from 2 steps
  const double e2 = phi_error(evolve(d, rk4(0.05, 2)), bianchi(), 2);
  const double e4 = phi_error(evolve(d, rk4(0.05, 4)), bianchi(), 4);
  const double ratio = e2 / e4;
  EvolutionConfig tc = rk4(0.05, 5);
  tc.scheme = Scheme::taylor;
  tc.taylor_order = 6;
  tc.jet_degree = 12;
  const double dt = final_distance(evolve(d, tc), bianchi_run());
  return {ratio >= 12 && ratio <= 20 && dt <= 1e-8,
          "RK4 halving ratio " + sci(ratio) + " (errors " + sci(e2) + ", " + sci(e4) + "); Taylor-6 vs RK4 " + sci(dt)};
}

Outcome distinctness() {
  const CatalogEntry& e1 = bianchi(1.0);
  const CatalogEntry& e2 = bianchi(2.0);
  const auto pts = halton_points(50, 2, {-0.25, -0.25, 0}, {0.25, 0.25, 0});
  const double same_metric = std::max(sup_norm(e1.metric->A - e2.metric->A, pts), sup_norm(e1.metric->B - e2.metric->B, pts));
  const Trajectory t2 = evolve(e2.initial_data(), rk4(0.05, 50));
  const double d = final_distance(bianchi_run(), t2);
  return {d > 1e-3 && same_metric <= 1e-12,
          "sup |phi(c=1) - phi(c=2)| at z=0.05 " + sci(d) + "; slice metrics agree to " + sci(same_metric)};
}

Outcome transport() {
  InitialData d = build_example("example5", {{"n", 33.0}}).initial_data();
  const double eps = 0.05;
  d.psi0 = d.psi0 + eps * X2() * Y2();
  d.phi_z0 = d.phi_z0 * (1.0 + eps * X2());
  EvolutionConfig c = rk4(0.05, 50);
  c.gate = false;
  const Trajectory tr = evolve(d, c);
  const TransportReport rep = monitor_transport_residual(tr);
  double worst = 0, msup = 0;
  for (int k = 0; k < 4; ++k) {
    worst = std::max(worst, rep.residual[k] / rep.estimate[k]);
    msup = std::max(msup, rep.monitor_sup[k]);
  }
  return {worst <= 10.0 && msup > 1e-2,
          "33^2, perturbation " + sci(eps) + ": max residual/estimate " + sci(worst) + ", monitors up to " + sci(msup)};
}

Outcome structural_sanity() {
  double trig = 0;
  for (const auto& l : bianchi_run().levels) trig = std::max(trig, l.trig_identity);
  const auto pts = halton_points(60, 3, {-0.2, -0.2, -0.05}, {0.2, 0.2, 0.05});
  // admissible entries: both residual families vanish
  double vanish = 0;
  for (const char* n : {"example3", "example5"}) {
    const CatalogEntry e = build_example(n);
    const FlatnessReport r = flatness_report(GuichardField3{e.phi3, {}}, pts);
    vanish = std::max({vanish, r.phi_eqs_max(), r.forms_max()});
  }
  for (const auto& r : verify_trajectory(bianchi_run()).reports) vanish = std::max({vanish, r.phi_eqs_max(), r.forms_max()});
  // perturbed entries: both families are nonzero and comparable
  double ratio = 1.0;
  const ScalarField bump = ScalarField::coordinate(3, 0) * ScalarField::coordinate(3, 1) * ScalarField::coordinate(3, 2);
  for (const char* n : {"example3", "example5"}) {
    const CatalogEntry e = build_example(n);
    for (double eps : {1e-3, 1e-1}) {
      const FlatnessReport r = flatness_report(GuichardField3{e.phi3 + eps * bump, {}}, pts);
      ratio = std::max({ratio, r.phi_eqs_max() / r.forms_max(), r.forms_max() / r.phi_eqs_max()});
    }
  }
  return {trig <= 4.5e-16 && vanish <= 1e-9 && ratio <= 10.0,
          "cos^2+sin^2-1 " + sci(trig) + "; admissible residuals " + sci(vanish) +
              "; perturbed flatness/forms ratio " + sci(ratio)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"curvature identities", curvature_identities},
      {"metric round trip", round_trip},
      {"psi reconstruction", psi_reconstruction},
      {"counterexample rejection", counterexample},
      {"class B consistency", class_b_consistency},
      {"Bianchi end-to-end", bianchi_end_to_end},
      {"scheme convergence", scheme_convergence},
      {"one-parameter distinctness", distinctness},
      {"monitor transport", transport},
      {"structural sanity", structural_sanity},
  };
  int failed = 0, i = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [name, run] : criteria) {
    ++i;
    Outcome o;
    const auto t = std::chrono::steady_clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed in %.1fs\n", i - failed, std::size(criteria),
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return failed == 0 ? 0 : 1;
}
