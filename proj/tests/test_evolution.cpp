#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "guichard/catalog.hpp"
#include "guichard/evolution.hpp"

using namespace guichard;

namespace {

const CatalogEntry& bianchi() {
  static const CatalogEntry e = build_example("example5", {{"n", 25.0}});
  return e;
}

// sup over nodes of |phi(z_max) - phi_exact(z_max)|
double phi_error(const Trajectory& tr, const CatalogEntry& e) {
  const auto& last = tr.levels.back();
  const Lattice& lat = *tr.lattice;
  double err = 0.0;
  for (std::size_t t = 0; t < lat.size(); ++t) {
    const Point p = lat.point(t);
    err = std::max(err, std::abs(last.phi[t] - e.phi3.value_at({p[0], p[1], last.z})));
  }
  return err;
}

EvolutionConfig jets_config(double z_max, int steps) {
  EvolutionConfig c;
  c.z_max = z_max;
  c.steps = steps;
  return c;
}

double max_monitor(const Trajectory& tr) {
  double m = 0.0;
  for (const auto& l : tr.levels)
    for (double v : l.monitor_sup) m = std::max(m, v);
  return m;
}

}  // namespace

TEST(Evolution, ConfigValidation) {
  EvolutionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.steps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = EvolutionConfig{};
  c.z_max = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.z_max = 0.3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = EvolutionConfig{};
  c.taylor_order = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = EvolutionConfig{};
  c.tripwire = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(scheme_from_string("taylor"), Scheme::taylor);
  EXPECT_EQ(space_from_string("grid"), SpaceMode::grid);
  EXPECT_THROW(scheme_from_string("euler"), std::invalid_argument);
  EXPECT_FALSE(c.effective_filter().enabled);
}

TEST(Evolution, RightHandSideAgreesWithExactSolution) {
  const CatalogEntry& e = bianchi();
  const auto [pzz, qzz] = evolution_rhs(e.phi0, e.psi0);
  const auto pts = halton_points(20, 2, {-0.2, -0.2, 0}, {0.2, 0.2, 0});
  EXPECT_LT(sup_norm(pzz - e.phi3.dz(2).restrict_to_z(0.0), pts), 1e-11);
  EXPECT_LT(sup_norm(qzz - e.psi3.dz(2).restrict_to_z(0.0), pts), 1e-11);
  const auto [pzzz, qzzz] = evolution_rhs_z(e.phi0, e.psi0, e.phi_z0, e.psi_z0);
  EXPECT_LT(sup_norm(pzzz - e.phi3.dz(3).restrict_to_z(0.0), pts), 1e-10);
  EXPECT_LT(sup_norm(qzzz - e.psi3.dz(3).restrict_to_z(0.0), pts), 1e-10);
}

TEST(Evolution, Rk4ConvergesAtFourthOrder) {
  const CatalogEntry& e = bianchi();
  const InitialData d = e.initial_data();
  const double e2 = phi_error(evolve(d, jets_config(0.1, 2)), e);
  const double e4 = phi_error(evolve(d, jets_config(0.1, 4)), e);
  const double ratio = e2 / e4;
  EXPECT_GE(ratio, 12.0) << e2 << " " << e4;
  EXPECT_LE(ratio, 20.0) << e2 << " " << e4;
}

TEST(Evolution, TaylorSchemeMatchesExactSolution) {
  const CatalogEntry& e = bianchi();
  EvolutionConfig c = jets_config(0.05, 2);
  c.scheme = Scheme::taylor;
  c.taylor_order = 6;
  c.jet_degree = 12;
  const Trajectory tr = evolve(e.initial_data(), c);
  EXPECT_LE(phi_error(tr, e), 1e-8);
}

TEST(Evolution, MonitorsStayAtRoundOffForAdmissibleData) {
  const CatalogEntry& e = bianchi();
  const Trajectory tr = evolve(e.initial_data(), jets_config(0.05, 20));
  ASSERT_EQ(tr.levels.size(), 21u);
  EXPECT_FALSE(tr.aborted);
  EXPECT_LE(max_monitor(tr), 1e-9);
  for (const auto& l : tr.levels) {
    EXPECT_LE(l.slice_curvature, 1e-8);
    EXPECT_LE(l.trig_identity, 1e-15);
  }
}

TEST(Evolution, HyperbolicDataAtTwoSpeeds) {
  for (double c : {1.0, 2.0}) {
    const CatalogEntry e = build_example("example1", {{"c", c}, {"n", 25.0}});
    const Trajectory tr = evolve(e.initial_data(), jets_config(0.04, 4));
    EXPECT_LE(max_monitor(tr), 1e-9 * c * c) << "c = " << c;
  }
}

TEST(Evolution, GridModeKeepsMonitorsSmall) {
  const CatalogEntry e = build_example("example1", {{"n", 33.0}});
  EvolutionConfig c = jets_config(0.05, 20);
  c.space = SpaceMode::grid;
  const Trajectory tr = evolve(e.initial_data(), c);
  EXPECT_FALSE(tr.aborted);
  EXPECT_LE(max_monitor(tr), 1e-9);
  // the interior shrinks by one node per spacing travelled in z
  EXPECT_EQ(tr.interior_layers(0.0), tr.lattice->margin());
  EXPECT_GT(tr.interior_layers(0.05), tr.lattice->margin());
}

TEST(Evolution, TransportLawHoldsWithinEstimate) {
  const CatalogEntry& e = bianchi();
  const InitialData d = e.initial_data();
  State s{0.0, d.phi0.to_jets(d.lattice, 8), d.psi0.to_jets(d.lattice, 8), d.phi_z0.to_jets(d.lattice, 8),
          d.psi_z0.to_jets(d.lattice, 8)};
  // perturbed data: the monitors are nonzero and move
  s.psi = s.psi + (0.01 * ScalarField::coordinate(2, 0) * ScalarField::coordinate(2, 1)).to_jets(d.lattice, 8);
  InitialData p = d;
  p.psi0 = s.psi;
  EvolutionConfig c = jets_config(0.02, 8);
  c.gate = false;
  const Trajectory tr = evolve(p, c);
  const TransportReport rep = monitor_transport_residual(tr);
  EXPECT_GT(rep.levels_checked, 0);
  EXPECT_GT(*std::max_element(rep.monitor_sup.begin(), rep.monitor_sup.end()), 1e-4);
  for (int k = 0; k < 4; ++k) EXPECT_LE(rep.residual[k], 10.0 * rep.estimate[k] + 1e-9) << k;
}

TEST(Evolution, GateRejectsPerturbedData) {
  InitialData d = bianchi().initial_data();
  d.psi0 = d.psi0 + 0.01 * ScalarField::coordinate(2, 0) * ScalarField::coordinate(2, 1);
  EXPECT_THROW(evolve(d, jets_config(0.02, 2)), InadmissibleError);
  EvolutionConfig c = jets_config(0.02, 2);
  c.gate = false;
  const Trajectory tr = evolve(d, c);
  EXPECT_GT(max_monitor(tr), 1e-4);
}

TEST(Evolution, TripwireAbortsAndKeepsLevels) {
  EvolutionConfig c = jets_config(0.05, 5);
  c.tripwire = 1e-3;
  const Trajectory tr = evolve(bianchi().initial_data(), c);
  EXPECT_TRUE(tr.aborted);
  EXPECT_NE(tr.abort_reason.find("tripwire"), std::string::npos);
  EXPECT_EQ(tr.levels.size(), 1u);
  EXPECT_NO_THROW(tr.final_state());
}

TEST(Evolution, SnapshotsAreKeptOnRequest) {
  EvolutionConfig c = jets_config(0.04, 4);
  c.snapshot_every = 2;
  const Trajectory tr = evolve(bianchi().initial_data(), c);
  int kept = 0;
  for (const auto& l : tr.levels) kept += l.state.has_value();
  EXPECT_EQ(kept, 3);
  EXPECT_DOUBLE_EQ(tr.final_state().z, 0.04);
}

TEST(Filter, SmoothFieldsPassAndOscillationsAreDamped) {
  const auto lat = Lattice::square(33, -0.25, 0.25);
  const auto X = ScalarField::coordinate(2, 0), Y = ScalarField::coordinate(2, 1);
  FilterConfig f;
  f.enabled = true;
  const ScalarField g = (exp(X) * sin(2.0 * Y) + X * X * X).to_grid(lat);
  EXPECT_LT(sup_norm(filtered(g, f) - g, *lat, 0), 1e-6);
  // near-Nyquist checkerboard under a wide envelope, clear of the ends (the end fit amplifies noise there)
  const auto big = Lattice::square(129, -0.25, 0.25);
  auto bump = [](int i) { return i < 16 || i > 112 ? 0.0 : std::pow(std::sin(std::numbers::pi * (i - 16) / 96.0), 2); };
  std::vector<double> noise(big->size(), 0.0);
  for (int i = 0; i < 129; ++i)
    for (int j = 0; j < 129; ++j) noise[big->flat(i, j)] = ((i + j) % 2 ? 1.0 : -1.0) * 1e-3 * bump(i) * bump(j);
  const ScalarField h = ScalarField::grid(big, noise, 0);
  EXPECT_LT(sup_norm(filtered(h, f), *big, 0), 1e-7);
  f.enabled = false;
  EXPECT_EQ(sup_norm(filtered(h, f) - h, *big, 0), 0.0);
}
