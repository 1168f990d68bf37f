#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "guichard/catalog.hpp"
#include "guichard/flatness.hpp"

using namespace guichard;

namespace {

const CatalogEntry& bianchi() {
  static const CatalogEntry e = build_example("example5", {{"n", 25.0}});
  return e;
}

const std::vector<Point>& pts3() {
  static const auto p = halton_points(60, 3, {-0.2, -0.2, -0.05}, {0.2, 0.2, 0.05});
  return p;
}

ScalarField X3() { return ScalarField::coordinate(3, 0); }
ScalarField Y3() { return ScalarField::coordinate(3, 1); }
ScalarField Z3() { return ScalarField::coordinate(3, 2); }

}  // namespace

TEST(Flatness, ExactBianchiPairIsConformallyFlat) {
  const CatalogEntry& e = bianchi();
  const FlatnessReport r = flatness_report(GuichardField3{e.phi3, e.psi3}, pts3());
  EXPECT_TRUE(r.has_psi);
  EXPECT_LE(r.phi_eqs_max(), 1e-9);
  EXPECT_LE(r.forms_max(), 1e-9);
  EXPECT_LE(r.phi_psi_eqs_max(), 1e-9);
  EXPECT_LE(r.psi_zzz, 1e-9);
  EXPECT_LE(r.alpha_psi_mismatch, 1e-9);
  EXPECT_LE(r.beta_psi_mismatch, 1e-9);
  EXPECT_LE(r.guichard, 1e-15);
  EXPECT_TRUE(r.pass(1e-9));
  EXPECT_TRUE(r.failing(1e-9).empty());
}

TEST(Flatness, ConstantZetaEtaFamilyIsConformallyFlat) {
  const CatalogEntry e = build_example("example3");
  const auto pts = halton_points(60, 3, {-0.2, -0.2, -0.05}, {0.2, 0.2, 0.05});
  const FlatnessReport r = flatness_report(GuichardField3{e.phi3, {}}, pts);
  EXPECT_FALSE(r.has_psi);
  EXPECT_LE(r.phi_eqs_max(), 1e-9);
  EXPECT_LE(r.forms_max(), 1e-9);
}

TEST(Flatness, GenericPhiFailsBothTestsTogether) {
  const ScalarField phi = 0.7 + 0.2 * X3() + 0.1 * Y3() * Y3() + 0.3 * Z3() + 0.2 * X3() * Z3() * Y3();
  const FlatnessReport r = flatness_report(GuichardField3{phi, {}}, pts3());
  EXPECT_GT(r.phi_eqs_max(), 1e-3);
  EXPECT_GT(r.forms_max(), 1e-3);
  EXPECT_FALSE(r.pass(1e-6));
  const auto f = r.failing(1e-6);
  EXPECT_FALSE(f.empty());
  EXPECT_EQ(std::count(f.begin(), f.end(), "guichard"), 0);
}

TEST(Flatness, ResidualsScaleLinearlyUnderSmallPerturbation) {
  const CatalogEntry& e = bianchi();
  const ScalarField bump = X3() * Y3() * Z3();
  const double r1 = flatness_report(GuichardField3{e.phi3 + 1e-4 * bump, e.psi3}, pts3()).phi_eqs_max();
  const double r2 = flatness_report(GuichardField3{e.phi3 + 2e-4 * bump, e.psi3}, pts3()).phi_eqs_max();
  EXPECT_GT(r1, 1e-7);
  EXPECT_NEAR(r2 / r1, 2.0, 0.05);
}

TEST(Flatness, PsiPerturbationBreaksThePairEquations) {
  const CatalogEntry& e = bianchi();
  const FlatnessReport r = flatness_report(GuichardField3{e.phi3, e.psi3 + 0.01 * X3() * Y3() * Z3()}, pts3());
  EXPECT_LE(r.phi_eqs_max(), 1e-9);
  EXPECT_GT(r.phi_psi_eqs_max(), 1e-4);
  const auto f = r.failing(1e-6);
  EXPECT_NE(std::find(f.begin(), f.end(), "phi_psi_eq_1"), f.end());
}

TEST(Flatness, DegenerateAngleIsRejected) {
  const ScalarField phi = 0.5 * X3() + 0.2 * Z3();  // sin 2phi = 0 on x = -0.4 z
  std::vector<Point> pts = pts3();
  pts.push_back({0.04, 0.0, -0.1});
  EXPECT_THROW(flatness_report(GuichardField3{phi, {}}, pts), FlatnessError);
}

TEST(Flatness, EvolvedTrajectoryVerifies) {
  EvolutionConfig c;
  c.z_max = 0.04;
  c.steps = 8;
  c.snapshot_every = 4;
  const Trajectory tr = evolve(bianchi().initial_data(), c);
  const TrajectoryVerification v = verify_trajectory(tr, 1e-6);
  EXPECT_EQ(v.reports.size(), 3u);
  EXPECT_TRUE(v.pass());
  const json j = verification_to_json(v);
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(j.at("levels").size(), 3u);
  EXPECT_TRUE(j.at("levels")[0].contains("phi_eqs"));
  EXPECT_TRUE(j.at("levels")[0].contains("phi_psi_eqs"));
}

TEST(Flatness, PerturbedTrajectoryFailsVerification) {
  InitialData d = bianchi().initial_data();
  // psi0 + eps x y alone only shifts J by a constant, which the flatness residuals cannot see
  d.psi0 = d.psi0 + 0.05 * ScalarField::coordinate(2, 0) * ScalarField::coordinate(2, 1);
  d.phi_z0 = d.phi_z0 * (1.0 + 0.05 * ScalarField::coordinate(2, 0));
  EvolutionConfig c;
  c.z_max = 0.02;
  c.steps = 4;
  c.gate = false;
  const TrajectoryVerification v = verify_trajectory(evolve(d, c), 1e-6);
  EXPECT_FALSE(v.pass());
  EXPECT_FALSE(v.reports.back().failing(1e-6).empty());
}

TEST(Flatness, ShortTrajectoryIsRefused) {
  EvolutionConfig c;
  c.z_max = 0.01;
  c.steps = 1;
  EXPECT_THROW(verify_trajectory(evolve(bianchi().initial_data(), c)), std::invalid_argument);
}
