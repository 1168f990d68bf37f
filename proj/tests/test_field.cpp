#include <gtest/gtest.h>

#include <cmath>

#include "guichard/field.hpp"
#include "guichard/integrate.hpp"

using namespace guichard;

namespace {

ScalarField X2() { return ScalarField::coordinate(2, 0); }
ScalarField Y2() { return ScalarField::coordinate(2, 1); }

// f = exp(x) sin(2y) with hand partials
double f_val(double x, double y) { return std::exp(x) * std::sin(2 * y); }
double f_xy(double x, double y) { return 2 * std::exp(x) * std::cos(2 * y); }
double f_yy(double x, double y) { return -4 * std::exp(x) * std::sin(2 * y); }

}  // namespace

TEST(Field, ClosedFormDerivativesMatchHand) {
  const ScalarField f = exp(X2()) * sin(2.0 * Y2());
  for (const auto& p : halton_points(20, 2, {-0.5, -0.5, 0}, {0.5, 0.5, 0})) {
    EXPECT_NEAR(f.value_at(p), f_val(p[0], p[1]), 1e-15);
    EXPECT_NEAR(f.dx().dy().value_at(p), f_xy(p[0], p[1]), 1e-14);
    EXPECT_NEAR(f.dy(2).value_at(p), f_yy(p[0], p[1]), 1e-13);
  }
}

TEST(Field, JetsAgreeWithClosedFormAtNodes) {
  const auto lat = Lattice::square(25, -0.3, 0.3);
  const ScalarField f = exp(X2()) * sin(2.0 * Y2());
  const ScalarField j = f.to_jets(lat, 10);
  EXPECT_EQ(j.rep(), Rep::jets);
  EXPECT_LT(sup_norm(j.dx().dy() - f.dx().dy(), *lat, 0), 1e-13);
  EXPECT_LT(sup_norm(j.dy(3) - f.dy(3), *lat, 0), 1e-12);
}

TEST(Field, JetsEvaluateOffNodeByTaylorExpansion) {
  const auto lat = Lattice::square(25, -0.3, 0.3);
  const ScalarField j = (exp(X2()) * sin(2.0 * Y2())).to_jets(lat, 12);
  const double h = lat->spacing(0);
  EXPECT_NEAR(j.value_at({0.1 + 0.3 * h, -0.05, 0}), f_val(0.1 + 0.3 * h, -0.05), 1e-14);
}

TEST(Field, GridDerivativeConvergesAtStencilOrder) {
  const ScalarField f = exp(X2()) * sin(2.0 * Y2());
  double prev = 0.0;
  for (int n : {33, 65}) {
    const auto lat = Lattice::square(n, -0.5, 0.5, -1, 4);
    const ScalarField g = f.to_grid(lat);
    const double err = sup_norm(g.dx() - f.dx(), *lat, 0);
    if (prev > 0) {
      EXPECT_GT(std::log2(prev / err), 3.5);  // fourth-order stencils
    }
    prev = err;
  }
}

TEST(Field, GridOrderBudgetIsEnforced) {
  const auto lat = Lattice::square(33, -0.5, 0.5);
  const ScalarField g = (X2() * Y2()).to_grid(lat);
  EXPECT_NO_THROW(g.dx().dy().dx());
  EXPECT_THROW(g.dx().dy().dx().dy(), std::domain_error);
}

TEST(Field, GridFieldsHaveNoOffNodeValues) {
  const auto lat = Lattice::square(33, -0.5, 0.5);
  const ScalarField g = X2().to_grid(lat);
  EXPECT_THROW(g.value_at({0.01, 0.0, 0.0}), std::domain_error);
  EXPECT_THROW(X2().node_value(0), std::domain_error);
}

TEST(Field, PythagoreanIdentityToRoundOff) {
  const auto lat = Lattice::square(33, -0.5, 0.5);
  const ScalarField phi = (X2() + 0.3 * Y2() * Y2()).to_jets(lat, 6);
  const auto [s, c] = sincos(phi);
  EXPECT_LT(sup_norm(s * s + c * c - 1.0, *lat, 0), 4e-16);
  EXPECT_LT(sup_norm(s - sin(phi), *lat, 0), 1e-16);
}

TEST(Field, RestrictToZAndZStack) {
  const auto X = ScalarField::coordinate(3, 0), Z = ScalarField::coordinate(3, 2);
  const ScalarField f = exp(X) * cos(Z);
  const ScalarField s = f.restrict_to_z(0.2);
  EXPECT_EQ(s.arity(), 2);
  EXPECT_NEAR(s.value_at({0.1, 0.4, 0}), std::exp(0.1) * std::cos(0.2), 1e-15);
  // Taylor stack in z rebuilt as an arity-3 jets field
  const auto lat = Lattice::square(25, -0.2, 0.2);
  std::vector<ScalarField> stack;
  for (int k = 0; k < 4; ++k) stack.push_back(f.dz(k).restrict_to_z(0.2));
  const ScalarField f3 = from_z_stack(stack, lat, 0.2, 3);
  EXPECT_EQ(f3.arity(), 3);
  const auto& L3 = *f3.lattice();
  EXPECT_LT(sup_norm(f3.dz(2).dx() - f.dz(2).dx(), L3, 0), 1e-14);
  EXPECT_LT(sup_norm(f3.dz(3) - f.dz(3), L3, 0), 1e-14);
}

TEST(Field, WedgeResidualsVanishOnExactForms) {
  const auto X = ScalarField::coordinate(3, 0), Y = ScalarField::coordinate(3, 1), Z = ScalarField::coordinate(3, 2);
  const ScalarField u = X * Y * Z;
  const std::array<ScalarField, 3> alpha{u.dx(), u.dy(), u.dz()};
  // beta = d(y z dx) = z dy^dx + y dz^dx: on (dy^dz, dz^dx, dx^dy) that is (0, y, -z)
  const std::array<ScalarField, 3> beta{ScalarField::constant(3, 0.0), Y, -Z};
  const auto w = wedge_residuals(alpha, beta);
  const auto pts = halton_points(20, 3, {-1, -1, -1}, {1, 1, 1});
  for (const auto& d : w.d_alpha) EXPECT_LT(sup_norm(d, pts), 1e-14);
  EXPECT_LT(sup_norm(w.d_beta, pts), 1e-14);
}

TEST(Field, WedgeResidualsDetectNonClosedForms) {
  const auto X = ScalarField::coordinate(3, 0), Y = ScalarField::coordinate(3, 1), Z = ScalarField::coordinate(3, 2);
  // alpha = -y dx + x dy has d alpha = 2 dx^dy; beta = x dy^dz has d beta = dx^dy^dz
  const std::array<ScalarField, 3> alpha{-Y, X, ScalarField::constant(3, 0.0)};
  const std::array<ScalarField, 3> beta{X, ScalarField::constant(3, 0.0), ScalarField::constant(3, 0.0)};
  const auto w = wedge_residuals(alpha, beta);
  const Point p{0.2, 0.3, 0.1};
  EXPECT_NEAR(std::abs(w.d_alpha[2].value_at(p)), 2.0, 1e-14);
  EXPECT_NEAR(w.d_alpha[0].value_at(p), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(w.d_beta.value_at(p)), 1.0, 1e-14);
}

TEST(Field, HaltonPointsStayInBox) {
  const auto pts = halton_points(100, 3, {-1, 0, 2}, {1, 1, 3});
  ASSERT_EQ(pts.size(), 100u);
  for (const auto& p : pts) {
    EXPECT_GE(p[0], -1);
    EXPECT_LE(p[0], 1);
    EXPECT_GE(p[2], 2);
    EXPECT_LE(p[2], 3);
  }
}

TEST(Integrate, PotentialOfExactGradient) {
  const auto lat = Lattice::square(33, -0.3, 0.3);
  const ScalarField U = exp(X2()) * sin(2.0 * Y2()) + X2() * Y2();
  const auto r = potential_from_gradient(U.dx(), U.dy(), lat, 14);
  EXPECT_LT(r.closedness, 1e-12);
  EXPECT_LT(sup_norm(r.f - (U - U.value_at({0, 0, 0})), *lat, 0), 1e-12);
}

TEST(Integrate, PotentialRejectsNonClosedForm) {
  const auto lat = Lattice::square(33, -0.3, 0.3);
  const auto r = potential_from_gradient(-Y2(), X2(), lat, 8);
  EXPECT_GT(r.closedness, 1.0);
}

TEST(Integrate, MixedAntiderivative) {
  const auto lat = Lattice::square(33, -0.3, 0.3);
  const ScalarField V = exp(X2() + Y2());
  const ScalarField W = mixed_antiderivative(V, lat, 14);
  // W_xy = V with W vanishing on both axes: W = (e^x - 1)(e^y - 1)
  EXPECT_LT(sup_norm(W.dx().dy() - V, *lat, 0), 1e-12);
  EXPECT_LT(sup_norm(W - (exp(X2()) - 1.0) * (exp(Y2()) - 1.0), *lat, 0), 1e-12);
}
