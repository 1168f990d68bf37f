#pragma once

// Closed-form reference data: the hyperbolic example, the non-extendable counterexample,
// the two class B families and the Bianchi-type net.

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "expr.hpp"
#include "initial_data.hpp"
#include "pendulum.hpp"

namespace guichard {

struct CatalogEntry {
  std::string name;
  std::string title;
  json params = json::object();
  LatticePtr lattice;
  double c = 1.0;
  double lambda = 0.0;
  std::optional<OrthogonalMetric2> metric;
  // slice z = 0 (arity 2); psi0 empty where the data determine no psi
  ScalarField phi0, psi0, phi_z0, psi_z0;
  // full solution (arity 3) where known
  ScalarField phi3, psi3;
  std::map<std::string, ScalarField> extras;  // S, T, zeta, eta, L_phi, L_psi, phi_z1 ...
  std::optional<PendulumSolution> pendulum;
  std::optional<ClassBParams> class_b;
  json expected = json::object();

  bool has_initial_data() const { return !psi0.empty(); }
  InitialData initial_data() const {
    if (!has_initial_data()) throw InadmissibleError("psi0", 0.0, name + ": the data determine no admissible psi");
    InitialData d{lattice, phi0, psi0, phi_z0, psi_z0, c, lambda, json::object()};
    d.provenance = {{"source", "catalog"}, {"name", name}, {"params", params}};
    return d;
  }
};

struct ParamSpec {
  std::string name;
  json default_value;
  std::string description;
};

namespace catalog_detail {

inline ScalarField cf(std::function<Jet(const Jet&, const Jet&)> f) {
  return ScalarField::closed_form(2, [f](std::span<const Jet> v) { return f(v[0], v[1]); });
}
inline ScalarField cf3(std::function<Jet(const Jet&, const Jet&, const Jet&)> f) {
  return ScalarField::closed_form(3, [f](std::span<const Jet> v) { return f(v[0], v[1], v[2]); });
}

inline json merged(const std::vector<ParamSpec>& schema, const json& given) {
  json p = json::object();
  for (const auto& s : schema) p[s.name] = s.default_value;
  if (!given.is_null()) {
    if (!given.is_object()) throw std::invalid_argument("catalog: parameters must be an object");
    for (const auto& [k, v] : given.items()) {
      if (!p.contains(k)) throw std::invalid_argument("catalog: unknown parameter '" + k + "'");
      if (p[k].is_number() && !v.is_number()) throw std::invalid_argument("catalog: parameter '" + k + "' must be a number");
      if (p[k].is_string() && !v.is_string()) throw std::invalid_argument("catalog: parameter '" + k + "' must be a string");
      p[k] = v;
    }
  }
  return p;
}

inline LatticePtr patch(const json& p) {
  const int n = p.at("n").get<int>();
  const double lo = p.at("lo").get<double>(), hi = p.at("hi").get<double>();
  if (!(hi > lo)) throw std::invalid_argument("catalog: patch needs lo < hi");
  return Lattice::square(n, lo, hi);
}

inline std::vector<ParamSpec> patch_spec(int n, double lo, double hi) {
  return {{"n", n, "samples per axis"}, {"lo", lo, "patch lower bound (both axes)"}, {"hi", hi, "patch upper bound"}};
}

inline std::vector<ParamSpec> join(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace catalog_detail

inline std::vector<std::string> catalog_names() { return {"example1", "example2", "example3", "example4", "example5"}; }

inline std::vector<ParamSpec> catalog_params(const std::string& name) {
  using catalog_detail::join;
  using catalog_detail::patch_spec;
  if (name == "example1")
    return join({{"a", 2.0, "x shift (x + a > 0 on the patch)"}, {"b", 1.0, "y shift, b > 0"}, {"c", 1.0, "family parameter"}},
                patch_spec(33, -0.25, 0.25));
  if (name == "example2") return join({{"c", 1.0, "family parameter"}}, patch_spec(33, 0.05, 0.35));
  if (name == "example3")
    return join({{"c1", 1.3, "zeta constant"},
                 {"c2", -0.3, "eta constant"},
                 {"c3", 1.0, "phi_x / phi_z1"},
                 {"c4", 1.0, "phi_y / phi_z1"},
                 {"c", 1.0, "family parameter"},
                 {"g0", std::numbers::pi / 4, "phi at the origin"}},
                patch_spec(33, -0.25, 0.25));
  if (name == "example4")
    return join({{"a", 2.0, "x shift"},
                 {"b", 1.0, "y shift"},
                 {"zeta", "1/(4*x^2)", "zeta as a function of the shifted x"},
                 {"c", 1.0, "family parameter"}},
                patch_spec(33, -0.25, 0.25));
  if (name == "example5")
    return join({{"alpha", 0.3, "pendulum alpha"},
                 {"beta", 1.0, "pendulum beta"},
                 {"a", 1.0, "x coefficient"},
                 {"b", 1.0, "y coefficient"},
                 {"c", 1.0, "z coefficient (family parameter)"},
                 {"g0", std::numbers::pi / 4, "g(0)"}},
                patch_spec(64, -0.25, 0.25));
  throw std::invalid_argument("catalog: unknown example '" + name + "'");
}

inline json catalog_schema(const std::string& name) {
  json props = json::object();
  for (const auto& s : catalog_params(name))
    props[s.name] = {{"type", s.default_value.is_string() ? "string" : s.default_value.is_number_integer() ? "integer" : "number"},
                     {"default", s.default_value},
                     {"description", s.description}};
  return {{"name", name}, {"type", "object"}, {"properties", props}};
}

namespace catalog_detail {

// phi = 2 atan(Y/X) with X = x + a, Y = y + b: the hyperbolic example
inline void hyperbolic_phi(CatalogEntry& e, double a, double b) {
  e.phi0 = cf([a, b](const Jet& x, const Jet& y) { return 2.0 * atan((y + b) / (x + a)); });
  e.extras["L_phi"] = cf([a, b](const Jet& x, const Jet& y) {
    const Jet X = x + a, Y = y + b, r2 = X * X + Y * Y;
    return 8.0 * X * Y / (r2 * r2);
  });
  e.extras["S"] = cf([a, b](const Jet& x, const Jet& y) {
    const Jet X = x + a, Y = y + b, r2 = X * X + Y * Y;
    return 4.0 * Y * Y / (r2 * r2);
  });
  e.extras["T"] = cf([a, b](const Jet& x, const Jet& y) {
    const Jet X = x + a, Y = y + b, r2 = X * X + Y * Y;
    return -4.0 * X * X / (r2 * r2) + 1.0 / (X * X);
  });
  e.extras["phi_z1"] = cf([a, b](const Jet& x, const Jet& y) {
    const Jet X = x + a, Y = y + b;
    return Y / (X * X + Y * Y);
  });
  e.lambda = std::atan2(2.0 * a * b, a * a - b * b);
}

inline void check_hyperbolic_patch(const Lattice& lat, double a, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("catalog: b must be positive");
  for (std::size_t t = 0; t < lat.size(); ++t) {
    const Point p = lat.point(t);
    const double X = p[0] + a, Y = p[1] + b;
    if (!(X > 0.0) || !(Y > 0.0) || !(X > Y))
      throw std::invalid_argument("catalog: patch must keep 0 < y + b < x + a (phi inside (0, pi/2))");
  }
}

inline CatalogEntry example1(const json& p) {
  CatalogEntry e;
  e.name = "example1";
  e.title = "hyperbolic metric (dx^2 + dy^2)/(y + b)^2";
  e.params = p;
  const double a = p.at("a").get<double>(), b = p.at("b").get<double>(), c = p.at("c").get<double>();
  if (c == 0.0) throw std::invalid_argument("catalog: c must be nonzero");
  e.lattice = patch(p);
  check_hyperbolic_patch(*e.lattice, a, b);
  e.c = c;
  hyperbolic_phi(e, a, b);
  const ScalarField Yinv = cf([b](const Jet&, const Jet& y) { return 1.0 / (y + b); });
  e.metric = OrthogonalMetric2{Yinv, Yinv};
  e.extras["zeta"] = cf([a](const Jet& x, const Jet&) { return 0.25 / ((x + a) * (x + a)); });
  e.phi_z0 = c * e.extras["phi_z1"];
  const double psi_z_shift = c * a / (a * a + b * b);
  e.psi_z0 = cf([a, b, c, psi_z_shift](const Jet& x, const Jet& y) {
    const Jet X = x + a, Y = y + b;
    return -c * X / (X * X + Y * Y) + psi_z_shift;
  });
  const double k = 1.0 + c * c / 8.0;
  const ScalarField raw = cf([a, b, k](const Jet& x, const Jet& y) {
    const Jet X = x + a, Y = y + b;
    return log(X * X + Y * Y) - k * log(X);
  });
  e.extras["psi_raw"] = raw;
  // no constant or linear part at the origin
  const Jet r0 = raw.jet_at({0.0, 0.0, 0.0}, 1);
  const double v0 = r0.value(), gx = r0.partial({1, 0, 0}), gy = r0.partial({0, 1, 0});
  e.psi0 = raw - cf([v0, gx, gy](const Jet& x, const Jet& y) { return v0 + gx * x + gy * y; });
  e.extras["e_rhs"] = cf([a, b, c, k](const Jet& x, const Jet& y) {
    const Jet X = x + a, Y = y + b, r2 = X * X + Y * Y;
    return -k / (X * X) + 4.0 / r2 + c * c * Y * Y / (r2 * r2);
  });
  e.expected = {{"curvature", "vanishes"},
                {"reconstruction", "vanish"},
                {"extension", "vanishes"},
                {"class", "B"},
                {"S_x_minus_phi_x_Lphi", "vanishes"},
                {"T_y_minus_phi_y_Lphi", "vanishes"}};
  return e;
}

inline CatalogEntry example2(const json& p) {
  CatalogEntry e;
  e.name = "example2";
  e.title = "counterexample phi = x + y";
  e.params = p;
  const double c = p.at("c").get<double>();
  if (c == 0.0) throw std::invalid_argument("catalog: c must be nonzero");
  e.lattice = patch(p);
  e.c = c;
  for (std::size_t t = 0; t < e.lattice->size(); ++t) {
    const Point q = e.lattice->point(t);
    const double f = q[0] + q[1];
    if (!(f > 0.0) || !(f < std::numbers::pi / 4))
      throw std::invalid_argument("catalog: patch must keep 0 < x + y < pi/4");
  }
  e.phi0 = cf([](const Jet& x, const Jet& y) { return x + y; });
  e.phi_z0 = cf([c](const Jet& x, const Jet& y) { return 0.5 * c * exp(y - x) * (cos(x + y) + sin(x + y)); });
  e.psi_z0 = cf([c](const Jet& x, const Jet& y) { return 0.5 * c * exp(y - x) * (-cos(x + y) + sin(x + y)); });
  const ScalarField A = cf([](const Jet& x, const Jet& y) { return 2.0 / (cos(x + y) + sin(x + y)); });
  e.metric = OrthogonalMetric2{A, A};
  e.extras["L_psi"] = cf([c](const Jet& x, const Jet& y) { return -c * c * exp(2.0 * (y - x)) / (4.0 * cos(2.0 * (x + y))); });
  e.lambda = 0.0;
  e.expected = {{"curvature", "vanishes"}, {"extension", "bounded away from zero"}, {"gate", "rejects"}, {"class", "B"}};
  return e;
}

// Bianchi data phi = g(a x + b y) at z = 0 with phi_z = c g'
inline void bianchi_slice(CatalogEntry& e, const PendulumSolution& P, double a, double b, double c) {
  const double al = P.alpha_const, be = P.beta_const;
  const double c1 = 0.5 * (al + be) * (-a * a + b * b + c * c);
  const double c2 = 0.5 * (al - be) * (-a * a + b * b - c * c);
  const double c3 = -(c1 + c2);
  e.params["c1_psi"] = c1;
  e.params["c2_psi"] = c2;
  e.params["c3_psi"] = c3;
  e.phi0 = cf([P, a, b](const Jet& x, const Jet& y) { return P.g_of(a * x + b * y); });
  e.phi_z0 = cf([P, a, b, c](const Jet& x, const Jet& y) { return c * P.dg_of(a * x + b * y); });
  e.psi0 = cf([P, a, b, c1, c2](const Jet& x, const Jet& y) {
    return 0.5 * c1 * x * x + 0.5 * c2 * y * y + P.G2_of(a * x + b * y);
  });
  e.psi_z0 = cf([P, a, b, c, al, be](const Jet& x, const Jet& y) {
    return -a * c * (al + be) * x + b * c * (al - be) * y + c * P.G1_of(a * x + b * y);
  });
  e.phi3 = cf3([P, a, b, c](const Jet& x, const Jet& y, const Jet& z) { return P.g_of(a * x + b * y + c * z); });
  e.psi3 = cf3([P, a, b, c, al, be, c1, c2, c3](const Jet& x, const Jet& y, const Jet& z) {
    return -a * c * (al + be) * x * z + b * c * (al - be) * y * z + 0.5 * c1 * x * x + 0.5 * c2 * y * y + 0.5 * c3 * z * z +
           P.G2_of(a * x + b * y + c * z);
  });
  e.lambda = P.g0;
}

inline PendulumSolution pendulum_for(double alpha, double beta, double g0, const Lattice& lat, double a, double b, double c,
                                     double z_reach) {
  double tmax = 0.0;
  for (int sx : {0, 1})
    for (int sy : {0, 1}) {
      const double x = sx ? lat.hi(0) : lat.lo(0), y = sy ? lat.hi(1) : lat.lo(1);
      tmax = std::max(tmax, std::abs(a * x + b * y) + std::abs(c) * z_reach);
    }
  const double T = tmax + 0.05;
  return pendulum_solve(alpha, beta, -T, T, g0);
}

inline CatalogEntry example3(const json& p) {
  CatalogEntry e;
  e.name = "example3";
  e.title = "class B with constant zeta, eta (Bianchi type)";
  e.params = p;
  const double c1 = p.at("c1").get<double>(), c2 = p.at("c2").get<double>();
  const double c3 = p.at("c3").get<double>(), c4 = p.at("c4").get<double>(), c = p.at("c").get<double>();
  if (c == 0.0 || c3 == 0.0 || c4 == 0.0) throw std::invalid_argument("catalog: c, c3, c4 must be nonzero");
  e.lattice = patch(p);
  e.c = c;
  // phi = g(c3 x + c4 y) with g'^2 = c1 sin^2 g - c2 cos^2 g, i.e. alpha = (c1+c2)/2, beta = (c1-c2)/2
  const PendulumSolution P =
      pendulum_for(0.5 * (c1 + c2), 0.5 * (c1 - c2), p.at("g0").get<double>(), *e.lattice, c3, c4, c, 0.25);
  e.pendulum = P;
  bianchi_slice(e, P, c3, c4, c);
  const double k = 0.5 * (c3 * c3 - c4 * c4);
  e.extras["S"] = cf([P, c1, c2, c3, c4, k](const Jet& x, const Jet& y) {
    const Jet g = P.g_of(c3 * x + c4 * y), s = sin(g), co = cos(g);
    return k * (c1 * s * s - c2 * co * co + c2);
  });
  e.extras["T"] = cf([P, c1, c2, c3, c4, k](const Jet& x, const Jet& y) {
    const Jet g = P.g_of(c3 * x + c4 * y), s = sin(g), co = cos(g);
    return k * (c1 * s * s - c2 * co * co - c1);
  });
  e.extras["zeta"] = cf([c1](const Jet& x, const Jet&) { return Jet::constant(2, x.degree(), c1); });
  e.extras["eta"] = cf([c2](const Jet& x, const Jet&) { return Jet::constant(2, x.degree(), c2); });
  e.extras["phi_z1"] = cf([P, c3, c4](const Jet& x, const Jet& y) { return P.dg_of(c3 * x + c4 * y); });
  ClassBParams cb;
  cb.zeta = [c1](const Jet& x) { return Jet::constant(x.nvars(), x.degree(), c1); };
  cb.eta = [c2](const Jet& y) { return Jet::constant(y.nvars(), y.degree(), c2); };
  cb.phi0 = e.phi0;
  cb.S = e.extras["S"];
  cb.T = e.extras["T"];
  cb.zeta_text = fmt(c1);
  cb.eta_text = fmt(c2);
  e.class_b = cb;
  e.expected = {{"class_b_mixed", "vanishes"}, {"class_b_S_T", "vanishes"}, {"phi_zz", "c^2 (c1+c2)/2 sin 2phi"}};
  return e;
}

inline CatalogEntry example4(const json& p) {
  CatalogEntry e;
  e.name = "example4";
  e.title = "class B with phi_z1^2 = zeta(x) sin^2 phi";
  e.params = p;
  const double a = p.at("a").get<double>(), b = p.at("b").get<double>(), c = p.at("c").get<double>();
  if (c == 0.0) throw std::invalid_argument("catalog: c must be nonzero");
  e.lattice = patch(p);
  check_hyperbolic_patch(*e.lattice, a, b);
  e.c = c;
  hyperbolic_phi(e, a, b);
  const Expr zx = Expr::parse(p.at("zeta").get<std::string>());
  const Univariate z = zx.univariate(0);
  const Univariate zeta = [z, a](const Jet& x) { return z(x + a); };
  e.extras["zeta"] = cf([zeta](const Jet& x, const Jet&) { return zeta(x); });
  for (double v : e.extras["zeta"].values_on(*e.lattice))
    if (!(v > 0.0)) throw std::invalid_argument("catalog: zeta must be positive on the patch");
  // phi_x = rho sin phi, phi_y = sigma sin phi with rho = -1/X, sigma = 1/Y
  e.extras["rho"] = cf([a](const Jet& x, const Jet&) { return -1.0 / (x + a); });
  e.extras["sigma"] = cf([b](const Jet&, const Jet& y) { return 1.0 / (y + b); });
  ClassBParams cb;
  cb.zeta = zeta;
  cb.eta = [](const Jet& y) { return Jet::constant(y.nvars(), y.degree(), 0.0); };
  cb.phi0 = e.phi0;
  cb.S = e.extras["S"];
  cb.T = e.extras["T"];
  cb.zeta_text = zx.text();
  cb.eta_text = "0";
  e.class_b = cb;
  const ScalarField s = sin(e.phi0), co = cos(e.phi0), px = e.phi0.dx(), py = e.phi0.dy();
  const ScalarField zf = e.extras["zeta"];
  // A_hat, B_hat of the class B construction with eta = 0
  e.metric = OrthogonalMetric2{-(zf.dx() / zf + 2.0 * px * co / s) / (2.0 * s), py / s};
  e.phi_z0 = c * sqrt(zf) * s;
  e.expected = {{"class_b_mixed", "vanishes"},
                {"class_b_S_T", "vanishes"},
                {"metric_vs_example1", "equal when zeta = 1/(4x^2)"}};
  return e;
}

inline CatalogEntry example5(const json& p) {
  CatalogEntry e;
  e.name = "example5";
  e.title = "Bianchi-type net phi = g(ax + by + cz)";
  e.params = p;
  const double al = p.at("alpha").get<double>(), be = p.at("beta").get<double>();
  const double a = p.at("a").get<double>(), b = p.at("b").get<double>(), c = p.at("c").get<double>();
  if (a * b * c == 0.0) throw std::invalid_argument("catalog: abc must be nonzero");
  if (al == 0.0) throw std::invalid_argument("catalog: alpha must be nonzero (the slice metric degenerates)");
  e.lattice = patch(p);
  e.c = c;
  const PendulumSolution P = pendulum_for(al, be, p.at("g0").get<double>(), *e.lattice, a, b, c, 0.25);
  e.pendulum = P;
  bianchi_slice(e, P, a, b, c);
  e.metric = OrthogonalMetric2{cf([P, a, b, al](const Jet& x, const Jet& y) {
                                 const Jet t = a * x + b * y;
                                 return -2.0 * a * al * cos(P.g_of(t)) / P.dg_of(t);
                               }),
                               cf([P, a, b, al](const Jet& x, const Jet& y) {
                                 const Jet t = a * x + b * y;
                                 return 2.0 * b * al * sin(P.g_of(t)) / P.dg_of(t);
                               })};
  e.extras["phi_z1"] = cf([P, a, b](const Jet& x, const Jet& y) { return P.dg_of(a * x + b * y); });
  e.expected = {{"curvature", "vanishes"},
                {"monitors", "vanish along the flow"},
                {"phi_eqs", "vanishes"},
                {"phi_psi_eqs", "vanishes"},
                {"c1+c2+c3", 0.0}};
  return e;
}

}  // namespace catalog_detail

inline CatalogEntry build_example(const std::string& name, const json& params = json::object()) {
  const json p = catalog_detail::merged(catalog_params(name), params);
  if (name == "example1") return catalog_detail::example1(p);
  if (name == "example2") return catalog_detail::example2(p);
  if (name == "example3") return catalog_detail::example3(p);
  if (name == "example4") return catalog_detail::example4(p);
  return catalog_detail::example5(p);
}

inline json entry_to_json(const CatalogEntry& e) {
  json j;
  j["name"] = e.name;
  j["title"] = e.title;
  j["params"] = e.params;
  j["grid"] = lattice_to_json(*e.lattice);
  j["c"] = e.c;
  j["lambda"] = e.lambda;
  j["has_initial_data"] = e.has_initial_data();
  j["has_full_solution"] = !e.phi3.empty();
  json ex = json::array();
  for (const auto& [k, v] : e.extras) ex.push_back(k);
  j["extras"] = ex;
  j["expected"] = e.expected;
  j["schema"] = catalog_schema(e.name);
  return j;
}

}  // namespace guichard
