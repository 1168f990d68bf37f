#pragma once

// Line integration on 2-D lattices of jets. Paths run from the origin up the line x = 0 to
// (0, y), then along the row to (x, y). Segments are integrated with the Taylor series held
// at both ends; off-lattice points on x = 0 and y = 0 get jets by re-expanding the nearest node.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "field.hpp"

namespace guichard {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace detail

// re-expand a jet about center + h (exact polynomial shift)
inline Jet shift_jet(const Jet& j, const Point& h) {
  const auto& L = j.layout();
  const int nv = j.nvars();
  const std::size_t n = L.size(j.degree());
  Jet out(nv, j.degree());
  bool zero = true;
  for (int a = 0; a < nv; ++a) zero = zero && h[a] == 0.0;
  if (zero) return j;
  for (std::size_t src = 0; src < n; ++src) {
    const double c = j[src];
    if (c == 0.0) continue;
    const Powers& ps = L.powers(src);
    for (std::size_t dst = 0; dst <= src; ++dst) {
      const Powers& pd = L.powers(dst);
      double w = c;
      for (int a = 0; a < nv && w != 0.0; ++a) {
        if (pd[a] > ps[a]) {
          w = 0.0;
          break;
        }
        w *= detail::binom(ps[a], pd[a]) * std::pow(h[a], ps[a] - pd[a]);
      }
      out[dst] += w;
    }
  }
  return out;
}

// jet of a closed-form or jets field at an arbitrary point
inline Jet field_jet(const ScalarField& f, const Point& p, int degree) {
  if (f.is_closed_form()) return f.jet_at(p, degree);
  if (f.rep() != Rep::jets) throw IntegrationError("integration needs closed-form or jets fields");
  const std::size_t t = f.lattice()->nearest(p);
  const Point q = f.lattice()->point(t);
  Jet j = f.node_jet(t, f.degree());
  j = shift_jet(j, {p[0] - q[0], p[1] - q[1], p[2] - q[2]});
  return degree < j.degree() ? j.truncated(degree) : j;
}

// closed-form fields are expanded at every node; lattice fields must live on `lat`
inline ScalarField as_jets(const ScalarField& f, const LatticePtr& lat, int degree) {
  if (f.rep() == Rep::grid) degree = std::min(degree, kGridOrderBudget - f.used_order());
  if (f.rep() == Rep::jets) degree = std::min(degree, f.degree());
  return f.to_jets(lat, degree);
}

// pure series along `axis` of the coefficient function (1/m!) d^m f / d(other)^m
inline std::vector<double> axis_series(const Jet& j, int axis, int other_power = 0) {
  std::vector<double> s;
  for (int k = 0; k + other_power <= j.degree(); ++k)
    s.push_back(axis == 0 ? j.coeff({k, other_power, 0}) : j.coeff({other_power, k, 0}));
  return s;
}

inline double integrate_series(const std::vector<double>& s, double from, double to) {
  double a = 0.0, b = 0.0;
  for (std::size_t k = s.size(); k-- > 0;) {
    a = a * from + s[k] / (k + 1.0);
    b = b * to + s[k] / (k + 1.0);
  }
  return b * to - a * from;
}

// integral over a segment of length h between two points carrying local series sa (start) and sb (end)
inline double segment_integral(const std::vector<double>& sa, const std::vector<double>& sb, double h) {
  return 0.5 * (integrate_series(sa, 0.0, h) + integrate_series(sb, -h, 0.0));
}

inline int hub_index(const Lattice& lat, int axis) {
  const double r = (0.0 - lat.lo(axis)) / lat.spacing(axis);
  return std::clamp(static_cast<int>(std::lround(r)), 0, lat.n(axis) - 1);
}

// int_0^{coord(i)} q along one lattice line; series[i] are the local series at the line's nodes,
// origin the series at coordinate 0
inline std::vector<double> line_integral_from_zero(const Lattice& lat, int axis, const std::vector<std::vector<double>>& series,
                                                   const std::vector<double>& origin) {
  const int n = lat.n(axis);
  const int i0 = hub_index(lat, axis);
  const double h = lat.spacing(axis);
  std::vector<double> out(n, 0.0);
  out[i0] = segment_integral(origin, series[i0], lat.coord(axis, i0));
  for (int i = i0 + 1; i < n; ++i) out[i] = out[i - 1] + segment_integral(series[i - 1], series[i], h);
  for (int i = i0 - 1; i >= 0; --i) out[i] = out[i + 1] + segment_integral(series[i + 1], series[i], -h);
  return out;
}

struct PotentialResult {
  ScalarField f;              // jets of degree d + 1
  double closedness = 0.0;    // max |P_y - Q_x| over nodes
};

// f with f_x = P, f_y = Q and f(0,0) = f0
inline PotentialResult potential_from_gradient(const ScalarField& P, const ScalarField& Q, const LatticePtr& lat,
                                               int degree, double f0 = 0.0) {
  if (lat->arity() != 2) throw IntegrationError("potential: lattice must be 2-D");
  const ScalarField Pj = as_jets(P, lat, degree), Qj = as_jets(Q, lat, degree);
  const int d = std::min(Pj.degree(), Qj.degree());
  const int nx = lat->n(0), ny = lat->n(1);
  // column x = 0
  std::vector<std::vector<double>> col(ny);
  for (int j = 0; j < ny; ++j) col[j] = axis_series(field_jet(Qj, {0.0, lat->coord(1, j), 0.0}, d), 1);
  const std::vector<double> F0 = line_integral_from_zero(*lat, 1, col, axis_series(field_jet(Qj, {0.0, 0.0, 0.0}, d), 1));
  // rows
  const auto& L = JetLayout::get(2);
  const int dout = std::min(d + 1, L.max_degree());
  const std::size_t so = L.size(dout), sp = Pj.node_stride(), sq = Qj.node_stride();
  std::vector<double> c(lat->size() * so, 0.0);
  double closed = 0.0;
  std::vector<std::vector<double>> row(nx);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) row[i] = axis_series(Pj.node_jet(lat->flat(i, j), d), 0);
    const auto I = line_integral_from_zero(*lat, 0, row, axis_series(field_jet(Pj, {0.0, lat->coord(1, j), 0.0}, d), 0));
    for (int i = 0; i < nx; ++i) {
      const std::size_t t = lat->flat(i, j);
      const double* p = Pj.data().data() + t * sp;
      const double* q = Qj.data().data() + t * sq;
      double* o = c.data() + t * so;
      o[0] = f0 + F0[j] + I[i];
      for (std::size_t k = 1; k < so; ++k) {
        const Powers& pw = L.powers(k);
        if (pw[0] >= 1) o[k] = p[L.index({pw[0] - 1, pw[1], 0})] / pw[0];
        else o[k] = q[L.index({0, pw[1] - 1, 0})] / pw[1];
      }
      if (d >= 1) closed = std::max(closed, std::abs(p[L.index({0, 1, 0})] - q[L.index({1, 0, 0})]));
    }
  }
  return {ScalarField::jets(lat, dout, std::move(c)), closed};
}

// U(x, y) = int_0^x int_0^y V
inline ScalarField mixed_antiderivative(const ScalarField& V, const LatticePtr& lat, int degree) {
  const ScalarField Vj = as_jets(V, lat, degree);
  const int d = Vj.degree();
  const int nx = lat->n(0), ny = lat->n(1);
  const auto& L = JetLayout::get(2);
  const int dout = std::min(d + 1, L.max_degree());
  const std::size_t so = L.size(dout), sv = Vj.node_stride();
  // W[k](x, y) = int_0^y V_{k,0}(x, t) dt on every column and on the line x = 0
  std::vector<std::vector<double>> W(d + 1, std::vector<double>(lat->size()));
  std::vector<std::vector<double>> W0(d + 1, std::vector<double>(ny));
  std::vector<std::vector<double>> col(ny);
  for (int i = -1; i < nx; ++i) {
    const double x = i < 0 ? 0.0 : lat->coord(0, i);
    std::vector<Jet> jets(ny);
    for (int j = 0; j < ny; ++j) jets[j] = i < 0 ? field_jet(Vj, {x, lat->coord(1, j), 0.0}, d) : Vj.node_jet(lat->flat(i, j), d);
    const Jet origin = field_jet(Vj, {x, 0.0, 0.0}, d);
    for (int k = 0; k <= d; ++k) {
      for (int j = 0; j < ny; ++j) col[j] = axis_series(jets[j], 1, k);
      const auto I = line_integral_from_zero(*lat, 1, col, axis_series(origin, 1, k));
      for (int j = 0; j < ny; ++j) {
        if (i < 0) W0[k][j] = I[j];
        else W[k][lat->flat(i, j)] = I[j];
      }
    }
  }
  std::vector<double> c(lat->size() * so, 0.0);
  std::vector<std::vector<double>> row(nx);
  for (int j = 0; j < ny; ++j) {
    const double y = lat->coord(1, j);
    const Jet origin = field_jet(Vj, {0.0, y, 0.0}, d);
    // U_{0,b} = (1/b) int_0^x V_{0,b-1}(s, y) ds
    for (int b = 1; b <= dout; ++b) {
      if (b - 1 > d) break;
      for (int i = 0; i < nx; ++i) row[i] = axis_series(Vj.node_jet(lat->flat(i, j), d), 0, b - 1);
      const auto I = line_integral_from_zero(*lat, 0, row, axis_series(origin, 0, b - 1));
      for (int i = 0; i < nx; ++i) c[lat->flat(i, j) * so + L.index({0, b, 0})] = I[i] / b;
    }
    // U_{0,0} = int_0^x W(s, y) ds, with W's x-series given by W[k]
    for (int i = 0; i < nx; ++i) {
      row[i].assign(d + 1, 0.0);
      for (int k = 0; k <= d; ++k) row[i][k] = W[k][lat->flat(i, j)];
    }
    std::vector<double> os(d + 1);
    for (int k = 0; k <= d; ++k) os[k] = W0[k][j];
    const auto I = line_integral_from_zero(*lat, 0, row, os);
    for (int i = 0; i < nx; ++i) c[lat->flat(i, j) * so] = I[i];
  }
  for (std::size_t t = 0; t < lat->size(); ++t) {
    const double* v = Vj.data().data() + t * sv;
    double* o = c.data() + t * so;
    for (std::size_t k = 1; k < so; ++k) {
      const Powers& pw = L.powers(k);
      if (pw[0] >= 1 && pw[1] == 0) o[k] = W[pw[0] - 1][t] / pw[0];
      else if (pw[0] >= 1 && pw[1] >= 1) o[k] = v[L.index({pw[0] - 1, pw[1] - 1, 0})] / (pw[0] * pw[1]);
    }
  }
  return ScalarField::jets(lat, dout, std::move(c));
}

struct ProfileResult {
  ScalarField F;         // F(s) with F(0) = F'(0) = 0 and F'' the profile
  double spread = 0.0;   // max |F''(node) - profile| : dependence on the other variable
  double scale = 0.0;    // max |F''| at nodes
};

// F'' equals S restricted to the line through the origin along `axis`; F depends on that axis only
inline ProfileResult double_antiderivative_profile(const ScalarField& S, const LatticePtr& lat, int axis, int degree) {
  const ScalarField Sj = as_jets(S, lat, degree);
  const int d = Sj.degree();
  const int n = lat->n(axis);
  const auto& L = JetLayout::get(2);
  const int dout = std::min(d + 2, L.max_degree());
  const std::size_t so = L.size(dout);
  auto at = [&](int i) {
    Point p{0.0, 0.0, 0.0};
    p[axis] = lat->coord(axis, i);
    return p;
  };
  std::vector<std::vector<double>> prof(n);
  for (int i = 0; i < n; ++i) prof[i] = axis_series(field_jet(Sj, at(i), d), axis);
  const auto prof0 = axis_series(field_jet(Sj, {0.0, 0.0, 0.0}, d), axis);
  const auto D1 = line_integral_from_zero(*lat, axis, prof, prof0);
  auto lift = [](double v, const std::vector<double>& s) {
    std::vector<double> r{v};
    for (std::size_t k = 0; k < s.size(); ++k) r.push_back(s[k] / (k + 1.0));
    return r;
  };
  std::vector<std::vector<double>> d1s(n);
  for (int i = 0; i < n; ++i) d1s[i] = lift(D1[i], prof[i]);
  const auto D0 = line_integral_from_zero(*lat, axis, d1s, lift(0.0, prof0));
  ProfileResult r;
  std::vector<double> c(lat->size() * so, 0.0);
  for (std::size_t t = 0; t < lat->size(); ++t) {
    const auto ix = lat->unflat(t);
    const int i = ix[axis];
    double* o = c.data() + t * so;
    Powers p{0, 0, 0};
    o[0] = D0[i];
    p[axis] = 1;
    if (dout >= 1) o[L.index(p)] = D1[i];
    for (int k = 2; k <= dout; ++k) {
      p[axis] = k;
      if (k - 2 < static_cast<int>(prof[i].size())) o[L.index(p)] = prof[i][k - 2] / (k * (k - 1.0));
    }
    const double v = Sj.node_value(t);
    r.scale = std::max(r.scale, std::abs(v));
    r.spread = std::max(r.spread, std::abs(v - prof[i][0]));
  }
  r.F = ScalarField::jets(lat, dout, std::move(c));
  return r;
}

// U(x, y) = int_0^{coord} V along `axis` (U vanishes on the line through the origin across `axis`)
inline ScalarField antiderivative(const ScalarField& V, const LatticePtr& lat, int axis, int degree) {
  const ScalarField Vj = as_jets(V, lat, degree);
  const int d = Vj.degree();
  const int other = 1 - axis;
  const int n = lat->n(axis), m = lat->n(other);
  const auto& L = JetLayout::get(2);
  const int dout = std::min(d + 1, L.max_degree());
  const std::size_t so = L.size(dout), sv = Vj.node_stride();
  std::vector<double> c(lat->size() * so, 0.0);
  std::vector<std::vector<double>> line(n);
  auto node = [&](int i, int j) { return axis == 0 ? lat->flat(i, j) : lat->flat(j, i); };
  for (int j = 0; j < m; ++j) {
    Point o{0.0, 0.0, 0.0};
    o[other] = lat->coord(other, j);
    const Jet origin = field_jet(Vj, o, d);
    for (int b = 0; b <= d; ++b) {
      for (int i = 0; i < n; ++i) line[i] = axis_series(Vj.node_jet(node(i, j), d), axis, b);
      const auto I = line_integral_from_zero(*lat, axis, line, axis_series(origin, axis, b));
      Powers p{0, 0, 0};
      p[other] = b;
      const std::size_t k = L.index(p);
      for (int i = 0; i < n; ++i) c[node(i, j) * so + k] = I[i];
    }
  }
  for (std::size_t t = 0; t < lat->size(); ++t) {
    const double* v = Vj.data().data() + t * sv;
    double* o = c.data() + t * so;
    for (std::size_t k = 1; k < so; ++k) {
      Powers p = L.powers(k);
      if (p[axis] == 0) continue;
      const int e = p[axis]--;
      o[k] = v[L.index(p)] / e;
    }
  }
  return ScalarField::jets(lat, dout, std::move(c));
}

// f restricted to the line through the origin along `axis`, extended as a function of that coordinate only
inline ScalarField line_function(const ScalarField& f, const LatticePtr& lat, int axis, int degree) {
  const ScalarField fj = f.is_closed_form() ? f : as_jets(f, lat, degree);
  const int d = std::min(degree, fj.degree());
  const auto& L = JetLayout::get(2);
  const std::size_t so = L.size(d);
  std::vector<double> c(lat->size() * so, 0.0);
  std::vector<std::vector<double>> prof(lat->n(axis));
  for (int i = 0; i < lat->n(axis); ++i) {
    Point p{0.0, 0.0, 0.0};
    p[axis] = lat->coord(axis, i);
    prof[i] = axis_series(field_jet(fj, p, d), axis);
  }
  for (std::size_t t = 0; t < lat->size(); ++t) {
    const int i = lat->unflat(t)[axis];
    Powers p{0, 0, 0};
    for (int k = 0; k <= d; ++k) {
      p[axis] = k;
      c[t * so + L.index(p)] = prof[i][k];
    }
  }
  return ScalarField::jets(lat, d, std::move(c));
}

}  // namespace guichard
