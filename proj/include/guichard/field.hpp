#pragma once

// Scalar fields in two or three variables. Three representations share one algebra:
//  - closed form: a jet-valued evaluator, so every partial derivative is exact;
//  - grid: samples on a lattice, differentiated by finite differences (order budget 3);
//  - jets: a truncated Taylor polynomial stored at every lattice node, differentiated exactly
//    up to the stored degree.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jet.hpp"
#include "lattice.hpp"

namespace guichard {

enum class Rep { closed_form, grid, jets };

inline constexpr int kGridOrderBudget = 3;

// Keep the (x, y) part of a jet in (x, y, z).
inline Jet restrict_z(const Jet& j3) {
  Jet j2(2, j3.degree());
  const auto& L2 = j2.layout();
  for (std::size_t t = 0; t < L2.size(j2.degree()); ++t) {
    const Powers& p = L2.powers(t);
    j2[t] = j3.coeff({p[0], p[1], 0});
  }
  return j2;
}

class ScalarField {
 public:
  using JetEval = std::function<Jet(const Point&, int)>;
  using Formula = std::function<Jet(std::span<const Jet>)>;

  ScalarField() = default;

  static ScalarField from_eval(int arity, JetEval e) {
    check_arity(arity);
    ScalarField f;
    f.arity_ = arity;
    f.rep_ = Rep::closed_form;
    f.eval_ = std::make_shared<const JetEval>(std::move(e));
    return f;
  }

  // formula receives the coordinate jets (x, y[, z]) expanded at the evaluation point
  static ScalarField closed_form(int arity, Formula formula) {
    return from_eval(arity, [arity, formula = std::move(formula)](const Point& p, int d) {
      std::array<Jet, 3> v;
      for (int a = 0; a < arity; ++a) v[a] = Jet::variable(arity, d, a, p[a]);
      return formula(std::span<const Jet>(v.data(), static_cast<std::size_t>(arity)));
    });
  }

  static ScalarField constant(int arity, double value) {
    return from_eval(arity, [arity, value](const Point&, int d) { return Jet::constant(arity, d, value); });
  }

  static ScalarField coordinate(int arity, int axis) {
    if (axis < 0 || axis >= arity) throw std::invalid_argument("field: axis out of range");
    return from_eval(arity, [arity, axis](const Point& p, int d) { return Jet::variable(arity, d, axis, p[axis]); });
  }

  static ScalarField grid(LatticePtr lat, std::vector<double> values, int used_order = 0) {
    if (values.size() != lat->size()) throw std::invalid_argument("field: sample count does not match lattice");
    ScalarField f;
    f.arity_ = lat->arity();
    f.rep_ = Rep::grid;
    f.lat_ = std::move(lat);
    f.data_ = std::make_shared<const std::vector<double>>(std::move(values));
    f.used_ = used_order;
    return f;
  }

  static ScalarField jets(LatticePtr lat, int degree, std::vector<double> coeffs) {
    const auto& L = JetLayout::get(lat->arity());
    if (degree < 0 || degree > L.max_degree()) throw std::invalid_argument("field: jet degree out of range");
    if (coeffs.size() != lat->size() * L.size(degree))
      throw std::invalid_argument("field: coefficient count does not match lattice");
    ScalarField f;
    f.arity_ = lat->arity();
    f.rep_ = Rep::jets;
    f.lat_ = std::move(lat);
    f.data_ = std::make_shared<const std::vector<double>>(std::move(coeffs));
    f.degree_ = degree;
    return f;
  }

  bool empty() const { return arity_ == 0; }
  int arity() const { return arity_; }
  Rep rep() const { return rep_; }
  bool is_closed_form() const { return rep_ == Rep::closed_form; }
  const LatticePtr& lattice() const { return lat_; }
  int degree() const { return rep_ == Rep::jets ? degree_ : rep_ == Rep::grid ? 0 : std::numeric_limits<int>::max(); }
  int used_order() const { return used_; }
  std::span<const double> data() const { return *data_; }
  std::size_t node_stride() const { return rep_ == Rep::jets ? layout().size(degree_) : 1; }
  const JetLayout& layout() const { return JetLayout::get(arity_); }
  const std::shared_ptr<const JetEval>& evaluator() const { return eval_; }

  ScalarField differentiate(int axis, int order = 1) const {
    if (axis < 0 || axis >= arity_) throw std::invalid_argument("field: axis out of range");
    if (order < 0 || order > 3) throw std::invalid_argument("field: derivative order must be 0..3");
    if (order == 0) return *this;
    switch (rep_) {
      case Rep::closed_form: {
        auto e = eval_;
        return from_eval(arity_, [e, axis, order](const Point& p, int d) {
          Jet j = (*e)(p, d + order);
          for (int k = 0; k < order; ++k) j = j.derivative(axis);
          return j;
        });
      }
      case Rep::jets: {
        if (degree_ < order) throw std::domain_error("field: derivative order exceeds stored jet degree");
        const auto& L = layout();
        const int d = degree_ - order;
        const std::size_t si = L.size(degree_), so = L.size(d);
        std::vector<double> out(lat_->size() * so);
        std::vector<double> a(si), b(si);
        for (std::size_t t = 0; t < lat_->size(); ++t) {
          std::copy_n(data_->data() + t * si, si, a.data());
          int cur = degree_;
          for (int k = 0; k < order; ++k, --cur) {
            kernel::derivative(L, cur, axis, a.data(), b.data());
            std::swap(a, b);
          }
          std::copy_n(a.data(), so, out.data() + t * so);
        }
        return jets(lat_, d, std::move(out));
      }
      case Rep::grid: {
        if (used_ + order > kGridOrderBudget)
          throw std::domain_error("field: grid derivative order budget exceeded");
        if (lat_->pinned(axis)) throw std::domain_error("field: cannot difference along a single-sample axis");
        const auto& st = lat_->stencils(axis, order);
        const double scale = std::pow(lat_->spacing(axis), -order);
        const std::size_t stride = lat_->stride(axis);
        std::vector<double> out(lat_->size());
        for (std::size_t t = 0; t < lat_->size(); ++t) {
          const int i = lat_->unflat(t)[axis];
          const Stencil& s = st[i];
          const std::size_t base = t - static_cast<std::size_t>(i) * stride;
          double acc = 0.0;
          for (std::size_t k = 0; k < s.w.size(); ++k)
            acc += s.w[k] * (*data_)[base + static_cast<std::size_t>(s.start + static_cast<int>(k)) * stride];
          out[t] = acc * scale;
        }
        return grid(lat_, std::move(out), used_ + order);
      }
    }
    return {};
  }
  ScalarField dx(int order = 1) const { return differentiate(0, order); }
  ScalarField dy(int order = 1) const { return differentiate(1, order); }
  ScalarField dz(int order = 1) const { return differentiate(2, order); }

  Jet jet_at(const Point& p, int degree) const {
    if (rep_ == Rep::closed_form) return (*eval_)(p, degree);
    if (rep_ == Rep::jets) {
      const std::size_t t = lat_->nearest(p);
      if (!at_node(t, p)) throw std::domain_error("field: jets of a lattice field exist only at nodes");
      return node_jet(t, degree);
    }
    throw std::domain_error("field: grid fields carry no jets");
  }

  Jet node_jet(std::size_t t, int degree) const {
    if (rep_ != Rep::jets) throw std::domain_error("field: node jets need the jets representation");
    if (degree > degree_) throw std::domain_error("field: requested jet degree exceeds stored degree");
    const std::size_t s = layout().size(degree_);
    return Jet(arity_, degree, std::span<const double>(data_->data() + t * s, s));
  }

  // exact for closed form; Taylor expansion from the nearest node for jets; node values only for grids
  double value_at(const Point& p) const {
    switch (rep_) {
      case Rep::closed_form: return (*eval_)(p, 0).value();
      case Rep::jets: {
        const std::size_t t = lat_->nearest(p);
        const Point q = lat_->point(t);
        std::array<double, 3> h{p[0] - q[0], p[1] - q[1], p[2] - q[2]};
        const std::size_t s = layout().size(degree_);
        return kernel::eval_offset(layout(), degree_, data_->data() + t * s, h);
      }
      case Rep::grid: {
        const std::size_t t = lat_->nearest(p);
        if (!at_node(t, p)) throw std::domain_error("field: grid fields are known only at nodes");
        return (*data_)[t];
      }
    }
    return 0.0;
  }
  double operator()(double x, double y, double z = 0.0) const { return value_at({x, y, z}); }

  double node_value(std::size_t t) const {
    if (rep_ == Rep::closed_form) throw std::domain_error("field: closed forms have no nodes");
    return (*data_)[t * node_stride()];
  }

  std::vector<double> values_on(const Lattice& lat) const {
    if (lat.arity() != arity_) throw std::invalid_argument("field: arity mismatch");
    std::vector<double> v(lat.size());
    if (rep_ == Rep::closed_form) {
      for (std::size_t t = 0; t < lat.size(); ++t) v[t] = (*eval_)(lat.point(t), 0).value();
      return v;
    }
    if (!lat_->same_as(lat)) throw std::invalid_argument("field: lattice mismatch");
    for (std::size_t t = 0; t < lat.size(); ++t) v[t] = node_value(t);
    return v;
  }

  ScalarField to_grid(LatticePtr lat) const {
    if (rep_ == Rep::grid) {
      if (!lat_->same_as(*lat)) throw std::invalid_argument("field: lattice mismatch");
      return *this;
    }
    return grid(lat, values_on(*lat), 0);
  }

  // jets of the given degree at every node; grid fields are lifted by finite differences
  ScalarField to_jets(LatticePtr lat, int degree) const {
    if (lat->arity() != arity_) throw std::invalid_argument("field: arity mismatch");
    const auto& L = layout();
    const std::size_t s = L.size(degree);
    if (rep_ == Rep::closed_form) {
      std::vector<double> c(lat->size() * s);
      for (std::size_t t = 0; t < lat->size(); ++t) {
        Jet j = (*eval_)(lat->point(t), degree);
        std::copy_n(j.coeffs().data(), s, c.data() + t * s);
      }
      return jets(lat, degree, std::move(c));
    }
    if (!lat_->same_as(*lat)) throw std::invalid_argument("field: lattice mismatch");
    if (rep_ == Rep::jets) {
      if (degree == degree_) return *this;
      if (degree > degree_) throw std::domain_error("field: cannot raise jet degree");
      const std::size_t si = L.size(degree_);
      std::vector<double> c(lat->size() * s);
      for (std::size_t t = 0; t < lat->size(); ++t) std::copy_n(data_->data() + t * si, s, c.data() + t * s);
      return jets(lat, degree, std::move(c));
    }
    if (used_ + degree > kGridOrderBudget) throw std::domain_error("field: grid derivative order budget exceeded");
    std::vector<double> c(lat->size() * s);
    for (std::size_t k = 0; k < s; ++k) {
      const Powers& p = L.powers(k);
      ScalarField g = *this;
      for (int a = 0; a < arity_; ++a)
        if (p[a] > 0) g = g.differentiate(a, p[a]);
      const double w = L.factorial_weight(k);
      for (std::size_t t = 0; t < lat->size(); ++t) c[t * s + k] = (*g.data_)[t] / w;
    }
    return jets(lat, degree, std::move(c));
  }

  // jets raised to a higher degree with zero top coefficients
  ScalarField padded(int degree) const {
    if (rep_ != Rep::jets) throw std::domain_error("field: padding needs the jets representation");
    if (degree <= degree_) return to_jets(lat_, degree);
    const auto& L = layout();
    const std::size_t si = L.size(degree_), so = L.size(degree);
    std::vector<double> c(lat_->size() * so, 0.0);
    for (std::size_t t = 0; t < lat_->size(); ++t) std::copy_n(data_->data() + t * si, si, c.data() + t * so);
    return jets(lat_, degree, std::move(c));
  }

  // restriction of an arity-3 field to the plane z = z0
  ScalarField restrict_to_z(double z0) const {
    if (arity_ != 3) throw std::invalid_argument("field: restriction needs arity 3");
    switch (rep_) {
      case Rep::closed_form: {
        auto e = eval_;
        return from_eval(2, [e, z0](const Point& p, int d) { return restrict_z((*e)({p[0], p[1], z0}, d)); });
      }
      case Rep::jets: {
        if (!lat_->pinned(2) || lat_->lo(2) != z0) throw std::domain_error("field: jets lattice is not the slice z0");
        auto lat2 = lat_->plane2();
        const auto& L2 = JetLayout::get(2);
        const std::size_t s2 = L2.size(degree_);
        std::vector<double> c(lat2->size() * s2);
        for (std::size_t t = 0; t < lat2->size(); ++t) {
          Jet j = restrict_z(node_jet(t, degree_));
          std::copy_n(j.coeffs().data(), s2, c.data() + t * s2);
        }
        return jets(lat2, degree_, std::move(c));
      }
      case Rep::grid: {
        int k = 0;
        if (!lat_->pinned(2)) {
          k = static_cast<int>(std::lround((z0 - lat_->lo(2)) / lat_->spacing(2)));
          if (k < 0 || k >= lat_->n(2) || std::abs(lat_->coord(2, k) - z0) > 1e-12 * (1.0 + std::abs(z0)))
            throw std::domain_error("field: z0 is not a lattice plane");
        }
        auto lat2 = lat_->plane2();
        std::vector<double> v(lat2->size());
        for (std::size_t t = 0; t < lat2->size(); ++t) v[t] = (*data_)[t + static_cast<std::size_t>(k) * lat2->size()];
        return grid(lat2, std::move(v), used_);
      }
    }
    return {};
  }

  // internal constructors used by the algebra
  static ScalarField make_grid(LatticePtr lat, std::vector<double> v, int used) { return grid(std::move(lat), std::move(v), used); }

 private:
  static void check_arity(int a) {
    if (a != 2 && a != 3) throw std::invalid_argument("field: arity must be 2 or 3");
  }
  bool at_node(std::size_t t, const Point& p) const {
    const Point q = lat_->point(t);
    for (int a = 0; a < arity_; ++a)
      if (std::abs(q[a] - p[a]) > 1e-12 * (1.0 + std::abs(p[a]))) return false;
    return true;
  }

  int arity_ = 0;
  Rep rep_ = Rep::closed_form;
  std::shared_ptr<const JetEval> eval_;
  LatticePtr lat_;
  std::shared_ptr<const std::vector<double>> data_;
  int degree_ = 0;
  int used_ = 0;
};

namespace detail {

using JetUnary = std::function<void(const JetLayout&, int, const double*, double*)>;
using JetBinary = void (*)(const JetLayout&, int, const double*, const double*, double*);

inline ScalarField apply_unary(const ScalarField& a, JetUnary jf, std::function<double(double)> sf) {
  if (a.empty()) throw std::invalid_argument("field: empty operand");
  switch (a.rep()) {
    case Rep::closed_form: {
      auto ep = a.evaluator();
      return ScalarField::from_eval(a.arity(), [ep, jf](const Point& p, int d) {
        Jet u = (*ep)(p, d);
        Jet r(u.nvars(), u.degree());
        jf(u.layout(), u.degree(), u.coeffs().data(), r.coeffs().data());
        return r;
      });
    }
    case Rep::grid: {
      std::vector<double> v(a.data().begin(), a.data().end());
      for (auto& x : v) x = sf(x);
      return ScalarField::make_grid(a.lattice(), std::move(v), a.used_order());
    }
    case Rep::jets: {
      const auto& L = a.layout();
      const std::size_t s = a.node_stride();
      std::vector<double> c(a.data().size());
      for (std::size_t t = 0; t < a.lattice()->size(); ++t) jf(L, a.degree(), a.data().data() + t * s, c.data() + t * s);
      return ScalarField::jets(a.lattice(), a.degree(), std::move(c));
    }
  }
  return {};
}

inline ScalarField apply_binary(const ScalarField& a, const ScalarField& b, JetBinary jf, double (*sf)(double, double)) {
  if (a.empty() || b.empty()) throw std::invalid_argument("field: empty operand");
  if (a.arity() != b.arity()) throw std::invalid_argument("field: arity mismatch");
  if (a.is_closed_form() && b.is_closed_form()) {
    auto ea = a.evaluator();
    auto eb = b.evaluator();
    return ScalarField::from_eval(a.arity(), [ea, eb, jf](const Point& p, int d) {
      Jet u = (*ea)(p, d), v = (*eb)(p, d);
      Jet r(u.nvars(), d);
      jf(u.layout(), d, u.coeffs().data(), v.coeffs().data(), r.coeffs().data());
      return r;
    });
  }
  const LatticePtr& lat = a.is_closed_form() ? b.lattice() : a.lattice();
  if (!a.is_closed_form() && !b.is_closed_form() && !a.lattice()->same_as(*b.lattice()))
    throw std::invalid_argument("field: lattice mismatch");
  if (a.rep() == Rep::grid || b.rep() == Rep::grid) {
    auto va = a.values_on(*lat), vb = b.values_on(*lat);
    for (std::size_t t = 0; t < va.size(); ++t) va[t] = sf(va[t], vb[t]);
    return ScalarField::make_grid(lat, std::move(va), std::max(a.used_order(), b.used_order()));
  }
  const int d = std::min(a.degree(), b.degree());
  const ScalarField ja = a.to_jets(lat, d), jb = b.to_jets(lat, d);
  const auto& L = a.layout();
  const std::size_t s = L.size(d);
  std::vector<double> c(lat->size() * s);
  for (std::size_t t = 0; t < lat->size(); ++t)
    jf(L, d, ja.data().data() + t * s, jb.data().data() + t * s, c.data() + t * s);
  return ScalarField::jets(lat, d, std::move(c));
}

inline void jadd(const JetLayout& L, int d, const double* a, const double* b, double* o) {
  for (std::size_t t = 0; t < L.size(d); ++t) o[t] = a[t] + b[t];
}
inline void jsub(const JetLayout& L, int d, const double* a, const double* b, double* o) {
  for (std::size_t t = 0; t < L.size(d); ++t) o[t] = a[t] - b[t];
}

}  // namespace detail

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return detail::apply_binary(a, b, detail::jadd, [](double x, double y) { return x + y; });
}
inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return detail::apply_binary(a, b, detail::jsub, [](double x, double y) { return x - y; });
}
inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return detail::apply_binary(a, b, kernel::mul, [](double x, double y) { return x * y; });
}
inline ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  return detail::apply_binary(a, b, kernel::div, [](double x, double y) { return x / y; });
}

inline ScalarField operator*(const ScalarField& a, double v) {
  return detail::apply_unary(
      a, [v](const JetLayout& L, int d, const double* u, double* o) { for (std::size_t t = 0; t < L.size(d); ++t) o[t] = v * u[t]; },
      [v](double x) { return v * x; });
}
inline ScalarField operator*(double v, const ScalarField& a) { return a * v; }
inline ScalarField operator/(const ScalarField& a, double v) { return a * (1.0 / v); }
inline ScalarField operator-(const ScalarField& a) { return a * -1.0; }
inline ScalarField operator+(const ScalarField& a, double v) {
  return detail::apply_unary(
      a,
      [v](const JetLayout& L, int d, const double* u, double* o) {
        for (std::size_t t = 0; t < L.size(d); ++t) o[t] = u[t];
        o[0] += v;
      },
      [v](double x) { return x + v; });
}
inline ScalarField operator+(double v, const ScalarField& a) { return a + v; }
inline ScalarField operator-(const ScalarField& a, double v) { return a + (-v); }
inline ScalarField operator-(double v, const ScalarField& a) { return (-a) + v; }
inline ScalarField operator/(double v, const ScalarField& a) {
  return detail::apply_unary(
      a,
      [v](const JetLayout& L, int d, const double* u, double* o) {
        std::vector<double> one(L.size(d), 0.0);
        one[0] = v;
        kernel::div(L, d, one.data(), u, o);
      },
      [v](double x) { return v / x; });
}

inline ScalarField sin(const ScalarField& a) {
  return detail::apply_unary(
      a,
      [](const JetLayout& L, int d, const double* u, double* o) {
        std::vector<double> c(L.size(d));
        kernel::sincos(L, d, u, o, c.data());
      },
      [](double x) { return std::sin(x); });
}
inline ScalarField cos(const ScalarField& a) {
  return detail::apply_unary(
      a,
      [](const JetLayout& L, int d, const double* u, double* o) {
        std::vector<double> s(L.size(d));
        kernel::sincos(L, d, u, s.data(), o);
      },
      [](double x) { return std::cos(x); });
}
// sin and cos in one pass
inline std::pair<ScalarField, ScalarField> sincos(const ScalarField& a) {
  if (a.rep() != Rep::jets) return {sin(a), cos(a)};
  const auto& L = a.layout();
  const std::size_t s = a.node_stride();
  std::vector<double> sn(a.data().size()), cs(a.data().size());
  for (std::size_t t = 0; t < a.lattice()->size(); ++t)
    kernel::sincos(L, a.degree(), a.data().data() + t * s, sn.data() + t * s, cs.data() + t * s);
  return {ScalarField::jets(a.lattice(), a.degree(), std::move(sn)), ScalarField::jets(a.lattice(), a.degree(), std::move(cs))};
}
inline ScalarField tan(const ScalarField& a) {
  return detail::apply_unary(
      a,
      [](const JetLayout& L, int d, const double* u, double* o) {
        std::vector<double> s(L.size(d)), c(L.size(d));
        kernel::sincos(L, d, u, s.data(), c.data());
        kernel::div(L, d, s.data(), c.data(), o);
      },
      [](double x) { return std::tan(x); });
}
inline ScalarField cot(const ScalarField& a) {
  return detail::apply_unary(
      a,
      [](const JetLayout& L, int d, const double* u, double* o) {
        std::vector<double> s(L.size(d)), c(L.size(d));
        kernel::sincos(L, d, u, s.data(), c.data());
        kernel::div(L, d, c.data(), s.data(), o);
      },
      [](double x) { return std::cos(x) / std::sin(x); });
}
inline ScalarField exp(const ScalarField& a) {
  return detail::apply_unary(a, [](const JetLayout& L, int d, const double* u, double* o) { kernel::exp(L, d, u, o); },
                             [](double x) { return std::exp(x); });
}
inline ScalarField log(const ScalarField& a) {
  return detail::apply_unary(a, [](const JetLayout& L, int d, const double* u, double* o) { kernel::log(L, d, u, o); },
                             [](double x) { return std::log(x); });
}
inline ScalarField sqrt(const ScalarField& a) {
  return detail::apply_unary(a, [](const JetLayout& L, int d, const double* u, double* o) { kernel::sqrt(L, d, u, o); },
                             [](double x) { return std::sqrt(x); });
}
inline ScalarField atan(const ScalarField& a) {
  return detail::apply_unary(a, [](const JetLayout& L, int d, const double* u, double* o) { kernel::atan(L, d, u, o); },
                             [](double x) { return std::atan(x); });
}
inline ScalarField pow(const ScalarField& a, double r) {
  return detail::apply_unary(
      a, [r](const JetLayout& L, int d, const double* u, double* o) { kernel::pow(L, d, u, r, o); },
      [r](double x) { return std::pow(x, r); });
}
inline ScalarField square(const ScalarField& a) { return a * a; }

// Arity-3 jets on the slice z = z0 assembled from z-derivative fields stack[k] = d^k f/dz^k.
inline ScalarField from_z_stack(const std::vector<ScalarField>& stack, const LatticePtr& lat2, double z0, int degree) {
  if (stack.empty()) throw std::invalid_argument("field: empty z-stack");
  const int kmax = std::min<int>(degree, static_cast<int>(stack.size()) - 1);
  std::vector<ScalarField> js;
  for (int k = 0; k <= kmax; ++k) js.push_back(stack[k].to_jets(lat2, degree - k));
  auto lat3 = lat2->slice3(z0);
  const auto& L2 = JetLayout::get(2);
  const auto& L3 = JetLayout::get(3);
  const std::size_t s3 = L3.size(degree);
  std::vector<double> c(lat3->size() * s3, 0.0);
  for (std::size_t t3 = 0; t3 < s3; ++t3) {
    const Powers& p = L3.powers(t3);
    if (p[2] > kmax) continue;
    const int k = p[2];
    double fact = 1.0;
    for (int q = 2; q <= k; ++q) fact *= q;
    const std::size_t i2 = L2.index({p[0], p[1], 0});
    const std::size_t s2 = L2.size(degree - k);
    const auto d = js[k].data();
    for (std::size_t t = 0; t < lat3->size(); ++t) c[t * s3 + t3] = d[t * s2 + i2] / fact;
  }
  return ScalarField::jets(lat3, degree, std::move(c));
}

// ---- norms ----

// sup over lattice nodes at least `layers` away from the boundary
inline double sup_norm(const ScalarField& f, const Lattice& lat, int layers) {
  const auto v = f.values_on(lat);
  double m = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) {
    if (!lat.interior(t, layers)) continue;
    if (std::isnan(v[t])) return std::numeric_limits<double>::quiet_NaN();
    m = std::max(m, std::abs(v[t]));
  }
  return m;
}

// natural interior: the lattice margin for grid fields, every node for jets
inline double sup_norm(const ScalarField& f) {
  if (f.is_closed_form()) throw std::invalid_argument("field: closed-form norm needs a lattice or sample points");
  return sup_norm(f, *f.lattice(), f.rep() == Rep::grid ? f.lattice()->margin() : 0);
}

inline double sup_norm(const ScalarField& f, const std::vector<Point>& pts) {
  double m = 0.0;
  for (const auto& p : pts) {
    const double v = f.value_at(p);
    if (std::isnan(v)) return std::numeric_limits<double>::quiet_NaN();
    m = std::max(m, std::abs(v));
  }
  return m;
}

inline double min_abs(const ScalarField& f, const Lattice& lat, int layers) {
  const auto v = f.values_on(lat);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < v.size(); ++t)
    if (lat.interior(t, layers)) m = std::min(m, std::abs(v[t]));
  return m;
}

// quasi-random points (2D/3D Halton) inside a box
inline std::vector<Point> halton_points(int count, int arity, const Point& lo, const Point& hi) {
  auto radical = [](int i, int base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= base;
      r += f * (i % base);
      i /= base;
    }
    return r;
  };
  const int bases[3] = {2, 3, 5};
  std::vector<Point> pts;
  for (int i = 1; i <= count; ++i) {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < arity; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * radical(i, bases[a]);
    pts.push_back(p);
  }
  return pts;
}

// ---- exterior derivative residuals ----

struct WedgeResiduals {
  ScalarField d_beta;                    // dβ, the dx∧dy∧dz coefficient
  std::array<ScalarField, 3> d_alpha;    // dα on dy∧dz, dz∧dx, dx∧dy
};

// α = a1 dx + a2 dy + a3 dz;  β = b1 dy∧dz + b2 dz∧dx + b3 dx∧dy
inline WedgeResiduals wedge_residuals(const std::array<ScalarField, 3>& alpha, const std::array<ScalarField, 3>& beta) {
  for (const auto& f : alpha)
    if (f.arity() != 3) throw std::invalid_argument("wedge_residuals: coefficients must have arity 3");
  for (const auto& f : beta)
    if (f.arity() != 3) throw std::invalid_argument("wedge_residuals: coefficients must have arity 3");
  WedgeResiduals r;
  r.d_alpha[0] = alpha[2].dy() - alpha[1].dz();
  r.d_alpha[1] = alpha[0].dz() - alpha[2].dx();
  r.d_alpha[2] = alpha[1].dx() - alpha[0].dy();
  r.d_beta = beta[0].dx() + beta[1].dy() + beta[2].dz();
  return r;
}

}  // namespace guichard
