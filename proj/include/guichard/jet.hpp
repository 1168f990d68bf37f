#pragma once

// Truncated multivariate Taylor polynomials ("jets") in up to three variables.
// Coefficients are stored in graded order: all monomials of total degree 0,
// then degree 1, ... so a lower-degree truncation is a prefix of the array.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace guichard {

using Powers = std::array<int, 3>;

class JetLayout {
 public:
  struct Triple {
    std::uint32_t a, b, out;
  };
  struct DerivEntry {
    std::uint32_t src, dst;
    double factor;
  };

  static const JetLayout& get(int nvars) {
    static const JetLayout l1(1, 96), l2(2, 28), l3(3, 16);
    switch (nvars) {
      case 1: return l1;
      case 2: return l2;
      case 3: return l3;
      default: throw std::invalid_argument("jet: nvars must be 1, 2 or 3");
    }
  }

  int nvars() const { return nv_; }
  int max_degree() const { return maxdeg_; }
  std::size_t size(int degree) const { return block_begin_[degree + 1]; }
  std::size_t block_begin(int k) const { return block_begin_[k]; }
  std::size_t block_end(int k) const { return block_begin_[k + 1]; }
  const Powers& powers(std::size_t i) const { return powers_[i]; }
  int degree_of(std::size_t i) const { return powers_[i][0] + powers_[i][1] + powers_[i][2]; }

  std::size_t index(const Powers& p) const {
    const int k = p[0] + p[1] + p[2];
    if (k > maxdeg_) throw std::out_of_range("jet: degree exceeds layout");
    // within a block, monomials are ordered by decreasing power of the first variable
    std::size_t pos = 0;
    if (nv_ == 2) {
      pos = static_cast<std::size_t>(k - p[0]);
    } else if (nv_ == 3) {
      const int r = k - p[0];  // remaining degree for (y, z)
      pos = static_cast<std::size_t>(r * (r + 1) / 2 + (r - p[1]));
    }
    return block_begin_[k] + pos;
  }

  std::span<const Triple> block_product(int i, int j) const {
    const auto& v = products_[static_cast<std::size_t>(i) * (maxdeg_ + 1) + j];
    return {v.data(), v.size()};
  }

  // entries for d/d(axis), restricted to sources below size(degree)
  std::span<const DerivEntry> derivative(int axis, int degree) const {
    const auto& v = deriv_[axis];
    return {v.data(), deriv_count_[axis][degree]};
  }

  double factorial_weight(std::size_t i) const { return factw_[i]; }

 private:
  JetLayout(int nv, int maxdeg) : nv_(nv), maxdeg_(maxdeg) {
    block_begin_.push_back(0);
    for (int k = 0; k <= maxdeg_; ++k) {
      if (nv_ == 1) {
        powers_.push_back({k, 0, 0});
      } else if (nv_ == 2) {
        for (int a = k; a >= 0; --a) powers_.push_back({a, k - a, 0});
      } else {
        for (int a = k; a >= 0; --a)
          for (int b = k - a; b >= 0; --b) powers_.push_back({a, b, k - a - b});
      }
      block_begin_.push_back(powers_.size());
    }
    block_begin_.push_back(powers_.size());
    products_.resize(static_cast<std::size_t>(maxdeg_ + 1) * (maxdeg_ + 1));
    for (int i = 0; i <= maxdeg_; ++i)
      for (int j = 0; i + j <= maxdeg_; ++j) {
        auto& v = products_[static_cast<std::size_t>(i) * (maxdeg_ + 1) + j];
        for (std::size_t a = block_begin_[i]; a < block_begin_[i + 1]; ++a)
          for (std::size_t b = block_begin_[j]; b < block_begin_[j + 1]; ++b) {
            Powers p{powers_[a][0] + powers_[b][0], powers_[a][1] + powers_[b][1],
                     powers_[a][2] + powers_[b][2]};
            v.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                         static_cast<std::uint32_t>(index(p))});
          }
      }
    for (int axis = 0; axis < nv_; ++axis) {
      auto& v = deriv_[axis];
      deriv_count_[axis].assign(maxdeg_ + 1, 0);
      for (int d = 0; d <= maxdeg_; ++d) {
        for (std::size_t s = block_begin_[d]; s < block_begin_[d + 1]; ++s) {
          Powers p = powers_[s];
          if (p[axis] == 0) continue;
          const double f = p[axis];
          --p[axis];
          v.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(index(p)), f});
        }
        deriv_count_[axis][d] = v.size();
      }
    }
    for (const auto& p : powers_) {
      double w = 1.0;
      for (int a = 0; a < 3; ++a)
        for (int t = 2; t <= p[a]; ++t) w *= t;
      factw_.push_back(w);
    }
  }

  int nv_, maxdeg_;
  std::vector<std::size_t> block_begin_;
  std::vector<Powers> powers_;
  std::vector<std::vector<Triple>> products_;
  std::array<std::vector<DerivEntry>, 3> deriv_;
  std::array<std::vector<std::size_t>, 3> deriv_count_;
  std::vector<double> factw_;
};

// Raw kernels on coefficient arrays of a given degree. Outputs never alias inputs.
namespace kernel {

inline void block_mul_acc(const JetLayout& L, int i, int j, const double* a, const double* b,
                          double* out, double scale = 1.0) {
  for (const auto& t : L.block_product(i, j)) out[t.out] += scale * a[t.a] * b[t.b];
}

inline void mul(const JetLayout& L, int d, const double* a, const double* b, double* out) {
  const std::size_t n = L.size(d);
  for (std::size_t k = 0; k < n; ++k) out[k] = 0.0;
  for (int i = 0; i <= d; ++i)
    for (int j = 0; i + j <= d; ++j) block_mul_acc(L, i, j, a, b, out);
}

// out = a / b
inline void div(const JetLayout& L, int d, const double* a, const double* b, double* out) {
  const double b0 = b[0];
  for (int k = 0; k <= d; ++k) {
    const std::size_t lo = L.block_begin(k), hi = L.block_end(k);
    for (std::size_t t = lo; t < hi; ++t) out[t] = a[t];
    for (int j = 1; j <= k; ++j) block_mul_acc(L, j, k - j, b, out, out, -1.0);
    for (std::size_t t = lo; t < hi; ++t) out[t] /= b0;
  }
}

namespace detail {
inline std::vector<double>& scratch(int slot) {
  thread_local std::array<std::vector<double>, 4> s;
  return s[slot];
}
// w_j = j * u_j (Euler operator applied to u)
inline const double* euler(const JetLayout& L, int d, const double* u, int slot) {
  auto& w = scratch(slot);
  w.resize(L.size(d));
  for (int k = 0; k <= d; ++k)
    for (std::size_t t = L.block_begin(k); t < L.block_end(k); ++t) w[t] = k * u[t];
  return w.data();
}
inline void scale_block(const JetLayout& L, int k, double* out, double f) {
  for (std::size_t t = L.block_begin(k); t < L.block_end(k); ++t) out[t] *= f;
}
inline void zero(const JetLayout& L, int d, double* out) {
  for (std::size_t t = 0; t < L.size(d); ++t) out[t] = 0.0;
}
}  // namespace detail

inline void exp(const JetLayout& L, int d, const double* u, double* out) {
  const double* w = detail::euler(L, d, u, 0);
  detail::zero(L, d, out);
  out[0] = std::exp(u[0]);
  for (int k = 1; k <= d; ++k) {
    for (int j = 1; j <= k; ++j) block_mul_acc(L, j, k - j, w, out, out);
    detail::scale_block(L, k, out, 1.0 / k);
  }
}

inline void sincos(const JetLayout& L, int d, const double* u, double* s, double* c) {
  const double* w = detail::euler(L, d, u, 0);
  detail::zero(L, d, s);
  detail::zero(L, d, c);
  s[0] = std::sin(u[0]);
  c[0] = std::cos(u[0]);
  for (int k = 1; k <= d; ++k) {
    for (int j = 1; j <= k; ++j) {
      block_mul_acc(L, j, k - j, w, c, s);
      block_mul_acc(L, j, k - j, w, s, c, -1.0);
    }
    detail::scale_block(L, k, s, 1.0 / k);
    detail::scale_block(L, k, c, 1.0 / k);
  }
}

inline void log(const JetLayout& L, int d, const double* u, double* out) {
  if (!(u[0] > 0.0)) throw std::domain_error("jet log: nonpositive argument");
  const double* w = detail::euler(L, d, u, 0);
  auto& lw = detail::scratch(1);
  lw.assign(L.size(d), 0.0);
  detail::zero(L, d, out);
  out[0] = std::log(u[0]);
  // u * E(l) = E(u)
  for (int k = 1; k <= d; ++k) {
    for (std::size_t t = L.block_begin(k); t < L.block_end(k); ++t) lw[t] = w[t];
    for (int j = 1; j < k; ++j) block_mul_acc(L, k - j, j, u, lw.data(), lw.data(), -1.0);
    for (std::size_t t = L.block_begin(k); t < L.block_end(k); ++t) {
      lw[t] /= u[0];
      out[t] = lw[t] / k;
    }
  }
}

// u^r for real r, u0 > 0 (or integer-valued r)
inline void pow(const JetLayout& L, int d, const double* u, double r, double* out) {
  const double* w = detail::euler(L, d, u, 0);
  auto& pw = detail::scratch(1);
  pw.assign(L.size(d), 0.0);
  detail::zero(L, d, out);
  out[0] = std::pow(u[0], r);
  if (u[0] == 0.0) {
    if (d > 0) throw std::domain_error("jet pow: zero base");
    return;
  }
  // u E(p) = r p E(u)
  for (int k = 1; k <= d; ++k) {
    for (int j = 1; j <= k; ++j) block_mul_acc(L, j, k - j, w, out, pw.data(), r);
    for (int j = 1; j < k; ++j) block_mul_acc(L, j, k - j, u, pw.data(), pw.data(), -1.0);
    for (std::size_t t = L.block_begin(k); t < L.block_end(k); ++t) {
      pw[t] /= u[0];
      out[t] = pw[t] / k;
    }
  }
}

inline void sqrt(const JetLayout& L, int d, const double* u, double* out) {
  if (!(u[0] > 0.0)) throw std::domain_error("jet sqrt: nonpositive argument");
  detail::zero(L, d, out);
  out[0] = std::sqrt(u[0]);
  for (int k = 1; k <= d; ++k) {
    for (std::size_t t = L.block_begin(k); t < L.block_end(k); ++t) out[t] = u[t];
    for (int j = 1; j < k; ++j) block_mul_acc(L, j, k - j, out, out, out, -1.0);
    detail::scale_block(L, k, out, 0.5 / out[0]);
  }
}

inline void atan(const JetLayout& L, int d, const double* u, double* out) {
  auto& q = detail::scratch(2);
  auto& r = detail::scratch(3);
  q.resize(L.size(d));
  r.resize(L.size(d));
  mul(L, d, u, u, q.data());
  q[0] += 1.0;
  detail::zero(L, d, r.data());
  r[0] = 1.0;
  std::vector<double> inv(L.size(d));
  div(L, d, r.data(), q.data(), inv.data());
  const double* w = detail::euler(L, d, u, 0);
  detail::zero(L, d, out);
  out[0] = std::atan(u[0]);
  for (int k = 1; k <= d; ++k) {
    for (int j = 1; j <= k; ++j) block_mul_acc(L, j, k - j, w, inv.data(), out);
    detail::scale_block(L, k, out, 1.0 / k);
  }
}

// out = sum_k f[k] (u - u0)^k, with f the Taylor coefficients of a univariate function at u0
inline void compose(const JetLayout& L, int d, std::span<const double> f, const double* u, double* out) {
  const std::size_t n = L.size(d);
  std::vector<double> h(u, u + n), tmp(n);
  h[0] = 0.0;
  const int top = std::min<int>(d, static_cast<int>(f.size()) - 1);
  detail::zero(L, d, out);
  out[0] = f[top];
  for (int k = top - 1; k >= 0; --k) {
    mul(L, d, out, h.data(), tmp.data());
    tmp[0] += f[k];
    std::copy(tmp.begin(), tmp.end(), out);
  }
}

inline void derivative(const JetLayout& L, int d, int axis, const double* a, double* out) {
  if (d < 1) throw std::domain_error("jet: derivative of a degree-0 jet");
  detail::zero(L, d - 1, out);
  for (const auto& e : L.derivative(axis, d)) out[e.dst] = e.factor * a[e.src];
}

inline double eval_offset(const JetLayout& L, int d, const double* a, std::span<const double> h) {
  // Horner by total degree on homogeneous blocks
  double sum = 0.0;
  for (std::size_t t = 0; t < L.size(d); ++t) {
    const Powers& p = L.powers(t);
    double m = a[t];
    for (int ax = 0; ax < L.nvars(); ++ax)
      for (int e = 0; e < p[ax]; ++e) m *= h[ax];
    sum += m;
  }
  return sum;
}

}  // namespace kernel

class Jet {
 public:
  Jet() = default;
  Jet(int nvars, int degree) : nv_(nvars), deg_(degree), c_(JetLayout::get(nvars).size(degree), 0.0) {
    if (degree < 0 || degree > layout().max_degree()) throw std::out_of_range("jet: degree out of range");
  }
  Jet(int nvars, int degree, std::span<const double> coeffs) : Jet(nvars, degree) {
    if (coeffs.size() < c_.size()) throw std::invalid_argument("jet: too few coefficients");
    std::copy(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(c_.size()), c_.begin());
  }

  static Jet constant(int nvars, int degree, double v) {
    Jet j(nvars, degree);
    j.c_[0] = v;
    return j;
  }
  static Jet variable(int nvars, int degree, int axis, double v) {
    Jet j = constant(nvars, degree, v);
    if (degree >= 1) {
      Powers p{0, 0, 0};
      p[axis] = 1;
      j.c_[j.layout().index(p)] = 1.0;
    }
    return j;
  }

  int nvars() const { return nv_; }
  int degree() const { return deg_; }
  bool empty() const { return c_.empty(); }
  const JetLayout& layout() const { return JetLayout::get(nv_); }
  double value() const { return c_[0]; }
  double coeff(const Powers& p) const {
    const int k = p[0] + p[1] + p[2];
    return k > deg_ ? 0.0 : c_[layout().index(p)];
  }
  // exact partial derivative d^p f at the expansion point
  double partial(const Powers& p) const {
    const std::size_t i = layout().index(p);
    if (p[0] + p[1] + p[2] > deg_) throw std::out_of_range("jet: partial beyond degree");
    return c_[i] * layout().factorial_weight(i);
  }
  std::span<double> coeffs() { return c_; }
  std::span<const double> coeffs() const { return c_; }
  double& operator[](std::size_t i) { return c_[i]; }
  double operator[](std::size_t i) const { return c_[i]; }

  Jet truncated(int d) const {
    if (d > deg_) throw std::out_of_range("jet: truncation above degree");
    return Jet(nv_, d, c_);
  }
  Jet padded(int d) const {
    Jet j(nv_, d);
    std::copy(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(std::min(c_.size(), j.c_.size())), j.c_.begin());
    return j;
  }
  Jet derivative(int axis) const {
    Jet j(nv_, deg_ - 1);
    kernel::derivative(layout(), deg_, axis, c_.data(), j.c_.data());
    return j;
  }
  double eval_offset(std::span<const double> h) const { return kernel::eval_offset(layout(), deg_, c_.data(), h); }

  Jet& operator+=(const Jet& o) { return combine(o, 1.0); }
  Jet& operator-=(const Jet& o) { return combine(o, -1.0); }
  Jet& operator+=(double v) { c_[0] += v; return *this; }
  Jet& operator-=(double v) { c_[0] -= v; return *this; }
  Jet& operator*=(double v) { for (auto& x : c_) x *= v; return *this; }
  Jet& operator/=(double v) { for (auto& x : c_) x /= v; return *this; }

 private:
  Jet& combine(const Jet& o, double s) {
    check(o);
    if (o.deg_ < deg_) *this = truncated(o.deg_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
    return *this;
  }
  void check(const Jet& o) const {
    if (o.nv_ != nv_) throw std::invalid_argument("jet: variable count mismatch");
  }
  friend Jet operator*(const Jet&, const Jet&);
  friend Jet operator/(const Jet&, const Jet&);

  int nv_ = 0, deg_ = 0;
  std::vector<double> c_;
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator+(Jet a, double v) { return a += v; }
inline Jet operator+(double v, Jet a) { return a += v; }
inline Jet operator-(Jet a, double v) { return a -= v; }
inline Jet operator-(double v, Jet a) { a *= -1.0; return a += v; }
inline Jet operator-(Jet a) { a *= -1.0; return a; }
inline Jet operator*(Jet a, double v) { return a *= v; }
inline Jet operator*(double v, Jet a) { return a *= v; }
inline Jet operator/(Jet a, double v) { return a /= v; }

inline Jet operator*(const Jet& a, const Jet& b) {
  a.check(b);
  const int d = std::min(a.deg_, b.deg_);
  Jet r(a.nv_, d);
  kernel::mul(a.layout(), d, a.c_.data(), b.c_.data(), r.c_.data());
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  a.check(b);
  if (b.c_[0] == 0.0) throw std::domain_error("jet: division by zero");
  const int d = std::min(a.deg_, b.deg_);
  Jet r(a.nv_, d);
  kernel::div(a.layout(), d, a.c_.data(), b.c_.data(), r.c_.data());
  return r;
}

inline Jet operator/(double v, const Jet& b) { return Jet::constant(b.nvars(), b.degree(), v) / b; }

#define GUICHARD_JET_UNARY(name, call)                          \
  inline Jet name(const Jet& u) {                               \
    Jet r(u.nvars(), u.degree());                               \
    kernel::call(u.layout(), u.degree(), u.coeffs().data(), r.coeffs().data()); \
    return r;                                                   \
  }
GUICHARD_JET_UNARY(exp, exp)
GUICHARD_JET_UNARY(log, log)
GUICHARD_JET_UNARY(sqrt, sqrt)
GUICHARD_JET_UNARY(atan, atan)
#undef GUICHARD_JET_UNARY

inline Jet sin(const Jet& u) {
  Jet s(u.nvars(), u.degree()), c(u.nvars(), u.degree());
  kernel::sincos(u.layout(), u.degree(), u.coeffs().data(), s.coeffs().data(), c.coeffs().data());
  return s;
}
inline Jet cos(const Jet& u) {
  Jet s(u.nvars(), u.degree()), c(u.nvars(), u.degree());
  kernel::sincos(u.layout(), u.degree(), u.coeffs().data(), s.coeffs().data(), c.coeffs().data());
  return c;
}
inline Jet tan(const Jet& u) {
  Jet s(u.nvars(), u.degree()), c(u.nvars(), u.degree());
  kernel::sincos(u.layout(), u.degree(), u.coeffs().data(), s.coeffs().data(), c.coeffs().data());
  return s / c;
}
inline Jet pow(const Jet& u, double r) {
  Jet out(u.nvars(), u.degree());
  if (r == std::round(r) && r >= 0 && r <= 8) {
    out = Jet::constant(u.nvars(), u.degree(), 1.0);
    for (int k = 0; k < static_cast<int>(r); ++k) out = out * u;
    return out;
  }
  kernel::pow(u.layout(), u.degree(), u.coeffs().data(), r, out.coeffs().data());
  return out;
}
inline Jet square(const Jet& u) { return u * u; }

// Taylor coefficients f_k = f^(k)(t0)/k! of a univariate function composed with u
inline Jet compose(std::span<const double> f, const Jet& u) {
  Jet r(u.nvars(), u.degree());
  kernel::compose(u.layout(), u.degree(), f, u.coeffs().data(), r.coeffs().data());
  return r;
}

}  // namespace guichard
