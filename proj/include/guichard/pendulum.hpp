#pragma once

// g'' = alpha sin 2g with first integral (g')^2 = beta - alpha cos 2g.
// Integrated by a high-order Taylor method on a node ladder; every node stores the
// series of (g, G1 = int_0^t g'^2, G2 = int_0^t G1), so g and its iterated integrals can be
// composed with jets.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jet.hpp"

namespace guichard {

class PendulumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PendulumSolution {
 public:
  struct Series {
    std::vector<double> g, G1, G2;  // Taylor coefficients about some t0
  };

  double alpha_const = 0.0, beta_const = 0.0;
  double g0 = 0.0, dg0 = 0.0;
  double t_lo = 0.0, t_hi = 0.0;

  // Taylor coefficients at an arbitrary t (degree <= kOrder)
  Series series_at(double t, int degree) const {
    const auto [g, dg, G1, G2] = state_at(t);
    return expand(g, dg, G1, G2, degree);
  }

  double g(double t) const { return state_at(t)[0]; }
  double dg(double t) const { return state_at(t)[1]; }
  double ddg(double t) const { return alpha_const * std::sin(2.0 * g(t)); }
  double G1(double t) const { return state_at(t)[2]; }
  double G2(double t) const { return state_at(t)[3]; }

  Jet g_of(const Jet& u) const { return compose_with(u, 0); }
  Jet G1_of(const Jet& u) const { return compose_with(u, 1); }
  Jet G2_of(const Jet& u) const { return compose_with(u, 2); }
  Jet dg_of(const Jet& u) const {
    const Series s = series_at(u.value(), u.degree() + 1);
    std::vector<double> d(s.g.size() - 1);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (k + 1.0) * s.g[k + 1];
    return compose(std::span<const double>(d), u);
  }

  // max |g'^2 - (beta - alpha cos 2g)| over the node ladder
  double drift() const { return drift_; }
  double min_abs_dg() const { return min_dg_; }

  // nested adaptive quadrature of G2, used as an independent cross-check
  double G2_quadrature(double t, double tol = 1e-12) const {
    using boost::math::quadrature::gauss_kronrod;
    auto dg2 = [this](double s) {
      const double v = dg(s);
      return v * v;
    };
    auto G1q = [&](double s) { return s == 0.0 ? 0.0 : gauss_kronrod<double, 31>::integrate(dg2, 0.0, s, 15, tol); };
    return t == 0.0 ? 0.0 : gauss_kronrod<double, 31>::integrate(G1q, 0.0, t, 15, tol);
  }

  static constexpr int kOrder = 30;
  static constexpr double kStep = 1.0 / 32.0;

  static PendulumSolution solve(double alpha, double beta, double t_lo, double t_hi, double g0 = std::numbers::pi / 4,
                                int branch = +1) {
    if (!(t_hi > t_lo) || t_lo > 0.0 || t_hi < 0.0) throw PendulumError("pendulum: t range must contain 0");
    const double w = beta - alpha * std::cos(2.0 * g0);
    if (!(w > 0.0)) throw PendulumError("pendulum: beta - alpha cos 2g(0) must be positive");
    PendulumSolution p;
    p.alpha_const = alpha;
    p.beta_const = beta;
    p.g0 = g0;
    p.dg0 = (branch >= 0 ? 1.0 : -1.0) * std::sqrt(w);
    p.t_lo = t_lo;
    p.t_hi = t_hi;
    p.k_lo_ = static_cast<int>(std::floor(t_lo / kStep)) - 1;
    const int k_hi = static_cast<int>(std::ceil(t_hi / kStep)) + 1;
    p.nodes_.resize(static_cast<std::size_t>(k_hi - p.k_lo_ + 1));
    const int k0 = -p.k_lo_;
    p.nodes_[k0] = p.expand(g0, p.dg0, 0.0, 0.0, kOrder);
    for (int dir : {+1, -1}) {
      for (int k = k0; k + dir >= 0 && k + dir < static_cast<int>(p.nodes_.size()); k += dir) {
        const Series& s = p.nodes_[k];
        const double h = dir * kStep;
        p.nodes_[k + dir] = p.expand(horner(s.g, h), horner_d(s.g, h), horner(s.G1, h), horner(s.G2, h), kOrder);
      }
    }
    p.drift_ = 0.0;
    p.min_dg_ = std::abs(p.dg0);
    for (const auto& s : p.nodes_) {
      const double gd = s.g[1];
      p.drift_ = std::max(p.drift_, std::abs(gd * gd - (beta - alpha * std::cos(2.0 * s.g[0]))));
      p.min_dg_ = std::min(p.min_dg_, std::abs(gd));
    }
    if (p.min_dg_ < 1e-8) throw PendulumError("pendulum: g' vanishes in range");
    if (p.drift_ > 1e-10) throw PendulumError("pendulum: first-integral drift " + std::to_string(p.drift_) + " exceeds 1e-10");
    for (double t : {t_lo, t_hi}) {
      const double q = p.G2_quadrature(t), s = p.G2(t);
      if (std::abs(q - s) > 1e-10 * std::max(1.0, std::abs(q)))
        throw PendulumError("pendulum: iterated integral disagrees with quadrature at t=" + std::to_string(t));
    }
    return p;
  }

 private:
  static double horner(const std::vector<double>& c, double h) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * h + c[k];
    return v;
  }
  static double horner_d(const std::vector<double>& c, double h) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) v = v * h + static_cast<double>(k) * c[k];
    return v;
  }

  std::array<double, 4> state_at(double t) const {
    if (nodes_.empty()) throw PendulumError("pendulum: not solved");
    if (t < t_lo - 1e-12 || t > t_hi + 1e-12)
      throw PendulumError("pendulum: t=" + std::to_string(t) + " outside the solved range");
    const int k = static_cast<int>(std::lround(t / kStep));
    const Series& s = nodes_.at(static_cast<std::size_t>(k - k_lo_));
    const double h = t - k * kStep;
    return {horner(s.g, h), horner_d(s.g, h), horner(s.G1, h), horner(s.G2, h)};
  }

  // Taylor coefficients of g, G1, G2 from the state at one point
  Series expand(double g, double dg, double G1, double G2, int n) const {
    Series s;
    s.g.assign(n + 1, 0.0);
    s.G1.assign(n + 1, 0.0);
    s.G2.assign(n + 1, 0.0);
    s.g[0] = g;
    if (n >= 1) s.g[1] = dg;
    std::vector<double> sn(n + 1, 0.0), cs(n + 1, 0.0);
    sn[0] = std::sin(2.0 * g);
    cs[0] = std::cos(2.0 * g);
    for (int k = 0; k + 2 <= n; ++k) {
      if (k >= 1) {
        double a = 0.0, b = 0.0;
        for (int j = 1; j <= k; ++j) {
          const double uj = 2.0 * j * s.g[j];
          a += uj * cs[k - j];
          b += uj * sn[k - j];
        }
        sn[k] = a / k;
        cs[k] = -b / k;
      }
      s.g[k + 2] = alpha_const * sn[k] / ((k + 1.0) * (k + 2.0));
    }
    // G1' = g'^2, G2' = G1
    s.G1[0] = G1;
    s.G2[0] = G2;
    for (int k = 0; k + 1 <= n; ++k) {
      double q = 0.0;
      for (int j = 0; j <= k; ++j) {
        if (j + 1 > n || k - j + 1 > n) continue;
        q += (j + 1.0) * s.g[j + 1] * (k - j + 1.0) * s.g[k - j + 1];
      }
      s.G1[k + 1] = q / (k + 1.0);
    }
    for (int k = 0; k + 1 <= n; ++k) s.G2[k + 1] = s.G1[k] / (k + 1.0);
    return s;
  }

  Jet compose_with(const Jet& u, int which) const {
    const Series s = series_at(u.value(), u.degree());
    const auto& c = which == 0 ? s.g : which == 1 ? s.G1 : s.G2;
    return compose(std::span<const double>(c), u);
  }

  std::vector<Series> nodes_;
  int k_lo_ = 0;
  double drift_ = 0.0, min_dg_ = 0.0;
};

inline PendulumSolution pendulum_solve(double alpha_const, double beta_const, double t_lo, double t_hi,
                                       double g0 = std::numbers::pi / 4, int branch = +1) {
  return PendulumSolution::solve(alpha_const, beta_const, t_lo, t_hi, g0, branch);
}

}  // namespace guichard
