#pragma once

// Uniform rectangular lattices and finite-difference stencils.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace guichard {

using Point = std::array<double, 3>;

// Fornberg's recursion: weights for the m-th derivative at x0 from nodes xs.
inline std::vector<double> fd_weights(double x0, const std::vector<double>& xs, int m) {
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

struct Stencil {
  int start = 0;
  std::vector<double> w;  // in units of h^-m
};

// Centered stencils of accuracy p in the interior, one-sided ones of the same order near edges.
inline std::vector<Stencil> build_stencils(int n, int m, int p) {
  const int wc = 2 * ((m + 1) / 2) + p - 1;
  const int half = (wc - 1) / 2;
  const int wb = m + p;
  if (n < std::max(wc, wb)) throw std::invalid_argument("stencil wider than the lattice axis");
  std::vector<Stencil> out(n);
  for (int i = 0; i < n; ++i) {
    int start, width;
    if (i - half >= 0 && i + half < n) {
      start = i - half;
      width = wc;
    } else {
      width = wb;
      start = (i - half < 0) ? 0 : n - wb;
    }
    std::vector<double> xs(width);
    for (int k = 0; k < width; ++k) xs[k] = start + k;
    out[i] = {start, fd_weights(static_cast<double>(i), xs, m)};
  }
  return out;
}

class Lattice {
 public:
  Lattice(int arity, std::array<int, 3> n, Point lo, Point hi, int margin = -1, int fd_order = 8)
      : arity_(arity), n_(n), lo_(lo), hi_(hi), p_(fd_order) {
    if (arity != 2 && arity != 3) throw std::invalid_argument("lattice: arity must be 2 or 3");
    if (fd_order < 2 || fd_order % 2) throw std::invalid_argument("lattice: stencil order must be even and >= 2");
    if (arity == 2) {
      n_[2] = 1;
      lo_[2] = hi_[2] = 0.0;
    }
    margin_ = margin < 0 ? 2 * (p_ / 2) : margin;
    for (int a = 0; a < arity_; ++a) {
      if (n_[a] < 1) throw std::invalid_argument("lattice: empty axis");
      if (n_[a] == 1) {
        if (lo_[a] != hi_[a]) throw std::invalid_argument("lattice: single-sample axis needs lo == hi");
        continue;
      }
      if (!(hi_[a] > lo_[a])) throw std::invalid_argument("lattice: spacing must be positive");
      if (n_[a] < p_ + 1 + 2 * margin_)
        throw std::invalid_argument("lattice: sample count below stencil width + 2*margin");
    }
  }

  static std::shared_ptr<const Lattice> square(int n, double lo, double hi, int margin = -1, int fd_order = 8) {
    return std::make_shared<const Lattice>(2, std::array<int, 3>{n, n, 1}, Point{lo, lo, 0.0}, Point{hi, hi, 0.0},
                                           margin, fd_order);
  }

  int arity() const { return arity_; }
  int n(int axis) const { return n_[axis]; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  int margin() const { return margin_; }
  int fd_order() const { return p_; }
  bool pinned(int axis) const { return n_[axis] == 1; }
  double spacing(int axis) const {
    if (pinned(axis)) throw std::domain_error("lattice: no spacing along a single-sample axis");
    return (hi_[axis] - lo_[axis]) / (n_[axis] - 1);
  }
  double coord(int axis, int i) const { return pinned(axis) ? lo_[axis] : lo_[axis] + i * spacing(axis); }
  std::size_t size() const { return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2]; }

  // row-major: x fastest, then y, then z
  std::size_t flat(int i, int j, int k = 0) const {
    return (static_cast<std::size_t>(k) * n_[1] + j) * n_[0] + i;
  }
  std::array<int, 3> unflat(std::size_t t) const {
    const int i = static_cast<int>(t % n_[0]);
    const std::size_t r = t / n_[0];
    return {i, static_cast<int>(r % n_[1]), static_cast<int>(r / n_[1])};
  }
  Point point(std::size_t t) const {
    const auto ix = unflat(t);
    return {coord(0, ix[0]), coord(1, ix[1]), coord(2, ix[2])};
  }
  std::size_t stride(int axis) const {
    return axis == 0 ? 1 : axis == 1 ? static_cast<std::size_t>(n_[0]) : static_cast<std::size_t>(n_[0]) * n_[1];
  }

  // node is at least `layers` lattice layers away from every non-pinned boundary
  bool interior(std::size_t t, int layers) const {
    const auto ix = unflat(t);
    for (int a = 0; a < arity_; ++a) {
      if (pinned(a)) continue;
      if (ix[a] < layers || ix[a] > n_[a] - 1 - layers) return false;
    }
    return true;
  }

  std::size_t nearest(const Point& p) const {
    std::array<int, 3> ix{0, 0, 0};
    for (int a = 0; a < arity_; ++a) {
      if (pinned(a)) continue;
      const double r = (p[a] - lo_[a]) / spacing(a);
      ix[a] = std::clamp(static_cast<int>(std::lround(r)), 0, n_[a] - 1);
    }
    return flat(ix[0], ix[1], ix[2]);
  }

  bool same_as(const Lattice& o) const {
    return arity_ == o.arity_ && n_ == o.n_ && lo_ == o.lo_ && hi_ == o.hi_;
  }

  // cached stencils for the m-th derivative along an axis
  const std::vector<Stencil>& stencils(int axis, int m) const {
    std::lock_guard<std::mutex> lock(*mu_);
    auto key = std::make_pair(axis, m);
    auto it = cache_->find(key);
    if (it == cache_->end()) it = cache_->emplace(key, build_stencils(n_[axis], m, p_)).first;
    return it->second;
  }

  // a lattice with the same x/y layout, pinned at z = z0
  std::shared_ptr<const Lattice> slice3(double z0) const {
    return std::make_shared<const Lattice>(3, std::array<int, 3>{n_[0], n_[1], 1}, Point{lo_[0], lo_[1], z0},
                                           Point{hi_[0], hi_[1], z0}, margin_, p_);
  }
  std::shared_ptr<const Lattice> plane2() const {
    return std::make_shared<const Lattice>(2, std::array<int, 3>{n_[0], n_[1], 1}, Point{lo_[0], lo_[1], 0.0},
                                           Point{hi_[0], hi_[1], 0.0}, margin_, p_);
  }

 private:
  int arity_;
  std::array<int, 3> n_;
  Point lo_, hi_;
  int margin_, p_;
  std::shared_ptr<std::mutex> mu_ = std::make_shared<std::mutex>();
  std::shared_ptr<std::map<std::pair<int, int>, std::vector<Stencil>>> cache_ =
      std::make_shared<std::map<std::pair<int, int>, std::vector<Stencil>>>();
};

using LatticePtr = std::shared_ptr<const Lattice>;

}  // namespace guichard
