#pragma once

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgit/numeric.hpp"

namespace vgit {

struct WeightAction {
  int n = 0;
  Vec weights;
  Mask pos_set = 0;
  Mask neg_set = 0;
  Int eta_plus = 0;
  Int eta_minus = 0;
  Int eta = 0;
  bool flipped = false;

  bool operator==(const WeightAction&) const = default;
  Mask all() const { return full_mask(n); }
  Int abs_sum() const { return eta_plus + eta_minus; }
};

// Stores -W = {lo..hi}; the lattice lifts are mu^{-1}({lo..hi}).
struct Window {
  Int lo = 0;
  Int hi = 0;

  Window() = default;
  Window(Int l, Int h) : lo(l), hi(h) {
    if (l > h) throw std::invalid_argument("window needs lo <= hi");
  }
  Int size() const { return hi - lo + 1; }
  bool minus_w(Int k) const { return lo <= k && k <= hi; }
  bool operator==(const Window&) const = default;
};

inline WeightAction normalize_action(const Vec& raw) {
  if (raw.size() < 2) throw std::invalid_argument("need at least two weights");
  if (raw.size() > static_cast<std::size_t>(kMaxCoords))
    throw std::invalid_argument("at most 16 weights are supported");
  Int g = 0, pos = 0, neg = 0;
  for (Int a : raw) {
    if (a == 0) throw std::invalid_argument("weights must be nonzero");
    g = gcd_abs(g, a);
    (a > 0 ? pos : neg) += std::llabs(a);
  }
  if (g != 1) throw std::invalid_argument("weights must have gcd 1");
  if (pos == 0 || neg == 0) throw std::invalid_argument("weights must have both signs");

  WeightAction act;
  act.n = static_cast<int>(raw.size());
  act.weights = raw;
  if (pos < neg) {
    act.flipped = true;
    for (auto& a : act.weights) a = -a;
  }
  for (int i = 0; i < act.n; ++i) {
    Int a = act.weights[i];
    if (a > 0) {
      act.pos_set |= Mask(1) << i;
      act.eta_plus += a;
    } else {
      act.neg_set |= Mask(1) << i;
      act.eta_minus += -a;
    }
  }
  act.eta = act.eta_plus - act.eta_minus;
  return act;
}

inline Int mu_of(const WeightAction& act, const Vec& v) {
  if (static_cast<int>(v.size()) != act.n) throw std::invalid_argument("vector length does not match weights");
  Int s = 0;
  for (int i = 0; i < act.n; ++i) s += v[i] * act.weights[i];
  return s;
}

// Signed sum of weights over I.
inline Int alpha_of(const WeightAction& act, Mask I) {
  Int s = 0;
  for (int i : mask_indices(I)) s += act.weights[i];
  return s;
}

inline Vec indicator(int n, Mask I) {
  Vec v(n, 0);
  for (int i : mask_indices(I)) v[i] = 1;
  return v;
}

// Hermite-reduced row basis: row k has pivot column pivots[k] with a positive
// pivot, zeros left of it, and entries above each pivot reduced into [0, pivot).
inline std::vector<Vec> hermite_rows(std::vector<Vec> rows, int n, std::vector<int>& pivots) {
  pivots.clear();
  std::size_t r = 0;
  for (int c = 0; c < n && r < rows.size(); ++c) {
    while (true) {
      std::size_t best = rows.size();
      for (std::size_t i = r; i < rows.size(); ++i)
        if (rows[i][c] != 0 && (best == rows.size() || std::llabs(rows[i][c]) < std::llabs(rows[best][c])))
          best = i;
      if (best == rows.size()) break;
      std::swap(rows[r], rows[best]);
      bool others = false;
      for (std::size_t i = r + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        Int q = rows[i][c] / rows[r][c];
        for (int j = 0; j < n; ++j) rows[i][j] -= q * rows[r][j];
        if (rows[i][c] != 0) others = true;
      }
      if (!others) break;
    }
    if (rows[r][c] == 0) continue;
    if (rows[r][c] < 0)
      for (auto& x : rows[r]) x = -x;
    for (std::size_t i = 0; i < r; ++i) {
      Int q = floor_div(rows[i][c], rows[r][c]);
      if (q != 0)
        for (int j = 0; j < n; ++j) rows[i][j] -= q * rows[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  rows.resize(r);
  return rows;
}

struct MLattice {
  int n = 0;
  std::vector<Vec> basis;
  std::vector<int> pivots;
  Vec unit;  // mu(unit) = 1 when built from an action

  static MLattice from_basis(int n, std::vector<Vec> rows) {
    MLattice m;
    m.n = n;
    for (const auto& r : rows)
      if (static_cast<int>(r.size()) != n) throw std::invalid_argument("basis vector length mismatch");
    m.basis = hermite_rows(std::move(rows), n, m.pivots);
    return m;
  }

  std::size_t rank() const { return basis.size(); }

  Vec reduce(Vec v) const {
    if (static_cast<int>(v.size()) != n) throw std::invalid_argument("vector length mismatch");
    for (std::size_t k = 0; k < basis.size(); ++k) {
      Int q = floor_div(v[pivots[k]], basis[k][pivots[k]]);
      if (q != 0)
        for (int j = 0; j < n; ++j) v[j] -= q * basis[k][j];
    }
    return v;
  }

  Vec combine(const Vec& coeffs) const {
    Vec v(n, 0);
    for (std::size_t k = 0; k < basis.size(); ++k)
      for (int j = 0; j < n; ++j) v[j] += coeffs[k] * basis[k][j];
    return v;
  }
};

inline MLattice m_basis(const WeightAction& act) {
  const int n = act.n;
  Vec a = act.weights;
  std::vector<Vec> U(n, Vec(n, 0));  // U[col] is a column vector
  for (int i = 0; i < n; ++i) U[i][i] = 1;
  while (true) {
    int p = -1, nonzero = 0;
    for (int i = 0; i < n; ++i)
      if (a[i] != 0) {
        ++nonzero;
        if (p < 0 || std::llabs(a[i]) < std::llabs(a[p])) p = i;
      }
    if (nonzero <= 1) {
      std::vector<Vec> ker;
      for (int j = 0; j < n; ++j)
        if (j != p) ker.push_back(U[j]);
      MLattice m = MLattice::from_basis(n, ker);
      Vec unit = U[p];
      if (a[p] < 0)
        for (auto& x : unit) x = -x;
      m.unit = m.reduce(unit);
      return m;
    }
    for (int j = 0; j < n; ++j) {
      if (j == p || a[j] == 0) continue;
      Int q = a[j] / a[p];
      a[j] -= q * a[p];
      for (int i = 0; i < n; ++i) U[j][i] -= q * U[p][i];
    }
  }
}

inline Vec reduce_mod_m(const MLattice& m, const Vec& v) { return m.reduce(v); }
inline Vec reduce_mod_m(const WeightAction& act, const Vec& v) { return m_basis(act).reduce(v); }

// Canonical lattice point of the class with the given mu value (Z^N / M is Z via mu).
inline Vec class_rep(const MLattice& m, Int mu) {
  if (m.unit.empty()) throw std::logic_error("lattice has no unit vector");
  Vec v = m.unit;
  for (auto& x : v) x *= mu;
  return m.reduce(v);
}

struct MaxCone {
  Mask cone = 0;
  Int index = 0;
};

struct StackyFanPair {
  std::vector<Vec> ray_images;  // image of e_i in the cokernel, one per coordinate
  std::vector<Mask> sigma_plus;
  std::vector<Mask> sigma_minus;
  std::vector<int> rays_plus;
  std::vector<int> rays_minus;
  std::vector<MaxCone> max_plus;
  std::vector<MaxCone> max_minus;
};

inline Int int_det(std::vector<Vec> m) {
  const std::size_t k = m.size();
  // Bareiss fraction-free elimination
  Int sign = 1, prev = 1;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t p = c;
    while (p < k && m[p][c] == 0) ++p;
    if (p == k) return 0;
    if (p != c) {
      std::swap(m[p], m[c]);
      sign = -sign;
    }
    for (std::size_t i = c + 1; i < k; ++i) {
      for (std::size_t j = c + 1; j < k; ++j) m[i][j] = (m[i][j] * m[c][c] - m[i][c] * m[c][j]) / prev;
      m[i][c] = 0;
    }
    prev = m[c][c];
  }
  return sign * (k ? m[k - 1][k - 1] : 1);
}

inline StackyFanPair quotient_fans(const WeightAction& act) {
  StackyFanPair f;
  MLattice m = m_basis(act);
  const int n = act.n;
  for (int i = 0; i < n; ++i) {
    Vec r;
    for (const auto& b : m.basis) r.push_back(b[i]);
    f.ray_images.push_back(r);
  }
  std::vector<Mask> all;
  for (Mask I = 0; I <= act.all(); ++I) all.push_back(I);
  std::stable_sort(all.begin(), all.end(), [](Mask x, Mask y) { return popcount(x) < popcount(y); });
  for (Mask I : all) {
    if (!is_subset(act.pos_set, I)) f.sigma_plus.push_back(I);
    if (!is_subset(act.neg_set, I)) f.sigma_minus.push_back(I);
  }
  auto fill = [&](Mask side, std::vector<int>& rays, std::vector<MaxCone>& maxes) {
    for (int i = 0; i < n; ++i)
      if (!is_subset(side, Mask(1) << i)) rays.push_back(i);
    for (int i : mask_indices(side)) {
      Mask cone = act.all() & ~(Mask(1) << i);
      std::vector<Vec> mat;
      for (int j : mask_indices(cone)) mat.push_back(f.ray_images[j]);
      maxes.push_back({cone, std::llabs(int_det(mat))});
    }
  };
  fill(act.pos_set, f.rays_plus, f.max_plus);
  fill(act.neg_set, f.rays_minus, f.max_minus);
  return f;
}

}  // namespace vgit
