#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vgit/lattice.hpp"
#include "vgit/sheafcalc.hpp"

namespace vgit {

struct GradedSpace {
  struct Generator {
    std::string name;
    Int weight = 0;
    int degree = 0;  // 0 polynomial, 1 exterior
    int slot = 0;
  };
  std::vector<Generator> gens;
};

inline GradedDims sym_graded_dim(const GradedSpace& space, Int target_weight, Int degree_box) {
  if (degree_box < 0) throw std::invalid_argument("negative degree box");
  std::map<std::pair<Int, int>, Int> counts{{{0, 0}, 1}};
  for (const auto& g : space.gens) {
    Int top = g.degree == 1 ? 1 : degree_box;
    std::map<std::pair<Int, int>, Int> next;
    for (const auto& [key, n] : counts)
      for (Int e = 0; e <= top; ++e) next[{key.first + e * g.weight, key.second + static_cast<int>(e) * g.degree}] += n;
    counts = std::move(next);
  }
  GradedDims out;
  for (const auto& [key, n] : counts)
    if (key.first == target_weight && n != 0) out[key.second] += n;
  return out;
}

enum class Locus { V, Vplus, Vminus };

inline const char* to_string(Locus l) {
  switch (l) {
    case Locus::V: return "O_V";
    case Locus::Vplus: return "O_Vplus";
    case Locus::Vminus: return "O_Vminus";
  }
  return "?";
}

struct BundleTag {
  Locus locus = Locus::V;
  Int k = 0;
  bool operator==(const BundleTag&) const = default;
};

inline std::string to_string(const BundleTag& t) { return std::string(to_string(t.locus)) + "(" + std::to_string(t.k) + ")"; }

inline GradedSpace dual_space(const WeightAction& act, Mask coords, const std::string& prefix) {
  GradedSpace s;
  for (int i : mask_indices(coords)) s.gens.push_back({prefix + std::to_string(i + 1), -act.weights[i], 0, i});
  return s;
}

inline GradedSpace add_exterior(GradedSpace s, const WeightAction& act, Mask coords) {
  for (int i : mask_indices(coords)) s.gens.push_back({"e" + std::to_string(i + 1), act.weights[i], 1, i});
  return s;
}

inline GradedDims shift_degree(const GradedDims& g, int s) {
  GradedDims out;
  for (const auto& [d, n] : g) out[d + s] = n;
  return out;
}

inline GradedDims hom_equivariant(const WeightAction& act, const BundleTag& src, const BundleTag& dst,
                                  Int degree_box) {
  const Int w = src.k - dst.k;
  const Mask all = act.all(), pos = act.pos_set, neg = act.neg_set;
  auto L = [](Locus a, Locus b) { return std::pair{a, b}; };
  auto pair = L(src.locus, dst.locus);
  if (pair == L(Locus::V, Locus::V)) return sym_graded_dim(dual_space(act, all, "x"), w, degree_box);
  if (pair == L(Locus::V, Locus::Vplus)) return sym_graded_dim(dual_space(act, pos, "x"), w, degree_box);
  if (pair == L(Locus::V, Locus::Vminus)) return sym_graded_dim(dual_space(act, neg, "x"), w, degree_box);
  if (pair == L(Locus::Vplus, Locus::Vplus))
    return sym_graded_dim(add_exterior(dual_space(act, pos, "x"), act, neg), w, degree_box);
  if (pair == L(Locus::Vminus, Locus::Vminus))
    return sym_graded_dim(add_exterior(dual_space(act, neg, "x"), act, pos), w, degree_box);
  if (pair == L(Locus::Vplus, Locus::V))
    return shift_degree(sym_graded_dim(dual_space(act, pos, "x"), w + act.eta_minus, degree_box), popcount(neg));
  if (pair == L(Locus::Vminus, Locus::V))
    return shift_degree(sym_graded_dim(dual_space(act, neg, "x"), w - act.eta_plus, degree_box), popcount(pos));
  throw std::invalid_argument("unsupported bundle pair " + to_string(src) + " -> " + to_string(dst));
}

struct KoszulRange {
  Int lo = 0;
  Int hi = 0;
  std::vector<Int> ranks;
};

inline Int binomial(Int n, Int k) {
  if (k < 0 || k > n) return 0;
  Int r = 1;
  for (Int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline KoszulRange koszul_weight_range(const WeightAction& act, Locus locus) {
  KoszulRange r;
  Int count = 0;
  if (locus == Locus::Vplus) {
    r.hi = act.eta_minus;
    count = popcount(act.neg_set);
  } else if (locus == Locus::Vminus) {
    r.hi = act.eta_plus;
    count = popcount(act.pos_set);
  } else {
    throw std::invalid_argument("Koszul range needs an unstable locus");
  }
  for (Int k = 0; k <= count; ++k) r.ranks.push_back(binomial(count, k));
  return r;
}

struct SodVariant {
  std::vector<BundleTag> exceptional;
  std::vector<BundleTag> window_part;
  bool verified = false;
  std::vector<std::string> failures;
};

struct SodReport {
  std::optional<SodVariant> v1;
  std::optional<SodVariant> v2;
  Int eta_count = 0;
};

inline void verify_sod(const WeightAction& act, SodVariant& s, Int degree_box) {
  auto check = [&](const BundleTag& a, const BundleTag& b, const GradedDims& want) {
    GradedDims got = hom_equivariant(act, a, b, degree_box);
    if (got != want) s.failures.push_back("Hom(" + to_string(a) + ", " + to_string(b) + ") unexpected");
  };
  for (std::size_t i = 0; i < s.exceptional.size(); ++i) {
    check(s.exceptional[i], s.exceptional[i], {{0, 1}});
    for (std::size_t j = 0; j < i; ++j) check(s.exceptional[i], s.exceptional[j], {});
  }
  for (const auto& w : s.window_part)
    for (const auto& e : s.exceptional) check(w, e, {});
  s.verified = s.failures.empty();
}

inline SodReport sod_report(const WeightAction& act, const Window& win, Int degree_box = 8) {
  const Int a = win.lo, b = win.hi;
  SodReport r;
  if (win.size() >= act.eta_minus) {
    SodVariant s;
    for (Int k = a; k <= b - act.eta_minus; ++k) s.exceptional.push_back({Locus::Vplus, k});
    for (Int k = b - act.eta_minus + 1; k <= b; ++k) s.window_part.push_back({Locus::V, k});
    verify_sod(act, s, degree_box);
    r.v1 = s;
  }
  if (win.size() >= act.eta_plus) {
    SodVariant s;
    for (Int k = b; k >= a + act.eta_plus; --k) s.exceptional.push_back({Locus::Vminus, k});
    for (Int k = a; k <= a + act.eta_plus - 1; ++k) s.window_part.push_back({Locus::V, k});
    verify_sod(act, s, degree_box);
    r.v2 = s;
  }
  if (!r.v1 && !r.v2) throw std::invalid_argument("window too small for either decomposition");
  r.eta_count = r.v1 ? static_cast<Int>(r.v1->exceptional.size()) : static_cast<Int>(r.v2->exceptional.size());
  return r;
}

struct CccMatch {
  Int i = 0;
  Int j = 0;
  Int box = 0;
  Int b_count = 0;      // monomial enumeration
  Int b_count_sym = 0;  // graded-dimension route
  Int a_count = 0;
  std::vector<std::pair<Vec, Vec>> bijection;  // (m, c)
  bool pass = false;
};

inline std::vector<Vec> monomials_of_weight(const WeightAction& act, Int mu, Int box) {
  std::vector<Vec> out;
  Vec c(act.n, 0);
  while (true) {
    if (mu_of(act, c) == mu) out.push_back(c);
    int k = 0;
    while (k < act.n && c[k] == box) c[k++] = 0;
    if (k == act.n) break;
    ++c[k];
  }
  return out;
}

// Line bundle L_k goes to Q at class_rep(-k); monomials c with mu(c) = j - i.
inline CccMatch ccc_match(const WeightAction& act, Int i, Int j, Int box) {
  if (box < 0) throw std::invalid_argument("negative box");
  CccMatch r;
  r.i = i;
  r.j = j;
  r.box = box;
  auto mons = monomials_of_weight(act, j - i, box);
  r.b_count = static_cast<Int>(mons.size());
  auto sym = hom_equivariant(act, {Locus::V, i}, {Locus::V, j}, box);
  r.b_count_sym = sym.count(0) ? sym.at(0) : 0;
  std::set<Vec> bset(mons.begin(), mons.end());

  MLattice lat = m_basis(act);
  Vec u = class_rep(lat, -i), w = class_rep(lat, -j);
  Vec d(act.n);
  for (int k = 0; k < act.n; ++k) d[k] = u[k] - w[k];
  const std::size_t rk = lat.rank();
  Vec t(rk, 0);
  std::set<Vec> seen;
  bool injective = true, into = true;
  // coordinate p_k of m only involves t_0..t_k
  auto rec = [&](auto&& self, std::size_t k) -> void {
    if (k == rk) {
      Vec m = lat.combine(t);
      Vec wm(act.n), c(act.n);
      for (int q = 0; q < act.n; ++q) {
        wm[q] = w[q] + m[q];
        c[q] = d[q] - m[q];
      }
      if (!hom_dim(WedgeGenerator{u, 0}, WedgeGenerator{wm, 0})) return;
      for (Int x : c)
        if (x > box) return;
      ++r.a_count;
      if (!bset.count(c)) into = false;
      if (!seen.insert(c).second) injective = false;
      r.bijection.emplace_back(m, c);
      return;
    }
    const int p = lat.pivots[k];
    const Int piv = lat.basis[k][p];
    Int partial = 0;
    for (std::size_t l = 0; l < k; ++l) partial += t[l] * lat.basis[l][p];
    // -box-1 <= d_p - partial - t*piv <= box
    Int lo = -floor_div(-(d[p] - partial - box), piv);
    Int hi = floor_div(d[p] - partial + box + 1, piv);
    for (Int x = lo; x <= hi; ++x) {
      t[k] = x;
      self(self, k + 1);
    }
    t[k] = 0;
  };
  rec(rec, 0);
  r.pass = injective && into && r.a_count == r.b_count && r.b_count == r.b_count_sym;
  return r;
}

}  // namespace vgit
