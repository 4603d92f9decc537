#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vgit/lattice.hpp"

namespace vgit {

enum class IndexType { empty, mixed, pure_pos, pure_neg };

inline const char* to_string(IndexType t) {
  switch (t) {
    case IndexType::empty: return "empty";
    case IndexType::mixed: return "mixed";
    case IndexType::pure_pos: return "pure_pos";
    case IndexType::pure_neg: return "pure_neg";
  }
  return "?";
}

inline IndexType classify_index_set(const WeightAction& act, Mask I) {
  if (I == 0) return IndexType::empty;
  bool p = (I & act.pos_set) != 0, n = (I & act.neg_set) != 0;
  if (p && n) return IndexType::mixed;
  return p ? IndexType::pure_pos : IndexType::pure_neg;
}

inline bool semigroup_member(const std::vector<Int>& gens, Int target) {
  if (gens.empty()) throw std::invalid_argument("semigroup needs generators");
  for (Int g : gens)
    if (g <= 0) throw std::invalid_argument("semigroup generators must be positive");
  if (target < 0) return false;
  std::vector<char> reach(static_cast<std::size_t>(target) + 1, 0);
  reach[0] = 1;
  for (Int x = 1; x <= target; ++x)
    for (Int g : gens)
      if (g <= x && reach[x - g]) {
        reach[x] = 1;
        break;
      }
  return reach[target];
}

// appears() depends on v only through mu(v).
inline bool appears_mu(const WeightAction& act, const Window& win, Int mu, Mask I) {
  switch (classify_index_set(act, I)) {
    case IndexType::empty: return win.minus_w(mu);
    case IndexType::mixed: {
      Int g = 0;
      for (int i : mask_indices(I)) g = gcd_abs(g, act.weights[i]);
      for (Int m = win.lo; m <= win.hi; ++m)
        if ((mu - m) % g == 0) return true;
      return false;
    }
    case IndexType::pure_pos:
    case IndexType::pure_neg: {
      std::vector<Int> gens;
      for (int i : mask_indices(I)) gens.push_back(std::llabs(act.weights[i]));
      Int alpha = std::llabs(alpha_of(act, I));
      bool pos = classify_index_set(act, I) == IndexType::pure_pos;
      for (Int m = win.lo; m <= win.hi; ++m) {
        Int target = pos ? mu - m - alpha : m - mu - alpha;
        if (semigroup_member(gens, target)) return true;
      }
      return false;
    }
  }
  return false;
}

inline bool appears(const WeightAction& act, const Window& win, const Vec& v, Mask I) {
  return appears_mu(act, win, mu_of(act, v), I);
}

inline Int default_oracle_bound(const WeightAction& act, const Window& win, const Vec& v) {
  Int mu = std::llabs(mu_of(act, v));
  return mu + win.size() + act.abs_sum() + std::max(std::llabs(win.lo), std::llabs(win.hi));
}

// Direct search over w = v - c with c_i in [1, bound] on I.
inline bool appears_oracle(const WeightAction& act, const Window& win, const Vec& v, Mask I, Int bound) {
  if (bound < 1) throw std::invalid_argument("oracle bound must be positive");
  const Int mu = mu_of(act, v);
  auto idx = mask_indices(I);
  std::vector<Int> c(idx.size(), 1);
  while (true) {
    Int s = mu;
    for (std::size_t k = 0; k < idx.size(); ++k) s -= act.weights[idx[k]] * c[k];
    if (win.minus_w(s)) return true;
    std::size_t k = 0;
    while (k < c.size() && c[k] == bound) c[k++] = 1;
    if (k == c.size()) return false;
    ++c[k];
  }
}

inline bool appears_oracle(const WeightAction& act, const Window& win, const Vec& v, Mask I) {
  return appears_oracle(act, win, v, I, default_oracle_bound(act, win, v));
}

struct FaceId {
  Vec anchor;
  Mask dirs = 0;
  auto operator<=>(const FaceId&) const = default;
};

inline std::pair<Int, Int> face_mu_range(const WeightAction& act, const FaceId& f) {
  Int k = mu_of(act, f.anchor), lo = k, hi = k;
  for (int i : mask_indices(f.dirs)) (act.weights[i] > 0 ? hi : lo) += act.weights[i];
  return {lo, hi};
}

inline bool face_cone_in_quadrant_ss(const FaceId& face, Mask I, const Vec& w) {
  if (I & face.dirs) throw std::invalid_argument("cone directions must avoid face directions");
  if (face.anchor.size() != w.size()) throw std::invalid_argument("dimension mismatch");
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (has_bit(I, static_cast<int>(j))) {
      if (face.anchor[j] != w[j]) return false;
    } else if (face.anchor[j] < w[j]) {
      return false;
    }
  }
  return true;
}

enum class SkeletonKind { full, git_plus, git_minus, window };

inline const char* to_string(SkeletonKind k) {
  switch (k) {
    case SkeletonKind::full: return "full";
    case SkeletonKind::git_plus: return "git_plus";
    case SkeletonKind::git_minus: return "git_minus";
    case SkeletonKind::window: return "window";
  }
  return "?";
}

struct SkeletonEncoding {
  WeightAction action;
  MLattice lattice;
  SkeletonKind kind = SkeletonKind::full;
  std::optional<Window> window;
  Int mu_lo = 0;
  Int mu_hi = 0;
  bool periodic = true;
  std::map<FaceId, std::vector<Mask>> entries;  // only nonempty cone lists

  FaceId canonical(FaceId f) const {
    if (periodic) f.anchor = lattice.reduce(f.anchor);
    return f;
  }

  const std::vector<Mask>& cones(const FaceId& f) const {
    static const std::vector<Mask> none;
    auto it = entries.find(canonical(f));
    return it == entries.end() ? none : it->second;
  }

  bool contains(const FaceId& f, Mask I) const {
    const auto& c = cones(f);
    return std::find(c.begin(), c.end(), I) != c.end();
  }

  std::size_t pair_count() const {
    std::size_t s = 0;
    for (const auto& [f, c] : entries) s += c.size();
    return s;
  }
};

inline bool cone_present(const WeightAction& act, SkeletonKind kind, const std::optional<Window>& win,
                         const FaceId& f, Mask I) {
  switch (kind) {
    case SkeletonKind::full: return true;
    case SkeletonKind::git_plus: return !is_subset(act.pos_set, I);
    case SkeletonKind::git_minus: return !is_subset(act.neg_set, I);
    case SkeletonKind::window: {
      // some w = anchor - c with c >= 0 supported off I; split by the support J of c
      Int mu = mu_of(act, f.anchor);
      Mask rest = act.all() & ~I;
      for (Mask J = rest;; J = (J - 1) & rest) {
        if (appears_mu(act, *win, mu, J)) return true;
        if (J == 0) break;
      }
      return false;
    }
  }
  return false;
}

constexpr std::size_t kMaxFaces = 4'000'000;

inline SkeletonEncoding build_skeleton(const WeightAction& act, SkeletonKind kind, Int mu_lo, Int mu_hi,
                                       std::optional<Window> window = std::nullopt, bool periodic = true,
                                       Int box = 0) {
  if (mu_lo > mu_hi) throw std::invalid_argument("empty mu range");
  if (kind == SkeletonKind::window && !window) throw std::invalid_argument("window skeleton needs a window");
  SkeletonEncoding enc;
  enc.action = act;
  enc.lattice = m_basis(act);
  enc.kind = kind;
  enc.window = window;
  enc.mu_lo = mu_lo;
  enc.mu_hi = mu_hi;
  enc.periodic = periodic;

  std::vector<Vec> anchors;
  if (periodic) {
    if (static_cast<std::size_t>(mu_hi - mu_lo + 1) << act.n > kMaxFaces)
      throw std::length_error("mu range too large");
    for (Int k = mu_lo; k <= mu_hi; ++k) anchors.push_back(class_rep(enc.lattice, k));
  } else {
    if (box < 0) throw std::invalid_argument("negative box");
    std::size_t count = 1;
    for (int i = 0; i < act.n; ++i) {
      count *= static_cast<std::size_t>(2 * box + 1);
      if (count << act.n > kMaxFaces) throw std::length_error("box too large");
    }
    Vec v(act.n, -box);
    while (true) {
      Int mu = mu_of(act, v);
      if (mu_lo <= mu && mu <= mu_hi) anchors.push_back(v);
      int i = 0;
      while (i < act.n && v[i] == box) v[i++] = -box;
      if (i == act.n) break;
      ++v[i];
    }
  }

  const Mask all = act.all();
  for (const auto& a : anchors)
    for (Mask D = 0; D <= all; ++D) {
      FaceId f{a, D};
      std::vector<Mask> cones;
      Mask rest = all & ~D;
      for (Mask I = 0; I <= all; ++I)
        if (is_subset(I, rest) && cone_present(act, kind, window, f, I)) cones.push_back(I);
      if (!cones.empty()) enc.entries.emplace(std::move(f), std::move(cones));
    }
  return enc;
}

inline std::pair<Int, Int> default_mu_range(const WeightAction& act, const Window& win, Int box) {
  return {win.lo - act.eta_minus - act.abs_sum() - box, win.hi + act.eta_plus + act.abs_sum() + box};
}

// Integers k with lo < k < hi for rational bounds.
inline std::pair<Int, Int> open_integer_span(const Q& lo, const Q& hi) {
  return {to_int(floor_q(lo)) + 1, to_int(-floor_q(-hi)) - 1};
}

inline void require_anchor_coverage(const SkeletonEncoding& e, const Q& lo, const Q& hi) {
  if (!e.periodic) throw std::invalid_argument("restriction needs a periodic encoding");
  auto [a, b] = open_integer_span(lo - Q(e.action.eta_plus), hi + Q(e.action.eta_minus));
  if (a <= b && (a < e.mu_lo || b > e.mu_hi))
    throw std::out_of_range("encoding does not cover the requested mu interval");
}

// Compare on faces whose closed mu-image meets the open interval (p, q).
inline bool restrict_equal(const SkeletonEncoding& e1, const SkeletonEncoding& e2, const Q& p, const Q& q) {
  if (!(e1.action == e2.action)) throw std::invalid_argument("encodings belong to different actions");
  if (!(p < q)) throw std::invalid_argument("empty interval");
  require_anchor_coverage(e1, p, q);
  require_anchor_coverage(e2, p, q);
  auto meets = [&](const FaceId& f) {
    auto [lo, hi] = face_mu_range(e1.action, f);
    return Q(lo) < q && Q(hi) > p;
  };
  for (const auto* e : {&e1, &e2})
    for (const auto& [f, c] : e->entries)
      if (meets(f) && e1.cones(f) != e2.cones(f)) return false;
  return true;
}

struct SliceItem {
  FaceId face;
  std::vector<Mask> cones;
  bool operator==(const SliceItem&) const = default;
};

struct SliceEncoding {
  Q t;
  std::vector<SliceItem> items;

  std::size_t hair_count() const {
    std::size_t h = 0;
    for (const auto& it : items)
      for (Mask I : it.cones)
        if (I != 0) ++h;
    return h;
  }
};

inline SliceEncoding slice_encoding(const SkeletonEncoding& enc, const Q& t) {
  if (is_integer(t)) throw std::invalid_argument("slice height must not be an integer");
  require_anchor_coverage(enc, t, t);
  SliceEncoding s;
  s.t = t;
  for (const auto& [f, c] : enc.entries) {
    auto [lo, hi] = face_mu_range(enc.action, f);
    if (Q(lo) < t && t < Q(hi)) s.items.push_back({f, c});
  }
  return s;
}

// Combinatorial type of a slice: for each hair, the face dimension and the primitive images
// of its cone generators -e_i restricted to M.
using SliceSignature = std::vector<std::pair<int, std::vector<Vec>>>;

inline SliceSignature slice_signature(const SkeletonEncoding& enc, const SliceEncoding& s) {
  SliceSignature sig;
  for (const auto& it : s.items)
    for (Mask I : it.cones) {
      if (I == 0) continue;
      std::vector<Vec> rays;
      for (int i : mask_indices(I)) {
        Vec r;
        Int g = 0;
        for (const auto& b : enc.lattice.basis) {
          r.push_back(-b[i]);
          g = gcd_abs(g, b[i]);
        }
        for (auto& x : r) x /= g;
        rays.push_back(r);
      }
      std::sort(rays.begin(), rays.end());
      rays.erase(std::unique(rays.begin(), rays.end()), rays.end());
      sig.emplace_back(popcount(it.face.dirs), std::move(rays));
    }
  std::sort(sig.begin(), sig.end());
  return sig;
}

struct JumpReport {
  std::vector<Vec> covectors_plus;
  std::vector<Vec> covectors_minus;
  std::vector<Int> jump_mu_values;
  std::vector<Int> minus_mu_values;
};

inline JumpReport jump_covectors(const WeightAction& act, const Window& win, Int mu_box) {
  if (mu_box < 0) throw std::invalid_argument("negative mu box");
  MLattice m = m_basis(act);
  JumpReport r;
  for (Int k = win.lo - mu_box; k <= win.hi + mu_box; ++k) {
    if (!win.minus_w(k)) continue;
    if (win.minus_w(k + act.eta_minus)) {
      r.covectors_plus.push_back(class_rep(m, k));
      r.jump_mu_values.push_back(k);
    }
    if (win.minus_w(k - act.eta_plus)) {
      r.covectors_minus.push_back(class_rep(m, k));
      r.minus_mu_values.push_back(k);
    }
  }
  return r;
}

}  // namespace vgit
