#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vgit/lattice.hpp"
#include "vgit/numeric.hpp"
#include "vgit/skeleton.hpp"

namespace vgit {

// S(v, I): constant sheaf on {x_j > v_j for j not in I}.
struct WedgeGenerator {
  Vec v;
  Mask I = 0;
  auto operator<=>(const WedgeGenerator&) const = default;
};

inline int hom_dim(const WedgeGenerator& a, const WedgeGenerator& b) {
  if (a.v.size() != b.v.size()) throw std::invalid_argument("generators live in different dimensions");
  if (!is_subset(a.I, b.I)) return 0;
  for (std::size_t j = 0; j < a.v.size(); ++j)
    if (!has_bit(b.I, static_cast<int>(j)) && a.v[j] < b.v[j]) return 0;
  return 1;
}

using GradedDims = std::map<int, Int>;

inline void add_dims(GradedDims& into, const GradedDims& x) {
  for (const auto& [d, n] : x) {
    into[d] += n;
    if (into[d] == 0) into.erase(d);
  }
}

inline GradedDims nonzero(GradedDims g) {
  std::erase_if(g, [](const auto& kv) { return kv.second == 0; });
  return g;
}

struct SheafComplex {
  int n = 0;
  std::map<int, std::vector<WedgeGenerator>> terms;
  std::map<int, Matrix> diff;  // diff[k]: terms[k] -> terms[k+1], rows index the target

  SheafComplex() = default;
  explicit SheafComplex(int dim) : n(dim) {}

  const std::vector<WedgeGenerator>& term(int k) const {
    static const std::vector<WedgeGenerator> none;
    auto it = terms.find(k);
    return it == terms.end() ? none : it->second;
  }

  std::size_t add(int degree, WedgeGenerator g) {
    if (static_cast<int>(g.v.size()) != n) throw std::invalid_argument("generator dimension mismatch");
    auto& t = terms[degree];
    t.push_back(std::move(g));
    return t.size() - 1;
  }

  Matrix differential(int k) const {
    auto it = diff.find(k);
    std::size_t r = term(k + 1).size(), c = term(k).size();
    if (it == diff.end()) return Matrix(r, c);
    if (it->second.rows != r || it->second.cols != c) throw std::logic_error("differential shape mismatch");
    return it->second;
  }

  // Entry of d from generator `src` in degree k to generator `dst` in degree k+1.
  void set(int k, std::size_t dst, std::size_t src, const Q& value) {
    auto& m = diff[k];
    std::size_t r = term(k + 1).size(), c = term(k).size();
    if (m.rows != r || m.cols != c) {
      Matrix grown(r, c);
      for (std::size_t i = 0; i < std::min(r, m.rows); ++i)
        for (std::size_t j = 0; j < std::min(c, m.cols); ++j) grown(i, j) = m(i, j);
      m = std::move(grown);
    }
    m(dst, src) = value;
  }

  bool empty() const {
    for (const auto& [k, t] : terms)
      if (!t.empty()) return false;
    return true;
  }

  std::size_t generator_count() const {
    std::size_t s = 0;
    for (const auto& [k, t] : terms) s += t.size();
    return s;
  }

  // Normalize shapes of all stored matrices after the terms are final.
  void finalize() {
    for (auto& [k, m] : diff) {
      std::size_t r = term(k + 1).size(), c = term(k).size();
      if (m.rows != r || m.cols != c) {
        Matrix grown(r, c);
        for (std::size_t i = 0; i < std::min(r, m.rows); ++i)
          for (std::size_t j = 0; j < std::min(c, m.cols); ++j) grown(i, j) = m(i, j);
        m = std::move(grown);
      }
    }
  }
};

inline SheafComplex single(const WedgeGenerator& g, int degree = 0) {
  SheafComplex x(static_cast<int>(g.v.size()));
  x.add(degree, g);
  return x;
}

inline SheafComplex translate(const SheafComplex& x, const Vec& m) {
  SheafComplex y = x;
  for (auto& [k, t] : y.terms)
    for (auto& g : t)
      for (std::size_t j = 0; j < g.v.size(); ++j) g.v[j] += m[j];
  return y;
}

inline SheafComplex shift(const SheafComplex& x, int s) {
  SheafComplex y(x.n);
  for (const auto& [k, t] : x.terms) y.terms[k - s] = t;
  for (const auto& [k, m] : x.diff) {
    Matrix d = m;
    if (s % 2 != 0)
      for (auto& e : d.a) e = -e;
    y.diff[k - s] = d;
  }
  return y;
}

// Throws if d^2 != 0 or an entry is not an admissible morphism.
inline void validate_complex(const SheafComplex& x) {
  for (const auto& [k, m] : x.diff) {
    Matrix d = x.differential(k);
    const auto& src = x.term(k);
    const auto& dst = x.term(k + 1);
    for (std::size_t i = 0; i < d.rows; ++i)
      for (std::size_t j = 0; j < d.cols; ++j)
        if (d(i, j) != 0 && hom_dim(src[j], dst[i]) == 0)
          throw std::logic_error("differential entry between generators without a morphism");
    Matrix dd = x.differential(k + 1) * d;
    if (!dd.is_zero()) throw std::logic_error("d^2 != 0 at degree " + std::to_string(k));
  }
}

inline GradedDims cohomology_from_ranks(const std::map<int, std::size_t>& dims,
                                        const std::map<int, std::size_t>& ranks) {
  GradedDims out;
  auto rk = [&](int k) -> Int {
    auto it = ranks.find(k);
    return it == ranks.end() ? 0 : static_cast<Int>(it->second);
  };
  for (const auto& [k, d] : dims) {
    Int h = static_cast<Int>(d) - rk(k) - rk(k - 1);
    if (h < 0) throw std::logic_error("negative cohomology dimension");
    if (h != 0) out[k] = h;
  }
  return out;
}

struct RegionPoint {
  Vec base;
  Mask region = 0;
};

inline bool stalk_nonzero(const WedgeGenerator& g, const RegionPoint& p) {
  for (std::size_t j = 0; j < g.v.size(); ++j) {
    if (has_bit(g.I, static_cast<int>(j))) continue;
    bool strict = has_bit(p.region, static_cast<int>(j));
    if (strict ? !(p.base[j] > g.v[j]) : !(p.base[j] >= g.v[j])) return false;
  }
  return true;
}

inline GradedDims stalk_dims(const SheafComplex& x, const RegionPoint& p) {
  if (static_cast<int>(p.base.size()) != x.n) throw std::invalid_argument("region point dimension mismatch");
  std::map<int, std::vector<std::size_t>> live;
  std::map<int, std::size_t> dims;
  for (const auto& [k, t] : x.terms) {
    for (std::size_t i = 0; i < t.size(); ++i)
      if (stalk_nonzero(t[i], p)) live[k].push_back(i);
    if (!live[k].empty()) dims[k] = live[k].size();
  }
  std::map<int, std::size_t> ranks;
  for (const auto& [k, m] : x.diff) {
    auto a = live.find(k), b = live.find(k + 1);
    if (a == live.end() || b == live.end() || a->second.empty() || b->second.empty()) continue;
    Matrix d = x.differential(k);
    Matrix sub(b->second.size(), a->second.size());
    for (std::size_t i = 0; i < b->second.size(); ++i)
      for (std::size_t j = 0; j < a->second.size(); ++j) sub(i, j) = d(b->second[i], a->second[j]);
    ranks[k] = rank(sub);
  }
  return cohomology_from_ranks(dims, ranks);
}

struct HomBasis {
  struct Elem {
    int k;  // source degree
    std::size_t g;
    std::size_t h;
  };
  std::vector<Elem> elems;
  std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> index;
};

inline std::map<int, HomBasis> hom_bases(const SheafComplex& x, const SheafComplex& y) {
  std::map<int, HomBasis> out;
  for (const auto& [k, src] : x.terms)
    for (const auto& [l, dst] : y.terms)
      for (std::size_t g = 0; g < src.size(); ++g)
        for (std::size_t h = 0; h < dst.size(); ++h)
          if (hom_dim(src[g], dst[h])) {
            auto& b = out[l - k];
            b.index[{k, g, h}] = b.elems.size();
            b.elems.push_back({k, g, h});
          }
  return out;
}

// Chain-level Hom counts per degree.
inline std::map<int, std::size_t> hom_chain_dims(const SheafComplex& x, const SheafComplex& y) {
  std::map<int, std::size_t> d;
  for (const auto& [n, b] : hom_bases(x, y)) d[n] = b.elems.size();
  return d;
}

inline GradedDims hom_cohomology(const SheafComplex& x, const SheafComplex& y) {
  if (x.n != y.n) throw std::invalid_argument("complexes live in different dimensions");
  auto bases = hom_bases(x, y);
  std::map<int, std::size_t> dims, ranks;
  for (const auto& [n, b] : bases) dims[n] = b.elems.size();
  std::map<int, Matrix> dxs, dys;
  for (const auto& [k, t] : x.terms) {
    dxs[k] = x.differential(k);
    dxs[k - 1] = x.differential(k - 1);
  }
  for (const auto& [k, t] : y.terms) dys[k] = y.differential(k);
  for (const auto& [n, b] : bases) {
    auto next = bases.find(n + 1);
    if (next == bases.end()) continue;
    const auto& nb = next->second;
    Matrix D(nb.elems.size(), b.elems.size());
    const Q sign = (n % 2 == 0) ? Q(-1) : Q(1);
    for (std::size_t c = 0; c < b.elems.size(); ++c) {
      const auto& e = b.elems[c];
      // d_Y o f
      const Matrix& dy = dys.at(e.k + n);
      for (std::size_t h2 = 0; h2 < dy.rows; ++h2) {
        if (dy(h2, e.h) == 0) continue;
        auto it = nb.index.find({e.k, e.g, h2});
        if (it == nb.index.end()) throw std::logic_error("composite morphism missing from Hom basis");
        D(it->second, c) += dy(h2, e.h);
      }
      // -(-1)^n f o d_X
      const Matrix& dx = dxs.at(e.k - 1);
      for (std::size_t g0 = 0; g0 < dx.cols; ++g0) {
        if (dx(e.g, g0) == 0) continue;
        auto it = nb.index.find({e.k - 1, g0, e.h});
        if (it == nb.index.end()) throw std::logic_error("composite morphism missing from Hom basis");
        D(it->second, c) += sign * dx(e.g, g0);
      }
    }
    ranks[n] = rank(D);
  }
  return cohomology_from_ranks(dims, ranks);
}

inline Int euler_characteristic(const GradedDims& g) {
  Int s = 0;
  for (const auto& [k, d] : g) s += (k % 2 == 0 ? d : -d);
  return s;
}

inline Int euler_characteristic(const std::map<int, std::size_t>& g) {
  Int s = 0;
  for (const auto& [k, d] : g) s += (k % 2 == 0 ? 1 : -1) * static_cast<Int>(d);
  return s;
}

// Conic germ of S(w, J) at the lattice point v.
inline std::optional<WedgeGenerator> germ_at(const WedgeGenerator& g, const Vec& v) {
  Mask I = g.I;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (has_bit(g.I, static_cast<int>(j))) continue;
    if (g.v[j] > v[j]) return std::nullopt;
    if (g.v[j] < v[j]) I |= Mask(1) << j;
  }
  return WedgeGenerator{v, I};
}

inline bool any_morphism(const SheafComplex& x, const SheafComplex& y) {
  for (const auto& [k, s] : x.terms)
    for (const auto& g : s)
      for (const auto& [l, t] : y.terms)
        for (const auto& h : t)
          if (hom_dim(g, h)) return true;
  return false;
}

struct EquivariantHom {
  Int cutoff = 0;
  std::map<Vec, GradedDims> by_translation;  // keyed by lattice coefficients
  GradedDims total;
  std::set<int> unstable;
  bool stable() const { return unstable.empty(); }
};

inline EquivariantHom equivariant_hom(const SheafComplex& x, const SheafComplex& y, const MLattice& lat,
                                      Int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("cutoff must be positive");
  if (x.n != y.n || lat.n != x.n) throw std::invalid_argument("dimension mismatch");
  EquivariantHom r;
  r.cutoff = cutoff;
  GradedDims wide;
  const std::size_t rk = lat.rank();
  const Int big = 2 * cutoff;
  Vec k(rk, -big);
  while (true) {
    Vec m = lat.combine(k);
    SheafComplex ym = translate(y, m);
    if (any_morphism(x, ym)) {
      GradedDims h = hom_cohomology(x, ym);
      if (!h.empty()) {
        add_dims(wide, h);
        bool inner = std::all_of(k.begin(), k.end(), [&](Int c) { return std::llabs(c) <= cutoff; });
        if (inner) {
          r.by_translation[k] = h;
          add_dims(r.total, h);
        }
      }
    }
    std::size_t i = 0;
    while (i < rk && k[i] == big) k[i++] = -big;
    if (i == rk) break;
    ++k[i];
  }
  std::set<int> degs;
  for (const auto& [d, n] : r.total) degs.insert(d);
  for (const auto& [d, n] : wide) degs.insert(d);
  for (int d : degs) {
    auto a = r.total.find(d), b = wide.find(d);
    Int va = a == r.total.end() ? 0 : a->second, vb = b == wide.end() ? 0 : b->second;
    if (va != vb) r.unstable.insert(d);
  }
  return r;
}

inline Q koszul_sign(Mask K, int j) { return (popcount(K & ((Mask(1) << j) - 1)) % 2) ? Q(-1) : Q(1); }

// Koszul-type complex over nonempty subsets K of `over`: generator make(K) in degree |K| + offset,
// with signed maps K -> K + {j}.
template <class Make>
SheafComplex koszul_complex(int n, Mask over, bool include_empty, int offset, Make make) {
  SheafComplex x(n);
  std::map<Mask, std::pair<int, std::size_t>> where;
  std::vector<Mask> subsets;
  for (Mask K = 0; K <= over; ++K)
    if (is_subset(K, over) && (include_empty || K != 0)) subsets.push_back(K);
  std::stable_sort(subsets.begin(), subsets.end(), [](Mask a, Mask b) { return popcount(a) < popcount(b); });
  for (Mask K : subsets) {
    int deg = popcount(K) + offset;
    where[K] = {deg, x.add(deg, make(K))};
  }
  for (Mask K : subsets)
    for (int j : mask_indices(over & ~K)) {
      Mask L = K | (Mask(1) << j);
      auto [dk, ik] = where[K];
      auto [dl, il] = where[L];
      x.set(dk, il, ik, koszul_sign(K, j));
    }
  x.finalize();
  return x;
}

inline SheafComplex build_hourglass(int m) {
  if (m < 1 || m > kMaxCoords) throw std::invalid_argument("hourglass dimension out of range");
  return koszul_complex(m, full_mask(m), false, -1, [&](Mask K) { return WedgeGenerator{Vec(m, 0), K}; });
}

enum class ProbeType { appears, positive, negative };

inline const char* to_string(ProbeType t) {
  switch (t) {
    case ProbeType::appears: return "appears";
    case ProbeType::positive: return "positive";
    case ProbeType::negative: return "negative";
  }
  return "?";
}

struct ThicknessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline ProbeType probe_type(const WeightAction& act, const Window& win, const Vec& v, Mask region) {
  if (appears(act, win, v, region)) return ProbeType::appears;
  auto all_appear = [&](Mask side) {
    for (Mask K = side; K != 0; K = (K - 1) & side)
      if (!appears(act, win, v, region | K)) return false;
    return true;
  };
  if (is_subset(region, act.pos_set) && all_appear(act.neg_set)) return ProbeType::positive;
  if (is_subset(region, act.neg_set) && all_appear(act.pos_set)) return ProbeType::negative;
  throw ThicknessError("window not thick enough");
}

inline SheafComplex build_probe(const WeightAction& act, const Window& win, const Vec& v, Mask region) {
  ProbeType t = probe_type(act, win, v, region);
  if (t == ProbeType::appears) return single(WedgeGenerator{v, region});
  Mask side = t == ProbeType::positive ? act.neg_set : act.pos_set;
  return koszul_complex(act.n, side, false, -1, [&](Mask K) { return WedgeGenerator{v, region | K}; });
}

inline SheafComplex build_microlocal_skyscraper(const Vec& v, Mask I) {
  if (I == 0) throw std::invalid_argument("microlocal skyscraper needs a nonempty index set");
  const int n = static_cast<int>(v.size());
  if (!is_subset(I, full_mask(n))) throw std::invalid_argument("index set out of range");
  return koszul_complex(n, I, true, 0, [&](Mask K) {
    Vec w = v;
    for (int j : mask_indices(K)) w[j] -= 1;
    return WedgeGenerator{w, 0};
  });
}

struct Box {
  Vec lo;
  Vec hi;
};

inline Box support_box(const SheafComplex& x, Int margin) {
  Box b{Vec(x.n, 0), Vec(x.n, 0)};
  bool first = true;
  for (const auto& [k, t] : x.terms)
    for (const auto& g : t)
      for (int j = 0; j < x.n; ++j) {
        if (first || g.v[j] < b.lo[j]) b.lo[j] = g.v[j];
        if (first || g.v[j] > b.hi[j]) b.hi[j] = g.v[j];
        if (j == x.n - 1) first = false;
      }
  for (int j = 0; j < x.n; ++j) {
    b.lo[j] -= margin;
    b.hi[j] += margin;
  }
  return b;
}

template <class F>
void for_each_region_point(const Box& box, F f) {
  const int n = static_cast<int>(box.lo.size());
  Vec u = box.lo;
  while (true) {
    for (Mask R = 0; R <= full_mask(n); ++R) f(RegionPoint{u, R});
    int i = 0;
    while (i < n && u[i] == box.hi[i]) {
      u[i] = box.lo[i];
      ++i;
    }
    if (i == n) break;
    ++u[i];
  }
}

inline bool check_acyclic(const SheafComplex& x, const Box& box) {
  if (x.empty()) return true;
  Box need = support_box(x, 1);
  if (static_cast<int>(box.lo.size()) != x.n || static_cast<int>(box.hi.size()) != x.n)
    throw std::invalid_argument("box dimension mismatch");
  for (int j = 0; j < x.n; ++j)
    if (box.lo[j] > need.lo[j] || box.hi[j] < need.hi[j])
      throw std::out_of_range("box does not cover the generator shifts with margin 1");
  bool ok = true;
  for_each_region_point(box, [&](const RegionPoint& p) {
    if (ok && !stalk_dims(x, p).empty()) ok = false;
  });
  return ok;
}

inline bool check_acyclic(const SheafComplex& x) { return check_acyclic(x, support_box(x, 1)); }

struct GenerationComplex {
  Vec v;
  int sign = -1;
  Mask ground = 0;
  std::vector<Mask> columns;
  std::map<Mask, SheafComplex> probes;
  std::map<std::tuple<Mask, Mask, int>, Matrix> components;  // (J, J', source degree) -> block
  SheafComplex total;
};

namespace detail {

inline Matrix block_or_zero(const GenerationComplex& gc, Mask J, Mask L, int p) {
  auto it = gc.components.find({J, L, p});
  int r = popcount(L & ~J);
  std::size_t rows = gc.probes.at(L).term(p + 1 - r).size(), cols = gc.probes.at(J).term(p).size();
  if (it == gc.components.end()) return Matrix(rows, cols);
  return it->second;
}

inline std::set<int> degrees_of(const SheafComplex& x) {
  std::set<int> s;
  for (const auto& [k, t] : x.terms)
    if (!t.empty()) s.insert(k);
  return s;
}

}  // namespace detail

inline GenerationComplex build_generation_complex(const WeightAction& act, const Window& win, const Vec& v,
                                                  int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  GenerationComplex gc;
  gc.v = v;
  gc.sign = sign;
  gc.ground = sign > 0 ? act.pos_set : act.neg_set;
  for (Mask J = 0; J <= gc.ground; ++J)
    if (is_subset(J, gc.ground)) gc.columns.push_back(J);
  std::stable_sort(gc.columns.begin(), gc.columns.end(),
                   [](Mask a, Mask b) { return popcount(a) < popcount(b); });
  for (Mask J : gc.columns) gc.probes.emplace(J, build_probe(act, win, v, J));

  // diagonal blocks
  for (Mask J : gc.columns) {
    const auto& F = gc.probes.at(J);
    Q s = popcount(J) % 2 ? Q(-1) : Q(1);
    for (int p : detail::degrees_of(F)) {
      Matrix d = F.differential(p);
      for (auto& e : d.a) e *= s;
      gc.components[{J, J, p}] = d;
    }
  }
  // one-step blocks: inclusion of index sets in equal internal degree
  for (Mask J : gc.columns)
    for (int j : mask_indices(gc.ground & ~J)) {
      Mask L = J | (Mask(1) << j);
      const auto& F = gc.probes.at(J);
      const auto& G = gc.probes.at(L);
      for (int p : detail::degrees_of(F)) {
        const auto& src = F.term(p);
        const auto& dst = G.term(p);
        Matrix phi(dst.size(), src.size());
        for (std::size_t a = 0; a < src.size(); ++a)
          for (std::size_t b = 0; b < dst.size(); ++b)
            if (is_subset(src[a].I, dst[b].I) && hom_dim(src[a], dst[b])) phi(b, a) = 1;
        // chain map check: phi d_F = d_G phi
        Matrix lhs = G.differential(p) * phi;
        Matrix phi_next(G.term(p + 1).size(), F.term(p + 1).size());
        for (std::size_t a = 0; a < F.term(p + 1).size(); ++a)
          for (std::size_t b = 0; b < G.term(p + 1).size(); ++b)
            if (is_subset(F.term(p + 1)[a].I, G.term(p + 1)[b].I) && hom_dim(F.term(p + 1)[a], G.term(p + 1)[b]))
              phi_next(b, a) = 1;
        Matrix rhs = phi_next * F.differential(p);
        if (!(lhs == rhs)) throw std::logic_error("probe inclusion is not a chain map");
        Q eps = koszul_sign(J, j);
        for (auto& e : phi.a) e *= eps;
        gc.components[{J, L, p}] = phi;
      }
    }
  // higher blocks from the Maurer-Cartan equation, by increasing length
  const int ground_size = popcount(gc.ground);
  for (int r = 2; r <= ground_size; ++r)
    for (Mask J : gc.columns)
      for (Mask L : gc.columns) {
        if (!is_subset(J, L) || popcount(L & ~J) != r) continue;
        const auto& F = gc.probes.at(J);
        const auto& G = gc.probes.at(L);
        // unknowns: admissible entries of psi^p : F^p -> G^{p+1-r}
        struct Var {
          int p;
          std::size_t row, col;
        };
        std::vector<Var> vars;
        for (int p : detail::degrees_of(F)) {
          const auto& src = F.term(p);
          const auto& dst = G.term(p + 1 - r);
          for (std::size_t a = 0; a < src.size(); ++a)
            for (std::size_t b = 0; b < dst.size(); ++b)
              if (hom_dim(src[a], dst[b])) vars.push_back({p, b, a});
        }
        // equations: entries of maps F^p -> G^{p+2-r}
        std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> eq_index;
        std::vector<std::tuple<int, std::size_t, std::size_t>> eqs;
        for (int p : detail::degrees_of(F))
          for (std::size_t a = 0; a < F.term(p).size(); ++a)
            for (std::size_t b = 0; b < G.term(p + 2 - r).size(); ++b) {
              eq_index[{p, b, a}] = eqs.size();
              eqs.push_back({p, b, a});
            }
        Matrix A(eqs.size(), vars.size());
        std::vector<Q> rhs(eqs.size());
        const Q sJ = popcount(J) % 2 ? Q(-1) : Q(1);
        const Q sL = popcount(L) % 2 ? Q(-1) : Q(1);
        for (std::size_t vi = 0; vi < vars.size(); ++vi) {
          const auto& var = vars[vi];
          // sL * d_G o psi^p : contributes at source degree p
          Matrix dG = G.differential(var.p + 1 - r);
          for (std::size_t b2 = 0; b2 < dG.rows; ++b2)
            if (dG(b2, var.row) != 0) A(eq_index.at({var.p, b2, var.col}), vi) += sL * dG(b2, var.row);
          // sJ * psi^p o d_F^{p-1} : contributes at source degree p-1
          Matrix dF = F.differential(var.p - 1);
          for (std::size_t a0 = 0; a0 < dF.cols; ++a0)
            if (dF(var.col, a0) != 0) A(eq_index.at({var.p - 1, var.row, a0}), vi) += sJ * dF(var.col, a0);
        }
        for (Mask K : gc.columns) {
          if (K == J || K == L || !is_subset(J, K) || !is_subset(K, L)) continue;
          int r1 = popcount(K & ~J);
          for (int p : detail::degrees_of(F)) {
            Matrix first = detail::block_or_zero(gc, J, K, p);
            Matrix second = detail::block_or_zero(gc, K, L, p + 1 - r1);
            Matrix prod = second * first;
            for (std::size_t b = 0; b < prod.rows; ++b)
              for (std::size_t a = 0; a < prod.cols; ++a)
                if (prod(b, a) != 0) rhs[eq_index.at({p, b, a})] -= prod(b, a);
          }
        }
        auto sol = solve(A, rhs);
        if (!sol) throw std::logic_error("no higher homotopy solves the twisted complex equation");
        for (int p : detail::degrees_of(F)) {
          Matrix blk(G.term(p + 1 - r).size(), F.term(p).size());
          bool nz = false;
          for (std::size_t vi = 0; vi < vars.size(); ++vi)
            if (vars[vi].p == p && (*sol)[vi] != 0) {
              blk(vars[vi].row, vars[vi].col) = (*sol)[vi];
              nz = true;
            }
          if (nz) gc.components[{J, L, p}] = blk;
        }
      }

  // flatten to one complex, total degree = internal degree + |J|
  SheafComplex& tot = gc.total;
  tot.n = act.n;
  std::map<std::pair<Mask, int>, std::size_t> offset;
  for (Mask J : gc.columns)
    for (const auto& [p, t] : gc.probes.at(J).terms) {
      int deg = p + popcount(J);
      offset[{J, p}] = tot.term(deg).size();
      for (const auto& g : t) tot.add(deg, g);
    }
  for (const auto& [key, blk] : gc.components) {
    auto [J, L, p] = key;
    if (blk.is_zero()) continue;
    int deg = p + popcount(J);
    int r = popcount(L & ~J);
    std::size_t so = offset.at({J, p}), to = offset.at({L, p + 1 - r});
    for (std::size_t b = 0; b < blk.rows; ++b)
      for (std::size_t a = 0; a < blk.cols; ++a)
        if (blk(b, a) != 0) tot.set(deg, to + b, so + a, blk(b, a));
  }
  tot.finalize();
  validate_complex(tot);
  return gc;
}

// The microlocal point probed by the generation complex: face (v, dirs) with cone I.
inline std::pair<FaceId, Mask> generation_point(const WeightAction& act, const Vec& v, int sign) {
  if (sign < 0) return {FaceId{v, act.pos_set}, act.neg_set};
  return {FaceId{v, act.neg_set}, act.pos_set};
}

struct ExceptionalReport {
  bool pass = false;
  std::vector<std::vector<EquivariantHom>> table;
  std::vector<std::string> diagnostics;
};

inline ExceptionalReport check_exceptional_collection(const std::vector<SheafComplex>& objects,
                                                      const MLattice& lat, Int cutoff) {
  if (objects.empty()) throw std::invalid_argument("need at least one object");
  ExceptionalReport rep;
  rep.pass = true;
  const std::size_t n = objects.size();
  rep.table.assign(n, std::vector<EquivariantHom>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      rep.table[i][j] = equivariant_hom(objects[i], objects[j], lat, cutoff);
      const auto& h = rep.table[i][j];
      if (i == j) {
        if (h.total != GradedDims{{0, 1}} || !h.stable()) {
          rep.pass = false;
          rep.diagnostics.push_back("End(F" + std::to_string(i) + ") is not one-dimensional in degree 0");
        }
      } else if (i < j) {
        if (!h.total.empty() || !h.stable()) {
          rep.pass = false;
          rep.diagnostics.push_back("Hom(F" + std::to_string(i) + ", F" + std::to_string(j) + ") does not vanish" +
                                    (h.stable() ? "" : " (truncated)"));
        }
      }
    }
  return rep;
}

}  // namespace vgit
