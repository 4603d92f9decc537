#include <catch2/catch_amalgamated.hpp>

#include "vgit/sheafcalc.hpp"

using namespace vgit;

namespace {

// Independent Hom oracle: complexes of quadrant sheaves S(v, {}) seen as complexes of projective
// modules over a finite box of Z^n (the generator at v sits at v + 1). Natural transformations
// are solved from the commutation equations, then the Hom complex is assembled pointwise.
struct GridOracle {
  Vec lo, hi;
  std::vector<Vec> points;
  std::map<Vec, std::size_t> at;

  GridOracle(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
    const int n = static_cast<int>(lo.size());
    Vec u = lo;
    while (true) {
      at[u] = points.size();
      points.push_back(u);
      int i = 0;
      while (i < n && u[i] == hi[i]) {
        u[i] = lo[i];
        ++i;
      }
      if (i == n) break;
      ++u[i];
    }
  }

  static std::vector<std::size_t> live(const std::vector<WedgeGenerator>& t, const Vec& x) {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < t.size(); ++g) {
      bool ok = true;
      for (std::size_t j = 0; j < x.size(); ++j) ok = ok && x[j] >= t[g].v[j] + 1;
      if (ok) out.push_back(g);
    }
    return out;
  }

  // Variables of a family of maps terms X^k -> Y^l: one entry per point and live pair.
  struct Vars {
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> index;  // (point, dst, src)
    std::size_t size = 0;
  };

  Vars vars(const std::vector<WedgeGenerator>& src, const std::vector<WedgeGenerator>& dst) const {
    Vars v;
    for (std::size_t p = 0; p < points.size(); ++p)
      for (std::size_t b : live(dst, points[p]))
        for (std::size_t a : live(src, points[p])) v.index[{p, b, a}] = v.size++;
    return v;
  }

  Matrix nat_basis(const std::vector<WedgeGenerator>& src, const std::vector<WedgeGenerator>& dst,
                   const Vars& v) const {
    std::vector<std::vector<std::pair<std::size_t, Q>>> eqs;
    for (std::size_t p = 0; p < points.size(); ++p)
      for (std::size_t i = 0; i < lo.size(); ++i) {
        Vec y = points[p];
        if (++y[i] > hi[i]) continue;
        std::size_t q = at.at(y);
        for (std::size_t b : live(dst, y))
          for (std::size_t a : live(src, points[p])) {
            std::vector<std::pair<std::size_t, Q>> e;
            auto it = v.index.find({p, b, a});
            if (it != v.index.end()) e.push_back({it->second, Q(1)});
            e.push_back({v.index.at({q, b, a}), Q(-1)});
            eqs.push_back(e);
          }
      }
    Matrix A(eqs.size(), v.size);
    for (std::size_t r = 0; r < eqs.size(); ++r)
      for (auto [c, x] : eqs[r]) A(r, c) += x;
    return nullspace(A);
  }

  GradedDims hom(const SheafComplex& x, const SheafComplex& y) const {
    int kmin = 1000, kmax = -1000, lmin = 1000, lmax = -1000;
    for (const auto& [k, t] : x.terms) kmin = std::min(kmin, k), kmax = std::max(kmax, k);
    for (const auto& [l, t] : y.terms) lmin = std::min(lmin, l), lmax = std::max(lmax, l);
    const int nlo = lmin - kmax - 1, nhi = lmax - kmin + 1;

    // per total degree n: blocks over source degree k
    struct Space {
      std::map<int, Vars> blocks;
      std::map<int, std::size_t> offset;
      std::size_t size = 0;
      Matrix nat;
    };
    std::map<int, Space> sp;
    for (int n = nlo; n <= nhi + 1; ++n) {
      Space& s = sp[n];
      std::vector<Matrix> nats;
      for (int k = kmin; k <= kmax; ++k) {
        s.blocks[k] = vars(x.term(k), y.term(k + n));
        s.offset[k] = s.size;
        s.size += s.blocks[k].size;
      }
      std::size_t ncols = 0;
      for (int k = kmin; k <= kmax; ++k) {
        nats.push_back(nat_basis(x.term(k), y.term(k + n), s.blocks[k]));
        ncols += nats.back().cols;
      }
      s.nat = Matrix(s.size, ncols);
      std::size_t c0 = 0;
      for (int k = kmin; k <= kmax; ++k) {
        const Matrix& m = nats[k - kmin];
        for (std::size_t r = 0; r < m.rows; ++r)
          for (std::size_t c = 0; c < m.cols; ++c) s.nat(s.offset[k] + r, c0 + c) = m(r, c);
        c0 += m.cols;
      }
    }
    std::map<int, std::size_t> dims, ranks;
    for (int n = nlo; n <= nhi; ++n) {
      const Space& s = sp[n];
      const Space& t = sp[n + 1];
      dims[n] = s.nat.cols;
      Matrix D(t.size, s.size);
      const Q sign = n % 2 == 0 ? Q(-1) : Q(1);
      for (int k = kmin; k <= kmax; ++k)
        for (const auto& [key, col] : s.blocks.at(k).index) {
          auto [p, b, a] = key;
          std::size_t c = s.offset.at(k) + col;
          // d_Y o f
          Matrix dy = y.differential(k + n);
          for (std::size_t b2 = 0; b2 < dy.rows; ++b2)
            if (dy(b2, b) != 0) D(t.offset.at(k) + t.blocks.at(k).index.at({p, b2, a}), c) += dy(b2, b);
          // +- f o d_X, landing in the block of source degree k - 1
          if (k - 1 >= kmin) {
            Matrix dx = x.differential(k - 1);
            for (std::size_t a0 = 0; a0 < dx.cols; ++a0) {
              if (dx(a, a0) == 0) continue;
              auto it = t.blocks.at(k - 1).index.find({p, b, a0});
              if (it != t.blocks.at(k - 1).index.end()) D(t.offset.at(k - 1) + it->second, c) += sign * dx(a, a0);
            }
          }
        }
      ranks[n] = rank(D * s.nat);
    }
    return cohomology_from_ranks(dims, ranks);
  }
};

GradedDims oracle_hom(const SheafComplex& x, const SheafComplex& y) {
  const int n = x.n;
  Vec lo(n, 1000), hi(n, -1000);
  for (const auto* c : {&x, &y})
    for (const auto& [k, t] : c->terms)
      for (const auto& g : t) {
        REQUIRE(g.I == 0);
        for (int j = 0; j < n; ++j) {
          lo[j] = std::min(lo[j], g.v[j]);
          hi[j] = std::max(hi[j], g.v[j] + 2);
        }
      }
  return GridOracle(lo, hi).hom(x, y);
}

SheafComplex two_term(const Vec& a, const Vec& b) {
  SheafComplex x(static_cast<int>(a.size()));
  x.add(0, {a, 0});
  x.add(1, {b, 0});
  x.set(0, 0, 0, Q(1));
  x.finalize();
  return x;
}

std::vector<SheafComplex> quadrant_zoo_1d() {
  return {single({{0}, 0}), single({{2}, 0}), single({{1}, 0}, 1), two_term({1}, {0}), two_term({3}, {1}),
          build_microlocal_skyscraper({2}, 1)};
}

std::vector<SheafComplex> quadrant_zoo_2d() {
  return {single({{0, 0}, 0}),
          single({{1, 2}, 0}),
          two_term({1, 1}, {0, 1}),
          two_term({2, 1}, {0, 0}),
          build_microlocal_skyscraper({1, 1}, 0b01),
          build_microlocal_skyscraper({1, 1}, 0b10),
          build_microlocal_skyscraper({2, 1}, 0b11)};
}

}  // namespace

TEST_CASE("hom_dim examples") {
  CHECK(hom_dim({{0, 0}, 0}, {{0, 0}, 0}) == 1);
  CHECK(hom_dim({{1, 0}, 0}, {{0, 0}, 0}) == 1);
  CHECK(hom_dim({{0, 0}, 0}, {{1, 0}, 0}) == 0);
  CHECK(hom_dim({{0, 0}, 0}, {{5, 0}, 0b01}) == 1);
  CHECK(hom_dim({{0, 0}, 0b01}, {{0, 0}, 0}) == 0);
  CHECK_THROWS(hom_dim({{0}, 0}, {{0, 0}, 0}));
}

TEST_CASE("hom_dim is a preorder") {
  std::vector<WedgeGenerator> gens;
  for (Int a = -1; a <= 1; ++a)
    for (Int b = -1; b <= 1; ++b)
      for (Mask I = 0; I < 4; ++I) gens.push_back({{a, b}, I});
  for (const auto& g : gens) CHECK(hom_dim(g, g) == 1);
  for (const auto& a : gens)
    for (const auto& b : gens)
      for (const auto& c : gens)
        if (hom_dim(a, b) && hom_dim(b, c)) CHECK(hom_dim(a, c) == 1);
}

TEST_CASE("stalk examples") {
  SheafComplex x = single({{0, 0}, 0b01});
  CHECK(stalk_dims(x, {{0, 1}, 0}) == GradedDims{{0, 1}});
  CHECK(stalk_dims(x, {{0, 0}, 0b10}).empty());
  CHECK(stalk_dims(x, {{-7, 0}, 0b01}) == GradedDims{{0, 1}});
  SheafComplex c = two_term({1}, {0});
  CHECK(stalk_dims(c, {{1}, 0}).empty());
  CHECK(stalk_dims(c, {{1}, 1}) == GradedDims{{1, 1}});
  CHECK(stalk_dims(c, {{0}, 0}) == GradedDims{{1, 1}});
  CHECK(stalk_dims(c, {{0}, 1}).empty());
  CHECK_THROWS(stalk_dims(c, {{0, 0}, 0}));
}

TEST_CASE("hourglass generator counts and stalks") {
  SheafComplex h = build_hourglass(3);
  CHECK(h.term(0).size() == 3);
  CHECK(h.term(1).size() == 3);
  CHECK(h.term(2).size() == 1);
  CHECK_NOTHROW(validate_complex(h));
  for (int m = 1; m <= 3; ++m) {
    SheafComplex g = build_hourglass(m);
    for (Mask R = 0; R <= full_mask(m); ++R) {
      GradedDims expect;
      if (R == 0) expect = {{0, 1}};
      if (R == full_mask(m)) expect = {{m - 1, 1}};
      CHECK(stalk_dims(g, {Vec(m, 0), R}) == expect);
    }
    CHECK(stalk_dims(g, {Vec(m, 1), full_mask(m)}) == GradedDims{{0, 1}});
    CHECK(stalk_dims(g, {Vec(m, -1), 0}) == GradedDims{{m - 1, 1}});
  }
  CHECK_THROWS(build_hourglass(0));
}

TEST_CASE("validate_complex rejects bad differentials") {
  SheafComplex x(1);
  x.add(0, {{0}, 0});
  x.add(1, {{1}, 0});
  x.set(0, 0, 0, Q(1));
  x.finalize();
  CHECK_THROWS_AS(validate_complex(x), std::logic_error);

  SheafComplex y(1);
  y.add(0, {{0}, 0});
  y.add(1, {{0}, 0});
  y.add(2, {{0}, 0});
  y.set(0, 0, 0, Q(1));
  y.set(1, 0, 0, Q(1));
  y.finalize();
  CHECK_THROWS_AS(validate_complex(y), std::logic_error);
}

TEST_CASE("hom_cohomology examples") {
  CHECK(hom_cohomology(single({{0}, 0}), single({{0}, 0})) == GradedDims{{0, 1}});
  CHECK(hom_cohomology(single({{0}, 0}), single({{1}, 0})).empty());
  CHECK(hom_cohomology(single({{1}, 0}), single({{0}, 0})) == GradedDims{{0, 1}});
  CHECK(hom_cohomology(single({{0}, 0}), single({{0}, 0}, 2)) == GradedDims{{2, 1}});
  SheafComplex c = two_term({1}, {0});
  CHECK(hom_cohomology(c, c) == GradedDims{{0, 1}});
  CHECK(hom_cohomology(c, translate(c, {1})) == GradedDims{{1, 1}});
  CHECK(hom_cohomology(c, translate(c, {-1})).empty());
  CHECK(hom_cohomology(c, shift(c, 1)) == GradedDims{{-1, 1}});
  SheafComplex cone = two_term({0}, {0});
  CHECK(hom_cohomology(cone, cone).empty());
}

TEST_CASE("hom_cohomology agrees with the grid-module oracle in one dimension") {
  auto zoo = quadrant_zoo_1d();
  for (std::size_t i = 0; i < zoo.size(); ++i)
    for (std::size_t j = 0; j < zoo.size(); ++j)
      for (Int t = -2; t <= 2; ++t) {
        INFO("i=" << i << " j=" << j << " t=" << t);
        SheafComplex y = translate(zoo[j], {t});
        CHECK(hom_cohomology(zoo[i], y) == oracle_hom(zoo[i], y));
      }
}

TEST_CASE("hom_cohomology agrees with the grid-module oracle in two dimensions") {
  auto zoo = quadrant_zoo_2d();
  for (std::size_t i = 0; i < zoo.size(); ++i)
    for (std::size_t j = 0; j < zoo.size(); ++j)
      for (const Vec& t : {Vec{0, 0}, Vec{1, 0}, Vec{0, -1}, Vec{-1, 1}}) {
        INFO("i=" << i << " j=" << j);
        SheafComplex y = translate(zoo[j], t);
        CHECK(hom_cohomology(zoo[i], y) == oracle_hom(zoo[i], y));
      }
}

TEST_CASE("Euler characteristic of Hom matches the chain level") {
  auto zoo = quadrant_zoo_2d();
  zoo.push_back(build_hourglass(2));
  zoo.push_back(single({{0, 0}, 0b10}));
  for (const auto& x : zoo)
    for (const auto& y : zoo) {
      if (x.n != y.n) continue;
      CHECK(euler_characteristic(hom_cohomology(x, y)) == euler_characteristic(hom_chain_dims(x, y)));
    }
}

TEST_CASE("hom_cohomology is invariant under simultaneous translation and shift") {
  auto zoo = quadrant_zoo_2d();
  for (const auto& x : zoo)
    for (const auto& y : zoo) {
      auto h = hom_cohomology(x, y);
      CHECK(hom_cohomology(translate(x, {3, -2}), translate(y, {3, -2})) == h);
      CHECK(hom_cohomology(shift(x, 1), shift(y, 1)) == h);
    }
}

TEST_CASE("germ_at examples") {
  CHECK(germ_at({{0, 0}, 0}, {1, 0}) == WedgeGenerator{{1, 0}, 0b01});
  CHECK_FALSE(germ_at({{2, 0}, 0}, {1, 0}));
  CHECK(germ_at({{2, 0}, 0b01}, {1, 0}) == WedgeGenerator{{1, 0}, 0b01});
}

TEST_CASE("equivariant Hom in one dimension") {
  MLattice z = MLattice::from_basis(1, {{1}});
  SheafComplex c = two_term({1}, {0});
  auto h = equivariant_hom(c, c, z, 4);
  CHECK(h.total == GradedDims{{0, 1}, {1, 1}});
  CHECK(h.stable());
  for (const auto& [k, d] : h.by_translation) {
    SheafComplex y = translate(c, z.combine(k));
    CHECK(d == oracle_hom(c, y));
  }

  // Hom(S(0), S(m)) is one-dimensional for every m <= 0
  SheafComplex q = single({{0}, 0});
  auto g = equivariant_hom(q, q, z, 3);
  CHECK(g.by_translation.size() == 4);
  for (const auto& [k, d] : g.by_translation) {
    CHECK(k[0] <= 0);
    CHECK(d == GradedDims{{0, 1}});
  }
  CHECK_FALSE(g.stable());
  CHECK(g.unstable == std::set<int>{0});
  CHECK_THROWS(equivariant_hom(q, q, z, 0));
}

TEST_CASE("probe example") {
  auto act = normalize_action({3, -1});
  Window win(0, 2);
  Vec v{0, 1};
  REQUIRE(mu_of(act, v) == -1);
  CHECK(probe_type(act, win, v, 0b01) == ProbeType::positive);
  SheafComplex p = build_probe(act, win, v, 0b01);
  REQUIRE(p.generator_count() == 1);
  CHECK(p.term(0).front() == WedgeGenerator{v, 0b11});
  CHECK(probe_type(act, win, {0, 0}, 0) == ProbeType::appears);
  CHECK(build_probe(act, win, {0, 0}, 0).term(0).front() == WedgeGenerator{{0, 0}, 0});
}

TEST_CASE("probes co-represent stalks on window germs") {
  for (const Vec& wts : {Vec{3, -1}, Vec{1, 1, -1}, Vec{1, 1, -2}}) {
    auto act = normalize_action(wts);
    Window win(0, act.eta_plus - 1);
    MLattice lat = m_basis(act);
    for (Int k = win.lo - 3; k <= win.hi + 3; ++k) {
      Vec v = class_rep(lat, k);
      for (Mask R = 0; R <= act.all(); ++R) {
        SheafComplex probe = build_probe(act, win, v, R);
        REQUIRE_NOTHROW(validate_complex(probe));
        Vec off(act.n, -1);
        while (true) {
          Vec w(act.n);
          for (int i = 0; i < act.n; ++i) w[i] = v[i] + off[i];
          for (Mask J = 0; J <= act.all(); ++J) {
            WedgeGenerator g{w, J};
            auto germ = germ_at(g, v);
            if (germ && !appears(act, win, v, germ->I)) continue;
            GradedDims lhs = germ ? hom_cohomology(probe, single(*germ)) : GradedDims{};
            CHECK(lhs == stalk_dims(single(g), {v, R}));
          }
          int i = 0;
          while (i < act.n && off[i] == 1) off[i++] = -1;
          if (i == act.n) break;
          ++off[i];
        }
      }
    }
  }
}

TEST_CASE("thin windows raise a thickness error") {
  auto act = normalize_action({3, -1});
  Window thin(0, 0);
  MLattice lat = m_basis(act);
  bool thrown = false;
  for (Mask R = 0; R <= act.all(); ++R) {
    try {
      build_probe(act, thin, class_rep(lat, 1), R);
    } catch (const ThicknessError&) {
      thrown = true;
    }
  }
  CHECK(thrown);
}

TEST_CASE("microlocal skyscraper examples") {
  Vec v{0, 0};
  SheafComplex s = build_microlocal_skyscraper(v, 0b10);
  CHECK_NOTHROW(validate_complex(s));
  CHECK(stalk_dims(s, {v, 0}).empty());
  CHECK(stalk_dims(s, {v, 0b10}) == GradedDims{{1, 1}});
  // support is {x1 > 0, -1 < x2 <= 0}
  for (Int a = -2; a <= 2; ++a)
    for (Int b = -2; b <= 2; ++b)
      for (Mask R = 0; R < 4; ++R) {
        // the region point sits at (a, b) pushed down along R and up elsewhere
        bool x1 = has_bit(R, 0) ? a > 0 : a >= 0;
        bool x2 = has_bit(R, 1) ? (b > -1 && b <= 0) : (b >= -1 && b < 0);
        bool inside = x1 && x2;
        CHECK(stalk_dims(s, {{a, b}, R}).empty() == !inside);
      }
  CHECK(hom_cohomology(s, s) == GradedDims{{0, 1}});
  CHECK_THROWS(build_microlocal_skyscraper(v, 0));
  CHECK_THROWS(build_microlocal_skyscraper(v, 0b100));
}

TEST_CASE("check_acyclic examples") {
  CHECK(check_acyclic(two_term({0}, {0})));
  CHECK_FALSE(check_acyclic(two_term({1}, {0})));
  CHECK_FALSE(check_acyclic(build_hourglass(2)));
  CHECK(check_acyclic(SheafComplex(2)));
  SheafComplex c = two_term({0, 0}, {0, 0});
  CHECK(check_acyclic(c, Box{{-1, -1}, {1, 1}}));
  CHECK_THROWS_AS(check_acyclic(c, Box{{0, 0}, {1, 1}}), std::out_of_range);
}

TEST_CASE("generation complex examples") {
  auto act = normalize_action({3, -1});
  Window win(0, 2);
  MLattice lat = m_basis(act);
  auto enc = build_skeleton(act, SkeletonKind::window, -12, 14, win);
  for (Int k = -4; k < 0; ++k) {
    auto gc = build_generation_complex(act, win, class_rep(lat, k), -1);
    CHECK(check_acyclic(gc.total));
    auto [face, cone] = generation_point(act, class_rep(lat, k), -1);
    CHECK_FALSE(enc.contains(face, cone));
  }
  for (Int k = 3; k <= 6; ++k) {
    auto gc = build_generation_complex(act, win, class_rep(lat, k), 1);
    CHECK(check_acyclic(gc.total));
  }
  // inside the window the point lies on the skeleton and the complex is not acyclic
  for (Int k = 0; k <= 2; ++k) {
    auto gc = build_generation_complex(act, win, class_rep(lat, k), -1);
    CHECK_FALSE(check_acyclic(gc.total));
    auto [face, cone] = generation_point(act, class_rep(lat, k), -1);
    CHECK(enc.contains(face, cone));
  }
  CHECK_THROWS(build_generation_complex(act, win, class_rep(lat, 0), 0));
}

TEST_CASE("generation complex is acyclic exactly off the skeleton") {
  for (const auto& wts : std::vector<Vec>{{1, -1}, {3, -1}, {1, 1, -1}, {1, 1, -2}, {2, 3, -1}}) {
    auto act = normalize_action(wts);
    Window win(0, act.eta_plus - 1);
    MLattice lat = m_basis(act);
    auto [lo, hi] = default_mu_range(act, win, 4);
    auto enc = build_skeleton(act, SkeletonKind::window, lo, hi, win);
    for (int sign : {-1, 1})
      for (Int k = win.lo - 3; k <= win.hi + 3; ++k) {
        Vec v = class_rep(lat, k);
        GenerationComplex gc;
        try {
          gc = build_generation_complex(act, win, v, sign);
        } catch (const ThicknessError&) {
          continue;
        }
        auto [face, cone] = generation_point(act, v, sign);
        INFO("n=" << act.n << " sign=" << sign << " k=" << k);
        CHECK(check_acyclic(gc.total) == !enc.contains(face, cone));
      }
  }
}

TEST_CASE("exceptional collection checks") {
  auto act = normalize_action({3, -1});
  MLattice lat = m_basis(act);
  std::vector<SheafComplex> objs;
  for (Int k : {0, 1}) objs.push_back(build_microlocal_skyscraper(class_rep(lat, k), act.neg_set));
  auto rep = check_exceptional_collection(objs, lat, 4);
  CHECK(rep.pass);
  CHECK(rep.table[0][0].total == GradedDims{{0, 1}});
  CHECK(rep.table[0][1].total.empty());
  CHECK(rep.table[1][0].total == GradedDims{{1, 1}});

  CHECK(check_exceptional_collection({objs[0]}, lat, 4).pass);

  MLattice none = MLattice::from_basis(1, {});
  auto bad = check_exceptional_collection({single({{0}, 0}), single({{-1}, 0})}, none, 2);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.diagnostics.empty());
  CHECK_THROWS(check_exceptional_collection({}, lat, 4));
}
