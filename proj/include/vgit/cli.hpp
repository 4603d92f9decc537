#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vgit/bmodel.hpp"
#include "vgit/emit.hpp"
#include "vgit/lattice.hpp"
#include "vgit/sheafcalc.hpp"
#include "vgit/skeleton.hpp"

namespace vgit {

struct RunConfig {
  Vec weights;
  Window window;
  Int mu_box = 6;
  Int hom_cutoff = 4;
  Int degree_box = 8;
  std::string svg_path;
  std::string report_path;
  std::vector<std::string> checks;
};

inline const std::vector<std::string>& all_check_names() {
  static const std::vector<std::string> names{"appears_oracle", "slice_theorem", "jump_set", "hourglass", "probe",
                                              "generation",     "exceptional",   "sod",      "ccc_match", "koszul"};
  return names;
}

inline Vec parse_weights(const std::string& s) {
  Vec out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw std::invalid_argument("empty weight in list");
    std::size_t used = 0;
    Int v = std::stoll(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad weight: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("no weights given");
  return out;
}

inline Window parse_window(const std::string& s) {
  auto dots = s.find("..", 1);
  if (dots == std::string::npos) throw std::invalid_argument("window must look like lo..hi");
  std::string a = s.substr(0, dots), b = s.substr(dots + 2);
  std::size_t ua = 0, ub = 0;
  Int lo = std::stoll(a, &ua), hi = std::stoll(b, &ub);
  if (ua != a.size() || ub != b.size()) throw std::invalid_argument("bad window bounds: " + s);
  return Window(lo, hi);
}

// ---- checks ----

inline CheckResult run_appears_oracle(const WeightAction& act, const Window& win, Int mu_box) {
  MLattice lat = m_basis(act);
  Int compared = 0;
  json bad = json::array();
  for (Int k = -mu_box; k <= mu_box; ++k) {
    Vec v = class_rep(lat, k);
    for (Mask I = 0; I <= act.all(); ++I) {
      ++compared;
      if (appears(act, win, v, I) != appears_oracle(act, win, v, I)) bad.push_back({{"v", v}, {"I", mask_json(I)}});
    }
  }
  return {"appears_oracle", bad.empty() ? "pass" : "fail", {{"compared", compared}, {"mismatches", bad}}};
}

inline CheckResult run_slice_theorem(const WeightAction& act, const Window& win, Int mu_box) {
  auto [lo, hi] = default_mu_range(act, win, mu_box);
  auto w = build_skeleton(act, SkeletonKind::window, lo, hi, win);
  json d = json::object();
  bool ok = true, any = false;
  if (win.size() >= act.eta_plus) {
    any = true;
    auto gp = build_skeleton(act, SkeletonKind::git_plus, lo, hi);
    bool eq = restrict_equal(w, gp, Q(win.hi), Q(win.hi + mu_box));
    d["right"] = eq;
    ok = ok && eq;
  } else {
    d["right"] = "window smaller than eta_plus";
  }
  if (win.size() >= act.eta_minus) {
    any = true;
    auto gm = build_skeleton(act, SkeletonKind::git_minus, lo, hi);
    bool eq = restrict_equal(w, gm, Q(win.lo - mu_box), Q(win.lo));
    d["left"] = eq;
    ok = ok && eq;
  } else {
    d["left"] = "window smaller than eta_minus";
  }
  return {"slice_theorem", ok && any ? "pass" : "fail", d};
}

inline CheckResult run_jump_set(const WeightAction& act, const Window& win, Int mu_box) {
  JumpReport r = jump_covectors(act, win, mu_box);
  Int expect = std::max<Int>(0, win.size() - act.eta_minus);
  bool ok = static_cast<Int>(r.jump_mu_values.size()) == expect;
  if (win.size() == act.eta_plus)
    ok = ok && static_cast<Int>(r.jump_mu_values.size()) == act.eta && r.covectors_minus.empty();
  json d = jump_json(r);
  d["expected_size"] = expect;
  return {"jump_set", ok ? "pass" : "fail", d};
}

// Expected stalk of the hourglass of dimension m at region R around the origin.
inline GradedDims hourglass_expected(int m, Mask R) {
  if (R == 0) return {{0, 1}};
  if (R == full_mask(m)) return {{m - 1, 1}};
  return {};
}

inline CheckResult run_hourglass() {
  json d = json::object();
  bool ok = true;
  for (int m = 1; m <= 3; ++m) {
    SheafComplex h = build_hourglass(m);
    validate_complex(h);
    Int bad = 0;
    for (Mask R = 0; R <= full_mask(m); ++R)
      if (stalk_dims(h, {Vec(m, 0), R}) != hourglass_expected(m, R)) ++bad;
    d[std::to_string(m)] = {{"regions", 1 << m}, {"mismatches", bad}};
    ok = ok && bad == 0;
  }
  return {"hourglass", ok ? "pass" : "fail", d};
}

// Hom(probe, germ of G at v) against the stalk of G, for G = S(w, J) with w near v
// whose germ at v is a skeleton stratum.
inline bool probe_corepresents(const WeightAction& act, const Window& win, const Vec& v, Mask R, Int* compared) {
  SheafComplex probe = build_probe(act, win, v, R);
  validate_complex(probe);
  std::map<Mask, GradedDims> germ_hom;
  for (Mask J = 0; J <= act.all(); ++J) germ_hom[J] = hom_cohomology(probe, single({v, J}));
  Vec off(act.n, -1);
  RegionPoint p{v, R};
  while (true) {
    Vec w(act.n);
    for (int i = 0; i < act.n; ++i) w[i] = v[i] + off[i];
    for (Mask J = 0; J <= act.all(); ++J) {
      WedgeGenerator g{w, J};
      auto germ = germ_at(g, v);
      // only germs that are strata of the window skeleton at v
      if (germ && !appears(act, win, v, germ->I)) continue;
      GradedDims lhs = germ ? germ_hom.at(germ->I) : GradedDims{};
      if (compared) ++*compared;
      if (lhs != stalk_dims(single(g), p)) return false;
    }
    int i = 0;
    while (i < act.n && off[i] == 1) off[i++] = -1;
    if (i == act.n) break;
    ++off[i];
  }
  return true;
}

inline CheckResult run_probe(const WeightAction& act, const Window& win) {
  MLattice lat = m_basis(act);
  Int compared = 0;
  json bad = json::array();
  std::string error;
  for (Int k = win.lo - act.abs_sum(); k <= win.hi + act.abs_sum() && error.empty(); ++k) {
    Vec v = class_rep(lat, k);
    for (Mask R = 0; R <= act.all(); ++R) {
      try {
        if (!probe_corepresents(act, win, v, R, &compared)) bad.push_back({{"mu", k}, {"region", mask_json(R)}});
      } catch (const ThicknessError& e) {
        error = std::string(e.what()) + " at mu " + std::to_string(k);
        break;
      }
    }
  }
  json d = {{"compared", compared}, {"mismatches", bad}};
  if (!error.empty()) d["error"] = error;
  return {"probe", bad.empty() && error.empty() ? "pass" : "fail", d};
}

inline CheckResult run_generation(const WeightAction& act, const Window& win, Int mu_box) {
  auto [lo, hi] = default_mu_range(act, win, mu_box);
  auto enc = build_skeleton(act, SkeletonKind::window, lo, hi, win);
  MLattice lat = m_basis(act);
  json steps = json::array();
  bool ok = true, any = false;
  std::string error;
  auto run = [&](int sign, Int k) {
    Vec v = class_rep(lat, k);
    auto gc = build_generation_complex(act, win, v, sign);
    bool acyclic = check_acyclic(gc.total);
    auto [face, cone] = generation_point(act, v, sign);
    bool in_skel = enc.contains(face, cone);
    steps.push_back({{"mu", k}, {"sign", sign}, {"acyclic", acyclic}, {"point_in_skeleton", in_skel}});
    return std::pair{acyclic, in_skel};
  };
  try {
    if (win.size() >= act.eta_minus) {
      any = true;
      for (Int k = win.lo - mu_box; k < win.lo; ++k) {
        auto [acyclic, in_skel] = run(-1, k);
        ok = ok && acyclic && !in_skel;
      }
    }
    if (win.size() >= act.eta_plus) {
      any = true;
      for (Int k = win.hi + 1; k <= win.hi + mu_box; ++k) {
        auto [acyclic, in_skel] = run(1, k);
        ok = ok && acyclic && !in_skel;
      }
    }
  } catch (const ThicknessError& e) {
    error = e.what();
  }
  json d = {{"steps", steps}};
  if (!error.empty()) d["error"] = error;
  if (!any) d["error"] = "window smaller than eta_minus";
  return {"generation", ok && any && error.empty() ? "pass" : "fail", d};
}

inline std::vector<SheafComplex> jump_skyscrapers(const WeightAction& act, const Window& win) {
  MLattice lat = m_basis(act);
  JumpReport r = jump_covectors(act, win, 0);
  std::vector<SheafComplex> objs;
  for (Int k : r.jump_mu_values) objs.push_back(build_microlocal_skyscraper(class_rep(lat, k), act.neg_set));
  return objs;
}

inline CheckResult run_exceptional(const WeightAction& act, const Window& win, Int cutoff) {
  auto objs = jump_skyscrapers(act, win);
  if (objs.empty()) return {"exceptional", "pass", {{"objects", 0}, {"note", "no jump levels"}}};
  auto rep = check_exceptional_collection(objs, m_basis(act), cutoff);
  json table = json::array();
  for (std::size_t i = 0; i < rep.table.size(); ++i)
    for (std::size_t j = 0; j < rep.table.size(); ++j)
      table.push_back({{"src", i}, {"dst", j}, {"total", dims_json(rep.table[i][j].total)},
                       {"stable", rep.table[i][j].stable()}});
  return {"exceptional",
          rep.pass ? "pass" : "fail",
          {{"objects", objs.size()}, {"cutoff", cutoff}, {"table", table}, {"diagnostics", rep.diagnostics}}};
}

inline json sod_variant_json(const SodVariant& s) {
  json e = json::array(), w = json::array();
  for (const auto& t : s.exceptional) e.push_back(to_string(t));
  for (const auto& t : s.window_part) w.push_back(to_string(t));
  return {{"exceptional", e}, {"window_part", w}, {"verified", s.verified}, {"failures", s.failures}};
}

inline CheckResult run_sod(const WeightAction& act, const Window& win, Int degree_box) {
  SodReport r;
  try {
    r = sod_report(act, win, degree_box);
  } catch (const std::invalid_argument& e) {
    return {"sod", "fail", {{"error", e.what()}}};
  }
  bool ok = true;
  json d = {{"eta_count", r.eta_count}};
  if (r.v1) {
    d["variant1"] = sod_variant_json(*r.v1);
    ok = ok && r.v1->verified && r.eta_count == win.size() - act.eta_minus;
  }
  if (r.v2) {
    d["variant2"] = sod_variant_json(*r.v2);
    ok = ok && r.v2->verified;
    if (!r.v1) ok = ok && r.eta_count == win.size() - act.eta_plus;
  }
  if (win.size() == act.eta_plus) ok = ok && r.eta_count == act.eta;
  return {"sod", ok ? "pass" : "fail", d};
}

inline CheckResult run_ccc(const WeightAction& act, Int degree_box) {
  Int compared = 0;
  json bad = json::array();
  for (Int i = -2; i <= 2; ++i)
    for (Int diff = -5; diff <= 5; ++diff) {
      CccMatch m = ccc_match(act, i, i + diff, degree_box);
      ++compared;
      if (!m.pass) bad.push_back({{"i", i}, {"j", i + diff}, {"a", m.a_count}, {"b", m.b_count}});
    }
  return {"ccc_match", bad.empty() ? "pass" : "fail", {{"pairs", compared}, {"box", degree_box}, {"mismatches", bad}}};
}

inline CheckResult run_koszul(const WeightAction& act) {
  auto plus = koszul_weight_range(act, Locus::Vplus);
  auto minus = koszul_weight_range(act, Locus::Vminus);
  Int neg_abs = 0, pos_abs = 0;
  for (Int a : act.weights) (a < 0 ? neg_abs : pos_abs) += std::llabs(a);
  auto total = [](const std::vector<Int>& r) {
    Int s = 0;
    for (Int x : r) s += x;
    return s;
  };
  bool ok = plus.lo == 0 && plus.hi == neg_abs && minus.lo == 0 && minus.hi == pos_abs &&
            total(plus.ranks) == (Int(1) << popcount(act.neg_set)) &&
            total(minus.ranks) == (Int(1) << popcount(act.pos_set));
  return {"koszul",
          ok ? "pass" : "fail",
          {{"plus", {{"range", {plus.lo, plus.hi}}, {"ranks", plus.ranks}}},
           {"minus", {{"range", {minus.lo, minus.hi}}, {"ranks", minus.ranks}}}}};
}

inline CheckResult run_check(const std::string& name, const WeightAction& act, const RunConfig& cfg) {
  try {
    if (name == "appears_oracle") return run_appears_oracle(act, cfg.window, cfg.mu_box);
    if (name == "slice_theorem") return run_slice_theorem(act, cfg.window, cfg.mu_box);
    if (name == "jump_set") return run_jump_set(act, cfg.window, cfg.mu_box);
    if (name == "hourglass") return run_hourglass();
    if (name == "probe") return run_probe(act, cfg.window);
    if (name == "generation") return run_generation(act, cfg.window, cfg.mu_box);
    if (name == "exceptional") return run_exceptional(act, cfg.window, cfg.hom_cutoff);
    if (name == "sod") return run_sod(act, cfg.window, cfg.degree_box);
    if (name == "ccc_match") return run_ccc(act, cfg.degree_box);
    if (name == "koszul") return run_koszul(act);
  } catch (const std::exception& e) {
    return {name, "fail", {{"error", e.what()}}};
  }
  throw std::invalid_argument("unknown check: " + name);
}

inline Report analyze(const RunConfig& cfg, const WeightAction& act) {
  Report r;
  r.action = action_json(act);
  r.window = window_json(cfg.window);
  r.extra["jump"] = jump_json(jump_covectors(act, cfg.window, cfg.mu_box));
  r.extra["config"] = {{"mu_box", cfg.mu_box}, {"hom_cutoff", cfg.hom_cutoff}, {"degree_box", cfg.degree_box}};
  const auto& names = cfg.checks.empty() ? all_check_names() : cfg.checks;
  for (const auto& n : names) r.checks.push_back(run_check(n, act, cfg));
  return r;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

inline std::string render_window_svg(const WeightAction& act, const Window& win, Int mu_box, SvgStats* stats = nullptr) {
  auto [lo, hi] = default_mu_range(act, win, mu_box);
  auto enc = build_skeleton(act, SkeletonKind::window, lo, hi, win);
  return render_svg(enc, jump_covectors(act, win, mu_box), {}, stats);
}

inline int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  WeightAction act;
  try {
    act = normalize_action(cfg.weights);
    if (cfg.mu_box < 0 || cfg.hom_cutoff < 1 || cfg.degree_box < 0)
      throw std::invalid_argument("box sizes must be nonnegative and the cutoff positive");
    for (const auto& c : cfg.checks)
      if (std::find(all_check_names().begin(), all_check_names().end(), c) == all_check_names().end())
        throw std::invalid_argument("unknown check: " + c);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  Report r = analyze(cfg, act);
  std::string text = write_report(r);
  try {
    if (!cfg.svg_path.empty()) write_file(cfg.svg_path, render_window_svg(act, cfg.window, cfg.mu_box));
    if (cfg.report_path.empty()) {
      out << text;
    } else {
      write_file(cfg.report_path, text);
      for (const auto& c : r.checks) out << c.name << ": " << c.status << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return r.any_failed() ? 1 : 0;
}

struct SliceSweep {
  std::vector<Q> ts;
  std::vector<std::size_t> hairs;
  std::vector<std::vector<bool>> equal;  // equal combinatorial type
  std::size_t classes = 0;
};

inline SliceSweep slice_sweep(const WeightAction& act, const Window& win, const std::vector<Q>& ts, Int mu_box) {
  auto [lo, hi] = default_mu_range(act, win, mu_box);
  for (const Q& t : ts) {
    if (is_integer(t)) throw std::invalid_argument("slice heights must not be integers");
    lo = std::min(lo, to_int(floor_q(t)) - act.abs_sum() - 1);
    hi = std::max(hi, to_int(floor_q(t)) + act.abs_sum() + 1);
  }
  auto enc = build_skeleton(act, SkeletonKind::window, lo, hi, win);
  SliceSweep s;
  s.ts = ts;
  std::vector<SliceSignature> sigs;
  for (const Q& t : ts) {
    auto sl = slice_encoding(enc, t);
    s.hairs.push_back(sl.hair_count());
    sigs.push_back(slice_signature(enc, sl));
  }
  s.equal.assign(ts.size(), std::vector<bool>(ts.size(), false));
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < ts.size(); ++j) s.equal[i][j] = sigs[i] == sigs[j];
  std::set<SliceSignature> distinct(sigs.begin(), sigs.end());
  s.classes = distinct.size();
  return s;
}

inline int cmd_slice(const RunConfig& cfg, const std::vector<std::string>& t_text, std::ostream& out,
                     std::ostream& err) {
  WeightAction act;
  std::vector<Q> ts;
  try {
    act = normalize_action(cfg.weights);
    if (t_text.empty()) throw std::invalid_argument("need at least one slice height");
    for (const auto& s : t_text) ts.push_back(parse_rational(s));
    for (const Q& t : ts)
      if (is_integer(t)) throw std::invalid_argument("slice heights must not be integers");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  SliceSweep s = slice_sweep(act, cfg.window, ts, cfg.mu_box);
  json slices = json::array();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out << "t=" << format_fixed(ts[i], 2) << " hairs=" << s.hairs[i] << "\n";
    slices.push_back({{"t", format_fixed(ts[i], 2)}, {"hairs", s.hairs[i]}});
  }
  out << "equality:\n";
  json matrix = json::array();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < ts.size(); ++j) {
      out << (s.equal[i][j] ? '1' : '0') << (j + 1 < ts.size() ? " " : "\n");
      row.push_back(s.equal[i][j] ? 1 : 0);
    }
    matrix.push_back(row);
  }
  out << "classes=" << s.classes << "\n";
  if (!cfg.report_path.empty()) {
    json j = {{"tool_version", kToolVersion},
              {"action", action_json(act)},
              {"window", window_json(cfg.window)},
              {"slices", slices},
              {"equality", matrix},
              {"classes", s.classes}};
    write_file(cfg.report_path, j.dump(2) + "\n");
  }
  return 0;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"vgit: window skeleton and wall-crossing checks for rank-one torus actions"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string weights, window;
  std::vector<std::string> ts;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--weights", weights, "weights a1,a2,...")->required();
    sub->add_option("--window", window, "lattice window lo..hi")->required();
    sub->add_option("--mu-box", cfg.mu_box, "mu radius for sweeps");
    sub->add_option("--report", cfg.report_path, "write JSON report to this path");
  };
  auto* analyze_cmd = app.add_subcommand("analyze", "run verification checks");
  common(analyze_cmd);
  analyze_cmd->add_option("--hom-cutoff", cfg.hom_cutoff, "translation cutoff for equivariant Homs");
  analyze_cmd->add_option("--degree-box", cfg.degree_box, "exponent box for B-side counts");
  analyze_cmd->add_option("--svg", cfg.svg_path, "write SVG scene");
  analyze_cmd->add_option("--checks", cfg.checks, "comma-separated check names")->delimiter(',');
  auto* slice_cmd = app.add_subcommand("slice", "compare slices at generic heights");
  common(slice_cmd);
  slice_cmd->add_option("--t", ts, "slice heights (decimal or p/q)")->required()->allow_extra_args();

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    cfg.weights = parse_weights(weights);
    cfg.window = parse_window(window);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (analyze_cmd->parsed()) return cmd_analyze(cfg, out, err);
  return cmd_slice(cfg, ts, out, err);
}

}  // namespace vgit
