#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vgit/bmodel.hpp"
#include "vgit/lattice.hpp"
#include "vgit/sheafcalc.hpp"
#include "vgit/skeleton.hpp"

namespace vgit {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

inline json mask_json(Mask m) {
  json a = json::array();
  for (int i : mask_indices(m)) a.push_back(i + 1);
  return a;
}

inline json action_json(const WeightAction& act) {
  return {{"weights", act.weights},
          {"eta_plus", act.eta_plus},
          {"eta_minus", act.eta_minus},
          {"eta", act.eta},
          {"flipped", act.flipped}};
}

inline json window_json(const Window& w) { return {{"window_lo", w.lo}, {"window_hi", w.hi}}; }

inline json dims_json(const GradedDims& g) {
  json o = json::object();
  for (const auto& [d, n] : g) o[std::to_string(d)] = n;
  return o;
}

inline json jump_json(const JumpReport& r) {
  return {{"plus", r.covectors_plus}, {"minus_candidates", r.covectors_minus}, {"jump_mu", r.jump_mu_values}};
}

inline json skeleton_json(const SkeletonEncoding& e) {
  json a = json::array();
  for (const auto& [f, cones] : e.entries) {
    json c = json::array();
    for (Mask I : cones) c.push_back(mask_json(I));
    a.push_back({{"anchor", f.anchor}, {"dirs", mask_json(f.dirs)}, {"cones", c}});
  }
  return a;
}

inline json complex_json(const SheafComplex& x) {
  json terms = json::object();
  for (const auto& [k, t] : x.terms) {
    json gens = json::array();
    for (const auto& g : t) gens.push_back({{"v", g.v}, {"I", mask_json(g.I)}});
    terms[std::to_string(k)] = gens;
  }
  json diffs = json::object();
  for (const auto& [k, m] : x.diff) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j).str());
      rows.push_back(row);
    }
    diffs[std::to_string(k)] = rows;
  }
  return {{"n", x.n}, {"terms", terms}, {"differentials", diffs}};
}

struct CheckResult {
  std::string name;
  std::string status;  // pass | fail | truncated
  json details = json::object();
  bool operator==(const CheckResult&) const = default;
};

struct Report {
  std::string tool_version = kToolVersion;
  json action = json::object();
  json window = json::object();
  json extra = json::object();
  std::vector<CheckResult> checks;
  bool operator==(const Report&) const = default;

  bool any_failed() const {
    for (const auto& c : checks)
      if (c.status == "fail") return true;
    return false;
  }
};

inline json report_json(const Report& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"status", c.status}, {"details", c.details}});
  json j = {{"tool_version", r.tool_version}, {"action", r.action}, {"window", r.window}, {"checks", checks}};
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

inline std::string write_report(const Report& r) { return report_json(r).dump(2) + "\n"; }

inline Report parse_report(const std::string& text) {
  json j = json::parse(text);
  Report r;
  r.tool_version = j.at("tool_version").get<std::string>();
  r.action = j.at("action");
  r.window = j.at("window");
  for (const auto& c : j.at("checks"))
    r.checks.push_back({c.at("name").get<std::string>(), c.at("status").get<std::string>(), c.at("details")});
  for (const auto& [k, v] : j.items())
    if (k != "tool_version" && k != "action" && k != "window" && k != "checks") r.extra[k] = v;
  return r;
}

struct SvgStyle {
  std::optional<Int> band_lo;
  std::optional<Int> band_hi;
  std::optional<std::vector<Q>> slices;
  Int unit = 60;
  Int height = 240;
  Int margin = 30;
};

struct SvgStats {
  std::size_t vertices = 0;
  std::size_t hairs = 0;
  std::size_t jump_lines = 0;
  std::vector<std::pair<Q, std::size_t>> slice_hairs;
  bool summary_chart = false;
};

inline std::vector<Q> default_slice_heights(const JumpReport& jumps, const std::optional<Window>& win, Int band_lo) {
  std::vector<Q> t;
  const Q half(1, 2);
  if (!jumps.jump_mu_values.empty()) {
    for (Int j : jumps.jump_mu_values) t.push_back(Q(j) - half);
    t.push_back(Q(jumps.jump_mu_values.back()) + half);
  } else if (win) {
    t.push_back(Q(win->lo) - half);
  } else {
    t.push_back(Q(band_lo) + half);
  }
  return t;
}

namespace detail {

inline Q frac(const Q& q) { return q - floor_q(q); }

inline std::string num(const Q& q) { return format_fixed(q, 2); }

}  // namespace detail

inline std::string render_svg(const SkeletonEncoding& enc, const JumpReport& jumps, const SvgStyle& style = {},
                              SvgStats* stats_out = nullptr) {
  const WeightAction& act = enc.action;
  SvgStats st;
  Int band_lo = style.band_lo.value_or(enc.window ? enc.window->lo - 2 : enc.mu_lo);
  Int band_hi = style.band_hi.value_or(enc.window ? enc.window->hi + 2 : enc.mu_hi);
  if (band_lo > band_hi) throw std::invalid_argument("empty render band");
  std::vector<Q> slices = style.slices.value_or(default_slice_heights(jumps, enc.window, band_lo));

  const Q unit(style.unit), height(style.height), margin(style.margin);
  const Q x0(band_lo - 1);
  const Int width = (band_hi - band_lo + 2) * style.unit + 2 * style.margin;
  const Int total_h = style.height + 2 * style.margin;
  auto px = [&](const Q& X) { return detail::num(margin + (X - x0) * unit); };
  auto py = [&](const Q& Y) { return detail::num(margin + (Q(1) - Y) * height); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << total_h
    << "\">\n";
  o << "<style>.strip{fill:#fafafa;stroke:#444}.window{fill:#ccc;fill-opacity:0.5}"
       ".vertex{fill:#000}.hair{stroke:#b22;stroke-width:1.5}.jump{stroke:#226;stroke-dasharray:4 3}"
       ".slice line{stroke:#2a2;stroke-width:0.8}.slice-hair{fill:#2a2}.bar{fill:#888}</style>\n";

  std::vector<std::pair<Q, std::size_t>> slice_counts;
  for (const Q& t : slices) slice_counts.emplace_back(t, slice_encoding(enc, t).hair_count());

  if (act.n != 2) {
    st.summary_chart = true;
    o << "<!-- warning: skeleton scene needs two coordinates; showing slice hair counts -->\n";
    Int x = style.margin;
    for (const auto& [t, h] : slice_counts) {
      Q bar_h(static_cast<Int>(h) * 10);
      o << "<rect class=\"bar\" data-t=\"" << detail::num(t) << "\" x=\"" << x << "\" y=\""
        << detail::num(margin + height - bar_h) << "\" width=\"20\" height=\"" << detail::num(bar_h) << "\"/>\n";
      o << "<text x=\"" << x << "\" y=\"" << style.margin + style.height + 15 << "\" font-size=\"10\">t="
        << detail::num(t) << " hairs=" << h << "</text>\n";
      x += 40;
    }
    o << "</svg>\n";
    st.slice_hairs = slice_counts;
    if (stats_out) *stats_out = st;
    return o.str();
  }

  const Vec& m = enc.lattice.basis.at(0);
  const Q mm(m[0] * m[0] + m[1] * m[1]);
  auto Y = [&](const Q& x1, const Q& x2) { return detail::frac((x1 * Q(m[0]) + x2 * Q(m[1])) / mm); };

  o << "<rect class=\"strip\" x=\"" << px(Q(band_lo) - Q(1, 2)) << "\" y=\"" << py(Q(1)) << "\" width=\""
    << detail::num((Q(band_hi - band_lo) + Q(1)) * unit) << "\" height=\"" << detail::num(height) << "\"/>\n";
  if (enc.window) {
    Int wl = std::max(enc.window->lo, band_lo), wh = std::min(enc.window->hi, band_hi);
    if (wl <= wh)
      o << "<rect class=\"window\" x=\"" << px(Q(wl)) << "\" y=\"" << py(Q(1)) << "\" width=\""
        << detail::num(Q(wh - wl) * unit) << "\" height=\"" << detail::num(height) << "\"/>\n";
  }
  // hairs on one-dimensional faces
  for (const auto& [f, cones] : enc.entries) {
    if (popcount(f.dirs) != 1) continue;
    auto [lo, hi] = face_mu_range(act, f);
    if (!(lo < band_hi && hi > band_lo)) continue;
    int d = mask_indices(f.dirs).front();
    Q mx1(f.anchor[0]), mx2(f.anchor[1]);
    (d == 0 ? mx1 : mx2) += Q(1, 2);
    Q X = mx1 * Q(act.weights[0]) + mx2 * Q(act.weights[1]);
    Q Ym = Y(mx1, mx2);
    for (Mask I : cones) {
      if (I == 0) continue;
      int i = mask_indices(I).front();
      Q dX = Q(-act.weights[i], 4);
      Q dY = Q(-m[i], 4) / mm;
      o << "<line class=\"hair\" x1=\"" << px(X) << "\" y1=\"" << py(Ym) << "\" x2=\"" << px(X + dX) << "\" y2=\""
        << py(Ym + dY) << "\"/>\n";
      ++st.hairs;
    }
  }
  if (enc.kind == SkeletonKind::window && enc.window)
    for (Int k = std::max(enc.window->lo, band_lo); k <= std::min(enc.window->hi, band_hi); ++k) {
      Vec r = class_rep(enc.lattice, k);
      o << "<circle class=\"vertex\" cx=\"" << px(Q(k)) << "\" cy=\"" << py(Y(Q(r[0]), Q(r[1])))
        << "\" r=\"4\"/>\n";
      ++st.vertices;
    }
  for (Int j : jumps.jump_mu_values) {
    if (j < band_lo || j > band_hi) continue;
    o << "<line class=\"jump\" x1=\"" << px(Q(j)) << "\" y1=\"" << py(Q(1)) << "\" x2=\"" << px(Q(j)) << "\" y2=\""
      << py(Q(0)) << "\"/>\n";
    ++st.jump_lines;
  }
  for (const Q& t : slices) {
    SliceEncoding s = slice_encoding(enc, t);
    o << "<g class=\"slice\" data-t=\"" << detail::num(t) << "\">\n";
    o << "<line x1=\"" << px(t) << "\" y1=\"" << py(Q(1)) << "\" x2=\"" << px(t) << "\" y2=\"" << py(Q(0))
      << "\"/>\n";
    std::size_t count = 0;
    for (const auto& it : s.items) {
      if (popcount(it.face.dirs) != 1) continue;
      int d = mask_indices(it.face.dirs).front();
      Q step = (t - Q(mu_of(act, it.face.anchor))) / Q(act.weights[d]);
      Q x1(it.face.anchor[0]), x2(it.face.anchor[1]);
      (d == 0 ? x1 : x2) += step;
      for (Mask I : it.cones) {
        if (I == 0) continue;
        o << "<circle class=\"slice-hair\" cx=\"" << px(t) << "\" cy=\"" << py(Y(x1, x2)) << "\" r=\"3\"/>\n";
        ++count;
      }
    }
    o << "</g>\n";
    st.slice_hairs.emplace_back(t, count);
  }
  o << "</svg>\n";
  if (stats_out) *stats_out = st;
  return o.str();
}

}  // namespace vgit
