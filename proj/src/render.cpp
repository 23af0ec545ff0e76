#include "jointvip/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "jointvip/error.hpp"

namespace jointvip {

namespace {

constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 48.0;
constexpr double kMarginBottom = 64.0;
constexpr double kPointRadius = 4.0;
constexpr double kRangePadding = 0.1;

// Fixed 4-decimal coordinates; "-0.0000" is folded to "0.0000".
std::string fmt4(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt_exact(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c; break;
    }
  }
  return out;
}

Interval padded(double lo, double hi, bool anchor_zero) {
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  double span = hi - lo;
  if (!(span > 0.0)) span = 1.0;
  const double pad = kRangePadding * span;
  return {anchor_zero ? 0.0 : lo - pad, hi + pad};
}

// The part of `range` on one side of zero, as magnitudes.
Interval magnitude_side(Interval range, int sign) {
  if (sign > 0) return {std::max(range.lo, 0.0), range.hi};
  return {std::max(-range.hi, 0.0), -range.lo};
}

void add_curves(PlotGeometry& geom, const std::vector<double>& levels, bool use_abs,
                std::size_t n_samples) {
  static constexpr int kQuadrants[4][2] = {{1, 1}, {-1, -1}, {-1, 1}, {1, -1}};
  const int n_quadrants = use_abs ? 1 : 4;
  for (double level : levels) {
    for (int q = 0; q < n_quadrants; ++q) {
      const int sx = kQuadrants[q][0];
      const int sy = kQuadrants[q][1];
      const Interval ax = magnitude_side(geom.x_range, sx);
      Interval ay = magnitude_side(geom.y_range, sy);
      ay.hi = std::min(ay.hi, 1.0);
      if (!(ax.hi > 0.0) || !(ay.hi > 0.0) || ay.lo >= ay.hi) continue;
      const double a = std::max(ax.lo, level / ay.hi);
      const double b = ay.lo > 0.0 ? std::min(ax.hi, level / ay.lo) : ax.hi;
      if (!(a > 0.0) || !(a < b)) continue;

      CurveBranch branch;
      branch.level = level;
      const std::vector<Polyline> sampled = bias_curve(level, {a, b}, n_samples);
      for (const Vec2& v : sampled.front()) {
        branch.vertices.push_back({sx * v.x, sy * std::clamp(v.y, ay.lo, ay.hi)});
      }
      geom.curves.push_back(std::move(branch));
    }
  }
}

PlotGeometry build_layout(const JointVipModel& base, const std::vector<PostMeasure>* post,
                          const PlotSpec& spec) {
  spec.validate();
  const ReportOptions& opts = spec.opts;
  const SmdFlavor flavor = opts.smd_flavor;
  auto coord = [&](double v) { return opts.use_abs ? std::abs(v) : v; };

  std::set<std::size_t> labeled;
  if (spec.label_above_tol_only) {
    for (std::size_t j : ranked_above_tol(base, opts)) labeled.insert(j);
  } else {
    for (std::size_t j = 0; j < base.measures.size(); ++j) labeled.insert(j);
  }

  PlotGeometry geom;
  for (std::size_t j = 0; j < base.measures.size(); ++j) {
    const auto& m = base.measures[j];
    geom.points.push_back({m.name, coord(m.smd(flavor)), coord(m.outcome_cor),
                           labeled.count(j) > 0, PointKind::pre});
  }
  if (post) {
    for (std::size_t j = 0; j < post->size(); ++j) {
      const auto& p = (*post)[j];
      const double y = coord(base.measures[j].outcome_cor);
      geom.points.push_back({p.name, coord(p.smd(flavor)), y, false, PointKind::post});
      if (spec.show_post_trails) {
        geom.trails.push_back(
            {p.name, {geom.points[j].x, geom.points[j].y}, {coord(p.smd(flavor)), y}});
      }
    }
  }

  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  for (const auto& p : geom.points) {
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  geom.x_range = padded(x_lo, x_hi, opts.use_abs);
  geom.y_range = padded(y_lo, y_hi, opts.use_abs);

  const std::vector<double> levels =
      spec.curve_levels.empty() ? default_curve_levels(base, opts) : spec.curve_levels;
  add_curves(geom, levels, opts.use_abs, spec.curve_samples);
  return geom;
}

struct Frame {
  double left, top, width, height;
  Interval xr, yr;

  double px(double x) const { return left + (x - xr.lo) / xr.span() * width; }
  double py(double y) const { return top + (1.0 - (y - yr.lo) / yr.span()) * height; }
};

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

std::vector<std::pair<double, std::string>> ticks(Interval r) {
  const double step = nice_step(r.span());
  const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step))));
  std::vector<std::pair<double, std::string>> out;
  const long first = static_cast<long>(std::ceil(r.lo / step - 1e-9));
  for (long k = first;; ++k) {
    const double v = static_cast<double>(k) * step;
    if (v > r.hi + 1e-9 * step) break;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string label = buf;
    if (label.find_first_not_of("-0.") == std::string::npos) label = "0";
    out.emplace_back(v, label);
  }
  return out;
}

}  // namespace

void PlotSpec::validate() const {
  opts.validate();
  if (width_px < 100 || height_px < 100) {
    throw Error(ErrorCode::InvalidOptions, "plot width and height must be at least 100 px",
                {{"width_px", width_px}, {"height_px", height_px}});
  }
  if (curve_samples < 2) {
    throw Error(ErrorCode::InvalidOptions, "curves need at least 2 samples per branch");
  }
  for (std::size_t i = 0; i < curve_levels.size(); ++i) {
    const double level = curve_levels[i];
    if (!std::isfinite(level) || !(level > 0.0) || (i > 0 && !(level > curve_levels[i - 1]))) {
      throw Error(ErrorCode::InvalidOptions,
                  "curve levels must be positive and strictly ascending");
    }
  }
}

std::vector<double> default_curve_levels(const JointVipModel& model, const ReportOptions& opts) {
  const double max_bias = summarize(model, opts).max_abs_bias;
  std::vector<double> levels;
  for (std::size_t k = 1; k <= kMaxDefaultCurves; ++k) {
    const double level = static_cast<double>(k) * opts.bias_tol;
    levels.push_back(level);
    if (level >= max_bias) break;
  }
  return levels;
}

std::vector<Polyline> bias_curve(double level, Interval x_range, std::size_t n_samples,
                                 bool signed_mode) {
  if (!std::isfinite(level) || !(level > 0.0)) {
    throw Error(ErrorCode::InvalidRange, "curve level must be positive", {{"level", level}});
  }
  if (!std::isfinite(x_range.lo) || !std::isfinite(x_range.hi) || !(x_range.lo > 0.0) ||
      !(x_range.lo < x_range.hi)) {
    throw Error(ErrorCode::InvalidRange, "curve x range must satisfy 0 < lo < hi",
                {{"lo", x_range.lo}, {"hi", x_range.hi}});
  }
  if (n_samples < 2) {
    throw Error(ErrorCode::InvalidRange, "a curve needs at least 2 samples");
  }
  Polyline branch;
  branch.reserve(n_samples);
  const double ratio = x_range.hi / x_range.lo;
  for (std::size_t k = 0; k < n_samples; ++k) {
    double x;
    if (k == 0) {
      x = x_range.lo;
    } else if (k + 1 == n_samples) {
      x = x_range.hi;
    } else {
      x = x_range.lo * std::pow(ratio, static_cast<double>(k) / static_cast<double>(n_samples - 1));
    }
    branch.push_back({x, level / x});
  }
  std::vector<Polyline> out{branch};
  if (signed_mode) {
    Polyline mirrored;
    mirrored.reserve(branch.size());
    for (const Vec2& v : branch) mirrored.push_back({-v.x, -v.y});
    out.push_back(std::move(mirrored));
  }
  return out;
}

PlotGeometry layout(const JointVipModel& model, const PlotSpec& spec) {
  return build_layout(model, nullptr, spec);
}

PlotGeometry layout(const PostJointVipModel& model, const PlotSpec& spec) {
  return build_layout(model.base, &model.post, spec);
}

std::string render_svg(const PlotGeometry& geom, const PlotSpec& spec) {
  spec.validate();
  const double width = spec.width_px;
  const double height = spec.height_px;
  const Frame f{kMarginLeft, kMarginTop, width - kMarginLeft - kMarginRight,
                height - kMarginTop - kMarginBottom, geom.x_range, geom.y_range};
  const bool use_abs = spec.opts.use_abs;
  const std::string flavor(to_string(spec.opts.smd_flavor));

  std::string svg;
  auto line = [&](const std::string& s) {
    svg += s;
    svg += '\n';
  };

  line(R"(<?xml version="1.0" encoding="UTF-8" standalone="no"?>)");
  line(R"(<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width=")" +
       std::to_string(spec.width_px) + R"(" height=")" + std::to_string(spec.height_px) +
       R"(" viewBox="0 0 )" + std::to_string(spec.width_px) + " " +
       std::to_string(spec.height_px) + R"(">)");
  line("<title>" + xml_escape(spec.title) + "</title>");
  line("<style>");
  line(".frame{fill:none;stroke:#333;stroke-width:1}");
  line(".zero-line{stroke:#bbb;stroke-width:1;stroke-dasharray:2 2}");
  line(".tick{stroke:#333;stroke-width:1}");
  line(".tick-label{font:11px sans-serif;fill:#333}");
  line(".axis-title{font:13px sans-serif;fill:#111}");
  line(".plot-title{font:bold 15px sans-serif;fill:#111}");
  line(".bias-curve{fill:none;stroke:#8a8a8a;stroke-width:1;stroke-dasharray:5 3}");
  line(".trail{stroke:#9a9a9a;stroke-width:1}");
  line(".point-pre{fill:#ffffff;stroke:#1f4e79;stroke-width:1.5}");
  line(".point-post{fill:#c0392b;stroke:none}");
  line(".var-label{font:11px sans-serif;fill:#1f4e79}");
  line("</style>");
  line(R"(<rect x="0" y="0" width=")" + std::to_string(spec.width_px) + R"(" height=")" +
       std::to_string(spec.height_px) + R"(" fill="#ffffff"/>)");
  line(R"(<text class="plot-title" x=")" + fmt4(width / 2.0) + R"(" y=")" +
       fmt4(kMarginTop / 2.0 + 5.0) + R"(" text-anchor="middle">)" + xml_escape(spec.title) +
       "</text>");

  // axes
  // Data ranges at full precision, so pixel coordinates can be mapped back.
  line(R"(<rect class="frame" x=")" + fmt4(f.left) + R"(" y=")" + fmt4(f.top) +
       R"(" width=")" + fmt4(f.width) + R"(" height=")" + fmt4(f.height) +
       R"(" data-x-range=")" + fmt_exact(f.xr.lo) + " " + fmt_exact(f.xr.hi) +
       R"(" data-y-range=")" + fmt_exact(f.yr.lo) + " " + fmt_exact(f.yr.hi) + R"("/>)");
  if (f.xr.lo < 0.0 && f.xr.hi > 0.0) {
    line(R"(<line class="zero-line" x1=")" + fmt4(f.px(0.0)) + R"(" y1=")" + fmt4(f.top) +
         R"(" x2=")" + fmt4(f.px(0.0)) + R"(" y2=")" + fmt4(f.top + f.height) + R"("/>)");
  }
  if (f.yr.lo < 0.0 && f.yr.hi > 0.0) {
    line(R"(<line class="zero-line" x1=")" + fmt4(f.left) + R"(" y1=")" + fmt4(f.py(0.0)) +
         R"(" x2=")" + fmt4(f.left + f.width) + R"(" y2=")" + fmt4(f.py(0.0)) + R"("/>)");
  }
  const double bottom = f.top + f.height;
  for (const auto& [v, label] : ticks(f.xr)) {
    const std::string x = fmt4(f.px(v));
    line(R"(<line class="tick" x1=")" + x + R"(" y1=")" + fmt4(bottom) + R"(" x2=")" + x +
         R"(" y2=")" + fmt4(bottom + 5.0) + R"("/>)");
    line(R"(<text class="tick-label" x=")" + x + R"(" y=")" + fmt4(bottom + 18.0) +
         R"(" text-anchor="middle">)" + label + "</text>");
  }
  for (const auto& [v, label] : ticks(f.yr)) {
    const std::string y = fmt4(f.py(v));
    line(R"(<line class="tick" x1=")" + fmt4(f.left - 5.0) + R"(" y1=")" + y + R"(" x2=")" +
         fmt4(f.left) + R"(" y2=")" + y + R"("/>)");
    line(R"(<text class="tick-label" x=")" + fmt4(f.left - 8.0) + R"(" y=")" +
         fmt4(f.py(v) + 4.0) + R"(" text-anchor="end">)" + label + "</text>");
  }
  const std::string x_title = use_abs ? "Absolute standardized mean difference (" + flavor + ")"
                                      : "Standardized mean difference (" + flavor + ")";
  const std::string y_title =
      use_abs ? "Absolute outcome correlation (pilot)" : "Outcome correlation (pilot)";
  line(R"(<text class="axis-title" x=")" + fmt4(f.left + f.width / 2.0) + R"(" y=")" +
       fmt4(height - 16.0) + R"(" text-anchor="middle">)" + xml_escape(x_title) + "</text>");
  const std::string yx = fmt4(18.0);
  const std::string yy = fmt4(f.top + f.height / 2.0);
  line(R"(<text class="axis-title" x=")" + yx + R"(" y=")" + yy +
       R"x(" text-anchor="middle" transform="rotate(-90 )x" + yx + " " + yy + R"x()">)x" +
       xml_escape(y_title) + "</text>");

  for (const auto& c : geom.curves) {
    std::string d;
    for (std::size_t k = 0; k < c.vertices.size(); ++k) {
      d += k == 0 ? "M" : " L";
      d += fmt4(f.px(c.vertices[k].x)) + "," + fmt4(f.py(c.vertices[k].y));
    }
    line(R"(<path class="bias-curve" data-level=")" + fmt_g(c.level) + R"(" d=")" + d + R"("/>)");
  }
  for (const auto& t : geom.trails) {
    line(R"(<line class="trail" data-name=")" + xml_escape(t.name) + R"(" x1=")" +
         fmt4(f.px(t.from.x)) + R"(" y1=")" + fmt4(f.py(t.from.y)) + R"(" x2=")" +
         fmt4(f.px(t.to.x)) + R"(" y2=")" + fmt4(f.py(t.to.y)) + R"("/>)");
  }
  for (const auto& p : geom.points) {
    const char* cls = p.kind == PointKind::pre ? "point-pre" : "point-post";
    line(std::string(R"(<circle class=")") + cls + R"(" data-name=")" + xml_escape(p.name) +
         R"(" cx=")" + fmt4(f.px(p.x)) + R"(" cy=")" + fmt4(f.py(p.y)) + R"(" r=")" +
         fmt4(kPointRadius) + R"("/>)");
  }
  for (const auto& p : geom.points) {
    if (!p.labeled) continue;
    line(R"(<text class="var-label" x=")" + fmt4(f.px(p.x) + 6.0) + R"(" y=")" +
         fmt4(f.py(p.y) - 6.0) + R"(">)" + xml_escape(p.name) + "</text>");
  }
  line("</svg>");
  return svg;
}

}  // namespace jointvip
