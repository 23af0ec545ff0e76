#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "jointvip/measures.hpp"
#include "jointvip/post.hpp"

namespace jointvip {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double span() const { return hi - lo; }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

using Polyline = std::vector<Vec2>;

enum class PointKind { pre, post };

struct PlotPoint {
  std::string name;
  double x = 0.0;  // SMD (absolute in abs mode)
  double y = 0.0;  // pilot outcome correlation (absolute in abs mode)
  bool labeled = false;
  PointKind kind = PointKind::pre;
};

// One hyperbola branch |x * y| = level, already clipped to the plot ranges.
struct CurveBranch {
  double level = 0.0;
  Polyline vertices;
};

struct Trail {
  std::string name;
  Vec2 from;
  Vec2 to;
};

struct PlotGeometry {
  Interval x_range;
  Interval y_range;
  std::vector<PlotPoint> points;  // all pre points first, then post points
  std::vector<CurveBranch> curves;
  std::vector<Trail> trails;
};

struct PlotSpec {
  ReportOptions opts;
  std::vector<double> curve_levels;  // empty: default_curve_levels()
  int width_px = 720;
  int height_px = 540;
  std::string title = "jointVIP";
  bool label_above_tol_only = true;
  bool show_post_trails = false;
  std::size_t curve_samples = 64;  // vertices per branch

  // Throws InvalidOptions on bad sizes, non-ascending or non-positive levels.
  void validate() const;
};

// Multiples of bias_tol (1x, 2x, ...) up to the first one >= max |bias|,
// capped at kMaxDefaultCurves levels.
inline constexpr std::size_t kMaxDefaultCurves = 100;
std::vector<double> default_curve_levels(const JointVipModel& model, const ReportOptions& opts);

// Samples y = level / x at n_samples geometrically spaced x in x_range, which
// must satisfy 0 < lo < hi. In signed mode a second branch mirrored through
// the origin (x in [-hi, -lo]) is appended.
std::vector<Polyline> bias_curve(double level, Interval x_range, std::size_t n_samples,
                                 bool signed_mode = false);

PlotGeometry layout(const JointVipModel& model, const PlotSpec& spec);
PlotGeometry layout(const PostJointVipModel& model, const PlotSpec& spec);

// Standalone SVG 1.1 document. Element order and number formatting are fixed,
// so identical inputs give byte-identical output.
std::string render_svg(const PlotGeometry& geom, const PlotSpec& spec);

}  // namespace jointvip
