// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/design.hpp"

#include <cstdio>
#include <sstream>
#include <string>

namespace mirrorfield::io {

namespace detail_svg {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string polygon_points(const std::vector<Vec2>& poly, double sx, double ox,
                                  double oy) {
  std::ostringstream os;
  for (size_t i = 0; i < poly.size(); ++i) {
    if (i) os << " ";
    os << num(ox + poly[i].x() * sx) << "," << num(oy - poly[i].y() * sx);
  }
  return os.str();
}

}  // namespace detail_svg

/// Footprint diagnostic: one panel per evaluation depth, every mirror's
/// footprint outlined, the full-overlap region filled green.
inline std::string overlap_svg(const design::DesignState& state,
                               const std::string& provenance_comment = "") {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const int panel = 360;
  const int n_depths = static_cast<int>(state.spec.eval_depths.size());

  std::ostringstream body;
  double max_extent = 1e-6;

  struct Panel {
    std::vector<std::vector<Vec2>> footprints;
    std::vector<Vec2> overlap;
    double depth;
  };
  std::vector<Panel> panels;
  for (double depth : state.spec.eval_depths) {
    Panel p;
    p.depth = depth;
    const PlaneFrame eval = design::eval_plane_frame(state, depth);
    for (size_t m = 0; m < state.mirrors.size(); ++m) {
      auto fp = to_plane_2d(design::fov_footprint(state, static_cast<int>(m), depth), eval);
      for (const Vec2& v : fp) max_extent = std::max(max_extent, v.cwiseAbs().maxCoeff());
      p.footprints.push_back(std::move(fp));
    }
    const auto ov = design::full_overlap(state, depth);
    if (!ov.polygon.empty()) {
      p.overlap = to_plane_2d(ov.polygon, eval);
      for (const Vec2& v : p.overlap) max_extent = std::max(max_extent, v.cwiseAbs().maxCoeff());
    }
    panels.push_back(std::move(p));
  }

  const double sx = (panel / 2.0 - 16.0) / max_extent;
  for (int d = 0; d < n_depths; ++d) {
    const double ox = d * panel + panel / 2.0;
    const double oy = panel / 2.0;
    const Panel& p = panels[static_cast<size_t>(d)];
    body << "  <g>\n";
    if (!p.overlap.empty())
      body << "    <polygon points=\"" << detail_svg::polygon_points(p.overlap, sx, ox, oy)
           << "\" fill=\"#2ca02c\" fill-opacity=\"0.55\" stroke=\"none\"/>\n";
    for (size_t m = 0; m < p.footprints.size(); ++m)
      body << "    <polygon points=\""
           << detail_svg::polygon_points(p.footprints[m], sx, ox, oy) << "\" fill=\"none\" stroke=\""
           << kPalette[m % 10] << "\" stroke-width=\"1.2\"/>\n";
    body << "    <text x=\"" << detail_svg::num(d * panel + 10) << "\" y=\"16\" font-size=\"12\" "
         << "font-family=\"sans-serif\">depth " << detail_svg::num(p.depth) << " m</text>\n";
    body << "  </g>\n";
  }

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!provenance_comment.empty()) os << "<!-- " << provenance_comment << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << panel * n_depths
     << "\" height=\"" << panel << "\" viewBox=\"0 0 " << panel * n_depths << " " << panel
     << "\">\n";
  os << body.str();
  os << "</svg>\n";
  return os.str();
}

}  // namespace mirrorfield::io
