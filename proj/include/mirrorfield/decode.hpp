// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/grid_model.hpp"
#include "mirrorfield/image.hpp"
#include "mirrorfield/simulate.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mirrorfield::lf {

using sim::SubImageMap;

// ---------------------------------------------------------------------------
// Step 1: remove radial distortion
// ---------------------------------------------------------------------------

/// Inverse-mapped resampling: each output pixel samples the raw image at its
/// forward-distorted location. Out-of-source pixels are masked. k1 = k2 = 0
/// copies bit-exactly.
inline MaskedImage undistort_image(const GrayImage& raw, const CameraIntrinsics& intr) {
  if (raw.width != intr.width || raw.height != intr.height)
    throw ValidationError("undistort_image: image size does not match intrinsics");
  MaskedImage out(raw.width, raw.height);
  if (intr.k1 == 0.0 && intr.k2 == 0.0) {
    out.image = raw;
    return out;
  }
  for (int y = 0; y < raw.height; ++y) {
    const double ny = (y - intr.cy) / intr.fy;
    for (int x = 0; x < raw.width; ++x) {
      const double nx = (x - intr.cx) / intr.fx;
      const double r2 = nx * nx + ny * ny;
      const double d = 1.0 + r2 * (intr.k1 + r2 * intr.k2);
      const double sx = intr.fx * nx * d + intr.cx;
      const double sy = intr.fy * ny * d + intr.cy;
      const auto v = sample_bilinear(raw, nullptr, sx, sy);
      if (v) {
        out.image.at(x, y) = *v;
      } else {
        out.mask.set(x, y, false);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Step 2: slice into sub-images
// ---------------------------------------------------------------------------

struct SubView {
  int mirror_index = -1;
  MaskedImage img;                  // crop of the undistorted frame
  int x0 = 0, y0 = 0;               // crop offset in undistorted pixel coords
  std::vector<Vec2> polygon;        // sub-image polygon in undistorted coords
};

/// Map a raw-image polygon into undistorted pixel coordinates.
inline std::vector<Vec2> undistort_polygon(const std::vector<Vec2>& poly,
                                           const CameraIntrinsics& intr) {
  std::vector<Vec2> out;
  out.reserve(poly.size());
  for (const Vec2& p : poly) {
    const Vec2 n = undistort_pixel(intr, p);
    out.emplace_back(intr.fx * n.x() + intr.cx, intr.fy * n.y() + intr.cy);
  }
  ensure_ccw_2d(out);
  return out;
}

/// Crop each mirror's polygon to its bounding box and mask pixels outside the
/// polygon. Masks are general convex polygons, not rectangles.
inline std::vector<SubView> slice(const MaskedImage& undistorted, const SubImageMap& map,
                                  const CameraIntrinsics& intr) {
  std::vector<SubView> views;
  views.reserve(map.entries.size());
  for (const auto& entry : map.entries) {
    SubView sv;
    sv.mirror_index = entry.mirror_index;
    if (entry.polygon.size() < 3) {
      views.push_back(std::move(sv));  // empty sub-image, warning case
      continue;
    }
    sv.polygon = undistort_polygon(entry.polygon, intr);
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (const Vec2& p : sv.polygon) {
      min_x = std::min(min_x, p.x());
      min_y = std::min(min_y, p.y());
      max_x = std::max(max_x, p.x());
      max_y = std::max(max_y, p.y());
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(min_x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
    const int x1 = std::min(undistorted.width() - 1, static_cast<int>(std::ceil(max_x)));
    const int y1 = std::min(undistorted.height() - 1, static_cast<int>(std::ceil(max_y)));
    if (x1 < x0 || y1 < y0) {
      views.push_back(std::move(sv));
      continue;
    }
    sv.x0 = x0;
    sv.y0 = y0;
    sv.img = MaskedImage(x1 - x0 + 1, y1 - y0 + 1, 0.0, false);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!point_in_convex_2d(sv.polygon, Vec2(x, y))) continue;
        if (!undistorted.mask.get(x, y)) continue;
        sv.img.image.at(x - x0, y - y0) = undistorted.image.at(x, y);
        sv.img.mask.set(x - x0, y - y0, true);
      }
    }
    views.push_back(std::move(sv));
  }
  return views;
}

// ---------------------------------------------------------------------------
// Step 3: reproject into the central view orientation
// ---------------------------------------------------------------------------

namespace detail {

/// Direction mapping for the inverse warp: target camera coords -> raw
/// (flipped) view camera coords.
inline Mat3 inverse_warp_matrix(const GridView& view) {
  return RectifiedGridModel::flip_matrix() * view.rotation_to_target;
}

/// Forward map of an undistorted source pixel into provisional target pixel
/// coordinates. Returns nullopt when the mapped direction has non-positive
/// depth.
inline std::optional<Vec2> warp_forward(const Vec2& pixel, const GridView& view,
                                        const CameraIntrinsics& base,
                                        const CameraIntrinsics& target) {
  const Vec3 x_raw((pixel.x() - base.cx) / base.fx, (pixel.y() - base.cy) / base.fy, 1.0);
  const Vec3 x_t = view.rotation_to_target.transpose() *
                   (RectifiedGridModel::flip_matrix() * x_raw);
  if (x_t.z() <= 1e-12) return std::nullopt;
  return Vec2(target.fx * x_t.x() / x_t.z() + target.cx,
              target.fy * x_t.y() / x_t.z() + target.cy);
}

inline void check_homography(const GridView& view, const CameraIntrinsics& base,
                             const CameraIntrinsics& target, int view_index) {
  Mat3 k = Mat3::Identity(), kt = Mat3::Identity();
  k(0, 0) = base.fx;
  k(1, 1) = base.fy;
  k(0, 2) = base.cx;
  k(1, 2) = base.cy;
  kt(0, 0) = target.fx;
  kt(1, 1) = target.fy;
  kt(0, 2) = target.cx;
  kt(1, 2) = target.cy;
  const Mat3 h = k * inverse_warp_matrix(view) * kt.inverse();
  Eigen::JacobiSVD<Mat3> svd(h);
  const double smin = svd.singularValues()(2);
  const double smax = svd.singularValues()(0);
  if (smin <= 0.0 || smax / smin > 1e8)
    throw NumericError("rectify_view: near-singular homography for view " +
                       std::to_string(view_index));
}

}  // namespace detail

/// Homography warp K_target * R_rel * K^-1 composed with the handedness flip
/// (the flip restores scene orientation in mirror views), inverse-mapped with
/// bilinear interpolation. Any interpolation touching a masked source pixel
/// masks the output pixel.
inline MaskedImage rectify_view(const SubView& sub, const GridView& view,
                                const CameraIntrinsics& target_intr,
                                const CameraIntrinsics& base_undistorted) {
  const int view_index = view.t * 1000 + view.s;  // diagnostic only
  detail::check_homography(view, base_undistorted, target_intr, view_index);
  MaskedImage out(target_intr.width, target_intr.height, 0.0, false);
  if (sub.img.width() == 0 || sub.img.height() == 0) return out;

  const Mat3 m = detail::inverse_warp_matrix(view);
  for (int v = 0; v < target_intr.height; ++v) {
    const double yt = (v - target_intr.cy) / target_intr.fy;
    for (int u = 0; u < target_intr.width; ++u) {
      const double xt = (u - target_intr.cx) / target_intr.fx;
      const double zx = m(0, 0) * xt + m(0, 1) * yt + m(0, 2);
      const double zy = m(1, 0) * xt + m(1, 1) * yt + m(1, 2);
      const double zz = m(2, 0) * xt + m(2, 1) * yt + m(2, 2);
      if (zz <= 1e-12) continue;
      const double sx = base_undistorted.fx * zx / zz + base_undistorted.cx - sub.x0;
      const double sy = base_undistorted.fy * zy / zz + base_undistorted.cy - sub.y0;
      const auto val = sample_bilinear(sub.img.image, &sub.img.mask, sx, sy);
      if (val) {
        out.image.at(u, v) = *val;
        out.mask.set(u, v, true);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct LightField4D {
  int s_count = 0, t_count = 0;  // S, T
  int u_count = 0, v_count = 0;  // U, V
  std::vector<MaskedImage> views;  // row-major: index = t * S + s
  RectifiedGridModel model;        // with finalized target intrinsics
  std::string source_id;

  const MaskedImage& view(int s, int t) const {
    return views.at(static_cast<size_t>(t) * s_count + s);
  }
};

/// Undistort, slice, rectify. The rectified sampling is the tightest box
/// common to all warped sub-image polygons; target focal lengths equal the
/// base camera's, distortion zeroed.
inline LightField4D decode_frame(const GrayImage& raw, const CameraIntrinsics& intr,
                                 const RectifiedGridModel& grid, const SubImageMap& map) {
  MaskedImage und;
  try {
    und = undistort_image(raw, intr);
  } catch (const Error& e) {
    throw ValidationError(std::string("decode[undistort]: ") + e.what());
  }

  std::vector<SubView> subs;
  try {
    subs = slice(und, map, intr);
  } catch (const Error& e) {
    throw ValidationError(std::string("decode[slice]: ") + e.what());
  }

  CameraIntrinsics base_lin = intr;
  base_lin.k1 = 0.0;
  base_lin.k2 = 0.0;

  // provisional target frame shares the base pinhole parameters
  CameraIntrinsics target = base_lin;

  // common bounding box of the warped sub-image polygons
  double x_lo = -1e300, y_lo = -1e300, x_hi = 1e300, y_hi = 1e300;
  for (const auto& sub : subs) {
    if (sub.polygon.size() < 3) continue;
    const GridView& view = grid.views.at(static_cast<size_t>(sub.mirror_index));
    double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
    for (const Vec2& p : sub.polygon) {
      const auto q = detail::warp_forward(p, view, base_lin, target);
      if (!q) throw GeometryError("decode[rectify]: sub-image wraps behind the target camera");
      bx0 = std::min(bx0, q->x());
      by0 = std::min(by0, q->y());
      bx1 = std::max(bx1, q->x());
      by1 = std::max(by1, q->y());
    }
    x_lo = std::max(x_lo, bx0);
    y_lo = std::max(y_lo, by0);
    x_hi = std::min(x_hi, bx1);
    y_hi = std::min(y_hi, by1);
  }
  if (!(x_hi > x_lo) || !(y_hi > y_lo))
    throw GeometryError("decode[rectify]: views share no common field of view");

  target.width = std::max(8, static_cast<int>(std::floor(x_hi - x_lo)));
  target.height = std::max(8, static_cast<int>(std::floor(y_hi - y_lo)));
  target.cx = base_lin.cx - x_lo;
  target.cy = base_lin.cy - y_lo;

  LightField4D out;
  out.s_count = grid.grid_cols;
  out.t_count = grid.grid_rows;
  out.u_count = target.width;
  out.v_count = target.height;
  out.model = grid;
  out.model.target_intrinsics = target;
  out.views.assign(static_cast<size_t>(grid.grid_cols) * grid.grid_rows,
                   MaskedImage(target.width, target.height, 0.0, false));

  for (const auto& sub : subs) {
    const GridView& view = grid.views.at(static_cast<size_t>(sub.mirror_index));
    try {
      out.views[static_cast<size_t>(sub.mirror_index)] =
          rectify_view(sub, view, target, base_lin);
    } catch (const Error& e) {
      throw NumericError(std::string("decode[rectify]: ") + e.what());
    }
  }
  return out;
}

/// Fig-style 2D tiling of the 4D light field (t rows by s columns), masked
/// pixels black, one-pixel separators.
inline GrayImage tile(const LightField4D& lfield, int separator = 1) {
  const int s_n = lfield.s_count, t_n = lfield.t_count;
  const int u_n = lfield.u_count, v_n = lfield.v_count;
  if (s_n <= 0 || t_n <= 0) throw ValidationError("tile: empty light field");
  GrayImage out(s_n * u_n + (s_n - 1) * separator, t_n * v_n + (t_n - 1) * separator, 0.0);
  for (int t = 0; t < t_n; ++t) {
    for (int s = 0; s < s_n; ++s) {
      const MaskedImage& view = lfield.view(s, t);
      const int ox = s * (u_n + separator);
      const int oy = t * (v_n + separator);
      for (int v = 0; v < v_n; ++v)
        for (int u = 0; u < u_n; ++u)
          out.at(ox + u, oy + v) = view.mask.get(u, v) ? view.image.at(u, v) : 0.0;
    }
  }
  return out;
}

}  // namespace mirrorfield::lf
