// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/math.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace mirrorfield {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Oriented plane {x : normal . x = offset} carrying a convex polygon extent.
/// The extent lives in an in-plane 2D frame (frame_origin, frame_e1, frame_e2)
/// so planarity is maintained by construction when the plane moves.
struct MirrorPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;             // meters
  Vec3 frame_origin = Vec3::Zero();
  Vec3 frame_e1 = Vec3::UnitX();
  Vec3 frame_e2 = Vec3::UnitY();
  std::vector<Vec2> extent;        // CCW convex polygon, in-plane meters

  Vec3 to_world(const Vec2& uv) const {
    return frame_origin + uv.x() * frame_e1 + uv.y() * frame_e2;
  }

  Vec2 to_plane(const Vec3& p) const {
    const Vec3 d = p - frame_origin;
    return Vec2(d.dot(frame_e1), d.dot(frame_e2));
  }

  std::vector<Vec3> extent_world() const {
    std::vector<Vec3> out;
    out.reserve(extent.size());
    for (const Vec2& v : extent) out.push_back(to_world(v));
    return out;
  }

  void validate() const;
};

/// Pinhole intrinsics with two-term radial distortion.
struct CameraIntrinsics {
  double fx = 1.0, fy = 1.0;   // pixels
  double cx = 0.0, cy = 0.0;   // pixels
  double k1 = 0.0, k2 = 0.0;   // radial distortion
  int width = 0, height = 0;   // pixels

  double sensor_diagonal() const {
    return std::sqrt(static_cast<double>(width) * width +
                     static_cast<double>(height) * height);
  }

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
      throw ValidationError("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0)
      throw ValidationError("intrinsics: sensor size must be positive");
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
      throw ValidationError("intrinsics: principal point outside sensor");
  }
};

/// Rigid camera pose; rotation maps camera coordinates to world coordinates.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 center = Vec3::Zero();

  void validate() const {
    if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
      throw ValidationError("pose: rotation not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-9)
      throw ValidationError("pose: rotation determinant != +1");
  }
};

/// Reflection of the real camera through a mirror. The orientation keeps the
/// flipped handedness (det = -1); decode applies the image flip explicitly.
struct VirtualCamera {
  Vec3 center = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();
  int mirror_index = -1;

  void validate() const {
    if ((orientation.transpose() * orientation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
      throw ValidationError("virtual camera: orientation not orthonormal");
    if (std::abs(orientation.determinant() + 1.0) > 1e-9)
      throw ValidationError("virtual camera: determinant != -1");
  }
};

struct ConvexPolygon3D {
  std::vector<Vec3> vertices;

  bool empty() const { return vertices.size() < 3; }
};

/// Orthonormal 2D coordinate frame in a plane; e1 x e2 = normal.
struct PlaneFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 normal = Vec3::UnitZ();

  Vec2 to_plane(const Vec3& p) const {
    const Vec3 d = p - origin;
    return Vec2(d.dot(e1), d.dot(e2));
  }

  Vec3 to_world(const Vec2& uv) const {
    return origin + uv.x() * e1 + uv.y() * e2;
  }

  double height(const Vec3& p) const { return normal.dot(p - origin); }
};

// ---------------------------------------------------------------------------
// 2D convex polygon helpers
// ---------------------------------------------------------------------------

inline double polygon_area_2d(const std::vector<Vec2>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

inline void ensure_ccw_2d(std::vector<Vec2>& poly) {
  if (polygon_area_2d(poly) < 0.0) std::reverse(poly.begin(), poly.end());
}

inline bool is_convex_ccw_2d(const std::vector<Vec2>& poly, double eps = 1e-12) {
  const size_t n = poly.size();
  if (n < 3) return false;
  if (polygon_area_2d(poly) <= eps) return false;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[(i + 1) % n] - poly[i];
    const Vec2 b = poly[(i + 2) % n] - poly[(i + 1) % n];
    if (a.x() * b.y() - a.y() * b.x() < -eps) return false;
  }
  return true;
}

/// Inclusive point-in-convex-polygon test (CCW polygon).
inline bool point_in_convex_2d(const std::vector<Vec2>& poly, const Vec2& p,
                               double eps = 1e-9) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    if (e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x()) < -eps) return false;
  }
  return true;
}

/// Sutherland-Hodgman clip of convex subject polygon by convex CCW clip
/// polygon. Vertices closer than 1e-12 are merged. Empty result permitted.
inline std::vector<Vec2> clip_convex_2d(const std::vector<Vec2>& subject,
                                        const std::vector<Vec2>& clip) {
  std::vector<Vec2> out = subject;
  const size_t nc = clip.size();
  for (size_t i = 0; i < nc && !out.empty(); ++i) {
    const Vec2& a = clip[i];
    const Vec2& b = clip[(i + 1) % nc];
    const Vec2 e = b - a;
    std::vector<Vec2> in;
    in.swap(out);
    auto side = [&](const Vec2& p) {
      return e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x());
    };
    const size_t ns = in.size();
    for (size_t j = 0; j < ns; ++j) {
      const Vec2& p = in[j];
      const Vec2& q = in[(j + 1) % ns];
      const double sp = side(p);
      const double sq = side(q);
      if (sp >= -1e-12) out.push_back(p);
      if ((sp > 1e-12 && sq < -1e-12) || (sp < -1e-12 && sq > 1e-12)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  // merge near-duplicate vertices
  std::vector<Vec2> clean;
  for (const Vec2& p : out) {
    if (clean.empty() || (p - clean.back()).norm() > 1e-12) clean.push_back(p);
  }
  while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= 1e-12)
    clean.pop_back();
  if (clean.size() < 3) clean.clear();
  return clean;
}

/// Minimum distance between two convex polygons (0 when they intersect).
inline double convex_distance_2d(const std::vector<Vec2>& a,
                                 const std::vector<Vec2>& b) {
  if (a.empty() || b.empty()) return 0.0;
  if (!clip_convex_2d(a, b).empty()) return 0.0;

  auto point_segment = [](const Vec2& p, const Vec2& s0, const Vec2& s1) {
    const Vec2 d = s1 - s0;
    const double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? (p - s0).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (s0 + t * d)).norm();
  };

  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) {
      best = std::min(best, point_segment(a[i], b[j], b[(j + 1) % b.size()]));
      best = std::min(best, point_segment(b[j], a[i], a[(i + 1) % a.size()]));
    }
  return best;
}

/// Offset a convex CCW polygon inward by `margin` (edge-parallel offset,
/// implemented as successive half-plane clips). May return empty.
inline std::vector<Vec2> offset_convex_inward_2d(const std::vector<Vec2>& poly,
                                                 double margin) {
  if (poly.size() < 3 || margin <= 0.0) return poly;
  std::vector<Vec2> out = poly;
  const size_t n = poly.size();
  for (size_t i = 0; i < n && !out.empty(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    Vec2 e = b - a;
    const double len = e.norm();
    if (len <= 0.0) continue;
    e /= len;
    const Vec2 inward(-e.y(), e.x());  // left of edge for CCW
    // clip by the line through (a + margin*inward) with direction e
    const Vec2 a2 = a + margin * inward;
    const Vec2 b2 = b + margin * inward;
    std::vector<Vec2> clip_region = {a2, b2, b2 + 1e6 * inward, a2 + 1e6 * inward};
    out = clip_convex_2d(out, clip_region);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MirrorPlane validation and construction
// ---------------------------------------------------------------------------

inline void MirrorPlane::validate() const {
  if (std::abs(normal.norm() - 1.0) > 1e-9)
    throw ValidationError("mirror plane: normal is not unit length");
  if (std::abs(normal.dot(frame_origin) - offset) > 1e-9)
    throw ValidationError("mirror plane: frame origin not on plane");
  if (std::abs(frame_e1.norm() - 1.0) > 1e-9 || std::abs(frame_e2.norm() - 1.0) > 1e-9 ||
      std::abs(frame_e1.dot(frame_e2)) > 1e-9 || std::abs(frame_e1.dot(normal)) > 1e-9 ||
      std::abs(frame_e2.dot(normal)) > 1e-9)
    throw ValidationError("mirror plane: frame axes not orthonormal in-plane");
  if (extent.size() < 3 || !is_convex_ccw_2d(extent))
    throw ValidationError("mirror plane: extent not a CCW convex polygon");
}

/// Build a plane from a unit normal and a point on it. frame_e1 follows
/// e1_hint projected into the plane.
inline MirrorPlane make_mirror_plane(const Vec3& unit_normal, const Vec3& point_on_plane,
                                     std::vector<Vec2> extent,
                                     const Vec3& e1_hint = Vec3::UnitX()) {
  MirrorPlane m;
  m.normal = unit_normal.normalized();
  m.frame_origin = point_on_plane;
  m.offset = m.normal.dot(point_on_plane);
  Vec3 e1 = e1_hint - e1_hint.dot(m.normal) * m.normal;
  if (e1.norm() < 1e-9) {
    const Vec3 alt = std::abs(m.normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    e1 = alt - alt.dot(m.normal) * m.normal;
  }
  m.frame_e1 = e1.normalized();
  m.frame_e2 = m.normal.cross(m.frame_e1);
  m.extent = std::move(extent);
  ensure_ccw_2d(m.extent);
  return m;
}

/// Re-pose a plane by two tangent tilts (radians, about the base frame axes)
/// and a translation along the base normal, with optional in-plane vertex
/// displacements. This is the 3-DOF (+extent) parameterization shared by the
/// design optimizer and the calibration solver.
inline MirrorPlane perturb_plane(const MirrorPlane& base, double tilt1, double tilt2,
                                 double doffset,
                                 const std::vector<Vec2>* vertex_deltas = nullptr) {
  const Mat3 rot = (Eigen::AngleAxisd(tilt1, base.frame_e1) *
                    Eigen::AngleAxisd(tilt2, base.frame_e2)).toRotationMatrix();
  MirrorPlane out;
  out.normal = rot * base.normal;
  out.frame_e1 = rot * base.frame_e1;
  out.frame_e2 = rot * base.frame_e2;
  out.frame_origin = base.frame_origin + doffset * base.normal;
  out.offset = out.normal.dot(out.frame_origin);
  out.extent = base.extent;
  if (vertex_deltas) {
    if (vertex_deltas->size() != base.extent.size())
      throw ValidationError("perturb_plane: vertex delta count mismatch");
    for (size_t i = 0; i < out.extent.size(); ++i) out.extent[i] += (*vertex_deltas)[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reflection algebra
// ---------------------------------------------------------------------------

/// Householder reflection about the plane as a 4x4 homogeneous transform:
/// linear part I - 2 n n^T, translation 2 * offset * n. Involutive.
inline Mat4 reflection_matrix(const MirrorPlane& plane) {
  if (std::abs(plane.normal.norm() - 1.0) > 1e-9)
    throw ValidationError("reflection_matrix: normal is not unit length");
  Mat4 h = Mat4::Identity();
  h.topLeftCorner<3, 3>() = Mat3::Identity() - 2.0 * plane.normal * plane.normal.transpose();
  h.topRightCorner<3, 1>() = 2.0 * plane.offset * plane.normal;
  return h;
}

inline Vec3 reflect_point(const MirrorPlane& plane, const Vec3& p) {
  return p - 2.0 * (plane.normal.dot(p) - plane.offset) * plane.normal;
}

inline Vec3 reflect_direction(const MirrorPlane& plane, const Vec3& d) {
  return d - 2.0 * plane.normal.dot(d) * plane.normal;
}

inline VirtualCamera virtual_camera(const Pose& real, const MirrorPlane& plane,
                                    int mirror_index = -1) {
  const Mat3 m = Mat3::Identity() - 2.0 * plane.normal * plane.normal.transpose();
  VirtualCamera v;
  v.center = reflect_point(plane, real.center);
  v.orientation = m * real.rotation;
  v.mirror_index = mirror_index;
  return v;
}

// ---------------------------------------------------------------------------
// Projection model
// ---------------------------------------------------------------------------

/// Forward distortion in normalized coordinates, then pixel mapping.
inline Vec2 distort_to_pixel(const CameraIntrinsics& intr, const Vec2& normalized) {
  const double r2 = normalized.squaredNorm();
  const double d = 1.0 + r2 * (intr.k1 + r2 * intr.k2);
  return Vec2(intr.fx * normalized.x() * d + intr.cx,
              intr.fy * normalized.y() * d + intr.cy);
}

/// Pinhole projection with radial distortion. Returns nullopt for points at
/// or behind the camera plane.
inline std::optional<Vec2> try_project(const CameraIntrinsics& intr, const Pose& pose,
                                       const Vec3& point) {
  const Vec3 pc = pose.rotation.transpose() * (point - pose.center);
  if (pc.z() <= 1e-12) return std::nullopt;
  return distort_to_pixel(intr, Vec2(pc.x() / pc.z(), pc.y() / pc.z()));
}

inline Vec2 project(const CameraIntrinsics& intr, const Pose& pose, const Vec3& point) {
  const auto px = try_project(intr, pose, point);
  if (!px) throw GeometryError("project: point at or behind the camera plane");
  return *px;
}

struct UndistortOptions {
  double max_radius_factor = 1.5;  // of the sensor diagonal
  int max_iterations = 20;
  double tolerance = 1e-10;
};

/// Invert the radial distortion polynomial by damped Newton iteration on the
/// scalar radius. Returns undistorted normalized coordinates.
inline Vec2 undistort_pixel(const CameraIntrinsics& intr, const Vec2& pixel,
                            const UndistortOptions& opts = {}) {
  const Vec2 pp(intr.cx, intr.cy);
  if ((pixel - pp).norm() > opts.max_radius_factor * intr.sensor_diagonal())
    throw ValidationError("undistort_pixel: pixel too far outside the sensor");
  const Vec2 nd((pixel.x() - intr.cx) / intr.fx, (pixel.y() - intr.cy) / intr.fy);
  if (intr.k1 == 0.0 && intr.k2 == 0.0) return nd;
  const double rd = nd.norm();
  if (rd < 1e-15) return Vec2::Zero();

  double r = rd;
  double f = r * (1.0 + r * r * (intr.k1 + r * r * intr.k2)) - rd;
  bool converged = std::abs(f) < opts.tolerance;
  for (int it = 0; it < opts.max_iterations && !converged; ++it) {
    const double r2 = r * r;
    const double df = 1.0 + r2 * (3.0 * intr.k1 + 5.0 * intr.k2 * r2);
    if (std::abs(df) < 1e-14) break;
    double step = f / df;
    double rn = r - step;
    double fn = rn * (1.0 + rn * rn * (intr.k1 + rn * rn * intr.k2)) - rd;
    // damp until the residual shrinks
    for (int halves = 0; halves < 12 && (!std::isfinite(fn) || std::abs(fn) > std::abs(f)); ++halves) {
      step *= 0.5;
      rn = r - step;
      fn = rn * (1.0 + rn * rn * (intr.k1 + rn * rn * intr.k2)) - rd;
    }
    r = rn;
    f = fn;
    converged = std::abs(f) < opts.tolerance;
  }
  if (!converged)
    throw NumericError("undistort_pixel: Newton iteration did not converge");
  return nd * (r / rd);
}

// ---------------------------------------------------------------------------
// 3D polygon operations
// ---------------------------------------------------------------------------

/// Plane frame spanned by a (nearly) planar polygon, via the Newell normal.
inline PlaneFrame plane_frame_of(const ConvexPolygon3D& poly) {
  if (poly.vertices.size() < 3)
    throw GeometryError("plane_frame_of: polygon needs at least 3 vertices");
  Vec3 n = Vec3::Zero();
  for (size_t i = 0; i < poly.vertices.size(); ++i) {
    const Vec3& a = poly.vertices[i];
    const Vec3& b = poly.vertices[(i + 1) % poly.vertices.size()];
    n += Vec3(
        (a.y() - b.y()) * (a.z() + b.z()),
        (a.z() - b.z()) * (a.x() + b.x()),
        (a.x() - b.x()) * (a.y() + b.y()));
  }
  if (n.norm() < 1e-18) throw GeometryError("plane_frame_of: degenerate polygon");
  PlaneFrame f;
  f.normal = n.normalized();
  f.origin = poly.vertices[0];
  Vec3 e1 = poly.vertices[1] - poly.vertices[0];
  e1 -= e1.dot(f.normal) * f.normal;
  f.e1 = e1.normalized();
  f.e2 = f.normal.cross(f.e1);
  return f;
}

inline std::vector<Vec2> to_plane_2d(const ConvexPolygon3D& poly, const PlaneFrame& frame,
                                     double coplanar_tol = 1e-7) {
  std::vector<Vec2> out;
  out.reserve(poly.vertices.size());
  for (const Vec3& v : poly.vertices) {
    if (std::abs(frame.height(v)) > coplanar_tol)
      throw GeometryError("polygon vertex off the shared plane");
    out.push_back(frame.to_plane(v));
  }
  return out;
}

inline ConvexPolygon3D from_plane_2d(const std::vector<Vec2>& poly, const PlaneFrame& frame) {
  ConvexPolygon3D out;
  out.vertices.reserve(poly.size());
  for (const Vec2& v : poly) out.vertices.push_back(frame.to_world(v));
  return out;
}

/// Shoelace area of a planar polygon, evaluated in its plane. Non-negative;
/// degenerate inputs give 0.
inline double polygon_area(const ConvexPolygon3D& poly) {
  if (poly.vertices.size() < 3) return 0.0;
  Vec3 n = Vec3::Zero();
  for (size_t i = 0; i < poly.vertices.size(); ++i) {
    const Vec3& a = poly.vertices[i];
    const Vec3& b = poly.vertices[(i + 1) % poly.vertices.size()];
    n += a.cross(b);
  }
  return 0.5 * n.norm();
}

/// Sutherland-Hodgman intersection of two coplanar convex polygons.
inline ConvexPolygon3D clip_convex(const ConvexPolygon3D& a, const ConvexPolygon3D& b,
                                   const PlaneFrame& shared_plane) {
  std::vector<Vec2> pa = to_plane_2d(a, shared_plane);
  std::vector<Vec2> pb = to_plane_2d(b, shared_plane);
  ensure_ccw_2d(pa);
  ensure_ccw_2d(pb);
  return from_plane_2d(clip_convex_2d(pa, pb), shared_plane);
}

// ---------------------------------------------------------------------------
// Ray and segment queries
// ---------------------------------------------------------------------------

/// Parameter t with origin + t*dir on the plane; nullopt when parallel.
inline std::optional<double> ray_plane_t(const MirrorPlane& plane, const Vec3& origin,
                                         const Vec3& dir) {
  const double denom = plane.normal.dot(dir);
  if (std::abs(denom) < 1e-14) return std::nullopt;
  return (plane.offset - plane.normal.dot(origin)) / denom;
}

/// Does the open segment (a, b) cross the mirror's extent? Endpoints are
/// excluded via the relative epsilon so rays rooted on a mirror do not
/// self-intersect.
inline bool segment_crosses_extent(const MirrorPlane& plane, const Vec3& a, const Vec3& b,
                                   double t_eps = 1e-9) {
  const auto t = ray_plane_t(plane, a, b - a);
  if (!t || *t <= t_eps || *t >= 1.0 - t_eps) return false;
  const Vec3 hit = a + *t * (b - a);
  return point_in_convex_2d(plane.extent, plane.to_plane(hit));
}

// ---------------------------------------------------------------------------
// Rigid transforms of domain values (used by frame-invariance checks)
// ---------------------------------------------------------------------------

inline Vec3 apply_rigid(const Pose& t, const Vec3& p) { return t.rotation * p + t.center; }

inline Pose apply_rigid(const Pose& t, const Pose& p) {
  Pose out;
  out.rotation = t.rotation * p.rotation;
  out.center = apply_rigid(t, p.center);
  return out;
}

inline MirrorPlane apply_rigid(const Pose& t, const MirrorPlane& m) {
  MirrorPlane out = m;
  out.normal = t.rotation * m.normal;
  out.frame_e1 = t.rotation * m.frame_e1;
  out.frame_e2 = t.rotation * m.frame_e2;
  out.frame_origin = apply_rigid(t, m.frame_origin);
  out.offset = out.normal.dot(out.frame_origin);
  return out;
}

}  // namespace mirrorfield
