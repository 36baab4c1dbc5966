// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/design.hpp"
#include "mirrorfield/image.hpp"

#include <optional>
#include <vector>

namespace mirrorfield::sim {

using design::DesignState;

// ---------------------------------------------------------------------------
// Scene
// ---------------------------------------------------------------------------

/// Checkerboard in its own frame: the board lies in the local z = 0 plane,
/// centered on the frame origin. rows x cols counts the inner corners; each
/// inner corner is surrounded by four squares, so the painted area spans
/// (cols+1) x (rows+1) squares.
struct Checkerboard {
  Pose pose;
  int rows = 6;
  int cols = 8;
  double square_size = 0.02;  // meters

  static constexpr double kLightShade = 0.9;
  static constexpr double kDarkShade = 0.12;

  void validate() const {
    if (rows < 1 || cols < 1) throw ValidationError("checkerboard: needs >=1 corners per axis");
    if (!(square_size > 0.0)) throw ValidationError("checkerboard: square_size must be positive");
    pose.validate();
  }

  Vec3 corner_local(int r, int c) const {
    return Vec3((c - (cols - 1) / 2.0) * square_size,
                (r - (rows - 1) / 2.0) * square_size, 0.0);
  }

  Vec3 corner_world(int r, int c) const {
    return apply_rigid(pose, corner_local(r, c));
  }

  double half_extent_x() const { return (cols + 1) * square_size / 2.0; }
  double half_extent_y() const { return (rows + 1) * square_size / 2.0; }

  /// Shade at a local in-plane point, or nullopt outside the painted area.
  std::optional<double> shade_local(double x, double y) const {
    if (std::abs(x) > half_extent_x() || std::abs(y) > half_extent_y())
      return std::nullopt;
    const int i = static_cast<int>(std::floor(x / square_size + (cols + 1) / 2.0));
    const int j = static_cast<int>(std::floor(y / square_size + (rows + 1) / 2.0));
    return ((i + j) % 2 + 2) % 2 == 0 ? kLightShade : kDarkShade;
  }
};

struct PointTarget {
  Vec3 position = Vec3::Zero();
  double radius = 0.002;   // meters
  double intensity = 1.0;  // in [0,1]

  void validate() const {
    if (!(radius > 0.0)) throw ValidationError("point target: radius must be positive");
    if (intensity < 0.0 || intensity > 1.0)
      throw ValidationError("point target: intensity outside [0,1]");
  }
};

struct Scene {
  std::vector<Checkerboard> checkerboards;
  std::vector<PointTarget> point_targets;
  double background_intensity = 0.05;

  void validate() const {
    if (background_intensity < 0.0 || background_intensity > 1.0)
      throw ValidationError("scene: background intensity outside [0,1]");
    for (const auto& b : checkerboards) b.validate();
    for (const auto& t : point_targets) t.validate();
  }
};

using RawImage = GrayImage;

struct SubImagePolygon {
  int mirror_index = -1;
  std::vector<Vec2> polygon;  // raw-image pixel coordinates, CCW
};

struct SubImageMap {
  std::vector<SubImagePolygon> entries;
  std::vector<int> excluded;  // mirrors that fell outside the image
};

// ---------------------------------------------------------------------------
// Ray tracing
// ---------------------------------------------------------------------------

namespace detail {

struct SceneHit {
  double t = std::numeric_limits<double>::infinity();
  double intensity = 0.0;
};

inline void hit_checkerboard(const Checkerboard& b, const Vec3& origin, const Vec3& dir,
                             SceneHit& best) {
  // board plane: local z = 0
  const Vec3 n = b.pose.rotation.col(2);
  const double denom = n.dot(dir);
  if (std::abs(denom) < 1e-14) return;
  const double t = n.dot(b.pose.center - origin) / denom;
  if (t <= 1e-9 || t >= best.t) return;
  const Vec3 hit = origin + t * dir;
  const Vec3 local = b.pose.rotation.transpose() * (hit - b.pose.center);
  const auto shade = b.shade_local(local.x(), local.y());
  if (!shade) return;
  best.t = t;
  best.intensity = *shade;
}

inline void hit_target(const PointTarget& p, const Vec3& origin, const Vec3& dir,
                       SceneHit& best) {
  const Vec3 oc = origin - p.position;
  const double bq = oc.dot(dir);
  const double cq = oc.squaredNorm() - p.radius * p.radius;
  const double disc = bq * bq - cq;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  double t = -bq - sq;
  if (t <= 1e-9) t = -bq + sq;
  if (t <= 1e-9 || t >= best.t) return;
  best.t = t;
  best.intensity = p.intensity;
}

inline double trace_scene(const Scene& scene, const Vec3& origin, const Vec3& dir) {
  SceneHit best;
  for (const auto& b : scene.checkerboards) hit_checkerboard(b, origin, dir, best);
  for (const auto& p : scene.point_targets) hit_target(p, origin, dir, best);
  return std::isfinite(best.t) ? best.intensity : scene.background_intensity;
}

}  // namespace detail

/// Trace one (possibly fractional) pixel: undistort, cast the camera ray,
/// reflect off the nearest mirror-extent hit, then shade against the scene.
/// Misses return the background intensity; no direct-view path is modeled.
inline double trace_pixel(const DesignState& state, const Scene& scene, const Vec2& pixel) {
  const CameraIntrinsics& intr = state.spec.camera;
  Vec2 norm;
  try {
    norm = undistort_pixel(intr, pixel);
  } catch (const Error&) {
    return scene.background_intensity;
  }
  const Pose& pose = state.spec.camera_pose;
  const Vec3 dir = (pose.rotation * Vec3(norm.x(), norm.y(), 1.0)).normalized();
  const Vec3 origin = pose.center;

  double best_t = std::numeric_limits<double>::infinity();
  const MirrorPlane* best_mirror = nullptr;
  for (const auto& m : state.mirrors) {
    const auto t = ray_plane_t(m, origin, dir);
    if (!t || *t <= 1e-9 || *t >= best_t) continue;
    const Vec3 hit = origin + *t * dir;
    if (point_in_convex_2d(m.extent, m.to_plane(hit))) {
      best_t = *t;
      best_mirror = &m;
    }
  }
  if (!best_mirror) return scene.background_intensity;
  const Vec3 hit = origin + best_t * dir;
  const Vec3 refl = reflect_direction(*best_mirror, dir);
  return detail::trace_scene(scene, hit, refl);
}

/// Supersampled render; deterministic for a fixed seed regardless of
/// evaluation order (per-pixel sample offsets are keyed on the pixel index).
inline RawImage render(const DesignState& state, const Scene& scene, int supersample,
                       std::uint64_t seed = 0) {
  if (supersample < 1) throw ValidationError("render: supersample must be >= 1");
  const CameraIntrinsics& intr = state.spec.camera;
  if (intr.width <= 0 || intr.height <= 0) throw ValidationError("render: zero-size image");
  RawImage img(intr.width, intr.height);

  const int ss = supersample;
  const double inv = 1.0 / ss;
  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      const std::uint64_t pixel_key = static_cast<std::uint64_t>(y) * intr.width + x;
      double acc = 0.0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          Rng rng = Rng::keyed(seed, pixel_key, static_cast<std::uint64_t>(sy) * ss + sx);
          const double jx = ss == 1 ? 0.5 : rng.uniform();
          const double jy = ss == 1 ? 0.5 : rng.uniform();
          const Vec2 p(x - 0.5 + (sx + jx) * inv, y - 0.5 + (sy + jy) * inv);
          acc += trace_pixel(state, scene, p);
        }
      }
      img.at(x, y) = acc / (ss * ss);
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// Analytic forward model
// ---------------------------------------------------------------------------

/// Project a world point into the raw image as seen via one mirror: the
/// reflected point H(p) is projected through the real camera, which is
/// optically identical to viewing p via the mirror. Returns nullopt when the
/// camera->H(p) ray misses the mirror extent or the point is behind the
/// camera.
inline std::optional<Vec2> try_project_via_mirror(const CameraIntrinsics& intr,
                                                  const Pose& pose, const MirrorPlane& m,
                                                  const Vec3& point) {
  const Vec3 reflected = reflect_point(m, point);
  const Vec3 cam = pose.center;
  // the viewing ray must cross the mirror extent between camera and H(p)
  const auto t = ray_plane_t(m, cam, reflected - cam);
  if (!t || *t <= 1e-9 || *t >= 1.0) return std::nullopt;
  const Vec3 hit = cam + *t * (reflected - cam);
  if (!point_in_convex_2d(m.extent, m.to_plane(hit))) return std::nullopt;
  return try_project(intr, pose, reflected);
}

inline std::optional<Vec2> try_project_via_mirror(const DesignState& state, int mirror_index,
                                                  const Vec3& point) {
  return try_project_via_mirror(state.spec.camera, state.spec.camera_pose,
                                state.mirrors.at(static_cast<size_t>(mirror_index)), point);
}

inline Vec2 project_via_mirror(const DesignState& state, int mirror_index, const Vec3& point) {
  const auto px = try_project_via_mirror(state, mirror_index, point);
  if (!px)
    throw GeometryError("project_via_mirror: point not visible via mirror " +
                        std::to_string(mirror_index));
  return *px;
}

// ---------------------------------------------------------------------------
// Synthetic observations
// ---------------------------------------------------------------------------

struct Observation {
  int mirror_index = -1;
  int board = -1;
  int row = -1;
  int col = -1;
  Vec2 pixel = Vec2::Zero();
};

struct ObservationSet {
  std::vector<Observation> items;
  bool empty_warning = false;  // set when no corner was visible at all
};

/// All visible checkerboard-corner projections via all mirrors, with
/// isotropic Gaussian pixel noise of std noise_px. Deterministic per seed.
inline ObservationSet synth_observations(const DesignState& state, const Scene& scene,
                                         double noise_px, std::uint64_t seed) {
  if (scene.checkerboards.empty())
    throw ValidationError("synth_observations: scene has no checkerboard");
  ObservationSet out;
  const CameraIntrinsics& intr = state.spec.camera;
  const int n_mirrors = static_cast<int>(state.mirrors.size());
  std::uint64_t draw = 0;
  for (int b = 0; b < static_cast<int>(scene.checkerboards.size()); ++b) {
    const Checkerboard& board = scene.checkerboards[static_cast<size_t>(b)];
    for (int r = 0; r < board.rows; ++r) {
      for (int c = 0; c < board.cols; ++c) {
        const Vec3 world = board.corner_world(r, c);
        for (int m = 0; m < n_mirrors; ++m) {
          const auto px = try_project_via_mirror(state, m, world);
          if (!px) continue;
          if (px->x() < 0.0 || px->x() > intr.width - 1 || px->y() < 0.0 ||
              px->y() > intr.height - 1)
            continue;
          Observation obs;
          obs.mirror_index = m;
          obs.board = b;
          obs.row = r;
          obs.col = c;
          obs.pixel = *px;
          if (noise_px > 0.0) {
            Rng rng = Rng::keyed(seed, draw);
            obs.pixel.x() += noise_px * rng.gaussian();
            obs.pixel.y() += noise_px * rng.gaussian();
          }
          ++draw;
          out.items.push_back(obs);
        }
      }
    }
  }
  out.empty_warning = out.items.empty();
  return out;
}

// ---------------------------------------------------------------------------
// Sub-image segmentation
// ---------------------------------------------------------------------------

/// Project each mirror's extent into raw-image pixel polygons (distortion
/// applied), offset inward by margin_px, and clip to the image bounds.
inline SubImageMap subimage_map(const DesignState& state, double margin_px = 2.0) {
  SubImageMap map;
  const CameraIntrinsics& intr = state.spec.camera;
  const std::vector<Vec2> bounds = {
      {0.0, 0.0},
      {static_cast<double>(intr.width - 1), 0.0},
      {static_cast<double>(intr.width - 1), static_cast<double>(intr.height - 1)},
      {0.0, static_cast<double>(intr.height - 1)}};
  for (int m = 0; m < static_cast<int>(state.mirrors.size()); ++m) {
    const MirrorPlane& mirror = state.mirrors[static_cast<size_t>(m)];
    std::vector<Vec2> poly;
    bool ok = true;
    for (const Vec2& uv : mirror.extent) {
      const auto px = try_project(intr, state.spec.camera_pose, mirror.to_world(uv));
      if (!px) {
        ok = false;
        break;
      }
      poly.push_back(*px);
    }
    if (!ok) {
      map.excluded.push_back(m);
      continue;
    }
    ensure_ccw_2d(poly);
    if (margin_px > 0.0) poly = offset_convex_inward_2d(poly, margin_px);
    if (!poly.empty()) poly = clip_convex_2d(poly, bounds);
    if (poly.size() < 3) {
      map.excluded.push_back(m);
      continue;
    }
    map.entries.push_back({m, std::move(poly)});
  }
  return map;
}

}  // namespace mirrorfield::sim
