// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/design.hpp"
#include "mirrorfield/simulate.hpp"

namespace mirrorfield {

/// Stand-in for the common 1080p webcam class this rig was built around:
/// 1920x1080, 70 degree horizontal FOV, mild barrel distortion.
inline CameraIntrinsics default_intrinsics() {
  CameraIntrinsics c;
  c.width = 1920;
  c.height = 1080;
  c.fx = 960.0 / std::tan(deg2rad(35.0));
  c.fy = c.fx;
  c.cx = 960.0;
  c.cy = 540.0;
  c.k1 = -0.1;
  c.k2 = 0.02;
  return c;
}

/// Camera on the array axis at the parabola focal point, looking down at the
/// mirrors (camera +z maps to world -z). The mirrors then reflect its rays
/// upward past the camera into the scene volume above.
inline Pose default_camera_pose(double focal_hint = 0.15) {
  Pose p;
  p.rotation << 1.0, 0.0, 0.0,
                0.0, -1.0, 0.0,
                0.0, 0.0, -1.0;
  p.center = Vec3(0.0, 0.0, focal_hint);
  return p;
}

/// Default 3x3 design: 9 cm aperture, evaluation depths 0.3 and 0.5 m,
/// equal grid/overlap weighting, 3 mm manufacturing gap.
inline design::DesignSpec default_design_spec() {
  design::DesignSpec s;
  s.rows = 3;
  s.cols = 3;
  s.scale = 0.09;
  s.focal_hint = 0.15;
  s.eval_depths = {0.3, 0.5};
  s.alpha = 0.5;
  s.min_gap = 0.003;
  s.camera = default_intrinsics();
  s.camera_pose = default_camera_pose(s.focal_hint);
  return s;
}

}  // namespace mirrorfield
