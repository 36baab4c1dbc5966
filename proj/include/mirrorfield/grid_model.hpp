// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/geometry.hpp"

#include <vector>

namespace mirrorfield {

/// One view of the rectified parallel-camera grid.
struct GridView {
  int s = 0;  // column index
  int t = 0;  // row index
  Vec3 center = Vec3::Zero();          // actual virtual camera center
  Vec3 residual = Vec3::Zero();        // center - fitted grid position (reported,
                                       // not compensated)
  Mat3 rotation_to_target = Mat3::Identity();  // proper rotation; identity for
                                               // the central view
};

/// The nearest grid of parallel cameras: a rectangular lattice of translated,
/// identically oriented virtual views. Raw mirror views carry flipped
/// handedness; the stored per-view rotation relates the flip-corrected view
/// frame to the shared target frame, and decode composes it with the u-axis
/// flip when warping.
struct RectifiedGridModel {
  int grid_rows = 0;  // T
  int grid_cols = 0;  // S
  std::vector<GridView> views;  // row-major, index = t * grid_cols + s
  Vec3 origin = Vec3::Zero();
  Vec3 x_step = Vec3::Zero();
  Vec3 y_step = Vec3::Zero();
  Mat3 target_rotation = Mat3::Identity();  // world orientation of every
                                            // rectified view (det +1)
  CameraIntrinsics target_intrinsics;       // distortion-free; size and
                                            // principal point finalized at
                                            // decode time
  char flip_axis = 'u';

  int central_s() const { return grid_cols / 2; }
  int central_t() const { return grid_rows / 2; }
  int central_index() const { return central_t() * grid_cols + central_s(); }

  const GridView& view(int s, int t) const {
    return views.at(static_cast<size_t>(t) * grid_cols + s);
  }

  /// Handedness flip as a matrix (mirror images are left-right reversed).
  static Mat3 flip_matrix() {
    Mat3 f = Mat3::Identity();
    f(0, 0) = -1.0;
    return f;
  }
};

}  // namespace mirrorfield
