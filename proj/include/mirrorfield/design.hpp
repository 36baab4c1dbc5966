// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/geometry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mirrorfield::design {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct DesignSpec {
  int rows = 3;
  int cols = 3;
  double scale = 0.09;        // meters, aperture width of the array
  double focal_hint = 0.15;   // meters, parabola focal length for init
  std::vector<double> eval_depths = {0.3, 0.5};
  double alpha = 0.5;         // grid-vs-overlap weight in [0,1]
  double min_gap = 0.003;     // meters
  CameraIntrinsics camera;
  Pose camera_pose;

  void validate() const {
    if (rows < 1 || cols < 1 || rows * cols < 2)
      throw ValidationError("design spec: rows*cols must be >= 2");
    if (!(scale > 0.0)) throw ValidationError("design spec: scale must be positive");
    if (!(focal_hint > 0.0)) throw ValidationError("design spec: focal_hint must be positive");
    if (eval_depths.empty()) throw ValidationError("design spec: eval_depths empty");
    for (size_t i = 0; i < eval_depths.size(); ++i) {
      if (!(eval_depths[i] > 0.0))
        throw ValidationError("design spec: eval depths must be positive");
      if (i > 0 && !(eval_depths[i] > eval_depths[i - 1]))
        throw ValidationError("design spec: eval depths must be strictly increasing");
    }
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("design spec: alpha outside [0,1]");
    if (min_gap < 0.0) throw ValidationError("design spec: min_gap must be >= 0");
    camera.validate();
    camera_pose.validate();
  }
};

struct DesignState {
  DesignSpec spec;
  std::vector<MirrorPlane> mirrors;  // row-major rows x cols
  // Evaluation-plane anchor, frozen at initialization so the cost landscape
  // stays fixed while mirrors move.
  Vec3 eval_origin = Vec3::Zero();   // initial central virtual camera center
  Vec3 eval_axis = Vec3::UnitZ();    // initial central virtual optical axis

  int central_index() const { return (spec.rows / 2) * spec.cols + (spec.cols / 2); }

  void validate() const {
    spec.validate();
    if (static_cast<int>(mirrors.size()) != spec.rows * spec.cols)
      throw ValidationError("design state: mirror count != rows*cols");
    for (const auto& m : mirrors) {
      m.validate();
      if (m.extent.size() != 4)
        throw ValidationError("design state: extents must be quadrilaterals");
    }
  }
};

struct GridFit {
  double error = 0.0;  // mean squared residual, m^2
  Vec3 origin = Vec3::Zero();
  Vec3 x_step = Vec3::Zero();  // per column-index step
  Vec3 y_step = Vec3::Zero();  // per row-index step
};

struct ConstraintViolation {
  enum class Kind { Occlusion, Spacing, Degenerate };
  Kind kind = Kind::Occlusion;
  int mirror_a = -1;
  int mirror_b = -1;   // -1 when not pairwise
  double magnitude = 0.0;
};

struct DepthOverlap {
  double depth = 0.0;
  double area = 0.0;
  ConvexPolygon3D polygon;
};

struct DesignReport {
  double cost_total = 0.0;
  double cost_grid = 0.0;
  double cost_overlap = 0.0;
  std::vector<DepthOverlap> overlap_area_per_depth;
  std::vector<Vec3> virtual_centers;
  GridFit fitted_grid;
  std::vector<ConstraintViolation> constraint_violations;
};

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

/// Tile the base-plane square [-scale/2, scale/2]^2 rows x cols, shrink each
/// cell by min_gap/2 per side, and lift each cell onto the tangent plane of
/// the paraboloid z = (x^2 + y^2) / (4 focal_hint) at the cell center.
inline DesignState init_faceted_parabola(const DesignSpec& spec) {
  spec.validate();
  const double cell_x = spec.scale / spec.cols;
  const double cell_y = spec.scale / spec.rows;
  if (spec.min_gap >= cell_x || spec.min_gap >= cell_y)
    throw ValidationError("init_faceted_parabola: min_gap >= cell size is infeasible");

  const double f4 = 4.0 * spec.focal_hint;
  DesignState state;
  state.spec = spec;
  state.mirrors.reserve(static_cast<size_t>(spec.rows) * spec.cols);

  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const double xc = -spec.scale / 2.0 + (c + 0.5) * cell_x;
      const double yc = -spec.scale / 2.0 + (r + 0.5) * cell_y;
      const double zc = (xc * xc + yc * yc) / f4;
      // tangent plane of the paraboloid at (xc, yc)
      const double gx = xc / (2.0 * spec.focal_hint);
      const double gy = yc / (2.0 * spec.focal_hint);
      const Vec3 normal = Vec3(-gx, -gy, 1.0).normalized();
      const Vec3 anchor(xc, yc, zc);

      const double hx = (cell_x - spec.min_gap) / 2.0;
      const double hy = (cell_y - spec.min_gap) / 2.0;
      MirrorPlane plane = make_mirror_plane(normal, anchor, {}, Vec3::UnitX());
      std::vector<Vec2> extent;
      extent.reserve(4);
      const double corners[4][2] = {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
      for (const auto& uv : corners) {
        // project the base-plane corner vertically onto the tangent plane
        const double x = xc + uv[0];
        const double y = yc + uv[1];
        const double z = zc + uv[0] * gx + uv[1] * gy;
        extent.push_back(plane.to_plane(Vec3(x, y, z)));
      }
      ensure_ccw_2d(extent);
      plane.extent = std::move(extent);
      state.mirrors.push_back(std::move(plane));
    }
  }

  const VirtualCamera central =
      virtual_camera(spec.camera_pose, state.mirrors[state.central_index()]);
  state.eval_origin = central.center;
  state.eval_axis = central.orientation.col(2);
  state.validate();
  return state;
}

// ---------------------------------------------------------------------------
// Field-of-view footprints and overlap
// ---------------------------------------------------------------------------

/// Frame of the evaluation plane at the given depth along the frozen axis.
inline PlaneFrame eval_plane_frame(const DesignState& state, double depth) {
  PlaneFrame f;
  f.normal = state.eval_axis;
  f.origin = state.eval_origin + depth * state.eval_axis;
  Vec3 e1 = Vec3::UnitX() - Vec3::UnitX().dot(f.normal) * f.normal;
  if (e1.norm() < 1e-9) {
    e1 = Vec3::UnitY() - Vec3::UnitY().dot(f.normal) * f.normal;
  }
  f.e1 = e1.normalized();
  f.e2 = f.normal.cross(f.e1);
  return f;
}

/// Reflect the rays through the mirror's extent vertices and intersect them
/// with the evaluation plane.
inline ConvexPolygon3D fov_footprint(const DesignState& state, int mirror_index,
                                     double depth) {
  if (!(depth > 0.0)) throw ValidationError("fov_footprint: depth must be positive");
  const MirrorPlane& mirror = state.mirrors.at(static_cast<size_t>(mirror_index));
  const Vec3 cam = state.spec.camera_pose.center;
  const PlaneFrame eval = eval_plane_frame(state, depth);

  std::vector<Vec2> pts2d;
  pts2d.reserve(mirror.extent.size());
  for (const Vec2& uv : mirror.extent) {
    const Vec3 v = mirror.to_world(uv);
    const Vec3 dir = reflect_direction(mirror, (v - cam).normalized());
    const double denom = eval.normal.dot(dir);
    if (std::abs(denom) < 1e-12)
      throw GeometryError("fov_footprint: reflected ray parallel to evaluation plane");
    const double t = eval.normal.dot(eval.origin - v) / denom;
    if (t <= 0.0)
      throw GeometryError("fov_footprint: reflected ray leaves the evaluation plane behind");
    pts2d.push_back(eval.to_plane(v + t * dir));
  }
  ensure_ccw_2d(pts2d);
  return from_plane_2d(pts2d, eval);
}

struct OverlapResult {
  ConvexPolygon3D polygon;
  double area = 0.0;
};

/// Intersection of every mirror's footprint at the given depth.
inline OverlapResult full_overlap(const DesignState& state, double depth) {
  const PlaneFrame eval = eval_plane_frame(state, depth);
  std::vector<Vec2> acc;
  for (size_t m = 0; m < state.mirrors.size(); ++m) {
    ConvexPolygon3D fp;
    try {
      fp = fov_footprint(state, static_cast<int>(m), depth);
    } catch (const GeometryError& e) {
      throw GeometryError("mirror " + std::to_string(m) + ": " + e.what());
    }
    std::vector<Vec2> f2 = to_plane_2d(fp, eval);
    ensure_ccw_2d(f2);
    if (m == 0) {
      acc = std::move(f2);
    } else {
      acc = clip_convex_2d(acc, f2);
      if (acc.empty()) break;
    }
  }
  OverlapResult out;
  if (!acc.empty()) {
    out.polygon = from_plane_2d(acc, eval);
    out.area = polygon_area_2d(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rectangular grid fit
// ---------------------------------------------------------------------------

/// Least-squares fit of row-major centers to origin + col*x_step + row*y_step.
/// Nine unknowns; exact on affine grids.
inline GridFit grid_fit_error(const std::vector<Vec3>& centers, int rows, int cols) {
  const int n = rows * cols;
  if (static_cast<int>(centers.size()) != n)
    throw ValidationError("grid_fit_error: centers.size() != rows*cols");

  Eigen::MatrixXd a(n, 3);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int k = r * cols + c;
      a(k, 0) = 1.0;
      a(k, 1) = c;
      a(k, 2) = r;
    }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3)
    throw NumericError("grid_fit_error: underdetermined (need 3 non-collinear index rows)");

  Eigen::MatrixXd rhs(n, 3);
  for (int k = 0; k < n; ++k) rhs.row(k) = centers[static_cast<size_t>(k)].transpose();
  const Eigen::MatrixXd sol = qr.solve(rhs);  // 3x3: rows = origin, x_step, y_step

  GridFit fit;
  fit.origin = sol.row(0).transpose();
  fit.x_step = sol.row(1).transpose();
  fit.y_step = sol.row(2).transpose();
  const Eigen::MatrixXd resid = rhs - a * sol;
  fit.error = resid.squaredNorm() / n;
  return fit;
}

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

struct ConstraintOptions {
  // Sample points per mirror for the occlusion test: 4 vertices, 4 edge
  // midpoints, and the centroid.
  bool include_midpoints = true;
  double spacing_slack = 1e-12;  // boundary-inclusive spacing comparison
  double t_eps = 1e-9;
};

inline std::vector<Vec3> occlusion_samples(const MirrorPlane& m, bool midpoints) {
  std::vector<Vec3> pts;
  const size_t n = m.extent.size();
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& v : m.extent) centroid += v;
  centroid /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    pts.push_back(m.to_world(m.extent[i]));
    if (midpoints) pts.push_back(m.to_world(0.5 * (m.extent[i] + m.extent[(i + 1) % n])));
  }
  pts.push_back(m.to_world(centroid));
  return pts;
}

/// Occlusion: sample rays of each mirror (incident camera->mirror and
/// reflected mirror->max eval depth segments) against every other extent.
/// Spacing: min distance between base-plane projections of adjacent extents.
inline std::vector<ConstraintViolation> check_constraints(
    const DesignState& state, const ConstraintOptions& opts = {}) {
  std::vector<ConstraintViolation> out;
  const int rows = state.spec.rows;
  const int cols = state.spec.cols;
  const int n = rows * cols;
  const Vec3 cam = state.spec.camera_pose.center;
  const double max_depth = state.spec.eval_depths.back();
  const PlaneFrame far_plane = eval_plane_frame(state, max_depth);

  // degenerate extents
  for (int i = 0; i < n; ++i) {
    const auto& ext = state.mirrors[static_cast<size_t>(i)].extent;
    if (!is_convex_ccw_2d(ext)) {
      ConstraintViolation v;
      v.kind = ConstraintViolation::Kind::Degenerate;
      v.mirror_a = i;
      // always well above any feasibility tolerance
      v.magnitude = 1e-3 + std::max(0.0, -polygon_area_2d(ext));
      out.push_back(v);
    }
  }

  // occlusion
  for (int i = 0; i < n; ++i) {
    const MirrorPlane& mi = state.mirrors[static_cast<size_t>(i)];
    if (!is_convex_ccw_2d(mi.extent)) continue;
    const auto samples = occlusion_samples(mi, opts.include_midpoints);
    std::vector<int> blocked(static_cast<size_t>(n), 0);
    for (const Vec3& p : samples) {
      const Vec3 dir = reflect_direction(mi, (p - cam).normalized());
      // reflected segment endpoint: intersection with the deepest eval plane
      Vec3 far_end;
      const double denom = far_plane.normal.dot(dir);
      const double tq = std::abs(denom) > 1e-12
                            ? far_plane.normal.dot(far_plane.origin - p) / denom
                            : -1.0;
      far_end = tq > 0.0 ? Vec3(p + tq * dir) : Vec3(p + 3.0 * max_depth * dir);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const MirrorPlane& mj = state.mirrors[static_cast<size_t>(j)];
        if (segment_crosses_extent(mj, cam, p, opts.t_eps) ||
            segment_crosses_extent(mj, p, far_end, opts.t_eps))
          ++blocked[static_cast<size_t>(j)];
      }
    }
    for (int j = 0; j < n; ++j) {
      if (blocked[static_cast<size_t>(j)] > 0) {
        ConstraintViolation v;
        v.kind = ConstraintViolation::Kind::Occlusion;
        v.mirror_a = i;
        v.mirror_b = j;
        v.magnitude = static_cast<double>(blocked[static_cast<size_t>(j)]) /
                      static_cast<double>(samples.size());
        out.push_back(v);
      }
    }
  }

  // spacing between 4-adjacent extents, projected onto the base plane
  auto base_projection = [](const MirrorPlane& m) {
    std::vector<Vec2> poly;
    poly.reserve(m.extent.size());
    for (const Vec2& uv : m.extent) {
      const Vec3 w = m.to_world(uv);
      poly.emplace_back(w.x(), w.y());
    }
    ensure_ccw_2d(poly);
    return poly;
  };
  std::vector<std::vector<Vec2>> proj(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) proj[static_cast<size_t>(i)] = base_projection(state.mirrors[static_cast<size_t>(i)]);

  auto spacing_pair = [&](int a, int b) {
    const double d = convex_distance_2d(proj[static_cast<size_t>(a)], proj[static_cast<size_t>(b)]);
    if (state.spec.min_gap - d > opts.spacing_slack) {
      ConstraintViolation v;
      v.kind = ConstraintViolation::Kind::Spacing;
      v.mirror_a = a;
      v.mirror_b = b;
      v.magnitude = state.spec.min_gap - d;
      out.push_back(v);
    }
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int k = r * cols + c;
      if (c + 1 < cols) spacing_pair(k, k + 1);
      if (r + 1 < rows) spacing_pair(k, k + cols);
    }
  return out;
}

inline double total_violation(const std::vector<ConstraintViolation>& v) {
  double s = 0.0;
  for (const auto& x : v) s += x.magnitude;
  return s;
}

inline double max_violation(const std::vector<ConstraintViolation>& v) {
  double s = 0.0;
  for (const auto& x : v) s = std::max(s, x.magnitude);
  return s;
}

// ---------------------------------------------------------------------------
// Cost
// ---------------------------------------------------------------------------

/// cost_grid = grid fit error / scale^2; cost_overlap = mean over depths of
/// the overlap deficit 1 - area/central_footprint_area, clamped to [0,1].
/// Constraint violations are listed but not folded into cost_total.
inline DesignReport design_cost(const DesignState& state) {
  DesignReport rep;
  const int n = state.spec.rows * state.spec.cols;
  rep.virtual_centers.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    rep.virtual_centers.push_back(
        virtual_camera(state.spec.camera_pose, state.mirrors[static_cast<size_t>(i)], i).center);

  rep.fitted_grid = grid_fit_error(rep.virtual_centers, state.spec.rows, state.spec.cols);
  rep.cost_grid = rep.fitted_grid.error / (state.spec.scale * state.spec.scale);

  const int central = state.central_index();
  double deficit_sum = 0.0;
  for (double depth : state.spec.eval_depths) {
    const OverlapResult ov = full_overlap(state, depth);
    const double central_area = polygon_area(fov_footprint(state, central, depth));
    double deficit = 1.0;
    if (central_area > 0.0) deficit = 1.0 - ov.area / central_area;
    deficit = std::clamp(deficit, 0.0, 1.0);
    deficit_sum += deficit;
    rep.overlap_area_per_depth.push_back({depth, ov.area, ov.polygon});
  }
  rep.cost_overlap = deficit_sum / static_cast<double>(state.spec.eval_depths.size());
  rep.cost_total = state.spec.alpha * rep.cost_grid + (1.0 - state.spec.alpha) * rep.cost_overlap;
  rep.constraint_violations = check_constraints(state);
  return rep;
}

// ---------------------------------------------------------------------------
// Optimization: block-cyclic Nelder-Mead with restarts and an exterior
// quadratic penalty on constraint violations.
// ---------------------------------------------------------------------------

struct OptimizeOptions {
  int outer_rounds = 3;
  double penalty_initial = 1e4;
  double penalty_growth = 10.0;
  int block_iterations = 120;  // Nelder-Mead iterations per mirror block
  int restarts = 1;            // extra NM starts per block with shrunk simplex
  double tilt_step = 0.02;     // radians
  double offset_step = 0.002;  // meters
  double vertex_step_frac = 0.08;  // of the cell size
  double feasible_tol = 1e-6;  // max violation magnitude accepted as feasible
};

struct TraceEntry {
  int round = 0;
  long long evaluation = 0;
  double penalized = 0.0;  // under the final-round penalty weight
  double cost_total = 0.0;
  double cost_grid = 0.0;
  double cost_overlap = 0.0;
  double max_violation = 0.0;
};

struct OptimizeResult {
  DesignState state;
  DesignReport report;
  std::vector<TraceEntry> trace;
  bool converged = true;
  std::string method = "block-cyclic Nelder-Mead with restarts, exterior quadratic penalty";
};

namespace detail {

// Per-mirror parameter vector: [tilt1, tilt2, offset, 4 x (du, dv)] = 11.
inline constexpr int kBlockDim = 11;

inline MirrorPlane apply_block(const MirrorPlane& base, const double* x) {
  std::vector<Vec2> deltas(base.extent.size());
  for (size_t k = 0; k < deltas.size(); ++k)
    deltas[k] = Vec2(x[3 + 2 * k], x[4 + 2 * k]);
  return perturb_plane(base, x[0], x[1], x[2], &deltas);
}

struct PenalizedCost {
  double cost_total = 0.0;
  double violation_sq = 0.0;  // sum of squared magnitudes
  double max_violation = 0.0;
  double cost_grid = 0.0;
  double cost_overlap = 0.0;

  double value(double weight) const { return cost_total + weight * violation_sq; }
};

inline PenalizedCost evaluate(const DesignState& state) {
  PenalizedCost pc;
  try {
    const DesignReport rep = design_cost(state);
    pc.cost_total = rep.cost_total;
    pc.cost_grid = rep.cost_grid;
    pc.cost_overlap = rep.cost_overlap;
    for (const auto& v : rep.constraint_violations) {
      pc.violation_sq += v.magnitude * v.magnitude;
      pc.max_violation = std::max(pc.max_violation, v.magnitude);
    }
  } catch (const Error&) {
    // candidate broke the geometry (e.g. footprint unbounded): reject hard
    pc.cost_total = 1e6;
    pc.violation_sq = 1e6;
    pc.max_violation = 1e6;
  }
  return pc;
}

// Minimal Nelder-Mead on a block objective. Returns best point found.
inline std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, const std::vector<double>& steps, int max_iters) {
  const size_t dim = x0.size();
  std::vector<std::vector<double>> xs(dim + 1, x0);
  for (size_t i = 0; i < dim; ++i) xs[i + 1][i] += steps[i];
  std::vector<double> fs(dim + 1);
  for (size_t i = 0; i <= dim; ++i) fs[i] = f(xs[i]);

  std::vector<size_t> order(dim + 1);
  for (int it = 0; it < max_iters; ++it) {
    for (size_t i = 0; i <= dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (fs[a] != fs[b]) return fs[a] < fs[b];
      return a < b;
    });
    const size_t best = order[0], worst = order[dim], second_worst = order[dim - 1];
    if (std::abs(fs[worst] - fs[best]) < 1e-15) break;

    std::vector<double> centroid(dim, 0.0);
    for (size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (size_t d = 0; d < dim; ++d) centroid[d] += xs[i][d];
    }
    for (size_t d = 0; d < dim; ++d) centroid[d] /= static_cast<double>(dim);

    auto blend = [&](double coef) {
      std::vector<double> p(dim);
      for (size_t d = 0; d < dim; ++d)
        p[d] = centroid[d] + coef * (xs[worst][d] - centroid[d]);
      return p;
    };

    const std::vector<double> xr = blend(-1.0);
    const double fr = f(xr);
    if (fr < fs[best]) {
      const std::vector<double> xe = blend(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const std::vector<double> xc = blend(fr < fs[worst] ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        // shrink toward best
        for (size_t i = 0; i <= dim; ++i) {
          if (i == best) continue;
          for (size_t d = 0; d < dim; ++d)
            xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  size_t best = 0;
  for (size_t i = 1; i <= dim; ++i)
    if (fs[i] < fs[best]) best = i;
  return {xs[best], fs[best]};
}

}  // namespace detail

/// Local descent over per-mirror parameters (2 tilt, 1 offset, 8 in-plane
/// vertex displacements), cycling mirror blocks under an escalating exterior
/// penalty. Accepted iterates are tracked under the final-round penalty
/// weight, so the traced penalized cost is non-increasing by construction.
/// The returned state is the best iterate whose constraint violations stay
/// within feasible_tol; the initial state must be feasible.
inline OptimizeResult optimize(const DesignState& initial, const OptimizeOptions& opts = {}) {
  initial.validate();
  {
    const auto v0 = check_constraints(initial);
    if (max_violation(v0) > opts.feasible_tol)
      throw ValidationError("optimize: initial state violates constraints");
  }

  const double final_weight =
      opts.penalty_initial * std::pow(opts.penalty_growth, opts.outer_rounds - 1);

  OptimizeResult result;
  result.state = initial;

  DesignState best = initial;
  detail::PenalizedCost best_pc = detail::evaluate(initial);
  long long evals = 1;

  auto record = [&](int round) {
    TraceEntry e;
    e.round = round;
    e.evaluation = evals;
    e.penalized = best_pc.value(final_weight);
    e.cost_total = best_pc.cost_total;
    e.cost_grid = best_pc.cost_grid;
    e.cost_overlap = best_pc.cost_overlap;
    e.max_violation = best_pc.max_violation;
    result.trace.push_back(e);
  };
  record(0);

  const double cell = std::min(initial.spec.scale / initial.spec.cols,
                               initial.spec.scale / initial.spec.rows);
  std::vector<double> steps(detail::kBlockDim);
  steps[0] = opts.tilt_step;
  steps[1] = opts.tilt_step;
  steps[2] = opts.offset_step;
  for (int k = 3; k < detail::kBlockDim; ++k) steps[k] = opts.vertex_step_frac * cell;

  const int n = initial.spec.rows * initial.spec.cols;
  double weight = opts.penalty_initial;

  for (int round = 0; round < opts.outer_rounds; ++round) {
    for (int m = 0; m < n; ++m) {
      DesignState work = best;
      const MirrorPlane base = work.mirrors[static_cast<size_t>(m)];

      auto objective = [&](const std::vector<double>& x) {
        work.mirrors[static_cast<size_t>(m)] = detail::apply_block(base, x.data());
        const detail::PenalizedCost pc = detail::evaluate(work);
        ++evals;
        // track the global best under the final weight, feasibility-gated
        if (pc.max_violation <= opts.feasible_tol &&
            pc.value(final_weight) < best_pc.value(final_weight) - 1e-15) {
          best_pc = pc;
          best = work;
          record(round + 1);
        }
        return pc.value(weight);
      };

      std::vector<double> x0(detail::kBlockDim, 0.0);
      auto [xb, fb] = detail::nelder_mead(objective, x0, steps, opts.block_iterations);
      for (int restart = 0; restart < opts.restarts; ++restart) {
        std::vector<double> shrunk(steps);
        for (auto& s : shrunk) s *= 0.3;
        std::tie(xb, fb) = detail::nelder_mead(objective, xb, shrunk, opts.block_iterations);
      }
      // 'best' already captured every improving feasible candidate
    }
    weight *= opts.penalty_growth;
  }

  result.state = best;
  result.report = design_cost(best);
  result.converged = max_violation(result.report.constraint_violations) <= opts.feasible_tol;
  return result;
}

}  // namespace mirrorfield::design
