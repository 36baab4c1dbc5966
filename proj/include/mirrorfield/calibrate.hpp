// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/grid_model.hpp"
#include "mirrorfield/simulate.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace mirrorfield::calib {

using sim::Checkerboard;
using sim::Observation;

// ---------------------------------------------------------------------------
// Problem definition
// ---------------------------------------------------------------------------

struct CalibrationProblem {
  CameraIntrinsics intrinsics;  // fixed during the mirror solve
  Pose camera_pose;
  int rows = 0;  // mirror grid shape
  int cols = 0;
  std::vector<Checkerboard> boards;  // known poses (synthetic mode)
  std::vector<Observation> observations;
  std::vector<MirrorPlane> initial_mirrors;
  double residual_cap_px = 50.0;  // robust cap for invisible corners

  void validate() const {
    intrinsics.validate();
    camera_pose.validate();
    if (initial_mirrors.empty()) throw ValidationError("calibration: no mirrors");
    if (boards.empty()) throw ValidationError("calibration: no boards");
    std::vector<int> per_mirror(initial_mirrors.size(), 0);
    for (const auto& o : observations) {
      if (o.mirror_index < 0 || o.mirror_index >= static_cast<int>(initial_mirrors.size()))
        throw ValidationError("calibration: observation references unknown mirror");
      if (o.board < 0 || o.board >= static_cast<int>(boards.size()))
        throw ValidationError("calibration: observation references unknown board");
      const auto& b = boards[static_cast<size_t>(o.board)];
      if (o.row < 0 || o.row >= b.rows || o.col < 0 || o.col >= b.cols)
        throw ValidationError("calibration: observation references unknown corner");
      ++per_mirror[static_cast<size_t>(o.mirror_index)];
    }
    for (size_t m = 0; m < per_mirror.size(); ++m)
      if (per_mirror[m] < 6)
        throw ValidationError("calibration: mirror " + std::to_string(m) +
                              " has fewer than 6 observations");
  }

  Vec3 corner_world(const Observation& o) const {
    return boards[static_cast<size_t>(o.board)].corner_world(o.row, o.col);
  }
};

inline bool observation_less(const Observation& a, const Observation& b) {
  if (a.mirror_index != b.mirror_index) return a.mirror_index < b.mirror_index;
  if (a.board != b.board) return a.board < b.board;
  if (a.row != b.row) return a.row < b.row;
  return a.col < b.col;
}

struct CalibrationResult {
  std::vector<MirrorPlane> mirrors;
  std::vector<Checkerboard> boards;  // refined copies in joint mode
  double rms_px = 0.0;               // per-component pixel RMS
  double rms_spatial_mm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> covariance_diag;  // per-parameter variance estimates
  int capped_residuals = 0;             // observations invisible at the optimum
};

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Observation> sorted_observations(const CalibrationProblem& p) {
  std::vector<Observation> obs = p.observations;
  std::sort(obs.begin(), obs.end(), observation_less);
  return obs;
}

/// Two residual entries (observed - expected) per observation; invisible
/// corners get the robust cap in both components.
inline void fill_residuals(const CalibrationProblem& problem,
                           const std::vector<Observation>& obs,
                           const std::vector<MirrorPlane>& mirrors,
                           const std::vector<Checkerboard>& boards,
                           Eigen::VectorXd& r, int* capped = nullptr,
                           const std::vector<int>* subset = nullptr) {
  auto eval_one = [&](size_t k) {
    const Observation& o = obs[k];
    const auto expected = sim::try_project_via_mirror(
        problem.intrinsics, problem.camera_pose,
        mirrors[static_cast<size_t>(o.mirror_index)],
        boards[static_cast<size_t>(o.board)].corner_world(o.row, o.col));
    if (expected) {
      r[2 * k] = o.pixel.x() - expected->x();
      r[2 * k + 1] = o.pixel.y() - expected->y();
    } else {
      r[2 * k] = problem.residual_cap_px;
      r[2 * k + 1] = problem.residual_cap_px;
      if (capped) ++*capped;
    }
  };
  if (subset) {
    for (int k : *subset) eval_one(static_cast<size_t>(k));
  } else {
    for (size_t k = 0; k < obs.size(); ++k) eval_one(k);
  }
}

}  // namespace detail

/// Residual vector for candidate mirrors, ordered by (mirror, board, row,
/// col), two entries per observation.
inline Eigen::VectorXd residuals(const CalibrationProblem& problem,
                                 const std::vector<MirrorPlane>& mirrors) {
  problem.validate();
  if (mirrors.size() != problem.initial_mirrors.size())
    throw ValidationError("residuals: mirror count mismatch");
  const auto obs = detail::sorted_observations(problem);
  Eigen::VectorXd r(2 * obs.size());
  detail::fill_residuals(problem, obs, mirrors, problem.boards, r);
  return r;
}

/// Per-component pixel RMS of the residuals for a candidate mirror set.
inline double rms_px_of(const CalibrationProblem& problem,
                        const std::vector<MirrorPlane>& mirrors) {
  const Eigen::VectorXd r = residuals(problem, mirrors);
  return std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
}

// ---------------------------------------------------------------------------
// Spatial reprojection error
// ---------------------------------------------------------------------------

/// 3D distance from each known corner to the line obtained by tracing its
/// observed pixel through the camera and reflecting it off the calibrated
/// mirror. RMS over all observations, in millimeters.
inline double spatial_rms(const CalibrationProblem& problem,
                          const std::vector<MirrorPlane>& mirrors) {
  if (mirrors.size() != problem.initial_mirrors.size())
    throw ValidationError("spatial_rms: mirror count mismatch");
  double acc = 0.0;
  size_t count = 0;
  for (const auto& o : problem.observations) {
    const Vec2 norm = undistort_pixel(problem.intrinsics, o.pixel);
    Vec3 dir = problem.camera_pose.rotation * Vec3(norm.x(), norm.y(), 1.0);
    if (dir.norm() < 1e-15) throw NumericError("spatial_rms: degenerate ray");
    dir.normalize();
    const MirrorPlane& m = mirrors[static_cast<size_t>(o.mirror_index)];
    const Vec3 origin = reflect_point(m, problem.camera_pose.center);
    const Vec3 rdir = reflect_direction(m, dir);
    const Vec3 w = problem.corner_world(o) - origin;
    const double d = (w - w.dot(rdir) * rdir).norm();
    acc += d * d;
    ++count;
  }
  if (count == 0) return 0.0;
  return std::sqrt(acc / static_cast<double>(count)) * 1000.0;
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt over 3 parameters per mirror
// ---------------------------------------------------------------------------

struct LMOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-12;  // on cost change
  double gradient_tolerance = 1e-10;  // on |J^T r|_inf
  double lambda_initial = 1e-3;
  double lambda_factor = 10.0;  // Marquardt schedule: x10 up, /10 down
  double lambda_max = 1e12;
  double jacobian_step = 1e-7;  // central differences on normalized params
  bool joint_boards = false;    // append 6 DOF per board
};

namespace detail {

struct ParamLayout {
  int n_mirrors = 0;
  int n_boards = 0;
  bool joint = false;
  int size() const { return 3 * n_mirrors + (joint ? 6 * n_boards : 0); }
  int mirror_offset(int m) const { return 3 * m; }
  int board_offset(int b) const { return 3 * n_mirrors + 6 * b; }
};

inline MirrorPlane mirror_from_params(const MirrorPlane& base, const double* x) {
  return perturb_plane(base, x[0], x[1], x[2]);
}

inline Checkerboard board_from_params(const Checkerboard& base, const double* x) {
  Checkerboard out = base;
  const Vec3 w(x[0], x[1], x[2]);
  const double angle = w.norm();
  Mat3 rot = Mat3::Identity();
  if (angle > 1e-18) rot = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
  out.pose.rotation = rot * base.pose.rotation;
  out.pose.center = base.pose.center + Vec3(x[3], x[4], x[5]);
  return out;
}

inline void apply_params(const CalibrationProblem& problem, const ParamLayout& layout,
                         const Eigen::VectorXd& x, std::vector<MirrorPlane>& mirrors,
                         std::vector<Checkerboard>& boards) {
  for (int m = 0; m < layout.n_mirrors; ++m)
    mirrors[static_cast<size_t>(m)] = mirror_from_params(
        problem.initial_mirrors[static_cast<size_t>(m)], x.data() + layout.mirror_offset(m));
  if (layout.joint) {
    for (int b = 0; b < layout.n_boards; ++b)
      boards[static_cast<size_t>(b)] = board_from_params(
          problem.boards[static_cast<size_t>(b)], x.data() + layout.board_offset(b));
  }
}

}  // namespace detail

/// Standard LM with numeric central-difference Jacobian. Parameters per
/// mirror: two tangent-plane tilt angles and the offset along the initial
/// normal. The Jacobian exploits block sparsity: a mirror column touches only
/// that mirror's observations; a board column only that board's.
inline CalibrationResult levenberg_marquardt(const CalibrationProblem& problem,
                                             const LMOptions& opts = {}) {
  problem.validate();
  const auto obs = detail::sorted_observations(problem);
  const int n_obs = static_cast<int>(obs.size());

  detail::ParamLayout layout;
  layout.n_mirrors = static_cast<int>(problem.initial_mirrors.size());
  layout.n_boards = static_cast<int>(problem.boards.size());
  layout.joint = opts.joint_boards;
  const int n_params = layout.size();

  // observation row ranges per mirror (contiguous after sorting) and index
  // lists per board
  std::vector<std::vector<int>> rows_of_mirror(static_cast<size_t>(layout.n_mirrors));
  std::vector<std::vector<int>> rows_of_board(static_cast<size_t>(layout.n_boards));
  for (int k = 0; k < n_obs; ++k) {
    rows_of_mirror[static_cast<size_t>(obs[static_cast<size_t>(k)].mirror_index)].push_back(k);
    rows_of_board[static_cast<size_t>(obs[static_cast<size_t>(k)].board)].push_back(k);
  }

  std::vector<MirrorPlane> mirrors = problem.initial_mirrors;
  std::vector<Checkerboard> boards = problem.boards;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd r(2 * n_obs);
  detail::fill_residuals(problem, obs, mirrors, boards, r);
  double cost = r.squaredNorm();

  Eigen::MatrixXd jac(2 * n_obs, n_params);
  Eigen::VectorXd r_plus(2 * n_obs), r_minus(2 * n_obs);

  auto fill_jacobian = [&](const Eigen::VectorXd& at) {
    jac.setZero();
    std::vector<MirrorPlane> work_m = mirrors;
    std::vector<Checkerboard> work_b = boards;
    Eigen::VectorXd xp = at;
    for (int p = 0; p < n_params; ++p) {
      const std::vector<int>* subset = nullptr;
      if (p < 3 * layout.n_mirrors) {
        subset = &rows_of_mirror[static_cast<size_t>(p / 3)];
      } else {
        subset = &rows_of_board[static_cast<size_t>((p - 3 * layout.n_mirrors) / 6)];
      }
      const double h = opts.jacobian_step;
      xp[p] = at[p] + h;
      detail::apply_params(problem, layout, xp, work_m, work_b);
      detail::fill_residuals(problem, obs, work_m, work_b, r_plus, nullptr, subset);
      xp[p] = at[p] - h;
      detail::apply_params(problem, layout, xp, work_m, work_b);
      detail::fill_residuals(problem, obs, work_m, work_b, r_minus, nullptr, subset);
      xp[p] = at[p];
      for (int k : *subset) {
        jac(2 * k, p) = (r_plus[2 * k] - r_minus[2 * k]) / (2.0 * h);
        jac(2 * k + 1, p) = (r_plus[2 * k + 1] - r_minus[2 * k + 1]) / (2.0 * h);
      }
    }
    detail::apply_params(problem, layout, at, work_m, work_b);
  };

  CalibrationResult result;
  double lambda = opts.lambda_initial;
  int iterations = 0;
  bool converged = false;
  Eigen::MatrixXd jtj;
  Eigen::VectorXd jtr;

  for (; iterations < opts.max_iterations; ++iterations) {
    fill_jacobian(x);
    jtj = jac.transpose() * jac;
    jtr = jac.transpose() * r;

    if (iterations == 0) {
      // structural check: each mirror's 3x3 block must be full rank
      for (int m = 0; m < layout.n_mirrors; ++m) {
        const Mat3 block = jtj.block<3, 3>(3 * m, 3 * m);
        Eigen::FullPivLU<Mat3> lu(block);
        if (lu.rank() < 3)
          throw NumericError("levenberg_marquardt: rank-deficient normal equations for mirror " +
                             std::to_string(m));
      }
    }

    if (jtr.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
      converged = true;
      break;
    }

    bool stepped = false;
    while (lambda <= opts.lambda_max) {
      Eigen::MatrixXd damped = jtj;
      for (int p = 0; p < n_params; ++p)
        damped(p, p) += lambda * std::max(jtj(p, p), 1e-12);
      const Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
      const Eigen::VectorXd x_try = x + delta;
      detail::apply_params(problem, layout, x_try, mirrors, boards);
      detail::fill_residuals(problem, obs, mirrors, boards, r_plus);
      const double cost_try = r_plus.squaredNorm();
      if (cost_try < cost) {
        const double rel_change = (cost - cost_try) / std::max(cost, 1e-300);
        x = x_try;
        r = r_plus;
        cost = cost_try;
        lambda = std::max(lambda / opts.lambda_factor, 1e-15);
        stepped = true;
        if (rel_change < opts.relative_tolerance) converged = true;
        break;
      }
      lambda *= opts.lambda_factor;
    }
    if (!stepped) {
      // no downhill step available at any damping: local optimum
      converged = cost < 1e-18 || jtr.lpNorm<Eigen::Infinity>() < 1e-6;
      break;
    }
    if (converged) {
      ++iterations;
      break;
    }
  }

  detail::apply_params(problem, layout, x, mirrors, boards);
  detail::fill_residuals(problem, obs, mirrors, boards, r, &result.capped_residuals);

  result.mirrors = mirrors;
  result.boards = boards;
  result.rms_px = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  result.iterations = iterations;
  result.converged = converged;

  // covariance: s^2 (J^T J)^-1 diagonal
  fill_jacobian(x);
  jtj = jac.transpose() * jac;
  const int dof = 2 * n_obs - n_params;
  const double s2 = dof > 0 ? r.squaredNorm() / dof : 0.0;
  Eigen::MatrixXd cov = jtj.ldlt().solve(Eigen::MatrixXd::Identity(n_params, n_params));
  result.covariance_diag.resize(static_cast<size_t>(n_params));
  for (int p = 0; p < n_params; ++p)
    result.covariance_diag[static_cast<size_t>(p)] = s2 * cov(p, p);

  CalibrationProblem with_boards = problem;
  with_boards.boards = boards;
  result.rms_spatial_mm = spatial_rms(with_boards, mirrors);
  return result;
}

// ---------------------------------------------------------------------------
// Nearest parallel grid
// ---------------------------------------------------------------------------

/// Fit the rectangular grid of virtual centers and derive the shared target
/// orientation from the central mirror's virtual view composed with the
/// handedness flip. Residual translations are reported, not compensated.
inline RectifiedGridModel nearest_parallel_grid(const std::vector<MirrorPlane>& mirrors,
                                                const CameraIntrinsics& intrinsics,
                                                const Pose& real_pose, int rows, int cols) {
  if (static_cast<int>(mirrors.size()) != rows * cols)
    throw ValidationError("nearest_parallel_grid: mirror count != rows*cols");
  if (mirrors.size() < 4)
    throw ValidationError("nearest_parallel_grid: needs at least 4 mirrors");

  std::vector<VirtualCamera> virtuals;
  std::vector<Vec3> centers;
  virtuals.reserve(mirrors.size());
  centers.reserve(mirrors.size());
  for (size_t m = 0; m < mirrors.size(); ++m) {
    virtuals.push_back(virtual_camera(real_pose, mirrors[m], static_cast<int>(m)));
    centers.push_back(virtuals.back().center);
  }
  const design::GridFit fit = design::grid_fit_error(centers, rows, cols);

  RectifiedGridModel model;
  model.grid_rows = rows;
  model.grid_cols = cols;
  model.origin = fit.origin;
  model.x_step = fit.x_step;
  model.y_step = fit.y_step;

  const Mat3 flip = RectifiedGridModel::flip_matrix();
  const int central = model.central_index();
  model.target_rotation = virtuals[static_cast<size_t>(central)].orientation * flip;

  model.views.resize(mirrors.size());
  for (int t = 0; t < rows; ++t) {
    for (int s = 0; s < cols; ++s) {
      const int k = t * cols + s;
      GridView& v = model.views[static_cast<size_t>(k)];
      v.s = s;
      v.t = t;
      v.center = centers[static_cast<size_t>(k)];
      v.residual = v.center - (fit.origin + static_cast<double>(s) * fit.x_step +
                               static_cast<double>(t) * fit.y_step);
      const Mat3 r_v = virtuals[static_cast<size_t>(k)].orientation * flip;
      v.rotation_to_target = r_v.transpose() * model.target_rotation;
    }
  }

  model.target_intrinsics = intrinsics;
  model.target_intrinsics.k1 = 0.0;
  model.target_intrinsics.k2 = 0.0;
  return model;
}

}  // namespace mirrorfield::calib
