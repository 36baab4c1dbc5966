// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/decode.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace mirrorfield::feat {

using lf::LightField4D;

// ---------------------------------------------------------------------------
// Keypoints and detection
// ---------------------------------------------------------------------------

struct Keypoint2D {
  int s = 0, t = 0;          // view grid index
  Vec2 pixel = Vec2::Zero();  // sub-pixel location, unmasked in its view
  double response = 0.0;
  std::vector<float> descriptor;  // mean-subtracted intensity patch
};

/// Harris-style corner detector with patch descriptors. The detector is a
/// bundled reference implementation, sufficient for synthetic scenes; other
/// detectors can feed the same Keypoint2D interface.
struct DetectorConfig {
  double harris_k = 0.04;
  double threshold_rel = 0.01;   // of the max response
  double response_floor = 1e-9;  // absolute gate; uniform images yield nothing
  int nms_radius = 2;
  int max_keypoints = 512;
  int patch_size = 8;       // descriptor is patch_size x patch_size samples
  double patch_step = 2.0;  // pixel spacing between descriptor samples
};

namespace detail {

/// Descriptor sampling; nullopt when any sample touches a masked pixel.
inline std::optional<std::vector<float>> sample_descriptor(const MaskedImage& view,
                                                           const Vec2& at,
                                                           const DetectorConfig& cfg) {
  const int n = cfg.patch_size;
  std::vector<float> patch(static_cast<size_t>(n) * n);
  const double half = (n - 1) / 2.0;
  double mean = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = at.x() + (i - half) * cfg.patch_step;
      const double y = at.y() + (j - half) * cfg.patch_step;
      const auto v = sample_bilinear(view.image, &view.mask, x, y);
      if (!v) return std::nullopt;
      patch[static_cast<size_t>(j) * n + i] = static_cast<float>(*v);
      mean += *v;
    }
  }
  mean /= static_cast<double>(n) * n;
  for (float& v : patch) v -= static_cast<float>(mean);
  return patch;
}

}  // namespace detail

inline std::vector<Keypoint2D> detect(const MaskedImage& view, int s, int t,
                                      const DetectorConfig& cfg = {}) {
  const int w = view.width();
  const int h = view.height();
  std::vector<Keypoint2D> out;
  if (w < 5 || h < 5) return out;

  // gradients (central differences), zero at masked or border pixels
  std::vector<double> gx(static_cast<size_t>(w) * h, 0.0);
  std::vector<double> gy(static_cast<size_t>(w) * h, 0.0);
  auto valid = [&](int x, int y) { return view.mask.get(x, y); };
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      if (!valid(x - 1, y) || !valid(x + 1, y) || !valid(x, y - 1) || !valid(x, y + 1))
        continue;
      const size_t i = static_cast<size_t>(y) * w + x;
      gx[i] = 0.5 * (view.image.at(x + 1, y) - view.image.at(x - 1, y));
      gy[i] = 0.5 * (view.image.at(x, y + 1) - view.image.at(x, y - 1));
    }

  // Harris response over a 5x5 window
  std::vector<double> resp(static_cast<size_t>(w) * h, 0.0);
  double max_resp = 0.0;
  for (int y = 2; y < h - 2; ++y)
    for (int x = 2; x < w - 2; ++x) {
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          const size_t i = static_cast<size_t>(y + dy) * w + (x + dx);
          sxx += gx[i] * gx[i];
          sxy += gx[i] * gy[i];
          syy += gy[i] * gy[i];
        }
      const double det = sxx * syy - sxy * sxy;
      const double tr = sxx + syy;
      const double r = det - cfg.harris_k * tr * tr;
      resp[static_cast<size_t>(y) * w + x] = r;
      max_resp = std::max(max_resp, r);
    }
  if (max_resp < cfg.response_floor) return out;

  const double threshold = cfg.threshold_rel * max_resp;
  const int rad = cfg.nms_radius;
  for (int y = 2; y < h - 2; ++y) {
    for (int x = 2; x < w - 2; ++x) {
      const double r = resp[static_cast<size_t>(y) * w + x];
      if (r < threshold) continue;
      bool is_max = true;
      for (int dy = -rad; dy <= rad && is_max; ++dy)
        for (int dx = -rad; dx <= rad; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const double rn = resp[static_cast<size_t>(ny) * w + nx];
          // deterministic tie-break on plateaus: earlier scan order wins
          if (rn > r || (rn == r && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_max = false;
            break;
          }
        }
      if (!is_max) continue;
      if (!view.mask.get(x, y)) continue;

      // sub-pixel quadratic refinement on the response surface
      Vec2 p(x, y);
      const double r0 = resp[static_cast<size_t>(y) * w + x];
      const double rxm = resp[static_cast<size_t>(y) * w + (x - 1)];
      const double rxp = resp[static_cast<size_t>(y) * w + (x + 1)];
      const double rym = resp[static_cast<size_t>(y - 1) * w + x];
      const double ryp = resp[static_cast<size_t>(y + 1) * w + x];
      const double dxx = rxm - 2.0 * r0 + rxp;
      const double dyy = rym - 2.0 * r0 + ryp;
      if (dxx < 0.0) p.x() += 0.5 * (rxm - rxp) / dxx;
      if (dyy < 0.0) p.y() += 0.5 * (rym - ryp) / dyy;

      const auto desc = detail::sample_descriptor(view, p, cfg);
      if (!desc) continue;
      Keypoint2D kp;
      kp.s = s;
      kp.t = t;
      kp.pixel = p;
      kp.response = r;
      kp.descriptor = *desc;
      out.push_back(std::move(kp));
    }
  }
  std::sort(out.begin(), out.end(), [](const Keypoint2D& a, const Keypoint2D& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.pixel.y() != b.pixel.y()) return a.pixel.y() < b.pixel.y();
    return a.pixel.x() < b.pixel.x();
  });
  if (static_cast<int>(out.size()) > cfg.max_keypoints) out.resize(static_cast<size_t>(cfg.max_keypoints));
  return out;
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

struct FilterConfig {
  double max_dist_px = 1.0;  // prediction-distance rejection threshold
  int n_min = 0;             // 0 resolves to ceil(0.75 * S * T)
  double match_ratio = 0.8;  // best/second-best descriptor distance

  int resolved_n_min(int s_count, int t_count) const {
    const int views = s_count * t_count;
    const int n = n_min > 0 ? n_min : static_cast<int>(std::ceil(0.75 * views));
    if (n < 2 || n > views)
      throw ValidationError("filter config: n_min outside [2, view count]");
    return n;
  }
};

struct MatchPair {
  int central_idx = -1;
  int other_idx = -1;
  double distance = 0.0;
  double ratio = 1.0;  // best/second-best; lower is more distinctive
};

inline double descriptor_distance(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Mutual-best nearest-descriptor matching with a ratio test.
inline std::vector<MatchPair> match_to_central(const std::vector<Keypoint2D>& central,
                                               const std::vector<Keypoint2D>& other,
                                               const FilterConfig& cfg = {}) {
  std::vector<MatchPair> out;
  if (central.empty() || other.empty()) return out;

  auto best_two = [](const std::vector<Keypoint2D>& from, size_t i,
                     const std::vector<Keypoint2D>& to) {
    int best = -1;
    double d1 = 1e300, d2 = 1e300;
    for (size_t j = 0; j < to.size(); ++j) {
      const double d = descriptor_distance(from[i].descriptor, to[j].descriptor);
      if (d < d1) {
        d2 = d1;
        d1 = d;
        best = static_cast<int>(j);
      } else if (d < d2) {
        d2 = d;
      }
    }
    return std::tuple<int, double, double>(best, d1, d2);
  };

  std::vector<int> reverse_best(other.size(), -1);
  for (size_t j = 0; j < other.size(); ++j) {
    auto [bj, d1, d2] = best_two(other, j, central);
    (void)d1;
    (void)d2;
    reverse_best[j] = bj;
  }

  for (size_t i = 0; i < central.size(); ++i) {
    auto [bj, d1, d2] = best_two(central, i, other);
    if (bj < 0) continue;
    double ratio;
    if (other.size() < 2) {
      ratio = 0.0;  // a single candidate cannot be ambiguous
    } else if (d2 <= 1e-12) {
      if (d1 <= 1e-12) continue;  // duplicate descriptors: ambiguous
      ratio = 1.0;
    } else {
      ratio = d1 / d2;
    }
    if (ratio >= cfg.match_ratio) continue;
    if (reverse_best[static_cast<size_t>(bj)] != static_cast<int>(i)) continue;
    MatchPair p;
    p.central_idx = static_cast<int>(i);
    p.other_idx = bj;
    p.distance = d1;
    p.ratio = ratio;
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Point-plane slope model
// ---------------------------------------------------------------------------

/// Physical grid-step scale: anisotropic lattices are normalized by the step
/// lengths so a single scalar slope applies in both directions. su is the
/// reference (1 by definition), sv = |y_step| / |x_step|.
struct GridScale {
  double su = 1.0;
  double sv = 1.0;

  static GridScale of(const RectifiedGridModel& model) {
    GridScale g;
    const double bx = model.x_step.norm();
    const double by = model.y_step.norm();
    g.su = 1.0;
    g.sv = bx > 1e-15 ? by / bx : 1.0;
    return g;
  }
};

/// Least-squares scalar slope of the Lambertian point-plane model
/// (du, dv) = w * (ds * su, dt * sv) from a single pair.
inline double slope_from_pair(const Keypoint2D& central, const Keypoint2D& other,
                              const GridScale& scale = {}) {
  const Vec2 dgrid((other.s - central.s) * scale.su, (other.t - central.t) * scale.sv);
  if (dgrid.squaredNorm() <= 0.0)
    throw ValidationError("slope_from_pair: views share the same grid index");
  const Vec2 dpix = other.pixel - central.pixel;
  return dpix.dot(dgrid) / dgrid.squaredNorm();
}

/// Expected location of a feature in a target view under the slope model.
inline Vec2 predict_location(const Keypoint2D& central, double slope, int target_s,
                             int target_t, const GridScale& scale = {}) {
  return central.pixel + slope * Vec2((target_s - central.s) * scale.su,
                                      (target_t - central.t) * scale.sv);
}

// ---------------------------------------------------------------------------
// Point-plane filtering
// ---------------------------------------------------------------------------

/// Candidate 4D feature: a central keypoint plus its matched pixel (and the
/// ratio-test margin) in other views. At most one match per view.
struct Feature4DCandidate {
  Keypoint2D central;
  struct ViewMatch {
    int s = 0, t = 0;
    Vec2 pixel = Vec2::Zero();
    double ratio = 1.0;
  };
  std::vector<ViewMatch> matches;
};

struct Feature4D {
  Vec2 central_px = Vec2::Zero();
  double slope = 0.0;  // pixels per normalized grid step, positive with +s
  int support_count = 0;
  double residual_rms_px = 0.0;
};

struct FilteredFeature {
  Feature4D feature;
  std::vector<std::pair<int, int>> accepted_views;  // (s, t), excluding central
};

/// The point-plane filter: seed a slope from the most distinctive pair,
/// reject matches farther than max_dist_px from their expected location,
/// consolidate the slope over all passing views by least squares, re-check,
/// and accept the feature if central + passing views >= n_min.
inline std::vector<FilteredFeature> filter_point_plane(
    const std::vector<Feature4DCandidate>& candidates, int s_count, int t_count,
    const FilterConfig& cfg = {}, const GridScale& scale = {}) {
  const int n_min = cfg.resolved_n_min(s_count, t_count);
  std::vector<FilteredFeature> out;

  for (const auto& cand : candidates) {
    if (cand.matches.empty()) continue;

    // initial slope from the best-ratio pair
    const auto seed = std::min_element(
        cand.matches.begin(), cand.matches.end(),
        [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
    Keypoint2D seed_kp;
    seed_kp.s = seed->s;
    seed_kp.t = seed->t;
    seed_kp.pixel = seed->pixel;
    double slope;
    try {
      slope = slope_from_pair(cand.central, seed_kp, scale);
    } catch (const ValidationError&) {
      continue;
    }

    auto passing = [&](double w) {
      std::vector<const Feature4DCandidate::ViewMatch*> acc;
      for (const auto& m : cand.matches) {
        const Vec2 expected = predict_location(cand.central, w, m.s, m.t, scale);
        if ((m.pixel - expected).norm() <= cfg.max_dist_px) acc.push_back(&m);
      }
      return acc;
    };

    const auto first_pass = passing(slope);
    if (static_cast<int>(first_pass.size()) + 1 < n_min) continue;

    // consolidated slope: least squares over all passing views
    auto fit = [&](const std::vector<const Feature4DCandidate::ViewMatch*>& acc) {
      double num = 0.0, den = 0.0;
      for (const auto* m : acc) {
        const Vec2 dgrid((m->s - cand.central.s) * scale.su,
                         (m->t - cand.central.t) * scale.sv);
        const Vec2 dpix = m->pixel - cand.central.pixel;
        num += dpix.dot(dgrid);
        den += dgrid.squaredNorm();
      }
      return den > 0.0 ? num / den : 0.0;
    };
    const double consolidated = fit(first_pass);

    // re-check against the consolidated slope
    const auto final_pass = passing(consolidated);
    if (static_cast<int>(final_pass.size()) + 1 < n_min) continue;

    double rss = 0.0;
    for (const auto* m : final_pass) {
      const Vec2 expected = predict_location(cand.central, consolidated, m->s, m->t, scale);
      rss += (m->pixel - expected).squaredNorm();
    }

    FilteredFeature ff;
    ff.feature.central_px = cand.central.pixel;
    ff.feature.slope = consolidated;
    ff.feature.support_count = static_cast<int>(final_pass.size()) + 1;
    ff.feature.residual_rms_px =
        final_pass.empty() ? 0.0 : std::sqrt(rss / static_cast<double>(final_pass.size()));
    for (const auto* m : final_pass) ff.accepted_views.emplace_back(m->s, m->t);
    out.push_back(std::move(ff));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convenience pipeline over a decoded light field
// ---------------------------------------------------------------------------

struct ExtractionResult {
  std::vector<FilteredFeature> features;
  std::vector<std::vector<Keypoint2D>> keypoints_per_view;  // row-major (t*S+s)
};

/// Detect in every view, match each non-central view to the central one,
/// assemble candidates, and run the point-plane filter.
inline ExtractionResult extract_features(const LightField4D& field,
                                         const DetectorConfig& det_cfg = {},
                                         const FilterConfig& filt_cfg = {}) {
  ExtractionResult res;
  const int s_n = field.s_count, t_n = field.t_count;
  const int cs = field.model.central_s();
  const int ct = field.model.central_t();
  res.keypoints_per_view.resize(static_cast<size_t>(s_n) * t_n);
  for (int t = 0; t < t_n; ++t)
    for (int s = 0; s < s_n; ++s)
      res.keypoints_per_view[static_cast<size_t>(t) * s_n + s] =
          detect(field.view(s, t), s, t, det_cfg);

  const auto& central = res.keypoints_per_view[static_cast<size_t>(ct) * s_n + cs];
  std::vector<Feature4DCandidate> candidates(central.size());
  for (size_t i = 0; i < central.size(); ++i) candidates[i].central = central[i];

  for (int t = 0; t < t_n; ++t) {
    for (int s = 0; s < s_n; ++s) {
      if (s == cs && t == ct) continue;
      const auto& kps = res.keypoints_per_view[static_cast<size_t>(t) * s_n + s];
      for (const MatchPair& mp : match_to_central(central, kps, filt_cfg)) {
        Feature4DCandidate::ViewMatch vm;
        vm.s = s;
        vm.t = t;
        vm.pixel = kps[static_cast<size_t>(mp.other_idx)].pixel;
        vm.ratio = mp.ratio;
        candidates[static_cast<size_t>(mp.central_idx)].matches.push_back(vm);
      }
    }
  }
  res.features = filter_point_plane(candidates, s_n, t_n, filt_cfg,
                                    GridScale::of(field.model));
  return res;
}

}  // namespace mirrorfield::feat
