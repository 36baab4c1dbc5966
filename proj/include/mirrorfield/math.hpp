// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mirrorfield {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Base error for the toolkit. The CLI maps ValidationError to exit code 2
/// and every other Error to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid inputs, broken invariants, malformed files, schema mismatches.
struct ValidationError : Error {
  using Error::Error;
};

/// Numerical failures: divergence, rank deficiency, singular systems.
struct NumericError : Error {
  using Error::Error;
};

/// Geometric failures: non-coplanar polygons, unbounded footprints.
struct GeometryError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic random numbers.
//
// All stochastic pieces (render jitter, observation noise) derive their
// streams from SplitMix64 so outputs are byte-identical across runs and
// independent of evaluation order. std::normal_distribution is avoided
// because its sample sequence is implementation-defined.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Small counter-based RNG; cheap to seed per pixel / per sample.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // burn one output so nearby seeds decorrelate
    splitmix64(state_);
  }

  /// Combine a base seed with stream identifiers (pixel index, sample id).
  static Rng keyed(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0) {
    std::uint64_t s = seed;
    s = splitmix64(s) ^ (k1 * 0x9e3779b97f4a7c15ull);
    s = splitmix64(s) ^ (k2 * 0xff51afd7ed558ccdull);
    return Rng(s);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (two uniforms per draw, no spare state).
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Content hashing for provenance records.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }

}  // namespace mirrorfield
