// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/math.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mirrorfield {

/// Row-major grayscale image with intensities in [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw ValidationError("image: size must be positive");
  }

  double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
};

/// Validity mask; nonzero = pixel carries data.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h, bool fill = true)
      : width(w), height(h), bits(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

  void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
  bool get(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
};

struct MaskedImage {
  GrayImage image;
  Mask mask;

  MaskedImage() = default;
  MaskedImage(int w, int h, double fill = 0.0, bool valid = true)
      : image(w, h, fill), mask(w, h, valid) {}

  int width() const { return image.width; }
  int height() const { return image.height; }
};

/// Bilinear sample at continuous pixel coordinates (pixel centers at integer
/// coordinates). Returns nullopt when outside or when any contributing pixel
/// is masked out (conservative mask propagation).
inline std::optional<double> sample_bilinear(const GrayImage& img, const Mask* mask,
                                             double x, double y) {
  if (!(x >= 0.0) || !(y >= 0.0) || x > img.width - 1 || y > img.height - 1)
    return std::nullopt;
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 > img.width - 2) x0 = img.width - 2;
  if (y0 > img.height - 2) y0 = img.height - 2;
  if (img.width == 1) x0 = 0;
  if (img.height == 1) y0 = 0;
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  if (mask) {
    if (!mask->get(x0, y0) || !mask->get(x1, y0) || !mask->get(x0, y1) ||
        !mask->get(x1, y1))
      return std::nullopt;
  }
  const double v00 = img.at(x0, y0);
  const double v10 = img.at(x1, y0);
  const double v01 = img.at(x0, y1);
  const double v11 = img.at(x1, y1);
  return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
         fy * ((1.0 - fx) * v01 + fx * v11);
}

// ---------------------------------------------------------------------------
// Portable graymap I/O (P2 ascii / P5 binary), 8-bit, with comment lines
// preserved for provenance.
// ---------------------------------------------------------------------------

inline std::string pgm_encode(const GrayImage& img, const std::string& comment = "",
                              bool binary = true) {
  std::ostringstream os;
  os << (binary ? "P5\n" : "P2\n");
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) os << "# " << line << "\n";
  }
  os << img.width << " " << img.height << "\n255\n";
  auto quantize = [](double v) {
    const int q = static_cast<int>(v * 255.0 + 0.5);
    return std::clamp(q, 0, 255);
  };
  if (binary) {
    std::string data;
    data.reserve(img.pixels.size());
    for (double v : img.pixels) data.push_back(static_cast<char>(quantize(v)));
    os << data;
  } else {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        if (x) os << ' ';
        os << quantize(img.at(x, y));
      }
      os << '\n';
    }
  }
  return os.str();
}

inline void pgm_save(const GrayImage& img, const std::string& path,
                     const std::string& comment = "", bool binary = true) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("pgm_save: cannot open " + path);
  f << pgm_encode(img, comment, binary);
}

inline GrayImage pgm_decode(const std::string& bytes) {
  std::istringstream is(bytes);
  std::string magic;
  is >> magic;
  if (magic != "P2" && magic != "P5")
    throw ValidationError("pgm: unsupported magic '" + magic + "'");
  auto next_token = [&is]() {
    std::string tok;
    while (true) {
      is >> tok;
      if (!is) throw ValidationError("pgm: truncated header");
      if (tok[0] == '#') {
        std::string rest;
        std::getline(is, rest);
        continue;
      }
      return tok;
    }
  };
  // skip comments between header tokens
  int c = is.peek();
  while (c == '\n' || c == '\r' || c == ' ' || c == '#') {
    if (c == '#') {
      std::string rest;
      std::getline(is, rest);
    } else {
      is.get();
    }
    c = is.peek();
  }
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw ValidationError("pgm: bad dimensions or maxval");
  GrayImage img(w, h);
  if (magic == "P5") {
    is.get();  // single whitespace after maxval
    std::string data(static_cast<size_t>(w) * h, '\0');
    is.read(data.data(), static_cast<std::streamsize>(data.size()));
    if (is.gcount() != static_cast<std::streamsize>(data.size()))
      throw ValidationError("pgm: truncated pixel data");
    for (size_t i = 0; i < data.size(); ++i)
      img.pixels[i] = static_cast<unsigned char>(data[i]) / static_cast<double>(maxval);
  } else {
    for (size_t i = 0; i < img.pixels.size(); ++i) {
      const int v = std::stoi(next_token());
      img.pixels[i] = v / static_cast<double>(maxval);
    }
  }
  return img;
}

inline GrayImage pgm_load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("pgm_load: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return pgm_decode(ss.str());
}

inline GrayImage mask_to_image(const Mask& m) {
  GrayImage img(m.width, m.height);
  for (size_t i = 0; i < m.bits.size(); ++i) img.pixels[i] = m.bits[i] ? 1.0 : 0.0;
  return img;
}

inline Mask image_to_mask(const GrayImage& img) {
  Mask m(img.width, img.height);
  for (size_t i = 0; i < img.pixels.size(); ++i) m.bits[i] = img.pixels[i] > 0.5 ? 1 : 0;
  return m;
}

}  // namespace mirrorfield
