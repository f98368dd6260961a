#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "hact/core/rng.hpp"
#include "hact/io/image.hpp"

namespace hact::testing {

using Vec3 = std::array<double, 3>;

inline Vec3 unit(Vec3 v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

inline double angle_deg(const Vec3& a, const Vec3& b) {
  const Vec3 ua = unit(a), ub = unit(b);
  const double c = ua[0] * ub[0] + ua[1] * ub[1] + ua[2] * ub[2];
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

inline std::uint8_t od_to_byte(double od) {
  const double v = 256.0 * std::pow(10.0, -od) - 1.0;
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

struct TwoStainImage {
  RgbImage image;
  Vec3 h, e;
};

/// Pixels are Beer-Lambert mixtures of two stains: a third mostly H, a third
/// mostly E, a third mixed; `background` of the pixels stay white.
inline TwoStainImage two_stain_image(std::size_t w, std::size_t h_px, Vec3 h, Vec3 e, Rng& rng,
                                     double background = 0.3, double noise = 0.02) {
  TwoStainImage out{RgbImage(w, h_px, 255), unit(h), unit(e)};
  for (std::size_t y = 0; y < h_px; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (rng.uniform() < background) continue;
      double ch = 0, ce = 0;
      switch (rng.index(3)) {
        case 0: ch = rng.uniform(0.6, 1.6); ce = rng.uniform(0.0, 0.05); break;
        case 1: ch = rng.uniform(0.0, 0.05); ce = rng.uniform(1.3, 2.2); break;
        default: ch = rng.uniform(0.3, 1.2); ce = rng.uniform(0.5, 1.5); break;
      }
      ch = std::max(0.0, ch + noise * rng.normal());
      ce = std::max(0.0, ce + noise * rng.normal());
      out.image.set(x, y, od_to_byte(ch * out.h[0] + ce * out.e[0]), od_to_byte(ch * out.h[1] + ce * out.e[1]),
                    od_to_byte(ch * out.h[2] + ce * out.e[2]));
    }
  return out;
}

/// Reference stains used across the tests.
inline const Vec3 kHematoxylin{0.65, 0.70, 0.29};
inline const Vec3 kEosin{0.25, 0.95, 0.15};

/// Random stain pair near the reference ones. Blue OD stays high enough that
/// eosin-only pixels still clear the per-channel foreground threshold, and
/// hematoxylin keeps the larger blue component.
inline std::pair<Vec3, Vec3> jittered_stains(Rng& rng, double amount = 0.08) {
  Vec3 h = kHematoxylin, e = kEosin;
  for (int i = 0; i < 3; ++i) {
    h[i] = std::max(0.05, h[i] + amount * rng.normal());
    e[i] = std::max(0.05, e[i] + amount * rng.normal());
  }
  h[2] = std::max(h[2], 0.18);
  e[2] = std::clamp(e[2], 0.1, 0.6 * h[2]);
  return {unit(h), unit(e)};
}

}  // namespace hact::testing
