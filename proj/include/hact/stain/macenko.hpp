#pragma once

// Reference-free Macenko stain normalization.
//
// Pixels are mapped to optical density (OD); the foreground OD cloud is
// projected onto the plane of its two leading singular vectors, and the
// robust extreme angles in that plane give the Hematoxylin and Eosin
// directions. Normalization re-expresses every foreground pixel in a target
// basis after matching 99th-percentile stain concentrations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hact/core/error.hpp"
#include "hact/core/tensor.hpp"
#include "hact/io/image.hpp"

namespace hact::stain {

inline constexpr double kDefaultBackgroundThreshold = 0.15;
inline constexpr double kDefaultAnglePercentile = 1.0;
inline constexpr double kConcentrationPercentile = 99.0;

/// Two unit stain directions in OD space (column 0 = Hematoxylin,
/// column 1 = Eosin) and the 99th-percentile concentration of each stain.
struct StainBasis {
  std::array<std::array<double, 3>, 2> stain_vectors{};
  std::array<double, 2> max_concentrations{};

  void validate() const {
    for (const auto& v : stain_vectors) {
      double n2 = 0.0;
      for (double c : v) {
        require(c >= 0.0, Errc::invalid_argument, "stain vector has a negative component");
        n2 += c * c;
      }
      require(std::abs(std::sqrt(n2) - 1.0) < 1e-6, Errc::invalid_argument,
              "stain vector is not unit length");
    }
    for (double m : max_concentrations)
      require(m > 0.0, Errc::invalid_argument, "max concentration must be positive");
  }
};

struct OdResult {
  Tensor od_matrix;                    // N x 3, foreground rows only
  std::vector<std::uint8_t> foreground;  // per pixel, 1 = tissue
};

inline double optical_density(std::uint8_t v) {
  return -std::log10((static_cast<double>(v) + 1.0) / 256.0);
}

/// Percentile with linear interpolation between closest ranks. Reorders `v`.
inline double percentile(std::vector<double>& v, double pct) {
  require(!v.empty(), Errc::invalid_argument, "percentile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = pct / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

inline OdResult od_transform(const RgbImage& image,
                             double background_threshold = kDefaultBackgroundThreshold) {
  image.validate();
  require(background_threshold > 0.0, Errc::invalid_argument, "background threshold must be > 0");
  std::array<double, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = optical_density(static_cast<std::uint8_t>(v));

  OdResult out;
  out.foreground.assign(image.pixel_count(), 0);
  std::vector<double> rows;
  rows.reserve(image.pixel_count() * 3);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const auto* p = &image.data[i * 3];
    const double r = lut[p[0]], g = lut[p[1]], b = lut[p[2]];
    if (r > background_threshold && g > background_threshold && b > background_threshold) {
      out.foreground[i] = 1;
      rows.insert(rows.end(), {r, g, b});
    }
  }
  if (rows.empty()) fail(Errc::no_tissue, "image contains no tissue: every pixel is background");
  const std::size_t n = rows.size() / 3;
  out.od_matrix = Tensor({n, 3}, std::move(rows));
  return out;
}

namespace detail {

inline Eigen::Matrix<double, 3, 2> as_matrix(const StainBasis& b) {
  Eigen::Matrix<double, 3, 2> m;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 3; ++i) m(i, j) = b.stain_vectors[j][i];
  return m;
}

/// Least-squares concentrations of each OD row, clamped at zero. Row-major N x 2.
inline std::vector<double> concentrations(const Tensor& od, const Eigen::Matrix<double, 3, 2>& stains) {
  const Eigen::Matrix<double, 2, 3> pinv =
      (stains.transpose() * stains).inverse() * stains.transpose();
  std::vector<double> c(od.rows() * 2);
  for (std::size_t i = 0; i < od.rows(); ++i) {
    const Eigen::Vector3d x(od(i, 0), od(i, 1), od(i, 2));
    const Eigen::Vector2d s = pinv * x;
    c[2 * i] = std::max(0.0, s[0]);
    c[2 * i + 1] = std::max(0.0, s[1]);
  }
  return c;
}

inline std::array<double, 2> max_concentrations(const std::vector<double>& conc) {
  std::array<double, 2> out{};
  std::vector<double> buf(conc.size() / 2);
  for (int s = 0; s < 2; ++s) {
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = conc[2 * i + s];
    out[s] = percentile(buf, kConcentrationPercentile);
  }
  return out;
}

}  // namespace detail

inline StainBasis estimate_stain_basis(const Tensor& od, double angle_percentile = kDefaultAnglePercentile) {
  require(od.cols() == 3, Errc::shape_mismatch, "OD matrix must have 3 columns");
  require(od.rows() >= 3, Errc::invalid_argument, "need at least 3 OD rows to estimate stains");
  require(angle_percentile > 0.0 && angle_percentile < 50.0, Errc::invalid_argument,
          "angle percentile must lie in (0, 50)");

  // Right singular vectors of the OD matrix = eigenvectors of its Gram matrix.
  const auto view = hact::detail::view(od);
  const Eigen::Matrix3d gram = view.transpose() * view;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(gram);
  const Eigen::Vector3d evals = eig.eigenvalues();  // ascending
  if (!(evals[2] > 0.0) || evals[1] <= 1e-8 * evals[2])
    fail(Errc::degenerate_stain, "degenerate stain estimate: OD cloud is rank-deficient");

  Eigen::Vector3d v1 = eig.eigenvectors().col(2);
  Eigen::Vector3d v2 = eig.eigenvectors().col(1);
  if (v1.sum() < 0) v1 = -v1;
  if (v2.sum() < 0) v2 = -v2;

  std::vector<double> angles(od.rows());
  for (std::size_t i = 0; i < od.rows(); ++i) {
    const Eigen::Vector3d x(od(i, 0), od(i, 1), od(i, 2));
    angles[i] = std::atan2(x.dot(v2), x.dot(v1));
  }
  const double lo = percentile(angles, angle_percentile);
  const double hi = percentile(angles, 100.0 - angle_percentile);
  if (hi - lo < 1e-9) fail(Errc::degenerate_stain, "degenerate stain estimate: no angular spread");

  auto direction = [&](double phi) {
    Eigen::Vector3d d = v1 * std::cos(phi) + v2 * std::sin(phi);
    d = d.cwiseMax(0.0);
    const double n = d.norm();
    if (n <= 0.0) fail(Errc::degenerate_stain, "degenerate stain estimate: stain vector vanished");
    return Eigen::Vector3d(d / n);
  };
  Eigen::Vector3d a = direction(lo);
  Eigen::Vector3d b = direction(hi);
  // Hematoxylin absorbs more in blue than Eosin does.
  if (b[2] > a[2]) std::swap(a, b);

  StainBasis basis;
  for (int i = 0; i < 3; ++i) {
    basis.stain_vectors[0][i] = a[i];
    basis.stain_vectors[1][i] = b[i];
  }
  const Eigen::Matrix<double, 3, 2> m = detail::as_matrix(basis);
  if (std::abs(m.col(0).dot(m.col(1))) > 1.0 - 1e-10)
    fail(Errc::degenerate_stain, "degenerate stain estimate: stain vectors coincide");
  basis.max_concentrations = detail::max_concentrations(detail::concentrations(od, m));
  if (!(basis.max_concentrations[0] > 0.0) || !(basis.max_concentrations[1] > 0.0))
    fail(Errc::degenerate_stain, "degenerate stain estimate: a stain has zero concentration");
  return basis;
}

struct NormalizeOptions {
  double background_threshold = kDefaultBackgroundThreshold;
  double angle_percentile = kDefaultAnglePercentile;
};

inline RgbImage normalize_image(const RgbImage& image, const StainBasis& target,
                                const NormalizeOptions& opt = {}) {
  target.validate();
  const OdResult od = od_transform(image, opt.background_threshold);
  const StainBasis source = estimate_stain_basis(od.od_matrix, opt.angle_percentile);

  const auto conc = detail::concentrations(od.od_matrix, detail::as_matrix(source));
  const double scale_h = target.max_concentrations[0] / source.max_concentrations[0];
  const double scale_e = target.max_concentrations[1] / source.max_concentrations[1];
  const auto tm = detail::as_matrix(target);

  RgbImage out = image;
  std::size_t row = 0;
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    if (!od.foreground[i]) continue;
    const double ch = conc[2 * row] * scale_h;
    const double ce = conc[2 * row + 1] * scale_e;
    ++row;
    for (int c = 0; c < 3; ++c) {
      const double d = tm(c, 0) * ch + tm(c, 1) * ce;
      const double v = 256.0 * std::pow(10.0, -d) - 1.0;
      out.data[i * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace hact::stain
