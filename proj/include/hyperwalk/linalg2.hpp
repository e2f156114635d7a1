/*
   Copyright 2026 The hyperwalk Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "hyperwalk/error.hpp"
#include "hyperwalk/model.hpp"

namespace hyperwalk {

struct Vec2 {
  double v1 = 0.0;
  double v2 = 0.0;

  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

/// Real 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static constexpr Mat2 identity() noexcept { return {}; }

  constexpr double det() const noexcept { return a * d - b * c; }
  constexpr double trace() const noexcept { return a + d; }

  /// Inverse of a determinant-one matrix (the adjugate).
  constexpr Mat2 inverse_unimodular() const noexcept { return {d, -b, -c, a}; }

  Mat2 inverse() const {
    const double D = det();
    if (D == 0.0) throw Error(ErrorKind::InvalidArgument, "singular 2x2 matrix");
    return {d / D, -b / D, -c / D, a / D};
  }

  double max_abs() const noexcept {
    return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
  }

  constexpr Mat2 scaled(double s) const noexcept { return {a * s, b * s, c * s, d * s}; }

  friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) noexcept {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c,
            m.c * n.b + m.d * n.d};
  }

  friend constexpr Vec2 operator*(const Mat2& m, const Vec2& v) noexcept {
    return {m.a * v.v1 + m.b * v.v2, m.c * v.v1 + m.d * v.v2};
  }

  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

/// x + iy with y > 0.
class HalfPlanePoint {
 public:
  HalfPlanePoint(double x, double y) : x_(x), y_(y) {
    if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      throw Error(ErrorKind::LossOfPositivity,
                  "half-plane point needs finite x and y > 0, got y=" + std::to_string(y));
    }
  }
  explicit HalfPlanePoint(std::complex<double> w) : HalfPlanePoint(w.real(), w.imag()) {}

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  std::complex<double> as_complex() const noexcept { return {x_, y_}; }

 private:
  double x_;
  double y_;
};

/// A line through the origin of R^2, stored as a unit vector with v2 >= 0
/// (and v1 > 0 when v2 == 0).
class ProjectivePoint {
 public:
  ProjectivePoint(double v1, double v2) {
    const double n = std::hypot(v1, v2);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorKind::InvalidArgument, "projective point needs a finite nonzero vector");
    }
    // Already-unit vectors are kept as is so canonicalization is idempotent.
    if (std::abs(n - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) {
      v1 /= n;
      v2 /= n;
    }
    if (v2 < 0.0 || (v2 == 0.0 && v1 < 0.0)) {
      v1 = -v1;
      v2 = -v2;
    }
    v_ = {v1, v2 == 0.0 ? 0.0 : v2};
  }
  explicit ProjectivePoint(Vec2 v) : ProjectivePoint(v.v1, v.v2) {}

  Vec2 vector() const noexcept { return v_; }
  bool at_infinity() const noexcept { return v_.v2 == 0.0; }

  /// v1 / v2, or +infinity for the point at infinity.
  double value() const noexcept {
    return at_infinity() ? std::numeric_limits<double>::infinity() : v_.v1 / v_.v2;
  }

  ProjectivePoint transformed(const Mat2& m) const { return ProjectivePoint(m * v_); }

  friend bool operator==(const ProjectivePoint&, const ProjectivePoint&) = default;

 private:
  Vec2 v_;
};

/// (a w + b) / (c w + d). The imaginary part is formed as det * y / |c w + d|^2
/// so that positivity only depends on one rounding step.
inline HalfPlanePoint mobius_apply(const Mat2& m, const HalfPlanePoint& w) {
  const std::complex<double> z = w.as_complex();
  const std::complex<double> num(m.a * z.real() + m.b, m.a * z.imag());
  const std::complex<double> den(m.c * z.real() + m.d, m.c * z.imag());
  const double den2 = std::norm(den);
  const double x = (num * std::conj(den)).real() / den2;
  const double y = m.det() * w.y() / den2;
  if (!(y > 0.0) || !std::isfinite(y) || !std::isfinite(x)) {
    throw Error(ErrorKind::LossOfPositivity, "Mobius image left the upper half plane");
  }
  return HalfPlanePoint(x, y);
}

/// |x - x'| / y, with y taken from the first argument.
inline double d1(const HalfPlanePoint& w, const HalfPlanePoint& w2) noexcept {
  return std::abs(w.x() - w2.x()) / w.y();
}

/// ((x - x')^2 + (y - y')^2) / (y y'); a monotone function of hyperbolic
/// distance (2 (cosh d - 1)), hence Mobius invariant.
inline double d2(const HalfPlanePoint& w, const HalfPlanePoint& w2) noexcept {
  const double dx = w.x() - w2.x();
  const double dy = w.y() - w2.y();
  return (dx * dx + dy * dy) / (w.y() * w2.y());
}

/// Infinitesimal rotation about z with speed lambda:
/// (lambda / sin^2 theta) [[-cos theta, 1], [-1, cos theta]]. Not unimodular.
inline Mat2 rotation_matrix(const ModelParams& p, double lambda) noexcept {
  const double s2 = p.sin_theta() * p.sin_theta();
  const double c = p.cos_theta();
  const double f = lambda / s2;
  return {-c * f, f, -f, c * f};
}

}  // namespace hyperwalk
