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
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperwalk/error.hpp"

namespace hyperwalk {

//---------------------------------------------------------------------------//
// Model parameters
//---------------------------------------------------------------------------//

/// Scalar parameters of the disordered chain at a reference energy.
///
/// The reference energy lambda0 is parametrized as 2 cos(theta) with theta in
/// (0, pi); rho = 1/sqrt(4 - lambda0^2) = 1/(2 sin theta) and z = e^{i theta}.
/// Instances are only produced by derive_params, so every live object has
/// passed the validity checks.
class ModelParams {
 public:
  double sigma() const noexcept { return sigma_; }
  double lambda0() const noexcept { return lambda0_; }
  double c0() const noexcept { return c0_; }
  double theta() const noexcept { return theta_; }
  double rho() const noexcept { return rho_; }
  std::complex<double> z() const noexcept { return z_; }

  double sin_theta() const noexcept { return z_.imag(); }
  double cos_theta() const noexcept { return z_.real(); }
  double sin_2theta() const noexcept { return 2.0 * z_.real() * z_.imag(); }

  friend ModelParams derive_params(double lambda0, double sigma, double c0);

 private:
  ModelParams() = default;

  double sigma_ = 0.0;
  double lambda0_ = 0.0;
  double c0_ = 1.0;
  double theta_ = 0.0;
  double rho_ = 0.0;
  std::complex<double> z_{1.0, 0.0};
};

inline ModelParams derive_params(double lambda0, double sigma, double c0) {
  if (!std::isfinite(lambda0) || !(std::abs(lambda0) < 2.0) || lambda0 == 0.0) {
    throw Error(ErrorKind::DegenerateEnergy,
                "lambda0 must lie in (-2,0) or (0,2), got " + std::to_string(lambda0));
  }
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "sigma must be finite and >= 0");
  }
  if (!std::isfinite(c0) || c0 < 1.0) {
    throw Error(ErrorKind::InvalidBound,
                "c0 must be >= 1 (a mean-0, variance-1 law cannot be bounded by less)");
  }
  ModelParams p;
  p.lambda0_ = lambda0;
  p.sigma_ = sigma;
  p.c0_ = c0;
  // (2 - l)(2 + l) keeps full relative accuracy near the band edges.
  const double root = std::sqrt((2.0 - lambda0) * (2.0 + lambda0));
  p.rho_ = 1.0 / root;
  p.z_ = {lambda0 / 2.0, root / 2.0};
  p.theta_ = std::atan2(p.z_.imag(), p.z_.real());
  return p;
}

/// Largest coupling for which the backtrack tail theorem applies:
/// 2 sin(theta) |sin 2theta| / (460 c0^3).
inline double sigma_threshold(const ModelParams& p) {
  return 2.0 * p.sin_theta() * std::abs(p.sin_2theta()) / (460.0 * std::pow(p.c0(), 3));
}

/// Largest drift allowed by the backtrack tail theorem:
/// 6 c0^3 rho^3 sigma^3 / |sin 2theta|.
inline double kappa_max(const ModelParams& p) {
  return 6.0 * std::pow(p.c0() * p.rho() * p.sigma(), 3) / std::abs(p.sin_2theta());
}

//---------------------------------------------------------------------------//
// Counter-based random numbers
//---------------------------------------------------------------------------//

/// Philox4x32-10 block function (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/// One reproducible random stream. Draw i is a pure function of
/// (seed, stream_id, i): two 64-bit draws come out of each Philox block whose
/// counter holds (i / 2, stream_id) and whose key is the seed.
class RngStream {
 public:
  constexpr RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t stream_id() const noexcept { return stream_id_; }

  constexpr std::array<std::uint64_t, 2> block(std::uint64_t block_index) const noexcept {
    const auto out = Philox4x32::block(
        {static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
         static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    return {std::uint64_t{out[0]} | (std::uint64_t{out[1]} << 32),
            std::uint64_t{out[2]} | (std::uint64_t{out[3]} << 32)};
  }

  constexpr std::uint64_t bits(std::uint64_t index) const noexcept {
    return block(index / 2)[index % 2];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  static constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(std::uint64_t index) const noexcept { return to_unit(bits(index)); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

//---------------------------------------------------------------------------//
// Noise distributions
//---------------------------------------------------------------------------//

struct Atom {
  double value;
  double probability;
};

/// Law of the single-site potential: mean 0, variance 1, support in [-c0, c0].
class NoiseDistribution {
 public:
  enum class Kind { Rademacher, UniformSymmetric, Discrete };

  static NoiseDistribution rademacher() {
    return NoiseDistribution(Kind::Rademacher, {{-1.0, 0.5}, {1.0, 0.5}}, 1.0);
  }

  /// Uniform on [-sqrt3, sqrt3].
  static NoiseDistribution uniform() {
    return NoiseDistribution(Kind::UniformSymmetric, {}, std::numbers::sqrt3);
  }

  /// Finite law given by (value, probability) atoms. The atoms must sum to
  /// one and have mean 0 and variance 1 to 1e-12.
  static NoiseDistribution atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) {
      throw Error(ErrorKind::InvalidArgument, "atom list is empty");
    }
    double total = 0.0, mean = 0.0, second = 0.0, bound = 0.0;
    for (const auto& a : atoms) {
      if (!std::isfinite(a.value) || !(a.probability > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "atoms need finite values and positive weights");
      }
      total += a.probability;
      mean += a.probability * a.value;
      second += a.probability * a.value * a.value;
      bound = std::max(bound, std::abs(a.value));
    }
    constexpr double tol = 1e-12;
    if (std::abs(total - 1.0) > tol) {
      throw Error(ErrorKind::InvalidArgument, "atom probabilities must sum to 1");
    }
    if (std::abs(mean) > tol) {
      throw Error(ErrorKind::InvalidArgument, "atom law must have mean 0");
    }
    if (std::abs(second - 1.0) > tol) {
      throw Error(ErrorKind::InvalidArgument, "atom law must have variance 1");
    }
    if (bound < 1.0) {
      throw Error(ErrorKind::InvalidBound, "atom bound below 1");
    }
    return NoiseDistribution(Kind::Discrete, std::move(atoms), bound);
  }

  Kind kind() const noexcept { return kind_; }
  double c0() const noexcept { return c0_; }
  bool is_finite() const noexcept { return kind_ != Kind::UniformSymmetric; }

  /// Atoms of a finite law; empty for the uniform law.
  std::span<const Atom> support() const noexcept { return atoms_; }

  /// Inverse-CDF map from a uniform variate in [0, 1).
  double quantile(double u) const noexcept {
    switch (kind_) {
      case Kind::Rademacher:
        return u < 0.5 ? -1.0 : 1.0;
      case Kind::UniformSymmetric:
        return std::numbers::sqrt3 * (2.0 * u - 1.0);
      case Kind::Discrete:
        break;
    }
    double cumulative = 0.0;
    for (std::size_t i = 0; i + 1 < atoms_.size(); ++i) {
      cumulative += atoms_[i].probability;
      if (u < cumulative) return atoms_[i].value;
    }
    return atoms_.back().value;
  }

  double draw(const RngStream& rng, std::uint64_t index) const noexcept {
    return quantile(rng.uniform(index));
  }

  std::string name() const {
    switch (kind_) {
      case Kind::Rademacher: return "rademacher";
      case Kind::UniformSymmetric: return "uniform";
      case Kind::Discrete: return "atoms";
    }
    return "unknown";
  }

 private:
  NoiseDistribution(Kind kind, std::vector<Atom> atoms, double c0)
      : kind_(kind), atoms_(std::move(atoms)), c0_(c0) {}

  Kind kind_;
  std::vector<Atom> atoms_;
  double c0_;
};

/// Sequential reader over one stream; draws index offset, offset+1, ...
class NoiseSource {
 public:
  NoiseSource(NoiseDistribution dist, RngStream rng, std::uint64_t offset = 0)
      : dist_(std::move(dist)), rng_(rng), index_(offset) {}

  double next() noexcept {
    const std::uint64_t i = index_++;
    if (i / 2 != cached_block_) {
      cached_block_ = i / 2;
      cache_ = rng_.block(cached_block_);
    }
    return dist_.quantile(RngStream::to_unit(cache_[i % 2]));
  }

  std::uint64_t position() const noexcept { return index_; }

 private:
  NoiseDistribution dist_;
  RngStream rng_;
  std::uint64_t index_;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<std::uint64_t, 2> cache_{};
};

inline std::vector<double> sample_noise(const NoiseDistribution& dist, const RngStream& rng,
                                        std::size_t n, std::uint64_t offset = 0) {
  if (n == 0) {
    throw Error(ErrorKind::InvalidArgument, "sample_noise needs n >= 1");
  }
  std::vector<double> out(n);
  NoiseSource src(dist, rng, offset);
  for (auto& v : out) v = src.next();
  return out;
}

}  // namespace hyperwalk
