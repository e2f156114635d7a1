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
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hyperwalk/error.hpp"
#include "hyperwalk/linalg2.hpp"
#include "hyperwalk/model.hpp"
#include "hyperwalk/parallel.hpp"
#include "hyperwalk/stats.hpp"

namespace hyperwalk {

/// Radius and phase (r_k, e^{2 i alpha_k}) of the Figotin-Pastur recursion,
/// with the radius kept as a logarithm.
struct PruferState {
  std::uint64_t k = 0;
  double log_r = 0.0;
  std::complex<double> phase{1.0, 0.0};
  // Smallest |1 + i s (1 - z^2 e^{2 i alpha})| met so far.
  double min_denominator = std::numeric_limits<double>::infinity();
};

/// Initial state matched to the walk: alpha_0 = 0 and r_0 = 1 / sin(theta).
inline PruferState start_prufer(const ModelParams& p) noexcept {
  PruferState s;
  s.log_r = -std::log(p.sin_theta());
  return s;
}

/// The recursion reproduces r_k = 1/Y_k of the walk built from
/// [[lambda - sigma omega, -1], [1, 0]] when fed the reflected noise.
constexpr double walk_to_prufer_drive(double omega) noexcept { return -omega; }

/// X = 2 s^2 + 2 s sin(2 alpha + 2 theta) - 2 s^2 cos(2 alpha + 2 theta), s = sigma omega rho;
/// r_{k+1} = r_k (1 + X).
inline double prufer_x(std::complex<double> phase, double omega, const ModelParams& p) noexcept {
  const double s = p.sigma() * omega * p.rho();
  const std::complex<double> u = phase * p.z() * p.z();
  return 2.0 * s * s + 2.0 * s * u.imag() - 2.0 * s * s * u.real();
}

inline constexpr double kMinPruferDenominator = 0.1;

/// Phase update e^{2 i alpha'} = u + i s (u - 1)^2 / (1 + i s (1 - u)), u = z^2 e^{2 i alpha},
/// which simplifies to (u + i s (1 - u)) / (1 + i s (1 - u)).
inline std::complex<double> prufer_phase_map(std::complex<double> phase, double omega,
                                             const ModelParams& p, double* denominator = nullptr) {
  const double s = p.sigma() * omega * p.rho();
  const std::complex<double> u = phase * p.z() * p.z();
  const std::complex<double> is(0.0, s);
  const std::complex<double> den = 1.0 + is * (1.0 - u);
  const double den_abs = std::abs(den);
  if (denominator) *denominator = den_abs;
  if (den_abs < kMinPruferDenominator) {
    throw Error(ErrorKind::DenominatorNearZero,
                "phase recursion denominator " + std::to_string(den_abs) + " < 0.1");
  }
  const std::complex<double> q = (u + is * (1.0 - u)) / den;
  return q / std::abs(q);
}

/// Phase before a step, given the phase after it and the noise used.
inline std::complex<double> prufer_phase_preimage(std::complex<double> next, double omega,
                                                  const ModelParams& p) noexcept {
  const double s = p.sigma() * omega * p.rho();
  const std::complex<double> is(0.0, s);
  const std::complex<double> u = ((1.0 + is) * next - is) / (is * next + 1.0 - is);
  const std::complex<double> q = u * std::conj(p.z() * p.z());
  return q / std::abs(q);
}

inline PruferState prufer_step(const PruferState& s, double omega, const ModelParams& p) {
  double den = 0.0;
  PruferState next;
  next.phase = prufer_phase_map(s.phase, omega, p, &den);
  next.k = s.k + 1;
  next.log_r = s.log_r + std::log1p(prufer_x(s.phase, omega, p));
  next.min_denominator = std::min(s.min_denominator, den);
  return next;
}

/// States k = 0..n, driven by omegas as given.
inline std::vector<PruferState> prufer_trajectory(const ModelParams& p, std::span<const double> omegas) {
  std::vector<PruferState> out;
  out.reserve(omegas.size() + 1);
  out.push_back(start_prufer(p));
  for (double w : omegas) out.push_back(prufer_step(out.back(), w, p));
  return out;
}

/// Both sides of Im(M^{-1} o i) = ||M (1,0)^t||^{-2} for det M = 1.
struct CuteTrick {
  double lhs;
  double rhs;
};

inline CuteTrick verify_cutetrick(const Mat2& m) {
  if (std::abs(m.det() - 1.0) > 1e-10) {
    throw Error(ErrorKind::InvalidArgument, "matrix must have unit determinant");
  }
  const double lhs = mobius_apply(m.inverse_unimodular(), HalfPlanePoint(0.0, 1.0)).y();
  const double rhs = 1.0 / (m.a * m.a + m.c * m.c);
  return {lhs, rhs};
}

//---------------------------------------------------------------------------//
// Boundary terms F_k, G_k
//---------------------------------------------------------------------------//

struct CorrectionSums {
  double F = 0.0;
  double G = 0.0;
};

/// F = -2 rho^2 Re[z^2 (q_a - z^2 q) / (1 - z^2)] with anchor phase q_a.
inline double correction_F(std::complex<double> anchor, std::complex<double> q,
                           const ModelParams& p) noexcept {
  const std::complex<double> z2 = p.z() * p.z();
  const double rho = p.rho();
  return -2.0 * rho * rho * (z2 * (anchor - z2 * q) / (1.0 - z2)).real();
}

/// G = -2 rho^2 Re[z^4 (q_a^2 - z^4 q^2) / (1 - z^4)].
inline double correction_G(std::complex<double> anchor, std::complex<double> q,
                           const ModelParams& p) noexcept {
  const std::complex<double> z2 = p.z() * p.z();
  const std::complex<double> z4 = z2 * z2;
  const double rho = p.rho();
  return -2.0 * rho * rho * (z4 * (anchor * anchor - z4 * q * q) / (1.0 - z4)).real();
}

/// F_k and G_k for the phase history e^{2 i alpha_1} .. e^{2 i alpha_k}; the
/// first entry is the anchor.
inline CorrectionSums correction_sums(std::span<const std::complex<double>> phases,
                                      const ModelParams& p) {
  if (phases.empty()) throw Error(ErrorKind::InvalidArgument, "empty phase history");
  return {correction_F(phases.front(), phases.back(), p),
          correction_G(phases.front(), phases.back(), p)};
}

//---------------------------------------------------------------------------//
// Drift of log r_k
//---------------------------------------------------------------------------//

struct DriftEstimate {
  double drift = 0.0;  // mean of (log r_n - log r_0) / n
  double std_error = 0.0;
  std::vector<double> per_rep;
};

/// Realization r uses stream (seed, r), reflected as in walk_to_prufer_drive,
/// so it shares its noise with lyapunov_estimate.
inline DriftEstimate prufer_drift_estimate(const ModelParams& p, const NoiseDistribution& dist,
                                           std::size_t n, std::size_t reps, std::uint64_t seed,
                                           unsigned threads = 1) {
  if (n == 0 || reps < 2) throw Error(ErrorKind::InvalidArgument, "need n >= 1 and reps >= 2");
  DriftEstimate out;
  out.per_rep.resize(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    NoiseSource src(dist, RngStream(seed, r));
    PruferState s = start_prufer(p);
    const double start = s.log_r;
    for (std::size_t k = 0; k < n; ++k) s = prufer_step(s, walk_to_prufer_drive(src.next()), p);
    out.per_rep[r] = (s.log_r - start) / static_cast<double>(n);
  });
  const auto st = summarize(out.per_rep);
  out.drift = st.mean();
  out.std_error = st.stderr_mean();
  return out;
}

}  // namespace hyperwalk
