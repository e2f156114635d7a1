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

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "hyperwalk/error.hpp"
#include "hyperwalk/linalg2.hpp"
#include "hyperwalk/model.hpp"
#include "hyperwalk/parallel.hpp"
#include "hyperwalk/stats.hpp"

namespace hyperwalk {

/// [[lambda0 + lambda - sigma omega, -1], [1, 0]].
inline Mat2 transfer_matrix(const ModelParams& p, double omega, double lambda) noexcept {
  return {p.lambda0() + lambda - p.sigma() * omega, -1.0, 1.0, 0.0};
}

/// State of the walk X_k + i Y_k = W_k^{-1} o z.
///
/// W holds W_k / exp(log_scale), scaled by powers of two only. The point is
/// kept as (x, log_y) because Y_k decays exponentially.
struct WalkState {
  std::uint64_t k = 0;
  Mat2 W = Mat2::identity();
  double log_scale = 0.0;
  double x = 0.0;
  double log_y = 0.0;
  // |X_k - X_{k-1}| / Y_{k-1}, filled in by advance_walk.
  double jump_ratio = std::numeric_limits<double>::quiet_NaN();

  double y() const noexcept { return std::exp(log_y); }
};

inline WalkState start_walk(const ModelParams& p) noexcept {
  WalkState s;
  s.x = p.cos_theta();
  s.log_y = std::log(p.sin_theta());
  return s;
}

namespace detail {

// Rows (c, d) of adj(W), i.e. of W^{-1} up to scale.
inline std::complex<double> frame_denominator(const Mat2& W, std::complex<double> w) noexcept {
  return -W.c * w + W.a;
}

inline void rescale_pow2(Mat2& W, double& log_scale) noexcept {
  int e = 0;
  std::frexp(W.max_abs(), &e);
  if (e != 0) {
    W = {std::ldexp(W.a, -e), std::ldexp(W.b, -e), std::ldexp(W.c, -e), std::ldexp(W.d, -e)};
    log_scale += e * std::numbers::ln2;
  }
}

}  // namespace detail

/// One step W_{k+1} = T_{k+1} W_k. The new point is W_k^{-1} o (T^{-1} o z),
/// and all increments are formed from the frame denominators so that nothing
/// cancels when Y_k is far below machine epsilon.
inline WalkState advance_walk(const WalkState& s, double omega, const ModelParams& p) {
  const std::complex<double> z = p.z();
  const std::complex<double> shift(p.cos_theta() - p.sigma() * omega, -p.sin_theta());
  const std::complex<double> w1 = 1.0 / shift;  // T^{-1} o z

  const std::complex<double> e0 = detail::frame_denominator(s.W, z);
  const std::complex<double> e1 = detail::frame_denominator(s.W, w1);
  const double dlog_y = std::log(std::norm(e0)) - std::log(std::norm(e1)) - std::log(std::norm(shift));
  if (!std::isfinite(dlog_y)) {
    throw Error(ErrorKind::LossOfPositivity, "walk increment is not finite");
  }

  WalkState next;
  next.k = s.k + 1;
  next.W = transfer_matrix(p, omega, 0.0) * s.W;
  next.log_scale = s.log_scale;
  detail::rescale_pow2(next.W, next.log_scale);
  next.log_y = s.log_y + dlog_y;
  next.jump_ratio = std::abs(((w1 - z) * std::conj(e0) / e1).real()) / p.sin_theta();

  const std::complex<double> num = next.W.d * z - next.W.b;
  const std::complex<double> den = detail::frame_denominator(next.W, z);
  next.x = (num * std::conj(den)).real() / std::norm(den);
  return next;
}

/// log Im(W_k^{-1} o z) evaluated from the stored product instead of the
/// accumulated increments.
inline double direct_log_y(const WalkState& s, const ModelParams& p) noexcept {
  return std::log(p.sin_theta()) - 2.0 * s.log_scale -
         std::log(std::norm(detail::frame_denominator(s.W, p.z())));
}

/// States k = 0..n for the given noise.
inline std::vector<WalkState> walk_trajectory(const ModelParams& p, std::span<const double> omegas) {
  std::vector<WalkState> out;
  out.reserve(omegas.size() + 1);
  out.push_back(start_walk(p));
  for (double w : omegas) out.push_back(advance_walk(out.back(), w, p));
  return out;
}

/// Jump bound sqrt(5)/2 sigma c0^2 / sin^2 theta.
inline double m_bound(const ModelParams& p) noexcept {
  return 0.5 * std::sqrt(5.0) * p.sigma() * p.c0() * p.c0() / (p.sin_theta() * p.sin_theta());
}

/// Twice m_bound; the weaker constant reached by the end of the argument.
inline double m_bound_proof(const ModelParams& p) noexcept { return 2.0 * m_bound(p); }

/// max_k |X_{k+1} - X_k| / Y_k. Consecutive states produced by advance_walk
/// contribute their recorded ratio; other pairs use the plain difference.
inline double max_jump_ratio(std::span<const WalkState> traj) {
  if (traj.size() < 2) throw Error(ErrorKind::InvalidArgument, "trajectory needs >= 2 states");
  double best = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const WalkState& prev = traj[i - 1];
    const WalkState& cur = traj[i];
    double r;
    if (cur.k == prev.k + 1 && !std::isnan(cur.jump_ratio)) {
      r = cur.jump_ratio;
    } else {
      r = std::abs(cur.x - prev.x) / prev.y();
    }
    best = std::max(best, r);
  }
  return best;
}

/// Streaming version of max_jump_ratio over a fresh walk.
inline double walk_max_jump_ratio(const ModelParams& p, std::span<const double> omegas) {
  WalkState s = start_walk(p);
  double best = 0.0;
  for (double w : omegas) {
    s = advance_walk(s, w, p);
    best = std::max(best, s.jump_ratio);
  }
  return best;
}

//---------------------------------------------------------------------------//
// Eigenvalue counting by sign changes of the boundary datum
//---------------------------------------------------------------------------//

struct PassCount {
  std::size_t passes = 0;
  std::size_t cells = 0;
  // Optional: cumulative rotation difference (units of pi) of (phi_{k+1}, phi_k)
  // between the two interval ends, k = 1..n.
  std::vector<double> displacement;
};

namespace detail {

struct BoundaryDatum {
  int sign = 1;             // sign of phi_{n+1}(E), left limit at zeros
  std::size_t below = 0;    // sign agreements of phi_1..phi_{n+1} = #{eig < E}
};

inline BoundaryDatum boundary_datum(double sigma, std::span<const double> omegas, double E,
                                    std::vector<double>* rotation = nullptr) {
  double u1 = 1.0, u2 = 0.0;  // (phi_{k+1}, phi_k)
  int prev_sign = 1;
  std::size_t agreements = 0;
  double angle = 0.0;
  constexpr double big = 0x1.0p500, small = 0x1.0p-500;
  for (double w : omegas) {
    const double t = E - sigma * w;
    const double n1 = t * u1 - u2;
    if (rotation) {
      angle += std::atan2(u1 * u1 - t * u1 * u2 + u2 * u2, u1 * n1 + u2 * u1);
      rotation->push_back(angle);
    }
    u2 = u1;
    u1 = n1;
    const int s = u1 > 0.0 ? 1 : (u1 < 0.0 ? -1 : -prev_sign);
    if (s == prev_sign) ++agreements;
    prev_sign = s;
    const double m = std::max(std::abs(u1), std::abs(u2));
    if (m > big || m < small) {
      int e = 0;
      std::frexp(m, &e);
      u1 = std::ldexp(u1, -e);
      u2 = std::ldexp(u2, -e);
    }
  }
  return {prev_sign, agreements};
}

}  // namespace detail

inline constexpr std::size_t kMaxPassCells = std::size_t{1} << 20;

/// Number of eigenvalues in [lambda0, lambda0 + lambda] obtained by sweeping
/// the energy and counting sign changes of phi_{n+1}. Cells whose endpoint
/// oscillation counts differ by two or more are bisected first, so each
/// remaining cell holds at most one sign change.
inline PassCount count_passes(const ModelParams& p, std::span<const double> omegas, double lambda,
                              bool with_displacement = false) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "interval width must be > 0");
  if (omegas.empty()) throw Error(ErrorKind::InvalidArgument, "need n >= 1");
  const double lo = p.lambda0();
  const double hi = std::nextafter(lo + lambda, std::numeric_limits<double>::infinity());

  PassCount out;
  std::vector<double> rot_lo, rot_hi;
  const auto d_lo = detail::boundary_datum(p.sigma(), omegas, lo, with_displacement ? &rot_lo : nullptr);
  const auto d_hi = detail::boundary_datum(p.sigma(), omegas, hi, with_displacement ? &rot_hi : nullptr);
  if (with_displacement) {
    out.displacement.resize(rot_lo.size());
    for (std::size_t k = 0; k < rot_lo.size(); ++k) {
      out.displacement[k] = (rot_hi[k] - rot_lo[k]) / std::numbers::pi;
    }
  }

  struct Cell {
    double a, b;
    detail::BoundaryDatum da, db;
  };
  std::vector<Cell> stack{{lo, hi, d_lo, d_hi}};
  std::size_t cells = 1;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    if (c.db.below < c.da.below + 2) {
      if (c.da.sign != c.db.sign) ++out.passes;
      continue;
    }
    const double mid = c.a + 0.5 * (c.b - c.a);
    if (!(mid > c.a && mid < c.b)) {
      throw Error(ErrorKind::RefinementLimit, "eigenvalue cluster below floating-point resolution");
    }
    if (++cells > kMaxPassCells) {
      throw Error(ErrorKind::RefinementLimit, "energy sweep exceeded 2^20 cells");
    }
    const auto dm = detail::boundary_datum(p.sigma(), omegas, mid);
    stack.push_back({mid, c.b, dm, c.db});
    stack.push_back({c.a, mid, c.da, dm});
  }
  out.cells = cells;
  return out;
}

//---------------------------------------------------------------------------//
// Lyapunov exponent
//---------------------------------------------------------------------------//

struct LyapunovEstimate {
  double gamma_hat = 0.0;
  double std_error = 0.0;
  std::vector<double> per_rep;
};

/// (1/n) log ||W_n e_1|| for one noise stream, renormalizing every step.
inline double lyapunov_single(const ModelParams& p, const NoiseDistribution& dist, RngStream rng,
                              std::size_t n) {
  NoiseSource src(dist, rng);
  double v1 = 1.0, v2 = 0.0, acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = p.lambda0() - p.sigma() * src.next();
    const double n1 = t * v1 - v2;
    v2 = v1;
    v1 = n1;
    const double nrm = std::hypot(v1, v2);
    acc += std::log(nrm);
    v1 /= nrm;
    v2 /= nrm;
  }
  return acc / static_cast<double>(n);
}

/// Realization r uses stream (seed, r).
inline LyapunovEstimate lyapunov_estimate(const ModelParams& p, const NoiseDistribution& dist,
                                          std::size_t n, std::size_t reps, std::uint64_t seed,
                                          unsigned threads = 1) {
  if (n < 1000) throw Error(ErrorKind::InvalidArgument, "lyapunov_estimate needs n >= 1000");
  if (reps < 2) throw Error(ErrorKind::InvalidArgument, "lyapunov_estimate needs reps >= 2");
  LyapunovEstimate out;
  out.per_rep.resize(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    out.per_rep[r] = lyapunov_single(p, dist, RngStream(seed, r), n);
  });
  const auto st = summarize(out.per_rep);
  out.gamma_hat = st.mean();
  out.std_error = st.stderr_mean();
  return out;
}

//---------------------------------------------------------------------------//
// Largest rise of the drifted log Y path after time 1
//---------------------------------------------------------------------------//

/// max_{1 <= k <= n} (D_k - D_1) with D_k = log Y_k + kappa k, for the walk
/// driven by draws 0..n-1 of `rng`.
///
/// Uses Y_k = sin(theta) / ||A u_k||^2 with u_k = W_k e_1 and
/// A = [[1, -cos theta], [0, sin theta]], and folds the drift into the
/// recursion as a factor e^{-kappa/2} per step, so the inner loop needs no
/// logarithms.
inline double max_rise_from_first(const ModelParams& p, const NoiseDistribution& dist, RngStream rng,
                                  std::size_t n, double kappa) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "need n >= 1");
  NoiseSource src(dist, rng);
  const double decay = std::exp(-0.5 * kappa);
  const double c = p.cos_theta(), s = p.sin_theta();
  const double l0 = p.lambda0(), sigma = p.sigma();
  constexpr double big = 0x1.0p400, small = 0x1.0p-400;

  double u1 = 1.0, u2 = 0.0;
  double log_shift = 0.0;  // u = u_k e^{-kappa k/2} e^{log_shift}
  double q_min = std::numeric_limits<double>::infinity();
  double r_min = std::numeric_limits<double>::infinity();
  double r_first = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = l0 - sigma * src.next();
    const double n1 = decay * (t * u1 - u2);
    u2 = decay * u1;
    u1 = n1;
    const double a = u1 - c * u2, b = s * u2;
    const double q = a * a + b * b;
    if (k == 1) r_first = std::log(q) - 2.0 * log_shift;
    if (q < q_min) q_min = q;
    if (q > big || q < small) {
      r_min = std::min(r_min, std::log(q_min) - 2.0 * log_shift);
      int e = 0;
      std::frexp(std::max(std::abs(u1), std::abs(u2)), &e);
      u1 = std::ldexp(u1, -e);
      u2 = std::ldexp(u2, -e);
      log_shift -= e * std::numbers::ln2;
      q_min = std::numeric_limits<double>::infinity();
    }
  }
  if (q_min < std::numeric_limits<double>::infinity()) {
    r_min = std::min(r_min, std::log(q_min) - 2.0 * log_shift);
  }
  return std::max(0.0, r_first - r_min);
}

}  // namespace hyperwalk
