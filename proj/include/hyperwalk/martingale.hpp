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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperwalk/backtrack.hpp"
#include "hyperwalk/error.hpp"
#include "hyperwalk/model.hpp"
#include "hyperwalk/parallel.hpp"
#include "hyperwalk/prufer.hpp"
#include "hyperwalk/stats.hpp"

namespace hyperwalk {

/// Coefficient of G in the exponent of Pi_k.
enum class ExponentForm {
  OneMinusHalfDelta,  // F - (1 - delta/2) G
  TwoMinusHalfDelta,  // F - (2 - delta/2) G
};

inline const char* to_string(ExponentForm f) noexcept {
  return f == ExponentForm::OneMinusHalfDelta ? "1-delta/2" : "2-delta/2";
}

struct MartingaleConstants {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0, c7 = 0;
  double c_tilde = 0, c_bar = 0;
  double kappa = 0;
  double delta = 0;
  double window_lower = 0;
  double window_upper = 0.5;
  double bracket = 0;        // c3 + c5 + 2 c7
  double bracket_limit = 0;  // 224 c0^3 rho^3 / |sin 2 theta|
  bool pick_sigma_holds = false;
  ExponentForm form = ExponentForm::OneMinusHalfDelta;

  bool bracket_below_limit() const noexcept { return bracket < bracket_limit; }
  bool window_nonempty() const noexcept { return window_lower <= window_upper; }
  bool delta_in_window() const noexcept {
    return delta >= window_lower && delta <= window_upper;
  }
  double g_factor() const noexcept {
    return (form == ExponentForm::OneMinusHalfDelta ? 1.0 : 2.0) - 0.5 * delta;
  }
};

inline MartingaleConstants derive_constants(const ModelParams& p, double kappa,
                                            ExponentForm form = ExponentForm::OneMinusHalfDelta) {
  const double s = p.sigma(), rho = p.rho(), c0 = p.c0();
  const double st = p.sin_theta(), s2 = std::abs(p.sin_2theta());
  if (s > 2.0 * st * s2 / (10.0 * c0 * c0 * c0) * (1.0 + 1e-12)) {
    throw Error(ErrorKind::HypothesisViolated, "sigma <= 2 sin(theta)|sin(2 theta)|/(10 c0^3) fails");
  }
  if (!(kappa >= 0.0) || kappa > 1.0) {
    throw Error(ErrorKind::HypothesisViolated, "0 <= kappa <= 1 fails");
  }
  MartingaleConstants k;
  k.form = form;
  k.kappa = kappa;
  k.c1 = 2.4 * c0 * rho;
  k.c2 = 4.0 * rho * rho * rho;
  k.c3 = 10.0 * c0 * std::pow(rho, 4);
  k.c4 = 2.0 * rho * rho / s2;
  k.c5 = 8.0 * c0 * std::pow(rho, 3) / s2;
  k.c_tilde = 2.0 * rho * rho;
  k.c6 = 10.0 * std::pow(c0, 3) / (2.0 * st * s2);
  k.c7 = 3.0 * std::pow(k.c1, 3) + (k.c2 + k.c4) * (k.c2 + k.c4) / k.c6 + 4.0 * k.c1 * (k.c2 + k.c4);
  k.c_bar = 12.0 * std::pow(rho, 3) / s2;
  k.bracket = k.c3 + k.c5 + 2.0 * k.c7;
  k.bracket_limit = 224.0 * std::pow(c0 * rho, 3) / s2;
  k.pick_sigma_holds =
      s * std::max({k.c1, k.c6, std::sqrt(k.c2 + k.c4)}) <= 1.0;

  const double tail = 224.0 * std::pow(c0, 3) * rho * s / s2;
  if (s == 0.0) {
    k.delta = kappa == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    k.window_lower = kappa == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    k.delta = kappa / (s * s * rho * rho) + tail;
    k.window_lower = 2.0 * s / k.c_tilde * (2.0 * kappa / (s * s * s) + k.bracket);
  }
  return k;
}

//---------------------------------------------------------------------------//
// The process Pi_k
//---------------------------------------------------------------------------//

/// Pi_k = exp(sigma^2 (1 - delta)(F_{k-1} - g G_{k-1})) prod_{i <= k} (e^{-kappa}(1 + X_i))^{delta - 1}.
/// F and G are anchored at the initial phase; the lag uses F_{-1} = F_0.
struct PiProcess {
  std::uint64_t k = 0;
  double log_Pi = 0.0;
  double log_sum = 0.0;  // sum_i (-kappa + log(1 + X_i))
  PruferState prufer;
  std::complex<double> anchor{1.0, 0.0};
  double F = 0.0;  // F_k
  double G = 0.0;  // G_k
};

inline PiProcess start_pi(const ModelParams& p, const MartingaleConstants& c,
                          PruferState initial) noexcept {
  PiProcess s;
  s.prufer = initial;
  s.anchor = initial.phase;
  s.F = correction_F(s.anchor, initial.phase, p);
  s.G = correction_G(s.anchor, initial.phase, p);
  s.log_Pi = p.sigma() * p.sigma() * (1.0 - c.delta) * (s.F - c.g_factor() * s.G);
  return s;
}

inline PiProcess start_pi(const ModelParams& p, const MartingaleConstants& c) noexcept {
  return start_pi(p, c, start_prufer(p));
}

inline PiProcess pi_step(const PiProcess& s, double omega, const MartingaleConstants& c,
                         const ModelParams& p) {
  PiProcess next;
  const double x = prufer_x(s.prufer.phase, omega, p);
  next.prufer = prufer_step(s.prufer, omega, p);
  next.k = s.k + 1;
  next.anchor = s.anchor;
  next.log_sum = s.log_sum - c.kappa + std::log1p(x);
  next.log_Pi = p.sigma() * p.sigma() * (1.0 - c.delta) * (s.F - c.g_factor() * s.G) +
                (c.delta - 1.0) * next.log_sum;
  next.F = correction_F(s.anchor, next.prufer.phase, p);
  next.G = correction_G(s.anchor, next.prufer.phase, p);
  return next;
}

//---------------------------------------------------------------------------//
// Exact one-step ratio
//---------------------------------------------------------------------------//

namespace detail {

inline void require_window(const MartingaleConstants& c) {
  if (!c.window_nonempty()) {
    throw Error(ErrorKind::HypothesisViolated,
                "2 sigma/c~ (2 kappa/sigma^3 + c3 + c5 + 2 c7) <= 1/2 fails (empty delta window)");
  }
  if (!c.delta_in_window()) {
    throw Error(ErrorKind::HypothesisViolated,
                "delta = " + std::to_string(c.delta) + " lies outside [" +
                    std::to_string(c.window_lower) + ", " + std::to_string(c.window_upper) + "]");
  }
}

inline void require_atoms(const NoiseDistribution& dist) {
  if (!dist.is_finite()) {
    throw Error(ErrorKind::InvalidArgument, "exact expectations need a finite-atom law");
  }
}

}  // namespace detail

/// E[Pi_k / Pi_{k-1} | F_{k-1}] for e^{2 i alpha_{k-1}} = phase.
///
/// The ratio also depends on alpha_{k-2} through Delta F_{k-1} and
/// Delta G_{k-1}; every atom of the law is tried as omega_{k-1} (the phase
/// map is invertible) and the largest conditional ratio is returned.
inline double supermartingale_ratio(std::complex<double> phase, const MartingaleConstants& c,
                                    const ModelParams& p, const NoiseDistribution& dist) {
  detail::require_atoms(dist);
  detail::require_window(c);
  const double s2 = p.sigma() * p.sigma();
  double moment = 0.0;  // E (1 + X_k)^{delta - 1}
  for (const Atom& a : dist.support()) {
    moment += a.probability * std::exp((c.delta - 1.0) * std::log1p(prufer_x(phase, a.value, p)));
  }
  const std::complex<double> one(1.0, 0.0);
  const double F = correction_F(one, phase, p), G = correction_G(one, phase, p);
  double worst = 0.0;
  for (const Atom& b : dist.support()) {
    const std::complex<double> prev = prufer_phase_preimage(phase, b.value, p);
    const double dF = F - correction_F(one, prev, p);
    const double dG = G - correction_G(one, prev, p);
    const double log_b = s2 * (1.0 - c.delta) * (dF - c.g_factor() * dG) + c.kappa * (1.0 - c.delta);
    worst = std::max(worst, std::exp(log_b) * moment);
  }
  return worst;
}

struct RatioScan {
  std::size_t points = 0;
  double worst_ratio = 0.0;
  double worst_log_excess = -std::numeric_limits<double>::infinity();  // log(ratio) + kappa
  double worst_alpha = 0.0;
  std::size_t violations = 0;  // ratio > e^{-kappa} (1 + 1e-12)
  std::vector<double> ratios;
};

/// supermartingale_ratio at alpha = pi j / points, j = 0..points-1.
inline RatioScan scan_ratio(const MartingaleConstants& c, const ModelParams& p,
                            const NoiseDistribution& dist, std::size_t points, unsigned threads = 1) {
  detail::require_atoms(dist);
  detail::require_window(c);
  std::vector<double> ratios(points);
  parallel_for(points, threads, [&](std::size_t j) {
    const double alpha = std::numbers::pi * static_cast<double>(j) / static_cast<double>(points);
    ratios[j] = supermartingale_ratio(std::polar(1.0, 2.0 * alpha), c, p, dist);
  });
  RatioScan out;
  out.points = points;
  const double limit = std::exp(-c.kappa) * (1.0 + 1e-12);
  for (std::size_t j = 0; j < points; ++j) {
    const double excess = std::log(ratios[j]) + c.kappa;
    if (excess > out.worst_log_excess) {
      out.worst_log_excess = excess;
      out.worst_ratio = ratios[j];
      out.worst_alpha = std::numbers::pi * static_cast<double>(j) / static_cast<double>(points);
    }
    if (ratios[j] > limit) ++out.violations;
  }
  out.ratios = std::move(ratios);
  return out;
}

struct ConditionalMoments {
  double mean_x = 0.0;    // E[X | alpha]
  double mean_x2 = 0.0;   // E[X^2 | alpha]
  double sigma2_B = 0.0;  // sigma^2 * 2 rho^2 (1 - cos(2 alpha + 2 theta))
  double sigma2_A = 0.0;  // sigma^2 * (16 c0^3 rho^3 sigma (1 + c0 rho) + 2 rho^2 - 2 rho^2 cos(4 alpha + 4 theta))
};

inline ConditionalMoments conditional_moments(std::complex<double> phase, const ModelParams& p,
                                              const NoiseDistribution& dist) {
  detail::require_atoms(dist);
  ConditionalMoments m;
  for (const Atom& a : dist.support()) {
    const double x = prufer_x(phase, a.value, p);
    m.mean_x += a.probability * x;
    m.mean_x2 += a.probability * x * x;
  }
  const std::complex<double> u = phase * p.z() * p.z();
  const double rho = p.rho(), c0 = p.c0(), s = p.sigma();
  m.sigma2_B = s * s * 2.0 * rho * rho * (1.0 - u.real());
  m.sigma2_A = s * s *
               (16.0 * std::pow(c0 * rho, 3) * s * (1.0 + c0 * rho) + 2.0 * rho * rho -
                2.0 * rho * rho * (u * u).real());
  return m;
}

//---------------------------------------------------------------------------//
// Tail bound and maximal inequality
//---------------------------------------------------------------------------//

struct TailCheck {
  double B = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double refined_bound = 0.0;   // exp(-(B - c_bar sigma^2)(1 - delta))
  double packaged_bound = 0.0;  // tail_bound
};

inline TailCheck tail_check_from_rises(const ModelParams& p, const MartingaleConstants& c, double B,
                                       std::span<const double> rises) {
  TailCheck t;
  t.B = B;
  const auto hits = std::count_if(rises.begin(), rises.end(), [B](double s) { return s >= B; });
  t.empirical = rises.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(rises.size());
  t.std_error = binomial_stderr(t.empirical, rises.size());
  t.refined_bound = std::exp(-(B - c.c_bar * p.sigma() * p.sigma()) * (1.0 - c.delta));
  t.packaged_bound = tail_bound(p, B);
  return t;
}

inline TailCheck verify_tail_bound(const ModelParams& p, const NoiseDistribution& dist, double kappa,
                                   double B, std::size_t n, std::size_t reps, std::uint64_t seed,
                                   unsigned threads = 1) {
  check_tail_hypotheses(p, kappa);
  const MartingaleConstants c = derive_constants(p, kappa);
  const auto rises = sample_max_rises(p, dist, kappa, n, reps, seed, threads);
  return tail_check_from_rises(p, c, B, rises);
}

struct MaximalRow {
  double B = 0.0;
  double p_hat = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // 1 / B
};

/// P(sup_{1 <= k <= n} Pi_k / Pi_1 >= B) for the simulated process, against 1/B.
inline std::vector<MaximalRow> maximal_inequality_check(const ModelParams& p, const NoiseDistribution& dist,
                                                        const MartingaleConstants& c,
                                                        std::span<const double> B_values, std::size_t n,
                                                        std::size_t reps, std::uint64_t seed,
                                                        unsigned threads = 1) {
  if (n < 2 || reps == 0) throw Error(ErrorKind::InvalidArgument, "need n >= 2 and reps >= 1");
  std::vector<double> sup_log(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    NoiseSource src(dist, RngStream(seed, r));
    PiProcess s = pi_step(start_pi(p, c), src.next(), c, p);
    const double base = s.log_Pi;
    double best = 0.0;
    for (std::size_t k = 2; k <= n; ++k) {
      s = pi_step(s, src.next(), c, p);
      best = std::max(best, s.log_Pi - base);
    }
    sup_log[r] = best;
  });
  std::vector<MaximalRow> rows;
  for (double B : B_values) {
    const double lb = std::log(B);
    const auto hits = std::count_if(sup_log.begin(), sup_log.end(), [lb](double v) { return v >= lb; });
    const double ph = static_cast<double>(hits) / static_cast<double>(reps);
    rows.push_back({B, ph, binomial_stderr(ph, reps), 1.0 / B});
  }
  return rows;
}

}  // namespace hyperwalk
