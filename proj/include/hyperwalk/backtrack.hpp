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
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hyperwalk/error.hpp"
#include "hyperwalk/model.hpp"
#include "hyperwalk/parallel.hpp"
#include "hyperwalk/spectrum.hpp"
#include "hyperwalk/stats.hpp"
#include "hyperwalk/transferwalk.hpp"

namespace hyperwalk {

/// D_k = log Y_k + kappa k.
struct DriftedPath {
  std::vector<double> values;
  double kappa = 0.0;
};

inline DriftedPath make_drifted_path(std::span<const double> log_y, double kappa) {
  if (log_y.empty()) throw Error(ErrorKind::InvalidArgument, "path needs at least one point");
  if (!(kappa >= 0.0)) throw Error(ErrorKind::InvalidArgument, "drift must be >= 0");
  DriftedPath path{std::vector<double>(log_y.begin(), log_y.end()), kappa};
  for (std::size_t k = 0; k < path.values.size(); ++k) path.values[k] += kappa * static_cast<double>(k);
  return path;
}

struct Excursion {
  std::size_t start = 0;
  std::size_t end = 0;
  double size = 0.0;
};

struct BacktrackReport {
  double threshold = 0.0;
  double max_backtrack = 0.0;
  std::map<double, std::size_t> count_at_least;
  std::vector<Excursion> excursions;  // at `threshold`

  std::size_t count() const noexcept { return excursions.size(); }
};

/// max_k (D_k - min_{j <= k} D_j).
inline double max_backtrack(std::span<const double> d) noexcept {
  if (d.empty()) return 0.0;
  double lowest = d[0], best = 0.0;
  for (double v : d) {
    lowest = std::min(lowest, v);
    best = std::max(best, v - lowest);
  }
  return best;
}

/// Non-overlapping rises of at least B, taken greedily: each excursion ends
/// at the first index where the path has climbed B above its running minimum
/// since the previous excursion ended. This is the largest possible number
/// of disjoint rises.
inline std::vector<Excursion> greedy_excursions(std::span<const double> d, double B) {
  if (!(B > 0.0)) throw Error(ErrorKind::InvalidArgument, "backtrack size must be > 0");
  std::vector<Excursion> out;
  if (d.empty()) return out;
  double lowest = d[0];
  std::size_t argmin = 0;
  for (std::size_t k = 1; k < d.size(); ++k) {
    if (d[k] < lowest) {
      lowest = d[k];
      argmin = k;
    }
    if (d[k] - lowest >= B) {
      out.push_back({argmin, k, d[k] - lowest});
      lowest = d[k];
      argmin = k;
    }
  }
  return out;
}

inline BacktrackReport detect_backtracks(const DriftedPath& path, double B,
                                         std::span<const double> extra_thresholds = {}) {
  BacktrackReport rep;
  rep.threshold = B;
  rep.excursions = greedy_excursions(path.values, B);
  rep.max_backtrack = max_backtrack(path.values);
  rep.count_at_least[B] = rep.excursions.size();
  for (double b : extra_thresholds) {
    rep.count_at_least[b] = greedy_excursions(path.values, b).size();
  }
  return rep;
}

//---------------------------------------------------------------------------//
// Eigenvalues against backtracks
//---------------------------------------------------------------------------//

struct EigenBacktrackResult {
  std::size_t eigenvalues = 0;  // N_n in [lambda0, lambda0 + lambda]
  std::size_t backtracks = 0;
  std::size_t bound = 0;        // 1 + backtracks, or n + 1 when vacuous
  double m_used = 0.0;
  double kappa = 0.0;
  double B = 0.0;
  bool vacuous = false;         // B <= 0: every count is allowed
  double max_jump = 0.0;        // observed max |dX| / Y along the walk

  bool holds() const noexcept { return eigenvalues <= bound; }
};

/// Evaluates both sides of: #eigenvalues in [lambda0, lambda0 + lambda] is at
/// most 1 + #backtracks of size >= log(eps beta / lambda) of the path
/// log Y_k + ((eps + lambda beta) / sin theta + 2 M beta) k, with M = m_bound.
inline EigenBacktrackResult eigen_vs_backtracks(const ModelParams& p, std::span<const double> omegas,
                                                double lambda, double epsilon, double beta) {
  if (omegas.empty()) throw Error(ErrorKind::InvalidArgument, "need n >= 1");
  if (!(lambda > 0.0) || !(epsilon > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "lambda, epsilon and beta must be > 0");
  }
  EigenBacktrackResult res;
  res.m_used = m_bound(p);
  if (res.m_used > 0.0 && beta > 1.0 / (2.0 * res.m_used)) {
    throw Error(ErrorKind::InvalidBeta, "beta exceeds 1/(2M)");
  }
  res.kappa = (epsilon + lambda * beta) / p.sin_theta() + 2.0 * res.m_used * beta;
  res.B = std::log(epsilon * beta / lambda);
  res.eigenvalues = count_in_interval(FiniteHamiltonian::from_noise(p.sigma(), omegas), p.lambda0(), lambda);

  std::vector<double> log_y;
  log_y.reserve(omegas.size() + 1);
  WalkState s = start_walk(p);
  log_y.push_back(s.log_y);
  for (double w : omegas) {
    s = advance_walk(s, w, p);
    res.max_jump = std::max(res.max_jump, s.jump_ratio);
    log_y.push_back(s.log_y);
  }
  if (!(res.B > 0.0)) {
    res.vacuous = true;
    res.backtracks = omegas.size();
    res.bound = omegas.size() + 1;
    return res;
  }
  const DriftedPath path = make_drifted_path(log_y, res.kappa);
  res.backtracks = greedy_excursions(path.values, res.B).size();
  res.bound = 1 + res.backtracks;
  return res;
}

//---------------------------------------------------------------------------//
// Tail of the largest rise after time 1
//---------------------------------------------------------------------------//

/// 2 exp(-B (1 - 230 c0^3 sigma / (2 sin theta |sin 2 theta|))).
inline double tail_bound(const ModelParams& p, double B) noexcept {
  const double loss = 230.0 * std::pow(p.c0(), 3) * p.sigma() /
                      (2.0 * p.sin_theta() * std::abs(p.sin_2theta()));
  return 2.0 * std::exp(-B * (1.0 - loss));
}

/// Throws HypothesisViolated unless sigma and kappa are in the range where
/// the tail bound is claimed.
inline void check_tail_hypotheses(const ModelParams& p, double kappa) {
  constexpr double slack = 1.0 + 1e-12;
  if (p.sigma() > sigma_threshold(p) * slack) {
    throw Error(ErrorKind::HypothesisViolated,
                "sigma <= 2 sin(theta)|sin(2 theta)|/(460 c0^3) fails");
  }
  if (!(kappa >= 0.0) || kappa > kappa_max(p) * slack) {
    throw Error(ErrorKind::HypothesisViolated,
                "0 <= kappa <= 6 c0^3 rho^3 sigma^3/|sin(2 theta)| fails");
  }
}

/// max_{k >= 1} (D_k - D_1) for realizations r = 0..reps-1 on streams (seed, r).
inline std::vector<double> sample_max_rises(const ModelParams& p, const NoiseDistribution& dist,
                                            double kappa, std::size_t n, std::size_t reps,
                                            std::uint64_t seed, unsigned threads = 1) {
  std::vector<double> out(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    out[r] = max_rise_from_first(p, dist, RngStream(seed, r), n, kappa);
  });
  return out;
}

struct TailRow {
  double B = 0.0;
  double p_hat = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
};

inline std::vector<TailRow> tail_table(const ModelParams& p, std::span<const double> rises,
                                       std::span<const double> B_grid) {
  std::vector<TailRow> rows;
  for (double B : B_grid) {
    const auto hits = std::count_if(rises.begin(), rises.end(), [B](double s) { return s >= B; });
    const double ph = rises.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(rises.size());
    rows.push_back({B, ph, binomial_stderr(ph, rises.size()), tail_bound(p, B)});
  }
  return rows;
}

inline std::vector<TailRow> backtrack_tail_estimate(const ModelParams& p, const NoiseDistribution& dist,
                                                    double kappa, std::span<const double> B_grid,
                                                    std::size_t n, std::size_t reps,
                                                    std::uint64_t seed, unsigned threads = 1) {
  check_tail_hypotheses(p, kappa);
  if (n == 0 || reps == 0) throw Error(ErrorKind::InvalidArgument, "need n >= 1 and reps >= 1");
  const auto rises = sample_max_rises(p, dist, kappa, n, reps, seed, threads);
  return tail_table(p, rises, B_grid);
}

}  // namespace hyperwalk
