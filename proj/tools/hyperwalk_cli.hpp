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
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperwalk/hyperwalk.hpp"

namespace hyperwalk::cli {

using json = nlohmann::json;

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitCountMismatch = 2,
  kExitMartingaleViolation = 3,
};

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//

struct NoiseSpec {
  std::string kind = "rademacher";
  std::vector<std::pair<double, double>> atoms;

  NoiseDistribution build() const {
    if (kind == "rademacher") return NoiseDistribution::rademacher();
    if (kind == "uniform") return NoiseDistribution::uniform();
    if (kind == "atoms") {
      std::vector<Atom> list;
      for (const auto& [v, p] : atoms) list.push_back({v, p});
      return NoiseDistribution::atoms(std::move(list));
    }
    throw Error(ErrorKind::InvalidConfig, "unknown noise kind '" + kind + "'");
  }

  json to_json() const {
    json j = {{"kind", kind}};
    if (kind == "atoms") {
      json list = json::array();
      for (const auto& [v, p] : atoms) list.push_back({v, p});
      j["atoms"] = list;
    }
    return j;
  }

  static NoiseSpec from_json(const json& j) {
    NoiseSpec s;
    if (j.is_string()) {
      s.kind = j.get<std::string>();
      return s;
    }
    if (!j.is_object() || !j.contains("kind")) {
      throw Error(ErrorKind::InvalidConfig, "noise must be an object with a \"kind\"");
    }
    s.kind = j.at("kind").get<std::string>();
    if (s.kind == "atoms") {
      if (!j.contains("atoms")) throw Error(ErrorKind::InvalidConfig, "atoms noise needs \"atoms\"");
      for (const auto& a : j.at("atoms")) {
        if (!a.is_array() || a.size() != 2) {
          throw Error(ErrorKind::InvalidConfig, "each atom is [value, probability]");
        }
        s.atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
      }
    }
    return s;
  }
};

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("HYPERWALK_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidConfig, "HYPERWALK_SEED is not an unsigned integer");
    }
  }
  return 1;
}

/// Everything that determines the numbers a subcommand prints. Thread count
/// and output paths are deliberately not part of it.
struct RunConfig {
  std::string command;
  double lambda0 = 1.0;
  double sigma = 0.01;
  std::optional<double> c0;  // defaults to the noise bound
  NoiseSpec noise;
  std::uint64_t n = 1000;
  std::uint64_t reps = 10;
  std::uint64_t seed = 1;
  std::uint64_t instances = 20;
  double lambda = 0.01;
  std::vector<double> lambda_grid{1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1};
  std::vector<double> B_grid{1, 2, 3, 4, 5, 6, 7, 8};
  std::optional<double> kappa;  // defaults to the largest admissible drift
  double gamma_margin = 0.5;
  std::uint64_t phase_points = 512;
  std::string form = "1-delta/2";

  json to_json() const {
    json j;
    j["command"] = command;
    j["lambda0"] = lambda0;
    j["sigma"] = sigma;
    j["c0"] = c0 ? json(*c0) : json(nullptr);
    j["noise"] = noise.to_json();
    j["n"] = n;
    j["reps"] = reps;
    j["seed"] = seed;
    j["instances"] = instances;
    j["lambda"] = lambda;
    j["lambda_grid"] = lambda_grid;
    j["B_grid"] = B_grid;
    j["kappa"] = kappa ? json(*kappa) : json(nullptr);
    j["gamma_margin"] = gamma_margin;
    j["phase_points"] = phase_points;
    j["form"] = form;
    return j;
  }

  /// Overwrites the fields present in j; unknown keys are rejected.
  void apply_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "config must be a JSON object");
    try {
      for (const auto& [key, v] : j.items()) {
        if (key == "command") command = v.get<std::string>();
        else if (key == "lambda0") lambda0 = v.get<double>();
        else if (key == "sigma") sigma = v.get<double>();
        else if (key == "c0") c0 = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
        else if (key == "noise") noise = NoiseSpec::from_json(v);
        else if (key == "n") n = v.get<std::uint64_t>();
        else if (key == "reps") reps = v.get<std::uint64_t>();
        else if (key == "seed") seed = v.get<std::uint64_t>();
        else if (key == "instances") instances = v.get<std::uint64_t>();
        else if (key == "lambda") lambda = v.get<double>();
        else if (key == "lambda_grid") lambda_grid = v.get<std::vector<double>>();
        else if (key == "B_grid") B_grid = v.get<std::vector<double>>();
        else if (key == "kappa") kappa = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
        else if (key == "gamma_margin") gamma_margin = v.get<double>();
        else if (key == "phase_points") phase_points = v.get<std::uint64_t>();
        else if (key == "form") form = v.get<std::string>();
        else throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidConfig, e.what());
    }
  }

  static RunConfig from_json(const json& j) {
    RunConfig c;
    c.apply_json(j);
    return c;
  }

  ExponentForm exponent_form() const {
    if (form == "1-delta/2") return ExponentForm::OneMinusHalfDelta;
    if (form == "2-delta/2") return ExponentForm::TwoMinusHalfDelta;
    throw Error(ErrorKind::InvalidConfig, "form must be \"1-delta/2\" or \"2-delta/2\"");
  }

  ModelParams params() const {
    const NoiseDistribution dist = noise.build();
    const double bound = c0.value_or(dist.c0());
    if (bound < dist.c0()) {
      throw Error(ErrorKind::InvalidConfig, "c0 is below the support bound of the noise");
    }
    return derive_params(lambda0, sigma, bound);
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline json scalar_from_text(const std::string& text) {
  if (text == "null") return nullptr;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end && *end == '\0' && !text.empty()) {
    if (text.find_first_of(".eEnN") == std::string::npos && text[0] != '-') {
      return std::stoull(text);
    }
    return v;
  }
  return text;
}

}  // namespace detail

/// key = value lines; '#' starts a comment. Lists are comma separated;
/// atoms are written as atoms = v:p, v:p, ...
inline json parse_key_value(const std::string& text) {
  json j = json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "noise") {
      j["noise"] = json{{"kind", value}};
    } else if (key == "atoms") {
      json list = json::array();
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw Error(ErrorKind::InvalidConfig, "atom must be value:probability");
        list.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
      }
      j["noise"] = json{{"kind", "atoms"}, {"atoms", list}};
    } else if (key == "lambda_grid" || key == "B_grid") {
      json list = json::array();
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) list.push_back(std::stod(detail::trim(item)));
      j[key] = list;
    } else {
      j[key] = detail::scalar_from_text(value);
    }
  }
  return j;
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidConfig, e.what());
    }
  }
  return parse_key_value(text);
}

//---------------------------------------------------------------------------//
// Output
//---------------------------------------------------------------------------//

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RunOptions {
  unsigned threads = 1;
  std::string csv_path;   // empty: standard output
  std::string json_path;  // empty: no JSON summary
  bool inject_mismatch = false;
};

class Outputs {
 public:
  Outputs(const RunConfig& cfg, const RunOptions& opt, std::ostream& out)
      : cfg_(cfg), opt_(opt), out_(out) {}

  void csv_header(const std::string& header) {
    rows_ << "# config=" << cfg_.to_json().dump() << '\n' << header << '\n';
  }
  void csv_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) rows_ << (i ? "," : "") << fields[i];
    rows_ << '\n';
  }

  void finish(const json& results) {
    if (opt_.csv_path.empty()) {
      out_ << rows_.str();
    } else {
      write_file(opt_.csv_path, rows_.str());
    }
    if (!opt_.json_path.empty()) {
      json doc = {{"config", cfg_.to_json()}, {"results", results}};
      write_file(opt_.json_path, doc.dump(2) + "\n");
    }
  }

 private:
  static void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidConfig, "cannot write " + path);
    f << text;
  }

  const RunConfig& cfg_;
  const RunOptions& opt_;
  std::ostream& out_;
  std::ostringstream rows_;
};

//---------------------------------------------------------------------------//
// Subcommands
//---------------------------------------------------------------------------//

inline int cmd_count(const RunConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const ModelParams p = cfg.params();
  const NoiseDistribution dist = cfg.noise.build();
  if (cfg.n == 0 || cfg.instances == 0) throw Error(ErrorKind::InvalidConfig, "n and instances must be >= 1");
  Outputs o(cfg, opt, out);
  o.csv_header("instance,sturm,passes,cells,agree");
  std::size_t mismatches = 0, fallbacks = 0;
  for (std::uint64_t r = 0; r < cfg.instances; ++r) {
    const auto omegas = sample_noise(dist, RngStream(cfg.seed, r), cfg.n);
    const auto h = FiniteHamiltonian::from_noise(p.sigma(), omegas);
    const std::size_t sturm = count_in_interval(h, p.lambda0(), cfg.lambda);
    long long passes = -1;
    std::size_t cells = 0;
    try {
      const PassCount pc = count_passes(p, omegas, cfg.lambda);
      passes = static_cast<long long>(pc.passes);
      cells = pc.cells;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RefinementLimit) throw;
      ++fallbacks;
    }
    if (opt.inject_mismatch && r == 0 && passes >= 0) ++passes;
    const bool agree = passes < 0 || static_cast<std::size_t>(passes) == sturm;
    if (!agree) ++mismatches;
    o.csv_row({std::to_string(r), std::to_string(sturm), std::to_string(passes), std::to_string(cells),
               agree ? "1" : "0"});
  }
  o.finish({{"instances", cfg.instances}, {"mismatches", mismatches}, {"refinement_fallbacks", fallbacks}});
  if (mismatches > 0) {
    err << "count: " << mismatches << " instance(s) where the energy sweep disagrees with the Sturm count\n";
    return kExitCountMismatch;
  }
  return kExitOk;
}

inline int cmd_ids(const RunConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream&) {
  const ModelParams p = cfg.params();
  const NoiseDistribution dist = cfg.noise.build();
  const IdsEstimate est = estimate_ids(p, dist, cfg.lambda_grid, cfg.n, cfg.reps, cfg.seed, opt.threads);
  Outputs o(cfg, opt, out);
  o.csv_header("lambda,mu_hat,stderr,bound");
  for (std::size_t i = 0; i < est.lambda_grid.size(); ++i) {
    double bound = std::nan("");
    try {
      bound = holder_bound(p, est.lambda_grid[i], cfg.gamma_margin);
    } catch (const Error&) {
    }
    o.csv_row({fmt(est.lambda_grid[i]), fmt(est.mu_hat[i]), fmt(est.std_error[i]), fmt(bound)});
  }
  json results = {{"mu_hat", est.mu_hat}, {"stderr", est.std_error}};
  try {
    const HolderFit fit = fit_holder_exponent(est, cfg.gamma_margin);
    results["fit"] = {{"exponent_hat", fit.exponent_hat},
                      {"exponent_stderr", fit.exponent_stderr()},
                      {"intercept", fit.intercept},
                      {"rms_residual", fit.rms_residual},
                      {"bound_exponent", fit.bound_exponent},
                      {"admitted", fit.admitted}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientSignal) throw;
    results["fit"] = nullptr;
  }
  results["simon_taylor_cap"] = p.sigma() > 0.0 ? json(simon_taylor_cap(p.sigma())) : json(nullptr);
  o.finish(results);
  return kExitOk;
}

inline int cmd_backtrack(const RunConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream&) {
  const ModelParams p = cfg.params();
  const NoiseDistribution dist = cfg.noise.build();
  const double kappa = cfg.kappa.value_or(kappa_max(p));
  check_tail_hypotheses(p, kappa);
  const MartingaleConstants c = derive_constants(p, kappa);
  const auto rises = sample_max_rises(p, dist, kappa, cfg.n, cfg.reps, cfg.seed, opt.threads);
  Outputs o(cfg, opt, out);
  o.csv_header("B,p_hat,stderr,bound,refined_bound");
  json rows = json::array();
  for (double B : cfg.B_grid) {
    const TailCheck t = tail_check_from_rises(p, c, B, rises);
    o.csv_row({fmt(B), fmt(t.empirical), fmt(t.std_error), fmt(t.packaged_bound), fmt(t.refined_bound)});
    rows.push_back({{"B", B}, {"p_hat", t.empirical}, {"stderr", t.std_error},
                    {"bound", t.packaged_bound}, {"refined_bound", t.refined_bound}});
  }
  o.finish({{"kappa", kappa}, {"delta", c.delta}, {"table", rows},
            {"convention", "largest rise of log Y_k + kappa k above its value at k = 1"}});
  return kExitOk;
}

inline int cmd_martingale(const RunConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const ModelParams p = cfg.params();
  const NoiseDistribution dist = cfg.noise.build();
  const double kappa = cfg.kappa.value_or(kappa_max(p));
  check_tail_hypotheses(p, kappa);
  const MartingaleConstants c = derive_constants(p, kappa, cfg.exponent_form());
  const RatioScan scan = scan_ratio(c, p, dist, cfg.phase_points, opt.threads);
  Outputs o(cfg, opt, out);
  o.csv_header("alpha,ratio,log_ratio_plus_kappa");
  for (std::size_t j = 0; j < scan.points; ++j) {
    const double alpha = std::numbers::pi * static_cast<double>(j) / static_cast<double>(scan.points);
    o.csv_row({fmt(alpha), fmt(scan.ratios[j]), fmt(std::log(scan.ratios[j]) + kappa)});
  }
  json ledger = {{"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"c4", c.c4}, {"c5", c.c5},
                 {"c6", c.c6}, {"c7", c.c7}, {"c_tilde", c.c_tilde}, {"c_bar", c.c_bar}};
  json hyps = json::array({
      {{"name", "sigma <= 2 sin(theta)|sin(2 theta)|/(460 c0^3)"}, {"holds", p.sigma() <= sigma_threshold(p) * (1 + 1e-12)}},
      {{"name", "kappa <= 6 c0^3 rho^3 sigma^3/|sin(2 theta)|"}, {"holds", kappa <= kappa_max(p) * (1 + 1e-12)}},
      {{"name", "sigma <= 1/max(c1, c6, sqrt(c2 + c4))"}, {"holds", c.pick_sigma_holds}},
      {{"name", "delta window non-empty"}, {"holds", c.window_nonempty()}},
      {{"name", "delta inside window"}, {"holds", c.delta_in_window()}},
      {{"name", "c3 + c5 + 2 c7 < 224 c0^3 rho^3/|sin(2 theta)|"}, {"holds", c.bracket_below_limit()}},
  });
  o.finish({{"constants", ledger},
            {"kappa", kappa},
            {"delta", c.delta},
            {"delta_window", {c.window_lower, c.window_upper}},
            {"form", to_string(c.form)},
            {"worst_ratio", scan.worst_ratio},
            {"worst_log_ratio_plus_kappa", scan.worst_log_excess},
            {"worst_alpha", scan.worst_alpha},
            {"violations", scan.violations},
            {"hypotheses", hyps}});
  if (scan.violations > 0) {
    err << "martingale: " << scan.violations << " phase(s) where the one-step ratio exceeds e^{-kappa}\n";
    return kExitMartingaleViolation;
  }
  return kExitOk;
}

inline int cmd_lyapunov(const RunConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream&) {
  const ModelParams p = cfg.params();
  const NoiseDistribution dist = cfg.noise.build();
  const LyapunovEstimate ly = lyapunov_estimate(p, dist, cfg.n, cfg.reps, cfg.seed, opt.threads);
  const DriftEstimate dr = prufer_drift_estimate(p, dist, cfg.n, cfg.reps, cfg.seed, opt.threads);
  Outputs o(cfg, opt, out);
  o.csv_header("rep,gamma,half_log_r_drift");
  for (std::size_t r = 0; r < ly.per_rep.size(); ++r) {
    o.csv_row({std::to_string(r), fmt(ly.per_rep[r]), fmt(0.5 * dr.per_rep[r])});
  }
  const double weak = p.sigma() * p.sigma() / (8.0 * p.sin_theta() * p.sin_theta());
  o.finish({{"gamma_hat", ly.gamma_hat},
            {"stderr", ly.std_error},
            {"half_log_r_drift", 0.5 * dr.drift},
            {"half_log_r_drift_stderr", 0.5 * dr.std_error},
            {"weak_disorder_prediction", weak}});
  return kExitOk;
}

/// A quick subset of the invariant suite; one PASS/FAIL line per check.
inline int cmd_selfcheck(const RunConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream&) {
  const NoiseDistribution dist = cfg.noise.build();
  const std::uint64_t seed = cfg.seed;
  bool all = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    all = all && ok;
  };

  {
    std::size_t bad = 0;
    const ModelParams p = derive_params(1.0, 0.5, dist.c0());
    for (std::uint64_t r = 0; r < 50; ++r) {
      const auto om = sample_noise(dist, RngStream(seed, r), 5 + r * 5);
      const auto h = FiniteHamiltonian::from_noise(p.sigma(), om);
      const auto ev = dense_eigenvalues(h);
      for (double E : {-1.0, 0.3, 1.7}) {
        const auto dense = static_cast<std::size_t>(std::lower_bound(ev.begin(), ev.end(), E) - ev.begin());
        if (dense != count_below(h, E)) ++bad;
      }
      if (count_passes(p, om, 0.1).passes != count_in_interval(h, 1.0, 0.1)) ++bad;
    }
    report("counting", bad == 0, std::to_string(bad) + " disagreements");
  }
  {
    const ModelParams p = derive_params(1.0, 0.05, dist.c0());
    const auto om = sample_noise(dist, RngStream(seed, 0), 20000);
    WalkState w = start_walk(p);
    PruferState q = start_prufer(p);
    double worst = 0.0;
    for (double x : om) {
      w = advance_walk(w, x, p);
      q = prufer_step(q, walk_to_prufer_drive(x), p);
      worst = std::max(worst, std::abs(std::expm1(-q.log_r - w.log_y)));
    }
    report("r_k Y_k = 1", worst <= 1e-8, "max relative error " + fmt(worst));
  }
  {
    double worst = 0.0;  // max over runs of observed / bound
    for (double sigma : {0.01, 0.1, 0.5, 1.0}) {
      const ModelParams p = derive_params(1.0, sigma, dist.c0());
      const auto om = sample_noise(dist, RngStream(seed, 1), 10000);
      worst = std::max(worst, walk_max_jump_ratio(p, om) / m_bound(p));
    }
    report("jump bound", worst <= 1.0 + 1e-12, "largest observed/bound = " + fmt(worst));
  }
  {
    const ModelParams p0 = derive_params(1.0, 0.0, 1.0);
    const ModelParams p = derive_params(1.0, sigma_threshold(p0) / 2, 1.0);
    const auto c = derive_constants(p, kappa_max(p));
    const auto scan = scan_ratio(c, p, NoiseDistribution::rademacher(), 128, opt.threads);
    report("supermartingale", scan.violations == 0,
           "max log(ratio) + kappa = " + fmt(scan.worst_log_excess));
  }
  {
    std::size_t bad = 0;
    NoiseSource src(NoiseDistribution::uniform(), RngStream(seed, 2));
    for (int t = 0; t < 100; ++t) {
      std::vector<double> d(40);
      for (auto& v : d) v = src.next();
      const double B = 1.0;
      std::vector<std::size_t> best(d.size(), 0);
      for (std::size_t k = 1; k < d.size(); ++k) {
        best[k] = best[k - 1];
        for (std::size_t j = 0; j < k; ++j) {
          if (d[k] - d[j] >= B) best[k] = std::max(best[k], best[j] + 1);
        }
      }
      if (greedy_excursions(d, B).size() != best.back()) ++bad;
    }
    report("backtrack count", bad == 0, std::to_string(bad) + " disagreements");
  }
  return all ? kExitOk : kExitConfig;
}

//---------------------------------------------------------------------------//
// Entry point
//---------------------------------------------------------------------------//

struct Overrides {
  std::string config_path;
  std::optional<double> lambda0, sigma, c0, lambda, kappa, gamma_margin;
  std::optional<std::uint64_t> n, reps, seed, instances, phase_points;
  std::optional<std::string> noise, atoms, form;
  std::vector<double> lambda_grid, B_grid;
};

inline void apply_overrides(RunConfig& cfg, const Overrides& o, CLI::App& sub) {
  json j = json::object();
  if (o.lambda0) j["lambda0"] = *o.lambda0;
  if (o.sigma) j["sigma"] = *o.sigma;
  if (o.c0) j["c0"] = *o.c0;
  if (o.lambda) j["lambda"] = *o.lambda;
  if (o.kappa) j["kappa"] = *o.kappa;
  if (o.gamma_margin) j["gamma_margin"] = *o.gamma_margin;
  if (o.n) j["n"] = *o.n;
  if (o.reps) j["reps"] = *o.reps;
  if (o.seed) j["seed"] = *o.seed;
  if (o.instances) j["instances"] = *o.instances;
  if (o.phase_points) j["phase_points"] = *o.phase_points;
  if (o.form) j["form"] = *o.form;
  if (o.noise) j.update(parse_key_value("noise=" + *o.noise));
  if (o.atoms) j.update(parse_key_value("atoms=" + *o.atoms));
  if (sub.count("--lambda-grid")) j["lambda_grid"] = o.lambda_grid;
  if (sub.count("--B-grid")) j["B_grid"] = o.B_grid;
  cfg.apply_json(j);
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Transfer-matrix, Prufer and backtrack experiments for the 1-D Anderson model"};
  app.require_subcommand(1);
  Overrides ov;
  RunOptions opt;
  opt.threads = 0;

  using Handler = int (*)(const RunConfig&, const RunOptions&, std::ostream&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"count", "compare the energy-sweep eigenvalue count with the Sturm count", cmd_count},
      {"ids", "Monte Carlo integrated density of states with Holder fit", cmd_ids},
      {"backtrack", "tail of the largest backtrack after time 1", cmd_backtrack},
      {"martingale", "exact one-step supermartingale ratio over a phase grid", cmd_martingale},
      {"lyapunov", "Lyapunov exponent and log r drift", cmd_lyapunov},
      {"selfcheck", "quick invariant checks", cmd_selfcheck},
  };
  for (const auto& [name, help, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", ov.config_path, "JSON or key=value config file");
    sub->add_option("--lambda0", ov.lambda0, "reference energy in (-2,0) u (0,2)");
    sub->add_option("--sigma", ov.sigma, "coupling constant");
    sub->add_option("--c0", ov.c0, "bound on |omega| (defaults to the noise bound)");
    sub->add_option("--noise", ov.noise, "rademacher | uniform");
    sub->add_option("--atoms", ov.atoms, "finite law as v:p,v:p,...");
    sub->add_option("--n", ov.n, "box size / walk length");
    sub->add_option("--reps", ov.reps, "realizations");
    sub->add_option("--seed", ov.seed, "random seed (default $HYPERWALK_SEED or 1)");
    sub->add_option("--instances", ov.instances, "instances for count");
    sub->add_option("--lambda", ov.lambda, "interval width for count");
    sub->add_option("--lambda-grid", ov.lambda_grid, "interval widths for ids")->delimiter(',');
    sub->add_option("--B-grid", ov.B_grid, "backtrack sizes")->delimiter(',');
    sub->add_option("--kappa", ov.kappa, "drift (defaults to the largest admissible value)");
    sub->add_option("--gamma-margin", ov.gamma_margin, "distance of lambda0 from {-2,0,2}");
    sub->add_option("--phase-points", ov.phase_points, "phase grid size for martingale");
    sub->add_option("--form", ov.form, "exponent form: 1-delta/2 | 2-delta/2");
    sub->add_option("--threads", opt.threads, "worker threads (0 = hardware); never changes results");
    sub->add_option("--csv", opt.csv_path, "CSV output path (default stdout)");
    sub->add_option("--json", opt.json_path, "JSON summary path");
    sub->add_flag("--inject-mismatch", opt.inject_mismatch, "test hook: corrupt the first count")
        ->group("");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    for (const auto& [name, help, handler] : commands) {
      CLI::App* sub = app.get_subcommand(name);
      if (!sub->parsed()) continue;
      RunConfig cfg;
      cfg.seed = default_seed();
      if (!ov.config_path.empty()) cfg.apply_json(load_config_file(ov.config_path));
      apply_overrides(cfg, ov, *sub);
      cfg.command = name;
      return handler(cfg, opt, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace hyperwalk::cli
