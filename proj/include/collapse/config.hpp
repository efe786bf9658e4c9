// Copyright 2026 The collapse-sim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COLLAPSE_CONFIG_HPP_
#define COLLAPSE_CONFIG_HPP_

// Run configuration: flat `key = value` lines, `#` starts a comment. Unknown
// keys are rejected. The canonical text (sorted keys, normalized values) is
// what gets hashed and stored in archives; output_dir is not part of it.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/grid.hpp"
#include "collapse/trajectory.hpp"

namespace collapse::io {

enum class Model { grw, diosi, hybrid, master, verify };

inline std::string to_string(Model m) {
  switch (m) {
    case Model::grw: return "grw";
    case Model::diosi: return "diosi";
    case Model::hybrid: return "hybrid";
    case Model::master: return "master";
    case Model::verify: return "verify";
  }
  return "grw";
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct RunConfig {
  Model model = Model::grw;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::optional<double> mu;

  double x_min = -10.0;
  double x_max = 10.0;
  std::uint64_t n_points = 128;
  double t_max = 1.0;
  std::vector<double> sample_times;
  std::uint64_t n_trajectories = 100;
  std::uint64_t n_substeps = 4096;
  std::uint64_t wiener_cells = 4096;
  double max_dt = 1e-2;
  bool deterministic_times = false;

  // Initial Gaussian packet.
  double center = 0.0;
  double sigma = 1.0;
  double momentum = 0.0;

  // Hamiltonian: kinetic term plus an optional Gaussian bump
  // potential_amplitude * exp(-(x - potential_center)^2 / (2 potential_width^2)).
  bool kinetic = true;
  double potential_amplitude = 0.0;
  double potential_center = 0.0;
  double potential_width = 1.0;

  // master model
  std::string decoherence = "diosi";
  double master_dt = 1e-3;

  // verify model
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8};
  double scale = 1.0;

  std::uint64_t density_stride = 1;
  std::string output_dir = "out";

  /// Parameter set after applying the scaling relation mu alpha / 2 = lambda.
  double effective_alpha() const {
    if (alpha) return *alpha;
    if (mu && lambda) return 2.0 * *lambda / *mu;
    throw Error(ErrorCode::config_violation, "alpha is undetermined: give alpha, or mu and lambda");
  }
  double effective_mu() const {
    if (mu) return *mu;
    if (alpha && lambda) return 2.0 * *lambda / *alpha;
    throw Error(ErrorCode::config_violation, "mu is undetermined: give mu, or alpha and lambda");
  }

  Grid grid() const { return Grid(n_points, x_min, x_max); }

  WaveFunction initial_state() const {
    return make_gaussian_packet(grid(), center, sigma, momentum);
  }

  HamiltonianSpec hamiltonian() const {
    const Grid g = grid();
    HamiltonianSpec h{std::vector<double>(g.size(), 0.0), kinetic};
    if (potential_amplitude != 0.0) {
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double d = (g.x(j) - potential_center) / potential_width;
        h.potential[j] = potential_amplitude * std::exp(-0.5 * d * d);
      }
    }
    return h;
  }

  std::vector<double> effective_sample_times() const {
    return sample_times.empty() ? std::vector<double>{t_max} : sample_times;
  }

  GrwParams grw_params() const {
    GrwParams p;
    p.mu = effective_mu();
    p.alpha = effective_alpha();
    p.t_max = t_max;
    p.sample_times = effective_sample_times();
    p.max_dt = max_dt;
    p.deterministic_times = deterministic_times;
    return p;
  }

  DiosiParams diosi_params() const {
    DiosiParams p;
    p.lambda = lambda.value_or(0.0);
    p.n_substeps_per_unit_time = n_substeps;
    p.wiener_cells_per_unit_time = wiener_cells;
    p.t_max = t_max;
    p.sample_times = effective_sample_times();
    return p;
  }

  HybridParams hybrid_params() const {
    HybridParams p;
    p.lambda = lambda.value_or(0.0);
    p.mu = mu.value_or(0.0);
    p.t_max = t_max;
    p.sample_times = effective_sample_times();
    p.wiener_cells_per_unit_time = wiener_cells;
    p.max_dt = max_dt;
    p.deterministic_times = deterministic_times;
    return p;
  }

  void validate() const {
    auto violation = [](bool ok, const std::string& msg) {
      if (!ok) throw Error(ErrorCode::config_violation, msg);
    };
    violation(seed.has_value(), "seed is mandatory");
    for (auto [name, v] : {std::pair{"lambda", lambda}, {"alpha", alpha}, {"mu", mu}})
      violation(!v || (*v > 0.0 && std::isfinite(*v)), std::string(name) + " must be positive");
    if (mu && lambda && alpha) {
      const double derived = 2.0 * *lambda / *mu;
      violation(std::abs(*alpha - derived) <= 1e-12 * derived,
                "alpha must equal 2 lambda / mu (got " + format_double(*alpha) + ", expected " +
                    format_double(derived) + ")");
    }
    switch (model) {
      case Model::grw:
        violation((mu || (alpha && lambda)) && (alpha || (mu && lambda)),
                  "grw needs two of mu, alpha, lambda");
        break;
      case Model::diosi: violation(lambda.has_value(), "diosi needs lambda"); break;
      case Model::hybrid: violation(lambda && mu, "hybrid needs lambda and mu"); break;
      case Model::master:
        violation(decoherence == "grw" || decoherence == "diosi",
                  "decoherence must be grw or diosi");
        if (decoherence == "diosi")
          violation(lambda.has_value(), "master with diosi decoherence needs lambda");
        else
          violation((mu || (alpha && lambda)) && (alpha || (mu && lambda)),
                    "master with grw decoherence needs two of mu, alpha, lambda");
        violation(master_dt > 0.0, "master_dt must be positive");
        break;
      case Model::verify:
        violation(scale > 0.0 && scale <= 1.0, "scale must lie in (0, 1]");
        for (int c : criteria) violation(c >= 1 && c <= 8, "criteria are numbered 1 to 8");
        break;
    }
    violation(density_stride >= 1, "density_stride must be >= 1");
    violation(!output_dir.empty(), "output_dir must not be empty");
    if (model == Model::verify) return;
    violation(t_max > 0.0 && std::isfinite(t_max), "t_max must be positive");
    try {
      detail::validate_schedule(effective_sample_times(), t_max);
    } catch (const Error& e) {
      throw Error(ErrorCode::config_violation, e.what());
    }
  }

  /// Sorted `key = value` lines covering every setting that can influence
  /// an artifact.
  std::string canonical_text() const {
    std::map<std::string, std::string> kv;
    auto join = [](const auto& xs, auto fmt) {
      std::string s;
      for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(xs[i]);
      return s;
    };
    kv["model"] = to_string(model);
    if (seed) kv["seed"] = std::to_string(*seed);
    if (lambda) kv["lambda"] = format_double(*lambda);
    if (alpha) kv["alpha"] = format_double(*alpha);
    if (mu) kv["mu"] = format_double(*mu);
    kv["x_min"] = format_double(x_min);
    kv["x_max"] = format_double(x_max);
    kv["n_points"] = std::to_string(n_points);
    kv["t_max"] = format_double(t_max);
    kv["sample_times"] = join(sample_times, format_double);
    kv["n_trajectories"] = std::to_string(n_trajectories);
    kv["n_substeps"] = std::to_string(n_substeps);
    kv["wiener_cells"] = std::to_string(wiener_cells);
    kv["max_dt"] = format_double(max_dt);
    kv["deterministic_times"] = deterministic_times ? "true" : "false";
    kv["center"] = format_double(center);
    kv["sigma"] = format_double(sigma);
    kv["momentum"] = format_double(momentum);
    kv["kinetic"] = kinetic ? "true" : "false";
    kv["potential_amplitude"] = format_double(potential_amplitude);
    kv["potential_center"] = format_double(potential_center);
    kv["potential_width"] = format_double(potential_width);
    kv["decoherence"] = decoherence;
    kv["master_dt"] = format_double(master_dt);
    kv["criteria"] = join(criteria, [](int c) { return std::to_string(c); });
    kv["scale"] = format_double(scale);
    kv["density_stride"] = std::to_string(density_stride);
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
  }

  std::uint64_t hash() const { return fnv1a64(canonical_text()); }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(d))
    throw Error(ErrorCode::config_violation, key + ": expected a number, got '" + v + "'");
  return d;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long u = 0;
  try {
    if (!v.empty() && v[0] != '-') u = std::stoull(v, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size())
    throw Error(ErrorCode::config_violation,
                key + ": expected a non-negative integer, got '" + v + "'");
  return u;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::config_violation, key + ": expected true or false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

/// Applies one `key = value` setting.
inline void set_option(RunConfig& c, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  if (key == "model") {
    if (v == "grw") c.model = Model::grw;
    else if (v == "diosi") c.model = Model::diosi;
    else if (v == "hybrid") c.model = Model::hybrid;
    else if (v == "master") c.model = Model::master;
    else if (v == "verify") c.model = Model::verify;
    else throw Error(ErrorCode::config_violation, "unknown model '" + v + "'");
  } else if (key == "seed") {
    c.seed = parse_uint(key, v);
  } else if (key == "lambda") {
    c.lambda = parse_double(key, v);
  } else if (key == "alpha") {
    c.alpha = parse_double(key, v);
  } else if (key == "mu") {
    c.mu = parse_double(key, v);
  } else if (key == "x_min") {
    c.x_min = parse_double(key, v);
  } else if (key == "x_max") {
    c.x_max = parse_double(key, v);
  } else if (key == "n_points") {
    c.n_points = parse_uint(key, v);
  } else if (key == "t_max") {
    c.t_max = parse_double(key, v);
  } else if (key == "sample_times") {
    c.sample_times.clear();
    for (const auto& s : split_list(v)) c.sample_times.push_back(parse_double(key, s));
  } else if (key == "n_trajectories") {
    c.n_trajectories = parse_uint(key, v);
  } else if (key == "n_substeps") {
    c.n_substeps = parse_uint(key, v);
  } else if (key == "wiener_cells") {
    c.wiener_cells = parse_uint(key, v);
  } else if (key == "max_dt") {
    c.max_dt = parse_double(key, v);
  } else if (key == "deterministic_times") {
    c.deterministic_times = parse_bool(key, v);
  } else if (key == "center") {
    c.center = parse_double(key, v);
  } else if (key == "sigma") {
    c.sigma = parse_double(key, v);
  } else if (key == "momentum") {
    c.momentum = parse_double(key, v);
  } else if (key == "kinetic") {
    c.kinetic = parse_bool(key, v);
  } else if (key == "potential_amplitude") {
    c.potential_amplitude = parse_double(key, v);
  } else if (key == "potential_center") {
    c.potential_center = parse_double(key, v);
  } else if (key == "potential_width") {
    c.potential_width = parse_double(key, v);
  } else if (key == "decoherence") {
    c.decoherence = v;
  } else if (key == "master_dt") {
    c.master_dt = parse_double(key, v);
  } else if (key == "criteria") {
    c.criteria.clear();
    for (const auto& s : split_list(v)) c.criteria.push_back(static_cast<int>(parse_uint(key, s)));
  } else if (key == "scale") {
    c.scale = parse_double(key, v);
  } else if (key == "density_stride") {
    c.density_stride = parse_uint(key, v);
  } else if (key == "output_dir") {
    c.output_dir = v;
  } else {
    throw Error(ErrorCode::config_violation, "unknown key '" + key + "'");
  }
}

inline const std::vector<std::string>& option_keys() {
  static const std::vector<std::string> keys{
      "model", "seed", "lambda", "alpha", "mu", "x_min", "x_max", "n_points", "t_max",
      "sample_times", "n_trajectories", "n_substeps", "wiener_cells", "max_dt",
      "deterministic_times", "center", "sigma", "momentum", "kinetic", "potential_amplitude",
      "potential_center", "potential_width", "decoherence", "master_dt", "criteria", "scale",
      "density_stride", "output_dir"};
  return keys;
}

/// Parses config text without validating it (overrides may follow).
inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::config_violation,
                  "line " + std::to_string(lineno) + ": expected key = value");
    set_option(base, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io_failure, "cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace collapse::io

#endif  // COLLAPSE_CONFIG_HPP_
