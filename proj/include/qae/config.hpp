#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qae/device.hpp"
#include "qae/experiments.hpp"
#include "qae/hqca.hpp"

namespace qae {

/// Full run configuration. Every key has a default; a config file only
/// overrides. Unknown sections or keys are errors.
struct SimConfig {
  PhysicalConstants constants{};
  NoiseParams noise{};
  CalibrationModel cal{};
  ShotConfig shots{};
  std::size_t n_bootstrap = 50;

  HqcaConfig hqca{};
  double pulse_duration_ns = 800.0;

  FdConfig pqc{};
  std::size_t pqc_seeds = 5;

  // protocols
  double alpha_sq = 0.5;
  double bare_tau_step_us = 2.0;
  double bare_tau_max_us = 12.0;
  double encoded_tau_step_us = 500.0;
  double encoded_tau_max_us = 6000.0;
  double sweep_tau_us = 300.0;
  std::vector<double> sweep_alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  CnotCalMode cnot_mode = CnotCalMode::Nominal;
  std::optional<double> encoder_b1_v;  // explicit encoder instead of training
  std::optional<double> encoder_b2_v;

  std::vector<double> bare_tau_grid() const {
    std::vector<double> g;
    for (double t = 0.0; t <= bare_tau_max_us + 1e-9; t += bare_tau_step_us) g.push_back(t);
    return g;
  }

  std::vector<double> encoded_tau_grid() const {
    std::vector<double> g;
    for (double t = 0.0; t <= encoded_tau_max_us + 1e-9; t += encoded_tau_step_us) g.push_back(t);
    return g;
  }

  EncoderParams initial_encoder() const {
    EncoderParams p = hqca.initial;
    p.duration_ns = pulse_duration_ns;
    return p;
  }

  DeviceContext device(bool ideal = false) const {
    DeviceContext ctx;
    ctx.cal = cal;
    ctx.noise = ideal ? NoiseParams::none() : noise;
    ctx.shots = shots;
    ctx.ideal = ideal;
    return ctx;
  }

  void validate() const {
    noise.validate();
    cal.validate();
    shots.validate();
    hqca.validate();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline double parse_double(const std::string& raw, int line) {
  const std::string v = lower(trim(raw));
  if (v == "inf" || v == "infinity" || v == "infinite") return kInf;
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config line " + std::to_string(line) + ": bad number '" + raw + "'");
  }
}

inline long long parse_int(const std::string& raw, int line) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(trim(raw), &used);
    if (used != trim(raw).size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config line " + std::to_string(line) + ": bad integer '" + raw + "'");
  }
}

inline bool parse_bool(const std::string& raw, int line) {
  const std::string v = lower(trim(raw));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config line " + std::to_string(line) + ": bad boolean '" + raw + "'");
}

inline std::vector<double> parse_list(const std::string& raw, int line) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, line));
  if (out.empty())
    throw std::runtime_error("config line " + std::to_string(line) + ": empty list");
  return out;
}

}  // namespace detail

/// Parses the sectioned key=value format. `#` and `;` start comment lines.
inline SimConfig parse_config_text(const std::string& text) {
  SimConfig cfg;

  using Setter = std::function<void(const std::string&, int)>;
  std::map<std::string, std::map<std::string, Setter>> schema;

  auto dbl = [](double& slot) {
    return [&slot](const std::string& v, int line) { slot = detail::parse_double(v, line); };
  };

  schema["constants"] = {
      {"d_mhz", dbl(cfg.constants.d_mhz)},
      {"a_parallel_mhz", dbl(cfg.constants.a_parallel_mhz)},
      {"q_mhz", dbl(cfg.constants.q_mhz)},
      {"b_z_mt", dbl(cfg.constants.b_z_mt)},
      {"f_mw1_mhz", dbl(cfg.constants.f_mw1_mhz)},
      {"f_mw2_mhz", dbl(cfg.constants.f_mw2_mhz)},
      {"f_rf1_mhz", dbl(cfg.constants.f_rf1_mhz)},
      {"f_rf2_mhz", dbl(cfg.constants.f_rf2_mhz)},
  };
  schema["noise"] = {
      {"t2_electron_us", dbl(cfg.noise.t2_electron_us)},
      {"t2_nuclear_ms",
       [&cfg](const std::string& v, int line) {
         cfg.noise.t2_nuclear_us = detail::parse_double(v, line) * 1e3;
       }},
      {"t1_electron_ms",
       [&cfg](const std::string& v, int line) {
         cfg.noise.t1_electron_us = detail::parse_double(v, line) * 1e3;
       }},
      {"t1_nuclear_s",
       [&cfg](const std::string& v, int line) {
         cfg.noise.t1_nuclear_us = detail::parse_double(v, line) * 1e6;
       }},
      {"readout_depol", dbl(cfg.noise.readout_depol)},
  };
  schema["calibration"] = {
      {"kappa_mw1", dbl(cfg.cal.mw1.kappa_mhz_per_v)}, {"eta_mw1", dbl(cfg.cal.mw1.eta_per_v)},
      {"kappa_mw2", dbl(cfg.cal.mw2.kappa_mhz_per_v)}, {"eta_mw2", dbl(cfg.cal.mw2.eta_per_v)},
      {"kappa_rf1", dbl(cfg.cal.rf1.kappa_mhz_per_v)}, {"eta_rf1", dbl(cfg.cal.rf1.eta_per_v)},
      {"kappa_rf2", dbl(cfg.cal.rf2.kappa_mhz_per_v)}, {"eta_rf2", dbl(cfg.cal.rf2.eta_per_v)},
  };
  schema["shots"] = {
      {"repeats",
       [&cfg](const std::string& v, int line) { cfg.shots.repeats = detail::parse_int(v, line); }},
      {"n_bootstrap",
       [&cfg](const std::string& v, int line) {
         cfg.n_bootstrap = static_cast<std::size_t>(detail::parse_int(v, line));
       }},
      {"pl00", dbl(cfg.shots.pl00)},
      {"pl01", dbl(cfg.shots.pl01)},
      {"pl10", dbl(cfg.shots.pl10)},
      {"pl11", dbl(cfg.shots.pl11)},
  };
  schema["hqca"] = {
      {"b1_init_v", dbl(cfg.hqca.initial.b1_volts)},
      {"b2_init_v", dbl(cfg.hqca.initial.b2_volts)},
      {"phi1_rad", dbl(cfg.hqca.initial.phi1_rad)},
      {"phi2_rad", dbl(cfg.hqca.initial.phi2_rad)},
      {"pulse_duration_ns", dbl(cfg.pulse_duration_ns)},
      {"probe_step_v", dbl(cfg.hqca.probe_step_v)},
      {"min_probe_step_v", dbl(cfg.hqca.min_probe_step_v)},
      {"learning_rate", dbl(cfg.hqca.learning_rate)},
      {"halving_threshold", dbl(cfg.hqca.halving_threshold)},
      {"max_iterations",
       [&cfg](const std::string& v, int line) {
         cfg.hqca.max_iterations = static_cast<std::size_t>(detail::parse_int(v, line));
       }},
      {"target_cost", dbl(cfg.hqca.target_cost)},
      {"stability_window",
       [&cfg](const std::string& v, int line) {
         cfg.hqca.stability_window = static_cast<std::size_t>(detail::parse_int(v, line));
       }},
      {"stability_band", dbl(cfg.hqca.stability_band)},
      {"literal_reset",
       [&cfg](const std::string& v, int line) {
         cfg.hqca.literal_reset = detail::parse_bool(v, line);
       }},
      {"pqc_probe_step_rad", dbl(cfg.pqc.probe_step_rad)},
      {"pqc_learning_rate", dbl(cfg.pqc.learning_rate)},
      {"pqc_max_iterations",
       [&cfg](const std::string& v, int line) {
         cfg.pqc.max_iterations = static_cast<std::size_t>(detail::parse_int(v, line));
       }},
      {"pqc_target_fidelity", dbl(cfg.pqc.target_fidelity)},
      {"pqc_init_spread_rad", dbl(cfg.pqc.init_spread_rad)},
      {"pqc_seeds",
       [&cfg](const std::string& v, int line) {
         cfg.pqc_seeds = static_cast<std::size_t>(detail::parse_int(v, line));
       }},
  };
  schema["protocols"] = {
      {"alpha_sq", dbl(cfg.alpha_sq)},
      {"bare_tau_step_us", dbl(cfg.bare_tau_step_us)},
      {"bare_tau_max_us", dbl(cfg.bare_tau_max_us)},
      {"encoded_tau_step_us", dbl(cfg.encoded_tau_step_us)},
      {"encoded_tau_max_us", dbl(cfg.encoded_tau_max_us)},
      {"sweep_tau_us", dbl(cfg.sweep_tau_us)},
      {"sweep_alphas",
       [&cfg](const std::string& v, int line) { cfg.sweep_alphas = detail::parse_list(v, line); }},
      {"cnot_mode",
       [&cfg](const std::string& v, int line) {
         const std::string m = detail::lower(detail::trim(v));
         if (m == "nominal")
           cfg.cnot_mode = CnotCalMode::Nominal;
         else if (m == "exact")
           cfg.cnot_mode = CnotCalMode::Exact;
         else
           throw std::runtime_error("config line " + std::to_string(line) +
                                    ": cnot_mode must be nominal or exact");
       }},
      {"encoder_b1_v",
       [&cfg](const std::string& v, int line) { cfg.encoder_b1_v = detail::parse_double(v, line); }},
      {"encoder_b2_v",
       [&cfg](const std::string& v, int line) { cfg.encoder_b2_v = detail::parse_double(v, line); }},
  };

  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = detail::trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line) + ": malformed section");
      section = detail::lower(detail::trim(s.substr(1, s.size() - 2)));
      if (schema.find(section) == schema.end())
        throw std::runtime_error("config line " + std::to_string(line) + ": unknown section [" +
                                 section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line) + ": expected key=value");
    if (section.empty())
      throw std::runtime_error("config line " + std::to_string(line) + ": key outside a section");
    const std::string key = detail::lower(detail::trim(s.substr(0, eq)));
    const std::string value = detail::trim(s.substr(eq + 1));
    auto& keys = schema[section];
    const auto it = keys.find(key);
    if (it == keys.end())
      throw std::runtime_error("config line " + std::to_string(line) + ": unknown key '" + key +
                               "' in section [" + section + "]");
    it->second(value, line);
  }

  cfg.validate();
  return cfg;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace qae
