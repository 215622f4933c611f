#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qae/experiments.hpp"
#include "qae/hqca.hpp"

namespace qae {

inline std::string fmt_num(double v, int precision = 10) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

/// RFC 4180 quoting: fields holding separators, quotes or newlines are quoted
/// and inner quotes doubled.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

// --- training trace --------------------------------------------------------

inline std::string trace_csv(const TrainingTrace& trace) {
  std::string out = csv_row({"iteration", "b1_v", "b2_v", "phi1_rad", "phi2_rad", "cost",
                             "grad_b1", "grad_b2", "probe_b1_v", "probe_b2_v", "device_queries"});
  for (const auto& r : trace.rows) {
    std::vector<std::string> f{std::to_string(r.iteration)};
    for (double p : r.params) f.push_back(fmt_num(p));
    while (f.size() < 5) f.push_back("");
    f.push_back(fmt_num(r.cost));
    for (double g : r.gradients) f.push_back(fmt_num(g));
    for (double s : r.probe_steps) f.push_back(fmt_num(s));
    while (f.size() < 10) f.push_back("");
    f.push_back(std::to_string(r.device_queries));
    out += csv_row(f);
  }
  return out;
}

inline nlohmann::json trace_json(const TrainingTrace& trace) {
  nlohmann::json j;
  j["status"] = trace.converged() ? "converged" : "max_iterations";
  j["final_cost"] = trace.final_cost;
  j["final_params"] = trace.final_params;
  j["iterations"] = nlohmann::json::array();
  for (const auto& r : trace.rows) {
    nlohmann::json row;
    row["iteration"] = r.iteration;
    row["params"] = r.params;
    row["cost"] = r.cost;
    row["gradients"] = r.gradients;
    row["probe_steps"] = r.probe_steps;
    row["device_queries"] = r.device_queries;
    j["iterations"].push_back(row);
  }
  return j;
}

// --- decay curves and fits --------------------------------------------------

inline std::string decay_csv(const DecayCurve& curve) {
  std::string out = csv_row({"tau_us", "modulus", "std_error"});
  for (const auto& p : curve.points)
    out += csv_row({fmt_num(p.tau_us), fmt_num(p.modulus), fmt_num(p.std_error)});
  return out;
}

inline std::string records_csv(const std::vector<TomographyRecord>& records) {
  std::string out =
      csv_row({"tau_us", "a2", "a_tilde", "a", "d", "b_tilde", "c_tilde", "modulus", "seed"});
  for (const auto& r : records) {
    out += csv_row({fmt_num(r.tau_us), fmt_num(r.a2), fmt_num(r.a_tilde), fmt_num(r.a),
                    fmt_num(r.d), fmt_num(r.b_tilde), fmt_num(r.c_tilde), fmt_num(r.modulus),
                    std::to_string(r.seed)});
  }
  return out;
}

inline nlohmann::json decay_json(const DecayCurve& curve) {
  nlohmann::json j;
  j["protocol"] = protocol_name(curve.kind);
  j["points"] = nlohmann::json::array();
  for (const auto& p : curve.points)
    j["points"].push_back({{"tau_us", p.tau_us}, {"modulus", p.modulus}, {"std_error", p.std_error}});
  return j;
}

inline nlohmann::json fit_json(const FitResult& f) {
  return nlohmann::json{
      {"y0", f.y0},           {"a0", f.a0},
      {"t_us", f.t},          {"sigma_y0", f.sigma_y0},
      {"sigma_a0", f.sigma_a0}, {"sigma_t_us", f.sigma_t},
      {"residual_norm", f.residual_norm}, {"converged", f.converged},
      {"iterations", f.iterations}};
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = csv_row(
      {"alpha_sq", "bare_modulus", "bare_std_error", "encoded_modulus", "encoded_std_error"});
  for (const auto& r : rows) {
    out += csv_row({fmt_num(r.alpha_sq), fmt_num(r.bare_modulus), fmt_num(r.bare_std_error),
                    fmt_num(r.encoded_modulus), fmt_num(r.encoded_std_error)});
  }
  return out;
}

inline nlohmann::json multiqubit_json(const MultiqubitResult& r) {
  nlohmann::json j;
  j["case"] = multiqubit_name(r.which);
  j["n_qubits"] = r.n_qubits;
  j["n_latent"] = r.n_latent;
  j["best_fidelity"] = r.best_fidelity();
  j["seeds"] = nlohmann::json::array();
  for (const auto& s : r.per_seed) {
    j["seeds"].push_back({{"seed", s.seed},
                          {"best_fidelity", s.best_fidelity},
                          {"best_iteration", s.best_iteration},
                          {"converged", s.converged}});
  }
  j["best_fidelity_trace"] = nlohmann::json::array();
  for (const auto& row : r.best_trace.rows) j["best_fidelity_trace"].push_back(row.cost);
  j["best_angles"] = r.best_trace.final_params;
  return j;
}

}  // namespace qae
