// Command-line runner for the NV-center autoencoder simulation experiments.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "qae/qae.hpp"

namespace fs = std::filesystem;
using namespace qae;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool ideal = false;
  std::optional<double> eta;
  std::optional<long long> shots;
  std::string format = "csv";
};

SimConfig load(const GlobalOpts& g) {
  SimConfig cfg = g.config_path.empty() ? SimConfig{} : load_config(g.config_path);
  if (g.eta) {
    cfg.cal.mw1.eta_per_v = *g.eta;
    cfg.cal.mw2.eta_per_v = *g.eta;
  }
  if (g.shots) cfg.shots.repeats = *g.shots;
  cfg.hqca.seed = g.seed;
  cfg.validate();
  return cfg;
}

RunContext make_run_context(const SimConfig& cfg, const GlobalOpts& g) {
  RunContext ctx;
  ctx.device = cfg.device(g.ideal);
  ctx.n_bootstrap = g.ideal ? 1 : cfg.n_bootstrap;
  ctx.seed = g.seed;
  return ctx;
}

TrainingTrace train_encoder(const SimConfig& cfg, const GlobalOpts& g) {
  HqcaConfig hq = cfg.hqca;
  hq.initial.duration_ns = cfg.pulse_duration_ns;
  hq.seed = g.seed;
  return hqca_train(hq, cfg.device(g.ideal));
}

/// Explicit encoder from the config when given, otherwise a fresh training
/// run. The trace is also returned so callers can persist it.
std::pair<EncoderParams, std::optional<TrainingTrace>> resolve_encoder(const SimConfig& cfg,
                                                                       const GlobalOpts& g) {
  if (cfg.encoder_b1_v && cfg.encoder_b2_v) {
    EncoderParams p = cfg.initial_encoder();
    p.b1_volts = *cfg.encoder_b1_v;
    p.b2_volts = *cfg.encoder_b2_v;
    return {p, std::nullopt};
  }
  TrainingTrace trace = train_encoder(cfg, g);
  return {encoder_from_trace(trace, cfg.initial_encoder()), trace};
}

void write_trace(const fs::path& dir, const TrainingTrace& trace) {
  write_file(dir / "trace.csv", trace_csv(trace));
  write_file(dir / "trace.json", trace_json(trace).dump(2) + "\n");
}

int cmd_train(const GlobalOpts& g) {
  const SimConfig cfg = load(g);
  const TrainingTrace trace = train_encoder(cfg, g);
  write_trace(g.out_dir, trace);
  std::printf("training %s after %zu iterations, cost %.5f, B1 %.4f V, B2 %.4f V\n",
              trace.converged() ? "converged" : "stopped", trace.rows.size(), trace.final_cost,
              trace.final_params[0], trace.final_params[1]);
  std::printf("wrote %s and trace.json\n", (fs::path(g.out_dir) / "trace.csv").string().c_str());
  return trace.converged() ? 0 : 2;
}

int cmd_lifetime(const GlobalOpts& g) {
  const SimConfig cfg = load(g);
  auto [encoder, trace] = resolve_encoder(cfg, g);
  if (trace) write_trace(g.out_dir, *trace);

  RunContext ctx = make_run_context(cfg, g);
  nlohmann::json fits;
  struct Row {
    ProtocolKind kind;
    std::vector<double> grid;
  };
  const std::vector<Row> plan{{ProtocolKind::Bare, cfg.bare_tau_grid()},
                              {ProtocolKind::Cnot, cfg.encoded_tau_grid()},
                              {ProtocolKind::Autoencoder, cfg.encoded_tau_grid()}};
  for (const Row& row : plan) {
    ProtocolSpec spec;
    spec.kind = row.kind;
    spec.tau_grid_us = row.grid;
    spec.alpha_sq = cfg.alpha_sq;
    spec.cnot_cal = cfg.cnot_mode;
    spec.pulse_duration_ns = cfg.pulse_duration_ns;
    if (row.kind == ProtocolKind::Autoencoder) spec.encoder = encoder;
    ctx.run_tag = static_cast<std::uint64_t>(row.kind);

    const DecayCurve curve = run_protocol(spec, ctx);
    const std::string name = protocol_name(row.kind);
    write_file(fs::path(g.out_dir) / ("decay_" + name + ".csv"), decay_csv(curve));
    if (g.format == "json")
      write_file(fs::path(g.out_dir) / ("decay_" + name + ".json"),
                 decay_json(curve).dump(2) + "\n");

    const FitResult f = fit_exponential(curve);
    fits[name] = fit_json(f);
    std::printf("%-12s t = %10.4f us  (sigma %.4f, y0 %.4g, A0 %.4g, %s)\n", name.c_str(), f.t,
                f.sigma_t, f.y0, f.a0, f.converged ? "converged" : "not converged");
  }
  write_file(fs::path(g.out_dir) / "fit.json", fits.dump(2) + "\n");
  std::printf("wrote decay_*.csv and fit.json under %s\n", g.out_dir.c_str());
  return 0;
}

int cmd_sweep(const GlobalOpts& g) {
  const SimConfig cfg = load(g);
  auto [encoder, trace] = resolve_encoder(cfg, g);
  if (trace) write_trace(g.out_dir, *trace);

  RunContext ctx = make_run_context(cfg, g);
  const std::vector<SweepRow> rows = alpha_sweep(cfg.sweep_alphas, cfg.sweep_tau_us, encoder, ctx);
  write_file(fs::path(g.out_dir) / "sweep.csv", sweep_csv(rows));
  if (g.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows)
      j.push_back({{"alpha_sq", r.alpha_sq},
                   {"bare_modulus", r.bare_modulus},
                   {"bare_std_error", r.bare_std_error},
                   {"encoded_modulus", r.encoded_modulus},
                   {"encoded_std_error", r.encoded_std_error}});
    write_file(fs::path(g.out_dir) / "sweep.json", j.dump(2) + "\n");
  }
  for (const auto& r : rows)
    std::printf("alpha^2 %.2f   bare %.4f +- %.4f   encoded %.4f +- %.4f\n", r.alpha_sq,
                r.bare_modulus, r.bare_std_error, r.encoded_modulus, r.encoded_std_error);
  return 0;
}

int cmd_multiqubit(const GlobalOpts& g, const std::string& which) {
  const SimConfig cfg = load(g);
  MultiqubitCase mc;
  if (which == "ghz3")
    mc = MultiqubitCase::Ghz3;
  else if (which == "w3")
    mc = MultiqubitCase::W3;
  else if (which == "cat4")
    mc = MultiqubitCase::Cat4;
  else
    throw std::runtime_error("multiqubit: case must be ghz3, w3 or cat4");

  const MultiqubitResult r = reproduce_multiqubit(mc, cfg.pqc, cfg.pqc_seeds, g.seed);
  write_file(fs::path(g.out_dir) / ("multiqubit_" + which + ".json"),
             multiqubit_json(r).dump(2) + "\n");
  std::printf("%s: best fidelity %.4f (seed index %zu of %zu)\n", which.c_str(),
              r.best_fidelity(), r.best_index, r.per_seed.size());
  return 0;
}

int cmd_tomo_selftest(const GlobalOpts& g) {
  const SimConfig cfg = load(g);
  const PlCalibration pl = PlCalibration::from_shots(cfg.shots);

  // ideal round trip across the reconstructible family
  std::mt19937_64 rng = make_stream(g.seed, {stream::kTomography, 1});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::array<double, 4> pop{u(rng) + 0.05, u(rng) + 0.05, u(rng) + 0.05, u(rng) + 0.05};
    const double total = pop[0] + pop[1] + pop[2] + pop[3];
    for (auto& p : pop) p /= total;
    const double radius = std::sqrt(pop[0] * pop[3]) * 0.95 * u(rng);
    const double angle = 2.0 * kPi * u(rng);
    Mat m(4, 4);
    for (std::size_t i = 0; i < 4; ++i) m(i, i) = pop[i];
    m(0, 3) = std::polar(radius, angle);
    m(3, 0) = std::conj(m(0, 3));
    const DensityMatrix rho(m);
    const TomographyRecord rec = tomograph(rho, pl);
    worst = std::max({worst, std::abs(rec.a2 - pop[0]), std::abs(rec.a_tilde - pop[1]),
                      std::abs(rec.a - pop[2]), std::abs(rec.d - pop[3]),
                      std::abs(rec.b_tilde - m(0, 3).real()),
                      std::abs(rec.c_tilde - m(0, 3).imag())});
  }
  const bool ideal_ok = worst < 1e-10;
  std::printf("ideal round trip: worst error %.3e  [%s]\n", worst, ideal_ok ? "ok" : "FAIL");

  // shot-noise bias check on the Bell state
  std::vector<TomographyRecord> records;
  double mean_b = 0.0;
  const int n_seeds = 100;
  for (int s = 0; s < n_seeds; ++s) {
    std::mt19937_64 srng = make_stream(g.seed, {stream::kTomography, 2, static_cast<std::uint64_t>(s)});
    TomographyRecord rec = tomograph(prepare_bell(), pl, cfg.shots.repeats, &srng);
    rec.seed = combine_seed(g.seed, {stream::kTomography, 2, static_cast<std::uint64_t>(s)});
    mean_b += rec.b_tilde;
    records.push_back(rec);
  }
  mean_b /= n_seeds;
  const double se = 2.4e-3 / std::sqrt(static_cast<double>(n_seeds));
  const bool noisy_ok = std::abs(mean_b - 0.5) < 3.0 * se;
  std::printf("shot-noise bias: mean b~ %.6f vs 0.5 (3 SE = %.2e)  [%s]\n", mean_b, 3.0 * se,
              noisy_ok ? "ok" : "FAIL");

  write_file(fs::path(g.out_dir) / "tomo_records.csv", records_csv(records));
  return ideal_ok && noisy_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-qubit NV autoencoder simulator: encoder training, lifetime protocols, "
               "state tomography and multi-qubit compression runs"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "configuration file (sectioned key=value)");
  app.add_option("--seed", g.seed, "master RNG seed")->default_val(0);
  app.add_option("--out", g.out_dir, "output directory")->default_val("out");
  app.add_flag("--ideal", g.ideal, "disable noise and shot sampling");
  double eta_val = 0.0;
  auto* eta_opt = app.add_option("--eta", eta_val, "override the MW nonlinearity (1/V)");
  long long shots_val = 0;
  auto* shots_opt = app.add_option("--shots", shots_val, "override the repeat count");
  app.add_option("--format", g.format, "csv or json outputs")
      ->default_val("csv")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* train = app.add_subcommand("train", "run the encoder training loop");
  auto* lifetime =
      app.add_subcommand("lifetime", "run the bare/cnot/autoencoder decay protocols and fits");
  auto* sweep = app.add_subcommand("sweep", "residual coherence across the state family");
  auto* multiqubit = app.add_subcommand("multiqubit", "train the multi-qubit compression circuit");
  std::string mq_case = "ghz3";
  multiqubit->add_option("case", mq_case, "ghz3, w3 or cat4")->required();
  auto* tomo = app.add_subcommand("tomo-selftest", "tomography round-trip and bias checks");
  for (auto* sub : {train, lifetime, sweep, multiqubit, tomo}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (!eta_opt->empty()) g.eta = eta_val;
  if (!shots_opt->empty()) g.shots = shots_val;

  try {
    if (train->parsed()) return cmd_train(g);
    if (lifetime->parsed()) return cmd_lifetime(g);
    if (sweep->parsed()) return cmd_sweep(g);
    if (multiqubit->parsed()) return cmd_multiqubit(g, mq_case);
    if (tomo->parsed()) return cmd_tomo_selftest(g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
