// paprsim: Monte-Carlo PAPR experiments for OFDM with analog (DJSCC-style)
// or 16QAM subcarrier symbols.

#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>

#include "CLI11.hpp"
#include "papr/error.hpp"
#include "papr/experiment.hpp"

namespace {

using papr::Settings;

// Experiment keys exposed as --<key> flags; values given on the command line
// override those read from --config.
struct ExperimentFlags {
  std::string config;
  std::map<std::string, std::string> values;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config, "key = value file with the same keys as the flags")
        ->check(CLI::ExistingFile);
    const std::map<std::string, std::string> help{
        {"source", "qam16 | gaussian | file:<path>"},
        {"technique", "none | clip | compand | slm | pts | softclip"},
        {"n", "subcarriers, power of two in [16, 256] (default 64)"},
        {"frames", "frame count (default 100000)"},
        {"seed", "master seed (default 1)"},
        {"rho", "clipping ratio (clip, softclip; default 1.4)"},
        {"mu", "mu-law constant (compand; default 4)"},
        {"gamma", "soft clip stabilizer (default 1e-12)"},
        {"v", "SLM candidates or PTS partitions (default 4)"},
        {"m-trials", "PTS random weight trials (default 8)"},
        {"codebook-seed", "seed of the SLM/PTS codebook shared with the receiver (default 1)"},
        {"snr-db", "comma-separated SNR grid in dB; 'inf' is noiseless"},
        {"out", "output CSV path, or a directory for an auto-named file"},
        {"workers", "worker threads (default 1); output does not depend on it"},
        {"grid-min", "CCDF grid start in dB (default 0)"},
        {"grid-max", "CCDF grid end in dB (default 14)"},
        {"grid-step", "CCDF grid step in dB (default 0.1)"},
        {"vprime", "compand receiver V' estimate: self-consistent | received-mean"},
    };
    for (const auto& key : papr::known_keys()) {
      cmd.add_option("--" + key, values[key], help.at(key));
    }
  }

  Settings settings(const CLI::App& cmd) const {
    Settings out = config.empty() ? Settings{} : papr::read_settings(config);
    for (const auto& [key, value] : values) {
      if (cmd.count("--" + key) > 0) out[key] = value;
    }
    return out;
  }
};

void print_ccdf_summary(const papr::RunRecord& record) {
  const auto& curve = *record.ccdf;
  std::cerr << "frames=" << curve.n_samples << " papr_at_1e-2="
            << papr::format_double(curve.threshold_at(1e-2))
            << " papr_at_1e-3=" << papr::format_double(curve.threshold_at(1e-3))
            << " wall_s=" << std::fixed << std::setprecision(3) << record.wall_seconds << '\n';
}

std::vector<double> sweep_grid(const papr::ExperimentSpec& spec) {
  if (spec.snr_db.empty()) throw papr::KeyError("snr-db", "sweep needs an SNR grid");
  return spec.snr_db;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OFDM PAPR reduction experiments"};
  app.require_subcommand(1);

  ExperimentFlags ccdf_flags;
  auto* ccdf = app.add_subcommand("ccdf", "PAPR CCDF of transmitted frames (CSV papr_db,ccdf)");
  ccdf_flags.attach(*ccdf);

  ExperimentFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "symbol distortion vs SNR (CSV snr_db,mse,evm_db)");
  sweep_flags.attach(*sweep);

  ExperimentFlags rt_flags;
  auto* roundtrip = app.add_subcommand("roundtrip", "noiseless transmit/receive distortion");
  rt_flags.attach(*roundtrip);

  std::string grad_op = "papr_loss";
  std::size_t grad_trials = 100;
  double grad_step = 1e-5;
  double grad_tol = 1e-4;
  std::uint64_t grad_seed = 1;
  std::size_t grad_n = 32;
  double grad_rho = 1.4;
  double grad_gamma = 1e-12;
  bool grad_through_mean = false;
  bool grad_db = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of analytic gradients");
  gradcheck->add_option("--op", grad_op, "papr_loss | soft_clip")
      ->check(CLI::IsMember({"papr_loss", "soft_clip"}));
  gradcheck->add_option("--trials", grad_trials, "random probes");
  gradcheck->add_option("--step", grad_step, "central-difference step");
  gradcheck->add_option("--tol", grad_tol, "exit non-zero when the worst error reaches this");
  gradcheck->add_option("--seed", grad_seed);
  gradcheck->add_option("--n", grad_n, "frame length");
  gradcheck->add_option("--rho", grad_rho, "soft clip ratio");
  gradcheck->add_option("--gamma", grad_gamma, "soft clip stabilizer");
  gradcheck->add_flag("--through-mean", grad_through_mean,
                      "differentiate the soft clip through the frame mean amplitude");
  gradcheck->add_flag("--db", grad_db, "PAPR loss in dB instead of linear");

  std::string stub_source = "gaussian";
  std::size_t stub_n = 64;
  std::size_t stub_frames = 1000;
  std::uint64_t stub_seed = 1;
  std::string stub_out;
  auto* stub = app.add_subcommand("gen-latents-stub",
                                  "write a SYMF latent file from a synthetic source");
  stub->add_option("--source", stub_source, "gaussian | qam16")
      ->check(CLI::IsMember({"gaussian", "qam16"}));
  stub->add_option("--n", stub_n, "subcarriers per frame");
  stub->add_option("--frames", stub_frames, "frames to write");
  stub->add_option("--seed", stub_seed);
  stub->add_option("--out", stub_out, "SYMF path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ccdf->parsed()) {
      const auto spec = papr::spec_from_settings(ccdf_flags.settings(*ccdf));
      const auto record = papr::run_ccdf_experiment(spec);
      if (!record.written_path) papr::write_ccdf_csv(std::cout, *record.ccdf);
      else std::cerr << "wrote " << *record.written_path << '\n';
      print_ccdf_summary(record);
    } else if (sweep->parsed()) {
      const auto spec = papr::spec_from_settings(sweep_flags.settings(*sweep));
      const auto record = papr::run_distortion_sweep(spec, sweep_grid(spec));
      if (!record.written_path) papr::write_sweep_csv(std::cout, record.sweep);
      else std::cerr << "wrote " << *record.written_path << '\n';
    } else if (roundtrip->parsed()) {
      const auto spec = papr::spec_from_settings(rt_flags.settings(*roundtrip));
      const auto record =
          papr::run_distortion_sweep(spec, {std::numeric_limits<double>::infinity()});
      const auto& r = record.sweep.front().report;
      std::cout << "technique=" << papr::technique_label(spec.technique)
                << " frames=" << record.papr.size() << " mse=" << papr::format_double(r.mse)
                << " evm_db=" << papr::format_double(r.evm_db) << '\n';
    } else if (gradcheck->parsed()) {
      papr::RngStream rng(grad_seed);
      papr::GradCheckOptions options;
      options.n_subcarriers = grad_n;
      options.soft_clip = {grad_rho, grad_gamma, grad_through_mean};
      options.papr_scale = grad_db ? papr::PaprScale::kDb : papr::PaprScale::kLinear;
      const auto op = grad_op == "papr_loss" ? papr::GradOp::kPaprLoss : papr::GradOp::kSoftClip;
      const auto report = papr::grad_check(op, grad_trials, grad_step, rng, options);
      std::cout << "op=" << grad_op << " probes=" << report.probe_count
                << " step=" << papr::format_double(report.step)
                << " max_rel_error=" << papr::format_double(report.max_rel_error)
                << " rejected=" << report.rejected << '\n';
      return report.max_rel_error < grad_tol ? 0 : 1;
    } else if (stub->parsed()) {
      const auto source = papr::SourceSpec::parse(stub_source, stub_n);
      papr::LatentWriter writer(stub_out, static_cast<std::uint32_t>(stub_n));
      for (std::size_t i = 0; i < stub_frames; ++i) {
        papr::RngStream rng(papr::derive_seed(stub_seed, 1, i));
        writer.write(papr::generate_frame(source, rng));
      }
      writer.finish();
      std::cerr << "wrote " << stub_frames << " frames to " << stub_out << '\n';
    }
  } catch (const papr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
