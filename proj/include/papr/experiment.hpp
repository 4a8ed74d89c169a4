#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "papr/diff_ops.hpp"
#include "papr/distortion.hpp"
#include "papr/metrics.hpp"
#include "papr/selection.hpp"
#include "papr/sources.hpp"

namespace papr {

struct NoTechnique {};

using TechniqueConfig =
    std::variant<NoTechnique, ClipConfig, CompandConfig, SlmConfig, PtsConfig, SoftClipConfig>;

/// "none", "clip", "compand", "slm", "pts" or "softclip".
std::string technique_name(const TechniqueConfig& technique);
/// Technique name plus its parameters, usable in file names.
std::string technique_label(const TechniqueConfig& technique);

struct ExperimentSpec {
  SourceSpec source;
  TechniqueConfig technique = NoTechnique{};
  std::size_t n_subcarriers = 64;
  std::size_t n_frames = 100000;
  std::vector<double> snr_db;  // sweep grid; +inf is a noiseless point
  std::uint64_t master_seed = 1;
  std::optional<std::string> out;
  double grid_min_db = 0.0;
  double grid_max_db = 14.0;
  double grid_step_db = 0.1;
  std::size_t workers = 1;
  VPrimeEstimate v_prime = VPrimeEstimate::kSelfConsistent;

  std::vector<double> thresholds() const;
  /// Canonical key = value text; two specs with equal text run identically.
  std::string canonical() const;
  void validate() const;
};

/// Key/value settings shared by config files and CLI flags.
using Settings = std::map<std::string, std::string>;

/// Keys accepted in config files and as --<key> flags.
const std::vector<std::string>& known_keys();

/// Builds and validates a spec. Unknown keys, missing required keys (source,
/// technique) and out-of-range values raise KeyError naming the key.
ExperimentSpec spec_from_settings(const Settings& settings);

/// Reads `key = value` lines; '#' starts a comment, blank lines are ignored.
Settings read_settings(const std::string& path);
ExperimentSpec parse_config(const std::string& path);

struct SweepPoint {
  double snr_db = 0.0;
  DistortionReport report;
};

struct RunRecord {
  std::uint64_t spec_hash = 0;
  std::vector<PaprSample> papr;
  std::optional<CcdfCurve> ccdf;
  std::vector<SweepPoint> sweep;
  double wall_seconds = 0.0;
  std::optional<std::string> written_path;
};

/// Source frames of a run. Frame i comes from its own stream seeded by
/// (master seed, i); latent files are read up front, so frame i is the i-th
/// stored frame. The run ends early when a latent file runs out.
class FrameSupply {
 public:
  explicit FrameSupply(const ExperimentSpec& spec);
  std::size_t size() const noexcept { return count_; }
  FrequencyFrame frame(std::size_t index) const;

 private:
  SourceSpec source_;
  std::uint64_t master_seed_;
  std::size_t count_;
  std::vector<FrequencyFrame> preloaded_;
};

/// Transmit-side PAPR statistics. Writes the CCDF CSV when spec.out is set.
RunRecord run_ccdf_experiment(const ExperimentSpec& spec);
/// Full chain per SNR point: source -> technique -> IFFT -> AWGN -> inverse -> FFT,
/// distortion of recovered symbols against the source frame.
/// Writes `snr_db,mse,evm_db` CSV when spec.out is set.
RunRecord run_distortion_sweep(const ExperimentSpec& spec, const std::vector<double>& snr_grid);

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep);

/// Default file name when `out` names a directory.
std::string default_file_name(const ExperimentSpec& spec, const std::string& kind);

/// Result of pushing one frame through a technique's transmitter.
struct Transmitted {
  TimeFrame frame;
  std::optional<SideInfo> side_info;
};

/// Transmit/receive pair for a technique, with codebooks built once.
class TechniqueChain {
 public:
  TechniqueChain(const TechniqueConfig& technique, std::size_t n_subcarriers,
                 VPrimeEstimate v_prime = VPrimeEstimate::kSelfConsistent);

  Transmitted transmit(const FrequencyFrame& frame) const;
  /// Undoes what the technique can undo; clip and softclip pass through.
  FrequencyFrame receive(const TimeFrame& received, const Transmitted& sent) const;

 private:
  TechniqueConfig technique_;
  VPrimeEstimate v_prime_;
  std::optional<SlmCodebook> slm_;
  std::optional<PtsCodebook> pts_;
};

}  // namespace papr
