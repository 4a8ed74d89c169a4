#pragma once

#include "papr/signal.hpp"

namespace papr {

struct ClipConfig {
  /// Clipping ratio: threshold amplitude over the frame's RMS.
  double rho = 1.4;
  void validate() const;
};

/// Hard amplitude clip at rho * sqrt(mean power of the input frame); phase is kept.
TimeFrame clip(const TimeFrame& frame, const ClipConfig& cfg);

struct CompandConfig {
  double mu = 4.0;
  void validate() const;
};

/// mu-law compression |y| -> V ln(1 + mu |y| / V) / ln(1 + mu), phase kept,
/// with V the frame's mean amplitude.
TimeFrame compand(const TimeFrame& frame, const CompandConfig& cfg);
/// Same curve with an explicit V.
TimeFrame compand(const TimeFrame& frame, const CompandConfig& cfg, double v);

/// Inverse mu-law: |z| -> (V'/mu)(exp(|z| ln(1 + mu) / V') - 1), phase kept.
TimeFrame expand(const TimeFrame& frame, const CompandConfig& cfg, double v_prime);

/// How the receiver obtains V' from a received companded frame.
enum class VPrimeEstimate {
  /// Mean amplitude of the received (still compressed) frame.
  kReceivedMean,
  /// The V whose expansion has mean amplitude V. Recovers the transmitter's V
  /// exactly on a noiseless channel.
  kSelfConsistent,
};

double estimate_v_prime(const TimeFrame& received, const CompandConfig& cfg, VPrimeEstimate mode);

}  // namespace papr
