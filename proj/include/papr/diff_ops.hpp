#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "papr/signal.hpp"

namespace papr {

// Gradients of real-valued functions of complex inputs are stored as complex
// numbers g_k = dL/dRe(x_k) + j dL/dIm(x_k), covering the 2N real degrees of freedom.

enum class PaprScale { kLinear, kDb };

struct PaprLoss {
  double value = 0.0;
  /// Gradient w.r.t. the frequency-domain symbols.
  Samples gradient;
  /// Time-domain sample holding the peak (lowest index on ties).
  std::size_t argmax = 0;
};

/// PAPR of ifft(frame) with its (sub)gradient through the peak sample and the IFFT.
PaprLoss papr_loss(const FrequencyFrame& frame, PaprScale scale = PaprScale::kLinear);

struct LossWeights {
  double lambda = 0.0;
  void validate() const;
};

/// L = L1 + lambda * L2.
double combined_loss(double mse_term, double papr_term, const LossWeights& w);

struct SoftClipConfig {
  double rho = 1.4;
  double gamma = 1e-12;
  /// Differentiate through the frame mean amplitude instead of holding it fixed.
  bool mean_gradient = false;
  void validate() const;
};

/// Output of the differentiable clip y (1 - ReLU(|y| - rho*ybar) / (|y| + gamma))
/// together with its Jacobian at the evaluation point.
class SoftClip {
 public:
  SoftClip(const TimeFrame& input, const SoftClipConfig& cfg);
  /// Evaluates with a caller-supplied mean amplitude, held constant.
  SoftClip(const TimeFrame& input, const SoftClipConfig& cfg, double mean_amplitude);

  const TimeFrame& output() const noexcept { return output_; }
  double mean_amplitude() const noexcept { return mean_amplitude_; }
  double threshold() const noexcept { return threshold_; }

  /// Jacobian-vector product J v (forward mode).
  Samples jvp(std::span<const Complex> direction) const;
  /// Vector-Jacobian product J^T u (backpropagation).
  Samples vjp(std::span<const Complex> cotangent) const;

 private:
  void evaluate();

  TimeFrame input_;
  SoftClipConfig cfg_;
  double mean_amplitude_ = 0.0;
  double threshold_ = 0.0;
  TimeFrame output_;
};

inline SoftClip soft_clip(const TimeFrame& frame, const SoftClipConfig& cfg) {
  return SoftClip(frame, cfg);
}

enum class GradOp { kPaprLoss, kSoftClip };

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t probe_count = 0;
  double step = 0.0;
  /// Random inputs discarded for lying near a kink or an argmax tie.
  std::size_t rejected = 0;
};

struct GradCheckOptions {
  std::size_t n_subcarriers = 32;
  SoftClipConfig soft_clip{};
  PaprScale papr_scale = PaprScale::kLinear;
};

/// Compares analytic derivatives with central differences on random inputs.
/// papr_loss: full gradient vs 2N central differences per probe.
/// soft_clip: J v vs (f(y + h v) - f(y - h v)) / 2h for a random direction v.
/// Error per probe is |a - d| / max(|a|, |d|, 1e-12) in the Euclidean norm.
GradCheckReport grad_check(GradOp op, std::size_t trials, double step, RngStream& rng,
                           const GradCheckOptions& options = {});

}  // namespace papr
