#include "papr/distortion.hpp"

#include <cmath>

#include "papr/error.hpp"

namespace papr {
namespace {

void require_nonzero(const TimeFrame& frame, const char* op) {
  if (!(energy(frame.span()) > 0.0)) {
    throw UndefinedInputError(std::string(op) + " of an all-zero frame is undefined");
  }
}

// Mean over samples of (exp(a r / V) - 1) / mu; strictly decreasing in V.
double expansion_gain(const TimeFrame& frame, double a, double mu, double v) {
  double sum = 0.0;
  for (const auto& s : frame) sum += std::expm1(a * std::abs(s) / v);
  return sum / (mu * static_cast<double>(frame.size()));
}

}  // namespace

void ClipConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("clipping ratio rho must be > 0");
}

TimeFrame clip(const TimeFrame& frame, const ClipConfig& cfg) {
  cfg.validate();
  require_nonzero(frame, "clip");
  const double limit = cfg.rho * std::sqrt(mean_power(frame.span()));
  TimeFrame out = frame;
  for (auto& s : out) {
    const double mag = std::abs(s);
    if (mag >= limit) s = std::polar(limit, std::arg(s));
  }
  return out;
}

void CompandConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("companding constant mu must be > 0");
}

TimeFrame compand(const TimeFrame& frame, const CompandConfig& cfg) {
  require_nonzero(frame, "compand");
  return compand(frame, cfg, mean_amplitude(frame.span()));
}

TimeFrame compand(const TimeFrame& frame, const CompandConfig& cfg, double v) {
  cfg.validate();
  if (!(v > 0.0)) throw ConfigError("companding mean amplitude V must be > 0");
  const double norm = std::log1p(cfg.mu);
  TimeFrame out = frame;
  for (auto& s : out) {
    const double mag = std::abs(s);
    if (mag == 0.0) continue;
    s *= v * std::log1p(cfg.mu * mag / v) / (norm * mag);
  }
  return out;
}

TimeFrame expand(const TimeFrame& frame, const CompandConfig& cfg, double v_prime) {
  cfg.validate();
  if (!(v_prime > 0.0) || !std::isfinite(v_prime)) {
    throw ConfigError("expander mean amplitude V' must be > 0");
  }
  const double a = std::log1p(cfg.mu);
  TimeFrame out = frame;
  for (auto& s : out) {
    const double mag = std::abs(s);
    if (mag == 0.0) continue;
    s *= v_prime * std::expm1(a * mag / v_prime) / (cfg.mu * mag);
  }
  return out;
}

double estimate_v_prime(const TimeFrame& received, const CompandConfig& cfg, VPrimeEstimate mode) {
  cfg.validate();
  require_nonzero(received, "V' estimation");
  const double received_mean = mean_amplitude(received.span());
  if (mode == VPrimeEstimate::kReceivedMean) return received_mean;

  // Solve expansion_gain(V) = 1 by bisection in log V. At V = received mean the
  // gain is >= 1 by Jensen (expm1 convex, expm1(a)/mu = 1), so the root lies above it.
  const double a = std::log1p(cfg.mu);
  double lo = received_mean;
  double hi = received_mean;
  while (expansion_gain(received, a, cfg.mu, hi) > 1.0) hi *= 2.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if (expansion_gain(received, a, cfg.mu, mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace papr
