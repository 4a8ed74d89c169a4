#include "papr/diff_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "papr/error.hpp"

namespace papr {
namespace {

double dot(std::span<const Complex> a, std::span<const Complex> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  }
  return sum;
}

double norm2(std::span<const Complex> a) { return std::sqrt(energy(a)); }

double rel_error(std::span<const Complex> analytic, std::span<const Complex> numeric) {
  Samples diff(analytic.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = analytic[i] - numeric[i];
  return norm2(diff) / std::max({norm2(analytic), norm2(numeric), 1e-12});
}

Samples random_samples(std::size_t n, RngStream& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  Samples out(n);
  for (auto& v : out) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v = Complex(re, im);
  }
  return out;
}

// Gap between the two largest |y_k|^2 must dominate what a step can change.
bool has_clear_peak(const TimeFrame& y, double margin) {
  double first = -1.0;
  double second = -1.0;
  for (const auto& v : y) {
    const double p = std::norm(v);
    if (p > first) {
      second = first;
      first = p;
    } else if (p > second) {
      second = p;
    }
  }
  return first - second > margin;
}

double check_papr_loss(std::size_t n, double step, RngStream& rng, PaprScale scale,
                       std::size_t& rejected) {
  for (;;) {
    FrequencyFrame z(random_samples(n, rng));
    // A perturbation of size h moves each |y_k| by at most h, so |y_k|^2 by ~2h|y_k|.
    const auto y = ifft(z);
    double peak = 0.0;
    for (const auto& v : y) peak = std::max(peak, std::abs(v));
    if (!has_clear_peak(y, 100.0 * step * (2.0 * peak + step))) {
      ++rejected;
      continue;
    }
    const auto loss = papr_loss(z, scale);
    Samples numeric(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (int part = 0; part < 2; ++part) {
        const Complex delta = part == 0 ? Complex(step, 0.0) : Complex(0.0, step);
        FrequencyFrame plus = z;
        FrequencyFrame minus = z;
        plus[k] += delta;
        minus[k] -= delta;
        const double d = (papr_loss(plus, scale).value - papr_loss(minus, scale).value) / (2.0 * step);
        numeric[k] += part == 0 ? Complex(d, 0.0) : Complex(0.0, d);
      }
    }
    return rel_error(loss.gradient, numeric);
  }
}

double check_soft_clip(std::size_t n, double step, RngStream& rng, const SoftClipConfig& cfg,
                       std::size_t& rejected) {
  for (;;) {
    TimeFrame y(random_samples(n, rng));
    Samples v = random_samples(n, rng);
    const SoftClip at(y, cfg);
    double vmax = 0.0;
    for (const auto& d : v) vmax = std::max(vmax, std::abs(d));
    // The threshold itself moves with ybar when differentiating through it.
    const double reach = 10.0 * step * vmax * (cfg.mean_gradient ? 1.0 + cfg.rho : 1.0);
    bool near_kink = false;
    for (const auto& s : y) {
      if (std::abs(std::abs(s) - at.threshold()) <= reach) near_kink = true;
    }
    if (near_kink) {
      ++rejected;
      continue;
    }
    TimeFrame plus = y;
    TimeFrame minus = y;
    for (std::size_t k = 0; k < n; ++k) {
      plus[k] += step * v[k];
      minus[k] -= step * v[k];
    }
    const auto eval = [&](const TimeFrame& x) {
      return cfg.mean_gradient ? SoftClip(x, cfg) : SoftClip(x, cfg, at.mean_amplitude());
    };
    const auto fp = eval(plus);
    const auto fm = eval(minus);
    Samples numeric(n);
    for (std::size_t k = 0; k < n; ++k) {
      numeric[k] = (fp.output()[k] - fm.output()[k]) / (2.0 * step);
    }
    return rel_error(at.jvp(v), numeric);
  }
}

}  // namespace

PaprLoss papr_loss(const FrequencyFrame& frame, PaprScale scale) {
  const double total = energy(frame.span());
  if (!(total > 0.0)) throw UndefinedInputError("PAPR loss of an all-zero frame is undefined");
  const auto n = static_cast<double>(frame.size());
  const auto y = ifft(frame);

  PaprLoss loss;
  double peak = -1.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (std::norm(y[k]) > peak) {
      peak = std::norm(y[k]);
      loss.argmax = k;
    }
  }
  // L = N |y_m|^2 / ||z||^2 (unitary IFFT keeps the mean power).
  // d|y_m|^2 = 2 fft(e_m y_m), d||z||^2 = 2 z.
  loss.value = n * peak / total;
  TimeFrame impulse(y.size());
  impulse[loss.argmax] = y[loss.argmax];
  const auto peak_grad = fft(impulse);
  loss.gradient.resize(frame.size());
  for (std::size_t k = 0; k < frame.size(); ++k) {
    loss.gradient[k] = 2.0 * n * (peak_grad[k] * total - peak * frame[k]) / (total * total);
  }
  if (scale == PaprScale::kDb) {
    const double factor = 10.0 / (loss.value * std::numbers::ln10);
    for (auto& g : loss.gradient) g *= factor;
    loss.value = 10.0 * std::log10(loss.value);
  }
  return loss;
}

void LossWeights::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("loss weight lambda must be >= 0");
}

double combined_loss(double mse_term, double papr_term, const LossWeights& w) {
  w.validate();
  if (w.lambda == 0.0) return mse_term;
  return mse_term + w.lambda * papr_term;
}

void SoftClipConfig::validate() const {
  if (!(rho > 0.0)) throw ConfigError("soft clip rho must be > 0");
  if (!(gamma > 0.0)) throw ConfigError("soft clip gamma must be > 0");
}

SoftClip::SoftClip(const TimeFrame& input, const SoftClipConfig& cfg)
    : input_(input), cfg_(cfg), mean_amplitude_(papr::mean_amplitude(input.span())) {
  evaluate();
}

SoftClip::SoftClip(const TimeFrame& input, const SoftClipConfig& cfg, double mean_amplitude)
    : input_(input), cfg_(cfg), mean_amplitude_(mean_amplitude) {
  evaluate();
}

void SoftClip::evaluate() {
  cfg_.validate();
  threshold_ = cfg_.rho * mean_amplitude_;
  output_ = input_;
  for (auto& s : output_) {
    const double r = std::abs(s);
    if (r > threshold_) s *= 1.0 - (r - threshold_) / (r + cfg_.gamma);
  }
}

// For a clipped sample (r > c) the map is y g(r) with g = (c + gamma)/(r + gamma).
// Its 2x2 real Jacobian is g I + (g'/r) y y^T with g' = -(c + gamma)/(r + gamma)^2,
// which is symmetric. With mean_gradient the threshold c = rho * mean(r) adds the
// rank-one coupling y_n / (r_n + gamma) * (rho/N) * sum_j <y_j / r_j, v_j>.
Samples SoftClip::jvp(std::span<const Complex> direction) const {
  const std::size_t n = input_.size();
  if (direction.size() != n) throw ShapeError("jvp direction length mismatch");
  Samples out(n);
  double coupling = 0.0;
  if (cfg_.mean_gradient) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r = std::abs(input_[j]);
      if (r > 0.0) coupling += dot(std::span(&input_[j], 1), direction.subspan(j, 1)) / r;
    }
    coupling *= cfg_.rho / static_cast<double>(n);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Complex y = input_[k];
    const double r = std::abs(y);
    if (r <= threshold_) {
      out[k] = direction[k];
      continue;
    }
    const double denom = r + cfg_.gamma;
    const double g = (threshold_ + cfg_.gamma) / denom;
    const double dg = -(threshold_ + cfg_.gamma) / (denom * denom);
    const double radial = (y.real() * direction[k].real() + y.imag() * direction[k].imag()) / r;
    out[k] = g * direction[k] + y * (dg * radial);
    if (cfg_.mean_gradient) out[k] += y * (coupling / denom);
  }
  return out;
}

Samples SoftClip::vjp(std::span<const Complex> cotangent) const {
  const std::size_t n = input_.size();
  if (cotangent.size() != n) throw ShapeError("vjp cotangent length mismatch");
  Samples out(n);
  double coupling = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Complex y = input_[k];
    const double r = std::abs(y);
    if (r <= threshold_) {
      out[k] = cotangent[k];
      continue;
    }
    const double denom = r + cfg_.gamma;
    const double g = (threshold_ + cfg_.gamma) / denom;
    const double dg = -(threshold_ + cfg_.gamma) / (denom * denom);
    const double radial = (y.real() * cotangent[k].real() + y.imag() * cotangent[k].imag()) / r;
    out[k] = g * cotangent[k] + y * (dg * radial);
    if (cfg_.mean_gradient) {
      coupling += (y.real() * cotangent[k].real() + y.imag() * cotangent[k].imag()) / denom;
    }
  }
  if (cfg_.mean_gradient) {
    coupling *= cfg_.rho / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = std::abs(input_[j]);
      if (r > 0.0) out[j] += input_[j] * (coupling / r);
    }
  }
  return out;
}

GradCheckReport grad_check(GradOp op, std::size_t trials, double step, RngStream& rng,
                           const GradCheckOptions& options) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be > 0");
  GradCheckReport report;
  report.step = step;
  for (std::size_t t = 0; t < trials; ++t) {
    const double err =
        op == GradOp::kPaprLoss
            ? check_papr_loss(options.n_subcarriers, step, rng, options.papr_scale, report.rejected)
            : check_soft_clip(options.n_subcarriers, step, rng, options.soft_clip, report.rejected);
    report.max_rel_error = std::max(report.max_rel_error, err);
    ++report.probe_count;
  }
  return report;
}

}  // namespace papr
