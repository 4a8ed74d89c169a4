#include "papr/signal.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "papr/error.hpp"

namespace papr {
namespace {

// FFTW planning is not thread-safe; execution on fresh arrays is. Plans are
// created once per (size, direction) under a lock and reused for the process.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    auto plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

Samples transform(const Samples& in, int sign) {
  const auto n = in.size();
  if (!std::has_single_bit(n)) {
    throw ConfigError("transform length must be a power of two, got " + std::to_string(n));
  }
  Samples out(n);
  auto plan = plan_cache().get(n, sign);
  // std::complex<double> is layout-compatible with fftw_complex.
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : out) v *= scale;
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

bool is_supported_size(std::size_t n) noexcept {
  return n >= 16 && n <= 256 && std::has_single_bit(n);
}

void require_supported_size(std::size_t n) {
  if (!is_supported_size(n)) {
    throw ConfigError("subcarrier count must be a power of two in [16, 256], got " +
                      std::to_string(n));
  }
}

TimeFrame ifft(const FrequencyFrame& frame) {
  return TimeFrame(transform(frame.values(), FFTW_BACKWARD));
}

FrequencyFrame fft(const TimeFrame& frame) {
  return FrequencyFrame(transform(frame.values(), FFTW_FORWARD));
}

double energy(std::span<const Complex> x) noexcept {
  double sum = 0.0;
  for (const auto& v : x) sum += std::norm(v);
  return sum;
}

double mean_power(std::span<const Complex> x) noexcept {
  return x.empty() ? 0.0 : energy(x) / static_cast<double>(x.size());
}

double mean_amplitude(std::span<const Complex> x) noexcept {
  if (x.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& v : x) sum += std::abs(v);
  return sum / static_cast<double>(x.size());
}

NoiseSpec NoiseSpec::from_snr_db(double snr_db, double signal_power) {
  if (std::isnan(snr_db)) throw ConfigError("snr_db is NaN");
  if (!(signal_power >= 0.0)) throw ConfigError("signal power must be non-negative");
  return NoiseSpec{snr_db, signal_power / std::pow(10.0, snr_db / 10.0)};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

TimeFrame awgn(const TimeFrame& frame, const NoiseSpec& noise, RngStream& rng) {
  if (!(noise.sigma_squared >= 0.0)) {
    throw ConfigError("noise variance must be non-negative");
  }
  if (noise.sigma_squared == 0.0) return frame;
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise.sigma_squared / 2.0));
  TimeFrame out = frame;
  for (auto& v : out) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += Complex(re, im);
  }
  return out;
}

}  // namespace papr
