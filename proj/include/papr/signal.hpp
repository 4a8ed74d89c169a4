#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace papr {

using Complex = std::complex<double>;
using Samples = std::vector<Complex>;

namespace detail {

template <class Tag>
class Frame {
 public:
  Frame() = default;
  explicit Frame(std::size_t n) : data_(n) {}
  explicit Frame(Samples data) : data_(std::move(data)) {}

  std::size_t size() const noexcept { return data_.size(); }
  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }

  std::span<Complex> span() noexcept { return data_; }
  std::span<const Complex> span() const noexcept { return data_; }
  const Samples& values() const noexcept { return data_; }
  Samples& values() noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const Frame&) const = default;

 private:
  Samples data_;
};

struct FrequencyTag {};
struct TimeTag {};

}  // namespace detail

/// N subcarrier symbols (encoder output z, modulated sequence X).
using FrequencyFrame = detail::Frame<detail::FrequencyTag>;
/// N time-domain samples of one OFDM symbol.
using TimeFrame = detail::Frame<detail::TimeTag>;

/// Subcarrier counts accepted by experiments: powers of two in [16, 256].
bool is_supported_size(std::size_t n) noexcept;
void require_supported_size(std::size_t n);

/// Unitary inverse DFT (any power-of-two length, else ConfigError): y_k = (1/sqrt(N)) sum_m z_m exp(+j 2 pi k m / N).
TimeFrame ifft(const FrequencyFrame& frame);
/// Unitary forward DFT, the exact inverse of ifft.
FrequencyFrame fft(const TimeFrame& frame);

double energy(std::span<const Complex> x) noexcept;
double mean_power(std::span<const Complex> x) noexcept;
double mean_amplitude(std::span<const Complex> x) noexcept;

struct NoiseSpec {
  double snr_db = 0.0;
  /// Per-complex-sample noise variance; each of I/Q gets half.
  double sigma_squared = 1.0;

  /// sigma^2 = signal_power / 10^(snr_db/10). snr_db = +inf gives a noiseless channel.
  static NoiseSpec from_snr_db(double snr_db, double signal_power = 1.0);
};

/// Random stream handed to every stochastic operation.
using RngStream = std::mt19937_64;

/// Counter-based split of a master seed: distinct (stream, index) pairs give
/// statistically independent seeds, independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept;

/// y + n with n ~ CN(0, sigma^2).
TimeFrame awgn(const TimeFrame& frame, const NoiseSpec& noise, RngStream& rng);

}  // namespace papr
