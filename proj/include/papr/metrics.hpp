#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "papr/signal.hpp"

namespace papr {

struct PaprSample {
  double value_db = 0.0;
};

/// 10 log10(max_k |y_k|^2 / mean_k |y_k|^2) using the frame's own mean power.
PaprSample papr_db(const TimeFrame& frame);
/// Linear peak-to-mean power ratio of raw samples.
double papr_linear(std::span<const Complex> samples);

/// Ascending threshold grid [first, last] with fixed step, endpoints included.
std::vector<double> threshold_grid(double first_db = 0.0, double last_db = 14.0,
                                   double step_db = 0.1);

struct CcdfCurve {
  std::vector<double> thresholds_db;
  std::vector<double> exceedance;
  std::uint64_t n_samples = 0;

  /// Smallest grid threshold whose exceedance is <= probability, or NaN if none.
  double threshold_at(double probability) const;
};

/// Mergeable exceedance counts. Merging partial accumulators in any
/// partition gives the same curve as one pass over all samples.
class CcdfAccumulator {
 public:
  explicit CcdfAccumulator(std::vector<double> thresholds_db);

  void add(PaprSample sample);
  void merge(const CcdfAccumulator& other);
  CcdfCurve curve() const;

  const std::vector<double>& thresholds_db() const noexcept { return thresholds_; }
  std::uint64_t count() const noexcept { return n_; }

 private:
  std::vector<double> thresholds_;
  std::vector<std::uint64_t> exceed_;
  std::uint64_t n_ = 0;
};

/// exceedance[i] = #{samples > thresholds_db[i]} / n.
CcdfCurve estimate_ccdf(std::span<const PaprSample> samples, std::span<const double> thresholds_db);

/// CSV with header `papr_db,ccdf`, one row per threshold.
void write_ccdf_csv(std::ostream& out, const CcdfCurve& curve);

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

struct DistortionReport {
  double mse = 0.0;
  /// 10 log10(error power / reference power); -inf for an exact match.
  double evm_db = 0.0;
  /// 10 log10(peak^2 / mse); kInfinitePsnr when mse == 0.
  double psnr_db = kInfinitePsnr;
};

DistortionReport distortion(std::span<const Complex> reference, std::span<const Complex> received,
                            double peak = 1.0);
DistortionReport distortion(std::span<const double> reference, std::span<const double> received,
                            double peak = 1.0);

/// Shortest decimal text that round-trips the double; "inf"/"-inf"/"nan" otherwise.
std::string format_double(double value);

}  // namespace papr
