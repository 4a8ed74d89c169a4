#include "papr/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "papr/error.hpp"

namespace papr {
namespace {

template <class T>
DistortionReport distortion_impl(std::span<const T> reference, std::span<const T> received,
                                 double peak) {
  if (reference.size() != received.size()) {
    throw ShapeError("distortion inputs differ in length: " + std::to_string(reference.size()) +
                     " vs " + std::to_string(received.size()));
  }
  if (reference.empty()) throw UndefinedInputError("distortion of empty inputs");
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    err += std::norm(reference[i] - received[i]);
    ref += std::norm(reference[i]);
  }
  DistortionReport report;
  report.mse = err / static_cast<double>(reference.size());
  report.evm_db = 10.0 * std::log10(err / ref);
  report.psnr_db = report.mse == 0.0 ? kInfinitePsnr : 10.0 * std::log10(peak * peak / report.mse);
  return report;
}

}  // namespace

double papr_linear(std::span<const Complex> samples) {
  double peak = 0.0;
  double sum = 0.0;
  for (const auto& v : samples) {
    const double p = std::norm(v);
    peak = std::max(peak, p);
    sum += p;
  }
  if (!(sum > 0.0)) throw UndefinedInputError("PAPR of an all-zero frame is undefined");
  return peak * static_cast<double>(samples.size()) / sum;
}

PaprSample papr_db(const TimeFrame& frame) {
  return PaprSample{10.0 * std::log10(papr_linear(frame.span()))};
}

std::vector<double> threshold_grid(double first_db, double last_db, double step_db) {
  if (!(step_db > 0.0) || !(last_db >= first_db)) {
    throw ConfigError("threshold grid needs step > 0 and last >= first");
  }
  // Index-based, then snapped to 1e-9 dB so 0.1 dB steps print as written.
  const auto count = static_cast<std::size_t>(std::floor((last_db - first_db) / step_db + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = std::round((first_db + static_cast<double>(i) * step_db) * 1e9) / 1e9;
  }
  return grid;
}

double CcdfCurve::threshold_at(double probability) const {
  for (std::size_t i = 0; i < thresholds_db.size(); ++i) {
    if (exceedance[i] <= probability) return thresholds_db[i];
  }
  return std::nan("");
}

CcdfAccumulator::CcdfAccumulator(std::vector<double> thresholds_db)
    : thresholds_(std::move(thresholds_db)), exceed_(thresholds_.size(), 0) {
  if (!std::is_sorted(thresholds_.begin(), thresholds_.end())) {
    throw ConfigError("CCDF threshold grid must be ascending");
  }
}

void CcdfAccumulator::add(PaprSample sample) {
  // Thresholds strictly below the sample are exceeded.
  const auto below = std::lower_bound(thresholds_.begin(), thresholds_.end(), sample.value_db);
  const auto k = static_cast<std::size_t>(below - thresholds_.begin());
  for (std::size_t i = 0; i < k; ++i) ++exceed_[i];
  ++n_;
}

void CcdfAccumulator::merge(const CcdfAccumulator& other) {
  if (other.thresholds_ != thresholds_) throw ShapeError("cannot merge CCDFs on different grids");
  for (std::size_t i = 0; i < exceed_.size(); ++i) exceed_[i] += other.exceed_[i];
  n_ += other.n_;
}

CcdfCurve CcdfAccumulator::curve() const {
  if (n_ == 0) throw UndefinedInputError("CCDF of an empty sample set");
  CcdfCurve c;
  c.thresholds_db = thresholds_;
  c.n_samples = n_;
  c.exceedance.reserve(exceed_.size());
  for (auto count : exceed_) {
    c.exceedance.push_back(static_cast<double>(count) / static_cast<double>(n_));
  }
  return c;
}

CcdfCurve estimate_ccdf(std::span<const PaprSample> samples, std::span<const double> thresholds_db) {
  CcdfAccumulator acc({thresholds_db.begin(), thresholds_db.end()});
  for (const auto& s : samples) acc.add(s);
  return acc.curve();
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

void write_ccdf_csv(std::ostream& out, const CcdfCurve& curve) {
  out << "papr_db,ccdf\n";
  for (std::size_t i = 0; i < curve.thresholds_db.size(); ++i) {
    out << format_double(curve.thresholds_db[i]) << ',' << format_double(curve.exceedance[i])
        << '\n';
  }
}

DistortionReport distortion(std::span<const Complex> reference, std::span<const Complex> received,
                            double peak) {
  return distortion_impl(reference, received, peak);
}

DistortionReport distortion(std::span<const double> reference, std::span<const double> received,
                            double peak) {
  return distortion_impl(reference, received, peak);
}

}  // namespace papr
