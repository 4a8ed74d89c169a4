#include "papr/selection.hpp"

#include <string>

#include "papr/error.hpp"
#include "papr/metrics.hpp"

namespace papr {
namespace {

constexpr std::uint64_t kSlmStream = 0x534c4d;  // "SLM"
constexpr std::uint64_t kPtsStream = 0x505453;  // "PTS"

void check_info(const SideInfo& info, SelectionTechnique expected, std::size_t size) {
  if (info.technique != expected) throw SideInfoError("side information is for another technique");
  if (info.selected_index >= size) {
    throw SideInfoError("side information index " + std::to_string(info.selected_index) +
                        " out of range [0, " + std::to_string(size) + ")");
  }
}

void check_length(std::size_t got, std::size_t expected) {
  if (got != expected) {
    throw ShapeError("frame has " + std::to_string(got) + " symbols, configured for " +
                     std::to_string(expected));
  }
}

}  // namespace

PhaseFactorSequence quaternary_phases(std::size_t length, RngStream& rng) {
  static const Complex alphabet[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::uniform_int_distribution<int> pick(0, 3);
  PhaseFactorSequence out(length);
  for (auto& w : out) w = alphabet[pick(rng)];
  return out;
}

void SlmConfig::validate() const {
  if (v_candidates < 1) throw KeyError("v", "SLM needs at least one candidate");
}

void PtsConfig::validate(std::size_t n_subcarriers) const {
  if (v_partitions < 1) throw KeyError("v", "PTS needs at least one partition");
  if (m_trials < 1) throw KeyError("m-trials", "PTS needs at least one trial");
  if (n_subcarriers % v_partitions != 0) {
    throw KeyError("v", "partition count " + std::to_string(v_partitions) +
                            " does not divide N = " + std::to_string(n_subcarriers));
  }
}

SlmCodebook::SlmCodebook(const SlmConfig& cfg, std::size_t n_subcarriers) : n_(n_subcarriers) {
  cfg.validate();
  sequences_.reserve(cfg.v_candidates);
  sequences_.emplace_back(n_, Complex(1.0, 0.0));
  for (std::size_t v = 1; v < cfg.v_candidates; ++v) {
    RngStream rng(derive_seed(cfg.seed, kSlmStream, v));
    sequences_.push_back(quaternary_phases(n_, rng));
  }
}

const PhaseFactorSequence& SlmCodebook::sequence(std::size_t index) const {
  return sequences_.at(index);
}

FrequencyFrame SlmCodebook::apply(const FrequencyFrame& frame, std::size_t index) const {
  check_length(frame.size(), n_);
  const auto& p = sequences_.at(index);
  FrequencyFrame out = frame;
  for (std::size_t k = 0; k < n_; ++k) out[k] *= p[k];
  return out;
}

Selection SlmCodebook::transmit(const FrequencyFrame& frame) const {
  check_length(frame.size(), n_);
  Selection best{ifft(frame), {SelectionTechnique::kSlm, 0}};
  double best_papr = papr_linear(best.frame.span());
  for (std::size_t v = 1; v < sequences_.size(); ++v) {
    auto candidate = ifft(apply(frame, v));
    const double papr = papr_linear(candidate.span());
    if (papr < best_papr) {
      best_papr = papr;
      best = {std::move(candidate), {SelectionTechnique::kSlm, v}};
    }
  }
  return best;
}

FrequencyFrame SlmCodebook::receive(const FrequencyFrame& received, const SideInfo& info) const {
  check_info(info, SelectionTechnique::kSlm, sequences_.size());
  check_length(received.size(), n_);
  const auto& p = sequences_[info.selected_index];
  FrequencyFrame out = received;
  for (std::size_t k = 0; k < n_; ++k) out[k] *= std::conj(p[k]);
  return out;
}

PtsCodebook::PtsCodebook(const PtsConfig& cfg, std::size_t n_subcarriers)
    : n_(n_subcarriers), v_(cfg.v_partitions), block_(0) {
  cfg.validate(n_subcarriers);
  block_ = n_ / v_;
  weights_.reserve(cfg.m_trials);
  weights_.emplace_back(v_, Complex(1.0, 0.0));
  for (std::size_t m = 1; m < cfg.m_trials; ++m) {
    RngStream rng(derive_seed(cfg.seed, kPtsStream, m));
    weights_.push_back(quaternary_phases(v_, rng));
  }
}

const PhaseFactorSequence& PtsCodebook::weights(std::size_t trial) const {
  return weights_.at(trial);
}

std::vector<TimeFrame> PtsCodebook::partial_sequences(const FrequencyFrame& frame) const {
  check_length(frame.size(), n_);
  std::vector<TimeFrame> partials;
  partials.reserve(v_);
  for (std::size_t v = 0; v < v_; ++v) {
    FrequencyFrame block(n_);
    for (std::size_t k = v * block_; k < (v + 1) * block_; ++k) block[k] = frame[k];
    partials.push_back(ifft(block));
  }
  return partials;
}

TimeFrame PtsCodebook::combine(const std::vector<TimeFrame>& partials, std::size_t trial) const {
  const auto& w = weights_.at(trial);
  TimeFrame out(n_);
  for (std::size_t v = 0; v < v_; ++v) {
    for (std::size_t k = 0; k < n_; ++k) out[k] += w[v] * partials[v][k];
  }
  return out;
}

Selection PtsCodebook::transmit(const FrequencyFrame& frame) const {
  const auto partials = partial_sequences(frame);
  Selection best{combine(partials, 0), {SelectionTechnique::kPts, 0}};
  double best_papr = papr_linear(best.frame.span());
  for (std::size_t m = 1; m < weights_.size(); ++m) {
    auto candidate = combine(partials, m);
    const double papr = papr_linear(candidate.span());
    if (papr < best_papr) {
      best_papr = papr;
      best = {std::move(candidate), {SelectionTechnique::kPts, m}};
    }
  }
  return best;
}

FrequencyFrame PtsCodebook::receive(const FrequencyFrame& received, const SideInfo& info) const {
  check_info(info, SelectionTechnique::kPts, weights_.size());
  check_length(received.size(), n_);
  const auto& w = weights_[info.selected_index];
  FrequencyFrame out = received;
  for (std::size_t k = 0; k < n_; ++k) out[k] *= std::conj(w[partition_of(k)]);
  return out;
}

Selection slm_transmit(const FrequencyFrame& frame, const SlmConfig& cfg) {
  return SlmCodebook(cfg, frame.size()).transmit(frame);
}

FrequencyFrame slm_receive(const FrequencyFrame& received, const SideInfo& info,
                           const SlmConfig& cfg) {
  return SlmCodebook(cfg, received.size()).receive(received, info);
}

Selection pts_transmit(const FrequencyFrame& frame, const PtsConfig& cfg) {
  return PtsCodebook(cfg, frame.size()).transmit(frame);
}

FrequencyFrame pts_receive(const FrequencyFrame& received, const SideInfo& info,
                           const PtsConfig& cfg) {
  return PtsCodebook(cfg, received.size()).receive(received, info);
}

}  // namespace papr
