#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "papr/signal.hpp"

namespace papr {

/// Unit-magnitude per-subcarrier (SLM) or per-partition (PTS) weights.
using PhaseFactorSequence = std::vector<Complex>;

/// Draws `length` factors uniformly from {+1, -1, +j, -j}.
PhaseFactorSequence quaternary_phases(std::size_t length, RngStream& rng);

enum class SelectionTechnique { kSlm, kPts };

/// Out-of-band index the receiver needs to undo the selection.
struct SideInfo {
  SelectionTechnique technique = SelectionTechnique::kSlm;
  std::size_t selected_index = 0;
  bool operator==(const SideInfo&) const = default;
};

struct SlmConfig {
  std::size_t v_candidates = 4;
  std::uint64_t seed = 1;
  void validate() const;
};

struct PtsConfig {
  std::size_t v_partitions = 4;
  std::size_t m_trials = 8;
  std::uint64_t seed = 1;
  void validate(std::size_t n_subcarriers) const;
};

struct Selection {
  TimeFrame frame;
  SideInfo info;
};

/// Selected mapping over a codebook shared by transmitter and receiver.
/// Candidate 0 is all ones; candidate v >= 1 depends only on (seed, v, N),
/// so codebooks with more candidates extend smaller ones.
class SlmCodebook {
 public:
  SlmCodebook(const SlmConfig& cfg, std::size_t n_subcarriers);

  std::size_t size() const noexcept { return sequences_.size(); }
  std::size_t n_subcarriers() const noexcept { return n_; }
  const PhaseFactorSequence& sequence(std::size_t index) const;

  /// Candidate X (.) p_v before the IFFT.
  FrequencyFrame apply(const FrequencyFrame& frame, std::size_t index) const;

  /// Lowest-PAPR candidate after IFFT; ties go to the lowest index.
  Selection transmit(const FrequencyFrame& frame) const;
  /// Multiplies by conj(p_index).
  FrequencyFrame receive(const FrequencyFrame& received, const SideInfo& info) const;

 private:
  std::size_t n_;
  std::vector<PhaseFactorSequence> sequences_;
};

/// Partial transmit sequences with adjacent partitions and M random weight
/// vectors over {+1, -1, +j, -j}^V. Trial 0 is all ones; trial m >= 1 depends
/// only on (seed, m, V).
class PtsCodebook {
 public:
  PtsCodebook(const PtsConfig& cfg, std::size_t n_subcarriers);

  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t partitions() const noexcept { return v_; }
  const PhaseFactorSequence& weights(std::size_t trial) const;
  /// Partition owning subcarrier k.
  std::size_t partition_of(std::size_t k) const noexcept { return k / block_; }

  /// IFFT of each zero-padded partition.
  std::vector<TimeFrame> partial_sequences(const FrequencyFrame& frame) const;
  /// sum_v w_v * partial_v for the given trial.
  TimeFrame combine(const std::vector<TimeFrame>& partials, std::size_t trial) const;

  Selection transmit(const FrequencyFrame& frame) const;
  FrequencyFrame receive(const FrequencyFrame& received, const SideInfo& info) const;

 private:
  std::size_t n_;
  std::size_t v_;
  std::size_t block_;
  std::vector<PhaseFactorSequence> weights_;
};

Selection slm_transmit(const FrequencyFrame& frame, const SlmConfig& cfg);
FrequencyFrame slm_receive(const FrequencyFrame& received, const SideInfo& info,
                           const SlmConfig& cfg);
Selection pts_transmit(const FrequencyFrame& frame, const PtsConfig& cfg);
FrequencyFrame pts_receive(const FrequencyFrame& received, const SideInfo& info,
                           const PtsConfig& cfg);

}  // namespace papr
