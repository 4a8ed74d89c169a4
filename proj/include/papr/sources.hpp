#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>

#include "papr/signal.hpp"

namespace papr {

enum class SourceKind { kQam16, kGaussianSurrogate, kLatentFile };

struct SourceSpec {
  SourceKind kind = SourceKind::kGaussianSurrogate;
  std::optional<std::string> path;  // set iff kind == kLatentFile
  std::size_t n_subcarriers = 64;

  /// Parses "qam16", "gaussian" or "file:<path>".
  static SourceSpec parse(const std::string& text, std::size_t n_subcarriers);
  std::string to_string() const;
  void validate() const;
};

/// Gray-coded 16QAM, unit average power. Index bits b3b2 select I, b1b0 select Q,
/// each pair mapped 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3, all scaled by 1/sqrt(10).
const std::array<Complex, 16>& qam16_constellation();

FrequencyFrame qam16_frame(std::size_t n, RngStream& rng);
/// i.i.d. CN(0,1) symbols rescaled to unit frame RMS.
FrequencyFrame gaussian_frame(std::size_t n, RngStream& rng);
/// Scales a frame to unit mean power. Throws UndefinedInputError on a zero frame.
FrequencyFrame normalize_power(FrequencyFrame frame);

/// Generates one frame for the stochastic source kinds. Latent files need a
/// LatentReader (sequential); this throws ConfigError for them.
FrequencyFrame generate_frame(const SourceSpec& spec, RngStream& rng);

// SYMF latent interchange file:
//   "SYMF" | u32 version=1 | u32 N | u64 frame_count | frame_count*N * (f32 re, f32 im)
// all little-endian.
inline constexpr std::array<char, 4> kSymfMagic{'S', 'Y', 'M', 'F'};
inline constexpr std::uint32_t kSymfVersion = 1;
inline constexpr std::size_t kSymfHeaderBytes = 20;

struct SymfHeader {
  std::uint32_t n_subcarriers = 0;
  std::uint64_t frame_count = 0;
};

/// Sequential reader; one per stream.
class LatentReader {
 public:
  explicit LatentReader(const std::string& path);

  const SymfHeader& header() const noexcept { return header_; }
  std::uint64_t frames_read() const noexcept { return next_; }

  /// Next stored frame, widened to double and RMS-normalized.
  /// std::nullopt signals end of stream.
  std::optional<FrequencyFrame> next();
  /// Next stored frame exactly as stored (f32 values widened, no normalization).
  std::optional<FrequencyFrame> next_raw();

 private:
  std::string path_;
  std::ifstream in_;
  SymfHeader header_;
  std::uint64_t next_ = 0;
};

class LatentWriter {
 public:
  /// Writes to `path` via a temporary file renamed into place by finish().
  LatentWriter(const std::string& path, std::uint32_t n_subcarriers);
  ~LatentWriter();
  LatentWriter(const LatentWriter&) = delete;
  LatentWriter& operator=(const LatentWriter&) = delete;

  void write(const FrequencyFrame& frame);
  /// Patches frame_count into the header and publishes the file.
  void finish();

 private:
  std::string path_;
  std::string tmp_path_;
  std::ofstream out_;
  std::uint32_t n_;
  std::uint64_t count_ = 0;
  bool finished_ = false;
};

}  // namespace papr
