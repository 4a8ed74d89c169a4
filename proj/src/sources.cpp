#include "papr/sources.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include "papr/error.hpp"

namespace papr {
namespace {

static_assert(std::endian::native == std::endian::little,
              "SYMF I/O assumes a little-endian host");

template <class T>
void put(std::ostream& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <class T>
bool get(std::istream& in, T& value) {
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) return false;
  std::memcpy(&value, bytes, sizeof(T));
  return true;
}

double gray_level(unsigned bits) {
  switch (bits & 3u) {
    case 0b00: return -3.0;
    case 0b01: return -1.0;
    case 0b11: return 1.0;
    default: return 3.0;
  }
}

}  // namespace

SourceSpec SourceSpec::parse(const std::string& text, std::size_t n_subcarriers) {
  SourceSpec spec;
  spec.n_subcarriers = n_subcarriers;
  if (text == "qam16") {
    spec.kind = SourceKind::kQam16;
  } else if (text == "gaussian" || text == "gaussian_surrogate") {
    spec.kind = SourceKind::kGaussianSurrogate;
  } else if (text.rfind("file:", 0) == 0 && text.size() > 5) {
    spec.kind = SourceKind::kLatentFile;
    spec.path = text.substr(5);
  } else {
    throw KeyError("source", "expected qam16, gaussian or file:<path>, got '" + text + "'");
  }
  return spec;
}

std::string SourceSpec::to_string() const {
  switch (kind) {
    case SourceKind::kQam16: return "qam16";
    case SourceKind::kGaussianSurrogate: return "gaussian";
    case SourceKind::kLatentFile: return "file:" + path.value_or("");
  }
  return {};
}

void SourceSpec::validate() const {
  if ((kind == SourceKind::kLatentFile) != path.has_value()) {
    throw KeyError("source", "a path is required for latent files and only for them");
  }
  if (n_subcarriers == 0) throw KeyError("n", "must be positive");
}

const std::array<Complex, 16>& qam16_constellation() {
  static const auto table = [] {
    std::array<Complex, 16> points{};
    const double scale = 1.0 / std::sqrt(10.0);
    for (unsigned idx = 0; idx < 16; ++idx) {
      points[idx] = Complex(gray_level(idx >> 2), gray_level(idx)) * scale;
    }
    return points;
  }();
  return table;
}

FrequencyFrame qam16_frame(std::size_t n, RngStream& rng) {
  const auto& points = qam16_constellation();
  std::uniform_int_distribution<unsigned> pick(0, 15);
  FrequencyFrame frame(n);
  for (auto& s : frame) s = points[pick(rng)];
  return frame;
}

FrequencyFrame gaussian_frame(std::size_t n, RngStream& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  FrequencyFrame frame(n);
  for (auto& s : frame) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    s = Complex(re, im);
  }
  return normalize_power(std::move(frame));
}

FrequencyFrame normalize_power(FrequencyFrame frame) {
  const double power = mean_power(frame.span());
  if (!(power > 0.0)) throw UndefinedInputError("cannot normalize an all-zero frame");
  const double scale = 1.0 / std::sqrt(power);
  for (auto& s : frame) s *= scale;
  return frame;
}

FrequencyFrame generate_frame(const SourceSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case SourceKind::kQam16: return qam16_frame(spec.n_subcarriers, rng);
    case SourceKind::kGaussianSurrogate: return gaussian_frame(spec.n_subcarriers, rng);
    case SourceKind::kLatentFile: break;
  }
  throw ConfigError("latent file sources are read through LatentReader");
}

LatentReader::LatentReader(const std::string& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw FileError(path, "cannot open latent file");
  std::array<char, 4> magic{};
  std::uint32_t version = 0;
  if (!in_.read(magic.data(), magic.size()) || magic != kSymfMagic) {
    throw FormatError("bad SYMF magic in " + path);
  }
  if (!get(in_, version) || !get(in_, header_.n_subcarriers) ||
      !get(in_, header_.frame_count)) {
    throw FormatError("truncated SYMF header in " + path);
  }
  if (version != kSymfVersion) {
    throw FormatError("unsupported SYMF version " + std::to_string(version) + " in " + path);
  }
  if (header_.n_subcarriers == 0) throw FormatError("SYMF N is zero in " + path);

  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (!ec) {
    const auto payload = static_cast<unsigned long long>(header_.frame_count) *
                         header_.n_subcarriers * 8ULL;
    if (size != kSymfHeaderBytes + payload) {
      throw FormatError("SYMF payload size does not match header in " + path);
    }
  }
}

std::optional<FrequencyFrame> LatentReader::next_raw() {
  if (next_ >= header_.frame_count) return std::nullopt;
  FrequencyFrame frame(header_.n_subcarriers);
  for (auto& s : frame) {
    float re = 0.0F;
    float im = 0.0F;
    if (!get(in_, re) || !get(in_, im)) {
      throw FormatError("truncated SYMF payload in " + path_);
    }
    s = Complex(re, im);
  }
  ++next_;
  return frame;
}

std::optional<FrequencyFrame> LatentReader::next() {
  auto frame = next_raw();
  if (!frame) return std::nullopt;
  return normalize_power(std::move(*frame));
}

LatentWriter::LatentWriter(const std::string& path, std::uint32_t n_subcarriers)
    : path_(path), tmp_path_(path + ".tmp"), out_(tmp_path_, std::ios::binary | std::ios::trunc),
      n_(n_subcarriers) {
  if (!out_) throw FileError(tmp_path_, "cannot create latent file");
  if (n_ == 0) throw ConfigError("SYMF N must be positive");
  out_.write(kSymfMagic.data(), kSymfMagic.size());
  put(out_, kSymfVersion);
  put(out_, n_);
  put(out_, std::uint64_t{0});
}

LatentWriter::~LatentWriter() {
  if (!finished_) {
    out_.close();
    std::remove(tmp_path_.c_str());
  }
}

void LatentWriter::write(const FrequencyFrame& frame) {
  if (frame.size() != n_) {
    throw ShapeError("frame has " + std::to_string(frame.size()) + " symbols, file expects " +
                     std::to_string(n_));
  }
  for (const auto& s : frame) {
    put(out_, static_cast<float>(s.real()));
    put(out_, static_cast<float>(s.imag()));
  }
  ++count_;
}

void LatentWriter::finish() {
  out_.seekp(12);
  put(out_, count_);
  out_.close();
  if (!out_) throw FileError(tmp_path_, "failed writing latent file");
  std::error_code ec;
  std::filesystem::rename(tmp_path_, path_, ec);
  if (ec) throw FileError(path_, "cannot publish latent file");
  finished_ = true;
}

}  // namespace papr
