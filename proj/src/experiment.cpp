#include "papr/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "papr/error.hpp"

namespace papr {
namespace {

constexpr std::uint64_t kSourceStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw KeyError(key, "expected a number, got '" + text + "'");
  }
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw KeyError(key, "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

std::vector<double> parse_grid(const std::string& key, const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(parse_real(key, trim(item)));
  if (values.empty()) throw KeyError(key, "empty list");
  return values;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Runs fn(i) for i in [0, count) on `workers` threads. Each index is handled
// by exactly one call, so per-index outputs do not depend on the worker count.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string resolve_output(const ExperimentSpec& spec, const std::string& kind) {
  const std::string& out = *spec.out;
  std::error_code ec;
  if (out.ends_with('/') || std::filesystem::is_directory(out, ec)) {
    std::filesystem::create_directories(out, ec);
    return (std::filesystem::path(out) / default_file_name(spec, kind)).string();
  }
  return out;
}

template <class Writer>
std::string write_output(const ExperimentSpec& spec, const std::string& kind, Writer&& writer) {
  const auto path = resolve_output(spec, kind);
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw FileError(path, "cannot open output file");
  writer(file);
  file.close();
  if (!file) throw FileError(path, "failed writing output file");
  return path;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

FrameSupply::FrameSupply(const ExperimentSpec& spec)
    : source_(spec.source), master_seed_(spec.master_seed), count_(spec.n_frames) {
  if (source_.kind != SourceKind::kLatentFile) return;
  LatentReader reader(*source_.path);
  if (reader.header().n_subcarriers != spec.n_subcarriers) {
    throw KeyError("n", "latent file holds N = " + std::to_string(reader.header().n_subcarriers) +
                            " frames, run configured for N = " + std::to_string(spec.n_subcarriers));
  }
  while (preloaded_.size() < spec.n_frames) {
    auto frame = reader.next();
    if (!frame) break;
    preloaded_.push_back(std::move(*frame));
  }
  count_ = preloaded_.size();
  if (count_ == 0) throw UndefinedInputError("latent file holds no frames");
}

FrequencyFrame FrameSupply::frame(std::size_t index) const {
  if (source_.kind == SourceKind::kLatentFile) return preloaded_.at(index);
  RngStream rng(derive_seed(master_seed_, kSourceStream, index));
  return generate_frame(source_, rng);
}

std::string technique_name(const TechniqueConfig& technique) {
  return std::visit(Overloaded{
                        [](const NoTechnique&) { return std::string("none"); },
                        [](const ClipConfig&) { return std::string("clip"); },
                        [](const CompandConfig&) { return std::string("compand"); },
                        [](const SlmConfig&) { return std::string("slm"); },
                        [](const PtsConfig&) { return std::string("pts"); },
                        [](const SoftClipConfig&) { return std::string("softclip"); },
                    },
                    technique);
}

std::string technique_label(const TechniqueConfig& technique) {
  return std::visit(
      Overloaded{
          [](const NoTechnique&) { return std::string("none"); },
          [](const ClipConfig& c) { return "clip_rho" + format_double(c.rho); },
          [](const CompandConfig& c) { return "compand_mu" + format_double(c.mu); },
          [](const SlmConfig& c) {
            return "slm_v" + std::to_string(c.v_candidates) + "_seed" + std::to_string(c.seed);
          },
          [](const PtsConfig& c) {
            return "pts_v" + std::to_string(c.v_partitions) + "_m" + std::to_string(c.m_trials) +
                   "_seed" + std::to_string(c.seed);
          },
          [](const SoftClipConfig& c) {
            return "softclip_rho" + format_double(c.rho) + "_gamma" + format_double(c.gamma);
          },
      },
      technique);
}

std::vector<double> ExperimentSpec::thresholds() const {
  return threshold_grid(grid_min_db, grid_max_db, grid_step_db);
}

std::string ExperimentSpec::canonical() const {
  std::ostringstream out;
  out << "source=" << source.to_string() << "\ntechnique=" << technique_label(technique)
      << "\nn=" << n_subcarriers << "\nframes=" << n_frames << "\nseed=" << master_seed
      << "\ngrid=" << format_double(grid_min_db) << ':' << format_double(grid_step_db) << ':'
      << format_double(grid_max_db)
      << "\nvprime=" << (v_prime == VPrimeEstimate::kSelfConsistent ? "self-consistent" : "received-mean")
      << "\nsnr-db=";
  for (std::size_t i = 0; i < snr_db.size(); ++i) out << (i ? "," : "") << format_double(snr_db[i]);
  out << '\n';
  return out.str();
}

void ExperimentSpec::validate() const {
  if (!is_supported_size(n_subcarriers)) {
    throw KeyError("n", "must be a power of two in [16, 256], got " + std::to_string(n_subcarriers));
  }
  source.validate();
  if (source.n_subcarriers != n_subcarriers) throw KeyError("n", "source and run disagree on N");
  if (n_frames < 1) throw KeyError("frames", "must be >= 1");
  if (workers < 1) throw KeyError("workers", "must be >= 1");
  if (!(grid_step_db > 0.0)) throw KeyError("grid-step", "must be > 0");
  if (!(grid_max_db >= grid_min_db)) throw KeyError("grid-max", "must be >= grid-min");
  for (double s : snr_db) {
    if (std::isnan(s)) throw KeyError("snr-db", "NaN in grid");
  }
  std::visit(Overloaded{
                 [](const NoTechnique&) {},
                 [](const ClipConfig& c) {
                   if (!(c.rho > 0.0) || !std::isfinite(c.rho)) throw KeyError("rho", "must be > 0");
                 },
                 [](const CompandConfig& c) {
                   if (!(c.mu > 0.0) || !std::isfinite(c.mu)) throw KeyError("mu", "must be > 0");
                 },
                 [](const SlmConfig& c) {
                   if (c.v_candidates < 1) throw KeyError("v", "must be >= 1");
                 },
                 [this](const PtsConfig& c) { c.validate(n_subcarriers); },
                 [](const SoftClipConfig& c) {
                   if (!(c.rho > 0.0)) throw KeyError("rho", "must be > 0");
                   if (!(c.gamma > 0.0)) throw KeyError("gamma", "must be > 0");
                 },
             },
             technique);
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "source", "technique", "n",        "frames",   "seed",     "rho",       "mu",
      "gamma",  "v",         "m-trials", "codebook-seed", "snr-db", "out",  "workers",
      "grid-min", "grid-max", "grid-step", "vprime"};
  return keys;
}

ExperimentSpec spec_from_settings(const Settings& settings) {
  const auto& keys = known_keys();
  for (const auto& [key, value] : settings) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw KeyError(key, "unknown key");
    }
  }
  for (const char* required : {"source", "technique"}) {
    if (!settings.contains(required)) throw KeyError(required, "missing required key");
  }
  const auto get = [&](const std::string& key) -> std::optional<std::string> {
    if (auto it = settings.find(key); it != settings.end()) return it->second;
    return std::nullopt;
  };
  const auto real_or = [&](const std::string& key, double fallback) {
    auto v = get(key);
    return v ? parse_real(key, *v) : fallback;
  };
  const auto count_or = [&](const std::string& key, std::uint64_t fallback) {
    auto v = get(key);
    return v ? parse_unsigned(key, *v) : fallback;
  };

  ExperimentSpec spec;
  spec.n_subcarriers = count_or("n", 64);
  spec.n_frames = count_or("frames", 100000);
  spec.master_seed = count_or("seed", 1);
  spec.workers = count_or("workers", 1);
  spec.grid_min_db = real_or("grid-min", 0.0);
  spec.grid_max_db = real_or("grid-max", 14.0);
  spec.grid_step_db = real_or("grid-step", 0.1);
  spec.source = SourceSpec::parse(*get("source"), spec.n_subcarriers);
  if (auto v = get("snr-db")) spec.snr_db = parse_grid("snr-db", *v);
  if (auto v = get("out")) spec.out = *v;
  if (auto v = get("vprime")) {
    if (*v == "self-consistent") {
      spec.v_prime = VPrimeEstimate::kSelfConsistent;
    } else if (*v == "received-mean") {
      spec.v_prime = VPrimeEstimate::kReceivedMean;
    } else {
      throw KeyError("vprime", "expected self-consistent or received-mean, got '" + *v + "'");
    }
  }

  // Every numeric parameter is range-checked even when the technique ignores it.
  const double rho = real_or("rho", 1.4);
  const double mu = real_or("mu", 4.0);
  const double gamma = real_or("gamma", 1e-12);
  const auto v = count_or("v", 4);
  const auto m = count_or("m-trials", 8);
  const auto codebook_seed = count_or("codebook-seed", 1);
  if (!(rho > 0.0) || !std::isfinite(rho)) throw KeyError("rho", "must be > 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw KeyError("mu", "must be > 0");
  if (!(gamma > 0.0)) throw KeyError("gamma", "must be > 0");
  if (v < 1) throw KeyError("v", "must be >= 1");
  if (m < 1) throw KeyError("m-trials", "must be >= 1");

  const auto name = *get("technique");
  if (name == "none") {
    spec.technique = NoTechnique{};
  } else if (name == "clip") {
    spec.technique = ClipConfig{rho};
  } else if (name == "compand") {
    spec.technique = CompandConfig{mu};
  } else if (name == "slm") {
    spec.technique = SlmConfig{v, codebook_seed};
  } else if (name == "pts") {
    spec.technique = PtsConfig{v, m, codebook_seed};
  } else if (name == "softclip") {
    spec.technique = SoftClipConfig{rho, gamma, false};
  } else {
    throw KeyError("technique", "expected none|clip|compand|slm|pts|softclip, got '" + name + "'");
  }
  spec.validate();
  return spec;
}

Settings read_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError(path, "cannot open config file");
  Settings settings;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    if (!settings.emplace(key, value).second) throw KeyError(key, "given more than once");
  }
  return settings;
}

ExperimentSpec parse_config(const std::string& path) { return spec_from_settings(read_settings(path)); }

std::string default_file_name(const ExperimentSpec& spec, const std::string& kind) {
  std::string source = spec.source.kind == SourceKind::kLatentFile
                           ? "file_" + std::filesystem::path(*spec.source.path).stem().string()
                           : spec.source.to_string();
  return kind + "_" + source + "_" + technique_label(spec.technique) + "_n" +
         std::to_string(spec.n_subcarriers) + ".csv";
}

TechniqueChain::TechniqueChain(const TechniqueConfig& technique, std::size_t n_subcarriers,
                               VPrimeEstimate v_prime)
    : technique_(technique), v_prime_(v_prime) {
  if (const auto* slm = std::get_if<SlmConfig>(&technique)) slm_.emplace(*slm, n_subcarriers);
  if (const auto* pts = std::get_if<PtsConfig>(&technique)) pts_.emplace(*pts, n_subcarriers);
}

Transmitted TechniqueChain::transmit(const FrequencyFrame& frame) const {
  return std::visit(
      Overloaded{
          [&](const NoTechnique&) { return Transmitted{ifft(frame), std::nullopt}; },
          [&](const ClipConfig& c) { return Transmitted{clip(ifft(frame), c), std::nullopt}; },
          [&](const CompandConfig& c) { return Transmitted{compand(ifft(frame), c), std::nullopt}; },
          [&](const SlmConfig&) {
            auto sel = slm_->transmit(frame);
            return Transmitted{std::move(sel.frame), sel.info};
          },
          [&](const PtsConfig&) {
            auto sel = pts_->transmit(frame);
            return Transmitted{std::move(sel.frame), sel.info};
          },
          [&](const SoftClipConfig& c) {
            return Transmitted{SoftClip(ifft(frame), c).output(), std::nullopt};
          },
      },
      technique_);
}

FrequencyFrame TechniqueChain::receive(const TimeFrame& received, const Transmitted& sent) const {
  return std::visit(
      Overloaded{
          [&](const CompandConfig& c) {
            const double v = estimate_v_prime(received, c, v_prime_);
            return fft(expand(received, c, v));
          },
          [&](const SlmConfig&) { return slm_->receive(fft(received), sent.side_info.value()); },
          [&](const PtsConfig&) { return pts_->receive(fft(received), sent.side_info.value()); },
          [&](const auto&) { return fft(received); },
      },
      technique_);
}

RunRecord run_ccdf_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const FrameSupply supply(spec);
  const TechniqueChain chain(spec.technique, spec.n_subcarriers, spec.v_prime);

  RunRecord record;
  record.spec_hash = fnv1a(spec.canonical());
  record.papr.resize(supply.size());
  parallel_for(supply.size(), spec.workers, [&](std::size_t i) {
    record.papr[i] = papr_db(chain.transmit(supply.frame(i)).frame);
  });
  record.ccdf = estimate_ccdf(record.papr, spec.thresholds());
  if (spec.out) {
    record.written_path =
        write_output(spec, "ccdf", [&](std::ostream& out) { write_ccdf_csv(out, *record.ccdf); });
  }
  record.wall_seconds = seconds_since(start);
  return record;
}

RunRecord run_distortion_sweep(const ExperimentSpec& spec, const std::vector<double>& snr_grid) {
  spec.validate();
  if (snr_grid.empty()) throw KeyError("snr-db", "sweep needs at least one SNR point");
  const auto start = std::chrono::steady_clock::now();
  const FrameSupply supply(spec);
  const TechniqueChain chain(spec.technique, spec.n_subcarriers, spec.v_prime);
  const auto n = supply.size();

  RunRecord record;
  record.spec_hash = fnv1a(spec.canonical());
  record.papr.resize(n);

  struct FrameError {
    double error = 0.0;
    double reference = 0.0;
  };
  std::vector<std::vector<FrameError>> errors(snr_grid.size(), std::vector<FrameError>(n));
  parallel_for(n, spec.workers, [&](std::size_t i) {
    const auto z = supply.frame(i);
    const auto sent = chain.transmit(z);
    record.papr[i] = papr_db(sent.frame);
    for (std::size_t s = 0; s < snr_grid.size(); ++s) {
      RngStream rng(derive_seed(derive_seed(spec.master_seed, kNoiseStream, s), kNoiseStream, i));
      const auto received = awgn(sent.frame, NoiseSpec::from_snr_db(snr_grid[s]), rng);
      const auto recovered = chain.receive(received, sent);
      double err = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) err += std::norm(z[k] - recovered[k]);
      errors[s][i] = {err, energy(z.span())};
    }
  });

  // Summed in frame order so the totals do not depend on scheduling.
  for (std::size_t s = 0; s < snr_grid.size(); ++s) {
    double err = 0.0;
    double ref = 0.0;
    for (const auto& e : errors[s]) {
      err += e.error;
      ref += e.reference;
    }
    DistortionReport r;
    r.mse = err / static_cast<double>(n * spec.n_subcarriers);
    r.evm_db = 10.0 * std::log10(err / ref);
    r.psnr_db = r.mse == 0.0 ? kInfinitePsnr : 10.0 * std::log10(1.0 / r.mse);
    record.sweep.push_back({snr_grid[s], r});
  }
  record.ccdf = estimate_ccdf(record.papr, spec.thresholds());
  if (spec.out) {
    record.written_path =
        write_output(spec, "sweep", [&](std::ostream& out) { write_sweep_csv(out, record.sweep); });
  }
  record.wall_seconds = seconds_since(start);
  return record;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep) {
  out << "snr_db,mse,evm_db\n";
  for (const auto& p : sweep) {
    out << format_double(p.snr_db) << ',' << format_double(p.report.mse) << ','
        << format_double(p.report.evm_db) << '\n';
  }
}

}  // namespace papr
