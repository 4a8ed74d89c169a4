#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "papr/error.hpp"
#include "papr/experiment.hpp"

using namespace papr;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / "papr_experiment_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = (scratch_dir() / name).string();
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec spec_with(TechniqueConfig technique, std::size_t frames,
                         SourceKind kind = SourceKind::kGaussianSurrogate) {
  ExperimentSpec spec;
  spec.source = SourceSpec{kind, std::nullopt, 64};
  spec.technique = technique;
  spec.n_frames = frames;
  spec.master_seed = 2024;
  return spec;
}

std::string expect_key_error(const Settings& settings) {
  try {
    spec_from_settings(settings);
  } catch (const KeyError& e) {
    return e.key();
  }
  return "<no error>";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PAPRSIM_EXE) + " " + args + " 2>/dev/null";
  return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const auto path = write_file("minimal.cfg", "# minimal\nsource = gaussian\ntechnique = none\n");
  const auto spec = parse_config(path);
  CHECK(spec.n_subcarriers == 64);
  CHECK(spec.n_frames == 100000);
  CHECK(std::holds_alternative<NoTechnique>(spec.technique));
  CHECK(spec.source.kind == SourceKind::kGaussianSurrogate);
  const auto grid = spec.thresholds();
  CHECK(grid.size() == 141);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 14.0);
  CHECK_FALSE(spec.out);
}

TEST_CASE("config values map onto technique parameters") {
  const auto path = write_file("full.cfg",
                               "source = qam16\ntechnique = pts\nn = 128\nframes = 10\n"
                               "v = 8   # partitions\nm-trials = 16\ncodebook-seed = 5\n"
                               "snr-db = 0, 5.5, inf\nworkers = 3\n");
  const auto spec = parse_config(path);
  const auto& pts = std::get<PtsConfig>(spec.technique);
  CHECK(pts.v_partitions == 8);
  CHECK(pts.m_trials == 16);
  CHECK(pts.seed == 5);
  CHECK(spec.n_subcarriers == 128);
  CHECK(spec.source.n_subcarriers == 128);
  CHECK(spec.workers == 3);
  REQUIRE(spec.snr_db.size() == 3);
  CHECK(spec.snr_db[1] == 5.5);
  CHECK(std::isinf(spec.snr_db[2]));
}

TEST_CASE("config errors name the offending key") {
  const Settings base{{"source", "gaussian"}, {"technique", "clip"}};
  auto with = [&](const std::string& k, const std::string& v) {
    auto s = base;
    s[k] = v;
    return s;
  };
  CHECK(expect_key_error(with("rho", "-1")) == "rho");
  CHECK(expect_key_error(with("foo", "1")) == "foo");
  CHECK(expect_key_error(with("mu", "0")) == "mu");
  CHECK(expect_key_error(with("n", "48")) == "n");
  CHECK(expect_key_error(with("n", "512")) == "n");
  CHECK(expect_key_error(with("frames", "0")) == "frames");
  CHECK(expect_key_error(with("frames", "ten")) == "frames");
  CHECK(expect_key_error(with("technique", "tr")) == "technique");
  CHECK(expect_key_error(with("source", "qpsk")) == "source");
  CHECK(expect_key_error(with("gamma", "0")) == "gamma");
  CHECK(expect_key_error(with("snr-db", "1,x")) == "snr-db");
  CHECK(expect_key_error(with("vprime", "guess")) == "vprime");
  CHECK(expect_key_error({{"technique", "none"}}) == "source");
  CHECK(expect_key_error({{"source", "qam16"}}) == "technique");
  auto pts = with("technique", "pts");
  pts["v"] = "3";
  CHECK(expect_key_error(pts) == "v");

  const auto dup = write_file("dup.cfg", "source = qam16\nsource = gaussian\n");
  CHECK_THROWS_AS(read_settings(dup), KeyError);
  const auto junk = write_file("junk.cfg", "source qam16\n");
  CHECK_THROWS_AS(read_settings(junk), ConfigError);
  CHECK_THROWS_AS(read_settings((scratch_dir() / "missing.cfg").string()), FileError);
}

TEST_CASE("ccdf runs are byte-identical across repeats and worker counts") {
  for (TechniqueConfig technique :
       {TechniqueConfig{NoTechnique{}}, TechniqueConfig{ClipConfig{1.2}},
        TechniqueConfig{CompandConfig{4.0}}, TechniqueConfig{SlmConfig{4, 3}},
        TechniqueConfig{PtsConfig{4, 8, 3}}, TechniqueConfig{SoftClipConfig{1.4, 1e-12}}}) {
    std::vector<std::string> outputs;
    for (std::size_t workers : {1u, 1u, 4u, 7u}) {
      auto spec = spec_with(technique, 3000);
      spec.workers = workers;
      spec.out = (scratch_dir() / ("det_" + std::to_string(workers) + ".csv")).string();
      run_ccdf_experiment(spec);
      outputs.push_back(slurp(*spec.out));
    }
    for (const auto& o : outputs) CHECK(o == outputs.front());
    CHECK(outputs.front().rfind("papr_db,ccdf\n", 0) == 0);
  }
}

TEST_CASE("single frame runs repeat exactly") {
  auto spec = spec_with(NoTechnique{}, 1);
  spec.out = (scratch_dir() / "one.csv").string();
  run_ccdf_experiment(spec);
  const auto first = slurp(*spec.out);
  run_ccdf_experiment(spec);
  CHECK(slurp(*spec.out) == first);
}

TEST_CASE("sweeps are byte-identical across worker counts") {
  std::vector<std::string> outputs;
  for (std::size_t workers : {1u, 5u}) {
    auto spec = spec_with(CompandConfig{4.0}, 500);
    spec.workers = workers;
    spec.out = (scratch_dir() / "sweep.csv").string();
    run_distortion_sweep(spec, {0.0, 10.0, INFINITY});
    outputs.push_back(slurp(*spec.out));
  }
  CHECK(outputs[0] == outputs[1]);
  CHECK(outputs[0].rfind("snr_db,mse,evm_db\n0,", 0) == 0);
}

TEST_CASE("clipped frames respect the bound set by the amplitude cap") {
  const double rho = 1.0;
  const auto spec = spec_with(ClipConfig{rho}, 2000);
  const auto record = run_ccdf_experiment(spec);
  const FrameSupply supply(spec);
  double worst_bound = 0.0;
  for (std::size_t i = 0; i < supply.size(); ++i) {
    const auto y = ifft(supply.frame(i));
    const double p_before = mean_power(y.span());
    double p_after = 0.0;
    for (const auto& s : y) p_after += std::min(std::norm(s), rho * rho * p_before);
    p_after /= y.size();
    const double bound = 10.0 * std::log10(rho * rho * p_before / p_after);
    CHECK(record.papr[i].value_db <= bound + 1e-9);
    worst_bound = std::max(worst_bound, bound);
  }
  const auto& curve = *record.ccdf;
  for (std::size_t k = 0; k < curve.thresholds_db.size(); ++k) {
    if (curve.thresholds_db[k] >= worst_bound) CHECK(curve.exceedance[k] == 0.0);
  }
}

TEST_CASE("noiseless sweeps: exact for SLM/PTS/companding, ordered for clipping") {
  for (TechniqueConfig technique : {TechniqueConfig{SlmConfig{8, 1}}, TechniqueConfig{PtsConfig{4, 16, 1}}}) {
    const auto record = run_distortion_sweep(spec_with(technique, 500), {INFINITY});
    CHECK(record.sweep[0].report.evm_db <= -180.0);
  }
  const auto compand = run_distortion_sweep(spec_with(CompandConfig{4.0}, 500), {INFINITY});
  CHECK(compand.sweep[0].report.evm_db <= -100.0);

  double prev = INFINITY;
  for (double rho : {1.0, 1.2, 1.4, 1.6, 2.0}) {
    const auto r = run_distortion_sweep(spec_with(ClipConfig{rho}, 500), {INFINITY});
    CHECK(r.sweep[0].report.evm_db <= prev);
    prev = r.sweep[0].report.evm_db;
  }
}

TEST_CASE("received-mean V' leaves a companding error even without noise") {
  auto spec = spec_with(CompandConfig{4.0}, 200);
  spec.v_prime = VPrimeEstimate::kReceivedMean;
  const auto r = run_distortion_sweep(spec, {INFINITY});
  CHECK(r.sweep[0].report.evm_db > -60.0);
}

TEST_CASE("distortion falls as SNR rises") {
  const auto r = run_distortion_sweep(spec_with(NoTechnique{}, 500), {0.0, 10.0, 20.0, INFINITY});
  for (std::size_t i = 1; i < r.sweep.size(); ++i) CHECK(r.sweep[i].report.mse < r.sweep[i - 1].report.mse);
  // AWGN at 0 dB with unit-power symbols: mse ~ sigma^2 = 1.
  CHECK(r.sweep[0].report.mse == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("latent files feed experiments and end the run early") {
  const auto path = (scratch_dir() / "latents.symf").string();
  {
    LatentWriter writer(path, 64);
    RngStream rng(3);
    for (int i = 0; i < 50; ++i) writer.write(gaussian_frame(64, rng));
    writer.finish();
  }
  auto spec = spec_with(NoTechnique{}, 1000);
  spec.source = SourceSpec::parse("file:" + path, 64);
  const auto record = run_ccdf_experiment(spec);
  CHECK(record.papr.size() == 50);
  CHECK(record.ccdf->n_samples == 50);

  spec.n_subcarriers = 128;
  spec.source.n_subcarriers = 128;
  CHECK_THROWS_AS(run_ccdf_experiment(spec), KeyError);
}

TEST_CASE("output to a directory uses a descriptive file name") {
  auto spec = spec_with(PtsConfig{4, 8, 2}, 10, SourceKind::kQam16);
  spec.out = (scratch_dir() / "auto").string() + "/";
  const auto record = run_ccdf_experiment(spec);
  REQUIRE(record.written_path);
  CHECK(fs::path(*record.written_path).filename() == "ccdf_qam16_pts_v4_m8_seed2_n64.csv");
  CHECK(fs::exists(*record.written_path));

  spec.out = "/nonexistent-dir/x.csv";
  CHECK_THROWS_AS(run_ccdf_experiment(spec), FileError);
}

TEST_CASE("figure recipes on a 1e5-frame corpus") {
  const std::size_t frames = 100000;
  const auto at = [&](TechniqueConfig technique) {
    auto spec = spec_with(technique, frames);
    spec.workers = 4;
    return run_ccdf_experiment(spec).ccdf.value();
  };
  const auto dominates = [](const CcdfCurve& right, const CcdfCurve& left) {
    for (std::size_t k = 0; k < right.exceedance.size(); ++k) {
      if (right.exceedance[k] < left.exceedance[k]) return false;
    }
    return true;
  };
  const auto baseline = at(NoTechnique{});

  std::vector<CcdfCurve> clips;
  for (double rho : {1.0, 1.2, 1.4, 1.6, 2.0}) clips.push_back(at(ClipConfig{rho}));
  for (std::size_t i = 1; i < clips.size(); ++i) CHECK(dominates(clips[i], clips[i - 1]));

  std::vector<CcdfCurve> companded;
  for (double mu : {1.0, 2.0, 4.0, 8.0}) companded.push_back(at(CompandConfig{mu}));
  // Larger mu compresses harder: its curve lies left of smaller mu.
  for (std::size_t i = 1; i < companded.size(); ++i) {
    CHECK(companded[i].threshold_at(1e-2) <= companded[i - 1].threshold_at(1e-2));
    CHECK(companded[i].threshold_at(1e-3) <= companded[i - 1].threshold_at(1e-3));
  }

  std::vector<CcdfCurve> slm;
  for (std::size_t v : {1u, 2u, 4u, 8u}) slm.push_back(at(SlmConfig{v, 1}));
  for (std::size_t i = 1; i < slm.size(); ++i) CHECK(dominates(slm[i - 1], slm[i]));
  std::vector<CcdfCurve> pts;
  for (std::size_t m : {1u, 4u, 16u}) pts.push_back(at(PtsConfig{4, m, 1}));
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(dominates(pts[i - 1], pts[i]));

  std::vector<CcdfCurve> techniques = clips;
  techniques.insert(techniques.end(), companded.begin(), companded.end());
  techniques.insert(techniques.end(), slm.begin() + 1, slm.end());
  techniques.insert(techniques.end(), pts.begin() + 1, pts.end());
  techniques.push_back(at(SoftClipConfig{1.4, 1e-12}));
  for (const auto& c : techniques) CHECK(dominates(baseline, c));

  // Composite comparison: plain OFDM is rightmost at CCDF = 1e-2.
  const double none_1e2 = baseline.threshold_at(1e-2);
  for (const auto& c : {slm[1], clips[2], companded[2], techniques.back()}) {
    CHECK(c.threshold_at(1e-2) < none_1e2);
  }
}

TEST_CASE("PAPR at CCDF 1e-2 grows with the subcarrier count") {
  for (auto kind : {SourceKind::kQam16, SourceKind::kGaussianSurrogate}) {
    double prev = 0.0;
    for (std::size_t n : {64u, 128u, 256u}) {
      auto spec = spec_with(NoTechnique{}, 100000, kind);
      spec.n_subcarriers = n;
      spec.source.n_subcarriers = n;
      const double at = run_ccdf_experiment(spec).ccdf->threshold_at(1e-2);
      CHECK(at >= prev);
      prev = at;
    }
  }
}

TEST_CASE("paprsim CLI") {
  const auto dir = scratch_dir() / "cli";
  fs::create_directories(dir);
  const auto a = (dir / "a.csv").string();
  const auto b = (dir / "b.csv").string();
  const std::string common = " --source gaussian --technique slm --v 4 --frames 2000 --seed 9";
  CHECK(run_cli("ccdf" + common + " --workers 1 --out " + a) == 0);
  CHECK(run_cli("ccdf" + common + " --workers 6 --out " + b) == 0);
  CHECK(slurp(a) == slurp(b));

  const auto cfg = write_file("cli.cfg", "source = gaussian\ntechnique = slm\nv = 4\nframes = 2000\nseed = 9\n");
  const auto c = (dir / "c.csv").string();
  CHECK(run_cli("ccdf --config " + cfg + " --out " + c) == 0);
  CHECK(slurp(c) == slurp(a));

  const auto symf = (dir / "stub.symf").string();
  CHECK(run_cli("gen-latents-stub --frames 300 --out " + symf) == 0);
  LatentReader reader(symf);
  CHECK(reader.header().frame_count == 300);
  CHECK(reader.header().n_subcarriers == 64);
  CHECK(run_cli("ccdf --source file:" + symf + " --technique none --out " + (dir / "f.csv").string()) == 0);

  const auto sweep = (dir / "s.csv").string();
  CHECK(run_cli("sweep --source qam16 --technique compand --frames 200 --snr-db 5,inf --out " + sweep) == 0);
  CHECK(slurp(sweep).rfind("snr_db,mse,evm_db\n5,", 0) == 0);

  CHECK(run_cli("roundtrip --source gaussian --technique pts --frames 50 > /dev/null") == 0);
  CHECK(run_cli("gradcheck --op soft_clip --trials 10 > /dev/null") == 0);
  CHECK(run_cli("gradcheck --op papr_loss --trials 10 > /dev/null") == 0);
  CHECK(run_cli("ccdf --source gaussian --technique clip --rho -1") != 0);
  CHECK(run_cli("ccdf --source gaussian --technique none --n 100") != 0);
}
