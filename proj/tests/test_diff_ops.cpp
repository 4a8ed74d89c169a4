#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "papr/diff_ops.hpp"
#include "papr/error.hpp"
#include "papr/metrics.hpp"

using namespace papr;

namespace {

// Linear PAPR of the direct inverse DFT; the finite-difference oracle below
// never touches the library's transform or gradient code.
double oracle_loss(const std::vector<Complex>& z) { return oracle::papr_linear(oracle::dft(z, +1)); }

std::vector<Complex> central_difference(const std::vector<Complex>& z, double h) {
  std::vector<Complex> g(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    for (Complex d : {Complex(h, 0), Complex(0, h)}) {
      auto plus = z;
      auto minus = z;
      plus[k] += d;
      minus[k] -= d;
      const double slope = (oracle_loss(plus) - oracle_loss(minus)) / (2 * h);
      g[k] += d.real() != 0.0 ? Complex(slope, 0) : Complex(0, slope);
    }
  }
  return g;
}

double rel_err(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double num = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    na += std::norm(a[i]);
    nb += std::norm(b[i]);
  }
  return std::sqrt(num) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

}  // namespace

TEST_CASE("papr_loss of a flat spectrum equals N") {
  const auto loss = papr_loss(FrequencyFrame(Samples(64, Complex(1, 0))));
  CHECK(loss.value == doctest::Approx(64.0).epsilon(1e-12));
  CHECK(loss.argmax == 0);
  CHECK_THROWS_AS(papr_loss(FrequencyFrame(64)), UndefinedInputError);
}

TEST_CASE("papr_loss agrees with papr_db") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    FrequencyFrame z(oracle::random_complex(64, rng));
    const double db = papr_db(ifft(z)).value_db;
    CHECK(papr_loss(z).value == doctest::Approx(std::pow(10.0, db / 10.0)).epsilon(1e-9));
    CHECK(papr_loss(z, PaprScale::kDb).value == doctest::Approx(db).epsilon(1e-9));
  }
}

TEST_CASE("papr_loss gradient matches central differences of a direct-DFT oracle") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto z = oracle::random_complex(32, rng);
    const auto loss = papr_loss(FrequencyFrame(z));
    CHECK(rel_err(loss.gradient, central_difference(z, 1e-5)) < 1e-4);
  }
}

TEST_CASE("papr_loss is scale invariant with a 1/c gradient") {
  std::mt19937_64 rng(3);
  const auto z = oracle::random_complex(32, rng);
  auto z2 = z;
  for (auto& v : z2) v *= 2.0;
  const auto a = papr_loss(FrequencyFrame(z));
  const auto b = papr_loss(FrequencyFrame(z2));
  CHECK(b.value == doctest::Approx(a.value).epsilon(1e-12));
  auto half = a.gradient;
  for (auto& g : half) g *= 0.5;
  CHECK(rel_err(b.gradient, half) < 1e-12);
  CHECK(rel_err(b.gradient, central_difference(z2, 1e-5)) < 1e-4);
  // Radial direction is flat: <grad, z> = 0.
  double radial = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    radial += a.gradient[k].real() * z[k].real() + a.gradient[k].imag() * z[k].imag();
  }
  CHECK(std::abs(radial) < 1e-9);
}

TEST_CASE("combined loss") {
  CHECK(combined_loss(0.37, 64.0, LossWeights{0.0}) == 0.37);
  CHECK(combined_loss(1.0, 64.0, LossWeights{0.01}) == doctest::Approx(1.64).epsilon(1e-15));
  const double l1 = combined_loss(2.0, 10.0, LossWeights{0.3}) - 2.0;
  const double l2 = combined_loss(2.0, 10.0, LossWeights{0.6}) - 2.0;
  CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-15));
  CHECK_THROWS_AS(combined_loss(1.0, 1.0, LossWeights{-0.1}), ConfigError);
}

TEST_CASE("soft clip regimes") {
  TimeFrame y(4);
  y[0] = std::polar(0.5, 0.2);
  y[1] = std::polar(1.0, -1.0);
  y[2] = std::polar(1.0, 2.0);
  y[3] = std::polar(1.5, 0.4);  // mean amplitude 1, threshold rho
  const SoftClipConfig cfg{1.4, 1e-12};
  const SoftClip sc(y, cfg);
  CHECK(sc.mean_amplitude() == doctest::Approx(1.0));
  for (int k = 0; k < 3; ++k) CHECK(sc.output()[k] == y[k]);
  CHECK(std::abs(sc.output()[3]) == doctest::Approx(1.4).epsilon(1e-10));
  CHECK(std::arg(sc.output()[3]) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK_THROWS_AS(SoftClip(y, SoftClipConfig{1.4, 0.0}), ConfigError);
  CHECK_THROWS_AS(SoftClip(y, SoftClipConfig{0.0, 1e-12}), ConfigError);
}

TEST_CASE("soft clip approaches the hard clip as gamma vanishes") {
  TimeFrame y(16);
  for (std::size_t k = 0; k < 16; ++k) y[k] = std::polar(1.0, 0.3 * k);
  const double rho = 1.4;
  // Choose |y0| so that it sits at 10 * rho * ybar with ybar = (15 + a)/16.
  const double a = 10.0 * rho * 15.0 / (16.0 - 10.0 * rho);
  y[0] = std::polar(a, 0.5);
  const SoftClip sc(y, SoftClipConfig{rho, 1e-12});
  CHECK(std::abs(a - 10.0 * rho * sc.mean_amplitude()) < 1e-9);
  CHECK(std::abs(std::abs(sc.output()[0]) - rho * sc.mean_amplitude()) < 1e-9);
}

TEST_CASE("soft clip never grows a sample and is the identity for huge rho") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const TimeFrame y(oracle::random_complex(32, rng));
    const SoftClip sc(y, SoftClipConfig{1.4, 1e-12});
    for (std::size_t k = 0; k < 32; ++k) CHECK(std::abs(sc.output()[k]) <= std::abs(y[k]) + 1e-12);

    const SoftClip id(y, SoftClipConfig{1e6, 1e-12});
    CHECK(id.output() == y);
    const auto v = oracle::random_complex(32, rng);
    CHECK(id.jvp(v) == v);
    CHECK(id.vjp(v) == v);
  }
}

TEST_CASE("soft clip Jacobian products match finite differences and are adjoint") {
  std::mt19937_64 rng(5);
  for (bool through_mean : {false, true}) {
    const SoftClipConfig cfg{1.4, 1e-12, through_mean};
    for (int i = 0; i < 50; ++i) {
      const TimeFrame y(oracle::random_complex(32, rng));
      const auto v = oracle::random_complex(32, rng);
      const auto u = oracle::random_complex(32, rng);
      const SoftClip sc(y, cfg);
      const double h = 1e-6;
      TimeFrame plus = y, minus = y;
      for (std::size_t k = 0; k < 32; ++k) {
        plus[k] += h * v[k];
        minus[k] -= h * v[k];
      }
      // The oracle evaluates the clip formula directly.
      const auto eval = [&](const TimeFrame& x) {
        double ybar = sc.mean_amplitude();
        if (through_mean) {
          ybar = 0.0;
          for (const auto& s : x) ybar += std::abs(s);
          ybar /= x.size();
        }
        std::vector<Complex> out(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
          const double r = std::abs(x[k]);
          out[k] = x[k] * (1.0 - std::max(0.0, r - cfg.rho * ybar) / (r + cfg.gamma));
        }
        return out;
      };
      bool near_kink = false;
      for (const auto& s : y) near_kink |= std::abs(std::abs(s) - sc.threshold()) < 1e-4;
      if (near_kink) continue;
      const auto fp = eval(plus), fm = eval(minus);
      std::vector<Complex> fd(32);
      for (std::size_t k = 0; k < 32; ++k) fd[k] = (fp[k] - fm[k]) / (2 * h);
      CHECK(rel_err(sc.jvp(v), fd) < 1e-4);

      const auto jv = sc.jvp(v);
      const auto jtu = sc.vjp(u);
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t k = 0; k < 32; ++k) {
        lhs += u[k].real() * jv[k].real() + u[k].imag() * jv[k].imag();
        rhs += jtu[k].real() * v[k].real() + jtu[k].imag() * v[k].imag();
      }
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("grad_check reports") {
  RngStream rng(6);
  const auto papr = grad_check(GradOp::kPaprLoss, 100, 1e-5, rng);
  CHECK(papr.probe_count == 100);
  CHECK(papr.step == 1e-5);
  CHECK(papr.max_rel_error < 1e-4);

  const auto clipped = grad_check(GradOp::kSoftClip, 100, 1e-5, rng);
  CHECK(clipped.probe_count == 100);
  CHECK(clipped.max_rel_error < 1e-4);

  GradCheckOptions coupled;
  coupled.soft_clip.mean_gradient = true;
  CHECK(grad_check(GradOp::kSoftClip, 50, 1e-5, rng, coupled).max_rel_error < 1e-4);

  GradCheckOptions db;
  db.papr_scale = PaprScale::kDb;
  CHECK(grad_check(GradOp::kPaprLoss, 20, 1e-5, rng, db).max_rel_error < 1e-4);

  CHECK(grad_check(GradOp::kSoftClip, 3, 1e-4, rng).step == 1e-4);
  CHECK_THROWS_AS(grad_check(GradOp::kSoftClip, 3, 0.0, rng), ConfigError);
}
