#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mstem/kernel.hpp"
#include "mstem/math.hpp"

using namespace mstem;

namespace {

Eigen::ArrayXd ramp(Eigen::Index n, double slope, double intercept = 0.0) {
  Eigen::ArrayXd y(n);
  for (Eigen::Index i = 0; i < n; ++i)
    y(i) = intercept + slope * static_cast<double>(i + 1);
  return y;
}

}  // namespace

TEST_CASE("kernel_value matches the analytic Gaussian-derivative forms") {
  // order 0 at the origin is the standard normal density
  CHECK(kernel_value(1.0, 4.0, 0, 0.0) == doctest::Approx(0.3989422804).epsilon(1e-9));
  // odd orders vanish at the origin
  CHECK(kernel_value(1.0, 4.0, 1, 0.0) == 0.0);
  CHECK(kernel_value(3.0, 4.0, 3, 0.0) == 0.0);
  // gamma = 2, order 2, center: -phi(0) / gamma^3
  CHECK(kernel_value(2.0, 4.0, 2, 0.0) ==
        doctest::Approx(-0.0498677851).epsilon(1e-8));
  // exactly zero outside the truncation window
  CHECK(kernel_value(2.0, 4.0, 0, 8.0 + 1e-9) == 0.0);
  CHECK(kernel_value(2.0, 4.0, 2, -9.0) == 0.0);
  // inside the window the value is nonzero
  CHECK(kernel_value(2.0, 4.0, 0, 7.99) != 0.0);

  CHECK_THROWS_AS(kernel_value(2.0, 4.0, 5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_value(2.0, 4.0, -1, 0.0), std::invalid_argument);
}

TEST_CASE("kernel_value derivative orders agree with numeric differentiation") {
  const double gamma = 3.0, c = 4.0, h = 1e-5;
  for (int order = 1; order <= 4; ++order) {
    for (double t : {-5.0, -1.3, 0.7, 2.0, 6.5}) {
      const double num = (kernel_value(gamma, c, order - 1, t + h) -
                          kernel_value(gamma, c, order - 1, t - h)) /
                         (2.0 * h);
      CHECK(kernel_value(gamma, c, order, t) == doctest::Approx(num).epsilon(1e-5));
    }
  }
}

TEST_CASE("sample_kernel tap layout and normalization") {
  const SampledKernel k0 = sample_kernel(10.0, 4.0, 0);
  CHECK(k0.taps.size() == 81);
  CHECK(k0.half == 40);
  CHECK(k0.taps(40) == doctest::Approx(0.0398942280).epsilon(1e-5));
  // order-0 taps sum to the truncated mass 2*Phi(c) - 1
  const double mass = 2.0 * Phi(4.0) - 1.0;
  CHECK(k0.taps.sum() == doctest::Approx(mass).epsilon(1e-7));
  CHECK(std::abs(sample_kernel(3.0, 4.0, 0).taps.sum() - mass) < 1e-6);

  CHECK_THROWS_AS(sample_kernel(0.9, 4.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_kernel(10.0, 4.0, 7), std::invalid_argument);
}

TEST_CASE("sample_kernel derivative taps sum to zero") {
  for (int order = 1; order <= 4; ++order)
    for (double gamma : {3.0, 5.0, 10.0}) {
      const SampledKernel k = sample_kernel(gamma, 4.0, order);
      CHECK(std::abs(k.taps.sum()) < 1e-6);
    }
}

TEST_CASE("sampled taps keep the exact parity of the underlying derivative") {
  for (double gamma : {3.0, 7.5, 10.0}) {
    for (int order = 0; order <= 4; ++order) {
      const SampledKernel k = sample_kernel(gamma, 4.0, order);
      const double parity = (order % 2 == 0) ? 1.0 : -1.0;
      for (int i = 0; i <= k.half; ++i)
        CHECK(k.taps(k.half + i) == parity * k.taps(k.half - i));  // bitwise
    }
  }
}

TEST_CASE("sampled derivative kernels annihilate low-degree polynomials") {
  // convolving any polynomial of degree < order must give ~0
  std::mt19937_64 rng(7011);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (double gamma : {5.0, 8.0, 10.0}) {
    for (int order = 1; order <= 4; ++order) {
      const SampledKernel k = sample_kernel(gamma, 4.0, order);
      const Eigen::Index L = 6 * k.half;
      Eigen::ArrayXd y = Eigen::ArrayXd::Zero(L);
      for (int deg = 0; deg < order; ++deg) {
        const double a = coef(rng);
        for (Eigen::Index i = 0; i < L; ++i)
          y(i) += a * std::pow(static_cast<double>(i + 1) / k.half, deg);
      }
      const Eigen::ArrayXd out = convolve(y, k);
      const auto [lo, hi] = valid_interior(L, k);
      for (Eigen::Index i = lo; i <= hi; ++i) CHECK(std::abs(out(i)) < 1e-6);
    }
  }
}

TEST_CASE("convolve alignment and modes") {
  const SampledKernel k1 = sample_kernel(10.0, 4.0, 1);
  const SampledKernel k2 = sample_kernel(10.0, 4.0, 2);

  SUBCASE("constants are annihilated by order >= 1") {
    const Eigen::ArrayXd y = Eigen::ArrayXd::Constant(200, 3.7);
    const Eigen::ArrayXd out = convolve(y, k1);
    const auto [lo, hi] = valid_interior(y.size(), k1);
    for (Eigen::Index i = lo; i <= hi; ++i) CHECK(std::abs(out(i)) < 1e-6);
    // outside the interior the valid mode reports zero
    CHECK(out(0) == 0.0);
    CHECK(out(y.size() - 1) == 0.0);
  }

  SUBCASE("linear ramps are annihilated by order 2") {
    const Eigen::ArrayXd out = convolve(ramp(300, 0.8, -2.0), k2);
    const auto [lo, hi] = valid_interior(300, k2);
    for (Eigen::Index i = lo; i <= hi; ++i) CHECK(std::abs(out(i)) < 1e-6);
  }

  SUBCASE("order-1 response to slope 0.1 is the truncated-mass slope") {
    const Eigen::ArrayXd out = convolve(ramp(300, 0.1), k1);
    const auto [lo, hi] = valid_interior(300, k1);
    const double expect = 0.1 * (2.0 * Phi(4.0) - 1.0);  // 0.0999937
    CHECK(expect == doctest::Approx(0.0999936658).epsilon(1e-7));
    for (Eigen::Index i = lo; i <= hi; ++i)
      CHECK(out(i) == doctest::Approx(expect).epsilon(1e-6));
  }

  SUBCASE("zero-pad mode covers the whole range") {
    const Eigen::ArrayXd y = Eigen::ArrayXd::Constant(120, 1.0);
    const Eigen::ArrayXd out = convolve(y, k1, ConvolveMode::ZeroPad);
    CHECK(out.size() == y.size());
    // near the edge the implicit zeros break the symmetry, so nonzero values
    CHECK(std::abs(out(0)) > 1e-4);
  }

  SUBCASE("sequences shorter than the support are rejected") {
    CHECK_THROWS_AS(convolve(Eigen::ArrayXd::Zero(80), k1), std::invalid_argument);
  }
}

TEST_CASE("convolution by delta reproduces the taps at the right offsets") {
  const SampledKernel k = sample_kernel(5.0, 4.0, 1);
  Eigen::ArrayXd y = Eigen::ArrayXd::Zero(101);
  y(50) = 1.0;
  const Eigen::ArrayXd out = convolve(y, k);
  // out[t] = taps[t - 50] (since y[t-k] = delta(t-k-50))
  for (Eigen::Index t = 50 - k.half; t <= 50 + k.half; ++t)
    CHECK(out(t) == doctest::Approx(k.taps(t - 50 + k.half)).epsilon(1e-12));
}

TEST_CASE("order-2 kernel is consistent with smoothing then differencing") {
  // double-difference of the order-0 smoothed sequence vs direct order-2
  const double gamma = 10.0;
  const SampledKernel k0 = sample_kernel(gamma, 4.0, 0);
  const SampledKernel k2 = sample_kernel(gamma, 4.0, 2);
  std::mt19937_64 rng(424242);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::ArrayXd y(1200);
  for (double& v : y) v = noise(rng);

  const Eigen::ArrayXd s0 = convolve(y, k0);
  const Eigen::ArrayXd s2 = convolve(y, k2);
  const auto [lo0, hi0] = valid_interior(y.size(), k0);

  double num = 0.0, den = 0.0;
  for (Eigen::Index i = lo0 + 1; i <= hi0 - 1; ++i) {
    const double dd = s0(i + 1) - 2.0 * s0(i) + s0(i - 1);
    num += (dd - s2(i)) * (dd - s2(i));
    den += s2(i) * s2(i);
  }
  CHECK(std::sqrt(num / den) < 0.05);
}
