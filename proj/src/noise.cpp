#include "mstem/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "mstem/math.hpp"

namespace mstem {

double SmoothingConfig::xi() const { return std::hypot(gamma, nu); }

namespace {

// Polar Box-Muller over raw 53-bit uniforms.  std::normal_distribution is
// implementation-defined, and downstream tests freeze seeded results, so we
// keep the whole stream under our control.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * f;
    have_ = true;
    return u * f;
  }

 private:
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 eng_;
  bool have_ = false;
  double cached_ = 0.0;
};

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + n / 2;
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

Eigen::ArrayXd generate_noise(Eigen::Index L, double nu, double sigma0,
                              std::uint64_t seed) {
  if (L <= 0) throw std::invalid_argument("generate_noise: L must be positive");
  if (nu < 0.0) throw std::invalid_argument("generate_noise: nu must be >= 0");
  GaussianStream g(seed);

  Eigen::ArrayXd z(L);
  if (nu == 0.0) {
    for (Eigen::Index i = 0; i < L; ++i) z(i) = sigma0 * g();
    return z;
  }

  const Eigen::Index B = static_cast<Eigen::Index>(std::ceil(4.0 * nu));
  Eigen::ArrayXd e(L + 2 * B);
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = g();

  Eigen::ArrayXd w(2 * B + 1);
  for (Eigen::Index r = -B; r <= B; ++r)
    w(r + B) = phi(static_cast<double>(r) / nu) / nu;

  for (Eigen::Index t = 0; t < L; ++t) {
    double acc = 0.0;
    for (Eigen::Index r = -B; r <= B; ++r) acc += w(r + B) * e(t + B - r);
    z(t) = sigma0 * acc;
  }
  return z;
}

DerivativeMoments derivative_moments(const SmoothingConfig& cfg) {
  const double xi = cfg.xi();
  const double s2 = cfg.sigma0 * cfg.sigma0;
  DerivativeMoments m;
  m.xi = xi;
  m.var1 = s2 / (4.0 * kSqrtPi * std::pow(xi, 3));
  m.var2 = s2 * 3.0 / (8.0 * kSqrtPi * std::pow(xi, 5));
  m.var3 = s2 * 15.0 / (16.0 * kSqrtPi * std::pow(xi, 7));
  m.var4 = s2 * 105.0 / (32.0 * kSqrtPi * std::pow(xi, 9));
  return m;
}

double sigma_ell(const SmoothingConfig& cfg, int ell) {
  const DerivativeMoments m = derivative_moments(cfg);
  switch (ell) {
    case 1: return std::sqrt(m.var1);
    case 2: return std::sqrt(m.var2);
    case 3: return std::sqrt(m.var3);
    case 4: return std::sqrt(m.var4);
    default: throw std::invalid_argument("sigma_ell: ell must be in [1,4]");
  }
}

PeakHeightDistribution peak_distribution(const SmoothingConfig& cfg, int order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("peak_distribution: order must be 1 or 2");
  PeakHeightDistribution d;
  d.order = order;
  d.sigma = sigma_ell(cfg, order);
  d.eta = (order == 1) ? std::sqrt(3.0 / 5.0) : std::sqrt(5.0 / 7.0);
  return d;
}

double tail_probability(const PeakHeightDistribution& dist, double x) {
  const double z = x / dist.sigma;
  const double eta = dist.eta;
  const double root = std::sqrt(1.0 - eta * eta);
  return Q(z / root) + kSqrt2Pi * eta * phi(z) * Phi(eta * z / root);
}

double tail_quantile(const PeakHeightDistribution& dist, double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("tail_quantile: p must lie in (0,1)");
  double lo = -dist.sigma, hi = dist.sigma;
  while (tail_probability(dist, lo) <= p) lo *= 2.0;   // F(lo) must exceed p
  while (tail_probability(dist, hi) >= p) hi *= 2.0;   // F(hi) must fall below p
  // bisect to x-convergence: F alone is too flat in the far tails to locate x
  for (int it = 0; it < 300 && hi - lo > 1e-12 * dist.sigma; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (tail_probability(dist, mid) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double expected_extrema_density(const SmoothingConfig& cfg, int order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("expected_extrema_density: order must be 1 or 2");
  const double num = (order == 1) ? std::sqrt(10.0) : std::sqrt(14.0);
  return num / (2.0 * std::numbers::pi_v<double> * cfg.xi());
}

double estimate_sigma0(const Eigen::Ref<const Eigen::ArrayXd>& smoothed,
                       const SmoothingConfig& cfg, int ell) {
  const Eigen::Index h = static_cast<Eigen::Index>(std::floor(cfg.c * cfg.gamma));
  const Eigen::Index L = smoothed.size();
  if (L <= 2 * h + 1)
    throw std::invalid_argument("estimate_sigma0: sequence shorter than kernel support");
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(L - 2 * h));
  for (Eigen::Index i = h; i < L - h; ++i) vals.push_back(smoothed(i));
  const double med = median_inplace(vals);
  for (auto& v : vals) v = std::abs(v - med);
  const double mad = median_inplace(vals);
  SmoothingConfig unit = cfg;
  unit.sigma0 = 1.0;
  return (mad / 0.6745) / sigma_ell(unit, ell);
}

}  // namespace mstem
