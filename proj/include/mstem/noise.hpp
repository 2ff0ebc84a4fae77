#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace mstem {

// Shared smoothing/noise geometry.  xi^2 = gamma^2 + nu^2 is the effective
// bandwidth of kernel-smoothed noise; sigma0 scales the driving white noise.
struct SmoothingConfig {
  double gamma = 10.0;
  double nu = 1.0;
  double c = 4.0;
  double sigma0 = 1.0;

  double xi() const;
};

// Variances of the first four derivatives of smoothed noise (closed forms,
// untruncated kernel), and the effective bandwidth they share.
struct DerivativeMoments {
  double var1 = 0.0;
  double var2 = 0.0;
  double var3 = 0.0;
  double var4 = 0.0;
  double xi = 0.0;
};

// Height distribution of a local maximum of the order-`order` smoothed noise
// field.  eta is the spectral shape parameter (sqrt(3/5) for order 1,
// sqrt(5/7) for order 2); sigma the marginal standard deviation.
struct PeakHeightDistribution {
  double sigma = 1.0;
  double eta = 0.0;
  int order = 1;
};

// Gaussian-smoothed white noise on t = 1..L: the driving sequence extends
// ceil(4*nu) past both ends so the returned window is stationary.  nu = 0
// degenerates to iid N(0, sigma0^2).  Same seed, same output, bit for bit.
Eigen::ArrayXd generate_noise(Eigen::Index L, double nu, double sigma0,
                              std::uint64_t seed);

DerivativeMoments derivative_moments(const SmoothingConfig& cfg);

// Standard deviation of the order-`ell` derivative of the smoothed field
// (ell in 1..4).
double sigma_ell(const SmoothingConfig& cfg, int ell);

PeakHeightDistribution peak_distribution(const SmoothingConfig& cfg, int order);

// P(peak height > x) for a local maximum of the order-`order` field.
// Numerically stable out past |x| = 8 sigma.
double tail_probability(const PeakHeightDistribution& dist, double x);

// Inverse of tail_probability on p in (0,1), to |F - p| < 1e-12.
double tail_quantile(const PeakHeightDistribution& dist, double p);

// Expected number of local extrema (maxima plus minima) per unit length of
// the order-`order` smoothed noise field.
double expected_extrema_density(const SmoothingConfig& cfg, int order);

// MAD-based scale estimate: robust sigma0 from an order-`ell` smoothed
// sequence restricted to its valid interior.
double estimate_sigma0(const Eigen::Ref<const Eigen::ArrayXd>& smoothed,
                       const SmoothingConfig& cfg, int ell);

}  // namespace mstem
