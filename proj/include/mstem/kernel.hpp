#pragma once

#include <Eigen/Dense>

namespace mstem {

// Differential Gaussian smoothing kernel w_gamma(t) = gamma^-1 phi(t/gamma)
// truncated to |t| <= c*gamma, together with its first four derivatives.
struct KernelSpec {
  double gamma = 10.0;
  double c = 4.0;
  int order = 0;  // derivative order, 0..4
};

struct SampledKernel {
  Eigen::ArrayXd taps;  // indices -half..half, taps(i) = w^(order)(i - half)
  int half = 0;         // floor(c*gamma)
  KernelSpec spec;
};

enum class ConvolveMode { ValidInterior, ZeroPad };

// Analytic kernel derivative at a real offset t; exactly zero outside the
// truncation window. order must be in [0,4], else std::invalid_argument.
double kernel_value(double gamma, double c, int order, double t);

// Taps on the unit grid k = -floor(c*gamma)..floor(c*gamma).  For order >= 1
// the raw truncated samples pick up a small moment bias, so a parity-matched
// polynomial component is projected out; see sample_kernel in kernel.cpp.
// Requires gamma >= 1 (std::invalid_argument otherwise).
SampledKernel sample_kernel(double gamma, double c, int order);

// 'same'-aligned discrete convolution out[t] = sum_k taps[k] * y[t-k].
// ValidInterior zeroes everything outside [half, L-1-half]; ZeroPad treats
// y as zero outside its range.  y.size() must exceed 2*half.
Eigen::ArrayXd convolve(const Eigen::Ref<const Eigen::ArrayXd>& y,
                        const SampledKernel& kernel,
                        ConvolveMode mode = ConvolveMode::ValidInterior);

// First and last index (inclusive) where ValidInterior output is meaningful.
std::pair<Eigen::Index, Eigen::Index> valid_interior(Eigen::Index length,
                                                     const SampledKernel& kernel);

}  // namespace mstem
