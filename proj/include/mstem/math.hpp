#pragma once

#include <cmath>
#include <stdexcept>

namespace mstem {

inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811;
inline constexpr double kSqrtPi  = 1.772453850905516027298167483341;

// standard normal pdf
inline double phi(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

// standard normal cdf, erfc-based so the tails stay accurate far out
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// upper tail 1 - Phi(x)
inline double Q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// probabilists' Hermite polynomial He_n, n <= 4
inline double hermite_he(int n, double u) {
  switch (n) {
    case 0: return 1.0;
    case 1: return u;
    case 2: return u * u - 1.0;
    case 3: return u * (u * u - 3.0);
    case 4: return ((u * u - 6.0) * u * u) + 3.0;
    default: throw std::invalid_argument("hermite_he: order must be in [0,4]");
  }
}

}  // namespace mstem
