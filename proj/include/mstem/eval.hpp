#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mstem/detect.hpp"
#include "mstem/noise.hpp"
#include "mstem/signal.hpp"

namespace mstem {

struct ScoringConfig {
  double b = 10.0;      // distance beyond which a detection is false
  double gamma = 10.0;  // sets the capture-histogram bin edges
  bool sign_aware = true;
};

struct MatchResult {
  std::vector<std::size_t> assigned_truth;  // nearest truth per detection
  std::vector<double> distances;            // |location - truth|
};

// Capture histogram bins: [0, g/3), [g/3, g), [g, 2g), [2g, 4g), [4g, inf).
inline constexpr std::size_t kCaptureBins = 5;

struct ScoreReport {
  std::size_t R = 0;  // detections
  std::size_t V = 0;  // false detections (distance > b)
  std::size_t J = 0;  // true change points
  double fdp = 0.0;
  double power = 0.0;
  std::array<double, kCaptureBins> capture{};  // counts / J
};

struct AggregateReport {
  std::size_t reps = 0;
  double fdr = 0.0;
  double fdr_se = 0.0;
  double power = 0.0;
  double power_se = 0.0;
  std::array<double, kCaptureBins> capture{};
  std::array<double, kCaptureBins> capture_se{};
};

// Nearest-truth assignment for every detected location (ties go to the
// smaller truth index).  The truth list must be non-empty.
MatchResult match_detections(const std::vector<double>& detected,
                             const std::vector<double>& truth);

ScoreReport score_replication(const DetectionResult& result,
                              const std::vector<ChangePointTruth>& truth,
                              const ScoringConfig& cfg);

AggregateReport aggregate(const std::vector<ScoreReport>& reports);

// Large-sample FDR ceiling alpha * E' / (E' + A) for a single-family run,
// where E' discounts the noise-extrema rate E for the 2*c*gamma windows the
// signal occupies and A is the change-point density.  Requires
// 2*c*gamma*A < 1.
double asymptotic_fdr_limit(const SmoothingConfig& cfg, int order, double alpha,
                            double A);

// Mixture analogue: both families' surviving noise-extrema rates pooled
// against the total change-point density A1 + A2.
double asymptotic_fdr_limit_mixture(const SmoothingConfig& cfg_type1,
                                    const SmoothingConfig& cfg_type2,
                                    double alpha, double A1, double A2);

}  // namespace mstem
