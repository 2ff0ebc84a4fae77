#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "mstem/noise.hpp"
#include "mstem/signal.hpp"

namespace mstem {

struct Extremum {
  Eigen::Index index = 0;  // 0-based array position
  int sign = +1;           // +1 local max, -1 local min
  double value = 0.0;
};

struct CandidatePeak {
  Eigen::Index index = 0;
  int order = 0;
  int sign = +1;
  double height = 0.0;
  double baseline = 0.0;  // slope baseline k(t) for order 1, zero for order 2
  double p_value = 1.0;
};

// Piecewise-constant slope estimate: slopes[j] applies on
// [breakpoints[j-1], breakpoints[j]) with sentinels 0 and L.
struct SlopeBaseline {
  std::vector<Eigen::Index> breakpoints;
  std::vector<double> slopes;

  double at(Eigen::Index i) const;
};

struct Detection {
  double location = 0.0;  // in sample units t = 1..L
  Eigen::Index index = 0;
  CpType type = CpType::TypeI;
  int sign = +1;
  double p_value = 1.0;
};

struct FamilyThreshold {
  double p_cutoff = 0.0;           // BH p-value cutoff (0: none, 1: empty family)
  std::optional<double> height;    // matching peak-height threshold, when defined
};

struct DetectionResult {
  std::vector<Detection> detections;  // sorted by location
  double alpha = 0.05;
  std::optional<FamilyThreshold> type1;
  std::optional<FamilyThreshold> type2;
  std::optional<SmoothingConfig> cfg_type1;
  std::optional<SmoothingConfig> cfg_type2;
  std::vector<CandidatePeak> candidates_type1;
  std::vector<CandidatePeak> candidates_type2;
};

struct BHResult {
  double cutoff = 0.0;
  std::vector<std::size_t> rejected;  // indices into the input p-value list
};

using IndexInterval = std::pair<Eigen::Index, Eigen::Index>;  // inclusive

// Strict local extrema of x on the inclusive index range [lo, hi].  Plateaus
// collapse to their leftmost index and count once; range endpoints never
// qualify.
std::vector<Extremum> find_local_extrema(const Eigen::Ref<const Eigen::ArrayXd>& x,
                                         Eigen::Index lo, Eigen::Index hi);

// Peak-height p-values: maxima get F(h - baseline), minima the mirror image.
void assign_pvalues(std::vector<CandidatePeak>& peaks,
                    const PeakHeightDistribution& dist);

// Benjamini-Hochberg step-up with strict inequality p_(i) < i*alpha/m.
// cutoff = 0 when nothing qualifies, 1 when the list is empty; the rejected
// set is exactly { p < cutoff }.
BHResult bh_select(const std::vector<double>& p_values, double alpha);

// Robust line fit y ~ intercept + slope * x (Huber IRLS, tuning 1.345,
// MAD/0.6745 scale, at most 50 iterations, tolerance 1e-8).  A zero MAD stops
// the iteration at the current (least-squares) fit.
std::pair<double, double> huber_line(const Eigen::Ref<const Eigen::ArrayXd>& x,
                                     const Eigen::Ref<const Eigen::ArrayXd>& y);

// TypeI detector: order-2 smoothing, local extrema, peak-height p-values,
// BH at level alpha.  Candidates whose index falls inside a masked interval
// are removed before testing.
DetectionResult detect_type1(const Eigen::Ref<const Eigen::ArrayXd>& y,
                             const SmoothingConfig& cfg, double alpha,
                             const std::vector<IndexInterval>& masked = {});

// Piecewise-constant slope baseline for the TypeII test: a permissive order-2
// pre-scan (level pre_alpha) marks candidate change regions, nearby marks are
// clustered and become segment cuts, and each segment gets a Huber line fit.
// Segments shorter than 2*c*gamma are merged into a neighbour (the cut whose
// cluster had fewer supporting extrema is dropped first).
SlopeBaseline estimate_slope_baseline(const Eigen::Ref<const Eigen::ArrayXd>& y,
                                      const SmoothingConfig& cfg,
                                      double pre_alpha = 0.1);

// TypeII detector: order-1 smoothing, subtract the slope baseline at each
// candidate peak, then test peak heights as above.  baseline == nullptr means
// the known-zero-slope shortcut.
DetectionResult detect_type2(const Eigen::Ref<const Eigen::ArrayXd>& y,
                             const SmoothingConfig& cfg, double alpha,
                             const SlopeBaseline* baseline = nullptr);

// Full two-pass detector: TypeII first (config cfg_type2, estimated baseline
// unless zero_baseline), then TypeI on candidates at least 2*gamma away from
// every TypeII detection.  Both families are BH-tested at the same alpha.
DetectionResult detect_mixture(const Eigen::Ref<const Eigen::ArrayXd>& y,
                               const SmoothingConfig& cfg_type2,
                               const SmoothingConfig& cfg_type1, double alpha,
                               bool zero_baseline = false);

}  // namespace mstem
