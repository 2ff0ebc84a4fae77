#pragma once

#include <cstdint>
#include <vector>

#include "mstem/eval.hpp"
#include "mstem/signal.hpp"

namespace mstem {

enum class DetectMode { Auto, Type1, Type2, Mixture };
enum class BaselineMode { Auto, Estimate, Zero };

struct SimConfig {
  int scenario = 1;
  double L = 1500.0;
  double d = 150.0;
  ScenarioParams params;
  SmoothingConfig smoothing;
  double alpha = 0.05;
  double b = 10.0;
  int reps = 1000;
  std::uint64_t seed = 20240901;
  int threads = 0;  // 0 picks hardware concurrency
  int long_term_tiles = 1;
  DetectMode mode = DetectMode::Auto;
  BaselineMode baseline = BaselineMode::Auto;
  double effect_scale = 1.0;  // multiplies dk, jump, dk3
};

struct SimResult {
  std::vector<ScoreReport> reports;  // ordered by replication index
  AggregateReport agg;
  std::vector<ChangePointTruth> truth;
  double seconds = 0.0;
  DetectMode mode = DetectMode::Type1;
};

struct SweepPoint {
  double scale = 1.0;
  double snr = 0.0;
  double fdr_limit = 0.0;
  AggregateReport agg;
};

// Effective per-scenario defaults: scenario 1 runs the TypeI detector,
// 2 the TypeII detector with the zero baseline, 3 TypeII with the estimated
// baseline, 4 the mixture.
DetectMode resolve_mode(const SimConfig& cfg);
BaselineMode resolve_baseline(const SimConfig& cfg);

// Builds the configured scenario (tiled when long_term_tiles > 1) with effect
// sizes scaled by effect_scale.
PiecewiseLinearSignal build_signal(const SimConfig& cfg);

// Monte Carlo loop: replication i uses seed cfg.seed + i, so results are
// byte-identical for any thread count.
SimResult run_simulation(const SimConfig& cfg);

// Re-runs the simulation at each effect scale with common random numbers and
// attaches the matching large-sample FDR ceiling.
std::vector<SweepPoint> run_sweep(const SimConfig& cfg,
                                  const std::vector<double>& scales);

}  // namespace mstem
