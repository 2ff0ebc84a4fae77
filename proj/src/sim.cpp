#include "mstem/sim.hpp"

#include <atomic>
#include <chrono>
#include <stdexcept>
#include <thread>

#include "mstem/detect.hpp"
#include "mstem/noise.hpp"

namespace mstem {

DetectMode resolve_mode(const SimConfig& cfg) {
  if (cfg.mode != DetectMode::Auto) return cfg.mode;
  switch (cfg.scenario) {
    case 1: return DetectMode::Type1;
    case 2:
    case 3: return DetectMode::Type2;
    case 4: return DetectMode::Mixture;
    default: throw std::invalid_argument("resolve_mode: scenario must be 1..4");
  }
}

BaselineMode resolve_baseline(const SimConfig& cfg) {
  if (cfg.baseline != BaselineMode::Auto) return cfg.baseline;
  // scenario 2 has slope zero everywhere by construction
  return cfg.scenario == 2 ? BaselineMode::Zero : BaselineMode::Estimate;
}

PiecewiseLinearSignal build_signal(const SimConfig& cfg) {
  ScenarioParams p = cfg.params;
  p.dk *= cfg.effect_scale;
  p.jump *= cfg.effect_scale;
  p.dk3 *= cfg.effect_scale;
  if (cfg.long_term_tiles > 1)
    return make_long_term(cfg.scenario, cfg.L, cfg.d, cfg.long_term_tiles, p,
                          cfg.smoothing.gamma, cfg.smoothing.c);
  return make_scenario(cfg.scenario, cfg.L, cfg.d, p, cfg.smoothing.gamma,
                       cfg.smoothing.c);
}

namespace {

DetectionResult run_detector(const Eigen::ArrayXd& y, const SimConfig& cfg,
                             DetectMode mode, BaselineMode baseline) {
  switch (mode) {
    case DetectMode::Type1:
      return detect_type1(y, cfg.smoothing, cfg.alpha);
    case DetectMode::Type2: {
      if (baseline == BaselineMode::Zero)
        return detect_type2(y, cfg.smoothing, cfg.alpha, nullptr);
      const SlopeBaseline sb = estimate_slope_baseline(y, cfg.smoothing);
      return detect_type2(y, cfg.smoothing, cfg.alpha, &sb);
    }
    case DetectMode::Mixture:
      return detect_mixture(y, cfg.smoothing, cfg.smoothing, cfg.alpha,
                            baseline == BaselineMode::Zero);
    default:
      throw std::logic_error("run_detector: unresolved mode");
  }
}

}  // namespace

SimResult run_simulation(const SimConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const PiecewiseLinearSignal sig = build_signal(cfg);
  const Eigen::ArrayXd mu = evaluate_signal(sig, static_cast<Eigen::Index>(cfg.L));
  const std::vector<ChangePointTruth> truth = sig.change_points();

  const DetectMode mode = resolve_mode(cfg);
  const BaselineMode baseline = resolve_baseline(cfg);
  const ScoringConfig score_cfg{cfg.b, cfg.smoothing.gamma, true};

  SimResult result;
  result.truth = truth;
  result.mode = mode;
  result.reports.resize(static_cast<std::size_t>(cfg.reps));

  int nthreads = cfg.threads > 0
                     ? cfg.threads
                     : static_cast<int>(std::thread::hardware_concurrency());
  if (nthreads < 1) nthreads = 1;
  nthreads = std::min(nthreads, cfg.reps);

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.reps || failed.load()) break;
      try {
        const Eigen::ArrayXd z =
            generate_noise(mu.size(), cfg.smoothing.nu, cfg.smoothing.sigma0,
                           cfg.seed + static_cast<std::uint64_t>(i));
        const Eigen::ArrayXd y = mu + z;
        const DetectionResult det = run_detector(y, cfg, mode, baseline);
        result.reports[static_cast<std::size_t>(i)] =
            score_replication(det, truth, score_cfg);
      } catch (...) {
        failed.store(true);
        return;
      }
    }
  };

  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load())
    throw std::runtime_error("run_simulation: a replication failed");

  result.agg = aggregate(result.reports);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::vector<SweepPoint> run_sweep(const SimConfig& cfg,
                                  const std::vector<double>& scales) {
  std::vector<SweepPoint> out;
  out.reserve(scales.size());
  for (const double s : scales) {
    SimConfig point_cfg = cfg;
    point_cfg.effect_scale = cfg.effect_scale * s;
    const SimResult r = run_simulation(point_cfg);

    SweepPoint pt;
    pt.scale = s;
    pt.agg = r.agg;

    const PiecewiseLinearSignal sig = build_signal(point_cfg);
    const auto truth = sig.change_points();
    if (!truth.empty()) {
      double k_left = sig.segments.front().slope;
      pt.snr = snr(truth.front(), k_left, cfg.smoothing.gamma, cfg.smoothing.nu,
                   cfg.smoothing.c);
      const double A = static_cast<double>(truth.size()) / cfg.L;
      const DetectMode mode = resolve_mode(point_cfg);
      if (mode == DetectMode::Mixture) {
        double A1 = 0.0, A2 = 0.0;
        for (const auto& cp : truth)
          (cp.type == CpType::TypeI ? A1 : A2) += 1.0 / cfg.L;
        pt.fdr_limit = asymptotic_fdr_limit_mixture(cfg.smoothing, cfg.smoothing,
                                                    cfg.alpha, A1, A2);
      } else {
        const int order = (mode == DetectMode::Type1) ? 2 : 1;
        pt.fdr_limit = asymptotic_fdr_limit(cfg.smoothing, order, cfg.alpha, A);
      }
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace mstem
