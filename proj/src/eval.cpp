#include "mstem/eval.hpp"

#include <cmath>
#include <stdexcept>

namespace mstem {

MatchResult match_detections(const std::vector<double>& detected,
                             const std::vector<double>& truth) {
  if (truth.empty())
    throw std::invalid_argument("match_detections: truth list is empty");
  MatchResult res;
  res.assigned_truth.reserve(detected.size());
  res.distances.reserve(detected.size());
  for (const double loc : detected) {
    std::size_t best = 0;
    double best_d = std::abs(loc - truth[0]);
    for (std::size_t j = 1; j < truth.size(); ++j) {
      const double d = std::abs(loc - truth[j]);
      if (d < best_d) {  // strict: ties keep the smaller index
        best_d = d;
        best = j;
      }
    }
    res.assigned_truth.push_back(best);
    res.distances.push_back(best_d);
  }
  return res;
}

namespace {

int expected_sign(const ChangePointTruth& cp) {
  if (cp.type == CpType::TypeII) return cp.a > 0.0 ? +1 : -1;
  return cp.slope_change > 0.0 ? +1 : -1;
}

std::size_t capture_bin(double d, double gamma) {
  if (d < gamma / 3.0) return 0;
  if (d < gamma) return 1;
  if (d < 2.0 * gamma) return 2;
  if (d < 4.0 * gamma) return 3;
  return 4;
}

}  // namespace

ScoreReport score_replication(const DetectionResult& result,
                              const std::vector<ChangePointTruth>& truth,
                              const ScoringConfig& cfg) {
  ScoreReport rep;
  rep.J = truth.size();
  rep.R = result.detections.size();
  if (truth.empty())
    throw std::invalid_argument("score_replication: truth list is empty");

  std::vector<double> locs;
  locs.reserve(rep.R);
  for (const Detection& d : result.detections) locs.push_back(d.location);
  std::vector<double> tv;
  tv.reserve(truth.size());
  for (const ChangePointTruth& cp : truth) tv.push_back(cp.v);

  const MatchResult match = match_detections(locs, tv);
  for (std::size_t i = 0; i < match.distances.size(); ++i) {
    if (match.distances[i] > cfg.b) ++rep.V;
    rep.capture[capture_bin(match.distances[i], cfg.gamma)] += 1.0;
  }
  for (double& c : rep.capture) c /= static_cast<double>(rep.J);
  rep.fdp = static_cast<double>(rep.V) /
            static_cast<double>(std::max<std::size_t>(rep.R, 1));

  std::size_t hit = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    bool found = false;
    for (const Detection& d : result.detections) {
      if (std::abs(d.location - truth[j].v) > cfg.b) continue;
      if (d.type != truth[j].type) continue;
      if (cfg.sign_aware && d.sign != expected_sign(truth[j])) continue;
      found = true;
      break;
    }
    if (found) ++hit;
  }
  rep.power = static_cast<double>(hit) / static_cast<double>(rep.J);
  return rep;
}

AggregateReport aggregate(const std::vector<ScoreReport>& reports) {
  AggregateReport agg;
  agg.reps = reports.size();
  if (reports.empty()) return agg;
  const double n = static_cast<double>(reports.size());

  auto mean_se = [n](auto&& get) {
    double mean = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) mean += get(i);
    mean /= n;
    if (n < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      const double d = get(i) - mean;
      ss += d * d;
    }
    return std::pair{mean, std::sqrt(ss / (n - 1.0) / n)};
  };

  std::tie(agg.fdr, agg.fdr_se) =
      mean_se([&](std::size_t i) { return reports[i].fdp; });
  std::tie(agg.power, agg.power_se) =
      mean_se([&](std::size_t i) { return reports[i].power; });
  for (std::size_t b = 0; b < kCaptureBins; ++b)
    std::tie(agg.capture[b], agg.capture_se[b]) =
        mean_se([&](std::size_t i) { return reports[i].capture[b]; });
  return agg;
}

double asymptotic_fdr_limit(const SmoothingConfig& cfg, int order, double alpha,
                            double A) {
  if (A < 0.0) throw std::invalid_argument("asymptotic_fdr_limit: A must be >= 0");
  const double occupied = 2.0 * cfg.c * cfg.gamma * A;
  if (occupied >= 1.0)
    throw std::invalid_argument(
        "asymptotic_fdr_limit: change-point density saturates the window");
  const double Ep = expected_extrema_density(cfg, order) * (1.0 - occupied);
  if (Ep + A == 0.0) return 0.0;
  return alpha * Ep / (Ep + A);
}

double asymptotic_fdr_limit_mixture(const SmoothingConfig& cfg_type1,
                                    const SmoothingConfig& cfg_type2,
                                    double alpha, double A1, double A2) {
  if (A1 < 0.0 || A2 < 0.0)
    throw std::invalid_argument("asymptotic_fdr_limit_mixture: densities must be >= 0");
  const double occ1 = 2.0 * cfg_type1.c * cfg_type1.gamma * A1;
  const double occ2 = 2.0 * cfg_type2.c * cfg_type2.gamma * A2;
  if (occ1 >= 1.0 || occ2 >= 1.0)
    throw std::invalid_argument(
        "asymptotic_fdr_limit_mixture: change-point density saturates the window");
  const double E1 = expected_extrema_density(cfg_type1, 2) * (1.0 - occ1);
  const double E2 = expected_extrema_density(cfg_type2, 1) * (1.0 - occ2);
  const double denom = E1 + E2 + A1 + A2;
  if (denom == 0.0) return 0.0;
  return alpha * (E1 + E2) / denom;
}

}  // namespace mstem
