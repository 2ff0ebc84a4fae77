#include "mstem/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mstem/kernel.hpp"
#include "mstem/math.hpp"

namespace mstem {

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + n / 2;
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

bool in_any(Eigen::Index i, const std::vector<IndexInterval>& intervals) {
  for (const auto& [a, b] : intervals)
    if (i >= a && i <= b) return true;
  return false;
}

std::optional<double> height_threshold(const PeakHeightDistribution& dist,
                                       double p_cutoff) {
  if (p_cutoff <= 0.0 || p_cutoff >= 1.0) return std::nullopt;
  return tail_quantile(dist, p_cutoff);
}

DetectionResult run_family(const Eigen::Ref<const Eigen::ArrayXd>& y,
                           const SmoothingConfig& cfg, double alpha, int order,
                           const SlopeBaseline* baseline,
                           const std::vector<IndexInterval>& masked) {
  const SampledKernel k = sample_kernel(cfg.gamma, cfg.c, order);
  const Eigen::ArrayXd smoothed = convolve(y, k, ConvolveMode::ValidInterior);
  const auto [lo, hi] = valid_interior(y.size(), k);

  std::vector<CandidatePeak> peaks;
  for (const Extremum& e : find_local_extrema(smoothed, lo, hi)) {
    if (!masked.empty() && in_any(e.index, masked)) continue;
    CandidatePeak p;
    p.index = e.index;
    p.order = order;
    p.sign = e.sign;
    p.height = e.value;
    p.baseline = baseline ? baseline->at(e.index) : 0.0;
    peaks.push_back(p);
  }

  const PeakHeightDistribution dist = peak_distribution(cfg, order);
  assign_pvalues(peaks, dist);

  std::vector<double> pvals(peaks.size());
  for (std::size_t i = 0; i < peaks.size(); ++i) pvals[i] = peaks[i].p_value;
  const BHResult bh = bh_select(pvals, alpha);

  DetectionResult res;
  res.alpha = alpha;
  const CpType type = (order == 2) ? CpType::TypeI : CpType::TypeII;
  for (std::size_t i : bh.rejected) {
    const CandidatePeak& p = peaks[i];
    Detection d;
    d.location = static_cast<double>(p.index + 1);
    d.index = p.index;
    d.type = type;
    d.sign = p.sign;
    d.p_value = p.p_value;
    res.detections.push_back(d);
  }
  std::sort(res.detections.begin(), res.detections.end(),
            [](const Detection& a, const Detection& b) {
              return a.location < b.location;
            });

  FamilyThreshold thr{bh.cutoff, height_threshold(dist, bh.cutoff)};
  if (order == 2) {
    res.type1 = thr;
    res.cfg_type1 = cfg;
    res.candidates_type1 = std::move(peaks);
  } else {
    res.type2 = thr;
    res.cfg_type2 = cfg;
    res.candidates_type2 = std::move(peaks);
  }
  return res;
}

}  // namespace

double SlopeBaseline::at(Eigen::Index i) const {
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), i);
  return slopes[static_cast<std::size_t>(it - breakpoints.begin())];
}

std::vector<Extremum> find_local_extrema(const Eigen::Ref<const Eigen::ArrayXd>& x,
                                         Eigen::Index lo, Eigen::Index hi) {
  std::vector<Extremum> out;
  if (lo < 0 || hi >= x.size() || hi - lo < 2) return out;
  Eigen::Index s = lo;  // start of the current plateau
  for (Eigen::Index i = lo + 1; i <= hi + 1; ++i) {
    if (i <= hi && x(i) == x(s)) continue;
    // plateau [s, i-1] just ended
    if (s > lo && i <= hi) {
      const double prev = x(s - 1), val = x(s), next = x(i);
      if (prev < val && next < val) out.push_back({s, +1, val});
      else if (prev > val && next > val) out.push_back({s, -1, val});
    }
    s = i;
  }
  return out;
}

void assign_pvalues(std::vector<CandidatePeak>& peaks,
                    const PeakHeightDistribution& dist) {
  for (CandidatePeak& p : peaks)
    p.p_value = tail_probability(dist, p.sign * (p.height - p.baseline));
}

BHResult bh_select(const std::vector<double>& p_values, double alpha) {
  const std::size_t m = p_values.size();
  if (m == 0) return {1.0, {}};

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p_values[a] < p_values[b];
  });

  std::size_t ell = 0;
  for (std::size_t i = 1; i <= m; ++i)
    if (p_values[order[i - 1]] <
        static_cast<double>(i) * alpha / static_cast<double>(m))
      ell = i;

  BHResult res;
  if (ell == 0) {
    res.cutoff = 0.0;
    return res;
  }
  res.cutoff = static_cast<double>(ell) * alpha / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    if (p_values[i] < res.cutoff) res.rejected.push_back(i);
  return res;
}

std::pair<double, double> huber_line(const Eigen::Ref<const Eigen::ArrayXd>& x,
                                     const Eigen::Ref<const Eigen::ArrayXd>& y) {
  const Eigen::Index n = x.size();
  if (n == 0 || y.size() != n)
    throw std::invalid_argument("huber_line: empty or mismatched inputs");
  if (n == 1) return {y(0), 0.0};

  constexpr double kTuning = 1.345;
  Eigen::ArrayXd w = Eigen::ArrayXd::Ones(n);
  double intercept = 0.0, slope = 0.0;

  for (int iter = 0; iter < 50; ++iter) {
    const double sw = w.sum();
    const double xw = (w * x).sum() / sw;
    const double yw = (w * y).sum() / sw;
    const double sxx = (w * (x - xw).square()).sum();
    const double new_slope = (sxx > 0.0) ? (w * (x - xw) * (y - yw)).sum() / sxx : 0.0;
    const double new_intercept = yw - new_slope * xw;

    const bool converged =
        std::abs(new_slope - slope) + std::abs(new_intercept - intercept) <=
        1e-8 * (1.0 + std::abs(new_slope) + std::abs(new_intercept));
    slope = new_slope;
    intercept = new_intercept;
    if (iter > 0 && converged) break;

    const Eigen::ArrayXd r = y - (intercept + slope * x);
    std::vector<double> rv(r.data(), r.data() + n);
    const double med = median_of(rv);
    for (auto& v : rv) v = std::abs(v - med);
    const double scale = median_of(rv) / 0.6745;
    if (scale == 0.0) break;  // residuals exactly flat; current LS fit is final
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ar = std::abs(r(i));
      w(i) = (ar <= kTuning * scale) ? 1.0 : kTuning * scale / ar;
    }
  }
  return {intercept, slope};
}

DetectionResult detect_type1(const Eigen::Ref<const Eigen::ArrayXd>& y,
                             const SmoothingConfig& cfg, double alpha,
                             const std::vector<IndexInterval>& masked) {
  return run_family(y, cfg, alpha, 2, nullptr, masked);
}

SlopeBaseline estimate_slope_baseline(const Eigen::Ref<const Eigen::ArrayXd>& y,
                                      const SmoothingConfig& cfg,
                                      double pre_alpha) {
  const Eigen::Index L = y.size();
  const DetectionResult pre = detect_type1(y, cfg, pre_alpha);

  std::vector<Eigen::Index> locs;
  for (const Detection& d : pre.detections) locs.push_back(d.index);
  std::sort(locs.begin(), locs.end());

  struct Cut {
    Eigen::Index pos;
    std::size_t support;  // extrema in the cluster that produced it
  };
  std::vector<Cut> cuts;
  const double gap = 3.0 * cfg.gamma;
  std::size_t i = 0;
  while (i < locs.size()) {
    std::size_t j = i;
    while (j + 1 < locs.size() &&
           static_cast<double>(locs[j + 1] - locs[j]) <= gap)
      ++j;
    const double mid = 0.5 * static_cast<double>(locs[i] + locs[j]);
    cuts.push_back({static_cast<Eigen::Index>(std::llround(mid)), j - i + 1});
    i = j + 1;
  }

  const Eigen::Index minlen =
      static_cast<Eigen::Index>(2.0 * cfg.c * cfg.gamma);
  std::erase_if(cuts, [&](const Cut& c) {
    return c.pos < minlen || L - c.pos < minlen;
  });

  // Segments shorter than minlen get absorbed: drop the cut backed by the
  // weaker cluster (ties favour keeping the earlier cut).
  bool changed = true;
  while (changed && cuts.size() > 1) {
    changed = false;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      if (cuts[k + 1].pos - cuts[k].pos < minlen) {
        cuts.erase(cuts.begin() +
                   static_cast<std::ptrdiff_t>(cuts[k].support < cuts[k + 1].support ? k : k + 1));
        changed = true;
        break;
      }
    }
  }

  SlopeBaseline sb;
  for (const Cut& c : cuts) sb.breakpoints.push_back(c.pos);
  std::vector<Eigen::Index> bounds{0};
  bounds.insert(bounds.end(), sb.breakpoints.begin(), sb.breakpoints.end());
  bounds.push_back(L);
  for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
    const Eigen::Index a = bounds[b], e = bounds[b + 1];
    Eigen::ArrayXd t(e - a);
    for (Eigen::Index q = a; q < e; ++q) t(q - a) = static_cast<double>(q + 1);
    sb.slopes.push_back(huber_line(t, y.segment(a, e - a)).second);
  }
  return sb;
}

DetectionResult detect_type2(const Eigen::Ref<const Eigen::ArrayXd>& y,
                             const SmoothingConfig& cfg, double alpha,
                             const SlopeBaseline* baseline) {
  return run_family(y, cfg, alpha, 1, baseline, {});
}

DetectionResult detect_mixture(const Eigen::Ref<const Eigen::ArrayXd>& y,
                               const SmoothingConfig& cfg_type2,
                               const SmoothingConfig& cfg_type1, double alpha,
                               bool zero_baseline) {
  SlopeBaseline sb;
  const SlopeBaseline* bp = nullptr;
  if (!zero_baseline) {
    sb = estimate_slope_baseline(y, cfg_type2);
    bp = &sb;
  }
  DetectionResult r2 = detect_type2(y, cfg_type2, alpha, bp);

  std::vector<IndexInterval> masked;
  const Eigen::Index L = y.size();
  for (const Detection& d : r2.detections) {
    const double lo_t = std::ceil(d.location - 2.0 * cfg_type2.gamma);
    const double hi_t = std::floor(d.location + 2.0 * cfg_type2.gamma);
    const Eigen::Index a =
        std::max<Eigen::Index>(0, static_cast<Eigen::Index>(lo_t) - 1);
    const Eigen::Index b =
        std::min<Eigen::Index>(L - 1, static_cast<Eigen::Index>(hi_t) - 1);
    if (a <= b) masked.emplace_back(a, b);
  }

  DetectionResult r1 = detect_type1(y, cfg_type1, alpha, masked);

  DetectionResult res;
  res.alpha = alpha;
  res.detections = std::move(r1.detections);
  res.detections.insert(res.detections.end(), r2.detections.begin(),
                        r2.detections.end());
  std::sort(res.detections.begin(), res.detections.end(),
            [](const Detection& a, const Detection& b) {
              return a.location < b.location;
            });
  res.type1 = r1.type1;
  res.type2 = r2.type2;
  res.cfg_type1 = r1.cfg_type1;
  res.cfg_type2 = r2.cfg_type2;
  res.candidates_type1 = std::move(r1.candidates_type1);
  res.candidates_type2 = std::move(r2.candidates_type2);
  return res;
}

}  // namespace mstem
