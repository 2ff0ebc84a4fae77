#include "mstem/signal.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "mstem/math.hpp"
#include "mstem/noise.hpp"

namespace mstem {

namespace {

double segment_value(const Segment& s, double t) {
  return s.intercept + s.slope * t;
}

void require_isolated(const PiecewiseLinearSignal& sig, double gamma, double c) {
  const auto cps = sig.change_points();
  for (std::size_t i = 1; i < cps.size(); ++i)
    if (cps[i].v - cps[i - 1].v <= 2.0 * c * gamma)
      throw std::invalid_argument(
          "smoothed_derivative_closed_form: change-point windows overlap");
}

}  // namespace

std::vector<ChangePointTruth> PiecewiseLinearSignal::change_points() const {
  std::vector<ChangePointTruth> out;
  for (std::size_t j = 0; j + 1 < segments.size(); ++j) {
    const Segment& left = segments[j];
    const Segment& right = segments[j + 1];
    ChangePointTruth cp;
    cp.v = left.v;
    const double lv = segment_value(left, left.v);
    const double rv = segment_value(right, left.v);
    cp.a = rv - lv;
    cp.slope_change = right.slope - left.slope;
    // the intercept recursion cancels catastrophically at continuous kinks,
    // leaving ~1e-14 phantom jumps; snap those back to exact zero
    if (std::abs(cp.a) <= 1e-9 * std::max({1.0, std::abs(lv), std::abs(rv)}))
      cp.a = 0.0;
    if (std::abs(cp.slope_change) <=
        1e-12 * std::max({1.0, std::abs(left.slope), std::abs(right.slope)}))
      cp.slope_change = 0.0;
    if (cp.a == 0.0 && cp.slope_change == 0.0) continue;  // cosmetic boundary
    cp.type = (cp.a != 0.0) ? CpType::TypeII : CpType::TypeI;
    if (cp.a != 0.0) cp.q = cp.slope_change / cp.a;
    out.push_back(cp);
  }
  return out;
}

Eigen::ArrayXd evaluate_signal(const PiecewiseLinearSignal& sig,
                               Eigen::Index L) {
  if (L <= 0) throw std::invalid_argument("evaluate_signal: empty grid");
  if (sig.segments.empty())
    throw std::invalid_argument("evaluate_signal: signal has no segments");
  Eigen::ArrayXd mu(L);
  std::size_t j = 0;
  for (Eigen::Index i = 0; i < L; ++i) {
    const double t = static_cast<double>(i + 1);
    while (j + 1 < sig.segments.size() && t > sig.segments[j].v) ++j;
    mu(i) = segment_value(sig.segments[j], t);
  }
  return mu;
}

double smoothed_derivative_closed_form(const PiecewiseLinearSignal& sig,
                                       double gamma, double c, int order,
                                       double t) {
  if (order != 1 && order != 2)
    throw std::invalid_argument(
        "smoothed_derivative_closed_form: order must be 1 or 2");
  require_isolated(sig, gamma, c);

  const auto cps = sig.change_points();
  // locate the owning segment (v_{j-1}, v_j]
  std::size_t seg = 0;
  while (seg + 1 < sig.segments.size() && t > sig.segments[seg].v) ++seg;

  // inside some change point's window?
  for (std::size_t j = 0; j + 1 < sig.segments.size(); ++j) {
    const double v = sig.segments[j].v;
    if (std::abs(v - t) > c * gamma) continue;
    const double kl = sig.segments[j].slope;
    const double kr = sig.segments[j + 1].slope;
    const double a =
        segment_value(sig.segments[j + 1], v) - segment_value(sig.segments[j], v);
    const double u = (v - t) / gamma;
    if (order == 1)
      return (a / gamma) * phi(u) + (kl - kr) * Phi(u) + (kl + kr) * Phi(c) - kl;
    return (a * (v - t) + (kr - kl) * gamma * gamma) / (gamma * gamma * gamma) *
           phi(u);
  }

  // quiet zone
  if (order == 1) return sig.segments[seg].slope * (2.0 * Phi(c) - 1.0);
  return 0.0;
}

std::vector<double> extremum_location(const ChangePointTruth& cp, double gamma,
                                      int order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("extremum_location: order must be 1 or 2");
  if (cp.type == CpType::TypeI) {
    if (order == 1) return {};  // mu'_gamma has no stationary point at a kink
    return {cp.v};
  }
  const double q = cp.q.value_or(0.0);
  const double g2q = gamma * gamma * q;
  if (order == 1) return {cp.v + g2q};
  const double disc = gamma * std::sqrt(gamma * gamma * q * q + 4.0);
  return {cp.v + 0.5 * (g2q - disc), cp.v + 0.5 * (g2q + disc)};
}

double snr(const ChangePointTruth& cp, double k_left, double gamma, double nu,
           double c) {
  const SmoothingConfig cfg{gamma, nu, c, 1.0};
  if (cp.type == CpType::TypeI) {
    const double peak = std::abs(cp.slope_change) / (kSqrt2Pi * gamma);
    return peak / sigma_ell(cfg, 2);
  }
  const double k_right = k_left + cp.slope_change;
  const double peak = std::abs(cp.a / (kSqrt2Pi * gamma) + cp.slope_change / 2.0 +
                               (k_left + k_right) * (Phi(c) - 1.0));
  return peak / sigma_ell(cfg, 1);
}

namespace {

PiecewiseLinearSignal build(double L, double d, int tiles, int id,
                            const ScenarioParams& p, double gamma, double c) {
  if (!(d > 2.0 * c * gamma))
    throw std::invalid_argument("make_scenario: spacing d must exceed 2*c*gamma");
  const int J = static_cast<int>(std::floor(L / d)) - 1;
  if (J < 1) throw std::invalid_argument("make_scenario: domain too short for d");

  const int per = (tiles > 1)
                      ? static_cast<int>(std::llround(L / tiles / d))
                      : (id == 4 ? static_cast<int>(std::llround(L / 2.0 / d))
                                 : J + 1);

  PiecewiseLinearSignal sig;
  sig.L = L;
  double cc = 0.0, kk = 0.0;
  for (int j = 1; j <= J; ++j) {
    const double v = j * d;
    double a = 0.0, k_next = kk;
    const bool seam = (j % per == 0);
    const int jj = ((j - 1) % per) + 1;  // within-tile index

    switch (id) {
      case 1:
        k_next = seam ? 0.0 : kk + p.dk;
        break;
      case 2:
        if (seam)
          a = -(cc + kk * v);  // restart the staircase at its base value
        else
          a = p.jump;
        k_next = 0.0;
        break;
      case 3:
        if (seam) {
          a = -(cc + kk * v);
          k_next = 0.0;
        } else {
          a = p.jump;
          k_next = kk + ((jj % 2 == 1) ? p.dk3 : -p.dk3);
        }
        break;
      case 4: {
        // first half: scenario-1 kinks; the midpoint is not a change point;
        // second half: scenario-3 jumps with alternating slope changes
        if (j < per) {
          k_next = kk + p.dk;
        } else if (j == per) {
          continue;  // slope runs straight through the junction
        } else {
          const int m = j - per;
          a = p.jump;
          k_next = kk + ((m % 2 == 1) ? p.dk3 : -p.dk3);
        }
        break;
      }
      default:
        throw std::invalid_argument("make_scenario: id must be 1..4");
    }

    sig.segments.push_back({cc, kk, v});
    cc = cc + (kk - k_next) * v + a;
    kk = k_next;
  }
  sig.segments.push_back({cc, kk, L});
  return sig;
}

}  // namespace

PiecewiseLinearSignal make_scenario(int id, double L, double d,
                                    const ScenarioParams& params, double gamma,
                                    double c) {
  return build(L, d, 1, id, params, gamma, c);
}

PiecewiseLinearSignal make_long_term(int id, double L, double d, int tiles,
                                     const ScenarioParams& params, double gamma,
                                     double c) {
  if (id < 1 || id > 3)
    throw std::invalid_argument("make_long_term: id must be 1..3");
  if (tiles < 2) throw std::invalid_argument("make_long_term: tiles must be >= 2");
  return build(L, d, tiles, id, params, gamma, c);
}

std::string to_json(const PiecewiseLinearSignal& sig) {
  nlohmann::json j;
  j["L"] = sig.L;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : sig.segments)
    j["segments"].push_back({{"c", s.intercept}, {"k", s.slope}, {"v", s.v}});
  return j.dump();
}

PiecewiseLinearSignal signal_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  PiecewiseLinearSignal sig;
  sig.L = j.at("L").get<double>();
  for (const auto& s : j.at("segments"))
    sig.segments.push_back({s.at("c").get<double>(), s.at("k").get<double>(),
                            s.at("v").get<double>()});
  return sig;
}

}  // namespace mstem
