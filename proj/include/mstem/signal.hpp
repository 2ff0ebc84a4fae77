#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace mstem {

// One linear piece mu(t) = c + k * t on (v_prev, v]; v is the right endpoint.
struct Segment {
  double intercept = 0.0;  // c_j
  double slope = 0.0;      // k_j
  double v = 0.0;          // right endpoint of this piece
};

enum class CpType { TypeI, TypeII };

struct ChangePointTruth {
  double v = 0.0;             // location
  double a = 0.0;             // jump size (0 for TypeI)
  double slope_change = 0.0;  // k_{j+1} - k_j
  CpType type = CpType::TypeI;
  std::optional<double> q;    // slope_change / a, present iff a != 0
};

struct PiecewiseLinearSignal {
  std::vector<Segment> segments;  // ordered; last v is the domain end L
  double L = 0.0;

  std::vector<ChangePointTruth> change_points() const;
};

// Sample mu on the grid t = 1..L (ownership of v_j goes to the left piece).
Eigen::ArrayXd evaluate_signal(const PiecewiseLinearSignal& sig,
                               Eigen::Index L);

// Convolution of mu with the order-1 or order-2 kernel, evaluated exactly.
// Requires change points separated by more than 2*c*gamma (windows must not
// overlap), else std::invalid_argument.
double smoothed_derivative_closed_form(const PiecewiseLinearSignal& sig,
                                       double gamma, double c, int order,
                                       double t);

// Stationary points of the smoothed derivative field near change point j.
// order 1: the jump-induced extremum of mu'_gamma (none for TypeI);
// order 2: the extremum/extrema of mu''_gamma (single point v for TypeI,
// a symmetric pair around the jump for TypeII).  Locations are reported
// even when they land outside the kernel window.
std::vector<double> extremum_location(const ChangePointTruth& cp, double gamma,
                                      int order);

// Peak signal-to-noise ratio of change point cp in its natural smoothed
// field (order 2 for TypeI, order 1 for TypeII), for noise bandwidth nu and
// truncation c.  k_left is the slope entering the change point.
double snr(const ChangePointTruth& cp, double k_left, double gamma, double nu,
           double c);

struct ScenarioParams {
  double dk = 0.1;     // TypeI slope increment (scenario 1)
  double jump = 10.0;  // TypeII jump size (scenarios 2,3)
  double dk3 = 0.05;   // alternating slope increment riding on the jumps (scenario 3)
};

// Standard simulation layouts.  Change points sit at v = d, 2d, ... below L.
//   1: slope increases by dk at every point (continuous kinks)
//   2: pure jumps of size `jump`, slope 0 everywhere
//   3: jumps of size `jump` with slope changes +/- dk3 alternating
//   4: scenario 1 on [0, L/2] followed by scenario 3 on (L/2, L]
// The generator refuses spacings d <= 2*c*gamma for the given gamma since the
// closed forms (and the detector's resolution) assume isolated windows.
PiecewiseLinearSignal make_scenario(int id, double L, double d,
                                    const ScenarioParams& params = {},
                                    double gamma = 10.0, double c = 4.0);

// Replicates the scenario pattern `tiles` times.  Scenario 1 keeps the mean
// continuous across seams, which turns each seam into a TypeI point with
// slope change -(per-1)*dk; scenarios 2 and 3 repeat by value so seams look
// like the interior jumps.
PiecewiseLinearSignal make_long_term(int id, double L, double d, int tiles,
                                     const ScenarioParams& params = {},
                                     double gamma = 10.0, double c = 4.0);

std::string to_json(const PiecewiseLinearSignal& sig);
PiecewiseLinearSignal signal_from_json(const std::string& text);

}  // namespace mstem
