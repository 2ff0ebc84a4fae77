// mstem command-line front end: detect / simulate / evaluate / theory.
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mstem/detect.hpp"
#include "mstem/eval.hpp"
#include "mstem/io.hpp"
#include "mstem/kernel.hpp"
#include "mstem/noise.hpp"
#include "mstem/signal.hpp"
#include "mstem/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Options {
  double gamma = 10.0;
  double nu = 1.0;
  double c = 4.0;
  double alpha = 0.05;
  double b = 10.0;
  std::optional<double> sigma0;
  std::string mode = "auto";
  std::string baseline = "auto";
  int scenario = 1;
  double L = 1500.0;
  double d = 150.0;
  int reps = 1000;
  std::uint64_t seed = 20240901;
  int threads = 0;
  int long_term = 1;
  double dk = 0.1;
  double jump = 10.0;
  double dk3 = 0.05;
  std::optional<double> A;
  std::string snr_sweep;
  std::string input;
  std::string output;
  bool sign_aware = true;
};

void emit(const Options& opt, const std::string& text) {
  if (opt.output.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(opt.output, std::ios::binary);
  if (!out) throw mstem::CsvError("cannot open output '" + opt.output + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

mstem::SmoothingConfig smoothing_of(const Options& opt, double sigma0) {
  return {opt.gamma, opt.nu, opt.c, sigma0};
}

mstem::SimConfig sim_config_of(const Options& opt) {
  mstem::SimConfig cfg;
  cfg.scenario = opt.scenario;
  cfg.L = opt.L;
  cfg.d = opt.d;
  cfg.params = {opt.dk, opt.jump, opt.dk3};
  cfg.smoothing = smoothing_of(opt, opt.sigma0.value_or(1.0));
  cfg.alpha = opt.alpha;
  cfg.b = opt.b;
  cfg.reps = opt.reps;
  cfg.seed = opt.seed;
  cfg.threads = opt.threads;
  cfg.long_term_tiles = opt.long_term;
  if (opt.mode == "type1") cfg.mode = mstem::DetectMode::Type1;
  else if (opt.mode == "type2") cfg.mode = mstem::DetectMode::Type2;
  else if (opt.mode == "mixture") cfg.mode = mstem::DetectMode::Mixture;
  if (opt.baseline == "zero") cfg.baseline = mstem::BaselineMode::Zero;
  else if (opt.baseline == "estimate") cfg.baseline = mstem::BaselineMode::Estimate;
  return cfg;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<double> parse_sweep(const std::string& text) {
  const auto bad = [&] {
    throw std::invalid_argument("--snr-sweep expects lo:hi:steps, got '" +
                                text + "'");
  };
  std::vector<std::string> parts;
  std::string cur;
  for (const char ch : text) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() != 3) bad();
  double lo = 0.0, hi = 0.0;
  int steps = 0;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    steps = std::stoi(parts[2]);
  } catch (...) {
    bad();
  }
  if (!(lo > 0.0) || hi < lo || steps < 1) bad();
  if (steps == 1) {
    if (hi != lo) bad();
    return {lo};
  }
  std::vector<double> scales(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i)
    scales[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  return scales;
}

// ---------------------------------------------------------------------------
// detect

int cmd_detect(const Options& opt) {
  if (opt.input.empty())
    throw std::invalid_argument("detect requires --input <csv>");
  const std::string mode = (opt.mode == "auto") ? "mixture" : opt.mode;
  const std::string baseline = (opt.baseline == "auto") ? "estimate" : opt.baseline;

  const mstem::CsvSeries series = mstem::ingest_csv(opt.input);
  const Eigen::ArrayXd& y = series.values;

  // noise level: taken from --sigma0 or estimated robustly from the
  // derivative field the detector actually thresholds
  std::optional<double> estimated;
  double sigma0 = 1.0;
  if (opt.sigma0) {
    sigma0 = *opt.sigma0;
    if (!(sigma0 > 0.0))
      throw std::invalid_argument("--sigma0 must be positive");
  } else {
    const int order = (mode == "type1") ? 2 : 1;
    mstem::SmoothingConfig probe = smoothing_of(opt, 1.0);
    const mstem::SampledKernel k =
        mstem::sample_kernel(probe.gamma, probe.c, order);
    const Eigen::ArrayXd smoothed =
        mstem::convolve(y, k, mstem::ConvolveMode::ValidInterior);
    sigma0 = mstem::estimate_sigma0(smoothed, probe, order);
    estimated = sigma0;
  }

  const mstem::SmoothingConfig cfg = smoothing_of(opt, sigma0);
  mstem::DetectionResult result;
  if (mode == "type1") {
    result = mstem::detect_type1(y, cfg, opt.alpha);
  } else if (mode == "type2") {
    if (baseline == "zero") {
      result = mstem::detect_type2(y, cfg, opt.alpha, nullptr);
    } else {
      const mstem::SlopeBaseline sb = mstem::estimate_slope_baseline(y, cfg);
      result = mstem::detect_type2(y, cfg, opt.alpha, &sb);
    }
  } else {
    result = mstem::detect_mixture(y, cfg, cfg, opt.alpha, baseline == "zero");
  }

  emit(opt, mstem::detection_to_json(result, mode, baseline, estimated));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

nlohmann::json aggregate_json(const mstem::AggregateReport& agg) {
  nlohmann::json j;
  j["reps"] = agg.reps;
  j["fdr"] = agg.fdr;
  j["fdr_se"] = agg.fdr_se;
  j["power"] = agg.power;
  j["power_se"] = agg.power_se;
  j["capture"] = agg.capture;
  j["capture_se"] = agg.capture_se;
  return j;
}

std::string mode_name(mstem::DetectMode m) {
  switch (m) {
    case mstem::DetectMode::Type1: return "type1";
    case mstem::DetectMode::Type2: return "type2";
    case mstem::DetectMode::Mixture: return "mixture";
    default: return "auto";
  }
}

int cmd_simulate(const Options& opt) {
  mstem::SimConfig cfg = sim_config_of(opt);

  nlohmann::json summary;
  summary["schema"] = mstem::kSchema;
  summary["command"] = "simulate";
  summary["config"] = {{"scenario", cfg.scenario},
                       {"L", cfg.L},
                       {"d", cfg.d},
                       {"gamma", cfg.smoothing.gamma},
                       {"nu", cfg.smoothing.nu},
                       {"c", cfg.smoothing.c},
                       {"sigma0", cfg.smoothing.sigma0},
                       {"alpha", cfg.alpha},
                       {"b", cfg.b},
                       {"reps", cfg.reps},
                       {"seed", cfg.seed},
                       {"long_term_tiles", cfg.long_term_tiles}};

  std::string csv;
  if (!opt.snr_sweep.empty()) {
    const std::vector<double> scales = parse_sweep(opt.snr_sweep);
    const auto points = mstem::run_sweep(cfg, scales);

    summary["sweep"] = nlohmann::json::array();
    std::ostringstream rows;
    rows << "scale,snr,fdr_limit,metric,value\n";
    for (const auto& pt : points) {
      nlohmann::json pj;
      pj["scale"] = pt.scale;
      pj["snr"] = pt.snr;
      pj["fdr_limit"] = pt.fdr_limit;
      pj["aggregate"] = aggregate_json(pt.agg);
      summary["sweep"].push_back(pj);

      const std::string prefix = format_double(pt.scale) + "," +
                                 format_double(pt.snr) + "," +
                                 format_double(pt.fdr_limit) + ",";
      rows << prefix << "fdr," << format_double(pt.agg.fdr) << "\n";
      rows << prefix << "fdr_se," << format_double(pt.agg.fdr_se) << "\n";
      rows << prefix << "power," << format_double(pt.agg.power) << "\n";
      rows << prefix << "power_se," << format_double(pt.agg.power_se) << "\n";
      for (std::size_t b = 0; b < mstem::kCaptureBins; ++b)
        rows << prefix << "capture" << b << ","
             << format_double(pt.agg.capture[b]) << "\n";
    }
    csv = rows.str();
  } else {
    const mstem::SimResult res = mstem::run_simulation(cfg);
    summary["mode"] = mode_name(res.mode);
    summary["truth_count"] = res.truth.size();
    summary["aggregate"] = aggregate_json(res.agg);

    std::ostringstream rows;
    rows << "rep,R,V,J,fdp,power,capture0,capture1,capture2,capture3,capture4\n";
    for (std::size_t i = 0; i < res.reports.size(); ++i) {
      const mstem::ScoreReport& r = res.reports[i];
      rows << i << "," << r.R << "," << r.V << "," << r.J << ","
           << format_double(r.fdp) << "," << format_double(r.power);
      for (std::size_t b = 0; b < mstem::kCaptureBins; ++b)
        rows << "," << format_double(r.capture[b]);
      rows << "\n";
    }
    csv = rows.str();
  }

  // per-replication (or per-point) rows go to --output when given; the JSON
  // summary always goes to stdout
  if (!opt.output.empty()) {
    std::ofstream out(opt.output, std::ios::binary);
    if (!out) throw mstem::CsvError("cannot open output '" + opt.output + "'");
    out << csv;
  }
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const Options& opt) {
  if (opt.input.empty())
    throw std::invalid_argument("evaluate requires --input <detection json>");

  std::ifstream in(opt.input, std::ios::binary);
  if (!in) throw mstem::CsvError("cannot open input '" + opt.input + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  mstem::DetectionResult result;
  try {
    result = mstem::detection_from_json(buf.str());
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw mstem::CsvError(std::string("bad detection json: ") + e.what());
  }

  const mstem::SimConfig cfg = sim_config_of(opt);
  const std::vector<mstem::ChangePointTruth> truth =
      mstem::build_signal(cfg).change_points();
  const mstem::ScoringConfig score_cfg{opt.b, opt.gamma, opt.sign_aware};
  const mstem::ScoreReport rep =
      mstem::score_replication(result, truth, score_cfg);

  nlohmann::json j;
  j["schema"] = mstem::kSchema;
  j["command"] = "evaluate";
  j["R"] = rep.R;
  j["V"] = rep.V;
  j["J"] = rep.J;
  j["fdp"] = rep.fdp;
  j["power"] = rep.power;
  j["capture"] = rep.capture;
  emit(opt, j.dump(2));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// theory

int cmd_theory(const Options& opt) {
  const mstem::SmoothingConfig cfg = smoothing_of(opt, opt.sigma0.value_or(1.0));

  nlohmann::json j;
  j["schema"] = mstem::kSchema;
  j["command"] = "theory";
  j["config"] = {{"gamma", cfg.gamma},
                 {"nu", cfg.nu},
                 {"c", cfg.c},
                 {"sigma0", cfg.sigma0}};

  for (int order = 1; order <= 2; ++order) {
    const mstem::PeakHeightDistribution dist =
        mstem::peak_distribution(cfg, order);
    const std::string key = "order" + std::to_string(order);
    j["sigma"][key] = dist.sigma;
    j["eta"][key] = dist.eta;
    j["extrema_density"][key] = mstem::expected_extrema_density(cfg, order);
  }

  // snr() is defined per unit noise scale; report it at the configured one
  mstem::ChangePointTruth kink;
  kink.v = 0.0;
  kink.slope_change = opt.dk;
  kink.type = mstem::CpType::TypeI;
  j["snr"]["type1"] =
      mstem::snr(kink, 0.0, cfg.gamma, cfg.nu, cfg.c) / cfg.sigma0;

  mstem::ChangePointTruth jump;
  jump.v = 0.0;
  jump.a = opt.jump;
  jump.type = mstem::CpType::TypeII;
  jump.q = 0.0;
  j["snr"]["type2"] =
      mstem::snr(jump, 0.0, cfg.gamma, cfg.nu, cfg.c) / cfg.sigma0;

  if (opt.A) {
    j["fdr_limit"]["A"] = *opt.A;
    j["fdr_limit"]["alpha"] = opt.alpha;
    j["fdr_limit"]["type1"] =
        mstem::asymptotic_fdr_limit(cfg, 2, opt.alpha, *opt.A);
    j["fdr_limit"]["type2"] =
        mstem::asymptotic_fdr_limit(cfg, 1, opt.alpha, *opt.A);
  }

  emit(opt, j.dump(2));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Change-point detection in piecewise-linear signals via "
               "differential smoothing and peak-height testing"};
  app.require_subcommand(1);

  const std::vector<std::string> modes{"auto", "type1", "type2", "mixture"};
  const std::vector<std::string> baselines{"auto", "estimate", "zero"};

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--gamma", opt.gamma, "smoothing bandwidth")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--nu", opt.nu, "noise correlation bandwidth (0 = iid)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--c", opt.c, "kernel truncation radius, in bandwidths")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", opt.alpha, "BH level")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--sigma0", opt.sigma0, "noise scale (estimated if absent)");
    cmd->add_option("--output", opt.output, "output path (default stdout)");
  };

  CLI::App* detect = app.add_subcommand("detect", "detect change points in a CSV series");
  add_common(detect);
  detect->add_option("--input", opt.input, "input CSV path")->required();
  detect->add_option("--mode", opt.mode, "detector family")
      ->check(CLI::IsMember(modes));
  detect->add_option("--baseline", opt.baseline, "slope baseline handling")
      ->check(CLI::IsMember(baselines));

  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo campaign");
  add_common(simulate);
  simulate->add_option("--mode", opt.mode, "detector family")
      ->check(CLI::IsMember(modes));
  simulate->add_option("--baseline", opt.baseline, "slope baseline handling")
      ->check(CLI::IsMember(baselines));
  simulate->add_option("--scenario", opt.scenario, "scenario id 1..4")
      ->check(CLI::Range(1, 4));
  simulate->add_option("--L", opt.L, "signal length")->check(CLI::PositiveNumber);
  simulate->add_option("--d", opt.d, "change-point spacing")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--b", opt.b, "scoring distance tolerance")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--reps", opt.reps, "replications")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", opt.seed, "master seed");
  simulate->add_option("--threads", opt.threads, "worker threads (0 = auto)");
  simulate->add_option("--long-term", opt.long_term, "tile count (1 = off)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--dk", opt.dk, "kink slope increment");
  simulate->add_option("--jump", opt.jump, "jump size");
  simulate->add_option("--dk3", opt.dk3, "alternating slope increment");
  simulate->add_option("--snr-sweep", opt.snr_sweep,
                       "effect-scale sweep lo:hi:steps");
  simulate->add_flag("--no-sign-aware", [&](std::int64_t) { opt.sign_aware = false; },
                     "score power without matching extremum signs");

  CLI::App* evaluate = app.add_subcommand("evaluate", "re-score a detection JSON");
  add_common(evaluate);
  evaluate->add_option("--input", opt.input, "detection JSON path")->required();
  evaluate->add_option("--scenario", opt.scenario, "truth scenario id 1..4")
      ->check(CLI::Range(1, 4));
  evaluate->add_option("--L", opt.L, "signal length")->check(CLI::PositiveNumber);
  evaluate->add_option("--d", opt.d, "change-point spacing")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--b", opt.b, "scoring distance tolerance")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--long-term", opt.long_term, "tile count (1 = off)")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--dk", opt.dk, "kink slope increment");
  evaluate->add_option("--jump", opt.jump, "jump size");
  evaluate->add_option("--dk3", opt.dk3, "alternating slope increment");
  evaluate->add_flag("--no-sign-aware", [&](std::int64_t) { opt.sign_aware = false; },
                     "score power without matching extremum signs");

  CLI::App* theory = app.add_subcommand("theory", "print derivative-field constants");
  add_common(theory);
  theory->add_option("--dk", opt.dk, "kink slope increment for the SNR");
  theory->add_option("--jump", opt.jump, "jump size for the SNR");
  theory->add_option("--A", opt.A, "change-point density for the FDR ceiling");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (detect->parsed()) return cmd_detect(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    return cmd_theory(opt);
  } catch (const mstem::CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
