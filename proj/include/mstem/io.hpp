#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "mstem/detect.hpp"

namespace mstem {

// Data-format problem: message always names the offending 1-based line.
class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvSeries {
  Eigen::ArrayXd values;
  bool had_time = false;    // two-column (time, value) layout
  bool had_header = false;  // first line was a non-numeric header
};

// Accepts one column (values) or two (time, value) of comma/whitespace
// separated numbers; a leading non-numeric line is treated as a header.
// Time stamps must advance by exactly one sample per row.
CsvSeries parse_csv(std::istream& in);
CsvSeries ingest_csv(const std::string& path);

inline constexpr const char* kSchema = "mstem/1";

std::string detection_to_json(const DetectionResult& result,
                              const std::string& mode,
                              const std::string& baseline,
                              std::optional<double> estimated_sigma0);
DetectionResult detection_from_json(const std::string& text);

}  // namespace mstem
