#include "mstem/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace mstem {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == ';') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool parse_number(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace

CsvSeries parse_csv(std::istream& in) {
  CsvSeries series;
  std::vector<double> values;
  std::vector<double> times;
  std::string line;
  std::size_t lineno = 0;
  std::size_t ncols = 0;
  bool saw_data = false;

  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;  // blank lines are fine anywhere

    std::vector<double> nums(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (!parse_number(fields[i], nums[i])) {
        numeric = false;
        break;
      }

    if (!numeric) {
      if (!saw_data && lineno == 1) {
        series.had_header = true;
        continue;
      }
      throw CsvError("csv: non-numeric value on line " + std::to_string(lineno));
    }
    if (fields.size() > 2)
      throw CsvError("csv: expected 1 or 2 columns on line " +
                     std::to_string(lineno) + ", got " +
                     std::to_string(fields.size()));
    if (!saw_data) {
      ncols = fields.size();
      saw_data = true;
    } else if (fields.size() != ncols) {
      throw CsvError("csv: inconsistent column count on line " +
                     std::to_string(lineno));
    }

    if (ncols == 2) {
      times.push_back(nums[0]);
      values.push_back(nums[1]);
      const std::size_t n = times.size();
      if (n >= 2 && times[n - 1] - times[n - 2] != 1.0)
        throw CsvError(
            "csv: time column must advance by one sample per row; line " +
            std::to_string(lineno));
    } else {
      values.push_back(nums[0]);
    }
  }

  if (values.empty()) throw CsvError("csv: no data rows");
  series.had_time = (ncols == 2);
  series.values = Eigen::Map<Eigen::ArrayXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
  return series;
}

CsvSeries ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("csv: cannot open '" + path + "'");
  return parse_csv(in);
}

namespace {

nlohmann::json threshold_json(const std::optional<FamilyThreshold>& t) {
  if (!t) return nullptr;
  nlohmann::json j;
  j["p_cutoff"] = t->p_cutoff;
  if (t->height)
    j["height"] = *t->height;
  else
    j["height"] = nullptr;
  return j;
}

std::optional<FamilyThreshold> threshold_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  FamilyThreshold t;
  t.p_cutoff = j.at("p_cutoff").get<double>();
  if (!j.at("height").is_null()) t.height = j.at("height").get<double>();
  return t;
}

nlohmann::json config_json(const std::optional<SmoothingConfig>& c) {
  if (!c) return nullptr;
  return {{"gamma", c->gamma}, {"nu", c->nu}, {"c", c->c}, {"sigma0", c->sigma0}};
}

std::optional<SmoothingConfig> config_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  SmoothingConfig c;
  c.gamma = j.at("gamma").get<double>();
  c.nu = j.at("nu").get<double>();
  c.c = j.at("c").get<double>();
  c.sigma0 = j.at("sigma0").get<double>();
  return c;
}

}  // namespace

std::string detection_to_json(const DetectionResult& result,
                              const std::string& mode,
                              const std::string& baseline,
                              std::optional<double> estimated_sigma0) {
  nlohmann::json j;
  j["schema"] = kSchema;
  j["config"] = {{"alpha", result.alpha},
                 {"mode", mode},
                 {"baseline", baseline},
                 {"type1", config_json(result.cfg_type1)},
                 {"type2", config_json(result.cfg_type2)}};
  if (estimated_sigma0)
    j["estimated_sigma0"] = *estimated_sigma0;
  else
    j["estimated_sigma0"] = nullptr;
  j["thresholds"] = {{"type1", threshold_json(result.type1)},
                     {"type2", threshold_json(result.type2)}};
  j["detections"] = nlohmann::json::array();
  for (const Detection& d : result.detections)
    j["detections"].push_back(
        {{"location", d.location},
         {"index", d.index},
         {"type", d.type == CpType::TypeI ? "TypeI" : "TypeII"},
         {"sign", d.sign > 0 ? "max" : "min"},
         {"p_value", d.p_value}});
  return j.dump(2);
}

DetectionResult detection_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("schema").get<std::string>() != kSchema)
    throw std::runtime_error("detection_from_json: unknown schema");
  DetectionResult r;
  r.alpha = j.at("config").at("alpha").get<double>();
  r.cfg_type1 = config_from(j.at("config").at("type1"));
  r.cfg_type2 = config_from(j.at("config").at("type2"));
  r.type1 = threshold_from(j.at("thresholds").at("type1"));
  r.type2 = threshold_from(j.at("thresholds").at("type2"));
  for (const auto& dj : j.at("detections")) {
    Detection d;
    d.location = dj.at("location").get<double>();
    d.index = dj.at("index").get<Eigen::Index>();
    d.type = dj.at("type").get<std::string>() == "TypeI" ? CpType::TypeI
                                                         : CpType::TypeII;
    d.sign = dj.at("sign").get<std::string>() == "max" ? +1 : -1;
    d.p_value = dj.at("p_value").get<double>();
    r.detections.push_back(d);
  }
  return r;
}

}  // namespace mstem
