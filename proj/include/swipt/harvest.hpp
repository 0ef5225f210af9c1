#pragma once

// RF-to-DC conversion models. All three are nondecreasing maps with F(0)=0,
// which is exactly the property that makes maximizing received power and
// maximizing harvested power pick the same operating point.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swipt/common.hpp"

namespace swipt {

enum class EhKind { Linear, LogisticSaturation, PiecewiseTable };

struct EhCircuitModel {
  EhKind kind = EhKind::Linear;
  double eta0 = 1.0;       // Linear: constant efficiency in (0,1]
  double max_dc_w = 0.0;   // LogisticSaturation: saturation power M, watts
  double steepness = 0.0;  // LogisticSaturation: a, 1/watts
  double center_w = 0.0;   // LogisticSaturation: b, watts
  std::vector<std::pair<double, double>> table;  // PiecewiseTable: (p_rf_w, p_dc_w)
};

inline EhCircuitModel linear_model(double eta0) {
  if (!(eta0 > 0.0 && eta0 <= 1.0)) throw std::invalid_argument("eta0 must lie in (0,1]");
  EhCircuitModel m;
  m.kind = EhKind::Linear;
  m.eta0 = eta0;
  return m;
}

inline EhCircuitModel logistic_model(double max_dc_w, double steepness, double center_w) {
  if (!(max_dc_w > 0.0) || !(steepness > 0.0) || !(center_w > 0.0))
    throw std::invalid_argument("logistic parameters must be positive");
  EhCircuitModel m;
  m.kind = EhKind::LogisticSaturation;
  m.max_dc_w = max_dc_w;
  m.steepness = steepness;
  m.center_w = center_w;
  return m;
}

inline EhCircuitModel table_model(std::vector<std::pair<double, double>> samples) {
  if (samples.empty()) throw std::invalid_argument("table must have at least one sample");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].first > 0.0) || samples[i].second < 0.0)
      throw std::invalid_argument("table samples must have positive RF power and nonnegative DC");
    if (i > 0 && !(samples[i].first > samples[i - 1].first))
      throw std::invalid_argument("table RF powers must be strictly increasing");
    if (i > 0 && samples[i].second < samples[i - 1].second)
      throw std::invalid_argument("table DC powers must be nondecreasing");
  }
  EhCircuitModel m;
  m.kind = EhKind::PiecewiseTable;
  m.table = std::move(samples);
  return m;
}

// Two-column CSV with header "p_rf_w,p_dc_w" and strictly increasing first
// column.
inline EhCircuitModel load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open EH table: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty EH table: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "p_rf_w,p_dc_w")
    throw std::runtime_error("bad EH table header in " + path + ": " + line);
  std::vector<std::pair<double, double>> samples;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b))
      throw std::runtime_error("bad EH table row in " + path + ": " + line);
    samples.emplace_back(std::stod(a), std::stod(b));
  }
  try {
    return table_model(std::move(samples));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("bad EH table " + path + ": " + e.what());
  }
}

// Approximate rectifier trend digitized from a typical commercial RF
// harvester's published efficiency curve. Illustrative only; not vendor data.
inline EhCircuitModel sample_rectifier_table() {
  return table_model({{0.001, 0.0001},
                      {0.005, 0.0015},
                      {0.010, 0.0040},
                      {0.020, 0.0105},
                      {0.050, 0.0280},
                      {0.080, 0.0440},
                      {0.100, 0.0520}});
}

// Logistic fit through two interior anchors of the sample table.
inline EhCircuitModel sample_logistic_model() {
  return logistic_model(0.055, 37.32974064757286, 0.03507298953302548);
}

inline double harvested_power(double p_re, const EhCircuitModel& model) {
  if (p_re < 0.0) throw std::domain_error("received power must be nonnegative");
  switch (model.kind) {
    case EhKind::Linear:
      return model.eta0 * p_re;
    case EhKind::LogisticSaturation: {
      const double s = 1.0 / (1.0 + std::exp(-model.steepness * (p_re - model.center_w)));
      const double s0 = 1.0 / (1.0 + std::exp(model.steepness * model.center_w));
      return model.max_dc_w * (s - s0) / (1.0 - s0);
    }
    case EhKind::PiecewiseTable: {
      const auto& t = model.table;
      if (p_re >= t.back().first) return t.back().second;  // flat saturation tail
      // implicit (0,0) anchor ahead of the first sample
      double x0 = 0.0, y0 = 0.0;
      for (const auto& [x1, y1] : t) {
        if (p_re <= x1) return y0 + (y1 - y0) * (p_re - x0) / (x1 - x0);
        x0 = x1;
        y0 = y1;
      }
      return t.back().second;
    }
  }
  throw std::logic_error("unknown EH model kind");
}

inline double implied_efficiency(double p_re, const EhCircuitModel& model) {
  if (p_re < 0.0) throw std::domain_error("received power must be nonnegative");
  if (p_re == 0.0) throw std::domain_error("efficiency undefined at zero received power");
  return harvested_power(p_re, model) / p_re;
}

}  // namespace swipt
