#pragma once

#include <optional>
#include <string>

#include "dataset.hpp"
#include "pipeline.hpp"

namespace dlcc {

struct RunReport {
  DlccConfig config;
  ClusteringResult result;
  std::optional<double> ari_value;
  std::optional<double> ce_value;
  std::vector<SweepCell> leaderboard;  // empty when not swept
};

std::string report_json(const RunReport& report, bool stable_output);

std::string labels_csv_string(const std::vector<int>& labels);

/// SVG scatter colored by label; projects onto the first two principal
/// components when d > 2 (noted in the axis caption).
std::string svg_scatter(const DataMatrix& X, const std::vector<int>& labels);

}  // namespace dlcc
