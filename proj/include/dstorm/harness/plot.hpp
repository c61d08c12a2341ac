#pragma once

#include <string>
#include <vector>

#include "dstorm/decentralized.hpp"

namespace dstorm::harness {

struct PlotSeries {
  std::string label;
  std::vector<MetricRow> rows;
};

/// Two stacked panels against comm_total: f_gap and consensus_sq, both on a
/// log10 axis. Nonpositive or missing values are skipped.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title = "");

/// Throws std::invalid_argument for an empty series list.
void write_svg(const std::vector<PlotSeries>& series, const std::string& path, const std::string& title = "");

}  // namespace dstorm::harness
