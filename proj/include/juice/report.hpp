#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "juice/experiment.hpp"

namespace juice {

inline constexpr const char* kCsvHeader =
    "sweep_var,sweep_value,snr_db,algorithm,srr,srr_se,nase,nase_db,iters,trials,wall_ms";

void write_csv(std::ostream& os, const std::vector<CurvePoint>& points);
void emit_csv(const std::vector<CurvePoint>& points, const std::string& path);

/// Parses a file written by write_csv. Fields not in the CSV are left default.
std::vector<CurvePoint> read_csv(std::istream& is);
std::vector<CurvePoint> load_csv(const std::string& path);

enum class PlotMetric { srr, nase_db };
PlotMetric parse_plot_metric(const std::string& name);

/// Standalone SVG line chart. With more than one SNR in the data the x-axis is
/// SNR and there is one line per (algorithm, sweep value); otherwise the x-axis
/// is the sweep value and there is one line per algorithm.
void write_plot(std::ostream& os, const std::vector<CurvePoint>& points, PlotMetric metric);
void emit_plot(const std::vector<CurvePoint>& points, PlotMetric metric, const std::string& path);

}  // namespace juice
