#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "s2r/eval.hpp"
#include "s2r/trainer.hpp"

namespace s2r {

// Evaluation report CSV: target_index, tx, ty, tz, return, final_distance_m,
// termination_cause, env_kind, strategy, sequence, seed, config_hash.
std::string report_to_csv(const EvalReport& report);
EvalReport report_from_csv(std::string_view text);

std::string curve_to_csv(const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> read_curve_csv(std::string_view text);

// Identifies which run an artifact belongs to.
struct ArtifactTag {
  std::string strategy;
  std::string sequence = "N/A";
  std::uint64_t seed = 0;
  std::string config_hash;
  friend bool operator==(const ArtifactTag&, const ArtifactTag&) = default;
};

struct TaggedCurve {
  ArtifactTag tag;
  std::vector<CurvePoint> points;
};

// Curve CSV with the run identity repeated on every row.
std::string tagged_curve_to_csv(const TaggedCurve& curve);
TaggedCurve read_tagged_curve_csv(std::string_view text);

// The config_hash column is omitted when `config_hash` is empty.
std::string summary_to_csv(const std::vector<SummaryRow>& rows, std::string_view config_hash = {});

// Training progress CSV, one row per PPO update.
std::string progress_header();
std::string progress_row(const UpdateRecord& record);

struct CurveSeries {
  std::string label;
  std::vector<CurvePoint> points;
};

// Averages curves point-wise over seeds (points matched by timestep).
std::vector<CurvePoint> mean_curve(const std::vector<std::vector<CurvePoint>>& curves);

struct PlotAxis {
  double min = 0.0;
  double max = 1.0;
  double tick_spacing = 1.0;
};

// Static SVG line plot of mean return against timesteps. The x ticks are
// spaced at `x_tick_spacing` and recorded in the root element's
// data-x-tick-spacing attribute.
std::string curve_plot_svg(const std::vector<CurveSeries>& series, double x_tick_spacing,
                           std::string_view title, std::optional<double> baseline = std::nullopt,
                           std::string_view config_hash = {});

}  // namespace s2r
