#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "paretolaw/training.hpp"

namespace paretolaw {

struct FrontierPoint {
  double delta = 0.0;
  double loss = 0.0;

  friend bool operator==(const FrontierPoint&, const FrontierPoint&) = default;
};

enum class CurveKind { exact_gap_hull, budget_envelope, pareto_staircase, closed_form_exact };

std::string to_string(CurveKind kind);
CurveKind parse_curve_kind(std::string_view text);

struct CurveSource {
  std::int64_t n_params = 0;
  std::int64_t d_train = 0;
  std::size_t point_count = 0;
};

struct FrontierCurve {
  std::vector<FrontierPoint> vertices;  // strictly increasing delta
  CurveKind kind = CurveKind::exact_gap_hull;
  CurveSource source;
  // Free-form provenance written into the comment header (e.g. smoothing,
  // constants, input digests).
  std::map<std::string, std::string> notes;
};

/// Lower convex hull on the (delta, loss) plane. Collinear interior points are
/// dropped; at equal delta the minimum loss is kept.
FrontierCurve lower_convex_hull(std::span<const FrontierPoint> points);

/// Running minimum of loss over increasing delta.
FrontierCurve budget_envelope(std::span<const FrontierPoint> points);
FrontierCurve budget_envelope(const FrontierCurve& curve);

/// Non-dominated points (strict decrease of loss with increasing delta).
FrontierCurve pareto_staircase(std::span<const FrontierPoint> points);

/// Piecewise-linear evaluation; throws RangeError outside the vertex span.
double interpolate(const FrontierCurve& curve, double delta);

/// Test-split (delta, loss) of each trained point.
std::vector<FrontierPoint> to_frontier_points(std::span<const TrainedPoint> points);

/// Averages (test_dp, test_bce) over seeds for each (n_params, d_train, lambda).
std::vector<TrainedPoint> average_over_seeds(std::span<const TrainedPoint> points);

/// Groups points by (n_params, d_train).
std::map<std::pair<std::int64_t, int>, std::vector<TrainedPoint>> group_by_scale(std::span<const TrainedPoint> points);

// Curve files: "# kind=... n_params=... d_train=... point_count=... key=value ..."
// followed by a "delta,loss" header and one row per vertex.
std::string curve_text(const FrontierCurve& curve);
void write_curve(const FrontierCurve& curve, const std::filesystem::path& path);
FrontierCurve read_curve(const std::filesystem::path& path);
FrontierCurve parse_curve(const std::string& text, const std::string& context = "curve");

}  // namespace paretolaw
