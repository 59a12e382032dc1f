#include "paretolaw/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "paretolaw/csv.hpp"
#include "paretolaw/errors.hpp"

namespace paretolaw {

namespace {

// Sorted by delta with one point (the minimum loss) per distinct delta.
std::vector<FrontierPoint> canonical(std::span<const FrontierPoint> points) {
  for (const auto& p : points) {
    if (!std::isfinite(p.delta) || !std::isfinite(p.loss)) throw DomainError("frontier points must be finite");
  }
  std::vector<FrontierPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) {
    return l.delta < r.delta || (l.delta == r.delta && l.loss < r.loss);
  });
  std::vector<FrontierPoint> out;
  for (const auto& p : sorted) {
    if (out.empty() || out.back().delta != p.delta) out.push_back(p);
  }
  return out;
}

// > 0 when o -> a -> b turns counter-clockwise.
double cross(const FrontierPoint& o, const FrontierPoint& a, const FrontierPoint& b) {
  return (a.delta - o.delta) * (b.loss - o.loss) - (a.loss - o.loss) * (b.delta - o.delta);
}

}  // namespace

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::exact_gap_hull: return "exact_gap_hull";
    case CurveKind::budget_envelope: return "budget_envelope";
    case CurveKind::pareto_staircase: return "pareto_staircase";
    case CurveKind::closed_form_exact: return "closed_form_exact";
  }
  return "?";
}

CurveKind parse_curve_kind(std::string_view text) {
  for (auto k : {CurveKind::exact_gap_hull, CurveKind::budget_envelope, CurveKind::pareto_staircase,
                 CurveKind::closed_form_exact}) {
    if (to_string(k) == text) return k;
  }
  throw ParseError("unknown curve kind '" + std::string(text) + "'");
}

FrontierCurve lower_convex_hull(std::span<const FrontierPoint> points) {
  if (points.empty()) throw DomainError("lower_convex_hull needs at least one point");
  const auto sorted = canonical(points);
  FrontierCurve curve;
  curve.kind = CurveKind::exact_gap_hull;
  curve.source.point_count = points.size();
  auto& hull = curve.vertices;
  for (const auto& p : sorted) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) hull.pop_back();
    hull.push_back(p);
  }
  return curve;
}

FrontierCurve budget_envelope(std::span<const FrontierPoint> points) {
  if (points.empty()) throw DomainError("budget_envelope needs at least one point");
  FrontierCurve curve;
  curve.kind = CurveKind::budget_envelope;
  curve.source.point_count = points.size();
  double running = std::numeric_limits<double>::infinity();
  for (const auto& p : canonical(points)) {
    running = std::min(running, p.loss);
    curve.vertices.push_back({p.delta, running});
  }
  return curve;
}

FrontierCurve budget_envelope(const FrontierCurve& input) {
  FrontierCurve curve = budget_envelope(std::span<const FrontierPoint>(input.vertices));
  curve.source = input.source;
  curve.notes = input.notes;
  return curve;
}

FrontierCurve pareto_staircase(std::span<const FrontierPoint> points) {
  if (points.empty()) throw DomainError("pareto_staircase needs at least one point");
  FrontierCurve curve;
  curve.kind = CurveKind::pareto_staircase;
  curve.source.point_count = points.size();
  for (const auto& p : canonical(points)) {
    if (curve.vertices.empty() || p.loss < curve.vertices.back().loss) curve.vertices.push_back(p);
  }
  return curve;
}

double interpolate(const FrontierCurve& curve, double delta) {
  const auto& v = curve.vertices;
  if (v.empty()) throw RangeError("cannot interpolate an empty curve");
  if (!(delta >= v.front().delta && delta <= v.back().delta)) {
    throw RangeError("delta " + csv::format_double(delta) + " outside curve range [" +
                     csv::format_double(v.front().delta) + ", " + csv::format_double(v.back().delta) + "]");
  }
  auto it = std::lower_bound(v.begin(), v.end(), delta, [](const FrontierPoint& p, double d) { return p.delta < d; });
  if (it->delta == delta) return it->loss;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (delta - lo.delta) / (hi.delta - lo.delta);
  return lo.loss + t * (hi.loss - lo.loss);
}

std::vector<FrontierPoint> to_frontier_points(std::span<const TrainedPoint> points) {
  std::vector<FrontierPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({p.test_dp, p.test_bce});
  return out;
}

std::vector<TrainedPoint> average_over_seeds(std::span<const TrainedPoint> points) {
  std::map<std::tuple<std::int64_t, int, double>, std::vector<const TrainedPoint*>> groups;
  for (const auto& p : points) groups[{p.n_params, p.d_train, p.lambda}].push_back(&p);
  std::vector<TrainedPoint> out;
  for (const auto& [key, members] : groups) {
    TrainedPoint avg = *members.front();
    avg.train_bce = avg.val_bce = avg.test_bce = avg.test_dp = 0.0;
    for (const auto* m : members) {
      avg.train_bce += m->train_bce;
      avg.val_bce += m->val_bce;
      avg.test_bce += m->test_bce;
      avg.test_dp += m->test_dp;
    }
    const auto k = static_cast<double>(members.size());
    avg.train_bce /= k;
    avg.val_bce /= k;
    avg.test_bce /= k;
    avg.test_dp /= k;
    avg.seed = 0;
    avg.checkpoint_ref.reset();
    out.push_back(avg);
  }
  return out;
}

std::map<std::pair<std::int64_t, int>, std::vector<TrainedPoint>> group_by_scale(std::span<const TrainedPoint> points) {
  std::map<std::pair<std::int64_t, int>, std::vector<TrainedPoint>> out;
  for (const auto& p : points) out[{p.n_params, p.d_train}].push_back(p);
  return out;
}

std::string curve_text(const FrontierCurve& curve) {
  std::string text = "# kind=" + to_string(curve.kind) + " n_params=" + std::to_string(curve.source.n_params) +
                     " d_train=" + std::to_string(curve.source.d_train) +
                     " point_count=" + std::to_string(curve.source.point_count);
  for (const auto& [k, v] : curve.notes) text += " " + k + "=" + v;
  text += "\ndelta,loss\n";
  for (const auto& p : curve.vertices) text += csv::format_double(p.delta) + "," + csv::format_double(p.loss) + "\n";
  return text;
}

void write_curve(const FrontierCurve& curve, const std::filesystem::path& path) { csv::write_text(path, curve_text(curve)); }

FrontierCurve parse_curve(const std::string& text, const std::string& context) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ParseError(context + ": missing comment header");
  FrontierCurve curve;
  bool have_kind = false;
  std::istringstream header(line.substr(2));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ParseError(context + ": malformed header token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "kind") {
      curve.kind = parse_curve_kind(value);
      have_kind = true;
    } else if (key == "n_params") {
      curve.source.n_params = csv::parse_int(value, context);
    } else if (key == "d_train") {
      curve.source.d_train = csv::parse_int(value, context);
    } else if (key == "point_count") {
      curve.source.point_count = static_cast<std::size_t>(csv::parse_int(value, context));
    } else {
      curve.notes[key] = value;
    }
  }
  if (!have_kind) throw ParseError(context + ": header lacks kind=");
  if (!std::getline(in, line) || line != "delta,loss") throw ParseError(context + ": expected 'delta,loss' header");
  int row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = csv::split_fields(line);
    const std::string ctx = context + " row " + std::to_string(row);
    if (f.size() != 2) throw ParseError(ctx + ": expected 2 fields");
    curve.vertices.push_back({csv::parse_double(f[0], ctx), csv::parse_double(f[1], ctx)});
  }
  return curve;
}

FrontierCurve read_curve(const std::filesystem::path& path) { return parse_curve(csv::read_text(path), path.string()); }

}  // namespace paretolaw
