#include "paretolaw/audit.hpp"

#include <algorithm>
#include <cmath>

#include "paretolaw/csv.hpp"
#include "paretolaw/digest.hpp"
#include "paretolaw/errors.hpp"

namespace paretolaw {

void ContestedModel::validate() const {
  if (!std::isfinite(loss) || !std::isfinite(delta)) throw ConfigError("contested loss and delta must be finite");
  if (delta < 0.0 || delta > 1.0) throw ConfigError("contested delta must lie in [0, 1]");
  if (n_plus < 1 || d_plus < 1) throw ConfigError("contested n_plus and d_plus must be >= 1");
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::lda_exists: return "lda_exists";
    case Verdict::on_frontier: return "on_frontier";
    case Verdict::below_frontier_estimate: return "below_frontier_estimate";
  }
  return "unknown";
}

std::string to_string(ResourceStatus status) {
  switch (status) {
    case ResourceStatus::feasible: return "feasible";
    case ResourceStatus::infeasible: return "infeasible";
    case ResourceStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

std::string AuditReport::text() const {
  std::string s;
  s += "label=" + contested.label + "\n";
  s += "contested_loss=" + csv::format_double(contested.loss) + "\n";
  s += "contested_delta=" + csv::format_double(contested.delta) + "\n";
  s += "n_plus=" + std::to_string(contested.n_plus) + "\n";
  s += "d_plus=" + std::to_string(contested.d_plus) + "\n";
  s += "verdict=" + to_string(verdict) + "\n";
  s += "delta_star=" + csv::format_double(delta_star) + "\n";
  s += "frontier_delta_at_loss=" + (frontier_delta_at_loss ? csv::format_double(*frontier_delta_at_loss) : "none") + "\n";
  s += "fit_mode=" + (fit_mode ? to_string(*fit_mode) : "unknown") + "\n";
  s += "constants_digest=" + constants_digest + "\n";
  s += "curve_digest=" + curve_digest + "\n";
  return s;
}

std::string AuditReport::summary_line() const {
  return to_string(verdict) + "," + csv::format_double(delta_star) + "," +
         (frontier_delta_at_loss ? csv::format_double(*frontier_delta_at_loss) : "none") + "," + constants_digest;
}

AuditReport delta_distance(const ContestedModel& contested, const FrontierCurve& envelope) {
  contested.validate();
  const auto& v = envelope.vertices;
  if (v.empty()) throw ConfigError("audit needs a non-empty envelope");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i].delta > v[i - 1].delta)) throw ConfigError("envelope deltas must be strictly increasing");
    if (v[i].loss > v[i - 1].loss) throw ConfigError("envelope losses must be non-increasing");
  }

  AuditReport report;
  report.contested = contested;
  report.curve_digest = sha256_hex(curve_text(envelope));

  if (contested.loss < v.back().loss) {
    report.verdict = Verdict::below_frontier_estimate;
    report.delta_star = 0.0;
    return report;
  }

  // First vertex at or below the loss; the envelope is monotone so this is a
  // binary search.
  const auto it = std::partition_point(v.begin(), v.end(), [&](const FrontierPoint& p) { return p.loss > contested.loss; });
  const auto i = static_cast<std::size_t>(it - v.begin());
  double crossing = v[i].delta;
  if (i > 0 && v[i].loss != contested.loss) {
    const FrontierPoint& l = v[i - 1];
    const FrontierPoint& r = v[i];
    const double t = (l.loss - contested.loss) / (l.loss - r.loss);
    crossing = l.delta + t * (r.delta - l.delta);
  }
  report.frontier_delta_at_loss = crossing;
  report.delta_star = std::max(0.0, contested.delta - crossing);
  if (report.delta_star > 0.0) {
    report.verdict = Verdict::lda_exists;
  } else if (contested.delta < crossing) {
    // Left of the frontier: fairer than any estimated model at this loss.
    report.verdict = Verdict::below_frontier_estimate;
  } else {
    report.verdict = Verdict::on_frontier;
  }
  return report;
}

AuditReport delta_distance(const ContestedModel& contested, const ScalingConstants& k, std::span<const double> grid) {
  contested.validate();
  const ShapeSweep sweep = extrapolate(k, static_cast<double>(contested.n_plus), static_cast<double>(contested.d_plus), grid);
  AuditReport report = delta_distance(contested, sweep.envelope);
  report.constants_digest = sha256_hex(k.canonical_text());
  if (k.diagnostics) report.fit_mode = parse_fit_mode(k.diagnostics->mode);
  return report;
}

std::optional<double> required_params(double target_loss, double target_delta, double d_train, const ScalingConstants& k) {
  const double r = (target_loss - k.c1 - shape_term(target_delta, k.c5, k.c6, k.c7)) / k.c2;
  const double rest = r - k.c2_for_data() / k.c2 * std::pow(d_train, -k.c4);
  if (!(rest > 0.0)) return std::nullopt;
  return std::pow(rest, -1.0 / k.c3);
}

ResourceCurve resource_requirement(double target_loss, double target_delta, const ScalingConstants& k,
                                   std::span<const double> d_grid) {
  k.validate();
  if (!in_shape_domain(target_delta, k.c7)) {
    throw DomainError("target delta " + csv::format_double(target_delta) + " is outside the shape domain");
  }
  ResourceCurve out;
  const double slack = target_loss - k.c1 - shape_term(target_delta, k.c5, k.c6, k.c7);
  if (k.c2 == 0.0) {
    out.status = ResourceStatus::degenerate;
    return out;
  }
  out.power_budget = slack / k.c2;
  if (!(out.power_budget > 0.0)) {
    out.status = ResourceStatus::infeasible;
    return out;
  }
  std::vector<double> grid(d_grid.begin(), d_grid.end());
  if (grid.empty()) {
    for (int i = 0; i < 64; ++i) grid.push_back(std::pow(10.0, 2.0 + 7.0 * i / 63.0));
  }
  for (double d : grid) {
    if (auto n = required_params(target_loss, target_delta, d, k)) out.points.push_back({d, *n});
  }
  if (out.points.empty()) out.status = ResourceStatus::infeasible;
  return out;
}

namespace {

// Scores, g(x) and groups on the test split, computed once per model.
struct SymmetryInputs {
  std::vector<double> f;
  Eigen::VectorXd g;
  std::vector<int> a;
};

SymmetryInputs symmetry_inputs(const Scorer& model, const Dataset& data) {
  const auto* cfg = std::get_if<DgpConfig>(&data.provenance);
  if (cfg == nullptr) throw ConfigError("symmetry diagnostic is unsupported on external data (no known generating law)");
  const std::vector<int> rows = data.rows(Split::test);
  if (rows.empty()) throw EvaluationError("test split is empty");
  SymmetryInputs in;
  in.f = split_scores(model, data, rows);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), data.x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = data.x.row(rows[i]);
    in.a.push_back(data.a[static_cast<std::size_t>(rows[i])]);
  }
  in.g = LabelModel(*cfg).g_values(x);
  return in;
}

SymmetryEntry symmetry_from(const SymmetryInputs& in, double zeta) {
  double sum[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
  double sq = 0.0;
  for (std::size_t i = 0; i < in.f.size(); ++i) {
    const int a = in.a[i];
    const double q = 1.0 / (1.0 + std::exp(-(in.g[static_cast<Eigen::Index>(i)] - zeta * a)));
    const double diff = in.f[i] - q;
    sum[a] += diff;
    count[a] += 1.0;
    sq += diff * diff;
  }
  if (count[0] == 0.0 || count[1] == 0.0) throw EvaluationError("test split lacks a group");
  SymmetryEntry e;
  e.zeta = zeta;
  e.discrepancy = sq / static_cast<double>(in.f.size());
  e.mean_diff_a0 = sum[0] / count[0];
  e.mean_diff_a1 = sum[1] / count[1];
  e.gap = std::abs(e.mean_diff_a1 - e.mean_diff_a0);
  return e;
}

}  // namespace

SymmetryEntry symmetry_at(const Scorer& model, const Dataset& data, double zeta) {
  return symmetry_from(symmetry_inputs(model, data), zeta);
}

SymmetryEntry assess_symmetry(const Scorer& model, const Dataset& data, const std::string& label) {
  const SymmetryInputs in = symmetry_inputs(model, data);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = 10.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = symmetry_from(in, x1).discrepancy;
  double f2 = symmetry_from(in, x2).discrepancy;
  while (hi - lo > 1e-7) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = symmetry_from(in, x1).discrepancy;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = symmetry_from(in, x2).discrepancy;
    }
  }
  SymmetryEntry e = symmetry_from(in, 0.5 * (lo + hi));
  // The interior search never visits the endpoints.
  for (double edge : {0.0, 10.0}) {
    const SymmetryEntry c = symmetry_from(in, edge);
    if (c.discrepancy < e.discrepancy) e = c;
  }
  e.label = label;
  return e;
}

SymmetryEntry assess_symmetry(const MlpModel& model, const Dataset& data, const std::string& label) {
  const Scorer scorer = [&model](std::span<const double> x, int a) { return forward(model, x, a); };
  return assess_symmetry(scorer, data, label);
}

}  // namespace paretolaw
