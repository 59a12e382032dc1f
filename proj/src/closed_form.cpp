#include "paretolaw/closed_form.hpp"

#include <cmath>
#include <iostream>

#include "paretolaw/csv.hpp"
#include "paretolaw/errors.hpp"

namespace paretolaw {

void ShapeConstants::validate() const {
  if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("c must be finite and >= 0");
  if (!(c_prime >= 0.0 && c_prime <= 1.0)) throw ConfigError("c' must lie in [0, 1]");
  if (!(c_double_prime > 0.0 && c_double_prime <= 1.0)) {
    throw ConfigError("c'' must lie in (0, 1]; the delta domain [max(0, c''-1), c'') is empty otherwise");
  }
  if (!std::isfinite(b)) throw ConfigError("b must be finite");
}

bool in_shape_domain(double delta, double c_double_prime) {
  return delta >= 0.0 && 1.0 - c_double_prime + delta > 0.0 && c_double_prime - delta > 0.0;
}

double shape_term(double delta, double c, double c_prime, double c_double_prime) {
  if (!(delta >= 0.0)) throw DomainError("fairness gap " + csv::format_double(delta) + " must be >= 0");
  const double u = 1.0 - c_double_prime + delta;
  const double v = c_double_prime - delta;
  if (!(u > 0.0)) {
    throw DomainError("log argument 1 - c'' + delta = " + csv::format_double(u) + " is not positive");
  }
  if (!(v > 0.0)) {
    throw DomainError("log argument c'' - delta = " + csv::format_double(v) + " is not positive (delta=" +
                      csv::format_double(delta) + ", c''=" + csv::format_double(c_double_prime) + ")");
  }
  const double a = c * c_prime;
  const double bcoef = c * (1.0 - c_prime);
  return -a * std::log(u) - bcoef * std::log(v) + v * u * (a / (2.0 * u * u) + bcoef / (2.0 * v * v));
}

double pf_loss(double delta, const ShapeConstants& k) {
  return k.b + shape_term(delta, k.c, k.c_prime, k.c_double_prime);
}

void ScalingConstants::validate() const {
  for (double v : {c1, c2, c3, c4, c5, c6, c7}) {
    if (!std::isfinite(v)) throw ConfigError("scaling constants must be finite");
  }
  if (c2 < 0.0 || c2_for_data() < 0.0) throw ConfigError("C2 must be >= 0");
  if (!(c3 > 0.0) || !(c4 > 0.0)) throw ConfigError("C3 and C4 must be > 0");
  if (c5 < 0.0) throw ConfigError("C5 must be >= 0");
  if (!(c6 >= 0.0 && c6 <= 1.0)) throw ConfigError("C6 must lie in [0, 1]");
  if (!(c7 > 0.0 && c7 <= 1.0)) throw ConfigError("C7 must lie in (0, 1]");
}

ShapeConstants ScalingConstants::shape_at(double n_params, double d_train) const {
  return {c5, c6, c7, c1 + scale_term(n_params, d_train, *this)};
}

std::string ScalingConstants::canonical_text() const {
  std::string s = "C1=" + csv::format_double(c1) + "\nC2=" + csv::format_double(c2) + "\nC3=" +
                  csv::format_double(c3) + "\nC4=" + csv::format_double(c4) + "\nC5=" + csv::format_double(c5) +
                  "\nC6=" + csv::format_double(c6) + "\nC7=" + csv::format_double(c7) + "\n";
  if (c2_data) s += "C2_data=" + csv::format_double(*c2_data) + "\n";
  return s;
}

double scale_term(double n_params, double d_train, const ScalingConstants& k) {
  if (!(n_params >= 1.0) || !(d_train >= 1.0)) throw DomainError("N and D must be >= 1");
  return k.c2 * std::pow(n_params, -k.c3) + k.c2_for_data() * std::pow(d_train, -k.c4);
}

double scaling_loss(double delta, double n_params, double d_train, const ScalingConstants& k) {
  return k.c1 + scale_term(n_params, d_train, k) + shape_term(delta, k.c5, k.c6, k.c7);
}

std::vector<double> default_delta_grid(double c_double_prime, int points) {
  if (points < 2) throw ConfigError("delta grid needs at least 2 points");
  const double lo = std::max(0.0, c_double_prime - 1.0) + 1e-6;
  const double hi = c_double_prime - 1e-6;
  if (!(hi > lo)) throw DomainError("c'' = " + csv::format_double(c_double_prime) + " leaves no delta domain");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

ShapeSweep sweep_shape(std::span<const double> grid, const ShapeConstants& k) {
  k.validate();
  ShapeSweep out;
  out.exact.kind = CurveKind::closed_form_exact;
  for (double d : grid) {
    if (!in_shape_domain(d, k.c_double_prime)) {
      out.skipped.push_back(d);
      continue;
    }
    out.exact.vertices.push_back({d, pf_loss(d, k)});
  }
  if (!out.skipped.empty()) {
    std::clog << "warning: skipped " << out.skipped.size() << " grid value(s) outside the delta domain\n";
  }
  if (out.exact.vertices.empty()) throw DomainError("no grid value lies inside the delta domain");
  out.exact.source.point_count = out.exact.vertices.size();
  out.exact.notes["c"] = csv::format_double(k.c);
  out.exact.notes["c_prime"] = csv::format_double(k.c_prime);
  out.exact.notes["c_double_prime"] = csv::format_double(k.c_double_prime);
  out.exact.notes["b"] = csv::format_double(k.b);
  out.exact.notes["epsilon"] = "omitted";
  out.envelope = budget_envelope(out.exact);
  return out;
}

ShapeSweep sweep_scaling(std::span<const double> grid, double n_params, double d_train, const ScalingConstants& k) {
  k.validate();
  ShapeSweep out = sweep_shape(grid, k.shape_at(n_params, d_train));
  for (auto* curve : {&out.exact, &out.envelope}) {
    curve->source.n_params = static_cast<std::int64_t>(std::llround(n_params));
    curve->source.d_train = static_cast<std::int64_t>(std::llround(d_train));
  }
  return out;
}

}  // namespace paretolaw
