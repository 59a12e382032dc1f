#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paretolaw/frontier.hpp"

namespace paretolaw {

/// Constants of the closed-form frontier bound: loss(delta) <= b + shape(delta; c, c', c'').
struct ShapeConstants {
  double c = 0.0;
  double c_prime = 0.5;
  double c_double_prime = 0.5;
  double b = 0.0;

  void validate() const;
};

/// Shape term (natural log), with the third-moment remainder left out:
///   -c c' log(1 - c'' + d) - c (1 - c') log(c'' - d)
///   + (c'' - d)(1 - c'' + d) [c c' / (2 (1 - c'' + d)^2) + c (1 - c') / (2 (c'' - d)^2)]
/// Throws DomainError unless both log arguments are positive and d >= 0.
double shape_term(double delta, double c, double c_prime, double c_double_prime);

double pf_loss(double delta, const ShapeConstants& k);

bool in_shape_domain(double delta, double c_double_prime);

struct FitDiagnostics {
  std::string mode;
  // rmse of the fitted curve per (n_params, d_train) group of observations
  std::map<std::pair<std::int64_t, std::int64_t>, double> group_rmse;
};

/// loss(delta; N, D) = C1 + C2 (N^-C3 + D^-C4) + shape(delta; C5, C6, C7).
///
/// `c2_data`, when set, replaces C2 on the D term (decoupled variant).
struct ScalingConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.5;
  double c4 = 0.5;
  double c5 = 0.0;
  double c6 = 0.5;
  double c7 = 0.5;
  std::optional<double> c2_data;
  std::optional<FitDiagnostics> diagnostics;

  void validate() const;
  double c2_for_data() const { return c2_data.value_or(c2); }
  ShapeConstants shape_at(double n_params, double d_train) const;
  // Canonical "key=value" text used for digests.
  std::string canonical_text() const;
};

double scale_term(double n_params, double d_train, const ScalingConstants& k);
double scaling_loss(double delta, double n_params, double d_train, const ScalingConstants& k);

/// `points` uniform values over [max(0, c'' - 1) + 1e-6, c'' - 1e-6].
std::vector<double> default_delta_grid(double c_double_prime, int points = 512);

struct ShapeSweep {
  FrontierCurve exact;
  FrontierCurve envelope;
  std::vector<double> skipped;  // grid values outside the domain
};

ShapeSweep sweep_shape(std::span<const double> grid, const ShapeConstants& k);
ShapeSweep sweep_scaling(std::span<const double> grid, double n_params, double d_train, const ScalingConstants& k);

}  // namespace paretolaw
