#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paretolaw/closed_form.hpp"
#include "paretolaw/dgp.hpp"
#include "paretolaw/fitting.hpp"
#include "paretolaw/frontier.hpp"
#include "paretolaw/metrics.hpp"

namespace paretolaw {

struct ContestedModel {
  double loss = 0.0;
  double delta = 0.0;
  std::int64_t n_plus = 1;
  std::int64_t d_plus = 1;
  std::string label;

  void validate() const;
};

enum class Verdict { lda_exists, on_frontier, below_frontier_estimate };

std::string to_string(Verdict verdict);

struct AuditReport {
  ContestedModel contested;
  double delta_star = 0.0;
  // Smallest envelope gap reaching the contested loss; absent when the loss
  // is below the envelope minimum.
  std::optional<double> frontier_delta_at_loss;
  Verdict verdict = Verdict::on_frontier;
  std::string constants_digest;
  std::string curve_digest;
  std::optional<FitMode> fit_mode;

  // key=value lines
  std::string text() const;
  // verdict,delta_star,frontier_delta_at_loss,constants_digest
  std::string summary_line() const;
};

/// Audit against an explicit budget envelope (vertices non-increasing in loss).
AuditReport delta_distance(const ContestedModel& contested, const FrontierCurve& envelope);

/// Builds the envelope at (N+, D+) over `grid` (default: C7's domain) and
/// audits against it.
AuditReport delta_distance(const ContestedModel& contested, const ScalingConstants& k,
                           std::span<const double> grid = {});

enum class ResourceStatus { feasible, infeasible, degenerate };

std::string to_string(ResourceStatus status);

struct ResourcePoint {
  double d_train = 0.0;
  double n_params = 0.0;
};

struct ResourceCurve {
  ResourceStatus status = ResourceStatus::feasible;
  double power_budget = 0.0;  // R = (target_loss - C1 - shape) / C2
  std::vector<ResourcePoint> points;
};

/// Feasible (D, N(D)) pairs reaching `target_loss` at `target_delta`.
/// An empty `d_grid` means 64 log-spaced values over [1e2, 1e9].
ResourceCurve resource_requirement(double target_loss, double target_delta, const ScalingConstants& k,
                                   std::span<const double> d_grid = {});

/// N needed at a single D; nullopt when D alone cannot reach the target.
std::optional<double> required_params(double target_loss, double target_delta, double d_train,
                                      const ScalingConstants& k);

struct SymmetryEntry {
  std::string label;
  double zeta = 0.0;          // best-explaining tilt
  double discrepancy = 0.0;   // mean squared score difference at zeta
  double mean_diff_a0 = 0.0;  // mean over A=0 of f - q^zeta
  double mean_diff_a1 = 0.0;
  double gap = 0.0;           // |mean_diff_a1 - mean_diff_a0|
};

/// Per-group misspecification means at a fixed tilt, on the test split.
SymmetryEntry symmetry_at(const Scorer& model, const Dataset& data, double zeta);

/// Golden-section search over zeta in [0, 10]. Synthetic data only.
SymmetryEntry assess_symmetry(const Scorer& model, const Dataset& data, const std::string& label = {});
SymmetryEntry assess_symmetry(const MlpModel& model, const Dataset& data, const std::string& label = {});

}  // namespace paretolaw
