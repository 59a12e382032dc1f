#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paretolaw/closed_form.hpp"
#include "paretolaw/frontier.hpp"

namespace paretolaw {

struct Observation {
  std::int64_t n_params = 0;
  std::int64_t d_train = 0;
  double delta = 0.0;
  double loss = 0.0;
  double weight = 1.0;
};

enum class FitMode { least_squares, lower_bound };

std::string to_string(FitMode mode);
FitMode parse_fit_mode(std::string_view text);

// Index into FitProblem::fixed.
enum ConstantIndex { kC1 = 0, kC2, kC3, kC4, kC5, kC6, kC7 };

struct FitProblem {
  std::vector<Observation> observations;
  // Pinned constants; C3 = C4 = 0.5 by default.
  std::array<std::optional<double>, 7> fixed{std::nullopt, std::nullopt, 0.5, 0.5,
                                             std::nullopt, std::nullopt, std::nullopt};
  FitMode mode = FitMode::least_squares;
  bool decoupled_c2 = false;
  int n_starts = 32;
  std::uint64_t seed = 0;
  int max_evaluations_per_start = 60000;
  int workers = 1;

  void validate() const;
};

struct StartOptimum {
  int start = 0;
  double objective = 0.0;
  double rmse = 0.0;
  ScalingConstants constants;
};

struct FitResult {
  ScalingConstants constants;
  FitMode mode = FitMode::least_squares;
  double rmse = 0.0;
  // max(fitted - observed); <= 1e-6 in lower_bound mode
  double max_violation = 0.0;
  double objective = 0.0;
  int n_restarts_used = 0;
  bool converged = true;
  std::vector<StartOptimum> near_optima;  // all starts within 1% of the best rmse
  std::string observation_digest;
};

inline constexpr double kHingeWeight = 1e4;
inline constexpr double kDeltaMargin = 1e-4;

FitResult fit(const FitProblem& problem);

double fit_rmse(const ScalingConstants& k, std::span<const Observation> observations);
double max_violation(const ScalingConstants& k, std::span<const Observation> observations);
std::string observation_digest(std::span<const Observation> observations);

std::vector<Observation> observations_from_curve(const FrontierCurve& curve);

/// Exact-gap curve and budget envelope at (N+, D+). An empty grid means the
/// default grid over C7's domain.
ShapeSweep extrapolate(const ScalingConstants& k, double n_plus, double d_plus, std::span<const double> grid = {});

// Structured-text (JSON) persistence.
std::string fit_result_text(const FitResult& result, const std::map<std::string, std::string>& provenance = {});
FitResult parse_fit_result(const std::string& text);
ScalingConstants constants_from_text(const std::string& text);

}  // namespace paretolaw
