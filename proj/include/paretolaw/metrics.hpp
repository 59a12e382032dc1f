#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>

#include "paretolaw/dgp.hpp"
#include "paretolaw/nn.hpp"

namespace paretolaw {

struct EvalResult {
  double bce = 0.0;
  double dp_gap = 0.0;
  double mean_a0 = 0.0;
  double mean_a1 = 0.0;
  std::size_t n_evaluated = 0;
};

/// Arbitrary soft classifier f(x, a) -> [0, 1].
using Scorer = std::function<double(std::span<const double> x, int a)>;

// Score-level primitives. Scores are clamped to [kScoreClamp, 1 - kScoreClamp].
double bce_from_scores(std::span<const double> scores, std::span<const int> y);
double dp_gap_from_scores(std::span<const double> scores, std::span<const int> a);
EvalResult evaluate_scores(std::span<const double> scores, std::span<const int> a, std::span<const int> y);

std::vector<double> split_scores(const MlpModel& model, const Dataset& data, std::span<const int> rows);
std::vector<double> split_scores(const Scorer& scorer, const Dataset& data, std::span<const int> rows);

double bce_loss(const MlpModel& model, const Dataset& data, Split split);
double dp_gap(const MlpModel& model, const Dataset& data, Split split);
EvalResult evaluate(const MlpModel& model, const Dataset& data, Split split);
EvalResult evaluate(const Scorer& scorer, const Dataset& data, Split split);

}  // namespace paretolaw
