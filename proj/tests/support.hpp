#pragma once

// Brute-force oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "paretolaw/frontier.hpp"
#include "paretolaw/nn.hpp"

namespace paretolaw::testing {

// Relative error ||analytic - numeric|| / max(||analytic||, ||numeric||) of
// the backward pass against central differences, over every parameter.
inline double gradient_check(const MlpModel& model, const Batch& batch, const ScalarizedLoss& loss, double h = 1e-6) {
  const Gradients g = backward(model, batch, loss);
  MlpModel probe = model;
  double diff = 0.0;
  double na = 0.0;
  double nn = 0.0;
  auto visit = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = batch_loss(probe, batch, loss);
    param = saved - h;
    const double down = batch_loss(probe, batch, loss);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    diff += (analytic - numeric) * (analytic - numeric);
    na += analytic * analytic;
    nn += numeric * numeric;
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& layer = probe.layers[l];
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) visit(layer.weight(r, c), g.params[l].weight(r, c));
      visit(layer.bias(r), g.params[l].bias(r));
    }
  }
  const double scale = std::max(std::sqrt(na), std::sqrt(nn));
  return scale > 0.0 ? std::sqrt(diff) / scale : std::sqrt(diff);
}

// Random small model plus a batch that contains both groups.
struct GradientCase {
  MlpModel model;
  Batch batch;
  ScalarizedLoss loss;
};

inline GradientCase random_gradient_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(2, 6);
  std::uniform_int_distribution<int> width(2, 7);
  std::uniform_int_distribution<int> depth(1, 3);
  std::uniform_real_distribution<double> lam(-3.0, 5.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  MlpArchitecture arch;
  arch.input_dim = dim(rng);
  const int layers = depth(rng);
  for (int i = 0; i < layers; ++i) arch.hidden_sizes.push_back(width(rng));
  const bool group = (rng() & 1U) != 0U;
  if (group) arch.input_dim += 1;
  GradientCase c;
  c.model = MlpModel::initialize(arch, rng(), group);
  // Nonzero biases keep pre-activations off the ReLU kink, where central
  // differences see a one-sided slope.
  for (auto& layer : c.model.layers) {
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = 0.1 * normal(rng);
  }
  const int n = 16;
  const int d = c.model.feature_dim();
  Eigen::MatrixXd x(n, d);
  std::vector<int> a(n);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = normal(rng);
    a[static_cast<std::size_t>(i)] = i % 3 == 0 ? 1 : 0;
    y[static_cast<std::size_t>(i)] = (rng() & 1U) != 0U ? 1 : 0;
  }
  std::vector<int> rows(n);
  for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
  c.batch = make_batch(c.model, x, a, y, rows);
  c.loss.lambda = lam(rng);
  return c;
}

// Lower-hull vertices by pairwise slope comparison: k is a vertex iff every
// point to its left reaches it along a strictly smaller slope than it
// reaches every point to its right.
inline std::vector<FrontierPoint> brute_force_hull(const std::vector<FrontierPoint>& raw) {
  std::map<double, double> best;
  for (const auto& p : raw) {
    auto it = best.find(p.delta);
    if (it == best.end() || p.loss < it->second) best[p.delta] = p.loss;
  }
  std::vector<FrontierPoint> pts;
  for (const auto& [d, l] : best) pts.push_back({d, l});
  std::vector<FrontierPoint> out;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    double max_left = -INFINITY;
    double min_right = INFINITY;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == k) continue;
      const double s = (pts[i].loss - pts[k].loss) / (pts[i].delta - pts[k].delta);
      if (i < k) max_left = std::max(max_left, s);
      else min_right = std::min(min_right, s);
    }
    if (max_left < min_right) out.push_back(pts[k]);
  }
  return out;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("paretolaw_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace paretolaw::testing
