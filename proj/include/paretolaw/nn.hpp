#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "paretolaw/loss.hpp"

namespace paretolaw {

/// Scores are clamped to [kScoreClamp, 1 - kScoreClamp] before any log.
inline constexpr double kScoreClamp = 1e-7;

struct MlpArchitecture {
  int input_dim = 0;
  std::vector<int> hidden_sizes;
  static constexpr int output_dim = 1;

  void validate() const;
  // e.g. "20-80x80-1"
  std::string label() const;

  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

struct ParamCount {
  std::int64_t weights = 0;      // reported as N
  std::int64_t with_biases = 0;
};

ParamCount param_count(const MlpArchitecture& arch);

struct DenseLayer {
  Eigen::MatrixXd weight;  // fan_out x fan_in
  Eigen::VectorXd bias;    // fan_out
};

using LayerParams = std::vector<DenseLayer>;

/// Feed-forward network: ReLU hidden layers, one sigmoid output unit.
///
/// When `use_group_input` is set, the group bit is appended to the feature
/// vector as one extra input, so `architecture.input_dim` counts it.
struct MlpModel {
  MlpArchitecture architecture;
  LayerParams layers;
  std::uint64_t init_seed = 0;
  bool use_group_input = false;

  /// Gaussian weights with std 1/sqrt(fan_in), zero biases.
  static MlpModel initialize(const MlpArchitecture& arch, std::uint64_t seed,
                             bool use_group_input = false);
  static MlpModel zeros(const MlpArchitecture& arch, bool use_group_input = false);

  int feature_dim() const { return architecture.input_dim - (use_group_input ? 1 : 0); }
  void check_consistent() const;
};

LayerParams zeros_like(const LayerParams& params);

/// A minibatch in network-input layout (one column per sample).
struct Batch {
  Eigen::MatrixXd inputs;  // input_dim x B
  Eigen::VectorXd y;       // B, values in {0,1}
  Eigen::VectorXd a;       // B, values in {0,1}

  Eigen::Index size() const { return inputs.cols(); }
};

/// Builds a batch from feature rows (n x d) selected by `rows`; appends the
/// group row when the model consumes it.
Batch make_batch(const MlpModel& model, const Eigen::MatrixXd& features, std::span<const int> a,
                 std::span<const int> y, std::span<const int> rows);

double forward_logit(const MlpModel& model, std::span<const double> x, int a);
double forward(const MlpModel& model, std::span<const double> x, int a);

/// Clamped scores for every column of `inputs`.
Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);
Eigen::VectorXd forward_logits_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);

struct Gradients {
  LayerParams params;
  double loss = 0.0;  // scalarized batch loss
  double bce = 0.0;
  double dp = 0.0;    // per-batch |mean_{A=1} f - mean_{A=0} f|, 0 if a group is missing
};

/// Scalarized batch loss only (used by finite-difference checks).
double batch_loss(const MlpModel& model, const Batch& batch, const ScalarizedLoss& loss);

/// Exact reverse-mode gradient of `batch_loss`.
Gradients backward(const MlpModel& model, const Batch& batch, const ScalarizedLoss& loss);

struct AdamState {
  std::int64_t step_count = 0;
  LayerParams first_moment;
  LayerParams second_moment;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_model(const MlpModel& model, double lr = 0.001);
};

/// Bias-corrected Adam update, in place.
void adam_step(MlpModel& model, const LayerParams& grads, AdamState& state);

// Checkpoints are versioned JSON documents with explicit layer shapes.
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_text(const MlpModel& model);
MlpModel checkpoint_from_text(const std::string& text);

}  // namespace paretolaw
