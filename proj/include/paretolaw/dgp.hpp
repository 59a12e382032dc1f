#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "paretolaw/nn.hpp"

namespace paretolaw {

enum class DgpMode { independent, projected };

std::string to_string(DgpMode mode);
DgpMode parse_dgp_mode(std::string_view text);

/// Synthetic data law: X ~ N(0, I_d); A either Ber(pi) independent of X or
/// a thresholded random projection of x[0:2]; Y ~ Ber(sigmoid(g(X) - zeta*A))
/// with g a seeded d -> [32] -> 1 ReLU network.
struct DgpConfig {
  int n_samples = 10000;
  int x_dim = 20;
  double pi = 0.2;
  double zeta = 0.5;
  std::uint64_t g_seed = 0;
  std::uint64_t data_seed = 0;
  DgpMode mode = DgpMode::projected;

  void validate() const;
};

struct ExternalSource {
  std::string path;
  std::string digest;
};

using Provenance = std::variant<DgpConfig, ExternalSource>;

enum class Split : std::uint8_t { train, val, test };

std::string to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

struct SplitFractions {
  double train = 0.65;
  double val = 0.15;
  double test = 0.20;
};

struct Dataset {
  Eigen::MatrixXd x;  // n x d
  std::vector<int> a;
  std::vector<int> y;
  std::vector<Split> split;
  Provenance provenance;

  std::size_t size() const { return a.size(); }
  int x_dim() const { return static_cast<int>(x.cols()); }
  std::vector<int> rows(Split which) const;
  std::vector<double> features(int row) const;
  bool is_synthetic() const { return std::holds_alternative<DgpConfig>(provenance); }
};

/// The Bayes-optimal score sigmoid(g(x) - zeta*a) of the generating law.
class LabelModel {
 public:
  explicit LabelModel(const DgpConfig& config);
  LabelModel(const DgpConfig& config, double zeta);

  double g(std::span<const double> x) const;
  double score(std::span<const double> x, int a) const;
  // Scores for every row of `x`.
  Eigen::VectorXd scores(const Eigen::MatrixXd& x, std::span<const int> a) const;
  Eigen::VectorXd g_values(const Eigen::MatrixXd& x) const;
  double zeta() const { return zeta_; }

 private:
  MlpModel g_;
  double zeta_;
};

MlpArchitecture g_network_architecture(int x_dim);

Dataset generate(const DgpConfig& config);

double bayes_optimal_score(const DgpConfig& config, std::span<const double> x, int a);

/// Stratified by (A, Y) cell; deterministic in `seed`.
void assign_stratified_splits(Dataset& data, std::uint64_t seed, const SplitFractions& fractions = {});

/// Throws GenerationError when a split lacks a group or label.
void check_splits(const Dataset& data);

/// Keeps the first `d_train` rows of a seeded shuffle of the train split, so
/// smaller subsamples are prefixes of larger ones. Validation and test rows
/// are untouched.
Dataset subsample_train(const Dataset& data, int d_train, std::uint64_t seed);

struct ExternalSchema {
  std::optional<int> x_dim;           // inferred from the header when absent
  std::uint64_t data_seed = 0;        // used for auto-splitting
};

/// Reads `x0,...,x{d-1},a,y[,split]`.
Dataset load_external(const std::filesystem::path& path, const ExternalSchema& schema = {});

std::string dataset_csv(const Dataset& data);
void write_dataset(const Dataset& data, const std::filesystem::path& path);

}  // namespace paretolaw
