#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "paretolaw/dgp.hpp"
#include "paretolaw/loss.hpp"
#include "paretolaw/nn.hpp"

namespace paretolaw {

struct TrainHyper {
  int epochs = 30;
  int batch_size = 256;
  double lr = 0.001;
  bool use_group_input = false;
};

struct TrainedPoint {
  std::int64_t n_params = 0;  // weight-only count
  int d_train = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double train_bce = 0.0;
  double val_bce = 0.0;
  double test_bce = 0.0;
  double test_dp = 0.0;
  // Not persisted in the results table.
  double val_dp = 0.0;
  int best_epoch = 0;             // selected by validation BCE
  int best_epoch_scalarized = 0;  // what the scalarized criterion would have picked
  std::optional<std::string> checkpoint_ref;
};

struct TrainOutcome {
  TrainedPoint point;
  MlpModel model;  // the selected (best validation BCE) checkpoint
};

/// Seed derived from a textual key; stable across platforms.
std::uint64_t derive_seed(std::string_view key);

/// `arch.input_dim` is the feature count of `data`; the group input, when
/// enabled, is added on top.
TrainOutcome train_one(const Dataset& data, const MlpArchitecture& arch, const ScalarizedLoss& loss,
                       std::uint64_t seed, const TrainHyper& hyper = {});

/// `count` values: 60% uniform on [-3, 0), the rest uniform on [0, 5].
std::vector<double> default_lambda_grid(int count = 100);

struct SweepConfig {
  std::vector<std::vector<int>> architectures;  // hidden sizes
  std::vector<double> lambda_grid;
  std::vector<std::uint64_t> seeds;
  std::vector<int> train_sizes;  // empty: full train split
  std::uint64_t subsample_seed = 0;
  TrainHyper hyper;
  int workers = 0;  // 0: hardware concurrency
  std::optional<std::filesystem::path> results_path;
  std::optional<std::filesystem::path> checkpoint_dir;

  void validate() const;
};

struct SweepReport {
  std::vector<TrainedPoint> points;  // canonical order, includes rows found on disk
  int n_trained = 0;
  int n_skipped = 0;
  std::vector<std::string> failures;
};

SweepReport run_sweep(const Dataset& data, const SweepConfig& config);

inline constexpr const char* kResultsHeader = "n_params,d_train,lambda,seed,train_bce,val_bce,test_bce,test_dp";

std::string results_row(const TrainedPoint& p);
std::vector<TrainedPoint> read_results(const std::filesystem::path& path);
void write_results(const std::filesystem::path& path, std::vector<TrainedPoint> points);
void sort_points(std::vector<TrainedPoint>& points);
std::string checkpoint_name(const TrainedPoint& p);

}  // namespace paretolaw
