#include "paretolaw/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <thread>
#include <tuple>

#include "paretolaw/csv.hpp"
#include "paretolaw/digest.hpp"
#include "paretolaw/errors.hpp"
#include "paretolaw/metrics.hpp"

namespace paretolaw {

namespace {

using PointKey = std::tuple<std::int64_t, int, double, std::uint64_t>;

PointKey key_of(const TrainedPoint& p) { return {p.n_params, p.d_train, p.lambda, p.seed}; }

std::string hidden_label(const std::vector<int>& hidden) {
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "x" : "") + std::to_string(hidden[i]);
  return s;
}

}  // namespace

std::uint64_t derive_seed(std::string_view key) {
  const std::string hex = sha256_hex(key);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

TrainOutcome train_one(const Dataset& data, const MlpArchitecture& arch, const ScalarizedLoss& loss,
                       std::uint64_t seed, const TrainHyper& hyper) {
  if (arch.input_dim != data.x_dim()) {
    throw ShapeError("architecture input_dim " + std::to_string(arch.input_dim) + " != dataset feature count " +
                     std::to_string(data.x_dim()));
  }
  if (!std::isfinite(loss.lambda)) throw ConfigError("lambda must be finite");
  if (hyper.epochs < 1 || hyper.batch_size < 1 || !(hyper.lr > 0.0)) {
    throw ConfigError("epochs and batch_size must be >= 1 and lr > 0");
  }
  check_splits(data);

  MlpArchitecture model_arch = arch;
  if (hyper.use_group_input) model_arch.input_dim += 1;
  const std::string run_key = model_arch.label() + "|" + std::to_string(seed);
  // Initialization and shuffling depend on (architecture, seed) only, so
  // runs that differ in lambda share their random numbers.
  MlpModel model = MlpModel::initialize(model_arch, derive_seed(run_key + "|init"), hyper.use_group_input);
  std::mt19937_64 shuffle_rng(derive_seed(run_key + "|shuffle"));
  AdamState adam = AdamState::for_model(model, hyper.lr);

  std::vector<int> train_rows = data.rows(Split::train);
  const auto n_train = static_cast<int>(train_rows.size());

  MlpModel best = model;
  double best_val = std::numeric_limits<double>::infinity();
  double best_scalarized = std::numeric_limits<double>::infinity();
  TrainedPoint point;

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::shuffle(train_rows.begin(), train_rows.end(), shuffle_rng);
    int batch_index = 0;
    for (int start = 0; start < n_train; start += hyper.batch_size, ++batch_index) {
      const int len = std::min(hyper.batch_size, n_train - start);
      const std::span<const int> rows(train_rows.data() + start, static_cast<std::size_t>(len));
      const Batch batch = make_batch(model, data.x, data.a, data.y, rows);
      Gradients grads;
      try {
        grads = backward(model, batch, loss);
      } catch (const NumericError& e) {
        throw TrainingError(std::string("training diverged: ") + e.what(), epoch, batch_index);
      }
      adam_step(model, grads.params, adam);
    }
    EvalResult val;
    try {
      val = evaluate(model, data, Split::val);
    } catch (const NumericError& e) {
      throw TrainingError(std::string("training diverged: ") + e.what(), epoch, batch_index);
    }
    if (!std::isfinite(val.bce)) throw TrainingError("non-finite validation loss", epoch, batch_index);
    if (val.bce < best_val) {
      best_val = val.bce;
      best = model;
      point.best_epoch = epoch;
      point.val_dp = val.dp_gap;
    }
    const double scalarized = val.bce + loss.lambda * val.dp_gap;
    if (scalarized < best_scalarized) {
      best_scalarized = scalarized;
      point.best_epoch_scalarized = epoch;
    }
  }

  const EvalResult test = evaluate(best, data, Split::test);
  point.n_params = param_count(model_arch).weights;
  point.d_train = n_train;
  point.lambda = loss.lambda;
  point.seed = seed;
  point.train_bce = bce_loss(best, data, Split::train);
  point.val_bce = best_val;
  point.test_bce = test.bce;
  point.test_dp = test.dp_gap;
  return {point, std::move(best)};
}

std::vector<double> default_lambda_grid(int count) {
  if (count < 2) throw ConfigError("lambda grid needs at least 2 values");
  const int n_neg = static_cast<int>(std::lround(0.6 * count));
  const int n_pos = count - n_neg;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < n_neg; ++i) grid.push_back(-3.0 + 3.0 * i / n_neg);
  for (int j = 0; j < n_pos; ++j) grid.push_back(n_pos == 1 ? 5.0 : 5.0 * j / (n_pos - 1));
  return grid;
}

void SweepConfig::validate() const {
  if (architectures.empty()) throw ConfigError("sweep.architectures must not be empty");
  if (lambda_grid.empty()) throw ConfigError("sweep.lambda_grid must not be empty");
  if (seeds.empty()) throw ConfigError("sweep.seeds must not be empty");
  for (const auto& h : architectures) {
    if (h.empty() || std::any_of(h.begin(), h.end(), [](int v) { return v < 1; })) {
      throw ConfigError("sweep.architectures entries must be non-empty lists of positive sizes");
    }
  }
  for (double l : lambda_grid) {
    if (!std::isfinite(l)) throw ConfigError("sweep.lambda_grid values must be finite");
  }
  for (int d : train_sizes) {
    if (d < 1) throw ConfigError("sweep.train_sizes must be positive");
  }
  if (hyper.epochs < 1) throw ConfigError("sweep.epochs must be >= 1");
  if (hyper.batch_size < 1) throw ConfigError("sweep.batch_size must be >= 1");
  if (!(hyper.lr > 0.0)) throw ConfigError("sweep.lr must be > 0");
}

std::string results_row(const TrainedPoint& p) {
  return std::to_string(p.n_params) + "," + std::to_string(p.d_train) + "," + csv::format_double(p.lambda) + "," +
         std::to_string(p.seed) + "," + csv::format_double(p.train_bce) + "," + csv::format_double(p.val_bce) + "," +
         csv::format_double(p.test_bce) + "," + csv::format_double(p.test_dp);
}

std::vector<TrainedPoint> read_results(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines[0] != kResultsHeader) {
    throw ParseError(path.string() + ": expected header '" + std::string(kResultsHeader) + "'");
  }
  std::vector<TrainedPoint> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string ctx = path.filename().string() + " row " + std::to_string(i + 1);
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 8) throw ParseError(ctx + ": expected 8 fields");
    TrainedPoint p;
    p.n_params = csv::parse_int(f[0], ctx);
    p.d_train = static_cast<int>(csv::parse_int(f[1], ctx));
    p.lambda = csv::parse_double(f[2], ctx);
    try {
      p.seed = std::stoull(std::string(f[3]));
    } catch (const std::exception&) {
      throw ParseError(ctx + ": bad seed");
    }
    p.train_bce = csv::parse_double(f[4], ctx);
    p.val_bce = csv::parse_double(f[5], ctx);
    p.test_bce = csv::parse_double(f[6], ctx);
    p.test_dp = csv::parse_double(f[7], ctx);
    for (double v : {p.lambda, p.train_bce, p.val_bce, p.test_bce, p.test_dp}) {
      if (!std::isfinite(v)) throw ParseError(ctx + ": non-finite metric");
    }
    out.push_back(p);
  }
  return out;
}

void sort_points(std::vector<TrainedPoint>& points) {
  std::sort(points.begin(), points.end(), [](const auto& l, const auto& r) { return key_of(l) < key_of(r); });
}

void write_results(const std::filesystem::path& path, std::vector<TrainedPoint> points) {
  sort_points(points);
  std::string text = std::string(kResultsHeader) + "\n";
  for (const auto& p : points) text += results_row(p) + "\n";
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  csv::write_text(tmp, text);
  std::filesystem::rename(tmp, path);
}

std::string checkpoint_name(const TrainedPoint& p) {
  return "ckpt_N" + std::to_string(p.n_params) + "_D" + std::to_string(p.d_train) + "_L" +
         csv::format_double(p.lambda) + "_S" + std::to_string(p.seed) + ".json";
}

SweepReport run_sweep(const Dataset& data, const SweepConfig& config) {
  config.validate();
  check_splits(data);

  struct Job {
    std::vector<int> hidden;
    int d_index;
    double lambda;
    std::uint64_t seed;
  };

  std::vector<int> sizes = config.train_sizes;
  std::vector<Dataset> subsets;
  if (sizes.empty()) {
    sizes.push_back(static_cast<int>(data.rows(Split::train).size()));
    subsets.push_back(data);
  } else {
    for (int d : sizes) {
      subsets.push_back(subsample_train(data, d, config.subsample_seed));
      check_splits(subsets.back());
    }
  }

  SweepReport report;
  std::set<PointKey> done;
  if (config.results_path && std::filesystem::exists(*config.results_path)) {
    for (auto& p : read_results(*config.results_path)) {
      if (done.insert(key_of(p)).second) report.points.push_back(p);
    }
  } else if (config.results_path) {
    csv::write_text(*config.results_path, std::string(kResultsHeader) + "\n");
  }
  if (config.checkpoint_dir) std::filesystem::create_directories(*config.checkpoint_dir);

  std::vector<Job> jobs;
  for (const auto& hidden : config.architectures) {
    MlpArchitecture arch{data.x_dim() + (config.hyper.use_group_input ? 1 : 0), hidden};
    const auto n_params = param_count(arch).weights;
    for (std::size_t di = 0; di < sizes.size(); ++di) {
      for (double lambda : config.lambda_grid) {
        for (auto seed : config.seeds) {
          if (done.count({n_params, sizes[di], lambda, seed})) {
            ++report.n_skipped;
            continue;
          }
          jobs.push_back({hidden, static_cast<int>(di), lambda, seed});
        }
      }
    }
  }

  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job& job = jobs[j];
      const Dataset& subset = subsets[static_cast<std::size_t>(job.d_index)];
      const std::string label = "arch " + hidden_label(job.hidden) + ", D=" +
                                std::to_string(sizes[static_cast<std::size_t>(job.d_index)]) +
                                ", lambda=" + csv::format_double(job.lambda) + ", seed=" + std::to_string(job.seed);
      try {
        auto outcome = train_one(subset, MlpArchitecture{subset.x_dim(), job.hidden}, ScalarizedLoss{job.lambda},
                                 job.seed, config.hyper);
        if (config.checkpoint_dir) {
          const auto name = checkpoint_name(outcome.point);
          save_checkpoint(outcome.model, *config.checkpoint_dir / name);
          outcome.point.checkpoint_ref = name;
        }
        std::lock_guard lock(mutex);
        if (config.results_path) {
          std::ofstream out(*config.results_path, std::ios::app | std::ios::binary);
          out << results_row(outcome.point) << "\n";
          out.flush();
        }
        report.points.push_back(outcome.point);
        ++report.n_trained;
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        report.failures.push_back(label + ": " + e.what());
      }
    }
  };

  int n_workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(jobs.size())));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  sort_points(report.points);
  if (config.results_path) write_results(*config.results_path, report.points);
  return report;
}

}  // namespace paretolaw
