#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../support.hpp"
#include "paretolaw/csv.hpp"
#include "paretolaw/errors.hpp"
#include "paretolaw/training.hpp"

using namespace paretolaw;

namespace {

Dataset small_data() {
  DgpConfig c;
  c.n_samples = 1200;
  c.g_seed = 11;
  c.data_seed = 12;
  return generate(c);
}

TrainHyper quick() {
  TrainHyper h;
  h.epochs = 4;
  h.batch_size = 64;
  return h;
}

}  // namespace

TEST_CASE("default lambda grid: 100 values, 60 negative, spans [-3, 5]") {
  const auto g = default_lambda_grid();
  CHECK(g.size() == 100);
  CHECK(*std::min_element(g.begin(), g.end()) == -3.0);
  CHECK(*std::max_element(g.begin(), g.end()) == 5.0);
  CHECK(std::count_if(g.begin(), g.end(), [](double l) { return l < 0.0; }) == 60);
  CHECK(std::is_sorted(g.begin(), g.end()));
}

TEST_CASE("training is deterministic") {
  const Dataset d = small_data();
  const auto a = train_one(d, {20, {8, 8}}, {0.5}, 3, quick());
  const auto b = train_one(d, {20, {8, 8}}, {0.5}, 3, quick());
  CHECK(results_row(a.point) == results_row(b.point));
  CHECK(checkpoint_text(a.model) == checkpoint_text(b.model));
  CHECK(a.point.n_params == param_count({20, {8, 8}}).weights);
  CHECK(a.point.d_train == static_cast<int>(d.rows(Split::train).size()));
  CHECK(a.point.best_epoch >= 1);
  CHECK(a.point.best_epoch <= 4);
}

TEST_CASE("a large fairness weight shrinks the test gap") {
  const Dataset d = small_data();
  TrainHyper h = quick();
  h.epochs = 8;
  const auto plain = train_one(d, {20, {16, 16}}, {0.0}, 1, h);
  const auto fair = train_one(d, {20, {16, 16}}, {50.0}, 1, h);
  CHECK(fair.point.test_dp < plain.point.test_dp);
}

TEST_CASE("architecture must match the data") {
  const Dataset d = small_data();
  CHECK_THROWS_AS(train_one(d, {5, {4}}, {0.0}, 1, quick()), ShapeError);
}

TEST_CASE("sweep is resumable, order-independent and persists sorted rows") {
  const Dataset d = small_data();
  const auto dir = testing::scratch_dir("sweep");
  SweepConfig cfg;
  cfg.architectures = {{4}, {6}};
  cfg.lambda_grid = {-1.0, 0.0, 2.0};
  cfg.seeds = {0, 1};
  cfg.hyper = quick();
  cfg.hyper.epochs = 2;
  cfg.workers = 2;
  cfg.results_path = dir / "points.csv";
  const SweepReport first = run_sweep(d, cfg);
  CHECK(first.n_trained == 12);
  CHECK(first.points.size() == 12);
  CHECK(first.failures.empty());
  const std::string bytes = csv::read_text(dir / "points.csv");

  const SweepReport again = run_sweep(d, cfg);
  CHECK(again.n_trained == 0);
  CHECK(again.n_skipped == 12);
  CHECK(csv::read_text(dir / "points.csv") == bytes);

  SweepConfig serial = cfg;
  serial.workers = 1;
  serial.results_path = dir / "serial.csv";
  std::reverse(serial.lambda_grid.begin(), serial.lambda_grid.end());
  run_sweep(d, serial);
  CHECK(csv::read_text(dir / "serial.csv") == bytes);

  const auto rows = read_results(dir / "points.csv");
  CHECK(rows.size() == 12);
  CHECK(rows.front().n_params == param_count({20, {4}}).weights);
}

TEST_CASE("nested train sizes") {
  const Dataset d = small_data();
  SweepConfig cfg;
  cfg.architectures = {{4}};
  cfg.lambda_grid = {0.0};
  cfg.seeds = {0};
  cfg.train_sizes = {200, 400};
  cfg.hyper = quick();
  cfg.hyper.epochs = 1;
  cfg.workers = 1;
  const auto report = run_sweep(d, cfg);
  REQUIRE(report.points.size() == 2);
  CHECK(report.points[0].d_train == 200);
  CHECK(report.points[1].d_train == 400);
}

TEST_CASE("sweep validation") {
  SweepConfig cfg;
  cfg.architectures = {{4}};
  cfg.seeds = {0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
