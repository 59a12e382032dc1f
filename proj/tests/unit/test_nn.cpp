#include <doctest.h>

#include <cmath>
#include <random>

#include "../support.hpp"
#include "paretolaw/errors.hpp"
#include "paretolaw/nn.hpp"

using namespace paretolaw;

TEST_CASE("weight-only parameter counts of the four widths") {
  CHECK(param_count({20, {80, 80}}).weights == 8080);
  CHECK(param_count({20, {160, 160}}).weights == 28960);
  CHECK(param_count({20, {320, 320}}).weights == 109120);
  CHECK(param_count({20, {640, 640}}).weights == 423040);
  CHECK(param_count({20, {80, 80}}).with_biases == 8080 + 80 + 80 + 1);
}

TEST_CASE("architecture label and validation") {
  CHECK(MlpArchitecture{20, {80, 80}}.label() == "20-80x80-1");
  CHECK_THROWS_AS(MlpArchitecture({0, {4}}).validate(), ShapeError);
  CHECK_THROWS_AS(MlpArchitecture({3, {0}}).validate(), ShapeError);
}

TEST_CASE("initialization is seeded and has zero biases") {
  const MlpArchitecture arch{5, {7, 3}};
  const auto m1 = MlpModel::initialize(arch, 42);
  const auto m2 = MlpModel::initialize(arch, 42);
  const auto m3 = MlpModel::initialize(arch, 43);
  CHECK(m1.layers[0].weight == m2.layers[0].weight);
  CHECK(m1.layers[0].weight != m3.layers[0].weight);
  for (const auto& l : m1.layers) CHECK(l.bias.isZero());
  CHECK(m1.layers[0].weight.rows() == 7);
  CHECK(m1.layers[0].weight.cols() == 5);
}

TEST_CASE("zero network scores 0.5 and its BCE is ln 2") {
  const auto m = MlpModel::zeros({3, {4}});
  const std::vector<double> x{0.3, -1.0, 2.0};
  CHECK(forward(m, x, 0) == doctest::Approx(0.5));
  Eigen::MatrixXd feats(4, 3);
  feats.setRandom();
  const std::vector<int> a{0, 1, 0, 1};
  const std::vector<int> y{1, 0, 0, 1};
  const std::vector<int> rows{0, 1, 2, 3};
  const Batch b = make_batch(m, feats, a, y, rows);
  CHECK(batch_loss(m, b, {0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // Equal scores across groups: the fairness term vanishes for any lambda.
  CHECK(batch_loss(m, b, {3.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("backward matches central differences") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const auto c = testing::random_gradient_case(rng);
    CHECK(testing::gradient_check(c.model, c.batch, c.loss) < 1e-4);
  }
}

TEST_CASE("fairness term uses the sign of the group gap") {
  std::mt19937_64 rng(11);
  auto c = testing::random_gradient_case(rng);
  const Gradients g0 = backward(c.model, c.batch, {0.0});
  const Gradients g1 = backward(c.model, c.batch, {1.0});
  CHECK(g1.loss == doctest::Approx(g0.bce + g1.dp).epsilon(1e-12));
  CHECK(g1.dp >= 0.0);
}

TEST_CASE("Adam step is bias-corrected") {
  auto m = MlpModel::zeros({1, {1}});
  auto grads = zeros_like(m.layers);
  grads[0].weight(0, 0) = 2.0;
  auto state = AdamState::for_model(m, 0.001);
  adam_step(m, grads, state);
  // First step moves each coordinate by lr * sign(g) (up to eps).
  CHECK(m.layers[0].weight(0, 0) == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(m.layers[1].weight(0, 0) == 0.0);
  CHECK(state.step_count == 1);
}

TEST_CASE("non-finite inputs raise a numeric error") {
  auto m = MlpModel::initialize({2, {3}}, 1);
  Eigen::MatrixXd feats(2, 2);
  feats << 1.0, NAN, 0.0, 1.0;
  const std::vector<int> a{0, 1};
  const std::vector<int> y{0, 1};
  const std::vector<int> rows{0, 1};
  const Batch b = make_batch(m, feats, a, y, rows);
  CHECK_THROWS_AS(backward(m, b, {1.0}), NumericError);
}

TEST_CASE("checkpoint round-trip is exact") {
  const auto m = MlpModel::initialize({4, {5, 3}}, 99, false);
  const auto back = checkpoint_from_text(checkpoint_text(m));
  CHECK(back.architecture == m.architecture);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    CHECK(back.layers[l].weight == m.layers[l].weight);
    CHECK(back.layers[l].bias == m.layers[l].bias);
  }
  CHECK(checkpoint_text(back) == checkpoint_text(m));
  CHECK_THROWS_AS(checkpoint_from_text("{\"format\":\"other\"}"), ParseError);
}
