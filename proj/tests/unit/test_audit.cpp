#include <doctest.h>

#include <cmath>

#include "paretolaw/audit.hpp"
#include "paretolaw/errors.hpp"

using namespace paretolaw;

namespace {

FrontierCurve three_vertex() {
  FrontierCurve env;
  env.kind = CurveKind::budget_envelope;
  env.vertices = {{0.0, 0.60}, {0.2, 0.40}, {0.6, 0.35}};
  return env;
}

ScalingConstants fig7() {
  ScalingConstants k;
  k.c1 = -0.285;
  k.c2 = 55.0;
  k.c3 = 0.7;
  k.c4 = 0.5;
  k.c5 = 0.0176;
  k.c6 = 0.92;
  k.c7 = 0.1424;
  return k;
}

}  // namespace

TEST_CASE("hand-built envelope") {
  const auto env = three_vertex();
  SUBCASE("crossing inside the first segment") {
    const auto r = delta_distance({0.5, 0.3, 1, 1, "m"}, env);
    REQUIRE(r.frontier_delta_at_loss);
    CHECK(*r.frontier_delta_at_loss == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(r.delta_star == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(r.verdict == Verdict::lda_exists);
  }
  SUBCASE("exactly on a vertex") {
    const auto r = delta_distance({0.40, 0.2, 1, 1, "m"}, env);
    CHECK(*r.frontier_delta_at_loss == 0.2);
    CHECK(r.delta_star == 0.0);
    CHECK(r.verdict == Verdict::on_frontier);
  }
  SUBCASE("above the whole envelope") {
    const auto r = delta_distance({0.7, 0.4, 1, 1, "m"}, env);
    CHECK(*r.frontier_delta_at_loss == 0.0);
    CHECK(r.delta_star == 0.4);
  }
  SUBCASE("below the envelope minimum") {
    const auto r = delta_distance({0.30, 0.5, 1, 1, "m"}, env);
    CHECK(r.verdict == Verdict::below_frontier_estimate);
    CHECK(r.delta_star == 0.0);
    CHECK(!r.frontier_delta_at_loss);
  }
  SUBCASE("left of the frontier") {
    const auto r = delta_distance({0.38, 0.05, 1, 1, "m"}, env);
    CHECK(r.verdict == Verdict::below_frontier_estimate);
    CHECK(r.delta_star == 0.0);
  }
}

TEST_CASE("delta_star is monotone in the contested point") {
  const auto env = three_vertex();
  for (double loss = 0.36; loss <= 0.7; loss += 0.01) {
    double prev = -1.0;
    for (double delta = 0.0; delta <= 1.0; delta += 0.02) {
      const double d = delta_distance({loss, delta, 1, 1, ""}, env).delta_star;
      CHECK(d >= prev);
      prev = d;
    }
  }
  for (double delta = 0.0; delta <= 1.0; delta += 0.05) {
    double prev = 2.0;
    for (double loss = 0.7; loss >= 0.3; loss -= 0.01) {
      const double d = delta_distance({loss, delta, 1, 1, ""}, env).delta_star;
      CHECK(d <= prev);
      prev = d;
    }
  }
}

TEST_CASE("audit against fitted constants carries provenance") {
  ScalingConstants k = fig7();
  const double loss = scaling_loss(0.1, 8080.0, 6500.0, k);
  const auto r = delta_distance({loss + 0.01, 0.12, 8080, 6500, "contested"}, k);
  CHECK(r.verdict == Verdict::lda_exists);
  CHECK(r.delta_star > 0.0);
  CHECK(r.constants_digest.size() == 64);
  CHECK(r.summary_line().rfind("lda_exists,", 0) == 0);
  CHECK(r.text().find("fit_mode=unknown") != std::string::npos);
}

TEST_CASE("contested model validation") {
  CHECK_THROWS_AS(delta_distance({0.5, 1.5, 1, 1, ""}, three_vertex()), ConfigError);
  CHECK_THROWS_AS(delta_distance({0.5, 0.5, 0, 1, ""}, three_vertex()), ConfigError);
}

TEST_CASE("resource requirement inverts the scaling form") {
  const ScalingConstants k = fig7();
  const double target = scaling_loss(0.05, 423040.0, 6500.0, k);
  const std::vector<double> ds{1000.0, 6500.0, 1e5};
  const ResourceCurve rc = resource_requirement(target, 0.05, k, ds);
  REQUIRE(rc.status == ResourceStatus::feasible);
  for (const auto& p : rc.points) {
    CHECK(std::abs(scaling_loss(0.05, p.n_params, p.d_train, k) - target) <= 1e-9);
  }
  const auto n = required_params(target, 0.05, 6500.0, k);
  REQUIRE(n);
  CHECK(*n == doctest::Approx(423040.0).epsilon(1e-6));

  const double floor = k.c1 + shape_term(0.05, k.c5, k.c6, k.c7);
  CHECK(resource_requirement(floor - 0.01, 0.05, k).status == ResourceStatus::infeasible);
  ScalingConstants flat = k;
  flat.c2 = 0.0;
  CHECK(resource_requirement(target, 0.05, flat).status == ResourceStatus::degenerate);
  CHECK_THROWS_AS(resource_requirement(target, 0.5, k), DomainError);
}

TEST_CASE("symmetry diagnostic") {
  DgpConfig c;
  c.n_samples = 2000;
  c.zeta = 0.5;
  c.g_seed = 8;
  c.data_seed = 9;
  const Dataset d = generate(c);
  const Scorer bayes = [&c](std::span<const double> x, int a) { return bayes_optimal_score(c, x, a); };
  const SymmetryEntry e = assess_symmetry(bayes, d, "bayes");
  CHECK(e.zeta == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(e.gap == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(std::abs(e.mean_diff_a0) < 1e-6);

  DgpConfig c0 = c;
  c0.zeta = 0.0;
  c0.mode = DgpMode::independent;
  const Dataset d0 = generate(c0);
  const Scorer half = [](std::span<const double>, int) { return 0.5; };
  const SymmetryEntry h = symmetry_at(half, d0, 0.0);
  CHECK(std::isfinite(h.gap));

  Dataset ext = d;
  ext.provenance = ExternalSource{"x.csv", "00"};
  CHECK_THROWS_AS(assess_symmetry(bayes, ext), ConfigError);
}
