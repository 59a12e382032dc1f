#include <doctest.h>

#include <cmath>
#include <random>

#include "paretolaw/errors.hpp"
#include "paretolaw/oracles.hpp"

using namespace paretolaw;

TEST_CASE("p = q: shift terms vanish") {
  std::mt19937_64 rng(1);
  const auto p = DiscreteJoint::random(rng, 3);
  ScoreTable f{{0.3, 0.6}, {0.5, 0.2}, {0.9, 0.4}};
  const auto r = verify_decomposition(p, p, f);
  CHECK(r.terms[0] == 0.0);
  CHECK(r.terms[2] == 0.0);
  CHECK(r.terms[3] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.telescope_residual < 1e-12);
  CHECK(std::abs(r.three_term_residual) < 1e-12);
}

TEST_CASE("f = Bayes table of q: S is zero, no misspecification") {
  std::mt19937_64 rng(2);
  const auto p = DiscreteJoint::random(rng, 4);
  const auto q = DiscreteJoint::random(rng, 4);
  const auto r = verify_decomposition(p, q, bayes_table(q));
  CHECK(r.condition_holds);
  CHECK(std::abs(r.terms[1]) < 1e-15);
  CHECK(std::abs(r.three_term_residual) < 1e-12);
}

TEST_CASE("random instances: telescope and E_q[RS] residual") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto p = DiscreteJoint::random(rng, 3);
    const auto q = DiscreteJoint::random(rng, 3);
    ScoreTable f{{0.2, 0.7}, {0.45, 0.55}, {0.9, 0.1}};
    const auto r = verify_decomposition(p, q, f);
    CHECK(r.telescope_residual < 1e-12);
    CHECK(std::abs(r.three_term_residual - r.expected_rs) < 1e-12);
    CHECK(std::abs(r.condition_gap - r.expected_rs) < 1e-12);
    const auto engineered = verify_decomposition(p, q, engineer_condition(p, q, rng));
    CHECK(engineered.condition_holds);
    CHECK(std::abs(engineered.three_term_residual) < 1e-10);
  }
}

TEST_CASE("absolute continuity is enforced") {
  std::mt19937_64 rng(4);
  auto p = DiscreteJoint::random(rng, 2);
  auto q = DiscreteJoint::random(rng, 2);
  const double moved = q.mass[0][0][0];
  q.mass[0][0][0] = 0.0;
  q.mass[1][1][1] += moved;
  ScoreTable f{{0.5, 0.5}, {0.5, 0.5}};
  CHECK_THROWS_AS(verify_decomposition(p, q, f), DomainError);
}

TEST_CASE("covariance lemma instances") {
  std::mt19937_64 rng(5);
  const std::vector<double> nu{0.2, 0.3, 0.1, 0.4};
  const std::vector<double> s{1.0, -2.0, 0.5, 3.0};
  const auto same = verify_cov_lemma(nu, nu, s);
  CHECK(same.cov_zero);
  CHECK(same.means_equal);
  CHECK(same.equivalent());

  const auto mu = tilt_preserving_mean(nu, s, rng);
  const auto tilted = verify_cov_lemma(mu, nu, s);
  CHECK(tilted.means_equal);
  CHECK(tilted.equivalent());

  // Tilt only where S is constant.
  const std::vector<double> s_flat{1.0, 1.0, 0.5, 3.0};
  const std::vector<double> mu_flat{0.3, 0.2, 0.1, 0.4};
  const auto flat = verify_cov_lemma(mu_flat, nu, s_flat);
  CHECK(flat.means_equal);
  CHECK(flat.equivalent());

  const std::vector<double> mu_up{0.1, 0.2, 0.1, 0.6};
  const auto up = verify_cov_lemma(mu_up, nu, s);
  CHECK(!up.means_equal);
  CHECK(!up.cov_zero);
  CHECK(up.equivalent());
}

TEST_CASE("Chebyshev association") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(20000);
  for (double& v : u) v = normal(rng);
  const auto r = verify_chebyshev_cov(u, 0.5, 2.0, 100, 1);
  CHECK(r.passed);
  CHECK(r.covariance > 5.0 * r.standard_error);
  const auto same = verify_chebyshev_cov(u, 1.0, 1.0, 50, 2);
  CHECK(same.covariance > 0.0);
  const std::vector<double> constant(10000, -0.7);
  CHECK(verify_chebyshev_cov(constant, 0.5, 2.0, 10, 3).covariance == 0.0);
  CHECK_THROWS_AS(verify_chebyshev_cov(std::vector<double>(100, 0.0), 0.0, 0.0), ConfigError);
}

TEST_CASE("Taylor remainder decays with the third moment") {
  const std::vector<double> scales{0.4, 0.2, 0.1, 0.05, 0.025};
  const auto a = verify_taylor_log(beta_like_family(0.3), scales, TaylorVariant::log_one_minus);
  CHECK(std::abs(a.slope - 3.0) <= 0.5);
  CHECK(a.k_max <= 2.0 * a.k_min);
  const auto b = verify_taylor_log(beta_like_family(0.6), scales, TaylorVariant::log);
  CHECK(std::abs(b.slope - 3.0) <= 0.5);
  const std::vector<double> hs{0.2, 0.1};
  const auto two = verify_taylor_log(two_point_family(0.5), hs, TaylorVariant::log_one_minus);
  CHECK(two.errors[1] * 4.0 <= two.errors[0]);
  const auto point = verify_taylor_log(two_point_family(0.4), std::vector<double>{0.0, 0.0}, TaylorVariant::log);
  CHECK(point.errors[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("variance bound") {
  const auto bern = verify_var_bound({{0.0, 1.0}, {0.7, 0.3}});
  CHECK(bern.variance == doctest::Approx(0.21).epsilon(1e-15));
  CHECK(bern.holds);
  const auto point = verify_var_bound({{0.4}, {1.0}});
  CHECK(point.variance == 0.0);
  CHECK(point.holds);
  const auto five = verify_var_bound({{0.0, 0.1, 0.5, 0.9, 1.0}, {0.1, 0.2, 0.3, 0.2, 0.2}});
  CHECK(five.holds);
  CHECK_THROWS_AS(verify_var_bound({{1.2}, {1.0}}), DomainError);
}

TEST_CASE("full suite passes") {
  for (const auto& line : run_oracle_suite(0, 30)) {
    INFO(line.name << " " << line.detail);
    CHECK(line.passed);
  }
}
