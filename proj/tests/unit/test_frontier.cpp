#include <doctest.h>

#include <algorithm>
#include <random>

#include "../support.hpp"
#include "paretolaw/errors.hpp"
#include "paretolaw/frontier.hpp"

using namespace paretolaw;

TEST_CASE("hull hand cases") {
  const std::vector<FrontierPoint> one{{0.3, 0.5}};
  CHECK(lower_convex_hull(one).vertices == one);
  const std::vector<FrontierPoint> vee{{0.0, 1.0}, {0.5, 0.2}, {1.0, 1.0}};
  CHECK(lower_convex_hull(vee).vertices == vee);
  const std::vector<FrontierPoint> collinear{{0.0, 1.0}, {0.5, 0.5}, {1.0, 0.0}, {0.5, 0.9}};
  const std::vector<FrontierPoint> ends{{0.0, 1.0}, {1.0, 0.0}};
  CHECK(lower_convex_hull(collinear).vertices == ends);
  const std::vector<FrontierPoint> ties{{0.2, 0.9}, {0.2, 0.4}, {0.6, 0.5}};
  const std::vector<FrontierPoint> tie_hull{{0.2, 0.4}, {0.6, 0.5}};
  CHECK(lower_convex_hull(ties).vertices == tie_hull);
  CHECK_THROWS(lower_convex_hull(std::vector<FrontierPoint>{}));
}

TEST_CASE("hull matches the brute-force oracle and is permutation/duplication invariant") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<FrontierPoint> pts(100);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto hull = lower_convex_hull(pts).vertices;
    CHECK(hull == testing::brute_force_hull(pts));
    auto shuffled = pts;
    shuffled.insert(shuffled.end(), pts.begin(), pts.begin() + 30);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(lower_convex_hull(shuffled).vertices == hull);
    // Nothing lies strictly below the hull.
    const FrontierCurve curve = lower_convex_hull(pts);
    for (const auto& p : pts) CHECK(p.loss >= interpolate(curve, p.delta) - 1e-12);
  }
}

TEST_CASE("budget envelope") {
  const std::vector<FrontierPoint> up{{0.1, 0.5}, {0.2, 0.7}};
  const std::vector<FrontierPoint> flat{{0.1, 0.5}, {0.2, 0.5}};
  CHECK(budget_envelope(up).vertices == flat);
  const std::vector<FrontierPoint> down{{0.1, 0.9}, {0.2, 0.5}, {0.4, 0.3}};
  CHECK(budget_envelope(down).vertices == down);
  const FrontierCurve once = budget_envelope(up);
  CHECK(budget_envelope(once).vertices == once.vertices);
  CHECK(once.kind == CurveKind::budget_envelope);
}

TEST_CASE("pareto staircase keeps non-dominated points") {
  const std::vector<FrontierPoint> pts{{0.1, 0.9}, {0.2, 0.5}, {0.3, 0.6}, {0.4, 0.2}};
  const std::vector<FrontierPoint> expect{{0.1, 0.9}, {0.2, 0.5}, {0.4, 0.2}};
  CHECK(pareto_staircase(pts).vertices == expect);
}

TEST_CASE("interpolation") {
  FrontierCurve c;
  c.vertices = {{0.0, 1.0}, {1.0, 0.0}};
  CHECK(interpolate(c, 0.5) == 0.5);
  CHECK(interpolate(c, 0.0) == 1.0);
  CHECK_THROWS_AS(interpolate(c, 1.5), RangeError);
  FrontierCurve three;
  three.vertices = {{0.0, 0.6}, {0.2, 0.4}, {0.6, 0.35}};
  CHECK(interpolate(three, 0.1) == doctest::Approx(0.5));
  CHECK(interpolate(three, 0.4) == doctest::Approx(0.375));
  CHECK(interpolate(three, 0.2) == 0.4);
}

TEST_CASE("curve file round-trip") {
  FrontierCurve c;
  c.vertices = {{0.01, 0.61}, {0.1, 0.55}, {0.3, 0.5000000000000001}};
  c.kind = CurveKind::exact_gap_hull;
  c.source = {8080, 6500, 42};
  c.notes["smoothing"] = "none";
  const FrontierCurve back = parse_curve(curve_text(c));
  CHECK(back.vertices == c.vertices);
  CHECK(back.kind == c.kind);
  CHECK(back.source.n_params == 8080);
  CHECK(back.source.d_train == 6500);
  CHECK(back.source.point_count == 42);
  CHECK(back.notes.at("smoothing") == "none");
  CHECK(curve_text(back) == curve_text(c));
}

TEST_CASE("seed averaging and grouping") {
  std::vector<TrainedPoint> pts(4);
  pts[0] = {100, 50, 0.5, 0, 0.1, 0.2, 0.4, 0.1, 0.0, 0, 0, std::nullopt};
  pts[1] = {100, 50, 0.5, 1, 0.1, 0.2, 0.6, 0.3, 0.0, 0, 0, std::nullopt};
  pts[2] = {100, 50, 1.0, 0, 0.1, 0.2, 0.5, 0.05, 0.0, 0, 0, std::nullopt};
  pts[3] = {200, 50, 1.0, 0, 0.1, 0.2, 0.5, 0.05, 0.0, 0, 0, std::nullopt};
  const auto avg = average_over_seeds(pts);
  REQUIRE(avg.size() == 3);
  CHECK(avg[0].test_bce == doctest::Approx(0.5));
  CHECK(avg[0].test_dp == doctest::Approx(0.2));
  const auto groups = group_by_scale(pts);
  CHECK(groups.size() == 2);
  CHECK(groups.at({100, 50}).size() == 3);
}
