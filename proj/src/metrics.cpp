#include "paretolaw/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "paretolaw/errors.hpp"

namespace paretolaw {

namespace {

double clamp_score(double s) { return std::clamp(s, kScoreClamp, 1.0 - kScoreClamp); }

struct GroupMeans {
  double m0 = 0.0;
  double m1 = 0.0;
};

GroupMeans group_means(std::span<const double> scores, std::span<const int> a) {
  double s0 = 0.0;
  double s1 = 0.0;
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double f = clamp_score(scores[i]);
    if (a[i]) {
      s1 += f;
      ++n1;
    } else {
      s0 += f;
      ++n0;
    }
  }
  if (n0 == 0) throw EvaluationError("group A=0 is absent from the evaluated split");
  if (n1 == 0) throw EvaluationError("group A=1 is absent from the evaluated split");
  return {s0 / static_cast<double>(n0), s1 / static_cast<double>(n1)};
}

std::vector<int> checked_rows(const Dataset& data, Split split) {
  auto rows = data.rows(split);
  if (rows.empty()) throw EvaluationError(to_string(split) + " split is empty");
  return rows;
}

template <typename Rows>
std::vector<int> gather(const std::vector<int>& values, const Rows& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(values[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace

double bce_from_scores(std::span<const double> scores, std::span<const int> y) {
  if (scores.empty()) throw EvaluationError("cannot evaluate BCE on an empty set");
  if (scores.size() != y.size()) throw ShapeError("scores and labels differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double f = clamp_score(scores[i]);
    total -= y[i] ? std::log(f) : std::log(1.0 - f);
  }
  return total / static_cast<double>(scores.size());
}

double dp_gap_from_scores(std::span<const double> scores, std::span<const int> a) {
  if (scores.size() != a.size()) throw ShapeError("scores and groups differ in length");
  const GroupMeans m = group_means(scores, a);
  return std::abs(m.m1 - m.m0);
}

EvalResult evaluate_scores(std::span<const double> scores, std::span<const int> a, std::span<const int> y) {
  EvalResult r;
  r.bce = bce_from_scores(scores, y);
  if (scores.size() != a.size()) throw ShapeError("scores and groups differ in length");
  const GroupMeans m = group_means(scores, a);
  r.mean_a0 = m.m0;
  r.mean_a1 = m.m1;
  r.dp_gap = std::abs(m.m1 - m.m0);
  r.n_evaluated = scores.size();
  return r;
}

std::vector<double> split_scores(const MlpModel& model, const Dataset& data, std::span<const int> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < rows.size(); start += kChunk) {
    const auto chunk = rows.subspan(start, std::min(kChunk, rows.size() - start));
    const Batch batch = make_batch(model, data.x, data.a, data.y, chunk);
    const Eigen::VectorXd s = forward_batch(model, batch.inputs);
    out.insert(out.end(), s.data(), s.data() + s.size());
  }
  return out;
}

std::vector<double> split_scores(const Scorer& scorer, const Dataset& data, std::span<const int> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (int r : rows) {
    const auto x = data.features(r);
    out.push_back(scorer(x, data.a[static_cast<std::size_t>(r)]));
  }
  return out;
}

double bce_loss(const MlpModel& model, const Dataset& data, Split split) {
  const auto rows = checked_rows(data, split);
  return bce_from_scores(split_scores(model, data, rows), gather(data.y, rows));
}

double dp_gap(const MlpModel& model, const Dataset& data, Split split) {
  const auto rows = checked_rows(data, split);
  return dp_gap_from_scores(split_scores(model, data, rows), gather(data.a, rows));
}

EvalResult evaluate(const MlpModel& model, const Dataset& data, Split split) {
  const auto rows = checked_rows(data, split);
  return evaluate_scores(split_scores(model, data, rows), gather(data.a, rows), gather(data.y, rows));
}

EvalResult evaluate(const Scorer& scorer, const Dataset& data, Split split) {
  const auto rows = checked_rows(data, split);
  return evaluate_scores(split_scores(scorer, data, rows), gather(data.a, rows), gather(data.y, rows));
}

}  // namespace paretolaw
