#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace paretolaw {

inline constexpr std::size_t kMaxSupport = 16;

/// Joint law of (X, A, Y) with X on {0, ..., n-1}; mass[x][a][y].
struct DiscreteJoint {
  std::vector<std::array<std::array<double, 2>, 2>> mass;

  std::size_t x_count() const { return mass.size(); }
  double cell(std::size_t x, int a) const { return mass[x][a][0] + mass[x][a][1]; }
  // P(Y = 1 | x, a); 0.5 on cells with no mass.
  double bayes(std::size_t x, int a) const;
  void validate() const;

  /// Strictly positive random masses.
  static DiscreteJoint random(std::mt19937_64& rng, std::size_t x_count);
};

/// f(x, a) in (0, 1), indexed [x][a].
using ScoreTable = std::vector<std::array<double, 2>>;

ScoreTable bayes_table(const DiscreteJoint& p);

/// Expected BCE (natural log) of `f` under `p`.
double cross_entropy(const DiscreteJoint& p, const ScoreTable& f);

struct DecompositionReport {
  // H(p,f)-H(q,f), H(q,f)-H(q,qB), H(q,qB)-H(p,qB), H(p,qB)-H(p,pB), H(p,pB)
  std::array<double, 5> terms{};
  double loss = 0.0;
  double telescope_residual = 0.0;   // |sum(terms) - loss|
  double condition_gap = 0.0;        // E_p[S] - E_q[S]
  double expected_rs = 0.0;          // E_q[R S], R = p/q - 1
  double three_term_residual = 0.0;  // loss - (terms[1] + terms[3] + terms[4])
  bool condition_holds = false;      // |condition_gap| <= 1e-12
};

/// Throws DomainError unless p is absolutely continuous w.r.t. q.
DecompositionReport verify_decomposition(const DiscreteJoint& p, const DiscreteJoint& q, const ScoreTable& f);

/// f = sigmoid(logit(qB) + s v + t u) with t found by root search so that
/// E_p[S] = E_q[S]. Throws NumericError if no sign change is found.
ScoreTable engineer_condition(const DiscreteJoint& p, const DiscreteJoint& q, std::mt19937_64& rng);

struct CovLemmaReport {
  double covariance = 0.0;  // Cov_nu(R, S)
  double rs_gap = 0.0;      // E_nu[RS] - E_nu[R] E_nu[S]
  double mean_gap = 0.0;    // E_mu[S] - E_nu[S]
  bool cov_zero = false;
  bool rs_factorizes = false;
  bool means_equal = false;
  bool equivalent() const { return cov_zero == rs_factorizes && rs_factorizes == means_equal; }
};

/// Finite measures of equal mass on a common finite set; expectations are
/// normalized by the mass.
CovLemmaReport verify_cov_lemma(std::span<const double> mu, std::span<const double> nu, std::span<const double> s,
                                double tol = 1e-12);

/// A measure of nu's mass with E_mu[S] = E_nu[S] exactly, obtained by tilting
/// nu along a direction orthogonal to 1 and S.
std::vector<double> tilt_preserving_mean(std::span<const double> nu, std::span<const double> s, std::mt19937_64& rng);

struct ChebyshevReport {
  double covariance = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool passed = false;  // ci_low > -3 SE
};

ChebyshevReport verify_chebyshev_cov(std::span<const double> u, double zeta_p, double zeta_q, int bootstrap = 200,
                                     std::uint64_t seed = 0);

struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> probs;

  double mean() const;
  double variance() const;
  double abs_central_moment(int order) const;
};

enum class TaylorVariant { log_one_minus, log };

struct TaylorReport {
  std::vector<double> scales;
  std::vector<double> errors;       // |E[log ...] - expansion|
  std::vector<double> third_moments;  // E|Z - EZ|^3
  double slope = 0.0;               // log error vs log scale
  double k_min = 0.0;               // error / third moment
  double k_max = 0.0;
};

using DistributionFamily = std::function<DiscreteDistribution(double scale)>;

DistributionFamily two_point_family(double center);
DistributionFamily beta_like_family(double center, int points = 200);

TaylorReport verify_taylor_log(const DistributionFamily& family, std::span<const double> scales, TaylorVariant variant);

struct VarBoundReport {
  double variance = 0.0;
  double mean = 0.0;
  double bound = 0.0;  // mu (1 - mu)
  bool holds = false;
};

VarBoundReport verify_var_bound(const DiscreteDistribution& z);

struct OracleLine {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Every oracle family over `instances` random instances.
std::vector<OracleLine> run_oracle_suite(std::uint64_t seed = 0, int instances = 100);

}  // namespace paretolaw
