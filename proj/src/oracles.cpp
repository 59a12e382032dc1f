#include "paretolaw/oracles.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "paretolaw/csv.hpp"
#include "paretolaw/errors.hpp"

namespace paretolaw {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Log-loss of score `f` on label `y`.
double bce(int y, double f) { return y == 1 ? -std::log(f) : -std::log1p(-f); }

// S = y log(qB/f) + (1-y) log((1-qB)/(1-f))
double s_value(int y, double qb, double f) {
  return y == 1 ? std::log(qb) - std::log(f) : std::log1p(-qb) - std::log1p(-f);
}

double expected_s(const DiscreteJoint& m, const ScoreTable& qb, const ScoreTable& f) {
  double e = 0.0;
  for (std::size_t x = 0; x < m.x_count(); ++x) {
    for (int a = 0; a < 2; ++a) {
      for (int y = 0; y < 2; ++y) e += m.mass[x][a][y] * s_value(y, qb[x][a], f[x][a]);
    }
  }
  return e;
}

}  // namespace

double DiscreteJoint::bayes(std::size_t x, int a) const {
  const double total = cell(x, a);
  return total > 0.0 ? mass[x][a][1] / total : 0.5;
}

void DiscreteJoint::validate() const {
  if (mass.empty() || mass.size() > kMaxSupport) throw ConfigError("discrete X support must have 1 to 16 points");
  double total = 0.0;
  for (const auto& row : mass) {
    for (const auto& cellv : row) {
      for (double v : cellv) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("probabilities must be finite and >= 0");
        total += v;
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("probabilities must sum to 1 (got " + csv::format_double(total) + ")");
}

DiscreteJoint DiscreteJoint::random(std::mt19937_64& rng, std::size_t x_count) {
  std::exponential_distribution<double> draw(1.0);
  DiscreteJoint j;
  j.mass.resize(x_count);
  double total = 0.0;
  for (auto& row : j.mass) {
    for (auto& cellv : row) {
      for (double& v : cellv) {
        v = 0.05 + draw(rng);
        total += v;
      }
    }
  }
  for (auto& row : j.mass) {
    for (auto& cellv : row) {
      for (double& v : cellv) v /= total;
    }
  }
  return j;
}

ScoreTable bayes_table(const DiscreteJoint& p) {
  ScoreTable t(p.x_count());
  for (std::size_t x = 0; x < p.x_count(); ++x) {
    for (int a = 0; a < 2; ++a) t[x][a] = p.bayes(x, a);
  }
  return t;
}

double cross_entropy(const DiscreteJoint& p, const ScoreTable& f) {
  if (f.size() != p.x_count()) throw ShapeError("score table size does not match the X support");
  double h = 0.0;
  for (std::size_t x = 0; x < p.x_count(); ++x) {
    for (int a = 0; a < 2; ++a) {
      for (int y = 0; y < 2; ++y) {
        const double m = p.mass[x][a][y];
        if (m > 0.0) h += m * bce(y, f[x][a]);
      }
    }
  }
  return h;
}

DecompositionReport verify_decomposition(const DiscreteJoint& p, const DiscreteJoint& q, const ScoreTable& f) {
  p.validate();
  q.validate();
  if (p.x_count() != q.x_count() || f.size() != p.x_count()) throw ShapeError("p, q and f must share the X support");
  for (std::size_t x = 0; x < p.x_count(); ++x) {
    for (int a = 0; a < 2; ++a) {
      if (!(f[x][a] > 0.0 && f[x][a] < 1.0)) throw DomainError("scores must lie in (0, 1)");
      for (int y = 0; y < 2; ++y) {
        if (p.mass[x][a][y] > 0.0 && q.mass[x][a][y] == 0.0) {
          throw DomainError("p is not absolutely continuous w.r.t. q at (x=" + std::to_string(x) + ", a=" +
                            std::to_string(a) + ", y=" + std::to_string(y) + ")");
        }
      }
    }
  }
  const ScoreTable pb = bayes_table(p);
  const ScoreTable qb = bayes_table(q);
  // Bayes tables of q may be 0 or 1 on cells p never visits; cross-entropy
  // only sums over positive mass so those cells contribute nothing.
  const double h_pf = cross_entropy(p, f);
  const double h_qf = cross_entropy(q, f);
  const double h_qq = cross_entropy(q, qb);
  const double h_pq = cross_entropy(p, qb);
  const double h_pp = cross_entropy(p, pb);

  DecompositionReport r;
  r.terms = {h_pf - h_qf, h_qf - h_qq, h_qq - h_pq, h_pq - h_pp, h_pp};
  r.loss = h_pf;
  double sum = 0.0;
  for (double t : r.terms) sum += t;
  r.telescope_residual = std::abs(sum - r.loss);
  r.condition_gap = expected_s(p, qb, f) - expected_s(q, qb, f);
  double rs = 0.0;
  for (std::size_t x = 0; x < p.x_count(); ++x) {
    for (int a = 0; a < 2; ++a) {
      for (int y = 0; y < 2; ++y) {
        const double qm = q.mass[x][a][y];
        if (qm == 0.0) continue;
        rs += qm * (p.mass[x][a][y] / qm - 1.0) * s_value(y, qb[x][a], f[x][a]);
      }
    }
  }
  r.expected_rs = rs;
  r.three_term_residual = r.loss - (r.terms[1] + r.terms[3] + r.terms[4]);
  r.condition_holds = std::abs(r.condition_gap) <= 1e-12;
  return r;
}

ScoreTable engineer_condition(const DiscreteJoint& p, const DiscreteJoint& q, std::mt19937_64& rng) {
  const ScoreTable qb = bayes_table(q);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 64; ++attempt) {
    ScoreTable v(p.x_count());
    ScoreTable u(p.x_count());
    for (std::size_t x = 0; x < p.x_count(); ++x) {
      for (int a = 0; a < 2; ++a) {
        v[x][a] = normal(rng);
        u[x][a] = normal(rng);
      }
    }
    const double s = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto table = [&](double t) {
      ScoreTable f(p.x_count());
      for (std::size_t x = 0; x < p.x_count(); ++x) {
        for (int a = 0; a < 2; ++a) f[x][a] = sigmoid(logit(qb[x][a]) + s * v[x][a] + t * u[x][a]);
      }
      return f;
    };
    auto gap = [&](double t) {
      const ScoreTable f = table(t);
      return expected_s(p, qb, f) - expected_s(q, qb, f);
    };
    // Scan for a sign change, then polish with TOMS 748.
    double lo = -4.0;
    double g_lo = gap(lo);
    for (int i = 1; i <= 80; ++i) {
      const double hi = -4.0 + 0.1 * i;
      const double g_hi = gap(hi);
      if (g_lo == 0.0) return table(lo);
      if ((g_lo < 0.0) != (g_hi < 0.0)) {
        std::uintmax_t iters = 200;
        const auto root = boost::math::tools::toms748_solve(
            gap, lo, hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(52), iters);
        const double t = std::abs(gap(root.first)) <= std::abs(gap(root.second)) ? root.first : root.second;
        return table(t);
      }
      lo = hi;
      g_lo = g_hi;
    }
  }
  throw NumericError("could not engineer E_p[S] = E_q[S] for this (p, q)");
}

CovLemmaReport verify_cov_lemma(std::span<const double> mu, std::span<const double> nu, std::span<const double> s,
                                double tol) {
  if (mu.size() != nu.size() || s.size() != nu.size() || nu.empty()) throw ShapeError("mu, nu and S must share a support");
  const double mass_mu = std::accumulate(mu.begin(), mu.end(), 0.0);
  const double mass_nu = std::accumulate(nu.begin(), nu.end(), 0.0);
  if (!(mass_nu > 0.0) || std::abs(mass_mu - mass_nu) > 1e-12 * mass_nu) throw DomainError("mu and nu must have equal positive mass");
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (mu[i] < 0.0 || nu[i] < 0.0) throw DomainError("measures must be non-negative");
    if (mu[i] > 0.0 && nu[i] == 0.0) throw DomainError("mu is not absolutely continuous w.r.t. nu");
  }
  double e_r = 0.0;
  double e_s = 0.0;
  double e_rs = 0.0;
  double e_mu_s = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0.0) continue;
    const double w = nu[i] / mass_nu;
    const double r = mu[i] / nu[i] - 1.0;
    e_r += w * r;
    e_s += w * s[i];
    e_rs += w * r * s[i];
    e_mu_s += mu[i] / mass_mu * s[i];
  }
  double cov = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0.0) continue;
    cov += nu[i] / mass_nu * (mu[i] / nu[i] - 1.0 - e_r) * (s[i] - e_s);
  }
  CovLemmaReport rep;
  rep.covariance = cov;
  rep.rs_gap = e_rs - e_r * e_s;
  rep.mean_gap = e_mu_s - e_s;
  rep.cov_zero = std::abs(rep.covariance) <= tol;
  rep.rs_factorizes = std::abs(rep.rs_gap) <= tol;
  rep.means_equal = std::abs(rep.mean_gap) <= tol;
  return rep;
}

std::vector<double> tilt_preserving_mean(std::span<const double> nu, std::span<const double> s, std::mt19937_64& rng) {
  const std::size_t n = nu.size();
  if (s.size() != n || n < 3) throw ShapeError("tilt needs >= 3 support points");
  std::normal_distribution<double> normal(0.0, 1.0);
  auto dot = [&](const std::vector<double>& l, const std::vector<double>& r) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += nu[i] * l[i] * r[i];
    return d;
  };
  // nu-orthonormal basis of span{1, S} via Gram-Schmidt.
  std::vector<double> e1(n, 1.0);
  const double n1 = std::sqrt(dot(e1, e1));
  for (double& v : e1) v /= n1;
  std::vector<double> e2(s.begin(), s.end());
  const double c = dot(e2, e1);
  for (std::size_t i = 0; i < n; ++i) e2[i] -= c * e1[i];
  const double n2 = std::sqrt(dot(e2, e2));
  const bool s_constant = n2 <= 1e-14;
  if (!s_constant) {
    for (double& v : e2) v /= n2;
  }
  std::vector<double> r(n);
  for (double& v : r) v = normal(rng);
  for (int pass = 0; pass < 2; ++pass) {
    const double c1 = dot(r, e1);
    for (std::size_t i = 0; i < n; ++i) r[i] -= c1 * e1[i];
    if (!s_constant) {
      const double c2 = dot(r, e2);
      for (std::size_t i = 0; i < n; ++i) r[i] -= c2 * e2[i];
    }
  }
  const double peak = std::abs(*std::max_element(r.begin(), r.end(), [](double l, double h) { return std::abs(l) < std::abs(h); }));
  const double eps = peak > 0.0 ? 0.5 / peak : 0.0;
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = nu[i] * (1.0 + eps * r[i]);
  return mu;
}

ChebyshevReport verify_chebyshev_cov(std::span<const double> u, double zeta_p, double zeta_q, int bootstrap,
                                     std::uint64_t seed) {
  if (u.size() < 10000) throw ConfigError("Chebyshev covariance check needs >= 10^4 samples of U");
  const std::size_t n = u.size();
  // Centering on the first sample makes a constant U give exactly zero.
  std::vector<double> a(n);
  std::vector<double> b(n);
  const double a0 = sigmoid(u[0] - zeta_p);
  const double b0 = sigmoid(u[0] - zeta_q);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = sigmoid(u[i] - zeta_p) - a0;
    b[i] = sigmoid(u[i] - zeta_q) - b0;
  }
  auto covariance = [&](const std::vector<std::size_t>* idx) {
    double sa = 0.0;
    double sb = 0.0;
    double sab = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = idx ? (*idx)[k] : k;
      sa += a[i];
      sb += b[i];
      sab += a[i] * b[i];
    }
    const double m = static_cast<double>(n);
    return sab / m - (sa / m) * (sb / m);
  };
  ChebyshevReport rep;
  rep.covariance = covariance(nullptr);
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - ma) * (b[i] - mb) - rep.covariance;
    var += d * d;
  }
  rep.standard_error = std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> boot(static_cast<std::size_t>(std::max(bootstrap, 1)));
  std::vector<std::size_t> idx(n);
  for (double& bv : boot) {
    for (auto& i : idx) i = pick(rng);
    bv = covariance(&idx);
  }
  std::sort(boot.begin(), boot.end());
  const auto at = [&](double q) { return boot[static_cast<std::size_t>(std::floor(q * static_cast<double>(boot.size() - 1)))]; };
  rep.ci_low = std::min(at(0.025), rep.covariance);
  rep.ci_high = std::max(at(0.975), rep.covariance);
  rep.passed = rep.ci_low > -3.0 * rep.standard_error || rep.ci_low >= 0.0;
  return rep;
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * values[i];
  return m;
}

double DiscreteDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) v += probs[i] * (values[i] - m) * (values[i] - m);
  return v;
}

double DiscreteDistribution::abs_central_moment(int order) const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) v += probs[i] * std::pow(std::abs(values[i] - m), order);
  return v;
}

DistributionFamily two_point_family(double center) {
  return [center](double h) { return DiscreteDistribution{{center - h, center + h}, {0.5, 0.5}}; };
}

DistributionFamily beta_like_family(double center, int points) {
  // Beta(2, 5) density on a midpoint grid, recentred at `center` and scaled.
  std::vector<double> base(static_cast<std::size_t>(points));
  std::vector<double> w(static_cast<std::size_t>(points));
  double total = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = (i + 0.5) / points;
    base[static_cast<std::size_t>(i)] = t;
    w[static_cast<std::size_t>(i)] = t * std::pow(1.0 - t, 4);
    total += w[static_cast<std::size_t>(i)];
  }
  double m = 0.0;
  for (int i = 0; i < points; ++i) {
    w[static_cast<std::size_t>(i)] /= total;
    m += w[static_cast<std::size_t>(i)] * base[static_cast<std::size_t>(i)];
  }
  return [=](double scale) {
    DiscreteDistribution d;
    d.probs = w;
    for (double t : base) d.values.push_back(center + scale * (t - m));
    return d;
  };
}

TaylorReport verify_taylor_log(const DistributionFamily& family, std::span<const double> scales, TaylorVariant variant) {
  if (scales.size() < 2) throw ConfigError("Taylor check needs >= 2 scales");
  TaylorReport rep;
  rep.k_min = std::numeric_limits<double>::infinity();
  std::vector<double> lx;
  std::vector<double> ly;
  for (double h : scales) {
    const DiscreteDistribution z = family(h);
    double lhs = 0.0;
    for (std::size_t i = 0; i < z.values.size(); ++i) {
      const double v = z.values[i];
      if (!(v > 0.0 && v < 1.0)) throw DomainError("Z must lie strictly inside (0, 1)");
      lhs += z.probs[i] * (variant == TaylorVariant::log_one_minus ? std::log1p(-v) : std::log(v));
    }
    const double mu = z.mean();
    const double var = z.variance();
    const double rhs = variant == TaylorVariant::log_one_minus ? std::log1p(-mu) - var / (2.0 * (1.0 - mu) * (1.0 - mu))
                                                                : std::log(mu) - var / (2.0 * mu * mu);
    const double err = std::abs(lhs - rhs);
    const double m3 = z.abs_central_moment(3);
    rep.scales.push_back(h);
    rep.errors.push_back(err);
    rep.third_moments.push_back(m3);
    if (err > 0.0 && h > 0.0) {
      lx.push_back(std::log(h));
      ly.push_back(std::log(err));
    }
    if (m3 > 0.0) {
      const double k = err / m3;
      rep.k_min = std::min(rep.k_min, k);
      rep.k_max = std::max(rep.k_max, k);
    }
  }
  if (!std::isfinite(rep.k_min)) rep.k_min = 0.0;
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.slope = sxy / sxx;
  }
  return rep;
}

VarBoundReport verify_var_bound(const DiscreteDistribution& z) {
  for (double v : z.values) {
    if (v < 0.0 || v > 1.0) throw DomainError("Z must lie in [0, 1]");
  }
  VarBoundReport rep;
  rep.mean = z.mean();
  rep.variance = z.variance();
  rep.bound = rep.mean * (1.0 - rep.mean);
  rep.holds = rep.variance <= rep.bound + 1e-12;
  return rep;
}

std::vector<OracleLine> run_oracle_suite(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> support(2, kMaxSupport);
  std::vector<OracleLine> out;
  auto fmt = [](double v) { return csv::format_double(v); };

  {
    double worst_telescope = 0.0;
    double worst_three = 0.0;
    double worst_rs = 0.0;
    bool ok = true;
    for (int i = 0; i < instances; ++i) {
      const std::size_t nx = support(rng);
      const DiscreteJoint p = DiscreteJoint::random(rng, nx);
      const DiscreteJoint q = DiscreteJoint::random(rng, nx);
      ScoreTable f(nx);
      std::uniform_real_distribution<double> score(0.02, 0.98);
      for (auto& row : f) row = {score(rng), score(rng)};
      const DecompositionReport free = verify_decomposition(p, q, f);
      worst_telescope = std::max(worst_telescope, free.telescope_residual);
      worst_rs = std::max(worst_rs, std::abs(free.three_term_residual - free.expected_rs));
      const DecompositionReport cond = verify_decomposition(p, q, engineer_condition(p, q, rng));
      worst_telescope = std::max(worst_telescope, cond.telescope_residual);
      worst_three = std::max(worst_three, std::abs(cond.three_term_residual));
      ok = ok && cond.condition_holds;
    }
    ok = ok && worst_telescope < 1e-12 && worst_three < 1e-10 && worst_rs < 1e-10;
    out.push_back({"decomposition", ok,
                   "telescope_max=" + fmt(worst_telescope) + " three_term_max=" + fmt(worst_three) +
                       " residual_vs_E_q[RS]_max=" + fmt(worst_rs)});
  }

  {
    int agree = 0;
    int constructed_equal = 0;
    int constructed_unequal = 0;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::exponential_distribution<double> draw(1.0);
    for (int i = 0; i < instances; ++i) {
      const std::size_t n = std::max<std::size_t>(3, support(rng));
      std::vector<double> nu(n);
      std::vector<double> s(n);
      for (std::size_t k = 0; k < n; ++k) {
        nu[k] = 0.05 + draw(rng);
        s[k] = normal(rng);
      }
      std::vector<double> mu;
      if (i % 2 == 0) {
        mu = tilt_preserving_mean(nu, s, rng);
      } else {
        // Tilt towards large S: the mean moves.
        const double smax = *std::max_element(s.begin(), s.end());
        const double smin = *std::min_element(s.begin(), s.end());
        mu.resize(n);
        double z = 0.0;
        double zn = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          mu[k] = nu[k] * (1.0 + 0.5 * (s[k] - smin) / (smax - smin));
          z += mu[k];
          zn += nu[k];
        }
        for (double& v : mu) v *= zn / z;
      }
      const CovLemmaReport r = verify_cov_lemma(mu, nu, s, 1e-10);
      agree += r.equivalent() ? 1 : 0;
      if (i % 2 == 0 && r.means_equal) ++constructed_equal;
      if (i % 2 == 1 && !r.means_equal) ++constructed_unequal;
    }
    const bool ok = agree == instances && constructed_equal == (instances + 1) / 2 && constructed_unequal == instances / 2;
    out.push_back({"cov_lemma", ok,
                   "equivalent=" + std::to_string(agree) + "/" + std::to_string(instances) +
                       " mean_preserving=" + std::to_string(constructed_equal) +
                       " mean_shifting=" + std::to_string(constructed_unequal)});
  }

  {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> u(20000);
    for (double& v : u) v = normal(rng);
    const ChebyshevReport r = verify_chebyshev_cov(u, 0.5, 2.0, 200, seed + 1);
    const std::vector<double> constant(10000, 0.3);
    const ChebyshevReport c = verify_chebyshev_cov(constant, 0.5, 2.0, 20, seed + 2);
    const bool ok = r.passed && r.covariance > 5.0 * r.standard_error && c.covariance == 0.0 && c.passed;
    out.push_back({"chebyshev_cov", ok,
                   "cov=" + fmt(r.covariance) + " se=" + fmt(r.standard_error) + " ci=[" + fmt(r.ci_low) + "," +
                       fmt(r.ci_high) + "] constant_cov=" + fmt(c.covariance)});
  }

  {
    const std::vector<double> scales = {0.4, 0.2, 0.1, 0.05, 0.025};
    const TaylorReport a = verify_taylor_log(beta_like_family(0.3), scales, TaylorVariant::log_one_minus);
    const TaylorReport b = verify_taylor_log(beta_like_family(0.6), scales, TaylorVariant::log);
    const std::vector<double> hs = {0.2, 0.1};
    const TaylorReport two = verify_taylor_log(two_point_family(0.5), hs, TaylorVariant::log_one_minus);
    const bool ok = std::abs(a.slope - 3.0) <= 0.5 && std::abs(b.slope - 3.0) <= 0.5 && a.k_max <= 2.0 * a.k_min &&
                    b.k_max <= 2.0 * b.k_min && two.errors[1] * 4.0 <= two.errors[0];
    out.push_back({"taylor_log", ok,
                   "slope_log1m=" + fmt(a.slope) + " slope_log=" + fmt(b.slope) +
                       " two_point_ratio=" + fmt(two.errors[0] / two.errors[1])});
  }

  {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> draw(1.0);
    int violations = 0;
    double tightest = 1.0;
    for (int i = 0; i < instances; ++i) {
      DiscreteDistribution z;
      double total = 0.0;
      for (int k = 0; k < 5; ++k) {
        z.values.push_back(unit(rng));
        z.probs.push_back(draw(rng));
        total += z.probs.back();
      }
      for (double& p : z.probs) p /= total;
      const VarBoundReport r = verify_var_bound(z);
      violations += r.holds ? 0 : 1;
      tightest = std::min(tightest, r.bound - r.variance);
    }
    const double p = 0.3;
    const VarBoundReport bern = verify_var_bound({{0.0, 1.0}, {1.0 - p, p}});
    const bool ok = violations == 0 && std::abs(bern.variance - bern.bound) <= 1e-15;
    out.push_back({"var_bound", ok,
                   "violations=" + std::to_string(violations) + " min_slack=" + fmt(tightest) +
                       " bernoulli_gap=" + fmt(bern.bound - bern.variance)});
  }
  return out;
}

}  // namespace paretolaw
