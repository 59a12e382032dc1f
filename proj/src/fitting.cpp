#include "paretolaw/fitting.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <tuple>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "paretolaw/csv.hpp"
#include "paretolaw/digest.hpp"
#include "paretolaw/errors.hpp"

namespace paretolaw {

namespace {

using Vec = std::vector<double>;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Maps an unconstrained vector onto the constraint box. Slot 7 is the
// decoupled C2 on the D term.
class Parameterization {
 public:
  Parameterization(const FitProblem& problem, double c7_floor) : c7_floor_(c7_floor), decoupled_(problem.decoupled_c2) {
    for (int i = 0; i < 7; ++i) {
      fixed_[static_cast<std::size_t>(i)] = problem.fixed[static_cast<std::size_t>(i)];
      if (!fixed_[static_cast<std::size_t>(i)]) free_.push_back(i);
    }
    if (decoupled_) free_.push_back(7);
  }

  std::size_t dim() const { return free_.size(); }
  const std::vector<int>& free_slots() const { return free_; }

  double to_constrained(int slot, double u) const {
    switch (slot) {
      case kC1: return u;
      case kC6: return logistic(u);
      case kC7: return c7_floor_ + (1.0 - c7_floor_) * logistic(u);
      default: return std::exp(u);  // C2, C3, C4, C5, C2_data
    }
  }

  double to_unconstrained(int slot, double v) const {
    switch (slot) {
      case kC1: return v;
      case kC6: return logit(std::clamp(v, 1e-12, 1.0 - 1e-12));
      case kC7: return logit(std::clamp((v - c7_floor_) / (1.0 - c7_floor_), 1e-12, 1.0 - 1e-12));
      default: return std::log(std::max(v, 1e-300));
    }
  }

  ScalingConstants decode(const Vec& u) const {
    std::array<double, 8> v{};
    for (int i = 0; i < 7; ++i) {
      if (fixed_[static_cast<std::size_t>(i)]) v[static_cast<std::size_t>(i)] = *fixed_[static_cast<std::size_t>(i)];
    }
    for (std::size_t k = 0; k < free_.size(); ++k) v[static_cast<std::size_t>(free_[k])] = to_constrained(free_[k], u[k]);
    ScalingConstants c;
    c.c1 = v[0];
    c.c2 = v[1];
    c.c3 = v[2];
    c.c4 = v[3];
    c.c5 = v[4];
    c.c6 = v[5];
    c.c7 = v[6];
    if (decoupled_) c.c2_data = v[7];
    return c;
  }

 private:
  double c7_floor_;
  bool decoupled_;
  std::array<std::optional<double>, 7> fixed_;
  std::vector<int> free_;
};

struct Objective {
  std::span<const Observation> obs;
  FitMode mode;
  double weight_sum;

  double operator()(const ScalingConstants& k) const {
    double sq = 0.0;
    double hinge = 0.0;
    for (const auto& o : obs) {
      const double r = scaling_loss(o.delta, static_cast<double>(o.n_params), static_cast<double>(o.d_train), k) - o.loss;
      sq += o.weight * r * r;
      if (mode == FitMode::lower_bound && r > 0.0) hinge += o.weight * r * r;
    }
    double value = sq / weight_sum;
    if (mode == FitMode::lower_bound) value += kHingeWeight * hinge / weight_sum;
    return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
  }
};

struct NelderMeadResult {
  Vec x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0, double step, int max_evals) {
  const std::size_t n = x0.size();
  std::vector<Vec> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  int evals = 0;
  auto eval = [&](const Vec& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  bool converged = false;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      return values[l] < values[r] || (values[l] == values[r] && l < r);
    });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    const double spread = values[worst] - values[best];
    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
    }
    if (spread <= 1e-15 * std::abs(values[best]) + 1e-300 && diameter < 1e-9) {
      converged = true;
      break;
    }

    Vec centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      Vec x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
      return x;
    };

    const Vec xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < values[best]) {
      const Vec xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Vec xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best], evals, converged};
}

struct StartOutcome {
  Vec x;
  double f = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Repeated Nelder-Mead from the incumbent with a fresh simplex until a
// restart no longer improves.
StartOutcome optimize_start(const std::function<double(const Vec&)>& f, Vec x, int max_evals) {
  StartOutcome out;
  out.x = x;
  out.f = f(x);
  int used = 1;
  double step = 0.5;
  int stalls = 0;
  while (used < max_evals) {
    const auto r = nelder_mead(f, out.x, step, max_evals - used);
    used += r.evaluations;
    const double before = out.f;
    if (r.f < out.f) {
      out.x = r.x;
      out.f = r.f;
    }
    const bool improved = out.f < before - 1e-12 * std::abs(before) - 1e-300;
    if (!improved) {
      if (r.converged && ++stalls >= 2) {
        out.converged = true;
        break;
      }
      step *= 0.3;
      if (step < 1e-8) step = 0.5;
    } else {
      stalls = 0;
    }
  }
  return out;
}

std::vector<Observation> canonical_observations(std::span<const Observation> obs) {
  std::vector<Observation> out(obs.begin(), obs.end());
  std::sort(out.begin(), out.end(), [](const Observation& l, const Observation& r) {
    return std::tie(l.n_params, l.d_train, l.delta, l.loss, l.weight) <
           std::tie(r.n_params, r.d_train, r.delta, r.loss, r.weight);
  });
  return out;
}

// Box for start draws, in constrained units; log-uniform where marked.
struct StartBox {
  double lo;
  double hi;
  bool log_scale;
};

StartBox start_box(int slot, double min_loss, double max_loss) {
  switch (slot) {
    case kC1: return {min_loss - 1.5, max_loss, false};
    case kC2: return {1e-2, 1e2, true};
    case kC3:
    case kC4: return {0.1, 1.5, false};
    case kC5: return {1e-3, 1.0, true};
    case kC6: return {0.02, 0.98, false};
    case kC7: return {0.02, 0.98, false};  // fraction of the feasible C7 interval
    default: return {1e-2, 1e2, true};     // C2_data
  }
}

}  // namespace

std::string to_string(FitMode mode) { return mode == FitMode::least_squares ? "least_squares" : "lower_bound"; }

FitMode parse_fit_mode(std::string_view text) {
  if (text == "least_squares") return FitMode::least_squares;
  if (text == "lower_bound") return FitMode::lower_bound;
  throw ConfigError("unknown fit mode '" + std::string(text) + "' (expected least_squares or lower_bound)");
}

void FitProblem::validate() const {
  if (n_starts < 1) throw ConfigError("fit.n_starts must be >= 1");
  int n_free = 0;
  for (const auto& f : fixed) n_free += f ? 0 : 1;
  if (decoupled_c2) ++n_free;
  if (n_free == 7 && observations.size() < 8) throw ConfigError("fitting all 7 constants needs >= 8 observations");
  if (static_cast<int>(observations.size()) < n_free + 1) {
    throw ConfigError("fit has " + std::to_string(n_free) + " free constants but only " +
                      std::to_string(observations.size()) + " observations");
  }
  std::set<std::int64_t> ns;
  std::set<std::int64_t> ds;
  for (const auto& o : observations) {
    if (!std::isfinite(o.delta) || !std::isfinite(o.loss) || !(o.weight > 0.0)) {
      throw ConfigError("observations need finite delta/loss and positive weight");
    }
    if (o.n_params < 1 || o.d_train < 1) throw ConfigError("observations need n_params, d_train >= 1");
    if (o.delta < 0.0) throw DomainError("observed fairness gap must be >= 0");
    if (o.delta >= 1.0) throw DomainError("observed fairness gap " + csv::format_double(o.delta) + " >= 1 is infeasible");
    ns.insert(o.n_params);
    ds.insert(o.d_train);
  }
  const bool scale_exponents_free = !fixed[kC3] || !fixed[kC4];
  if (scale_exponents_free && ns.size() < 2 && ds.size() < 2) {
    throw ConfigError("fitting C3/C4 needs observations at >= 2 distinct n_params or d_train values");
  }
  for (int i = 0; i < 7; ++i) {
    if (fixed[static_cast<std::size_t>(i)] && !std::isfinite(*fixed[static_cast<std::size_t>(i)])) {
      throw ConfigError("pinned constants must be finite");
    }
  }
}

double fit_rmse(const ScalingConstants& k, std::span<const Observation> observations) {
  double sq = 0.0;
  double w = 0.0;
  for (const auto& o : observations) {
    const double r = scaling_loss(o.delta, static_cast<double>(o.n_params), static_cast<double>(o.d_train), k) - o.loss;
    sq += o.weight * r * r;
    w += o.weight;
  }
  return std::sqrt(sq / w);
}

double max_violation(const ScalingConstants& k, std::span<const Observation> observations) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& o : observations) {
    worst = std::max(worst, scaling_loss(o.delta, static_cast<double>(o.n_params), static_cast<double>(o.d_train), k) - o.loss);
  }
  return worst;
}

std::string observation_digest(std::span<const Observation> observations) {
  std::string text;
  for (const auto& o : canonical_observations(observations)) {
    text += std::to_string(o.n_params) + "," + std::to_string(o.d_train) + "," + csv::format_double(o.delta) + "," +
            csv::format_double(o.loss) + "," + csv::format_double(o.weight) + "\n";
  }
  return sha256_hex(text);
}

FitResult fit(const FitProblem& problem) {
  problem.validate();
  const std::vector<Observation> obs = canonical_observations(problem.observations);
  double max_delta = 0.0;
  double min_loss = std::numeric_limits<double>::infinity();
  double max_loss = -std::numeric_limits<double>::infinity();
  double weight_sum = 0.0;
  for (const auto& o : obs) {
    max_delta = std::max(max_delta, o.delta);
    min_loss = std::min(min_loss, o.loss);
    max_loss = std::max(max_loss, o.loss);
    weight_sum += o.weight;
  }
  const double c7_floor = max_delta + kDeltaMargin;
  if (!(c7_floor < 1.0)) throw DomainError("largest observed fairness gap leaves no room for C7 < 1");
  if (problem.fixed[kC7] && !(*problem.fixed[kC7] > c7_floor && *problem.fixed[kC7] <= 1.0)) {
    throw DomainError("pinned C7 must exceed the largest observed gap + 1e-4");
  }

  const Parameterization param(problem, c7_floor);
  const Objective objective{obs, problem.mode, weight_sum};
  const std::function<double(const Vec&)> f = [&](const Vec& u) { return objective(param.decode(u)); };
  const std::size_t dim = param.dim();

  // Latin hypercube over the start box: one stratum per start in every
  // coordinate, strata permuted independently.
  std::mt19937_64 rng(problem.seed ^ 0x5eedf17ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto n_starts = static_cast<std::size_t>(problem.n_starts);
  std::vector<Vec> starts(n_starts, Vec(dim));
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<std::size_t> strata(n_starts);
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    const int slot = param.free_slots()[k];
    const StartBox box = start_box(slot, min_loss, max_loss);
    for (std::size_t s = 0; s < n_starts; ++s) {
      const double t = (static_cast<double>(strata[s]) + unif(rng)) / static_cast<double>(n_starts);
      double v = box.log_scale ? std::exp(std::log(box.lo) + t * (std::log(box.hi) - std::log(box.lo)))
                               : box.lo + t * (box.hi - box.lo);
      if (slot == kC7) v = c7_floor + v * (1.0 - c7_floor);
      starts[s][k] = param.to_unconstrained(slot, v);
    }
  }

  std::vector<StartOutcome> outcomes(n_starts);
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t s = next.fetch_add(1); s < n_starts; s = next.fetch_add(1)) {
        outcomes[s] = dim == 0 ? StartOutcome{starts[s], f(starts[s]), true}
                               : optimize_start(f, starts[s], problem.max_evaluations_per_start);
      }
    };
    const int workers = std::max(1, std::min(problem.workers, problem.n_starts));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
  }

  std::size_t best = 0;
  for (std::size_t s = 1; s < n_starts; ++s) {
    if (outcomes[s].f < outcomes[best].f) best = s;  // ties keep the lower start index
  }

  auto finalize = [&](const Vec& u) {
    ScalingConstants k = param.decode(u);
    if (problem.mode == FitMode::lower_bound) {
      // Post-hoc shift so no observation lies below the fitted curve.
      const double v = max_violation(k, obs);
      if (v > 0.0) k.c1 -= v;
    }
    return k;
  };

  FitResult result;
  result.mode = problem.mode;
  result.constants = finalize(outcomes[best].x);
  result.objective = outcomes[best].f;
  result.rmse = fit_rmse(result.constants, obs);
  result.max_violation = max_violation(result.constants, obs);
  result.n_restarts_used = problem.n_starts;
  result.converged = outcomes[best].converged;
  result.observation_digest = observation_digest(obs);

  for (std::size_t s = 0; s < n_starts; ++s) {
    if (!std::isfinite(outcomes[s].f)) continue;
    const ScalingConstants k = finalize(outcomes[s].x);
    const double rmse = fit_rmse(k, obs);
    if (rmse <= 1.01 * result.rmse + 1e-15) result.near_optima.push_back({static_cast<int>(s), outcomes[s].f, rmse, k});
  }

  FitDiagnostics diag;
  diag.mode = to_string(problem.mode);
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Observation>> groups;
  for (const auto& o : obs) groups[{o.n_params, o.d_train}].push_back(o);
  for (const auto& [key, members] : groups) diag.group_rmse[key] = fit_rmse(result.constants, members);
  result.constants.diagnostics = std::move(diag);
  return result;
}

std::vector<Observation> observations_from_curve(const FrontierCurve& curve) {
  if (curve.source.n_params < 1 || curve.source.d_train < 1) {
    throw ConfigError("curve lacks n_params/d_train provenance; cannot build observations");
  }
  std::vector<Observation> out;
  for (const auto& v : curve.vertices) out.push_back({curve.source.n_params, curve.source.d_train, v.delta, v.loss, 1.0});
  return out;
}

ShapeSweep extrapolate(const ScalingConstants& k, double n_plus, double d_plus, std::span<const double> grid) {
  if (grid.empty()) {
    const auto g = default_delta_grid(k.c7);
    return sweep_scaling(g, n_plus, d_plus, k);
  }
  return sweep_scaling(grid, n_plus, d_plus, k);
}

namespace {

nlohmann::ordered_json constants_json(const ScalingConstants& k) {
  nlohmann::ordered_json j;
  j["C1"] = k.c1;
  j["C2"] = k.c2;
  j["C3"] = k.c3;
  j["C4"] = k.c4;
  j["C5"] = k.c5;
  j["C6"] = k.c6;
  j["C7"] = k.c7;
  if (k.c2_data) j["C2_data"] = *k.c2_data;
  return j;
}

ScalingConstants constants_from_json(const nlohmann::json& j) {
  ScalingConstants k;
  k.c1 = j.at("C1").get<double>();
  k.c2 = j.at("C2").get<double>();
  k.c3 = j.at("C3").get<double>();
  k.c4 = j.at("C4").get<double>();
  k.c5 = j.at("C5").get<double>();
  k.c6 = j.at("C6").get<double>();
  k.c7 = j.at("C7").get<double>();
  if (j.contains("C2_data")) k.c2_data = j.at("C2_data").get<double>();
  return k;
}

}  // namespace

std::string fit_result_text(const FitResult& r, const std::map<std::string, std::string>& provenance) {
  nlohmann::ordered_json doc;
  doc["format"] = "paretolaw-fit";
  doc["version"] = 1;
  doc["mode"] = to_string(r.mode);
  doc["constants"] = constants_json(r.constants);
  doc["constants_digest"] = sha256_hex(r.constants.canonical_text());
  doc["rmse"] = r.rmse;
  doc["max_violation"] = r.max_violation;
  doc["objective"] = r.objective;
  doc["n_restarts_used"] = r.n_restarts_used;
  doc["converged"] = r.converged;
  doc["observation_digest"] = r.observation_digest;
  auto groups = nlohmann::ordered_json::array();
  if (r.constants.diagnostics) {
    for (const auto& [key, rmse] : r.constants.diagnostics->group_rmse) {
      groups.push_back({{"n_params", key.first}, {"d_train", key.second}, {"rmse", rmse}});
    }
  }
  doc["group_rmse"] = groups;
  auto near = nlohmann::ordered_json::array();
  for (const auto& o : r.near_optima) {
    near.push_back({{"start", o.start}, {"rmse", o.rmse}, {"constants", constants_json(o.constants)}});
  }
  doc["near_optima"] = near;
  nlohmann::ordered_json prov = nlohmann::ordered_json::object();
  for (const auto& [k, v] : provenance) prov[k] = v;
  doc["provenance"] = prov;
  return doc.dump(2) + "\n";
}

FitResult parse_fit_result(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format") != "paretolaw-fit") throw ParseError("not a fit result document");
    FitResult r;
    r.mode = parse_fit_mode(doc.at("mode").get<std::string>());
    r.constants = constants_from_json(doc.at("constants"));
    r.rmse = doc.at("rmse").get<double>();
    r.max_violation = doc.at("max_violation").get<double>();
    r.objective = doc.at("objective").get<double>();
    r.n_restarts_used = doc.at("n_restarts_used").get<int>();
    r.converged = doc.at("converged").get<bool>();
    r.observation_digest = doc.at("observation_digest").get<std::string>();
    FitDiagnostics diag;
    diag.mode = to_string(r.mode);
    for (const auto& g : doc.at("group_rmse")) {
      diag.group_rmse[{g.at("n_params").get<std::int64_t>(), g.at("d_train").get<std::int64_t>()}] = g.at("rmse").get<double>();
    }
    r.constants.diagnostics = diag;
    for (const auto& o : doc.at("near_optima")) {
      r.near_optima.push_back({o.at("start").get<int>(), 0.0, o.at("rmse").get<double>(), constants_from_json(o.at("constants"))});
    }
    r.constants.validate();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed fit result: ") + e.what());
  }
}

ScalingConstants constants_from_text(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    ScalingConstants k = doc.contains("constants") ? constants_from_json(doc.at("constants")) : constants_from_json(doc);
    k.validate();
    return k;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed constants document: ") + e.what());
  }
}

}  // namespace paretolaw
