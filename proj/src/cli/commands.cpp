#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "paretolaw/audit.hpp"
#include "paretolaw/cli.hpp"
#include "paretolaw/closed_form.hpp"
#include "paretolaw/csv.hpp"
#include "paretolaw/digest.hpp"
#include "paretolaw/errors.hpp"
#include "paretolaw/fitting.hpp"
#include "paretolaw/frontier.hpp"
#include "paretolaw/oracles.hpp"
#include "paretolaw/training.hpp"

namespace paretolaw {

namespace {

namespace fs = std::filesystem;
using csv::format_double;

// "80,80;160,160" -> {{80, 80}, {160, 160}}
std::vector<std::vector<int>> parse_architectures(const std::string& text) {
  std::vector<std::vector<int>> out;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    if (group.empty()) continue;
    std::vector<int> hidden;
    for (auto field : csv::split_fields(group)) hidden.push_back(static_cast<int>(csv::parse_int(field, "--archs")));
    out.push_back(hidden);
  }
  if (out.empty()) throw ConfigError("--archs needs at least one architecture, e.g. 80,80;160,160");
  return out;
}

std::map<std::string, std::string> dgp_params(const DgpConfig& c) {
  return {{"provenance", "synthetic"},
          {"dgp.n_samples", std::to_string(c.n_samples)},
          {"dgp.x_dim", std::to_string(c.x_dim)},
          {"dgp.pi", format_double(c.pi)},
          {"dgp.zeta", format_double(c.zeta)},
          {"dgp.g_seed", std::to_string(c.g_seed)},
          {"dgp.data_seed", std::to_string(c.data_seed)},
          {"dgp.mode", to_string(c.mode)}};
}

DgpConfig dgp_from_params(const std::map<std::string, std::string>& p) {
  auto get = [&](const std::string& k) {
    const auto it = p.find(k);
    if (it == p.end()) throw ParseError("dataset sidecar lacks '" + k + "'");
    return it->second;
  };
  DgpConfig c;
  c.n_samples = static_cast<int>(csv::parse_int(get("dgp.n_samples"), "sidecar"));
  c.x_dim = static_cast<int>(csv::parse_int(get("dgp.x_dim"), "sidecar"));
  c.pi = csv::parse_double(get("dgp.pi"), "sidecar");
  c.zeta = csv::parse_double(get("dgp.zeta"), "sidecar");
  c.g_seed = std::stoull(get("dgp.g_seed"));
  c.data_seed = std::stoull(get("dgp.data_seed"));
  c.mode = parse_dgp_mode(get("dgp.mode"));
  return c;
}

struct LoadedDataset {
  Dataset data;
  std::string digest;
};

LoadedDataset load_dataset(const fs::path& path, bool force) {
  const ArtifactMeta meta = check_artifact(path, "dataset", force);
  LoadedDataset out{load_external(path), meta.digest};
  const auto it = meta.params.find("provenance");
  if (it != meta.params.end() && it->second == "synthetic") out.data.provenance = dgp_from_params(meta.params);
  check_splits(out.data);
  return out;
}

std::string group_suffix(std::int64_t n, std::int64_t d) { return "N" + std::to_string(n) + "_D" + std::to_string(d); }

struct Manifest {
  std::string points_digest;
  struct Entry {
    std::int64_t n_params = 0;
    std::int64_t d_train = 0;
    std::string hull;
    std::string hull_digest;
    std::string envelope;
    std::string envelope_digest;
  };
  std::vector<Entry> entries;
};

Manifest parse_manifest(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Manifest m;
    m.points_digest = j.at("points_digest").get<std::string>();
    for (const auto& e : j.at("curves")) {
      m.entries.push_back({e.at("n_params").get<std::int64_t>(), e.at("d_train").get<std::int64_t>(),
                           e.at("hull").get<std::string>(), e.at("hull_digest").get<std::string>(),
                           e.at("envelope").get<std::string>(), e.at("envelope_digest").get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed frontier manifest: ") + e.what());
  }
}

struct LoadedFit {
  FitResult result;
  std::string digest;
};

LoadedFit load_fit(const fs::path& path, bool force) {
  const ArtifactMeta meta = check_artifact(path, "fit", force);
  return {parse_fit_result(csv::read_text(path)), meta.digest};
}

struct Options {
  std::string config_path;
  bool force = false;

  // simulate
  std::optional<double> c;
  std::optional<double> c_prime;
  std::optional<double> c_double_prime;
  double b = 0.0;
  std::vector<double> sweep_c;
  std::vector<double> sweep_c_prime;
  std::vector<double> sweep_c_double_prime;
  std::optional<int> grid_points;
  std::optional<std::string> out;
  std::optional<std::string> out_dir;

  // gen
  std::optional<int> n_samples;
  std::optional<int> x_dim;
  std::optional<double> pi;
  std::optional<double> zeta;
  std::optional<std::uint64_t> g_seed;
  std::optional<std::uint64_t> data_seed;
  std::optional<std::string> mode;
  std::optional<std::string> external;

  // sweep
  std::optional<std::string> dataset;
  std::optional<std::string> archs;
  std::optional<int> lambda_count;
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  std::vector<int> train_sizes;
  std::optional<std::uint64_t> subsample_seed;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> lr;
  bool group_input = false;
  std::optional<int> workers;
  bool checkpoints = false;

  // frontier
  std::optional<std::string> points;
  bool average_seeds = false;

  // fit
  std::optional<std::string> frontier;
  std::optional<std::string> fit_mode;
  std::vector<std::int64_t> only_n;
  std::vector<std::int64_t> only_d;
  std::vector<std::string> pins;
  bool decoupled_c2 = false;
  std::optional<int> n_starts;
  std::optional<std::uint64_t> fit_seed;

  // extrapolate / audit / resources
  std::optional<std::string> fit;
  std::optional<double> n_plus;
  std::optional<double> d_plus;
  std::optional<double> loss;
  std::optional<double> delta;
  std::optional<std::string> label;
  std::optional<std::string> envelope;
  std::optional<double> target_loss;
  std::optional<double> target_delta;
  std::vector<double> d_grid;

  // verify
  std::uint64_t verify_seed = 0;
  int instances = 100;

  // symmetry
  std::optional<std::string> checkpoint_dir;
  bool all_points = false;
};

fs::path path_or(const std::optional<std::string>& flag, const fs::path& fallback) {
  return flag ? fs::path(*flag) : fallback;
}

int cmd_simulate(const Options& o, const RunConfig& cfg, std::ostream& out) {
  if (!o.c || !o.c_prime || !o.c_double_prime) throw ConfigError("simulate needs --c, --c-prime and --c-double-prime");
  const ShapeConstants base{*o.c, *o.c_prime, *o.c_double_prime, o.b};
  struct Setting {
    std::string tag;
    ShapeConstants k;
  };
  std::vector<Setting> settings;
  for (double v : o.sweep_c) settings.push_back({"c_" + format_double(v), {v, base.c_prime, base.c_double_prime, base.b}});
  for (double v : o.sweep_c_prime) settings.push_back({"cp_" + format_double(v), {base.c, v, base.c_double_prime, base.b}});
  for (double v : o.sweep_c_double_prime) settings.push_back({"cpp_" + format_double(v), {base.c, base.c_prime, v, base.b}});
  if (settings.empty()) settings.push_back({"base", base});
  // Validate everything before writing anything.
  base.validate();
  for (const auto& s : settings) s.k.validate();
  const int points = o.grid_points.value_or(cfg.grid_points);

  const fs::path dir = path_or(o.out_dir, cfg.output_dir / "simulate");
  std::vector<std::pair<fs::path, ShapeSweep>> results;
  for (const auto& s : settings) {
    const auto grid = default_delta_grid(s.k.c_double_prime, points);
    results.emplace_back(dir / s.tag, sweep_shape(grid, s.k));
  }
  for (auto& [stem, sweep] : results) {
    const std::map<std::string, std::string> params{{"grid_points", std::to_string(points)}};
    const fs::path exact = stem.parent_path() / ("exact_" + stem.filename().string() + ".csv");
    const fs::path env = stem.parent_path() / ("envelope_" + stem.filename().string() + ".csv");
    write_artifact(exact, curve_text(sweep.exact), "curve", {}, params);
    write_artifact(env, curve_text(sweep.envelope), "curve", {}, params);
    out << "wrote " << exact.string() << "\n" << "wrote " << env.string() << "\n";
  }
  return kExitOk;
}

int cmd_gen(const Options& o, RunConfig cfg, std::ostream& out) {
  if (o.n_samples) cfg.dgp.n_samples = *o.n_samples;
  if (o.x_dim) cfg.dgp.x_dim = *o.x_dim;
  if (o.pi) cfg.dgp.pi = *o.pi;
  if (o.zeta) cfg.dgp.zeta = *o.zeta;
  if (o.g_seed) cfg.dgp.g_seed = *o.g_seed;
  if (o.data_seed) cfg.dgp.data_seed = *o.data_seed;
  if (o.mode) cfg.dgp.mode = parse_dgp_mode(*o.mode);
  if (o.external) cfg.external_data = fs::path(*o.external);
  const fs::path target = path_or(o.out, cfg.output_dir / "dataset.csv");

  Dataset data;
  std::map<std::string, std::string> params;
  std::map<std::string, std::string> inputs;
  if (cfg.external_data) {
    data = load_external(*cfg.external_data, ExternalSchema{std::nullopt, cfg.dgp.data_seed});
    check_splits(data);
    params = {{"provenance", "external"}, {"data_seed", std::to_string(cfg.dgp.data_seed)}};
    inputs = {{"external", std::get<ExternalSource>(data.provenance).digest}};
  } else {
    cfg.dgp.validate();
    data = generate(cfg.dgp);
    params = dgp_params(cfg.dgp);
  }
  const std::string digest = write_artifact(target, dataset_csv(data), "dataset", inputs, params);
  double n_a1 = 0.0;
  double y_a[2] = {0.0, 0.0};
  double n_a[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < data.size(); ++i) {
    n_a1 += data.a[i];
    n_a[data.a[i]] += 1.0;
    y_a[data.a[i]] += data.y[i];
  }
  out << "dataset " << target.string() << " n=" << data.size() << " x_dim=" << data.x_dim()
      << " share_a1=" << format_double(n_a1 / static_cast<double>(data.size()))
      << " p_y1_a0=" << format_double(n_a[0] > 0 ? y_a[0] / n_a[0] : 0.0)
      << " p_y1_a1=" << format_double(n_a[1] > 0 ? y_a[1] / n_a[1] : 0.0) << " digest=" << digest << "\n";
  return kExitOk;
}

std::map<std::string, std::string> sweep_params(const SweepConfig& s) {
  return {{"epochs", std::to_string(s.hyper.epochs)},
          {"batch_size", std::to_string(s.hyper.batch_size)},
          {"lr", format_double(s.hyper.lr)},
          {"use_group_input", s.hyper.use_group_input ? "true" : "false"},
          {"subsample_seed", std::to_string(s.subsample_seed)}};
}

int cmd_sweep(const Options& o, RunConfig cfg, bool force, std::ostream& out, std::ostream& err) {
  SweepConfig& s = cfg.sweep;
  if (o.archs) s.architectures = parse_architectures(*o.archs);
  if (s.architectures.empty()) s.architectures = {{80, 80}, {160, 160}, {320, 320}, {640, 640}};
  if (o.lambda_count) cfg.lambda_count = *o.lambda_count;
  if (!o.lambdas.empty()) s.lambda_grid = o.lambdas;
  if (s.lambda_grid.empty()) s.lambda_grid = default_lambda_grid(cfg.lambda_count);
  if (!o.seeds.empty()) s.seeds = o.seeds;
  if (!o.train_sizes.empty()) s.train_sizes = o.train_sizes;
  if (o.subsample_seed) s.subsample_seed = *o.subsample_seed;
  if (o.epochs) s.hyper.epochs = *o.epochs;
  if (o.batch_size) s.hyper.batch_size = *o.batch_size;
  if (o.lr) s.hyper.lr = *o.lr;
  if (o.group_input) s.hyper.use_group_input = true;
  if (o.workers) s.workers = *o.workers;
  const bool keep = cfg.keep_checkpoints || o.checkpoints;

  const fs::path dataset_path = path_or(o.dataset, cfg.output_dir / "dataset.csv");
  const fs::path target = path_or(o.out, cfg.output_dir / "points.csv");
  const LoadedDataset ds = load_dataset(dataset_path, force);
  const auto params = sweep_params(s);

  if (fs::exists(target)) {
    // Resuming: the rows on disk must come from the same data and settings.
    const ArtifactMeta prior = fs::exists(meta_path(target)) ? parse_meta(csv::read_text(meta_path(target))) : ArtifactMeta{};
    const auto it = prior.inputs.find("dataset");
    const bool same_data = it != prior.inputs.end() && it->second == ds.digest;
    if ((!same_data || prior.params != params) && !force) {
      throw DigestMismatch("existing " + target.string() +
                           " was produced from a different dataset or training settings; remove it or pass --force");
    }
  }
  s.results_path = target;
  if (keep) s.checkpoint_dir = target.parent_path() / "checkpoints";
  s.validate();
  const SweepReport report = run_sweep(ds.data, s);
  for (const auto& f : report.failures) err << "failed: " << f << "\n";

  const std::string bytes = csv::read_text(target);
  ArtifactMeta meta{"points", sha256_hex(bytes), {{"dataset", ds.digest}}, params};
  csv::write_text(meta_path(target), meta_text(meta));
  out << "points " << target.string() << " rows=" << report.points.size() << " trained=" << report.n_trained
      << " resumed=" << report.n_skipped << " failed=" << report.failures.size() << " digest=" << meta.digest << "\n";
  return report.failures.empty() ? kExitOk : kExitFailure;
}

int cmd_frontier(const Options& o, RunConfig cfg, bool force, std::ostream& out) {
  if (o.average_seeds) cfg.average_seeds = true;
  const fs::path points_path = path_or(o.points, cfg.output_dir / "points.csv");
  const fs::path dir = path_or(o.out_dir, cfg.output_dir / "frontier");
  const ArtifactMeta pm = check_artifact(points_path, "points", force);
  std::vector<TrainedPoint> points = read_results(points_path);
  if (points.empty()) throw ConfigError(points_path.string() + " holds no trained points");
  if (cfg.average_seeds) points = average_over_seeds(points);

  nlohmann::ordered_json manifest;
  manifest["points_digest"] = pm.digest;
  manifest["smoothing"] = cfg.average_seeds ? "seed_average" : "none";
  manifest["curves"] = nlohmann::ordered_json::array();
  for (const auto& [key, members] : group_by_scale(points)) {
    const auto fp = to_frontier_points(members);
    FrontierCurve hull = lower_convex_hull(fp);
    hull.source = {key.first, key.second, members.size()};
    hull.notes["smoothing"] = cfg.average_seeds ? "seed_average" : "none";
    hull.notes["points_digest"] = pm.digest;
    FrontierCurve env = budget_envelope(hull);
    env.source = hull.source;
    env.notes = hull.notes;
    const std::string suffix = group_suffix(key.first, key.second);
    const std::map<std::string, std::string> inputs{{"points", pm.digest}};
    const std::string hd = write_artifact(dir / ("hull_" + suffix + ".csv"), curve_text(hull), "curve", inputs);
    const std::string ed = write_artifact(dir / ("envelope_" + suffix + ".csv"), curve_text(env), "curve", inputs);
    manifest["curves"].push_back({{"n_params", key.first},
                                  {"d_train", key.second},
                                  {"point_count", members.size()},
                                  {"hull", "hull_" + suffix + ".csv"},
                                  {"hull_digest", hd},
                                  {"envelope", "envelope_" + suffix + ".csv"},
                                  {"envelope_digest", ed}});
    out << "frontier " << suffix << " points=" << members.size() << " hull_vertices=" << hull.vertices.size()
        << " min_loss=" << format_double(env.vertices.back().loss) << "\n";
  }
  const std::string md = write_artifact(dir / "manifest.json", manifest.dump(2) + "\n", "frontier_manifest",
                                        {{"points", pm.digest}});
  out << "manifest " << (dir / "manifest.json").string() << " digest=" << md << "\n";
  return kExitOk;
}

void apply_pins(const std::vector<std::string>& pins, FitProblem& fit) {
  for (const auto& pin : pins) {
    const auto eq = pin.find('=');
    if (eq == std::string::npos) throw ConfigError("--pin expects CK=value or CK=free, got '" + pin + "'");
    const std::string name = pin.substr(0, eq);
    const std::string value = pin.substr(eq + 1);
    if (name.size() != 2 || name[0] != 'C' || name[1] < '1' || name[1] > '7') {
      throw ConfigError("--pin names C1..C7, got '" + name + "'");
    }
    const auto idx = static_cast<std::size_t>(name[1] - '1');
    if (value == "free") {
      fit.fixed[idx].reset();
    } else {
      fit.fixed[idx] = csv::parse_double(value, "--pin " + name);
    }
  }
}

int cmd_fit(const Options& o, RunConfig cfg, bool force, std::ostream& out) {
  if (o.fit_mode) cfg.fit.mode = parse_fit_mode(*o.fit_mode);
  if (!o.only_n.empty()) cfg.fit_selection.only_n = o.only_n;
  if (!o.only_d.empty()) cfg.fit_selection.only_d = o.only_d;
  apply_pins(o.pins, cfg.fit);
  if (o.decoupled_c2) cfg.fit.decoupled_c2 = true;
  if (o.n_starts) cfg.fit.n_starts = *o.n_starts;
  if (o.fit_seed) cfg.fit.seed = *o.fit_seed;
  if (o.workers) cfg.fit.workers = *o.workers;

  const fs::path manifest_path = path_or(o.frontier, cfg.output_dir / "frontier" / "manifest.json");
  const fs::path target = path_or(o.out, cfg.output_dir / "fit.json");
  const ArtifactMeta mm = check_artifact(manifest_path, "frontier_manifest", force);
  const Manifest manifest = parse_manifest(csv::read_text(manifest_path));

  auto selected = [&](const std::vector<std::int64_t>& allow, std::int64_t v) {
    return allow.empty() || std::find(allow.begin(), allow.end(), v) != allow.end();
  };
  std::vector<Observation> obs;
  for (const auto& e : manifest.entries) {
    if (!selected(cfg.fit_selection.only_n, e.n_params) || !selected(cfg.fit_selection.only_d, e.d_train)) continue;
    const fs::path hull_path = manifest_path.parent_path() / e.hull;
    if (!fs::exists(hull_path)) throw ConfigError("frontier curve " + hull_path.string() + " is missing");
    const std::string actual = file_digest(hull_path);
    if (actual != e.hull_digest && !force) {
      throw DigestMismatch("frontier curve " + hull_path.string() +
                           " does not match the manifest; rerun `frontier` or pass --force");
    }
    const auto curve_obs = observations_from_curve(read_curve(hull_path));
    obs.insert(obs.end(), curve_obs.begin(), curve_obs.end());
  }
  if (obs.empty()) throw ConfigError("no frontier curves match the --only-n/--only-d selection");
  cfg.fit.observations = obs;
  const FitResult result = fit(cfg.fit);

  std::map<std::string, std::string> provenance{{"frontier_manifest", mm.digest}};
  std::string only;
  for (auto n : cfg.fit_selection.only_n) only += (only.empty() ? "" : ",") + std::to_string(n);
  if (!only.empty()) provenance["only_n"] = only;
  only.clear();
  for (auto d : cfg.fit_selection.only_d) only += (only.empty() ? "" : ",") + std::to_string(d);
  if (!only.empty()) provenance["only_d"] = only;
  const std::string digest =
      write_artifact(target, fit_result_text(result, provenance), "fit", {{"frontier_manifest", mm.digest}});
  out << "fit mode=" << to_string(result.mode) << " observations=" << obs.size()
      << " rmse=" << format_double(result.rmse) << " max_violation=" << format_double(result.max_violation)
      << " converged=" << (result.converged ? "true" : "false")
      << " constants_digest=" << sha256_hex(result.constants.canonical_text()) << " digest=" << digest << "\n";
  const auto& k = result.constants;
  out << "constants C1=" << format_double(k.c1) << " C2=" << format_double(k.c2) << " C3=" << format_double(k.c3)
      << " C4=" << format_double(k.c4) << " C5=" << format_double(k.c5) << " C6=" << format_double(k.c6)
      << " C7=" << format_double(k.c7);
  if (k.c2_data) out << " C2_data=" << format_double(*k.c2_data);
  out << "\n";
  return kExitOk;
}

int cmd_extrapolate(const Options& o, RunConfig cfg, bool force, std::ostream& out) {
  if (o.n_plus) cfg.n_plus = *o.n_plus;
  if (o.d_plus) cfg.d_plus = *o.d_plus;
  if (o.grid_points) cfg.grid_points = *o.grid_points;
  if (!(cfg.n_plus >= 1.0) || !(cfg.d_plus >= 1.0)) throw ConfigError("extrapolate needs --n-plus and --d-plus >= 1");
  const fs::path fit_path = path_or(o.fit, cfg.output_dir / "fit.json");
  const fs::path dir = path_or(o.out_dir, cfg.output_dir / "extrapolate");
  const LoadedFit lf = load_fit(fit_path, force);
  const auto grid = default_delta_grid(lf.result.constants.c7, cfg.grid_points);
  ShapeSweep sweep = extrapolate(lf.result.constants, cfg.n_plus, cfg.d_plus, grid);
  for (auto* c : {&sweep.exact, &sweep.envelope}) {
    c->notes["fit_digest"] = lf.digest;
    c->notes["fit_mode"] = to_string(lf.result.mode);
  }
  const std::string suffix = group_suffix(sweep.exact.source.n_params, sweep.exact.source.d_train);
  const std::map<std::string, std::string> inputs{{"fit", lf.digest}};
  write_artifact(dir / ("exact_" + suffix + ".csv"), curve_text(sweep.exact), "curve", inputs);
  write_artifact(dir / ("envelope_" + suffix + ".csv"), curve_text(sweep.envelope), "curve", inputs);
  out << "extrapolate " << suffix << " min_loss=" << format_double(sweep.envelope.vertices.back().loss)
      << " files=" << (dir / ("exact_" + suffix + ".csv")).string() << ","
      << (dir / ("envelope_" + suffix + ".csv")).string() << "\n";
  return kExitOk;
}

int cmd_audit(const Options& o, RunConfig cfg, bool force, std::ostream& out) {
  ContestedModel& m = cfg.contested;
  if (o.loss) m.loss = *o.loss;
  if (o.delta) m.delta = *o.delta;
  if (o.n_plus) m.n_plus = static_cast<std::int64_t>(std::llround(*o.n_plus));
  if (o.d_plus) m.d_plus = static_cast<std::int64_t>(std::llround(*o.d_plus));
  if (o.label) m.label = *o.label;
  if (o.grid_points) cfg.grid_points = *o.grid_points;
  const fs::path target = path_or(o.out, cfg.output_dir / "audit.txt");

  AuditReport report;
  std::map<std::string, std::string> inputs;
  if (o.envelope) {
    const ArtifactMeta em = check_artifact(*o.envelope, "curve", force);
    if (m.n_plus < 1) m.n_plus = 1;
    if (m.d_plus < 1) m.d_plus = 1;
    report = delta_distance(m, budget_envelope(read_curve(*o.envelope)));
    inputs["envelope"] = em.digest;
  } else {
    if (m.n_plus < 1 || m.d_plus < 1) throw ConfigError("audit needs --n-plus and --d-plus (the contested model's scale)");
    const LoadedFit lf = load_fit(path_or(o.fit, cfg.output_dir / "fit.json"), force);
    const auto grid = default_delta_grid(lf.result.constants.c7, cfg.grid_points);
    report = delta_distance(m, lf.result.constants, grid);
    report.fit_mode = lf.result.mode;
    inputs["fit"] = lf.digest;
  }
  std::string text = report.text();
  for (const auto& [k, v] : inputs) text += "input_" + k + "=" + v + "\n";
  write_artifact(target, text, "audit", inputs);
  out << report.summary_line() << "\n";
  return kExitOk;
}

int cmd_resources(const Options& o, RunConfig cfg, bool force, std::ostream& out) {
  if (!o.target_loss || !o.target_delta) throw ConfigError("resources needs --target-loss and --target-delta");
  const LoadedFit lf = load_fit(path_or(o.fit, cfg.output_dir / "fit.json"), force);
  const ResourceCurve rc = resource_requirement(*o.target_loss, *o.target_delta, lf.result.constants, o.d_grid);
  std::string text = "# status=" + to_string(rc.status) + " power_budget=" + format_double(rc.power_budget) +
                     " target_loss=" + format_double(*o.target_loss) + " target_delta=" + format_double(*o.target_delta) +
                     "\nd_train,n_params\n";
  for (const auto& p : rc.points) text += format_double(p.d_train) + "," + format_double(p.n_params) + "\n";
  const fs::path target = path_or(o.out, cfg.output_dir / "resources.csv");
  write_artifact(target, text, "resources", {{"fit", lf.digest}});
  out << "resources status=" << to_string(rc.status) << " power_budget=" << format_double(rc.power_budget)
      << " points=" << rc.points.size() << "\n";
  return rc.status == ResourceStatus::feasible ? kExitOk : kExitFailure;
}

int cmd_verify(const Options& o, std::ostream& out) {
  bool all = true;
  for (const auto& line : run_oracle_suite(o.verify_seed, o.instances)) {
    out << (line.passed ? "PASS " : "FAIL ") << line.name << " " << line.detail << "\n";
    all = all && line.passed;
  }
  return all ? kExitOk : kExitFailure;
}

int cmd_symmetry(const Options& o, RunConfig cfg, bool force, std::ostream& out) {
  const LoadedDataset ds = load_dataset(path_or(o.dataset, cfg.output_dir / "dataset.csv"), force);
  if (!ds.data.is_synthetic()) throw ConfigError("symmetry diagnostic is unsupported on external data");
  const fs::path points_path = path_or(o.points, cfg.output_dir / "points.csv");
  const ArtifactMeta pm = check_artifact(points_path, "points", force);
  const fs::path ckpt_dir = path_or(o.checkpoint_dir, points_path.parent_path() / "checkpoints");
  const std::vector<TrainedPoint> points = read_results(points_path);

  std::set<std::tuple<std::int64_t, int, double, double>> on_hull;
  for (const auto& [key, members] : group_by_scale(points)) {
    for (const auto& v : lower_convex_hull(to_frontier_points(members)).vertices) on_hull.insert({key.first, key.second, v.delta, v.loss});
  }
  std::string text = "n_params,d_train,lambda,seed,zeta,discrepancy,mean_diff_a0,mean_diff_a1,gap\n";
  int evaluated = 0;
  for (const auto& p : points) {
    if (!o.all_points && !on_hull.count({p.n_params, p.d_train, p.test_dp, p.test_bce})) continue;
    const fs::path ckpt = ckpt_dir / checkpoint_name(p);
    if (!fs::exists(ckpt)) continue;
    const SymmetryEntry e = assess_symmetry(load_checkpoint(ckpt), ds.data);
    text += std::to_string(p.n_params) + "," + std::to_string(p.d_train) + "," + format_double(p.lambda) + "," +
            std::to_string(p.seed) + "," + format_double(e.zeta) + "," + format_double(e.discrepancy) + "," +
            format_double(e.mean_diff_a0) + "," + format_double(e.mean_diff_a1) + "," + format_double(e.gap) + "\n";
    ++evaluated;
  }
  if (evaluated == 0) {
    throw ConfigError("no checkpoints found in " + ckpt_dir.string() + "; rerun the sweep with --checkpoints");
  }
  const fs::path target = path_or(o.out, cfg.output_dir / "symmetry.csv");
  write_artifact(target, text, "symmetry", {{"dataset", ds.digest}, {"points", pm.digest}});
  out << "symmetry models=" << evaluated << " file=" << target.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Loss-fairness frontiers, scaling-law fits and less-discriminatory-alternative audits", "paretolaw"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "JSON run configuration");
  app.add_flag("--force", o.force, "Proceed even when upstream digests do not match");

  auto* simulate = app.add_subcommand("simulate", "Closed-form frontier curves (exact + budget envelope)");
  simulate->add_option("--c", o.c, "Scale constant c")->required();
  simulate->add_option("--c-prime", o.c_prime, "Constant c'")->required();
  simulate->add_option("--c-double-prime", o.c_double_prime, "Constant c''")->required();
  simulate->add_option("--b", o.b, "Additive offset");
  simulate->add_option("--sweep-c", o.sweep_c, "Values of c, one curve pair each")->delimiter(',');
  simulate->add_option("--sweep-c-prime", o.sweep_c_prime, "Values of c'")->delimiter(',');
  simulate->add_option("--sweep-c-double-prime", o.sweep_c_double_prime, "Values of c''")->delimiter(',');
  simulate->add_option("--grid-points", o.grid_points, "Delta grid size");
  simulate->add_option("--out-dir", o.out_dir, "Output directory");

  auto* gen = app.add_subcommand("gen", "Generate (or import) the dataset");
  gen->add_option("--n-samples", o.n_samples);
  gen->add_option("--x-dim", o.x_dim);
  gen->add_option("--pi", o.pi, "Share of group A=1");
  gen->add_option("--zeta", o.zeta, "Bias strength");
  gen->add_option("--g-seed", o.g_seed);
  gen->add_option("--data-seed", o.data_seed);
  gen->add_option("--mode", o.mode, "projected or independent");
  gen->add_option("--external", o.external, "Import x0..,a,y[,split] CSV instead of generating");
  gen->add_option("--out", o.out);

  auto* sweep = app.add_subcommand("sweep", "Train the architecture x lambda x seed grid");
  sweep->add_option("--dataset", o.dataset);
  sweep->add_option("--archs", o.archs, "Hidden sizes, e.g. 80,80;160,160");
  sweep->add_option("--lambda-count", o.lambda_count);
  sweep->add_option("--lambdas", o.lambdas)->delimiter(',');
  sweep->add_option("--seeds", o.seeds)->delimiter(',');
  sweep->add_option("--train-sizes", o.train_sizes, "Nested train subsample sizes")->delimiter(',');
  sweep->add_option("--subsample-seed", o.subsample_seed);
  sweep->add_option("--epochs", o.epochs);
  sweep->add_option("--batch-size", o.batch_size);
  sweep->add_option("--lr", o.lr);
  sweep->add_flag("--group-input", o.group_input, "Feed the group bit to the network");
  sweep->add_option("--workers", o.workers, "Parallel training jobs (0: all cores)");
  sweep->add_flag("--checkpoints", o.checkpoints, "Keep the selected checkpoint of every model");
  sweep->add_option("--out", o.out);

  auto* frontier = app.add_subcommand("frontier", "Lower convex hulls and budget envelopes per (N, D)");
  frontier->add_option("--points", o.points);
  frontier->add_flag("--average-seeds", o.average_seeds, "Average (loss, delta) over seeds per lambda first");
  frontier->add_option("--out-dir", o.out_dir);

  auto* fitc = app.add_subcommand("fit", "Fit the seven-constant scaling form to frontier hulls");
  fitc->add_option("--frontier", o.frontier, "Frontier manifest");
  fitc->add_option("--mode", o.fit_mode, "least_squares or lower_bound");
  fitc->add_option("--only-n", o.only_n, "Use only these parameter counts")->delimiter(',');
  fitc->add_option("--only-d", o.only_d, "Use only these train sizes")->delimiter(',');
  fitc->add_option("--pin", o.pins, "CK=value or CK=free (repeatable)");
  fitc->add_flag("--decoupled-c2", o.decoupled_c2, "Separate coefficient on the D term");
  fitc->add_option("--n-starts", o.n_starts);
  fitc->add_option("--seed", o.fit_seed);
  fitc->add_option("--workers", o.workers);
  fitc->add_option("--out", o.out);

  auto* extra = app.add_subcommand("extrapolate", "Frontier predicted at (N+, D+)");
  extra->add_option("--fit", o.fit);
  extra->add_option("--n-plus", o.n_plus);
  extra->add_option("--d-plus", o.d_plus);
  extra->add_option("--grid-points", o.grid_points);
  extra->add_option("--out-dir", o.out_dir);

  auto* audit = app.add_subcommand("audit", "Delta-distance of a contested model from the frontier");
  audit->add_option("--fit", o.fit);
  audit->add_option("--envelope", o.envelope, "Audit against this curve instead of a fit");
  audit->add_option("--loss", o.loss);
  audit->add_option("--delta", o.delta);
  audit->add_option("--n-plus", o.n_plus);
  audit->add_option("--d-plus", o.d_plus);
  audit->add_option("--label", o.label);
  audit->add_option("--grid-points", o.grid_points);
  audit->add_option("--out", o.out);

  auto* resources = app.add_subcommand("resources", "(N, D) pairs needed to reach a target frontier point");
  resources->add_option("--fit", o.fit);
  resources->add_option("--target-loss", o.target_loss)->required();
  resources->add_option("--target-delta", o.target_delta)->required();
  resources->add_option("--d-grid", o.d_grid)->delimiter(',');
  resources->add_option("--out", o.out);

  auto* verify = app.add_subcommand("verify", "Numerical checks of the decomposition and helper lemmas");
  verify->add_option("--seed", o.verify_seed);
  verify->add_option("--instances", o.instances);

  auto* symmetry = app.add_subcommand("symmetry", "Per-group misspecification diagnostic for frontier models");
  symmetry->add_option("--dataset", o.dataset);
  symmetry->add_option("--points", o.points);
  symmetry->add_option("--checkpoint-dir", o.checkpoint_dir);
  symmetry->add_flag("--all", o.all_points, "Every checkpoint, not only hull vertices");
  symmetry->add_option("--out", o.out);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
    if (o.config_path.empty()) {
      cfg.sweep.seeds = {0, 1, 2};
    }
    if (simulate->parsed()) return cmd_simulate(o, cfg, out);
    if (gen->parsed()) return cmd_gen(o, cfg, out);
    if (sweep->parsed()) return cmd_sweep(o, cfg, o.force, out, err);
    if (frontier->parsed()) return cmd_frontier(o, cfg, o.force, out);
    if (fitc->parsed()) return cmd_fit(o, cfg, o.force, out);
    if (extra->parsed()) return cmd_extrapolate(o, cfg, o.force, out);
    if (audit->parsed()) return cmd_audit(o, cfg, o.force, out);
    if (resources->parsed()) return cmd_resources(o, cfg, o.force, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (symmetry->parsed()) return cmd_symmetry(o, cfg, o.force, out);
  } catch (const DigestMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitStaleInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace paretolaw
