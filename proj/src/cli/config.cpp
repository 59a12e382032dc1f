#include <json.hpp>

#include <algorithm>

#include "paretolaw/cli.hpp"
#include "paretolaw/csv.hpp"
#include "paretolaw/digest.hpp"
#include "paretolaw/errors.hpp"

namespace paretolaw {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& section) {
  if (!obj.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw ConfigError("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target, const std::string& section) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

constexpr const char* kConstantNames[7] = {"C1", "C2", "C3", "C4", "C5", "C6", "C7"};

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"seed", "output_dir", "dgp", "sweep", "frontier", "fit", "extrapolate", "audit"}, "");

  RunConfig cfg;
  read(doc, "seed", cfg.seed, "");
  std::string out_dir = ".";
  read(doc, "output_dir", out_dir, "");
  cfg.output_dir = resolve(base, out_dir);
  cfg.dgp.g_seed = cfg.seed;
  cfg.dgp.data_seed = cfg.seed;
  cfg.sweep.subsample_seed = cfg.seed;
  cfg.fit.seed = cfg.seed;
  cfg.sweep.seeds = {cfg.seed, cfg.seed + 1, cfg.seed + 2};

  if (doc.contains("dgp")) {
    const json& s = doc["dgp"];
    reject_unknown(s, {"n_samples", "x_dim", "pi", "zeta", "g_seed", "data_seed", "mode", "external"}, "dgp");
    read(s, "n_samples", cfg.dgp.n_samples, "dgp");
    read(s, "x_dim", cfg.dgp.x_dim, "dgp");
    read(s, "pi", cfg.dgp.pi, "dgp");
    read(s, "zeta", cfg.dgp.zeta, "dgp");
    read(s, "g_seed", cfg.dgp.g_seed, "dgp");
    read(s, "data_seed", cfg.dgp.data_seed, "dgp");
    std::string mode;
    read(s, "mode", mode, "dgp");
    if (!mode.empty()) cfg.dgp.mode = parse_dgp_mode(mode);
    std::string external;
    read(s, "external", external, "dgp");
    if (!external.empty()) cfg.external_data = resolve(base, external);
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    reject_unknown(s,
                   {"architectures", "lambda_grid", "lambda_count", "seeds", "train_sizes", "subsample_seed", "epochs",
                    "batch_size", "lr", "use_group_input", "workers", "checkpoints"},
                   "sweep");
    read(s, "architectures", cfg.sweep.architectures, "sweep");
    read(s, "lambda_grid", cfg.sweep.lambda_grid, "sweep");
    read(s, "lambda_count", cfg.lambda_count, "sweep");
    read(s, "seeds", cfg.sweep.seeds, "sweep");
    read(s, "train_sizes", cfg.sweep.train_sizes, "sweep");
    read(s, "subsample_seed", cfg.sweep.subsample_seed, "sweep");
    read(s, "epochs", cfg.sweep.hyper.epochs, "sweep");
    read(s, "batch_size", cfg.sweep.hyper.batch_size, "sweep");
    read(s, "lr", cfg.sweep.hyper.lr, "sweep");
    read(s, "use_group_input", cfg.sweep.hyper.use_group_input, "sweep");
    read(s, "workers", cfg.sweep.workers, "sweep");
    read(s, "checkpoints", cfg.keep_checkpoints, "sweep");
  }

  if (doc.contains("frontier")) {
    const json& s = doc["frontier"];
    reject_unknown(s, {"average_seeds"}, "frontier");
    read(s, "average_seeds", cfg.average_seeds, "frontier");
  }

  if (doc.contains("fit")) {
    const json& s = doc["fit"];
    reject_unknown(s,
                   {"mode", "fixed", "decoupled_c2", "n_starts", "seed", "max_evaluations_per_start", "workers", "only_n",
                    "only_d"},
                   "fit");
    std::string mode;
    read(s, "mode", mode, "fit");
    if (!mode.empty()) cfg.fit.mode = parse_fit_mode(mode);
    if (s.contains("fixed")) {
      const json& f = s["fixed"];
      reject_unknown(f, {"C1", "C2", "C3", "C4", "C5", "C6", "C7"}, "fit.fixed");
      for (int i = 0; i < 7; ++i) {
        if (!f.contains(kConstantNames[i])) continue;
        const json& v = f[kConstantNames[i]];
        if (v.is_null()) {
          cfg.fit.fixed[static_cast<std::size_t>(i)].reset();
        } else if (v.is_number()) {
          cfg.fit.fixed[static_cast<std::size_t>(i)] = v.get<double>();
        } else {
          throw ConfigError(std::string("fit.fixed.") + kConstantNames[i] + " must be a number or null");
        }
      }
    }
    read(s, "decoupled_c2", cfg.fit.decoupled_c2, "fit");
    read(s, "n_starts", cfg.fit.n_starts, "fit");
    read(s, "seed", cfg.fit.seed, "fit");
    read(s, "max_evaluations_per_start", cfg.fit.max_evaluations_per_start, "fit");
    read(s, "workers", cfg.fit.workers, "fit");
    read(s, "only_n", cfg.fit_selection.only_n, "fit");
    read(s, "only_d", cfg.fit_selection.only_d, "fit");
  }

  if (doc.contains("extrapolate")) {
    const json& s = doc["extrapolate"];
    reject_unknown(s, {"n_plus", "d_plus", "grid_points"}, "extrapolate");
    read(s, "n_plus", cfg.n_plus, "extrapolate");
    read(s, "d_plus", cfg.d_plus, "extrapolate");
    read(s, "grid_points", cfg.grid_points, "extrapolate");
  }

  if (doc.contains("audit")) {
    const json& s = doc["audit"];
    reject_unknown(s, {"loss", "delta", "n_plus", "d_plus", "label"}, "audit");
    read(s, "loss", cfg.contested.loss, "audit");
    read(s, "delta", cfg.contested.delta, "audit");
    read(s, "n_plus", cfg.contested.n_plus, "audit");
    read(s, "d_plus", cfg.contested.d_plus, "audit");
    read(s, "label", cfg.contested.label, "audit");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file " + path.string() + " does not exist");
  const auto base = std::filesystem::absolute(path).parent_path();
  return parse_run_config(csv::read_text(path), base);
}

std::filesystem::path meta_path(const std::filesystem::path& artifact) {
  return artifact.parent_path() / (artifact.filename().string() + ".meta.json");
}

std::string meta_text(const ArtifactMeta& meta) {
  nlohmann::ordered_json j;
  j["kind"] = meta.kind;
  j["digest"] = meta.digest;
  j["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta.inputs) j["inputs"][k] = v;
  j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta.params) j["params"][k] = v;
  return j.dump(2) + "\n";
}

ArtifactMeta parse_meta(const std::string& text) {
  try {
    const auto j = json::parse(text);
    ArtifactMeta m;
    m.kind = j.at("kind").get<std::string>();
    m.digest = j.at("digest").get<std::string>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.params = j.at("params").get<std::map<std::string, std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed provenance sidecar: ") + e.what());
  }
}

std::string write_artifact(const std::filesystem::path& path, const std::string& bytes, const std::string& kind,
                           const std::map<std::string, std::string>& inputs,
                           const std::map<std::string, std::string>& params) {
  csv::write_text(path, bytes);
  ArtifactMeta meta{kind, sha256_hex(bytes), inputs, params};
  csv::write_text(meta_path(path), meta_text(meta));
  return meta.digest;
}

ArtifactMeta check_artifact(const std::filesystem::path& path, const std::string& expected_kind, bool force) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("missing upstream artifact " + path.string() + "; run the producing command first");
  }
  const auto mp = meta_path(path);
  const std::string actual = file_digest(path);
  if (!std::filesystem::exists(mp)) {
    if (force) return {expected_kind, actual, {}, {}};
    throw ConfigError("artifact " + path.string() + " has no provenance sidecar " + mp.filename().string() +
                      "; regenerate it or pass --force");
  }
  ArtifactMeta meta = parse_meta(csv::read_text(mp));
  if (meta.kind != expected_kind && !force) {
    throw ConfigError("artifact " + path.string() + " is a '" + meta.kind + "', expected '" + expected_kind + "'");
  }
  if (meta.digest != actual) {
    if (!force) {
      throw DigestMismatch("artifact " + path.string() + " changed since it was produced (recorded " +
                           meta.digest.substr(0, 12) + ", found " + actual.substr(0, 12) +
                           "); rerun the producing command or pass --force");
    }
    meta.digest = actual;
  }
  return meta;
}

}  // namespace paretolaw
