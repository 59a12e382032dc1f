#include "paretolaw/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "paretolaw/csv.hpp"
#include "paretolaw/digest.hpp"
#include "paretolaw/errors.hpp"

namespace paretolaw {

namespace {

// Independent RNG streams derived from one seed.
enum Stream : std::uint32_t { kFeatures = 1, kGroups = 2, kLabels = 3, kSplits = 4, kProjection = 5, kSubsample = 6 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void assign_groups_projected(Dataset& data, const DgpConfig& config) {
  auto rng = stream_rng(config.g_seed, kProjection);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double w0 = normal(rng);
  const double w1 = normal(rng);
  const double b = normal(rng);
  const auto n = static_cast<int>(data.size());
  const int proj_dims = std::min(2, data.x_dim());
  std::vector<std::pair<double, int>> scored(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = b + w0 * data.x(i, 0);
    if (proj_dims > 1) s += w1 * data.x(i, 1);
    scored[static_cast<std::size_t>(i)] = {s, i};
  }
  // Group 1 is the top round(pi*n) scores, i.e. scores above the empirical
  // (1 - pi)-quantile; ties broken by row index.
  const auto k = static_cast<std::size_t>(std::llround(config.pi * n));
  std::sort(scored.begin(), scored.end(), [](const auto& l, const auto& r) {
    return l.first > r.first || (l.first == r.first && l.second < r.second);
  });
  std::fill(data.a.begin(), data.a.end(), 0);
  for (std::size_t i = 0; i < k; ++i) data.a[static_cast<std::size_t>(scored[i].second)] = 1;
}

}  // namespace

std::string to_string(DgpMode mode) { return mode == DgpMode::independent ? "independent" : "projected"; }

DgpMode parse_dgp_mode(std::string_view text) {
  if (text == "independent") return DgpMode::independent;
  if (text == "projected") return DgpMode::projected;
  throw ConfigError("unknown dgp mode '" + std::string(text) + "' (expected independent or projected)");
}

void DgpConfig::validate() const {
  if (n_samples < 10) throw ConfigError("dgp.n_samples must be >= 10");
  if (x_dim < 1) throw ConfigError("dgp.x_dim must be >= 1");
  if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("dgp.pi must lie in (0, 1)");
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) throw ConfigError("dgp.zeta must be finite and >= 0");
}

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  return std::nullopt;
}

std::vector<int> Dataset::rows(Split which) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == which) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<double> Dataset::features(int row) const {
  std::vector<double> out(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) out[static_cast<std::size_t>(j)] = x(row, j);
  return out;
}

MlpArchitecture g_network_architecture(int x_dim) { return MlpArchitecture{x_dim, {32}}; }

LabelModel::LabelModel(const DgpConfig& config) : LabelModel(config, config.zeta) {}

LabelModel::LabelModel(const DgpConfig& config, double zeta)
    : g_(MlpModel::initialize(g_network_architecture(config.x_dim), config.g_seed)), zeta_(zeta) {}

double LabelModel::g(std::span<const double> x) const { return forward_logit(g_, x, 0); }

double LabelModel::score(std::span<const double> x, int a) const { return sigmoid(g(x) - zeta_ * a); }

Eigen::VectorXd LabelModel::g_values(const Eigen::MatrixXd& x) const {
  return forward_logits_batch(g_, x.transpose());
}

Eigen::VectorXd LabelModel::scores(const Eigen::MatrixXd& x, std::span<const int> a) const {
  Eigen::VectorXd g = g_values(x);
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = sigmoid(g[i] - zeta_ * a[static_cast<std::size_t>(i)]);
  return g;
}

double bayes_optimal_score(const DgpConfig& config, std::span<const double> x, int a) {
  return LabelModel(config).score(x, a);
}

Dataset generate(const DgpConfig& config) {
  config.validate();
  const int n = config.n_samples;
  const int d = config.x_dim;
  Dataset data;
  data.provenance = config;
  data.x.resize(n, d);
  data.a.assign(static_cast<std::size_t>(n), 0);
  data.y.assign(static_cast<std::size_t>(n), 0);
  {
    auto rng = stream_rng(config.data_seed, kFeatures);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) data.x(i, j) = normal(rng);
    }
  }
  if (config.mode == DgpMode::independent) {
    auto rng = stream_rng(config.data_seed, kGroups);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto& a : data.a) a = unif(rng) < config.pi ? 1 : 0;
  } else {
    assign_groups_projected(data, config);
  }
  {
    const Eigen::VectorXd q = LabelModel(config).scores(data.x, data.a);
    auto rng = stream_rng(config.data_seed, kLabels);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i) data.y[static_cast<std::size_t>(i)] = unif(rng) < q[i] ? 1 : 0;
  }
  assign_stratified_splits(data, config.data_seed);
  check_splits(data);
  return data;
}

void assign_stratified_splits(Dataset& data, std::uint64_t seed, const SplitFractions& fractions) {
  auto rng = stream_rng(seed, kSplits);
  data.split.assign(data.size(), Split::test);
  for (int a = 0; a <= 1; ++a) {
    for (int y = 0; y <= 1; ++y) {
      std::vector<int> cell;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.a[i] == a && data.y[i] == y) cell.push_back(static_cast<int>(i));
      }
      std::shuffle(cell.begin(), cell.end(), rng);
      const auto m = static_cast<double>(cell.size());
      const auto n_train = static_cast<std::size_t>(std::llround(fractions.train * m));
      const auto n_val = std::min(cell.size() - n_train, static_cast<std::size_t>(std::llround(fractions.val * m)));
      for (std::size_t k = 0; k < cell.size(); ++k) {
        const auto row = static_cast<std::size_t>(cell[k]);
        data.split[row] = k < n_train ? Split::train : (k < n_train + n_val ? Split::val : Split::test);
      }
    }
  }
}

void check_splits(const Dataset& data) {
  for (Split s : {Split::train, Split::val, Split::test}) {
    bool group[2] = {false, false};
    bool label[2] = {false, false};
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.split[i] != s) continue;
      group[data.a[i]] = true;
      label[data.y[i]] = true;
    }
    for (int g = 0; g <= 1; ++g) {
      if (!group[g]) {
        throw GenerationError(to_string(s) + " split has no rows with A=" + std::to_string(g) +
                              "; increase n_samples or move pi away from 0 and 1");
      }
      if (!label[g]) {
        throw GenerationError(to_string(s) + " split has no rows with Y=" + std::to_string(g) +
                              "; increase n_samples or reduce |zeta|");
      }
    }
  }
}

Dataset subsample_train(const Dataset& data, int d_train, std::uint64_t seed) {
  std::vector<int> train = data.rows(Split::train);
  if (d_train < 1 || d_train > static_cast<int>(train.size())) {
    throw ConfigError("train subsample size " + std::to_string(d_train) + " outside [1, " +
                      std::to_string(train.size()) + "]");
  }
  auto rng = stream_rng(seed, kSubsample);
  std::shuffle(train.begin(), train.end(), rng);
  std::vector<char> keep(data.size(), 1);
  for (std::size_t k = static_cast<std::size_t>(d_train); k < train.size(); ++k) {
    keep[static_cast<std::size_t>(train[k])] = 0;
  }
  std::vector<int> kept;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (keep[i]) kept.push_back(static_cast<int>(i));
  }
  Dataset out;
  out.provenance = data.provenance;
  out.x.resize(static_cast<Eigen::Index>(kept.size()), data.x.cols());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    out.x.row(static_cast<Eigen::Index>(k)) = data.x.row(kept[k]);
    out.a.push_back(data.a[static_cast<std::size_t>(kept[k])]);
    out.y.push_back(data.y[static_cast<std::size_t>(kept[k])]);
    out.split.push_back(data.split[static_cast<std::size_t>(kept[k])]);
  }
  return out;
}

Dataset load_external(const std::filesystem::path& path, const ExternalSchema& schema) {
  const std::string text = csv::read_text(path);
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(std::move(line));
      start = end + 1;
    }
  }
  if (lines.empty()) throw ParseError(path.string() + ": empty file");
  const auto header = csv::split_fields(lines[0]);
  int d = 0;
  while (d < static_cast<int>(header.size()) && header[static_cast<std::size_t>(d)] == "x" + std::to_string(d)) ++d;
  if (d == 0) throw ParseError(path.string() + ": header must start with x0");
  if (schema.x_dim && *schema.x_dim != d) {
    throw ParseError(path.string() + ": expected " + std::to_string(*schema.x_dim) + " feature columns, found " +
                     std::to_string(d));
  }
  const auto col = [&](std::size_t i) { return i < header.size() ? std::string(header[i]) : std::string(); };
  if (col(static_cast<std::size_t>(d)) != "a") throw ParseError(path.string() + ": missing column 'a' after x" + std::to_string(d - 1));
  if (col(static_cast<std::size_t>(d) + 1) != "y") throw ParseError(path.string() + ": missing column 'y' after 'a'");
  const bool has_split = header.size() == static_cast<std::size_t>(d) + 3;
  if (has_split && header.back() != "split") throw ParseError(path.string() + ": unexpected column '" + std::string(header.back()) + "'");
  if (header.size() > static_cast<std::size_t>(d) + 3) throw ParseError(path.string() + ": too many columns in header");
  const std::size_t width = header.size();

  Dataset data;
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  data.x.resize(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    const std::string ctx = path.filename().string() + " row " + std::to_string(line_no);
    const auto fields = csv::split_fields(lines[static_cast<std::size_t>(r) + 1]);
    if (fields.size() != width) {
      throw ParseError(ctx + ": expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    for (int j = 0; j < d; ++j) {
      const double v = csv::parse_double(fields[static_cast<std::size_t>(j)], ctx);
      if (!std::isfinite(v)) throw ParseError(ctx + ": non-finite feature x" + std::to_string(j));
      data.x(r, j) = v;
    }
    const auto parse_bit = [&](std::string_view field, const char* name) {
      const auto v = csv::parse_int(field, ctx);
      if (v != 0 && v != 1) throw ParseError(ctx + ": " + name + "=" + std::string(field) + " is not binary");
      return static_cast<int>(v);
    };
    data.a.push_back(parse_bit(fields[static_cast<std::size_t>(d)], "a"));
    data.y.push_back(parse_bit(fields[static_cast<std::size_t>(d) + 1], "y"));
    if (has_split) {
      const auto s = parse_split(fields.back());
      if (!s) throw ParseError(ctx + ": split '" + std::string(fields.back()) + "' is not train/val/test");
      data.split.push_back(*s);
    }
  }
  data.provenance = ExternalSource{path.string(), sha256_hex(text)};
  if (!has_split) assign_stratified_splits(data, schema.data_seed);
  return data;
}

std::string dataset_csv(const Dataset& data) {
  std::string out;
  for (int j = 0; j < data.x_dim(); ++j) out += "x" + std::to_string(j) + ",";
  out += "a,y,split\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.x_dim(); ++j) {
      out += csv::format_double(data.x(static_cast<Eigen::Index>(i), j));
      out += ',';
    }
    out += std::to_string(data.a[i]) + "," + std::to_string(data.y[i]) + "," + to_string(data.split[i]) + "\n";
  }
  return out;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) { csv::write_text(path, dataset_csv(data)); }

}  // namespace paretolaw
