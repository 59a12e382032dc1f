#include "paretolaw/nn.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "paretolaw/errors.hpp"

namespace paretolaw {

namespace {

constexpr int kCheckpointVersion = 1;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_score(double s) { return std::clamp(s, kScoreClamp, 1.0 - kScoreClamp); }

struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // [0] = inputs, [l+1] = ReLU(pre[l]) for hidden l
  std::vector<Eigen::MatrixXd> pre;
  Eigen::VectorXd logits;
};

ForwardCache run_forward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != model.architecture.input_dim) {
    throw ShapeError("network expects " + std::to_string(model.architecture.input_dim) +
                     " inputs, got " + std::to_string(inputs.rows()));
  }
  ForwardCache cache;
  cache.activations.reserve(model.layers.size());
  cache.pre.reserve(model.layers.size());
  cache.activations.push_back(inputs);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Eigen::MatrixXd z = layer.weight * cache.activations.back();
    z.colwise() += layer.bias;
    if (!z.allFinite()) {
      throw NumericError("non-finite pre-activation in layer " + std::to_string(l));
    }
    cache.pre.push_back(std::move(z));
    if (l + 1 < model.layers.size()) {
      cache.activations.push_back(cache.pre.back().cwiseMax(0.0));
    }
  }
  cache.logits = cache.pre.back().row(0).transpose();
  return cache;
}

struct LossTerms {
  double bce = 0.0;
  double dp = 0.0;
  double dp_sign = 0.0;  // d|m1 - m0| / d(m1 - m0); zero when undefined
  double n0 = 0.0;
  double n1 = 0.0;
};

LossTerms loss_terms(const Eigen::VectorXd& scores, const Batch& batch) {
  LossTerms t;
  const auto n = static_cast<double>(scores.size());
  double sum0 = 0.0;
  double sum1 = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double f = scores[i];
    const double y = batch.y[i];
    t.bce -= y * std::log(f) + (1.0 - y) * std::log(1.0 - f);
    if (batch.a[i] > 0.5) {
      sum1 += f;
      t.n1 += 1.0;
    } else {
      sum0 += f;
      t.n0 += 1.0;
    }
  }
  t.bce /= n;
  if (t.n0 > 0.0 && t.n1 > 0.0) {
    const double diff = sum1 / t.n1 - sum0 / t.n0;
    t.dp = std::abs(diff);
    t.dp_sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  }
  return t;
}

Eigen::VectorXd clamp_scores(const Eigen::VectorXd& logits) {
  return logits.unaryExpr([](double z) { return clamp_score(sigmoid(z)); });
}

}  // namespace

void MlpArchitecture::validate() const {
  if (input_dim < 1) throw ShapeError("architecture input_dim must be >= 1");
  if (hidden_sizes.empty()) throw ShapeError("architecture needs at least one hidden layer");
  for (int h : hidden_sizes) {
    if (h < 1) throw ShapeError("hidden layer sizes must be >= 1");
  }
}

std::string MlpArchitecture::label() const {
  std::string s = std::to_string(input_dim) + "-";
  for (std::size_t i = 0; i < hidden_sizes.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(hidden_sizes[i]);
  }
  return s + "-1";
}

ParamCount param_count(const MlpArchitecture& arch) {
  arch.validate();
  ParamCount count;
  int fan_in = arch.input_dim;
  auto add = [&](int fan_out) {
    count.weights += static_cast<std::int64_t>(fan_in) * fan_out;
    count.with_biases += static_cast<std::int64_t>(fan_in) * fan_out + fan_out;
    fan_in = fan_out;
  };
  for (int h : arch.hidden_sizes) add(h);
  add(MlpArchitecture::output_dim);
  return count;
}

MlpModel MlpModel::zeros(const MlpArchitecture& arch, bool use_group_input) {
  arch.validate();
  MlpModel model;
  model.architecture = arch;
  model.use_group_input = use_group_input;
  int fan_in = arch.input_dim;
  std::vector<int> outs = arch.hidden_sizes;
  outs.push_back(MlpArchitecture::output_dim);
  for (int fan_out : outs) {
    model.layers.push_back({Eigen::MatrixXd::Zero(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)});
    fan_in = fan_out;
  }
  return model;
}

MlpModel MlpModel::initialize(const MlpArchitecture& arch, std::uint64_t seed, bool use_group_input) {
  MlpModel model = zeros(arch, use_group_input);
  model.init_seed = seed;
  std::mt19937_64 rng(seed);
  for (auto& layer : model.layers) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(layer.weight.cols())));
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = normal(rng);
    }
  }
  return model;
}

void MlpModel::check_consistent() const {
  architecture.validate();
  if (use_group_input && architecture.input_dim < 2) {
    throw ShapeError("group input needs input_dim >= 2");
  }
  std::vector<int> outs = architecture.hidden_sizes;
  outs.push_back(MlpArchitecture::output_dim);
  if (layers.size() != outs.size()) throw ShapeError("layer count does not match architecture");
  int fan_in = architecture.input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weight.rows() != outs[l] || layer.weight.cols() != fan_in || layer.bias.size() != outs[l]) {
      throw ShapeError("layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw NumericError("layer " + std::to_string(l) + " has non-finite parameters");
    }
    fan_in = outs[l];
  }
}

LayerParams zeros_like(const LayerParams& params) {
  LayerParams out;
  out.reserve(params.size());
  for (const auto& p : params) {
    out.push_back({Eigen::MatrixXd::Zero(p.weight.rows(), p.weight.cols()), Eigen::VectorXd::Zero(p.bias.size())});
  }
  return out;
}

Batch make_batch(const MlpModel& model, const Eigen::MatrixXd& features, std::span<const int> a,
                 std::span<const int> y, std::span<const int> rows) {
  if (features.cols() != model.feature_dim()) {
    throw ShapeError("features have " + std::to_string(features.cols()) + " columns, model expects " +
                     std::to_string(model.feature_dim()));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Batch batch;
  batch.inputs.resize(model.architecture.input_dim, n);
  batch.y.resize(n);
  batch.a.resize(n);
  const Eigen::Index d = features.cols();
  for (Eigen::Index j = 0; j < n; ++j) {
    const int r = rows[static_cast<std::size_t>(j)];
    batch.inputs.col(j).head(d) = features.row(r).transpose();
    if (model.use_group_input) batch.inputs(d, j) = a[static_cast<std::size_t>(r)];
    batch.y[j] = y[static_cast<std::size_t>(r)];
    batch.a[j] = a[static_cast<std::size_t>(r)];
  }
  return batch;
}

double forward_logit(const MlpModel& model, std::span<const double> x, int a) {
  if (static_cast<int>(x.size()) != model.feature_dim()) {
    throw ShapeError("feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                     std::to_string(model.feature_dim()));
  }
  Eigen::MatrixXd input(model.architecture.input_dim, 1);
  for (std::size_t i = 0; i < x.size(); ++i) input(static_cast<Eigen::Index>(i), 0) = x[i];
  if (model.use_group_input) input(model.feature_dim(), 0) = a;
  return run_forward(model, input).logits[0];
}

double forward(const MlpModel& model, std::span<const double> x, int a) {
  return clamp_score(sigmoid(forward_logit(model, x, a)));
}

Eigen::VectorXd forward_logits_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  return run_forward(model, inputs).logits;
}

Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  return clamp_scores(forward_logits_batch(model, inputs));
}

double batch_loss(const MlpModel& model, const Batch& batch, const ScalarizedLoss& loss) {
  if (batch.size() == 0) throw ShapeError("empty batch");
  const LossTerms t = loss_terms(forward_batch(model, batch.inputs), batch);
  return t.bce + loss.lambda * t.dp;
}

Gradients backward(const MlpModel& model, const Batch& batch, const ScalarizedLoss& loss) {
  if (batch.size() == 0) throw ShapeError("empty batch");
  ForwardCache cache = run_forward(model, batch.inputs);
  const Eigen::Index n = batch.size();
  Eigen::VectorXd scores(n);
  Eigen::VectorXd raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    raw[i] = sigmoid(cache.logits[i]);
    scores[i] = clamp_score(raw[i]);
  }
  const LossTerms t = loss_terms(scores, batch);

  Gradients out;
  out.bce = t.bce;
  out.dp = t.dp;
  out.loss = t.bce + loss.lambda * t.dp;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite batch loss at output layer");

  // dL/dz for the output logit of each sample.
  Eigen::MatrixXd delta(1, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool clamped = raw[i] != scores[i];
    if (clamped) {
      delta(0, i) = 0.0;
      continue;
    }
    const double f = scores[i];
    double g = (f - batch.y[i]) * inv_n;
    if (t.dp_sign != 0.0) {
      const double dgap = batch.a[i] > 0.5 ? 1.0 / t.n1 : -1.0 / t.n0;
      g += loss.lambda * t.dp_sign * dgap * f * (1.0 - f);
    }
    delta(0, i) = g;
  }

  out.params = zeros_like(model.layers);
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const auto& input = cache.activations[l];
    out.params[l].weight.noalias() = delta * input.transpose();
    out.params[l].bias = delta.rowwise().sum();
    if (!out.params[l].weight.allFinite() || !out.params[l].bias.allFinite()) {
      throw NumericError("non-finite gradient in layer " + std::to_string(l));
    }
    if (l > 0) {
      Eigen::MatrixXd back = model.layers[l].weight.transpose() * delta;
      delta = back.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return out;
}

AdamState AdamState::for_model(const MlpModel& model, double lr) {
  AdamState state;
  state.lr = lr;
  state.first_moment = zeros_like(model.layers);
  state.second_moment = zeros_like(model.layers);
  return state;
}

void adam_step(MlpModel& model, const LayerParams& grads, AdamState& state) {
  if (grads.size() != model.layers.size() || state.first_moment.size() != model.layers.size()) {
    throw ShapeError("Adam: gradient/moment layer count does not match model");
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    if (param.size() != grad.size()) throw ShapeError("Adam: gradient shape mismatch");
    m = state.beta1 * m + (1.0 - state.beta1) * grad;
    v = state.beta2 * v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    param.array() -= state.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].weight, grads[l].weight, state.first_moment[l].weight, state.second_moment[l].weight);
    update(model.layers[l].bias, grads[l].bias, state.first_moment[l].bias, state.second_moment[l].bias);
  }
}

std::string checkpoint_text(const MlpModel& model) {
  nlohmann::ordered_json doc;
  doc["format"] = "paretolaw-mlp";
  doc["version"] = kCheckpointVersion;
  doc["input_dim"] = model.architecture.input_dim;
  doc["hidden_sizes"] = model.architecture.hidden_sizes;
  doc["use_group_input"] = model.use_group_input;
  doc["init_seed"] = model.init_seed;
  auto layers = nlohmann::ordered_json::array();
  for (const auto& layer : model.layers) {
    nlohmann::ordered_json l;
    l["rows"] = layer.weight.rows();
    l["cols"] = layer.weight.cols();
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) w.push_back(layer.weight(i, j));
    }
    l["weight"] = w;
    l["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back(std::move(l));
  }
  doc["layers"] = std::move(layers);
  return doc.dump(1) + "\n";
}

MlpModel checkpoint_from_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "paretolaw-mlp") throw ParseError("not a paretolaw checkpoint");
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw ParseError("unsupported checkpoint version " + doc.at("version").dump());
    }
    MlpArchitecture arch{doc.at("input_dim").get<int>(), doc.at("hidden_sizes").get<std::vector<int>>()};
    MlpModel model = MlpModel::zeros(arch, doc.at("use_group_input").get<bool>());
    model.init_seed = doc.at("init_seed").get<std::uint64_t>();
    const auto& layers = doc.at("layers");
    if (layers.size() != model.layers.size()) throw ParseError("checkpoint layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& layer = model.layers[l];
      const auto rows = layers[l].at("rows").get<Eigen::Index>();
      const auto cols = layers[l].at("cols").get<Eigen::Index>();
      if (rows != layer.weight.rows() || cols != layer.weight.cols()) {
        throw ParseError("checkpoint layer " + std::to_string(l) + " shape mismatch");
      }
      const auto w = layers[l].at("weight").get<std::vector<double>>();
      const auto b = layers[l].at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
        throw ParseError("checkpoint layer " + std::to_string(l) + " has wrong entry count");
      }
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) layer.weight(i, j) = w[static_cast<std::size_t>(i * cols + j)];
      }
      for (Eigen::Index i = 0; i < rows; ++i) layer.bias[i] = b[static_cast<std::size_t>(i)];
    }
    model.check_consistent();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << checkpoint_text(model);
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_text(ss.str());
}

}  // namespace paretolaw
