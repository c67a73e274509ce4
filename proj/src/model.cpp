#include "minet/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "minet/error.hpp"
#include "minet/loss.hpp"
#include "minet/ops.hpp"

namespace minet {

namespace {

bool uses_attention(PoolingKind kind) {
  return kind == PoolingKind::attention || kind == PoolingKind::gated;
}

std::vector<double> expand_binary(const std::vector<double>& head_prob,
                                  std::size_t class_count) {
  if (head_prob.size() == 1 && class_count == 2) {
    return {1.0 - head_prob[0], head_prob[0]};
  }
  return head_prob;
}

}  // namespace

Model::Model(const ModelConfig& config) : config_(config) {
  if (config_.input_dim == 0) {
    throw ConfigError("model: input_dim must be positive");
  }
  if (config_.hidden.empty()) {
    throw ConfigError("model: hidden widths must be non-empty");
  }
  for (std::size_t w : config_.hidden) {
    if (w == 0) throw ConfigError("model: hidden widths must be positive");
  }
  if (config_.dropout_rate < 0.0 || config_.dropout_rate >= 1.0) {
    throw ConfigError("model: dropout_rate must be in [0, 1)");
  }
  if (config_.class_count < 2) {
    throw ConfigError("model: class_count must be >= 2");
  }
  if (!(config_.pooling.temperature > 0.0)) {
    throw ConfigError("model: pooling temperature must be positive");
  }
  out_dim_ = config_.class_count == 2 ? 1 : config_.class_count;

  Rng rng(config_.seed);
  std::size_t prev = config_.input_dim;
  for (std::size_t l = 0; l < config_.hidden.size(); ++l) {
    const std::size_t width = config_.hidden[l];
    const std::string idx = std::to_string(l);
    backbone_w_.emplace_back("backbone." + idx + ".w",
                             init_params(prev, width, Init::glorot_uniform, rng));
    backbone_b_.emplace_back("backbone." + idx + ".b", Matrix(1, width, 0.0));
    prev = width;
  }
  attn_ = make_attention_params(prev, config_.pooling, rng);
  head_w_ = Param("head.w", init_params(prev, out_dim_, Init::glorot_uniform, rng));
  head_b_ = Param("head.b", Matrix(1, out_dim_, 0.0));
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  for (std::size_t l = 0; l < backbone_w_.size(); ++l) {
    out.push_back(&backbone_w_[l]);
    out.push_back(&backbone_b_[l]);
  }
  for (Param* p : attn_.params()) out.push_back(p);
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

std::vector<const Param*> Model::params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<Model*>(this)->params()) out.push_back(p);
  return out;
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (const Param& p : backbone_w_) n += p.value.size();
  for (const Param& p : backbone_b_) n += p.value.size();
  n += attn_.w.value.size() + attn_.b.value.size() + attn_.gate_v.value.size() +
       attn_.gate_u.value.size() + attn_.head_w.value.size();
  n += head_w_.value.size() + head_b_.value.size();
  return n;
}

void Model::zero_grads() {
  for (Param* p : params()) p->zero_grad();
}

void Model::check_bag(const Bag& bag, int label) const {
  if (bag.size() == 0) {
    throw DomainError("model: bag '" + bag.bag_id + "' has no instances");
  }
  if (bag.width() != config_.input_dim) {
    throw ShapeError("model: bag width " + std::to_string(bag.width()) +
                     " does not match model input_dim " + std::to_string(config_.input_dim));
  }
  if (label < 0 || static_cast<std::size_t>(label) >= config_.class_count) {
    throw DomainError("model: label " + std::to_string(label) + " outside 0.." +
                      std::to_string(config_.class_count - 1));
  }
}

Matrix Model::instance_probs(const Matrix& embeddings, Matrix* logits_out) const {
  Matrix logits = affine(embeddings, head_w_, head_b_);
  Matrix probs;
  if (out_dim_ == 1) {
    probs = sigmoid(logits);
  } else {
    probs = Matrix(logits.rows, logits.cols);
    std::vector<double> row(logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
      std::copy(logits.row(i), logits.row(i) + logits.cols, row.begin());
      const std::vector<double> p = softmax_vec(row);
      std::copy(p.begin(), p.end(), probs.row(i));
    }
  }
  if (logits_out) *logits_out = std::move(logits);
  return probs;
}

void Model::forward_impl(const Matrix& instances, bool train_mode, Rng* rng,
                         Trace& trace) const {
  const std::size_t layers = config_.hidden.size();
  trace.affine_in.resize(layers);
  trace.relu_in.resize(layers);
  trace.drop_mask.resize(train_mode ? layers : 0);

  Matrix h = instances;
  for (std::size_t l = 0; l < layers; ++l) {
    trace.affine_in[l] = h;
    Matrix z = affine(h, backbone_w_[l], backbone_b_[l]);
    trace.relu_in[l] = z;
    h = relu(z);
    if (train_mode && config_.dropout_rate > 0.0) {
      if (!rng) throw ContractError("model: train-mode forward needs an rng");
      h = dropout(h, config_.dropout_rate, *rng, true, &trace.drop_mask[l]);
    } else if (train_mode) {
      trace.drop_mask[l] = Matrix(h.rows, h.cols, 1.0);
    }
  }
  trace.embeddings = std::move(h);
  const Matrix& emb = trace.embeddings;
  const std::size_t k = emb.rows;

  const PoolingKind kind = config_.pooling.kind;
  switch (kind) {
    case PoolingKind::attention:
    case PoolingKind::gated: {
      trace.attention =
          attention_weights(emb, attn_, config_.pooling.temperature, &trace.attn);
      if (!config_.classify_before_pool) {
        // Table-1 order: pool the embeddings, then classify the bag vector.
        trace.pooled_embedding = weighted_pool(emb, trace.attention);
        Matrix pooled(1, emb.cols);
        std::copy(trace.pooled_embedding.begin(), trace.pooled_embedding.end(),
                  pooled.row(0));
        const Matrix logits = affine(pooled, head_w_, head_b_);
        trace.bag_logits.assign(logits.row(0), logits.row(0) + logits.cols);
        if (out_dim_ == 1) {
          const Matrix p = sigmoid(logits);
          trace.head_prob = {p(0, 0)};
        } else {
          trace.head_prob = softmax_vec(trace.bag_logits);
        }
      } else {
        // Score-pool order: classify every instance, then take the
        // attention-weighted convex combination of the probability rows.
        trace.inst_probs = instance_probs(emb, &trace.inst_logits);
        trace.head_prob = weighted_pool(trace.inst_probs, trace.attention);
      }
      break;
    }
    case PoolingKind::max: {
      trace.inst_probs = instance_probs(emb, &trace.inst_logits);
      std::vector<double> pooled = max_pool(trace.inst_probs, &trace.argmax);
      if (out_dim_ > 1) {
        // per-class maxima do not form a distribution; renormalize
        trace.max_sum = std::accumulate(pooled.begin(), pooled.end(), 0.0);
        for (double& v : pooled) v /= trace.max_sum;
      }
      trace.head_prob = std::move(pooled);
      trace.attention.assign(k, 1.0 / static_cast<double>(k));
      break;
    }
    case PoolingKind::mean: {
      trace.inst_probs = instance_probs(emb, &trace.inst_logits);
      trace.head_prob = mean_pool(trace.inst_probs);
      trace.attention.assign(k, 1.0 / static_cast<double>(k));
      break;
    }
  }
}

double Model::loss_from_trace(const Trace& trace, int label,
                              std::vector<double>* d_seed) const {
  const bool fused = uses_attention(config_.pooling.kind) && !config_.classify_before_pool;
  if (fused) {
    const LossGrad lg = out_dim_ == 1
                            ? binary_ce_from_logit(trace.bag_logits[0], label)
                            : multiclass_ce_from_logits(trace.bag_logits, label);
    if (d_seed) *d_seed = lg.d_logits;
    return lg.loss;
  }
  std::vector<int> y;
  if (out_dim_ == 1) {
    y = {label};
  } else {
    y.assign(out_dim_, 0);
    y[static_cast<std::size_t>(label)] = 1;
  }
  const LossProbGrad lg = ce_on_probs(trace.head_prob, y);
  if (d_seed) *d_seed = lg.d_prob;
  return lg.loss;
}

void Model::backward_impl(const Matrix& instances, int label, Trace& trace) {
  std::vector<double> d_seed;
  loss_from_trace(trace, label, &d_seed);

  const Matrix& emb = trace.embeddings;
  const std::size_t k = emb.rows;
  Matrix d_emb(k, emb.cols, 0.0);
  const PoolingKind kind = config_.pooling.kind;

  if (uses_attention(kind) && !config_.classify_before_pool) {
    // head on the pooled embedding
    Matrix d_logits(1, out_dim_);
    std::copy(d_seed.begin(), d_seed.end(), d_logits.row(0));
    Matrix pooled(1, emb.cols);
    std::copy(trace.pooled_embedding.begin(), trace.pooled_embedding.end(), pooled.row(0));
    const Matrix d_pooled = affine_backward(d_logits, pooled, head_w_, head_b_);
    std::vector<double> d_pooled_vec(d_pooled.row(0), d_pooled.row(0) + d_pooled.cols);
    std::vector<double> d_a;
    weighted_pool_backward(d_pooled_vec, emb, trace.attention, d_emb, d_a);
    attention_weights_backward(d_a, emb, attn_, config_.pooling.temperature, trace.attn,
                               d_emb);
  } else {
    // gradient arrives in probability space at the pooled head
    Matrix d_inst_probs(k, out_dim_, 0.0);
    if (uses_attention(kind)) {
      std::vector<double> d_a;
      weighted_pool_backward(d_seed, trace.inst_probs, trace.attention, d_inst_probs, d_a);
      attention_weights_backward(d_a, emb, attn_, config_.pooling.temperature, trace.attn,
                                 d_emb);
    } else if (kind == PoolingKind::max) {
      std::vector<double> d_m = d_seed;
      if (out_dim_ > 1) {
        // through the renormalization p_j = m_j / S
        double dot = 0.0;
        for (std::size_t j = 0; j < out_dim_; ++j) dot += d_seed[j] * trace.head_prob[j];
        for (std::size_t j = 0; j < out_dim_; ++j) {
          d_m[j] = (d_seed[j] - dot) / trace.max_sum;
        }
      }
      max_pool_backward(d_m, trace.argmax, d_inst_probs);
    } else {
      mean_pool_backward(d_seed, d_inst_probs);
    }

    // through the per-instance output activation
    Matrix d_inst_logits;
    if (out_dim_ == 1) {
      d_inst_logits = sigmoid_backward(d_inst_probs, trace.inst_probs);
    } else {
      d_inst_logits = Matrix(k, out_dim_);
      std::vector<double> d_row(out_dim_), p_row(out_dim_);
      for (std::size_t i = 0; i < k; ++i) {
        std::copy(d_inst_probs.row(i), d_inst_probs.row(i) + out_dim_, d_row.begin());
        std::copy(trace.inst_probs.row(i), trace.inst_probs.row(i) + out_dim_, p_row.begin());
        const std::vector<double> d = softmax_vec_backward(d_row, p_row);
        std::copy(d.begin(), d.end(), d_inst_logits.row(i));
      }
    }
    const Matrix d_from_head = affine_backward(d_inst_logits, emb, head_w_, head_b_);
    for (std::size_t n = 0; n < d_emb.size(); ++n) d_emb.values[n] += d_from_head.values[n];
  }

  // backbone
  Matrix d = std::move(d_emb);
  for (std::size_t l = backbone_w_.size(); l-- > 0;) {
    if (!trace.drop_mask.empty()) {
      d = dropout_backward(d, trace.drop_mask[l]);
    }
    d = relu_backward(d, trace.relu_in[l]);
    d = affine_backward(d, trace.affine_in[l], backbone_w_[l], backbone_b_[l]);
  }
}

Prediction Model::forward(const Bag& bag) const {
  check_bag(bag, 0);
  Trace trace;
  forward_impl(bag.instances, false, nullptr, trace);

  Prediction out;
  out.bag_prob = expand_binary(trace.head_prob, config_.class_count);
  out.attention = trace.attention;
  // per-instance probabilities; diagnostic for the embedding-pool path
  out.instance_scores =
      trace.inst_probs.empty() ? instance_probs(trace.embeddings, nullptr)
                               : std::move(trace.inst_probs);
  return out;
}

double Model::bag_loss(const Bag& bag, int label, Rng rng) const {
  check_bag(bag, label);
  Trace trace;
  forward_impl(bag.instances, true, &rng, trace);
  return loss_from_trace(trace, label, nullptr);
}

double Model::bag_loss_grads(const Bag& bag, int label, Rng& rng) {
  check_bag(bag, label);
  Trace trace;
  forward_impl(bag.instances, true, &rng, trace);
  const double loss = loss_from_trace(trace, label, nullptr);
  if (!std::isfinite(loss)) {
    throw Error("model: non-finite loss on bag '" + bag.bag_id + "'");
  }
  backward_impl(bag.instances, label, trace);
  return loss;
}

Matrix Model::embed(const Matrix& instances) const {
  Matrix h = instances;
  for (std::size_t l = 0; l < backbone_w_.size(); ++l) {
    h = relu(affine(h, backbone_w_[l], backbone_b_[l]));
  }
  return h;
}

std::vector<double> Model::classify_embedding(const std::vector<double>& embedding) const {
  if (embedding.size() != config_.hidden.back()) {
    throw ShapeError("classify_embedding: length " + std::to_string(embedding.size()) +
                     " vs embedding width " + std::to_string(config_.hidden.back()));
  }
  Matrix e(1, embedding.size());
  std::copy(embedding.begin(), embedding.end(), e.row(0));
  const Matrix logits = affine(e, head_w_, head_b_);
  std::vector<double> head_prob;
  if (out_dim_ == 1) {
    head_prob = {sigmoid(logits)(0, 0)};
  } else {
    head_prob = softmax_vec(std::vector<double>(logits.row(0), logits.row(0) + logits.cols));
  }
  return expand_binary(head_prob, config_.class_count);
}

std::vector<double> train(Model& model, const std::vector<Bag>& bags,
                          const TrainConfig& config) {
  if (bags.empty()) throw DomainError("train: empty training set");
  if (config.epochs < 1) throw ConfigError("train: epochs must be >= 1");

  const std::vector<Param*> params = model.params();
  Optimizer optimizer(config.optimizer, params);
  Rng rng(config.seed);

  std::vector<std::size_t> order(bags.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> history;
  history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(order);
    double total = 0.0;
    for (std::size_t idx : order) {
      model.zero_grads();
      total += model.bag_loss_grads(bags[idx], bags[idx].label, rng);
      optimizer.step(params);
    }
    history.push_back(total / static_cast<double>(bags.size()));
  }
  return history;
}

int predict_class(const Prediction& prediction) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < prediction.bag_prob.size(); ++c) {
    if (prediction.bag_prob[c] > prediction.bag_prob[best]) best = c;
  }
  return static_cast<int>(best);
}

Metrics evaluate(const Model& model, const std::vector<Bag>& bags) {
  if (bags.empty()) throw DomainError("evaluate: empty evaluation set");
  std::vector<int> truth, predicted;
  truth.reserve(bags.size());
  predicted.reserve(bags.size());
  for (const Bag& bag : bags) {
    truth.push_back(bag.label);
    predicted.push_back(predict_class(model.forward(bag)));
  }
  return compute_metrics(truth, predicted, model.config().class_count);
}

std::vector<std::pair<std::size_t, double>> key_instances(const Model& model, const Bag& bag,
                                                          std::size_t top_m) {
  if (!uses_attention(model.config().pooling.kind)) {
    throw UnsupportedError("key_instances: model uses " +
                           to_string(model.config().pooling.kind) +
                           " pooling; attention weights are not defined");
  }
  if (top_m < 1 || top_m > bag.size()) {
    throw DomainError("key_instances: top_m " + std::to_string(top_m) +
                      " outside 1.." + std::to_string(bag.size()));
  }
  const Prediction pred = model.forward(bag);
  std::vector<std::pair<std::size_t, double>> ranked(bag.size());
  for (std::size_t i = 0; i < bag.size(); ++i) ranked[i] = {i, pred.attention[i]};
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  ranked.resize(top_m);
  return ranked;
}

// ---------------------------------------------------------------- persistence

namespace {

constexpr int kModelVersion = 1;

nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  return nlohmann::ordered_json{
      {"input_dim", c.input_dim},
      {"hidden", c.hidden},
      {"dropout_rate", c.dropout_rate},
      {"class_count", c.class_count},
      {"pooling",
       {{"kind", to_string(c.pooling.kind)},
        {"gated_hidden", c.pooling.gated_hidden},
        {"temperature", c.pooling.temperature}}},
      {"classify_before_pool", c.classify_before_pool},
      {"seed", c.seed},
  };
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.class_count = j.at("class_count").get<std::size_t>();
  c.pooling.kind = parse_pooling_kind(j.at("pooling").at("kind").get<std::string>());
  c.pooling.gated_hidden = j.at("pooling").at("gated_hidden").get<std::size_t>();
  c.pooling.temperature = j.at("pooling").at("temperature").get<double>();
  c.classify_before_pool = j.at("classify_before_pool").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& path,
                const NormStats* norm) {
  nlohmann::ordered_json j;
  j["format"] = "minet-model";
  j["version"] = kModelVersion;
  j["config"] = config_to_json(model.config());
  if (norm) {
    j["normalization"] = {{"mean", norm->mean}, {"stddev", norm->stddev}};
  }
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (const Param* p : model.params()) {
    params.push_back({{"name", p->name},
                      {"rows", p->value.rows},
                      {"cols", p->value.cols},
                      {"values", p->value.values}});
  }
  j["params"] = std::move(params);

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(1) << "\n";
  if (!out) throw IoError("failed while writing " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.filename().string() + ": invalid JSON: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "minet-model") {
      throw FormatError(path.filename().string() + ": not a model file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw FormatError(path.filename().string() + ": unsupported model version");
    }
    LoadedModel loaded{Model(config_from_json(j.at("config"))), std::nullopt};
    if (j.contains("normalization")) {
      NormStats stats;
      stats.mean = j["normalization"].at("mean").get<std::vector<double>>();
      stats.stddev = j["normalization"].at("stddev").get<std::vector<double>>();
      loaded.norm = std::move(stats);
    }

    std::map<std::string, Param*> by_name;
    for (Param* p : loaded.model.params()) by_name[p->name] = p;
    std::size_t filled = 0;
    for (const auto& pj : j.at("params")) {
      const std::string name = pj.at("name").get<std::string>();
      const auto it = by_name.find(name);
      if (it == by_name.end()) {
        throw FormatError(path.filename().string() + ": unknown param '" + name + "'");
      }
      Param& p = *it->second;
      if (pj.at("rows").get<std::size_t>() != p.value.rows ||
          pj.at("cols").get<std::size_t>() != p.value.cols) {
        throw FormatError(path.filename().string() + ": param '" + name +
                          "' shape mismatch");
      }
      p.value.values = pj.at("values").get<std::vector<double>>();
      if (p.value.values.size() != p.value.rows * p.value.cols) {
        throw FormatError(path.filename().string() + ": param '" + name +
                          "' value count mismatch");
      }
      ++filled;
    }
    if (filled != by_name.size()) {
      throw FormatError(path.filename().string() + ": missing params (" +
                        std::to_string(filled) + " of " + std::to_string(by_name.size()) +
                        ")");
    }
    return loaded;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.filename().string() + ": malformed model file: " + e.what());
  }
}

}  // namespace minet
