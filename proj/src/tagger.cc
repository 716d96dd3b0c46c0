#include "nerrep/tagger.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "nerrep/random.h"

namespace nerrep {
namespace {

using nlohmann::json;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

constexpr double kLayerNormEpsilon = 1e-5;
constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

struct LayerSlots {
  int ln1_gain, ln1_bias;
  int query_w, query_b, key_w, key_b, value_w, value_b, out_w, out_b;
  int ln2_gain, ln2_bias;
  int ffn_in_w, ffn_in_b, ffn_out_w, ffn_out_b;
};

struct ModelSlots {
  int token_embedding, position_embedding;
  std::vector<LayerSlots> layers;
  int final_gain, final_bias;
  int classifier_w, classifier_b;
};

ModelSlots IndexSlots(const Parameters& p) {
  ModelSlots s;
  s.token_embedding = p.Find("token_embedding");
  s.position_embedding = p.Find("position_embedding");
  for (int l = 0; l < p.config().layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    auto f = [&](const char* name) { return p.Find(prefix + name); };
    s.layers.push_back({f("ln1.gain"), f("ln1.bias"), f("attn.query.weight"),
                        f("attn.query.bias"), f("attn.key.weight"),
                        f("attn.key.bias"), f("attn.value.weight"),
                        f("attn.value.bias"), f("attn.output.weight"),
                        f("attn.output.bias"), f("ln2.gain"), f("ln2.bias"),
                        f("ffn.in.weight"), f("ffn.in.bias"),
                        f("ffn.out.weight"), f("ffn.out.bias")});
  }
  s.final_gain = p.Find("final_ln.gain");
  s.final_bias = p.Find("final_ln.bias");
  s.classifier_w = p.Find("classifier.weight");
  s.classifier_b = p.Find("classifier.bias");
  return s;
}

// Gradient buffer sharing the parameter layout.
class GradientView {
 public:
  GradientView(const Parameters& params, std::vector<double>& buffer)
      : params_(params), buffer_(buffer) {}

  MatrixMap Tensor(int slot) {
    const auto& s = params_.slots()[slot];
    return {buffer_.data() + s.offset, s.rows, s.cols};
  }

 private:
  const Parameters& params_;
  std::vector<double>& buffer_;
};

struct LayerNormCache {
  Matrix normalized;
  Eigen::VectorXd inverse_std;
};

Matrix LayerNormForward(const Matrix& x, ConstMatrixMap gain,
                        ConstMatrixMap bias, LayerNormCache& cache) {
  const Eigen::Index n = x.rows();
  const double d = static_cast<double>(x.cols());
  cache.normalized.resize(n, x.cols());
  cache.inverse_std.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = x.row(r).sum() / d;
    const RowVector centered = x.row(r).array() - mean;
    const double var = centered.squaredNorm() / d;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    cache.inverse_std(r) = inv;
    cache.normalized.row(r) = centered * inv;
  }
  Matrix y = cache.normalized.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

Matrix LayerNormBackward(const Matrix& dy, const LayerNormCache& cache,
                         ConstMatrixMap gain, MatrixMap dgain, MatrixMap dbias) {
  dgain.row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  const Matrix dnorm = dy.array().rowwise() * gain.row(0).array();
  const double d = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dnorm.row(r).sum() / d;
    const double mean_dx =
        dnorm.row(r).dot(cache.normalized.row(r)) / d;
    dx.row(r) = cache.inverse_std(r) *
                (dnorm.row(r).array() - mean_d -
                 cache.normalized.row(r).array() * mean_dx)
                    .matrix();
  }
  return dx;
}

Matrix DropoutMask(Eigen::Index rows, Eigen::Index cols, double rate,
                   Random& rng) {
  Matrix mask(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.Uniform() < rate ? 0.0 : keep;
  }
  return mask;
}

struct LayerCache {
  LayerNormCache ln1;
  Matrix h;  // ln1 output
  Matrix q, k, v;
  std::vector<Matrix> attention;  // per head, rows x rows
  Matrix concat;
  Matrix attn_mask;  // dropout, empty in evaluation
  LayerNormCache ln2;
  Matrix h2;
  Matrix pre_activation;
  Matrix activation;
  Matrix ffn_mask;
};

struct WindowCache {
  std::vector<int> positions;  // attention-visible positions
  std::vector<int> ids;
  std::vector<int> active;  // indices into positions that are classified
  Matrix embed_mask;
  std::vector<LayerCache> layers;
  LayerNormCache final_ln;
  Matrix hidden;  // final hidden states, rows = positions
};

void CollectRows(const Parameters& params, const EncodedWindow& w,
                 WindowCache& cache) {
  const ModelConfig& cfg = params.config();
  if (w.max_len() != cfg.max_len) {
    throw Error("window length " + std::to_string(w.max_len()) +
                " does not match model max_len " + std::to_string(cfg.max_len));
  }
  for (int i = 0; i < w.max_len(); ++i) {
    if (!w.attention_mask[i]) continue;
    const int id = w.subtoken_ids[i];
    if (id < 0 || id >= cfg.vocab_size) {
      throw Error("token id " + std::to_string(id) + " outside vocabulary");
    }
    if (w.classifier_mask[i]) {
      cache.active.push_back(static_cast<int>(cache.positions.size()));
    }
    cache.positions.push_back(i);
    cache.ids.push_back(id);
  }
}

inline double Gelu(double u) {
  return 0.5 * u * (1.0 + std::tanh(kGeluScale * (u + kGeluCubic * u * u * u)));
}

inline double GeluDerivative(double u) {
  const double t = std::tanh(kGeluScale * (u + kGeluCubic * u * u * u));
  return 0.5 * (1.0 + t) +
         0.5 * u * (1.0 - t * t) * kGeluScale * (1.0 + 3.0 * kGeluCubic * u * u);
}

// Runs the encoder over the attention-visible positions only. Positions
// outside the attention mask never enter any score, which equals giving
// them -inf before the softmax.
void EncodeWindow(const Parameters& params, const ModelSlots& slots,
                  const EncodedWindow& w, Random* dropout_rng,
                  WindowCache& cache) {
  const ModelConfig& cfg = params.config();
  CollectRows(params, w, cache);
  const auto n = static_cast<Eigen::Index>(cache.positions.size());
  const int dim = cfg.model_dim;
  const int head_dim = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const bool dropout = dropout_rng != nullptr && cfg.dropout > 0.0;

  const auto tokens = params.Tensor(slots.token_embedding);
  const auto pos = params.Tensor(slots.position_embedding);
  Matrix x(n, dim);
  for (Eigen::Index r = 0; r < n; ++r) {
    x.row(r) = tokens.row(cache.ids[r]) + pos.row(cache.positions[r]);
  }
  if (dropout) {
    cache.embed_mask = DropoutMask(n, dim, cfg.dropout, *dropout_rng);
    x.array() *= cache.embed_mask.array();
  }

  cache.layers.resize(cfg.layers);
  for (int l = 0; l < cfg.layers; ++l) {
    const LayerSlots& s = slots.layers[l];
    LayerCache& c = cache.layers[l];
    c.h = LayerNormForward(x, params.Tensor(s.ln1_gain),
                           params.Tensor(s.ln1_bias), c.ln1);
    c.q = c.h * params.Tensor(s.query_w);
    c.q.rowwise() += params.Tensor(s.query_b).row(0);
    c.k = c.h * params.Tensor(s.key_w);
    c.k.rowwise() += params.Tensor(s.key_b).row(0);
    c.v = c.h * params.Tensor(s.value_w);
    c.v.rowwise() += params.Tensor(s.value_b).row(0);

    c.attention.resize(cfg.heads);
    c.concat.resize(n, dim);
    for (int h = 0; h < cfg.heads; ++h) {
      const auto qh = c.q.middleCols(h * head_dim, head_dim);
      const auto kh = c.k.middleCols(h * head_dim, head_dim);
      Matrix scores = (qh * kh.transpose()) * scale;
      for (Eigen::Index r = 0; r < n; ++r) {
        const double m = scores.row(r).maxCoeff();
        scores.row(r) = (scores.row(r).array() - m).exp().matrix();
        scores.row(r) /= scores.row(r).sum();
      }
      c.concat.middleCols(h * head_dim, head_dim) =
          scores * c.v.middleCols(h * head_dim, head_dim);
      c.attention[h] = std::move(scores);
    }
    Matrix attn_out = c.concat * params.Tensor(s.out_w);
    attn_out.rowwise() += params.Tensor(s.out_b).row(0);
    if (dropout) {
      c.attn_mask = DropoutMask(n, dim, cfg.dropout, *dropout_rng);
      attn_out.array() *= c.attn_mask.array();
    }
    x += attn_out;

    c.h2 = LayerNormForward(x, params.Tensor(s.ln2_gain),
                            params.Tensor(s.ln2_bias), c.ln2);
    c.pre_activation = c.h2 * params.Tensor(s.ffn_in_w);
    c.pre_activation.rowwise() += params.Tensor(s.ffn_in_b).row(0);
    c.activation = c.pre_activation.unaryExpr([](double u) { return Gelu(u); });
    Matrix ffn_out = c.activation * params.Tensor(s.ffn_out_w);
    ffn_out.rowwise() += params.Tensor(s.ffn_out_b).row(0);
    if (dropout) {
      c.ffn_mask = DropoutMask(n, dim, cfg.dropout, *dropout_rng);
      ffn_out.array() *= c.ffn_mask.array();
    }
    x += ffn_out;
  }
  cache.hidden = LayerNormForward(x, params.Tensor(slots.final_gain),
                                  params.Tensor(slots.final_bias),
                                  cache.final_ln);
}

Matrix ActiveLogits(const Parameters& params, const ModelSlots& slots,
                    const WindowCache& cache) {
  Matrix active(cache.active.size(), params.config().model_dim);
  for (size_t i = 0; i < cache.active.size(); ++i) {
    active.row(i) = cache.hidden.row(cache.active[i]);
  }
  Matrix logits = active * params.Tensor(slots.classifier_w);
  logits.rowwise() += params.Tensor(slots.classifier_b).row(0);
  return logits;
}

// Backpropagates d(loss)/d(hidden) through the encoder into `grad`.
void BackwardWindow(const Parameters& params, const ModelSlots& slots,
                    const WindowCache& cache, Matrix dx, GradientView& grad) {
  const ModelConfig& cfg = params.config();
  const int head_dim = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  dx = LayerNormBackward(dx, cache.final_ln, params.Tensor(slots.final_gain),
                         grad.Tensor(slots.final_gain),
                         grad.Tensor(slots.final_bias));

  for (int l = cfg.layers - 1; l >= 0; --l) {
    const LayerSlots& s = slots.layers[l];
    const LayerCache& c = cache.layers[l];

    // Feed-forward branch.
    Matrix d_ffn = dx;
    if (c.ffn_mask.size() > 0) d_ffn.array() *= c.ffn_mask.array();
    grad.Tensor(s.ffn_out_w).noalias() += c.activation.transpose() * d_ffn;
    grad.Tensor(s.ffn_out_b).row(0) += d_ffn.colwise().sum();
    Matrix d_act = d_ffn * params.Tensor(s.ffn_out_w).transpose();
    d_act.array() *= c.pre_activation
                         .unaryExpr([](double u) { return GeluDerivative(u); })
                         .array();
    grad.Tensor(s.ffn_in_w).noalias() += c.h2.transpose() * d_act;
    grad.Tensor(s.ffn_in_b).row(0) += d_act.colwise().sum();
    const Matrix d_h2 = d_act * params.Tensor(s.ffn_in_w).transpose();
    dx += LayerNormBackward(d_h2, c.ln2, params.Tensor(s.ln2_gain),
                            grad.Tensor(s.ln2_gain), grad.Tensor(s.ln2_bias));

    // Attention branch.
    Matrix d_attn = dx;
    if (c.attn_mask.size() > 0) d_attn.array() *= c.attn_mask.array();
    grad.Tensor(s.out_w).noalias() += c.concat.transpose() * d_attn;
    grad.Tensor(s.out_b).row(0) += d_attn.colwise().sum();
    const Matrix d_concat = d_attn * params.Tensor(s.out_w).transpose();

    Matrix dq(c.q.rows(), c.q.cols()), dk(c.k.rows(), c.k.cols()),
        dv(c.v.rows(), c.v.cols());
    for (int h = 0; h < cfg.heads; ++h) {
      const Matrix& a = c.attention[h];
      const auto d_out = d_concat.middleCols(h * head_dim, head_dim);
      dv.middleCols(h * head_dim, head_dim) = a.transpose() * d_out;
      const Matrix d_a = d_out * c.v.middleCols(h * head_dim, head_dim).transpose();
      Matrix d_scores = a.array() *
                        (d_a.array().colwise() -
                         (d_a.array() * a.array()).rowwise().sum());
      d_scores *= scale;
      dq.middleCols(h * head_dim, head_dim) =
          d_scores * c.k.middleCols(h * head_dim, head_dim);
      dk.middleCols(h * head_dim, head_dim) =
          d_scores.transpose() * c.q.middleCols(h * head_dim, head_dim);
    }
    grad.Tensor(s.query_w).noalias() += c.h.transpose() * dq;
    grad.Tensor(s.query_b).row(0) += dq.colwise().sum();
    grad.Tensor(s.key_w).noalias() += c.h.transpose() * dk;
    grad.Tensor(s.key_b).row(0) += dk.colwise().sum();
    grad.Tensor(s.value_w).noalias() += c.h.transpose() * dv;
    grad.Tensor(s.value_b).row(0) += dv.colwise().sum();
    Matrix d_h = dq * params.Tensor(s.query_w).transpose();
    d_h.noalias() += dk * params.Tensor(s.key_w).transpose();
    d_h.noalias() += dv * params.Tensor(s.value_w).transpose();
    dx += LayerNormBackward(d_h, c.ln1, params.Tensor(s.ln1_gain),
                            grad.Tensor(s.ln1_gain), grad.Tensor(s.ln1_bias));
  }

  if (cache.embed_mask.size() > 0) dx.array() *= cache.embed_mask.array();
  auto d_tokens = grad.Tensor(slots.token_embedding);
  auto d_pos = grad.Tensor(slots.position_embedding);
  for (Eigen::Index r = 0; r < dx.rows(); ++r) {
    d_tokens.row(cache.ids[r]) += dx.row(r);
    d_pos.row(cache.positions[r]) += dx.row(r);
  }
}

void AddSlot(std::vector<TensorSlot>& slots, size_t& offset, std::string name,
             int rows, int cols, bool decay) {
  slots.push_back({std::move(name), rows, cols, offset, decay});
  offset += static_cast<size_t>(rows) * cols;
}

json ConfigToJson(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"label_count", c.label_count},
          {"model_dim", c.model_dim},   {"heads", c.heads},
          {"layers", c.layers},         {"ffn_dim", c.ffn_dim},
          {"max_len", c.max_len},       {"dropout", c.dropout},
          {"seed", c.seed}};
}

ModelConfig ConfigFromJson(const json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.label_count = j.at("label_count").get<int>();
  c.model_dim = j.at("model_dim").get<int>();
  c.heads = j.at("heads").get<int>();
  c.layers = j.at("layers").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

}  // namespace

void ModelConfig::Validate() const {
  if (vocab_size <= 0 || label_count <= 0 || model_dim <= 0 || heads <= 0 ||
      layers <= 0 || max_len <= 0 || ffn_dim < 0) {
    throw Error("model sizes must be positive");
  }
  if (model_dim % heads != 0) {
    throw Error("model_dim must be divisible by heads");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw Error("dropout must lie in [0, 1)");
  }
}

void TrainConfig::Validate() const {
  if (epochs <= 0 || batch_size <= 0) {
    throw Error("epochs and batch_size must be positive");
  }
  if (learning_rate < 0.0 || weight_decay < 0.0) {
    throw Error("learning_rate and weight_decay must be non-negative");
  }
}

Parameters::Parameters(const ModelConfig& config) : config_(config) {
  config_.Validate();
  const int d = config_.model_dim;
  const int f = config_.hidden_dim();
  size_t offset = 0;
  AddSlot(slots_, offset, "token_embedding", config_.vocab_size, d, true);
  AddSlot(slots_, offset, "position_embedding", config_.max_len, d, true);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    AddSlot(slots_, offset, p + "ln1.gain", 1, d, false);
    AddSlot(slots_, offset, p + "ln1.bias", 1, d, false);
    for (const char* proj : {"query", "key", "value", "output"}) {
      AddSlot(slots_, offset, p + "attn." + proj + ".weight", d, d, true);
      AddSlot(slots_, offset, p + "attn." + proj + ".bias", 1, d, false);
    }
    AddSlot(slots_, offset, p + "ln2.gain", 1, d, false);
    AddSlot(slots_, offset, p + "ln2.bias", 1, d, false);
    AddSlot(slots_, offset, p + "ffn.in.weight", d, f, true);
    AddSlot(slots_, offset, p + "ffn.in.bias", 1, f, false);
    AddSlot(slots_, offset, p + "ffn.out.weight", f, d, true);
    AddSlot(slots_, offset, p + "ffn.out.bias", 1, d, false);
  }
  AddSlot(slots_, offset, "final_ln.gain", 1, d, false);
  AddSlot(slots_, offset, "final_ln.bias", 1, d, false);
  AddSlot(slots_, offset, "classifier.weight", d, config_.label_count, true);
  AddSlot(slots_, offset, "classifier.bias", 1, config_.label_count, false);
  values_.assign(offset, 0.0);
}

int Parameters::Find(const std::string& name) const {
  for (size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Parameters InitParameters(const ModelConfig& config) {
  Parameters params(config);
  Random rng(config.seed);
  const double residual_scale = 1.0 / std::sqrt(2.0 * config.layers);
  for (size_t i = 0; i < params.slots().size(); ++i) {
    const TensorSlot& slot = params.slots()[i];
    auto t = params.Tensor(static_cast<int>(i));
    const bool gain = slot.name.ends_with(".gain");
    const bool bias = slot.name.ends_with(".bias");
    if (gain) {
      t.setOnes();
    } else if (bias) {
      t.setZero();
    } else {
      double stddev = slot.name.ends_with("embedding")
                          ? 0.1
                          : 1.0 / std::sqrt(static_cast<double>(slot.rows));
      if (slot.name.ends_with("attn.output.weight") ||
          slot.name.ends_with("ffn.out.weight")) {
        stddev *= residual_scale;
      }
      for (Eigen::Index k = 0; k < t.size(); ++k) {
        t.data()[k] = stddev * rng.Normal();
      }
    }
  }
  return params;
}

std::vector<Matrix> Forward(const Parameters& params,
                            std::span<const EncodedWindow> windows) {
  const ModelSlots slots = IndexSlots(params);
  std::vector<Matrix> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    WindowCache cache;
    EncodeWindow(params, slots, w, nullptr, cache);
    out.push_back(ActiveLogits(params, slots, cache));
  }
  return out;
}

LossResult ComputeLoss(const Parameters& params,
                       std::span<const EncodedWindow> windows,
                       const LossOptions& options) {
  const ModelConfig& cfg = params.config();
  const ModelSlots slots = IndexSlots(params);
  LossResult result;
  for (const auto& w : windows) {
    for (int i = 0; i < w.max_len(); ++i) {
      if (w.classifier_mask[i]) ++result.active_count;
    }
  }
  if (result.active_count == 0) {
    throw Error("batch has no classifier-active positions");
  }
  const double norm = 1.0 / result.active_count;
  if (options.compute_gradient) result.gradient.assign(params.size(), 0.0);
  GradientView grad(params, result.gradient);

  double total = 0.0;
  for (size_t wi = 0; wi < windows.size(); ++wi) {
    const EncodedWindow& w = windows[wi];
    WindowCache cache;
    Random rng = Random::Derive(options.dropout_seed,
                                (options.step << 20) ^ static_cast<uint64_t>(wi));
    EncodeWindow(params, slots, w, options.training ? &rng : nullptr, cache);
    const Matrix logits = ActiveLogits(params, slots, cache);

    Matrix d_logits(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      const int label = w.label_ids[cache.positions[cache.active[r]]];
      if (label < 0 || label >= cfg.label_count) {
        throw Error("label id " + std::to_string(label) +
                    " outside label set at a classifier-active position");
      }
      const double m = logits.row(r).maxCoeff();
      const RowVector e = (logits.row(r).array() - m).exp().matrix();
      const double sum = e.sum();
      total += std::log(sum) + m - logits(r, label);
      d_logits.row(r) = e / sum;
      d_logits(r, label) -= 1.0;
    }
    if (!options.compute_gradient) continue;
    d_logits *= norm;

    Matrix active(cache.active.size(), cfg.model_dim);
    for (size_t i = 0; i < cache.active.size(); ++i) {
      active.row(i) = cache.hidden.row(cache.active[i]);
    }
    grad.Tensor(slots.classifier_w).noalias() += active.transpose() * d_logits;
    grad.Tensor(slots.classifier_b).row(0) += d_logits.colwise().sum();
    const Matrix d_active =
        d_logits * params.Tensor(slots.classifier_w).transpose();
    Matrix d_hidden = Matrix::Zero(cache.hidden.rows(), cfg.model_dim);
    for (size_t i = 0; i < cache.active.size(); ++i) {
      d_hidden.row(cache.active[i]) = d_active.row(i);
    }
    if (options.keep_classifier_input_gradients) {
      Matrix full = Matrix::Zero(w.max_len(), cfg.model_dim);
      for (size_t r = 0; r < cache.positions.size(); ++r) {
        full.row(cache.positions[r]) = d_hidden.row(r);
      }
      result.classifier_input_gradients.push_back(std::move(full));
    }
    BackwardWindow(params, slots, cache, std::move(d_hidden), grad);
  }
  result.loss = total * norm;
  return result;
}

TrainReport Train(Parameters& params, const std::vector<EncodedWindow>& windows,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.Validate();
  std::vector<size_t> order;
  for (size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].active_count() > 0) order.push_back(i);
  }
  if (order.empty()) throw Error("no trainable windows");

  const size_t batches_per_epoch =
      (order.size() + config.batch_size - 1) / config.batch_size;
  const auto total_steps =
      static_cast<int64_t>(batches_per_epoch) * config.epochs;
  std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0);
  std::vector<uint8_t> decay(params.size(), 0);
  for (const auto& slot : params.slots()) {
    std::fill_n(decay.begin() + slot.offset, slot.size(), slot.decay ? 1 : 0);
  }

  TrainReport report;
  std::vector<EncodedWindow> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Random shuffle_rng = Random::Derive(config.seed, 0x5eed0000ULL + epoch);
    shuffle_rng.Shuffle(order);
    double epoch_total = 0.0;
    for (size_t b = 0; b < batches_per_epoch; ++b) {
      batch.clear();
      const size_t end = std::min(order.size(), (b + 1) * config.batch_size);
      for (size_t i = b * config.batch_size; i < end; ++i) {
        batch.push_back(windows[order[i]]);
      }
      LossOptions options;
      options.training = true;
      options.dropout_seed = config.seed;
      options.step = static_cast<uint64_t>(report.steps);
      const LossResult r = ComputeLoss(params, batch, options);
      epoch_total += r.loss;

      // Linear decay from the base rate to zero, no warmup.
      const double lr =
          config.learning_rate *
          (1.0 - static_cast<double>(report.steps) / static_cast<double>(total_steps));
      ++report.steps;
      const double t = static_cast<double>(report.steps);
      const double c1 = 1.0 - std::pow(config.beta1, t);
      const double c2 = 1.0 - std::pow(config.beta2, t);
      auto& p = params.values();
      for (size_t i = 0; i < p.size(); ++i) {
        const double g = r.gradient[i];
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
        const double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + config.epsilon);
        p[i] -= lr * (update + (decay[i] ? config.weight_decay * p[i] : 0.0));
      }
    }
    const double mean = epoch_total / static_cast<double>(batches_per_epoch);
    report.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  report.final_loss = report.epoch_losses.back();
  return report;
}

std::vector<std::vector<int>> PredictLabelIds(
    const Parameters& params, std::span<const EncodedWindow> windows) {
  std::vector<std::vector<int>> out;
  out.reserve(windows.size());
  for (const auto& logits : Forward(params, windows)) {
    std::vector<int> ids(logits.rows());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < logits.cols(); ++c) {
        if (logits(r, c) > logits(r, best)) best = c;
      }
      ids[r] = static_cast<int>(best);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

std::vector<std::vector<Annotation>> PredictDocument(
    const Parameters& params, const Document& document,
    const PackerConfig& packer, const SubwordVocabulary& vocab,
    const LabelVocabulary& labels) {
  if (packer.strategy == Strategy::kUnion) {
    throw Error("union packing is for training only");
  }
  if (labels.size() != params.config().label_count) {
    throw Error("label vocabulary does not match the model");
  }
  // Gold annotations are irrelevant to prediction; pack the bare text.
  Document text = document;
  for (auto& s : text.sentences) s.annotations.clear();
  const auto windows = PackDocument(text, packer, vocab, labels);
  const auto predicted = PredictLabelIds(params, windows);

  std::vector<std::vector<std::string>> word_labels(document.sentences.size());
  for (size_t s = 0; s < document.sentences.size(); ++s) {
    word_labels[s].assign(document.sentences[s].tokens.size(), "O");
  }
  for (size_t w = 0; w < windows.size(); ++w) {
    for (size_t i = 0; i < windows[w].provenance.size(); ++i) {
      const WordRef& ref = windows[w].provenance[i];
      word_labels[ref.sentence][ref.word] = labels.label(predicted[w][i]);
    }
  }
  std::vector<std::vector<Annotation>> out;
  out.reserve(word_labels.size());
  for (const auto& sentence_labels : word_labels) {
    out.push_back(DecodeLabels(sentence_labels));
  }
  return out;
}

Dataset PredictDataset(const Parameters& params, const Dataset& dataset,
                       const PackerConfig& packer,
                       const SubwordVocabulary& vocab,
                       const LabelVocabulary& labels) {
  std::vector<Document> documents;
  documents.reserve(dataset.documents.size());
  for (const auto& doc : dataset.documents) {
    Document predicted = doc;
    auto spans = PredictDocument(params, doc, packer, vocab, labels);
    for (size_t s = 0; s < predicted.sentences.size(); ++s) {
      predicted.sentences[s].annotations = std::move(spans[s]);
    }
    documents.push_back(std::move(predicted));
  }
  return Dataset::FromDocuments(std::move(documents));
}

void SaveCheckpoint(const Checkpoint& checkpoint, std::ostream& out) {
  const Parameters& params = checkpoint.params;
  json j;
  j["format"] = "nerrep-checkpoint";
  j["version"] = 1;
  j["config"] = ConfigToJson(params.config());
  j["tensors"] = json::array();
  for (size_t i = 0; i < params.slots().size(); ++i) {
    const TensorSlot& slot = params.slots()[i];
    std::vector<double> data(params.values().begin() + slot.offset,
                             params.values().begin() + slot.offset + slot.size());
    j["tensors"].push_back(
        {{"name", slot.name}, {"shape", {slot.rows, slot.cols}}, {"data", data}});
  }
  j["vocabulary"] = checkpoint.vocab_pieces;
  j["continuation_marker"] = checkpoint.continuation_marker;
  j["labels"] = checkpoint.labels;
  j["packer"] = {{"max_len", checkpoint.packer.max_len},
                 {"context_budget_fraction",
                  checkpoint.packer.context_budget_fraction},
                 {"strategy", std::string(StrategyName(checkpoint.packer.strategy))}};
  out << j.dump() << '\n';
}

Checkpoint LoadCheckpoint(std::istream& in) {
  try {
    json j;
    in >> j;
    if (j.at("format") != "nerrep-checkpoint") {
      throw Error("not a checkpoint");
    }
    Checkpoint ckpt;
    ckpt.params = Parameters(ConfigFromJson(j.at("config")));
    Parameters& params = ckpt.params;
    const auto& tensors = j.at("tensors");
    if (tensors.size() != params.slots().size()) {
      throw Error("checkpoint tensor count does not match its config");
    }
    for (size_t i = 0; i < tensors.size(); ++i) {
      const TensorSlot& slot = params.slots()[i];
      const auto data = tensors[i].at("data").get<std::vector<double>>();
      if (tensors[i].at("name") != slot.name || data.size() != slot.size()) {
        throw Error("checkpoint tensor '" + slot.name + "' malformed");
      }
      std::copy(data.begin(), data.end(), params.values().begin() + slot.offset);
    }
    ckpt.vocab_pieces = j.value("vocabulary", std::vector<std::string>{});
    ckpt.continuation_marker = j.value("continuation_marker", std::string("##"));
    ckpt.labels = j.value("labels", std::vector<std::string>{});
    if (j.contains("packer")) {
      ckpt.packer.max_len = j["packer"].at("max_len").get<int>();
      ckpt.packer.context_budget_fraction =
          j["packer"].at("context_budget_fraction").get<double>();
      ckpt.packer.strategy = ParseStrategy(
          j["packer"].value("strategy", std::string("single")));
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace nerrep
