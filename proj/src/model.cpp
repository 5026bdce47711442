#include "rfdae/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfdae/activations.hpp"
#include "rfdae/errors.hpp"

namespace rfdae {

namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

constexpr double kMinProbability = 1e-12;

}  // namespace

const char* to_string(FeatureTransform t) {
  switch (t) {
    case FeatureTransform::kNone: return "none";
    case FeatureTransform::kAmpPhase: return "amp-phase";
  }
  return "unknown";
}

FeatureTransform feature_transform_from_string(const std::string& name) {
  if (name == "none") return FeatureTransform::kNone;
  if (name == "amp-phase") return FeatureTransform::kAmpPhase;
  throw ConfigError("unknown feature transform '" + name + "' (expected none or amp-phase)");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (input_features == 0) fail("input_features must be positive");
  if (seq_len == 0) fail("seq_len must be positive");
  if (hidden == 0) fail("hidden must be positive");
  if (encoder_depth == 0) fail("encoder_depth must be positive");
  if (classifier_hidden[0] == 0 || classifier_hidden[1] == 0) fail("classifier widths must be positive");
  if (num_classes < 2) fail("num_classes must be at least 2");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must be in [0, 1]");
  if (!(mask_rate >= 0.0 && mask_rate < 1.0)) fail("mask_rate must be in [0, 1)");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (transform == FeatureTransform::kAmpPhase && input_features != 2) {
    fail("amp-phase transform needs 2 input features");
  }
}

DaeModel DaeModel::zeros(const ModelConfig& config) {
  config.validate();
  DaeModel m;
  m.config = config;
  m.encoder = LstmStack(config.input_features, config.hidden, config.encoder_depth);
  m.decoder = DenseLayer(config.hidden, config.input_features, Activation::kNone);
  m.clf1 = DenseLayer(config.hidden, config.classifier_hidden[0], Activation::kRelu);
  m.clf2 = DenseLayer(config.classifier_hidden[0], config.classifier_hidden[1], Activation::kRelu);
  m.clf3 = DenseLayer(config.classifier_hidden[1], config.num_classes,
                      config.final_relu ? Activation::kRelu : Activation::kNone);
  return m;
}

DaeModel DaeModel::create(const ModelConfig& config, Rng& rng) {
  DaeModel m = zeros(config);
  m.encoder.init_uniform(rng);
  m.decoder.init_uniform(rng);
  m.clf1.init_uniform(rng);
  m.clf2.init_uniform(rng);
  m.clf3.init_uniform(rng);
  return m;
}

std::size_t DaeModel::parameter_count() const {
  std::size_t total = 0;
  for_each_tensor([&](const std::string&, std::span<const double> v, TensorShape) {
    total += v.size();
  });
  return total;
}

ModelGradients::ModelGradients(const DaeModel& model)
    : encoder(zero_grads(model.encoder)),
      decoder(model.decoder),
      clf1(model.clf1),
      clf2(model.clf2),
      clf3(model.clf3) {}

void ModelGradients::set_zero() {
  for_each_tensor([](const std::string&, std::span<double> v, TensorShape) {
    std::fill(v.begin(), v.end(), 0.0);
  });
}

void ModelGradients::add(const ModelGradients& other) {
  std::vector<std::span<const double>> src;
  other.for_each_tensor([&](const std::string&, std::span<const double> v, TensorShape) {
    src.push_back(v);
  });
  std::size_t t = 0;
  for_each_tensor([&](const std::string& name, std::span<double> v, TensorShape) {
    if (t >= src.size() || src[t].size() != v.size()) {
      throw ShapeError("gradient add: layout mismatch at " + name);
    }
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += src[t][i];
    ++t;
  });
}

void ModelGradients::scale(double factor) {
  for_each_tensor([&](const std::string&, std::span<double> v, TensorShape) {
    for (double& x : v) x *= factor;
  });
}

double ModelGradients::squared_norm() const {
  double total = 0.0;
  for_each_tensor([&](const std::string&, std::span<const double> v, TensorShape) {
    for (double x : v) total += x * x;
  });
  return total;
}

CorruptResult corrupt(const Matrix& x, double mask_rate, Rng& rng) {
  if (!(mask_rate >= 0.0 && mask_rate < 1.0)) {
    throw ConfigError("mask_rate must be in [0, 1), got " + std::to_string(mask_rate));
  }
  CorruptResult out{x, Matrix(x.rows(), x.cols())};
  const std::size_t total = x.size();
  const auto count = static_cast<std::size_t>(std::llround(mask_rate * static_cast<double>(total)));
  if (count == 0) return out;
  // Partial Fisher-Yates: the first `count` slots become a uniform sample without replacement.
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(total - k));
    std::swap(idx[k], idx[j]);
    out.x_tilde.data()[idx[k]] = 0.0;
    out.mask.data()[idx[k]] = 1.0;
  }
  return out;
}

namespace {

void check_input(const DaeModel& model, const Matrix& x) {
  if (x.cols() != model.config.input_features) {
    throw ShapeError("model input " + x.shape_string() + " but model expects " +
                     std::to_string(model.config.input_features) + " features");
  }
  if (x.rows() == 0) throw ShapeError("model input has no timesteps");
}

// x_hat_j = W_dec h_j + b_dec for every row j.
Matrix decode(const DenseLayer& dec, const Matrix& h_seq) {
  Matrix x_hat(h_seq.rows(), dec.out_features());
  for (std::size_t j = 0; j < h_seq.rows(); ++j) {
    auto row = x_hat.row(j);
    std::copy(dec.bias.begin(), dec.bias.end(), row.begin());
    kernels::gemv_acc(dec.weight.data(), dec.weight.rows(), dec.weight.cols(), h_seq.row(j).data(),
                      row.data());
  }
  return x_hat;
}

}  // namespace

ForwardResult forward(const DaeModel& model, const Matrix& x_input, Mode mode, Rng& rng,
                      ModelCache* cache) {
  check_input(model, x_input);
  const DropoutSpec dropout{model.config.dropout_rate, mode};

  LstmStackCache* enc_cache = cache != nullptr ? &cache->encoder : nullptr;
  if (cache != nullptr) cache->valid = false;
  SequenceOutput enc = sequence_forward(model.encoder, x_input, dropout, rng, enc_cache);

  ForwardResult out;
  out.x_hat = decode(model.decoder, enc.h_seq);

  DenseCache* c1 = cache != nullptr ? &cache->clf1 : nullptr;
  DenseCache* c2 = cache != nullptr ? &cache->clf2 : nullptr;
  DenseCache* c3 = cache != nullptr ? &cache->clf3 : nullptr;

  Vector a1 = dense_forward(model.clf1, enc.h_n, c1);
  Vector m1(a1.size(), 1.0);
  if (dropout.active()) dropout_inplace(dropout, a1.span(), m1.span(), rng);
  Vector a2 = dense_forward(model.clf2, a1, c2);
  Vector m2(a2.size(), 1.0);
  if (dropout.active()) dropout_inplace(dropout, a2.span(), m2.span(), rng);
  out.logits = dense_forward(model.clf3, a2, c3);
  out.probs = softmax(out.logits);
  require_finite(out.x_hat.span(), "reconstruction");

  if (cache != nullptr) {
    cache->h_seq = std::move(enc.h_seq);
    cache->clf1_mask = std::move(m1);
    cache->clf2_mask = std::move(m2);
    cache->dropout = dropout;
    cache->result = out;
    cache->valid = true;
  }
  return out;
}

ForwardResult predict(const DaeModel& model, const Matrix& x) {
  Rng unused(0);
  return forward(model, x, Mode::kEval, unused, nullptr);
}

LossBreakdown loss(const Matrix& x_clean, const Matrix& x_hat, std::size_t label,
                   const Vector& probs, double lambda) {
  if (x_clean.rows() != x_hat.rows() || x_clean.cols() != x_hat.cols()) {
    throw ShapeError("loss: clean " + x_clean.shape_string() + " vs reconstruction " +
                     x_hat.shape_string());
  }
  if (label >= probs.size()) {
    throw ShapeError("loss: label " + std::to_string(label) + " out of range for " +
                     std::to_string(probs.size()) + " classes");
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < x_clean.size(); ++i) {
    const double d = x_clean.data()[i] - x_hat.data()[i];
    sse += d * d;
  }
  LossBreakdown out;
  out.lambda = lambda;
  out.recon = sse / static_cast<double>(x_clean.size());
  double p = probs[label];
  if (!(p >= kMinProbability)) {
    p = kMinProbability;
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
  }
  out.clf = -std::log(p);
  out.total = (1.0 - lambda) * out.recon + lambda * out.clf;
  return out;
}

std::uint64_t probability_clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }

void backward_acc(const DaeModel& model, const ModelCache& cache, const Matrix& x_clean,
                  std::size_t label, double lambda, ModelGradients& grads) {
  if (!cache.valid) throw StateError("model backward called without a cached forward pass");
  const Matrix& x_hat = cache.result.x_hat;
  if (x_clean.rows() != x_hat.rows() || x_clean.cols() != x_hat.cols()) {
    throw ShapeError("backward: clean " + x_clean.shape_string() + " vs reconstruction " +
                     x_hat.shape_string());
  }
  const std::size_t num_classes = cache.result.probs.size();
  if (label >= num_classes) throw ShapeError("backward: label out of range");

  const std::size_t n = x_hat.rows();
  const std::size_t m = x_hat.cols();
  const std::size_t hid = model.config.hidden;

  // Classifier branch: d total / d logits = lambda * (p - onehot).
  Vector d_logits(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    d_logits[k] = lambda * (cache.result.probs[k] - (k == label ? 1.0 : 0.0));
  }
  Vector d_a2 = dense_backward_acc(model.clf3, cache.clf3, d_logits, grads.clf3);
  dropout_backward_inplace(cache.dropout, d_a2.span(), cache.clf2_mask.span());
  Vector d_a1 = dense_backward_acc(model.clf2, cache.clf2, d_a2, grads.clf2);
  dropout_backward_inplace(cache.dropout, d_a1.span(), cache.clf1_mask.span());
  Vector d_hn = dense_backward_acc(model.clf1, cache.clf1, d_a1, grads.clf1);

  // Decoder branch: d total / d x_hat = (1 - lambda) * 2 (x_hat - x) / (n m).
  Matrix d_h_seq(n, hid);
  const double scale = (1.0 - lambda) * 2.0 / static_cast<double>(n * m);
  std::vector<double> d_xhat(m);
  const DenseLayer& dec = model.decoder;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t d = 0; d < m; ++d) d_xhat[d] = scale * (x_hat(j, d) - x_clean(j, d));
    for (std::size_t d = 0; d < m; ++d) grads.decoder.bias[d] += d_xhat[d];
    kernels::outer_acc(grads.decoder.weight.data(), m, hid, d_xhat.data(), cache.h_seq.row(j).data());
    kernels::gemv_t_acc(dec.weight.data(), m, hid, d_xhat.data(), d_h_seq.row(j).data());
  }

  // The classifier reads only h_n, the last row of the encoder output.
  auto last = d_h_seq.row(n - 1);
  for (std::size_t k = 0; k < hid; ++k) last[k] += d_hn[k];

  sequence_backward_acc(model.encoder, cache.encoder, d_h_seq, grads.encoder, nullptr);
}

ModelGradients backward(const DaeModel& model, const ModelCache& cache, const Matrix& x_clean,
                        std::size_t label, double lambda) {
  ModelGradients grads(model);
  backward_acc(model, cache, x_clean, label, lambda, grads);
  return grads;
}

std::size_t count_params(const ModelConfig& config) {
  config.validate();
  const std::size_t h = config.hidden;
  const std::size_t m = config.input_features;
  std::size_t total = 0;
  for (std::size_t l = 0; l < config.encoder_depth; ++l) {
    const std::size_t in = l == 0 ? m : h;
    total += 4 * (h * (in + h) + h);
  }
  total += h * m + m;
  const std::size_t widths[] = {h, config.classifier_hidden[0], config.classifier_hidden[1],
                                config.num_classes};
  for (std::size_t i = 0; i + 1 < 4; ++i) total += widths[i] * widths[i + 1] + widths[i + 1];
  return total;
}

FlopCount count_flops(const ModelConfig& config) {
  config.validate();
  const std::uint64_t n = config.seq_len;
  const std::uint64_t h = config.hidden;
  const std::uint64_t m = config.input_features;
  FlopCount f;
  for (std::size_t l = 0; l < config.encoder_depth; ++l) {
    const std::uint64_t in = l == 0 ? m : h;
    // 4 gates of MACs, 4H bias adds, 4H gate nonlinearities, 3H for c, H tanh(c), H for h.
    const std::uint64_t per_step = 2 * 4 * h * (in + h) + 4 * h + 4 * h + 3 * h + h + h;
    f.encoder += per_step * n;
  }
  f.decoder = (2 * h * m + m) * n;
  auto dense = [](std::uint64_t in, std::uint64_t out, bool relu) {
    return 2 * in * out + out + (relu ? out : 0);
  };
  const std::uint64_t w1 = config.classifier_hidden[0];
  const std::uint64_t w2 = config.classifier_hidden[1];
  const std::uint64_t k = config.num_classes;
  f.classifier = dense(h, w1, true) + dense(w1, w2, true) + dense(w2, k, config.final_relu) + 3 * k;
  f.total = f.encoder + f.decoder + f.classifier;
  return f;
}

}  // namespace rfdae
