#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "rfdae/dense.hpp"
#include "rfdae/dropout.hpp"
#include "rfdae/lstm.hpp"
#include "rfdae/matrix.hpp"
#include "rfdae/rng.hpp"

namespace rfdae {

// How raw dataset features are mapped before they reach the encoder.
enum class FeatureTransform : std::uint32_t {
  kNone = 0,      // features used as stored (PSD sweeps, pre-normalized data)
  kAmpPhase = 1,  // IQ pairs -> L2-normalized amplitude and phase / pi
};

const char* to_string(FeatureTransform t);
FeatureTransform feature_transform_from_string(const std::string& name);

struct ModelConfig {
  std::size_t input_features = 2;  // m
  std::size_t seq_len = 128;       // n
  std::size_t hidden = 32;         // H
  std::size_t encoder_depth = 2;
  std::array<std::size_t, 2> classifier_hidden{32, 16};
  std::size_t num_classes = 11;    // K
  bool final_relu = true;          // ReLU on the last classifier layer before softmax
  double lambda = 0.1;             // weight of the classification loss
  double mask_rate = 0.1;          // fraction of input entries zeroed during training
  double dropout_rate = 0.2;
  FeatureTransform transform = FeatureTransform::kAmpPhase;

  // Throws ConfigError on out-of-range values.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// LSTM encoder, one decoder layer shared across timesteps, and a 3-layer classifier on h_n.
struct DaeModel {
  ModelConfig config;
  LstmStack encoder;
  DenseLayer decoder;  // H -> m, linear
  DenseLayer clf1;     // H -> 32, ReLU
  DenseLayer clf2;     // 32 -> 16, ReLU
  DenseLayer clf3;     // 16 -> K, ReLU or linear per config.final_relu

  // Random initialization drawn from `rng` (see LstmCellParams::init_uniform and
  // DenseLayer::init_uniform).
  static DaeModel create(const ModelConfig& config, Rng& rng);
  // All parameters zero.
  static DaeModel zeros(const ModelConfig& config);

  std::size_t parameter_count() const;

  // Visits all tensors in checkpoint order: encoder layers (W_i, U_i, b_i, W_o, ...),
  // decoder W, b, then clf1..clf3 W, b. fn(name, span, TensorShape).
  template <typename Fn>
  void for_each_tensor(Fn&& fn);
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const;
};

struct ModelGradients {
  LstmStackGrads encoder;
  DenseGrads decoder, clf1, clf2, clf3;

  ModelGradients() = default;
  explicit ModelGradients(const DaeModel& model);

  void set_zero();
  void add(const ModelGradients& other);
  void scale(double factor);
  double squared_norm() const;

  template <typename Fn>
  void for_each_tensor(Fn&& fn);
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const;
};

struct CorruptResult {
  Matrix x_tilde;
  Matrix mask;  // 1 where the entry was zeroed
};

// Zeroes exactly round(mask_rate * n * m) entries chosen uniformly without replacement.
CorruptResult corrupt(const Matrix& x, double mask_rate, Rng& rng);

struct ForwardResult {
  Matrix x_hat;  // n x m reconstruction
  Vector logits;
  Vector probs;
};

struct ModelCache {
  LstmStackCache encoder;
  Matrix h_seq;
  DenseCache clf1, clf2, clf3;
  Vector clf1_mask, clf2_mask;
  DropoutSpec dropout;
  ForwardResult result;
  bool valid = false;
};

// Train mode applies dropout (the caller passes the corrupted input); Eval mode is a pure
// function of weights and input.
ForwardResult forward(const DaeModel& model, const Matrix& x_input, Mode mode, Rng& rng,
                      ModelCache* cache = nullptr);

// Eval-mode forward without any cache or rng.
ForwardResult predict(const DaeModel& model, const Matrix& x);

struct LossBreakdown {
  double total = 0.0;
  double recon = 0.0;  // mean squared error over all n*m entries
  double clf = 0.0;    // -ln p_label
  double lambda = 0.0;
};

// total = (1 - lambda) * recon + lambda * clf. A zero probability for the true label is
// clamped at 1e-12 and counted in probability_clamp_count().
LossBreakdown loss(const Matrix& x_clean, const Matrix& x_hat, std::size_t label,
                   const Vector& probs, double lambda);

std::uint64_t probability_clamp_count();

// Gradients of the loss for the forward pass recorded in `cache`.
ModelGradients backward(const DaeModel& model, const ModelCache& cache, const Matrix& x_clean,
                        std::size_t label, double lambda);
void backward_acc(const DaeModel& model, const ModelCache& cache, const Matrix& x_clean,
                  std::size_t label, double lambda, ModelGradients& grads);

std::size_t count_params(const ModelConfig& config);

// FLOPs of one Eval forward pass over config.seq_len timesteps.
struct FlopCount {
  std::uint64_t total = 0;
  std::uint64_t encoder = 0;
  std::uint64_t decoder = 0;
  std::uint64_t classifier = 0;
  static constexpr const char* kConvention =
      "2 FLOPs per multiply-accumulate; 1 FLOP per bias add, elementwise product/sum and "
      "nonlinearity evaluation; softmax 3K; decoder at every timestep, classifier once";
};

FlopCount count_flops(const ModelConfig& config);

// --- template definitions ---------------------------------------------------------------

namespace detail {

template <typename Layers, typename Fn>
void visit_encoder(Layers& layers, Fn& fn) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "encoder." + std::to_string(l) + ".";
    auto& layer = const_cast<LstmCellParams&>(layers[l]);
    layer.for_each_tensor([&](const char* name, std::span<double> v, TensorShape shape) {
      fn(prefix + name, v, shape);
    });
  }
}

template <typename W, typename B, typename Fn>
void visit_dense(const char* prefix, W& weight, B& bias, Fn& fn) {
  auto& w = const_cast<Matrix&>(weight);
  auto& b = const_cast<Vector&>(bias);
  fn(std::string(prefix) + ".W", w.span(), TensorShape::of(w));
  fn(std::string(prefix) + ".b", b.span(), TensorShape::of(b));
}

}  // namespace detail

template <typename Fn>
void DaeModel::for_each_tensor(Fn&& fn) {
  detail::visit_encoder(encoder.layers, fn);
  detail::visit_dense("decoder", decoder.weight, decoder.bias, fn);
  detail::visit_dense("clf1", clf1.weight, clf1.bias, fn);
  detail::visit_dense("clf2", clf2.weight, clf2.bias, fn);
  detail::visit_dense("clf3", clf3.weight, clf3.bias, fn);
}

template <typename Fn>
void DaeModel::for_each_tensor(Fn&& fn) const {
  const_cast<DaeModel*>(this)->for_each_tensor(
      [&](const std::string& name, std::span<double> v, TensorShape shape) {
        fn(name, std::span<const double>(v), shape);
      });
}

template <typename Fn>
void ModelGradients::for_each_tensor(Fn&& fn) {
  detail::visit_encoder(encoder, fn);
  detail::visit_dense("decoder", decoder.weight, decoder.bias, fn);
  detail::visit_dense("clf1", clf1.weight, clf1.bias, fn);
  detail::visit_dense("clf2", clf2.weight, clf2.bias, fn);
  detail::visit_dense("clf3", clf3.weight, clf3.bias, fn);
}

template <typename Fn>
void ModelGradients::for_each_tensor(Fn&& fn) const {
  const_cast<ModelGradients*>(this)->for_each_tensor(
      [&](const std::string& name, std::span<double> v, TensorShape shape) {
        fn(name, std::span<const double>(v), shape);
      });
}

}  // namespace rfdae
