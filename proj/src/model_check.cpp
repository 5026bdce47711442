#include "rfdae/model_check.hpp"

#include <utility>

#include "rfdae/dropout.hpp"
#include "rfdae/rng.hpp"

namespace rfdae {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void fill_normal(std::span<double> v, Rng& rng) {
  for (double& x : v) x = rng.normal();
}

}  // namespace

DenseLossUnit::DenseLossUnit(DenseLayer& layer, Vector x, Vector projection)
    : layer_(layer), x_(std::move(x)), r_(std::move(projection)) {}

std::vector<ParamTensor> DenseLossUnit::parameters() {
  return {{"W", layer_.weight.span()}, {"b", layer_.bias.span()}};
}

double DenseLossUnit::loss() { return dot(dense_forward(layer_, x_).span(), r_.span()); }

std::vector<std::vector<double>> DenseLossUnit::gradients() {
  DenseCache cache;
  dense_forward(layer_, x_, &cache);
  const DenseBackward b = dense_backward(layer_, cache, r_);
  const std::span<const double> w = b.grads.weight.span();
  return {std::vector<double>(w.begin(), w.end()), b.grads.bias.values()};
}

LstmLossUnit::LstmLossUnit(LstmStack& stack, Matrix x, Matrix projection, Vector projection_n)
    : stack_(stack), x_(std::move(x)), r_(std::move(projection)), r_n_(std::move(projection_n)) {}

std::vector<ParamTensor> LstmLossUnit::parameters() {
  std::vector<ParamTensor> out;
  for (std::size_t l = 0; l < stack_.layers.size(); ++l) {
    stack_.layers[l].for_each_tensor([&](const char* name, std::span<double> v, TensorShape) {
      out.push_back({std::to_string(l) + "." + name, v});
    });
  }
  return out;
}

double LstmLossUnit::loss() {
  Rng unused(0);
  const SequenceOutput out =
      sequence_forward(stack_, x_, DropoutSpec{0.0, Mode::kEval}, unused, nullptr);
  return dot(out.h_seq.span(), r_.span()) + dot(out.h_n.span(), r_n_.span());
}

std::vector<std::vector<double>> LstmLossUnit::gradients() {
  Rng unused(0);
  LstmStackCache cache;
  sequence_forward(stack_, x_, DropoutSpec{0.0, Mode::kEval}, unused, &cache);
  SequenceBackward b = sequence_backward(stack_, cache, r_, r_n_);
  std::vector<std::vector<double>> out;
  for (auto& g : b.grads) {
    g.for_each_tensor([&](const char*, std::span<double> v, TensorShape) {
      out.emplace_back(v.begin(), v.end());
    });
  }
  return out;
}

ModelLossUnit::ModelLossUnit(DaeModel& model, Matrix x_input, Matrix x_clean, std::size_t label,
                             double lambda)
    : model_(model),
      x_input_(std::move(x_input)),
      x_clean_(std::move(x_clean)),
      label_(label),
      lambda_(lambda) {}

std::vector<ParamTensor> ModelLossUnit::parameters() {
  std::vector<ParamTensor> out;
  model_.for_each_tensor([&](const std::string& name, std::span<double> v, TensorShape) {
    out.push_back({name, v});
  });
  return out;
}

double ModelLossUnit::loss() {
  Rng unused(0);
  const ForwardResult r = forward(model_, x_input_, Mode::kEval, unused, nullptr);
  return rfdae::loss(x_clean_, r.x_hat, label_, r.probs, lambda_).total;
}

std::vector<std::vector<double>> ModelLossUnit::gradients() {
  Rng unused(0);
  ModelCache cache;
  forward(model_, x_input_, Mode::kEval, unused, &cache);
  const ModelGradients g = backward(model_, cache, x_clean_, label_, lambda_);
  std::vector<std::vector<double>> out;
  g.for_each_tensor([&](const std::string&, std::span<const double> v, TensorShape) {
    out.emplace_back(v.begin(), v.end());
  });
  return out;
}

ModelConfig gradcheck_config() {
  ModelConfig c;
  c.hidden = 3;
  c.seq_len = 5;
  c.input_features = 2;
  c.num_classes = 3;
  c.dropout_rate = 0.0;
  return c;
}

std::vector<ModelCheckCase> run_model_gradcheck(const ModelConfig& config, std::size_t seeds,
                                                double tolerance, double step) {
  std::vector<ModelCheckCase> out;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    Rng rng = Rng(seed).substream("gradcheck");
    DaeModel model = DaeModel::create(config, rng);
    Matrix clean(config.seq_len, config.input_features);
    fill_normal(clean.span(), rng);
    const CorruptResult corrupted = corrupt(clean, config.mask_rate, rng);
    const std::size_t label = rng.below(config.num_classes);
    ModelLossUnit unit(model, corrupted.x_tilde, clean, label, config.lambda);
    GradCheckOptions options;
    options.step = step;
    out.push_back({seed, grad_check(unit, rng, tolerance, options)});
  }
  return out;
}

std::vector<SuiteCase> run_gradcheck_suite(std::size_t seeds, double tolerance, double step) {
  std::vector<SuiteCase> out;
  GradCheckOptions options;
  options.step = step;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    Rng rng = Rng(seed).substream("gradcheck-dense");
    DenseLayer layer(5, 4, Activation::kRelu);
    layer.init_uniform(rng);
    fill_normal(layer.bias.span(), rng);
    Vector x(5), r(4);
    fill_normal(x.span(), rng);
    fill_normal(r.span(), rng);
    DenseLossUnit unit(layer, x, r);
    out.push_back({"dense", seed, grad_check(unit, rng, tolerance, options)});
  }
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    Rng rng = Rng(seed).substream("gradcheck-lstm");
    LstmStack stack(2, 3, 2);
    stack.init_uniform(rng);
    Matrix x(5, 2), r(5, 3);
    Vector r_n(3);
    fill_normal(x.span(), rng);
    fill_normal(r.span(), rng);
    fill_normal(r_n.span(), rng);
    LstmLossUnit unit(stack, x, r, r_n);
    out.push_back({"lstm", seed, grad_check(unit, rng, tolerance, options)});
  }
  for (const ModelCheckCase& c : run_model_gradcheck(gradcheck_config(), seeds, tolerance, step)) {
    out.push_back({"model", c.seed, c.report});
  }
  return out;
}

}  // namespace rfdae
