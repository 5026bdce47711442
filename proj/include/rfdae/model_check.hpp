#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <string>

#include "rfdae/dense.hpp"
#include "rfdae/gradcheck.hpp"
#include "rfdae/lstm.hpp"
#include "rfdae/model.hpp"

namespace rfdae {

// Joint loss of one fixed example as a function of all model parameters. Dropout is off
// (Eval mode); the corrupted input is fixed at construction.
class ModelLossUnit : public Differentiable {
 public:
  ModelLossUnit(DaeModel& model, Matrix x_input, Matrix x_clean, std::size_t label, double lambda);

  std::vector<ParamTensor> parameters() override;
  double loss() override;
  std::vector<std::vector<double>> gradients() override;

 private:
  DaeModel& model_;
  Matrix x_input_, x_clean_;
  std::size_t label_;
  double lambda_;
};

// sum(r * dense(x)) for a fixed projection r.
class DenseLossUnit : public Differentiable {
 public:
  DenseLossUnit(DenseLayer& layer, Vector x, Vector projection);

  std::vector<ParamTensor> parameters() override;
  double loss() override;
  std::vector<std::vector<double>> gradients() override;

 private:
  DenseLayer& layer_;
  Vector x_, r_;
};

// sum(R * h_seq) + sum(r_n * h_n) over a stacked LSTM, dropout off.
class LstmLossUnit : public Differentiable {
 public:
  LstmLossUnit(LstmStack& stack, Matrix x, Matrix projection, Vector projection_n);

  std::vector<ParamTensor> parameters() override;
  double loss() override;
  std::vector<std::vector<double>> gradients() override;

 private:
  LstmStack& stack_;
  Matrix x_, r_;
  Vector r_n_;
};

struct ModelCheckCase {
  std::uint64_t seed = 0;
  GradCheckReport report;
};

// Full-model gradient check over seeds 0..seeds-1: random model, random clean input of shape
// (seq_len x m), masked copy as input, random label. Every parameter entry is probed.
std::vector<ModelCheckCase> run_model_gradcheck(const ModelConfig& config, std::size_t seeds,
                                                double tolerance, double step = 1e-5);

// Small configuration used by the default check: H=3, n=5, m=2, K=3.
ModelConfig gradcheck_config();

struct SuiteCase {
  std::string unit;  // "dense", "lstm" or "model"
  std::uint64_t seed = 0;
  GradCheckReport report;
};

// Dense 5->4 (ReLU), 2-layer LSTM (H=3, n=5, m=2) and the full model, each over `seeds` seeds.
std::vector<SuiteCase> run_gradcheck_suite(std::size_t seeds, double tolerance, double step = 1e-5);

}  // namespace rfdae
