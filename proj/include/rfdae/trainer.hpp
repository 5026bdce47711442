#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rfdae/dataset.hpp"
#include "rfdae/model.hpp"
#include "rfdae/rng.hpp"

namespace rfdae {

struct SplitFractions {
  double train = 0.5;
  double val = 0.25;
  double test = 0.25;
};

struct TrainConfig {
  std::size_t epochs = 150;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double lambda = 0.1;
  double mask_rate = 0.1;
  double dropout_rate = 0.2;
  SplitFractions split;
  // Worker threads for per-example gradients. Results do not depend on this value.
  std::size_t workers = 1;
  // Global L2 gradient-norm clip threshold; 0 disables clipping.
  double clip_norm = 0.0;

  void validate() const;
};

struct DataSplit {
  std::vector<std::size_t> train, val, test;
};

// Stratified by (label, snr): each group is shuffled with the seed and divided by the
// fractions (rounded down for train and val; test takes the remainder).
DataSplit stratified_split(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double total = 0.0;     // mean training losses over the epoch
  double recon = 0.0;
  double clf = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // epoch whose weights were returned

  // One line per epoch: epoch, total, recon, clf, val_acc, seconds (tab-separated).
  std::string to_text() const;
  static TrainLog parse(const std::string& text);
};

struct TrainResult {
  DaeModel model;  // weights with the best validation accuracy (latest epoch wins ties)
  TrainLog log;
};

// Model-ready inputs: dataset features with the model's feature transform applied.
std::vector<Matrix> prepare_inputs(const Dataset& ds, FeatureTransform transform);

// Loss and summed gradients of a minibatch. Per-example gradients are computed (in parallel
// when workers > 1) and reduced in batch order, then divided by the batch size.
struct BatchResult {
  double total = 0.0, recon = 0.0, clf = 0.0;  // means over the batch
};

class BatchGradientEngine {
 public:
  BatchGradientEngine(const DaeModel& model, std::size_t max_batch, std::size_t workers);

  // Example k draws its corruption mask and dropout masks from substreams of rngs[k].
  BatchResult compute(const DaeModel& model, std::span<const Matrix* const> clean,
                      std::span<const std::size_t> labels, std::span<Rng> rngs, double mask_rate,
                      double lambda, ModelGradients& mean_grads);

 private:
  std::vector<ModelGradients> per_example_;
  std::vector<ModelCache> caches_;
  std::vector<double> totals_, recons_, clfs_;
  std::size_t workers_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Trains `initial` on the train split and selects weights on the val split. All randomness
// (shuffling, corruption, dropout) derives from `rng`.
TrainResult train(const DaeModel& initial, const Dataset& data, const DataSplit& split,
                  const TrainConfig& config, const Rng& rng, const EpochCallback& on_epoch = {});

struct FitResult {
  TrainResult trained;
  DataSplit split;
};

// Standard pipeline from a seed: stratified split with config.seed, model init from
// Rng(seed).substream("init"), training randomness from Rng(seed).substream("train").
FitResult fit(const ModelConfig& model_config, const Dataset& data, const TrainConfig& config,
              const EpochCallback& on_epoch = {});

// Argmax predictions for the given records in Eval mode.
std::vector<std::size_t> predict_labels(const DaeModel& model, std::span<const Matrix> inputs,
                                        std::span<const std::size_t> indices, std::size_t workers = 1);

}  // namespace rfdae
