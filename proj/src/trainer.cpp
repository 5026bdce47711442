#include "rfdae/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "rfdae/adam.hpp"
#include "rfdae/errors.hpp"
#include "rfdae/features.hpp"

namespace rfdae {

namespace {

// Runs fn(index, worker) for index in [0, count). Worker w takes a contiguous block.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k, 0);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    threads.emplace_back([&, w, begin, end] {
      try {
        for (std::size_t k = begin; k < end; ++k) fn(k, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::size_t argmax(const Vector& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("train config: " + msg); };
  if (epochs == 0) fail("epochs must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(lr > 0.0)) fail("learning rate must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must be in [0, 1]");
  if (!(mask_rate >= 0.0 && mask_rate < 1.0)) fail("mask_rate must be in [0, 1)");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (split.train <= 0.0 || split.val < 0.0 || split.test < 0.0 ||
      std::abs(split.train + split.val + split.test - 1.0) > 1e-9) {
    fail("split fractions must be non-negative and sum to 1");
  }
  if (workers == 0) fail("workers must be at least 1");
  if (clip_norm < 0.0) fail("clip_norm must be non-negative");
}

DataSplit stratified_split(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed) {
  std::map<std::pair<std::uint16_t, std::int16_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    groups[{ds.records[i].label, ds.records[i].snr_db}].push_back(i);
  }
  const Rng root = Rng(seed).substream("split");
  DataSplit out;
  std::uint64_t group_index = 0;
  for (auto& [key, members] : groups) {
    Rng rng = root.child(group_index++);
    rng.shuffle(std::span<std::size_t>(members));
    const auto size = static_cast<double>(members.size());
    const auto n_train = static_cast<std::size_t>(std::floor(size * fractions.train + 1e-9));
    const auto n_val = std::min(members.size() - n_train,
                                static_cast<std::size_t>(std::floor(size * fractions.val + 1e-9)));
    out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
    out.val.insert(out.val.end(), members.begin() + n_train, members.begin() + n_train + n_val);
    out.test.insert(out.test.end(), members.begin() + n_train + n_val, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::string TrainLog::to_text() const {
  std::string out = "# epoch\ttotal\trecon\tclf\tval_acc\tseconds\n";
  char line[256];
  for (const auto& r : epochs) {
    std::snprintf(line, sizeof line, "%zu\t%.17g\t%.17g\t%.17g\t%.17g\t%.3f\n", r.epoch, r.total,
                  r.recon, r.clf, r.val_accuracy, r.seconds);
    out += line;
  }
  return out;
}

TrainLog TrainLog::parse(const std::string& text) {
  TrainLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    EpochRecord r;
    std::istringstream fields(line);
    if (!(fields >> r.epoch >> r.total >> r.recon >> r.clf >> r.val_accuracy >> r.seconds)) {
      throw FormatError(FormatErrorKind::kInvalidValue, "train log: malformed line '" + line + "'");
    }
    log.epochs.push_back(r);
  }
  return log;
}

std::vector<Matrix> prepare_inputs(const Dataset& ds, FeatureTransform transform) {
  std::vector<Matrix> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(apply_transform(transform, ds.features(i)));
  return out;
}

BatchGradientEngine::BatchGradientEngine(const DaeModel& model, std::size_t max_batch,
                                         std::size_t workers)
    : per_example_(max_batch, ModelGradients(model)),
      caches_(std::max<std::size_t>(1, workers)),
      totals_(max_batch),
      recons_(max_batch),
      clfs_(max_batch),
      workers_(std::max<std::size_t>(1, workers)) {}

BatchResult BatchGradientEngine::compute(const DaeModel& model, std::span<const Matrix* const> clean,
                                         std::span<const std::size_t> labels, std::span<Rng> rngs,
                                         double mask_rate, double lambda,
                                         ModelGradients& mean_grads) {
  const std::size_t count = clean.size();
  if (count == 0 || count > per_example_.size() || labels.size() != count || rngs.size() != count) {
    throw ShapeError("batch gradient: inconsistent batch sizes");
  }
  parallel_for(count, workers_, [&](std::size_t k, std::size_t w) {
    ModelCache& cache = caches_[w];
    ModelGradients& g = per_example_[k];
    g.set_zero();
    Rng mask_rng = rngs[k].substream("mask");
    Rng dropout_rng = rngs[k].substream("dropout");
    const CorruptResult corrupted = corrupt(*clean[k], mask_rate, mask_rng);
    const ForwardResult out = forward(model, corrupted.x_tilde, Mode::kTrain, dropout_rng, &cache);
    const LossBreakdown l = loss(*clean[k], out.x_hat, labels[k], out.probs, lambda);
    backward_acc(model, cache, *clean[k], labels[k], lambda, g);
    totals_[k] = l.total;
    recons_[k] = l.recon;
    clfs_[k] = l.clf;
  });

  BatchResult result;
  mean_grads.set_zero();
  for (std::size_t k = 0; k < count; ++k) {
    mean_grads.add(per_example_[k]);
    result.total += totals_[k];
    result.recon += recons_[k];
    result.clf += clfs_[k];
  }
  const double inv = 1.0 / static_cast<double>(count);
  mean_grads.scale(inv);
  result.total *= inv;
  result.recon *= inv;
  result.clf *= inv;
  return result;
}

std::vector<std::size_t> predict_labels(const DaeModel& model, std::span<const Matrix> inputs,
                                        std::span<const std::size_t> indices, std::size_t workers) {
  std::vector<std::size_t> out(indices.size());
  parallel_for(indices.size(), workers, [&](std::size_t k, std::size_t) {
    out[k] = argmax(predict(model, inputs[indices[k]]).probs);
  });
  return out;
}

TrainResult train(const DaeModel& initial, const Dataset& data, const DataSplit& split,
                  const TrainConfig& config, const Rng& rng, const EpochCallback& on_epoch) {
  config.validate();
  data.validate();
  if (split.train.empty()) throw ConfigError("train: training split is empty");
  if (data.num_features != initial.config.input_features) {
    throw ShapeError("train: dataset has " + std::to_string(data.num_features) +
                     " features, model expects " + std::to_string(initial.config.input_features));
  }
  for (const auto& r : data.records) {
    if (r.label >= initial.config.num_classes) {
      throw ConfigError("train: label " + std::to_string(r.label) + " out of range for " +
                        std::to_string(initial.config.num_classes) + " classes");
    }
  }

  DaeModel model = initial;
  model.config.lambda = config.lambda;
  model.config.mask_rate = config.mask_rate;
  model.config.dropout_rate = config.dropout_rate;
  model.config.validate();

  const std::vector<Matrix> inputs = prepare_inputs(data, model.config.transform);
  const std::vector<std::size_t>& val_set = split.val.empty() ? split.train : split.val;

  const Rng shuffle_root = rng.substream("shuffle");
  const Rng example_root = rng.substream("example");
  AdamState adam(config.lr);
  BatchGradientEngine engine(model, config.batch_size, config.workers);
  ModelGradients grads(model);

  TrainResult result{model, {}};
  double best_acc = -1.0;
  std::vector<std::size_t> order = split.train;
  std::vector<const Matrix*> batch_inputs;
  std::vector<std::size_t> batch_labels;
  std::vector<Rng> batch_rngs;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    order = split.train;
    Rng shuffler = shuffle_root.child(epoch);
    shuffler.shuffle(std::span<std::size_t>(order));
    const Rng epoch_rng = example_root.child(epoch);

    double sum_total = 0.0, sum_recon = 0.0, sum_clf = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch_inputs.clear();
      batch_labels.clear();
      batch_rngs.clear();
      for (std::size_t p = start; p < end; ++p) {
        batch_inputs.push_back(&inputs[order[p]]);
        batch_labels.push_back(data.records[order[p]].label);
        batch_rngs.push_back(epoch_rng.child(order[p]));
      }
      BatchResult br;
      try {
        br = engine.compute(model, batch_inputs, batch_labels, batch_rngs, config.mask_rate,
                            config.lambda, grads);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + " batch " + std::to_string(batch_index) +
                           ": " + e.what());
      }
      if (!std::isfinite(br.total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(batch_index));
      }
      if (config.clip_norm > 0.0) {
        const double norm = std::sqrt(grads.squared_norm());
        if (norm > config.clip_norm) grads.scale(config.clip_norm / norm);
      }
      adam_step(model, grads, adam);
      const double weight = static_cast<double>(end - start);
      sum_total += br.total * weight;
      sum_recon += br.recon * weight;
      sum_clf += br.clf * weight;
    }

    const std::vector<std::size_t> predicted = predict_labels(model, inputs, val_set, config.workers);
    std::size_t correct = 0;
    for (std::size_t k = 0; k < val_set.size(); ++k) {
      if (predicted[k] == data.records[val_set[k]].label) ++correct;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    const double n_train = static_cast<double>(order.size());
    rec.total = sum_total / n_train;
    rec.recon = sum_recon / n_train;
    rec.clf = sum_clf / n_train;
    rec.val_accuracy = static_cast<double>(correct) / static_cast<double>(val_set.size());
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.epochs.push_back(rec);
    if (rec.val_accuracy >= best_acc) {
      best_acc = rec.val_accuracy;
      result.model = model;
      result.log.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

FitResult fit(const ModelConfig& model_config, const Dataset& data, const TrainConfig& config,
              const EpochCallback& on_epoch) {
  config.validate();
  const Rng root(config.seed);
  Rng init = root.substream("init");
  const DaeModel initial = DaeModel::create(model_config, init);
  DataSplit split = stratified_split(data, config.split, config.seed);
  TrainResult trained = train(initial, data, split, config, root.substream("train"), on_epoch);
  return {std::move(trained), std::move(split)};
}

}  // namespace rfdae
