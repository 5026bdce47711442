#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rfdae/dataset.hpp"
#include "rfdae/model.hpp"

namespace rfdae {

struct SnrBucket {
  std::uint64_t correct = 0;
  std::uint64_t total = 0;

  double accuracy() const { return static_cast<double>(correct) / static_cast<double>(total); }
};

struct EvalReport {
  std::vector<std::string> class_names;
  std::map<int, SnrBucket> per_snr;  // only non-empty buckets
  std::vector<std::vector<std::uint64_t>> confusion;  // [true][predicted]
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  double overall_accuracy = 0.0;  // correct / total, i.e. trace / sum of the confusion matrix
  std::size_t param_count = 0;
  std::uint64_t flop_count = 0;
  std::size_t checkpoint_bytes = 0;
  std::vector<std::string> warnings;
};

// Builds a report from labels and predictions. SNRs listed in `expected_snrs` without any
// sample are left out of per_snr and noted in warnings.
EvalReport report_from_predictions(std::span<const std::size_t> labels,
                                   std::span<const std::size_t> predicted,
                                   std::span<const int> snrs, std::size_t num_classes,
                                   std::span<const int> expected_snrs = {});

// Eval-mode top-1 report over the given dataset records (original, uncorrupted signals).
// Also fills param_count, flop_count and checkpoint_bytes from the model.
EvalReport report(const DaeModel& model, const Dataset& data, std::span<const std::size_t> indices,
                  std::size_t workers = 1);

struct BenchResult {
  double mean = 0.0;  // classifications per second
  double std = 0.0;   // sample standard deviation over repetitions
  std::vector<double> per_repetition;
  std::size_t repetitions = 0;
  std::size_t seq_len = 0;
  std::size_t batch = 1;
  std::string mode;      // "single-example" or "batch-<B>"
  std::string platform;
};

// Rendered text artifacts; a pure function of the inputs.
struct RenderedTables {
  std::string summary;        // aligned plain-text tables
  std::string key_values;     // key=value lines
  std::string confusion_csv;  // header row of predicted class names
  std::string per_snr_tsv;    // snr_db, accuracy, count; ascending snr
};

RenderedTables render_tables(const EvalReport& report, const BenchResult* bench);

// Writes summary.txt, metrics.txt, confusion.csv and per_snr.tsv into `dir`.
void write_tables(const RenderedTables& tables, const std::filesystem::path& dir);

}  // namespace rfdae
