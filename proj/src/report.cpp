#include "rfdae/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "rfdae/binary_io.hpp"
#include "rfdae/checkpoint.hpp"
#include "rfdae/errors.hpp"
#include "rfdae/features.hpp"
#include "rfdae/trainer.hpp"

namespace rfdae {

EvalReport report_from_predictions(std::span<const std::size_t> labels,
                                   std::span<const std::size_t> predicted,
                                   std::span<const int> snrs, std::size_t num_classes,
                                   std::span<const int> expected_snrs) {
  if (labels.size() != predicted.size() || labels.size() != snrs.size()) {
    throw ShapeError("report: labels, predictions and SNR tags differ in length");
  }
  if (labels.empty()) throw ConfigError("report: empty evaluation split");
  EvalReport r;
  r.confusion.assign(num_classes, std::vector<std::uint64_t>(num_classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes || predicted[i] >= num_classes) {
      throw ShapeError("report: class index out of range");
    }
    r.confusion[labels[i]][predicted[i]] += 1;
    SnrBucket& b = r.per_snr[snrs[i]];
    b.total += 1;
    if (labels[i] == predicted[i]) b.correct += 1;
  }
  for (std::size_t k = 0; k < num_classes; ++k) {
    for (std::size_t j = 0; j < num_classes; ++j) {
      r.total += r.confusion[k][j];
      if (k == j) r.correct += r.confusion[k][j];
    }
  }
  r.overall_accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  for (int snr : expected_snrs) {
    if (!r.per_snr.contains(snr)) {
      r.warnings.push_back("no test samples at " + std::to_string(snr) + " dB; bucket omitted");
    }
  }
  return r;
}

EvalReport report(const DaeModel& model, const Dataset& data, std::span<const std::size_t> indices,
                  std::size_t workers) {
  if (data.num_features != model.config.input_features) {
    throw ShapeError("report: dataset has " + std::to_string(data.num_features) +
                     " features, model expects " + std::to_string(model.config.input_features));
  }
  if (data.num_classes() > model.config.num_classes) {
    throw ShapeError("report: dataset has more classes than the model");
  }
  if (indices.empty()) throw ConfigError("report: empty evaluation split");
  std::vector<Matrix> inputs(data.size());
  std::vector<std::size_t> labels;
  std::vector<int> snrs;
  for (std::size_t idx : indices) {
    inputs[idx] = apply_transform(model.config.transform, data.features(idx));
    labels.push_back(data.records[idx].label);
    snrs.push_back(data.records[idx].snr_db);
  }
  const std::vector<std::size_t> predicted = predict_labels(model, inputs, indices, workers);
  EvalReport r = report_from_predictions(labels, predicted, snrs, model.config.num_classes);
  r.class_names = data.class_names;
  while (r.class_names.size() < model.config.num_classes) {
    r.class_names.push_back("class" + std::to_string(r.class_names.size()));
  }
  r.param_count = model.parameter_count();
  r.flop_count = count_flops(model.config).total;
  r.checkpoint_bytes = encode_checkpoint(model).size();
  return r;
}

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string class_label(const EvalReport& r, std::size_t k) {
  return k < r.class_names.size() ? r.class_names[k] : "class" + std::to_string(k);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

RenderedTables render_tables(const EvalReport& report, const BenchResult* bench) {
  RenderedTables t;
  const std::size_t k = report.confusion.size();

  std::ostringstream csv;
  csv << "true\\pred";
  for (std::size_t j = 0; j < k; ++j) csv << ',' << csv_escape(class_label(report, j));
  csv << '\n';
  for (std::size_t i = 0; i < k; ++i) {
    csv << csv_escape(class_label(report, i));
    for (std::size_t j = 0; j < k; ++j) csv << ',' << report.confusion[i][j];
    csv << '\n';
  }
  t.confusion_csv = csv.str();

  std::ostringstream tsv;
  tsv << "snr_db\taccuracy\tcount\n";
  for (const auto& [snr, b] : report.per_snr) {
    tsv << snr << '\t' << fmt("%.6f", b.accuracy()) << '\t' << b.total << '\n';
  }
  t.per_snr_tsv = tsv.str();

  std::ostringstream kv;
  kv << "overall_accuracy=" << fmt("%.6f", report.overall_accuracy) << '\n';
  kv << "correct=" << report.correct << '\n';
  kv << "total=" << report.total << '\n';
  kv << "num_classes=" << k << '\n';
  kv << "param_count=" << report.param_count << '\n';
  kv << "flop_count=" << report.flop_count << '\n';
  kv << "flop_convention=" << FlopCount::kConvention << '\n';
  kv << "checkpoint_bytes=" << report.checkpoint_bytes << '\n';
  for (const auto& [snr, b] : report.per_snr) {
    kv << "accuracy_snr_" << snr << '=' << fmt("%.6f", b.accuracy()) << '\n';
  }
  if (bench != nullptr) {
    kv << "bench_mode=" << bench->mode << '\n';
    kv << "bench_seq_len=" << bench->seq_len << '\n';
    kv << "bench_repetitions=" << bench->repetitions << '\n';
    kv << "bench_mean_cps=" << fmt("%.3f", bench->mean) << '\n';
    kv << "bench_std_cps=" << fmt("%.3f", bench->std) << '\n';
    kv << "bench_platform=" << bench->platform << '\n';
  }
  t.key_values = kv.str();

  std::ostringstream s;
  s << "Top-1 accuracy by SNR\n";
  s << "  SNR (dB)   Accuracy   Count\n";
  for (const auto& [snr, b] : report.per_snr) {
    char line[96];
    std::snprintf(line, sizeof line, "  %8d   %8.4f   %5llu\n", snr, b.accuracy(),
                  static_cast<unsigned long long>(b.total));
    s << line;
  }
  s << "  Overall    " << fmt("%8.4f", report.overall_accuracy) << "   " << report.total << "\n\n";

  std::size_t width = 6;
  for (std::size_t j = 0; j < k; ++j) width = std::max(width, class_label(report, j).size() + 1);
  auto pad = [&](const std::string& v) {
    return std::string(width > v.size() ? width - v.size() : 0, ' ') + v;
  };
  s << "Confusion matrix (rows: true class, columns: predicted)\n";
  s << pad("");
  for (std::size_t j = 0; j < k; ++j) s << pad(class_label(report, j));
  s << '\n';
  for (std::size_t i = 0; i < k; ++i) {
    s << pad(class_label(report, i));
    for (std::size_t j = 0; j < k; ++j) s << pad(std::to_string(report.confusion[i][j]));
    s << '\n';
  }
  s << "\nModel size\n";
  s << "  # Parameters  " << report.param_count << '\n';
  s << "  # FLOPs       " << report.flop_count << "  (" << FlopCount::kConvention << ")\n";
  s << "  Checkpoint    " << report.checkpoint_bytes << " bytes\n";
  if (bench != nullptr) {
    s << "\nClassifications per second (" << bench->mode << ", n=" << bench->seq_len << ", "
      << bench->repetitions << " repetitions)\n";
    s << "  Mean  " << fmt("%.2f", bench->mean) << '\n';
    s << "  Std   " << fmt("%.2f", bench->std) << '\n';
    s << "  Platform  " << bench->platform << '\n';
  }
  for (const auto& w : report.warnings) s << "warning: " << w << '\n';
  t.summary = s.str();
  return t;
}

void write_tables(const RenderedTables& tables, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError(FormatErrorKind::kIo, "cannot create " + dir.string());
  write_file_atomic(dir / "summary.txt", tables.summary);
  write_file_atomic(dir / "metrics.txt", tables.key_values);
  write_file_atomic(dir / "confusion.csv", tables.confusion_csv);
  write_file_atomic(dir / "per_snr.tsv", tables.per_snr_tsv);
}

}  // namespace rfdae
