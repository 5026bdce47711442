#include "rfdae/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rfdae/bench.hpp"
#include "rfdae/binary_io.hpp"
#include "rfdae/checkpoint.hpp"
#include "rfdae/dataset.hpp"
#include "rfdae/errors.hpp"
#include "rfdae/model.hpp"
#include "rfdae/model_check.hpp"
#include "rfdae/report.hpp"
#include "rfdae/synth.hpp"
#include "rfdae/trainer.hpp"

namespace rfdae::cli {

namespace {

namespace fs = std::filesystem;

// Published FLOPs per classification for the reference model; counting convention unstated.
constexpr std::uint64_t kReferenceFlops = 45040;

struct UsageError : Error {
  using Error::Error;
};

int verbosity() {
  const char* v = std::getenv("RFDAE_VERBOSITY");
  if (v == nullptr || *v == '\0') return 1;
  return std::atoi(v);
}

void log(int level, const std::string& message) {
  if (verbosity() < level) return;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%S", std::localtime(&now));
  std::cerr << '[' << stamp << "] " << message << '\n';
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing ") + what + " path");
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw UsageError(std::string(what) + " not found: " + path);
  }
}

void require_output(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing ") + what + " path");
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty() && !fs::is_directory(parent, ec)) {
    throw UsageError(std::string(what) + " directory does not exist: " + parent.string());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

SplitFractions parse_fractions(const std::string& s) {
  const std::vector<std::string> parts = split_list(s);
  if (parts.size() != 3) throw UsageError("--split-fractions expects train,val,test");
  SplitFractions f;
  try {
    f.train = std::stod(parts[0]);
    f.val = std::stod(parts[1]);
    f.test = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw UsageError("--split-fractions: not a number in '" + s + "'");
  }
  return f;
}

std::string fmt_double(double v, const char* format = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

void print_config(const ModelConfig& c) {
  std::cout << "model: m=" << c.input_features << " n=" << c.seq_len << " H=" << c.hidden
            << " depth=" << c.encoder_depth << " classifier=" << c.classifier_hidden[0] << "/"
            << c.classifier_hidden[1] << "/" << c.num_classes
            << " final_relu=" << (c.final_relu ? "on" : "off")
            << " transform=" << to_string(c.transform) << '\n';
  std::cout << "training: lambda=" << c.lambda << " mask_rate=" << c.mask_rate
            << " dropout=" << c.dropout_rate << '\n';
}

void print_size(const ModelConfig& c, const std::string& label) {
  const FlopCount f = count_flops(c);
  std::cout << "params: " << count_params(c) << label << '\n';
  std::cout << "flops: " << f.total << " (encoder " << f.encoder << ", decoder " << f.decoder
            << ", classifier " << f.classifier << "; reference figure " << kReferenceFlops
            << " under an unstated convention)\n";
}

// ---- gen ----

struct GenOptions {
  std::string mods = "bpsk,qpsk,pam4,qam16";
  std::string snrs = "-20:2:18";
  std::size_t per_class = 100;
  std::size_t len = 128;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t sps = 8;
  double rolloff = 0.35;
  std::size_t span = 8;
  bool no_random_phase = false;
  bool no_random_timing = false;
  double max_freq_offset = 0.0;
};

int cmd_gen(const GenOptions& o) {
  require_output(o.out, "output");
  GenConfig g;
  for (const auto& name : split_list(o.mods)) g.modulations.push_back(modulation_from_string(name));
  if (g.modulations.empty()) throw UsageError("--mods lists no modulations");
  g.snrs_db = parse_snr_range(o.snrs);
  g.per_class_per_snr = o.per_class;
  g.seq_len = o.len;
  g.seed = o.seed;
  g.pulse.samples_per_symbol = o.sps;
  g.pulse.rolloff = o.rolloff;
  g.pulse.span_symbols = o.span;
  g.impairments.random_phase = !o.no_random_phase;
  g.impairments.random_timing = !o.no_random_timing;
  g.impairments.max_freq_offset = o.max_freq_offset;
  if (o.per_class == 0) throw UsageError("--per-class must be positive");
  log(2, "generating " + std::to_string(g.modulations.size() * g.snrs_db.size() * o.per_class) +
             " records");
  const Dataset ds = generate_dataset(g);
  dataset_write(ds, o.out);
  log(1, "wrote " + std::to_string(ds.size()) + " records to " + o.out);
  return kOk;
}

// ---- train ----

struct TrainOptions {
  std::string data;
  std::string out;
  std::string log_path;
  TrainConfig train;
  std::string split = "0.5,0.25,0.25";
  std::size_t hidden = 32;
  std::size_t depth = 2;
  std::size_t num_classes = 0;  // 0: from the dataset
  bool final_relu = true;
  std::string transform;  // empty: amp-phase for m=2, none otherwise
};

ModelConfig model_config_for(const Dataset& ds, const TrainOptions& o) {
  ModelConfig c;
  c.input_features = ds.num_features;
  c.seq_len = ds.seq_len;
  c.hidden = o.hidden;
  c.encoder_depth = o.depth;
  c.num_classes = o.num_classes != 0 ? o.num_classes : ds.num_classes();
  if (c.num_classes < ds.num_classes()) {
    throw UsageError("--num-classes " + std::to_string(c.num_classes) + " is below the " +
                     std::to_string(ds.num_classes()) + " classes in the dataset");
  }
  c.final_relu = o.final_relu;
  c.transform = o.transform.empty()
                    ? (ds.num_features == 2 ? FeatureTransform::kAmpPhase : FeatureTransform::kNone)
                    : feature_transform_from_string(o.transform);
  c.lambda = o.train.lambda;
  c.mask_rate = o.train.mask_rate;
  c.dropout_rate = o.train.dropout_rate;
  c.validate();
  return c;
}

int cmd_train(TrainOptions o) {
  require_file(o.data, "dataset");
  require_output(o.out, "checkpoint");
  if (o.log_path.empty()) o.log_path = o.out + ".log.tsv";
  require_output(o.log_path, "log");
  o.train.split = parse_fractions(o.split);
  o.train.validate();

  const Dataset ds = dataset_read(o.data);
  const ModelConfig config = model_config_for(ds, o);
  log(1, "training on " + std::to_string(ds.size()) + " records, " +
             std::to_string(config.num_classes) + " classes, " + std::to_string(o.train.epochs) +
             " epochs");
  const FitResult fitted = fit(config, ds, o.train, [](const EpochRecord& e) {
    log(1, "epoch " + std::to_string(e.epoch) + " loss " + fmt_double(e.total) + " recon " +
               fmt_double(e.recon, "%.5f") + " clf " + fmt_double(e.clf) + " val_acc " +
               fmt_double(e.val_accuracy) + " (" + fmt_double(e.seconds, "%.1f") + " s)");
  });
  checkpoint_write(fitted.trained.model, o.out);
  write_file_atomic(o.log_path, fitted.trained.log.to_text());
  log(1, "best epoch " + std::to_string(fitted.trained.log.best_epoch) + "; wrote " + o.out);
  return kOk;
}

// ---- eval ----

struct EvalOptions {
  std::string checkpoint;
  std::string data;
  std::string out_dir;
  std::string split = "test";
  std::string fractions = "0.5,0.25,0.25";
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

int cmd_eval(const EvalOptions& o) {
  require_file(o.checkpoint, "checkpoint");
  require_file(o.data, "dataset");
  if (o.out_dir.empty()) throw UsageError("missing output directory");
  if (o.workers == 0) throw UsageError("--workers must be at least 1");
  const DaeModel model = checkpoint_read(o.checkpoint);
  const Dataset ds = dataset_read(o.data);
  if (ds.seq_len != model.config.seq_len) {
    log(1, "warning: dataset length " + std::to_string(ds.seq_len) + " differs from the trained " +
               std::to_string(model.config.seq_len));
  }

  std::vector<std::size_t> indices;
  if (o.split == "all") {
    for (std::size_t i = 0; i < ds.size(); ++i) indices.push_back(i);
  } else {
    const DataSplit split = stratified_split(ds, parse_fractions(o.fractions), o.seed);
    if (o.split == "test") indices = split.test;
    else if (o.split == "val") indices = split.val;
    else if (o.split == "train") indices = split.train;
    else throw UsageError("--split must be test, val, train or all");
  }
  const EvalReport r = report(model, ds, indices, o.workers);
  const RenderedTables tables = render_tables(r, nullptr);
  write_tables(tables, o.out_dir);
  std::cout << tables.summary;
  return kOk;
}

// ---- bench ----

struct BenchCliOptions {
  std::string checkpoint;
  std::size_t len = 0;  // 0: the checkpoint's seq_len
  std::size_t reps = 10;
  double seconds = 1.0;
  std::size_t batch = 1;
  std::size_t warmup = 50;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_bench(const BenchCliOptions& o) {
  require_file(o.checkpoint, "checkpoint");
  if (!o.out.empty()) require_output(o.out, "output");
  const DaeModel model = checkpoint_read(o.checkpoint);
  BenchOptions options;
  options.batch = o.batch;
  options.warmup = o.warmup;
  options.seed = o.seed;
  const std::size_t len = o.len != 0 ? o.len : model.config.seq_len;
  const BenchResult b = bench(model, len, o.reps, o.seconds, options);
  std::ostringstream text;
  text << "mode=" << b.mode << '\n'
       << "seq_len=" << b.seq_len << '\n'
       << "repetitions=" << b.repetitions << '\n'
       << "mean_cps=" << fmt_double(b.mean, "%.3f") << '\n'
       << "std_cps=" << fmt_double(b.std, "%.3f") << '\n';
  for (std::size_t i = 0; i < b.per_repetition.size(); ++i) {
    text << "rep_" << i << "_cps=" << fmt_double(b.per_repetition[i], "%.3f") << '\n';
  }
  text << "platform=" << b.platform << '\n';
  if (!o.out.empty()) write_file_atomic(o.out, text.str());
  std::cout << text.str();
  return kOk;
}

// ---- inspect ----

int cmd_inspect(const std::vector<std::string>& paths, std::size_t num_classes) {
  if (paths.empty()) throw UsageError("inspect needs at least one file");
  for (const auto& p : paths) require_file(p, "input");
  for (const auto& p : paths) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(p);
    std::cout << "== " << p << " (" << bytes.size() << " bytes)\n";
    if (bytes.size() >= 8 && std::equal(bytes.begin(), bytes.begin() + 8, kSigsetMagic)) {
      const SigsetHeader h = read_sigset_header(bytes);
      std::cout << "format: SIGSET v" << h.version << '\n';
      std::cout << "n_records: " << h.n_records << '\n';
      std::cout << "seq_len: " << h.seq_len << '\n';
      std::cout << "num_features: " << h.num_features << '\n';
      std::cout << "classes (" << h.class_names.size() << "):";
      for (const auto& c : h.class_names) std::cout << ' ' << c;
      std::cout << '\n';
      ModelConfig c;
      c.input_features = h.num_features;
      c.seq_len = h.seq_len;
      if (h.num_features != 2) c.transform = FeatureTransform::kNone;
      if (num_classes != 0) c.num_classes = num_classes;
      print_size(c, num_classes != 0 ? "" : " (reference model, K=" +
                                                std::to_string(c.num_classes) + ")");
      if (num_classes == 0 && h.class_names.size() != c.num_classes) {
        ModelConfig own = c;
        own.num_classes = h.class_names.size();
        std::cout << "params with dataset classes (K=" << own.num_classes
                  << "): " << count_params(own) << '\n';
      }
    } else if (bytes.size() >= 8 &&
               std::equal(bytes.begin(), bytes.begin() + 8, kCheckpointMagic)) {
      if (num_classes != 0) throw UsageError("--num-classes does not apply to a checkpoint");
      const DaeModel m = decode_checkpoint(bytes);
      std::cout << "format: checkpoint v" << kCheckpointVersion << '\n';
      print_config(m.config);
      print_size(m.config, "");
    } else {
      throw FormatError(FormatErrorKind::kBadMagic, p + ": neither a SIGSET file nor a checkpoint");
    }
  }
  return kOk;
}

// ---- gradcheck ----

int cmd_gradcheck(std::size_t seeds, double tolerance, double step) {
  if (seeds == 0) throw UsageError("--seeds must be positive");
  const std::vector<SuiteCase> cases = run_gradcheck_suite(seeds, tolerance, step);
  bool all = true;
  for (const auto& c : cases) {
    all = all && c.report.passed;
    char line[256];
    std::snprintf(line, sizeof line,
                  "%-5s seed %2llu  max rel err %.3e  at %s[%zu] (analytic %.6e, numeric %.6e)  %s\n",
                  c.unit.c_str(), static_cast<unsigned long long>(c.seed),
                  c.report.max_relative_error, c.report.parameter_name.c_str(),
                  c.report.worst_index, c.report.worst_analytic, c.report.worst_numeric,
                  c.report.passed ? "ok" : "FAIL");
    std::cout << line;
  }
  std::cout << (all ? "gradcheck: all passed" : "gradcheck: FAILED") << " (tolerance "
            << tolerance << ", step " << step << ")\n";
  return all ? kOk : kNumeric;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"LSTM denoising-autoencoder modulation classifier"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for all subcommands");

  GenOptions gen;
  CLI::App* g = app.add_subcommand("gen", "Write a synthetic SIGSET dataset");
  g->add_option("--mods", gen.mods, "Comma-separated modulations")->capture_default_str();
  g->add_option("--snrs", gen.snrs, "SNRs in dB: lo:step:hi (inclusive) or a list")->capture_default_str();
  g->add_option("--per-class", gen.per_class, "Records per modulation per SNR")->capture_default_str();
  g->add_option("--len", gen.len, "Samples per record")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("-o,--out", gen.out, "Output SIGSET path")->required();
  g->add_option("--sps", gen.sps, "Samples per symbol")->capture_default_str();
  g->add_option("--rolloff", gen.rolloff, "RRC roll-off")->capture_default_str();
  g->add_option("--span", gen.span, "RRC half-span in symbols")->capture_default_str();
  g->add_flag("--no-random-phase", gen.no_random_phase, "Disable per-record phase rotation");
  g->add_flag("--no-random-timing", gen.no_random_timing, "Disable per-record timing offset");
  g->add_option("--max-freq-offset", gen.max_freq_offset, "Max |frequency offset|, cycles/sample")
      ->capture_default_str();

  TrainOptions tr;
  CLI::App* t = app.add_subcommand("train", "Train a model and write a checkpoint");
  t->add_option("--data", tr.data, "SIGSET dataset");
  t->add_option("-o,--out", tr.out, "Checkpoint path");
  t->add_option("--log", tr.log_path, "Training log (default: <checkpoint>.log.tsv)");
  t->add_option("--epochs", tr.train.epochs)->capture_default_str();
  t->add_option("--batch", tr.train.batch_size)->capture_default_str();
  t->add_option("--lr", tr.train.lr)->capture_default_str();
  t->add_option("--lambda", tr.train.lambda, "Classification loss weight")->capture_default_str();
  t->add_option("--mask-rate", tr.train.mask_rate)->capture_default_str();
  t->add_option("--dropout", tr.train.dropout_rate)->capture_default_str();
  t->add_option("--seed", tr.train.seed)->capture_default_str();
  t->add_option("--workers", tr.train.workers, "Gradient worker threads (results unchanged)")
      ->capture_default_str();
  t->add_option("--clip-norm", tr.train.clip_norm, "Global gradient norm clip; 0 disables")
      ->capture_default_str();
  t->add_option("--split-fractions", tr.split, "train,val,test")->capture_default_str();
  t->add_option("--hidden", tr.hidden)->capture_default_str();
  t->add_option("--depth", tr.depth)->capture_default_str();
  t->add_option("--num-classes", tr.num_classes, "Override K (default: dataset classes)");
  t->add_flag("--final-relu,!--no-final-relu", tr.final_relu, "ReLU before softmax")
      ->capture_default_str();
  t->add_option("--transform", tr.transform, "amp-phase or none (default by feature count)");

  EvalOptions ev;
  CLI::App* e = app.add_subcommand("eval", "Evaluate a checkpoint and write report files");
  e->add_option("--checkpoint", ev.checkpoint);
  e->add_option("--data", ev.data);
  e->add_option("-o,--out-dir", ev.out_dir);
  e->add_option("--split", ev.split, "test, val, train or all")->capture_default_str();
  auto* frac = e->add_option("--split-fractions", ev.fractions, "As used for training")
                   ->capture_default_str();
  e->add_option("--seed", ev.seed, "Seed used for training")->capture_default_str();
  e->add_option("--workers", ev.workers)->capture_default_str();
  e->callback([&] {
    if (ev.split == "all" && frac->count() > 0) {
      throw CLI::ValidationError("--split all conflicts with --split-fractions");
    }
  });

  BenchCliOptions bo;
  CLI::App* b = app.add_subcommand("bench", "Measure classifications per second");
  b->add_option("--checkpoint", bo.checkpoint);
  b->add_option("--len", bo.len, "Sequence length (default: checkpoint)");
  b->add_option("--reps", bo.reps)->capture_default_str();
  b->add_option("--seconds", bo.seconds, "Duration of each repetition")->capture_default_str();
  b->add_option("--batch", bo.batch, "Examples per timed iteration")->capture_default_str();
  b->add_option("--warmup", bo.warmup)->capture_default_str();
  b->add_option("--seed", bo.seed)->capture_default_str();
  b->add_option("-o,--out", bo.out, "Write key=value results here");

  std::vector<std::string> inspect_paths;
  std::size_t inspect_classes = 0;
  CLI::App* in = app.add_subcommand("inspect", "Print file headers, parameter and FLOP counts");
  in->add_option("files", inspect_paths, "SIGSET or checkpoint files");
  in->add_option("--num-classes", inspect_classes, "K for the model derived from a dataset");

  std::size_t gc_seeds = 10;
  double gc_tol = 1e-4;
  double gc_step = 1e-5;
  CLI::App* gc = app.add_subcommand("gradcheck", "Run the finite-difference gradient checks");
  gc->add_option("--seeds", gc_seeds)->capture_default_str();
  gc->add_option("--tolerance", gc_tol)->capture_default_str();
  gc->add_option("--step", gc_step)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*b) return cmd_bench(bo);
    if (*in) return cmd_inspect(inspect_paths, inspect_classes);
    if (*gc) return cmd_gradcheck(gc_seeds, gc_tol, gc_step);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return kUsage;
  } catch (const ConfigError& err) {
    std::cerr << "configuration error: " << err.what() << '\n';
    return kUsage;
  } catch (const NumericError& err) {
    std::cerr << "numeric failure: " << err.what() << '\n';
    return kNumeric;
  } catch (const FormatError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kData;
  } catch (const Error& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace rfdae::cli
