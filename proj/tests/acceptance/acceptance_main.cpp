// One PASS/FAIL/SKIP line per acceptance criterion. Exit status is nonzero if any criterion fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rfdae/activations.hpp"
#include "rfdae/bench.hpp"
#include "rfdae/binary_io.hpp"
#include "rfdae/checkpoint.hpp"
#include "rfdae/dataset.hpp"
#include "rfdae/errors.hpp"
#include "rfdae/features.hpp"
#include "rfdae/lstm.hpp"
#include "rfdae/model.hpp"
#include "rfdae/model_check.hpp"
#include "rfdae/report.hpp"
#include "rfdae/synth.hpp"
#include "rfdae/trainer.hpp"

using namespace rfdae;
namespace fs = std::filesystem;

namespace {

enum class Verdict { kPass, kFail, kSkip };

int failures = 0;

void emit(Verdict v, const std::string& name, const std::string& detail) {
  const char* tag = v == Verdict::kPass ? "PASS" : v == Verdict::kFail ? "FAIL" : "SKIP";
  if (v == Verdict::kFail) ++failures;
  std::printf("%s  %-28s %s\n", tag, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

void note(const std::string& text) {
  std::printf("      %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- parameter count ----------------------------------------------------------------------

void check_params() {
  ModelConfig c;  // m=2, H=32, depth 2, widths 32/16, K=11
  const std::size_t n = count_params(c);
  Rng rng(0);
  const std::size_t walked = DaeModel::create(c, rng).parameter_count();
  emit(n == 14637 && walked == 14637 ? Verdict::kPass : Verdict::kFail, "parameter-count",
       "count_params=" + std::to_string(n) + " tensor walk=" + std::to_string(walked) + " expected 14637");
}

// ---- gradient check -----------------------------------------------------------------------

void check_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cases = run_model_gradcheck(gradcheck_config(), 10, 1e-4, 1e-5);
  double worst = 0.0;
  std::size_t failed = 0;
  for (const auto& c : cases) {
    worst = std::max(worst, c.report.max_relative_error);
    if (!c.report.passed) {
      ++failed;
      char buf[256];
      std::snprintf(buf, sizeof buf, "seed %llu: %.3e at %s (analytic %.6e, numeric %.6e)",
                    static_cast<unsigned long long>(c.seed), c.report.max_relative_error,
                    c.report.parameter_name.c_str(), c.report.worst_analytic, c.report.worst_numeric);
      note(buf);
    }
  }
  emit(failed == 0 ? Verdict::kPass : Verdict::kFail, "gradient-check",
       std::to_string(cases.size() - failed) + "/" + std::to_string(cases.size()) +
           " seeds below 1e-4, worst " + fmt("%.3e", worst) + ", " + fmt("%.1f s", seconds_since(t0)));
}

// ---- analytic forward oracles -------------------------------------------------------------

void check_oracles() {
  std::vector<std::pair<std::string, double>> errors;
  const auto add = [&](const std::string& name, double got, double want) {
    errors.emplace_back(name, std::abs(got - want));
  };

  const Vector u = softmax(Vector{0.0, 0.0, 0.0});
  for (double p : u) add("softmax equal logits", p, 1.0 / 3.0);
  const Vector s = softmax(Vector{700.0, 700.0 + std::log(2.0)});
  add("softmax shift", s[0], 1.0 / 3.0);
  add("softmax shift", s[1], 2.0 / 3.0);
  add("sigmoid(0)", sigmoid(0.0), 0.5);
  add("sigmoid(-1000)", sigmoid(-1000.0), 0.0);
  add("sigmoid(1000)", sigmoid(1000.0), 1.0);
  add("tanh(0)", tanh_act(Vector{0.0})[0], 0.0);
  add("tanh(1000)", tanh_act(Vector{1000.0})[0], 1.0);
  const Vector r = relu(Vector{-1.0, 0.0, 2.0});
  add("relu", r[0] + r[1], 0.0);
  add("relu", r[2], 2.0);

  LstmCellParams zero(2, 4);
  zero.set_zero();
  LstmStepCache cache;
  const LstmState z = cell_step(zero, Vector{0.3, -0.7}, LstmState::zeros(4), &cache);
  for (std::size_t k = 0; k < 4; ++k) {
    add("lstm zero-weight gates", cache.i[k], 0.5);
    add("lstm zero-weight gates", cache.o[k], 0.5);
    add("lstm zero-weight gates", cache.f[k], 0.5);
    add("lstm zero-weight state", z.c[k], 0.0);
    add("lstm zero-weight state", z.h[k], 0.0);
  }
  LstmCellParams memory(2, 4);
  memory.set_zero();
  for (double& b : memory.b_f.span()) b = 1000.0;
  const LstmState held{Vector(4), Vector{0.5, -2.0, 7.0, 1e-3}};
  const LstmState after = cell_step(memory, Vector{1.0, 1.0}, held);
  for (std::size_t k = 0; k < 4; ++k) add("lstm saturated forget gate", after.c[k], held.c[k]);
  LstmStack stack(2, 4, 2);
  stack.set_zero();
  Rng unused(0);
  for (double v : sequence_forward(stack, Matrix(8, 2), DropoutSpec{}, unused).h_seq.span()) {
    add("lstm zero sequence", v, 0.0);
  }

  const DaeModel zeros = DaeModel::zeros(ModelConfig{});
  Matrix probe(128, 2, 0.5);
  for (double p : predict(zeros, probe).probs) add("zero model uniform", p, 1.0 / 11.0);
  const Matrix x{{0.25, -1.0}};
  add("loss perfect", loss(x, x, 0, Vector{1.0, 0.0}, 0.1).total, 0.0);
  add("loss ln 11", loss(x, x, 0, Vector(11, 1.0 / 11.0), 0.1).clf, std::log(11.0));
  const Matrix hat{{0.25 + std::sqrt(2.0), -1.0 - std::sqrt(2.0)}};
  add("loss weighting", loss(x, hat, 0, Vector{std::exp(-4.0), 1.0 - std::exp(-4.0)}, 0.1).total, 2.2);
  const Matrix ap = iq_to_amp_phase(Matrix{{3.0, 4.0}});
  add("amp-phase (3,4)", ap(0, 0), 1.0);
  add("amp-phase (3,4)", ap(0, 1), std::atan2(4.0, 3.0) / std::numbers::pi);
  add("amp-phase (-1,0)", iq_to_amp_phase(Matrix{{-1.0, 0.0}})(0, 1), 1.0);

  double worst = 0.0;
  std::size_t bad = 0;
  for (const auto& [name, err] : errors) {
    worst = std::max(worst, err);
    if (!(err <= 1e-12)) {
      ++bad;
      note(name + ": error " + fmt("%.3e", err));
    }
  }
  emit(bad == 0 ? Verdict::kPass : Verdict::kFail, "analytic-oracles",
       std::to_string(errors.size() - bad) + "/" + std::to_string(errors.size()) +
           " closed-form checks within 1e-12, worst " + fmt("%.1e", worst));
}

// ---- end-to-end training ------------------------------------------------------------------

Dataset desk_dataset() {
  GenConfig g;
  g.modulations = {Modulation::kBpsk, Modulation::kQpsk, Modulation::kPam4, Modulation::kQam16};
  g.snrs_db = parse_snr_range("10:2:18");
  g.per_class_per_snr = 500;
  g.seq_len = 128;
  g.seed = 1;
  return generate_dataset(g);
}

struct DeskRun {
  double accuracy = 0.0;
  EvalReport report;
  double seconds = 0.0;
};

DeskRun desk_run(const Dataset& ds, double mask_rate) {
  ModelConfig mc;
  mc.seq_len = ds.seq_len;
  mc.num_classes = ds.num_classes();
  TrainConfig tc;
  tc.epochs = 30;
  tc.seed = 1;
  tc.mask_rate = mask_rate;
  tc.workers = workers();
  const auto t0 = std::chrono::steady_clock::now();
  const FitResult fit_result = fit(mc, ds, tc, [&](const EpochRecord& e) {
    if (e.epoch == 1 || e.epoch % 5 == 0) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "mask %.1f epoch %2zu  loss %.4f (recon %.4f, clf %.4f)  val %.4f",
                    mask_rate, e.epoch, e.total, e.recon, e.clf, e.val_accuracy);
      note(buf);
    }
  });
  DeskRun run;
  run.report = report(fit_result.trained.model, ds, fit_result.split.test, tc.workers);
  run.accuracy = run.report.overall_accuracy;
  run.seconds = seconds_since(t0);
  return run;
}

void check_end_to_end(const DeskRun& run) {
  std::string per_snr;
  for (const auto& [snr, b] : run.report.per_snr) per_snr += " " + std::to_string(snr) + "dB:" + fmt("%.3f", b.accuracy());
  note("per-SNR test accuracy:" + per_snr);
  emit(run.accuracy >= 0.85 ? Verdict::kPass : Verdict::kFail, "end-to-end-synthetic",
       "4 classes, SNR 10..18, 30 epochs: test accuracy " + fmt("%.4f", run.accuracy) + " (need >= 0.85), " +
           fmt("%.0f s", run.seconds));
}

void check_mask_guard(const Dataset& ds, const DeskRun& masked) {
  const DeskRun clean = desk_run(ds, 0.0);
  const bool ok = masked.accuracy >= clean.accuracy - 0.02;
  emit(ok ? Verdict::kPass : Verdict::kFail, "denoising-guard",
       "mask 0.1 accuracy " + fmt("%.4f", masked.accuracy) + " vs mask 0 accuracy " + fmt("%.4f", clean.accuracy) +
           " (need >= mask 0 - 0.02)");
}

// ---- RadioML (optional) -------------------------------------------------------------------

void check_radioml() {
  const char* path = std::getenv("RFDAE_RADIOML2016_SIGSET");
  if (path == nullptr || *path == '\0') {
    emit(Verdict::kSkip, "radioml2016-overall",
         "set RFDAE_RADIOML2016_SIGSET to a converted RadioML2016.10A file to run (150 epochs, hours)");
    return;
  }
  const Dataset ds = dataset_read(path);
  ModelConfig mc;
  mc.seq_len = ds.seq_len;
  mc.num_classes = ds.num_classes();
  TrainConfig tc;
  tc.seed = 1;
  tc.workers = workers();
  const FitResult r = fit(mc, ds, tc);
  const double acc = report(r.trained.model, ds, r.split.test, tc.workers).overall_accuracy;
  emit(std::abs(acc * 100.0 - 61.72) <= 2.0 ? Verdict::kPass : Verdict::kFail, "radioml2016-overall",
       "overall test accuracy " + fmt("%.2f%%", acc * 100.0) + " (need 61.72 +- 2.0)");
}

// ---- lambda boundaries --------------------------------------------------------------------

std::vector<double> values_with_prefix(const DaeModel& m, const std::string& prefix) {
  std::vector<double> out;
  m.for_each_tensor([&](const std::string& name, std::span<const double> v, TensorShape) {
    if (name.rfind(prefix, 0) == 0) out.insert(out.end(), v.begin(), v.end());
  });
  return out;
}

void check_lambda_boundaries() {
  GenConfig g;
  g.modulations = {Modulation::kBpsk, Modulation::kQpsk, Modulation::kPam4, Modulation::kQam16};
  g.snrs_db = {10, 18};
  g.per_class_per_snr = 16;
  g.seed = 2;
  const Dataset ds = generate_dataset(g);
  ModelConfig mc;
  mc.num_classes = 4;
  Rng init(3);
  const DaeModel initial = DaeModel::create(mc, init);
  TrainConfig tc;
  tc.epochs = 1;  // 64 training records < batch 128: exactly one optimizer step
  const DataSplit split = stratified_split(ds, tc.split, 3);

  tc.lambda = 0.0;
  const DaeModel a = train(initial, ds, split, tc, Rng(4)).model;
  bool head_frozen = true;
  for (const char* p : {"clf1.", "clf2.", "clf3."}) head_frozen &= values_with_prefix(a, p) == values_with_prefix(initial, p);
  const bool decoder_moved = values_with_prefix(a, "decoder.") != values_with_prefix(initial, "decoder.");

  tc.lambda = 1.0;
  const DaeModel b = train(initial, ds, split, tc, Rng(4)).model;
  const bool decoder_frozen = values_with_prefix(b, "decoder.") == values_with_prefix(initial, "decoder.");
  const bool head_moved = values_with_prefix(b, "clf1.") != values_with_prefix(initial, "clf1.") ||
                          values_with_prefix(b, "clf3.") != values_with_prefix(initial, "clf3.");

  const bool ok = head_frozen && decoder_frozen && decoder_moved && head_moved;
  emit(ok ? Verdict::kPass : Verdict::kFail, "lambda-boundaries",
       std::string("lambda=0 classifier head ") + (head_frozen ? "unchanged" : "CHANGED") +
           (decoder_moved ? ", decoder updated" : ", decoder not updated") + "; lambda=1 decoder " +
           (decoder_frozen ? "unchanged" : "CHANGED") + (head_moved ? ", head updated" : ", head not updated"));
}

// ---- determinism through the CLI ----------------------------------------------------------

int run_cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = "cd '" + dir.string() + "' && RFDAE_VERBOSITY=0 '" RFDAE_CLI_PATH "' " + args +
                          " > cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void check_determinism(const fs::path& dir) {
  const int gen = run_cli("gen --mods bpsk,qpsk,pam4,qam16 --snrs 10:4:18 --per-class 20 --len 128 --seed 5 -o d.sigset", dir);
  const int a = run_cli("train --data d.sigset -o a.ckpt --epochs 3 --seed 11", dir);
  const int b = run_cli("train --data d.sigset -o b.ckpt --epochs 3 --seed 11", dir);
  bool same = false;
  std::size_t bytes = 0;
  if (gen == 0 && a == 0 && b == 0) {
    const auto ca = read_file_bytes(dir / "a.ckpt");
    same = ca == read_file_bytes(dir / "b.ckpt");
    bytes = ca.size();
  }
  emit(same ? Verdict::kPass : Verdict::kFail, "determinism",
       "two `train` runs, same seed/config/data: checkpoints " + std::string(same ? "bitwise identical" : "DIFFER") +
           " (" + std::to_string(bytes) + " bytes; exit codes " + std::to_string(gen) + "," + std::to_string(a) +
           "," + std::to_string(b) + ")");
}

// ---- format integrity ---------------------------------------------------------------------

// Counts single-byte flips at every position that the decoder fails to reject, and flips past
// the fixed header that are rejected for a reason other than the checksum.
template <typename Decode>
std::pair<std::size_t, std::size_t> flip_scan(const std::vector<std::uint8_t>& good, std::size_t header,
                                              Decode decode) {
  std::size_t accepted = 0, not_crc = 0;
  for (std::size_t pos = 0; pos < good.size(); ++pos) {
    auto bad = good;
    bad[pos] ^= 0x5a;
    try {
      decode(bad);
      ++accepted;
    } catch (const FormatError& e) {
      if (pos >= header && e.kind() != FormatErrorKind::kChecksumMismatch) ++not_crc;
    }
  }
  return {accepted, not_crc};
}

void check_formats(const fs::path& dir) {
  GenConfig g;
  g.modulations = {Modulation::kBpsk, Modulation::kQam16, Modulation::kGfsk};
  g.snrs_db = {-6, 12};
  g.per_class_per_snr = 2;
  g.seq_len = 16;
  g.seed = 6;
  const Dataset ds = generate_dataset(g);
  dataset_write(ds, dir / "f.sigset");
  const auto sig = read_file_bytes(dir / "f.sigset");
  const Dataset ds_back = dataset_read(dir / "f.sigset");
  const bool sig_round = ds_back.same_content(ds) && encode_sigset(ds_back) == sig;

  ModelConfig mc;
  mc.num_classes = 3;
  Rng rng(7);
  const DaeModel model = DaeModel::create(mc, rng);
  checkpoint_write(model, dir / "f.ckpt");
  const auto ck = read_file_bytes(dir / "f.ckpt");
  const DaeModel back = checkpoint_read(dir / "f.ckpt");
  const bool ck_round = encode_checkpoint(back) == ck && back.config == model.config;

  // SIGSET: everything after the class-name table is covered only by the CRC.
  std::size_t sig_header = 28;
  for (const auto& name : ds.class_names) sig_header += 2 + name.size();
  const auto [sig_accepted, sig_other] = flip_scan(sig, sig_header, [](const auto& b) { decode_sigset(b); });
  const auto [ck_accepted, ck_other] = flip_scan(ck, 12, [](const auto& b) { decode_checkpoint(b); });

  const bool ok = sig_round && ck_round && sig_accepted == 0 && ck_accepted == 0 && sig_other == 0 && ck_other == 0;
  emit(ok ? Verdict::kPass : Verdict::kFail, "format-integrity",
       std::string("round trips ") + (sig_round && ck_round ? "bit-exact" : "NOT exact") + "; single-byte flips: SIGSET " +
           std::to_string(sig.size() - sig_accepted) + "/" + std::to_string(sig.size()) + " rejected, checkpoint " +
           std::to_string(ck.size() - ck_accepted) + "/" + std::to_string(ck.size()) + " rejected (CRC)");
}

// ---- benchmark ----------------------------------------------------------------------------

void check_bench() {
  ModelConfig mc;
  mc.num_classes = 4;
  Rng rng(8);
  const DaeModel model = DaeModel::create(mc, rng);
  const BenchResult short_run = bench(model, 128, 10, 1.0);
  const BenchResult long_run = bench(model, 256, 10, 1.0);
  const double ratio = long_run.mean / short_run.mean;
  note("platform: " + short_run.platform);
  char buf[200];
  std::snprintf(buf, sizeof buf, "n=128: %.1f +- %.1f cls/s, n=256: %.1f +- %.1f cls/s (%zu reps each, %s)",
                short_run.mean, short_run.std, long_run.mean, long_run.std, long_run.repetitions,
                long_run.mode.c_str());
  note(buf);
  const bool ok = ratio >= 0.35 && ratio <= 0.65 && short_run.repetitions == 10 && long_run.repetitions == 10;
  emit(ok ? Verdict::kPass : Verdict::kFail, "benchmark-scaling",
       "throughput ratio n=256/n=128 " + fmt("%.3f", ratio) + " (need 0.35..0.65)");
}

std::set<std::string> selection;  // empty: run everything

bool wanted(const std::string& name) { return selection.empty() || selection.count(name) > 0; }

void guarded(const std::string& name, const std::function<void()>& fn) {
  if (!wanted(name)) return;
  try {
    fn();
  } catch (const std::exception& e) {
    emit(Verdict::kFail, name, std::string("threw: ") + e.what());
  }
}

}  // namespace

// Optional arguments name the criteria to run, e.g. `acceptance format-integrity`.
int main(int argc, char** argv) {
  selection.insert(argv + 1, argv + argc);
  const fs::path dir = fs::temp_directory_path() / "rfdae_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  guarded("parameter-count", check_params);
  guarded("gradient-check", check_gradients);
  guarded("analytic-oracles", check_oracles);
  guarded("lambda-boundaries", check_lambda_boundaries);
  guarded("determinism", [&] { check_determinism(dir); });
  guarded("format-integrity", [&] { check_formats(dir); });
  guarded("benchmark-scaling", check_bench);
  // The two desk-scale training runs take most of the runtime.
  if (wanted("end-to-end-synthetic") || wanted("denoising-guard")) {
    try {
      const Dataset ds = desk_dataset();
      const DeskRun masked = desk_run(ds, 0.1);
      if (wanted("end-to-end-synthetic")) check_end_to_end(masked);
      guarded("denoising-guard", [&] { check_mask_guard(ds, masked); });
    } catch (const std::exception& e) {
      for (const char* name : {"end-to-end-synthetic", "denoising-guard"}) {
        if (wanted(name)) emit(Verdict::kFail, name, std::string("threw: ") + e.what());
      }
    }
  }
  guarded("radioml2016-overall", check_radioml);

  fs::remove_all(dir);
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
