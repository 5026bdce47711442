#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "rfdae/binary_io.hpp"
#include "rfdae/checkpoint.hpp"
#include "rfdae/dataset.hpp"
#include "rfdae/errors.hpp"
#include "rfdae/features.hpp"
#include "rfdae/model.hpp"
#include "rfdae/synth.hpp"

using namespace rfdae;
namespace fs = std::filesystem;

namespace {

ChannelSpec clean_channel() {
  ChannelSpec c;
  c.noise_enabled = false;
  c.phase_enabled = false;
  c.freq_enabled = false;
  c.timing_enabled = false;
  return c;
}

double column_energy(const Matrix& iq, std::size_t col) {
  double e = 0.0;
  for (std::size_t j = 0; j < iq.rows(); ++j) e += iq(j, col) * iq(j, col);
  return e;
}

// Measured noise power: same seed with and without AWGN, so the symbols match.
double measured_snr_db(double snr_db, std::uint64_t seed, std::size_t n) {
  ChannelSpec ch = clean_channel();
  Rng a(seed), b(seed);
  const Matrix clean = synthesize(Modulation::kQpsk, n, ch, a);
  ch.noise_enabled = true;
  ch.snr_db = snr_db;
  const Matrix noisy = synthesize(Modulation::kQpsk, n, ch, b);
  double noise = 0.0;
  for (std::size_t k = 0; k < clean.span().size(); ++k) {
    const double d = noisy.span()[k] - clean.span()[k];
    noise += d * d;
  }
  noise /= static_cast<double>(n);
  return 10.0 * std::log10(mean_power(clean) / noise);
}

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

void put_f32(std::vector<std::uint8_t>& b, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(b, bits);
}

// ||a - b||_2 / ||b||_2 over a whole output vector.
double relative_gap(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff / ref);
}

Dataset toy_dataset() {
  GenConfig g;
  g.modulations = {Modulation::kBpsk, Modulation::kQam16};
  g.snrs_db = {-4, 6};
  g.per_class_per_snr = 3;
  g.seq_len = 24;
  g.seed = 5;
  return generate_dataset(g);
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rfdae_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST(AmpPhase, SingleSampleClosedForm) {
  const Matrix f = iq_to_amp_phase(Matrix{{3.0, 4.0}});
  EXPECT_EQ(f(0, 0), 1.0);
  EXPECT_NEAR(f(0, 1), std::atan2(4.0, 3.0) / std::numbers::pi, 1e-15);
  EXPECT_NEAR(f(0, 1), 0.29517, 5e-6);
}

TEST(AmpPhase, NegativeRealAxisIsOne) {
  EXPECT_EQ(iq_to_amp_phase(Matrix{{-1.0, 0.0}})(0, 1), 1.0);
}

TEST(AmpPhase, UnitNormAndBoundedPhase) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix iq(64, 2);
    for (double& v : iq.span()) v = rng.normal();
    const Matrix f = iq_to_amp_phase(iq);
    EXPECT_NEAR(std::sqrt(column_energy(f, 0)), 1.0, 1e-9);
    for (std::size_t j = 0; j < 64; ++j) {
      EXPECT_GE(f(j, 1), -1.0);
      EXPECT_LE(f(j, 1), 1.0);
    }
  }
}

TEST(AmpPhase, AllZeroRejected) { EXPECT_THROW(iq_to_amp_phase(Matrix(4, 2)), NumericError); }

TEST(PsdFeatures, FullLengthUnchanged) {
  const std::vector<double> sweep{0.5, 1.5, 2.5, 3.5};
  const Matrix f = psd_features(sweep, 4);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(f(j, 0), sweep[j]);
}

TEST(PsdFeatures, ShortSweepZeroPaddedPrefixIntact) {
  const std::vector<double> sweep{0.5, 1.5, 2.5, 3.5, 4.5};
  const Matrix f = psd_features(sweep, 8);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(f(j, 0), sweep[j]);
  for (std::size_t j = 5; j < 8; ++j) EXPECT_EQ(f(j, 0), 0.0);
}

TEST(PsdFeatures, FlatSpectrumGivesConstantColumn) {
  const Matrix f = psd_features(std::vector<double>(16, 0.25), 16);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(f(j, 0), 0.25);
}

TEST(PsdFeatures, LongSweepRejected) {
  EXPECT_THROW(psd_features(std::vector<double>(9, 1.0), 8), ShapeError);
}

// An RRC pulse alone is not Nyquist; the matched filter makes the cascade raised-cosine.
TEST(Synthesize, NoiselessBpskHasTwoLevelsAtSymbolCenters) {
  const PulseShape pulse;
  const std::size_t sps = pulse.samples_per_symbol;
  const std::size_t n = 1024;
  Rng rng(2);
  const Matrix iq = synthesize(Modulation::kBpsk, n, clean_channel(), rng);
  for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(iq(j, 1), 0.0, 1e-12);

  const long half = static_cast<long>(pulse.span_symbols * sps);
  std::vector<double> centers;
  for (long j = half; j + half < static_cast<long>(n); j += static_cast<long>(sps)) {
    double acc = 0.0;
    for (long d = -half; d <= half; ++d) {
      acc += iq(static_cast<std::size_t>(j + d), 0) * rrc_pulse(static_cast<double>(d) / sps, pulse.rolloff);
    }
    centers.push_back(acc);
  }
  double mean_abs = 0.0;
  int positive = 0;
  for (double c : centers) {
    mean_abs += std::abs(c) / static_cast<double>(centers.size());
    positive += c > 0.0;
  }
  for (double c : centers) EXPECT_NEAR(std::abs(c), mean_abs, 0.05 * mean_abs);
  EXPECT_GT(positive, 0);
  EXPECT_LT(positive, static_cast<int>(centers.size()));
}

TEST(Synthesize, ZeroDbNoiseMatchesSignalPower) {
  const double snr = measured_snr_db(0.0, 3, 4096);
  EXPECT_NEAR(std::pow(10.0, -snr / 10.0), 1.0, 0.05);
}

TEST(Synthesize, MeasuredSnrWithinHalfDb) {
  for (double s : {0.0, 10.0, 20.0}) EXPECT_NEAR(measured_snr_db(s, 4, 4096), s, 0.5) << s;
}

TEST(Synthesize, QuarterTurnMovesBpskEnergyToQ) {
  ChannelSpec ch = clean_channel();
  Rng a(5), b(5);
  const Matrix plain = synthesize(Modulation::kBpsk, 256, ch, a);
  ch.phase_enabled = true;
  ch.phase_rotation = std::numbers::pi / 2.0;
  const Matrix rotated = synthesize(Modulation::kBpsk, 256, ch, b);
  EXPECT_LT(column_energy(rotated, 0), 1e-20 * column_energy(plain, 0) + 1e-20);
  EXPECT_NEAR(column_energy(rotated, 1), column_energy(plain, 0), 1e-9);
}

TEST(Synthesize, ShortSequenceRejected) {
  Rng rng(6);
  EXPECT_THROW(synthesize(Modulation::kQpsk, 8, clean_channel(), rng), ConfigError);
}

TEST(Synthesize, AllModulationsProduceFiniteUnitPower) {
  for (const char* name : {"bpsk", "qpsk", "8psk", "pam4", "qam16", "qam64", "gfsk", "cpfsk"}) {
    Rng rng(7);
    const Matrix iq = synthesize(modulation_from_string(name), 128, clean_channel(), rng);
    EXPECT_NEAR(mean_power(iq), 1.0, 1e-9) << name;
  }
  EXPECT_THROW(modulation_from_string("am-dsb"), ConfigError);
}

TEST(GenerateDataset, CountsAndOrdering) {
  const Dataset ds = toy_dataset();
  EXPECT_EQ(ds.size(), 2u * 2u * 3u);
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"BPSK", "QAM16"}));
  EXPECT_EQ(ds.records.front().label, 0);
  EXPECT_EQ(ds.records.front().snr_db, -4);
  EXPECT_EQ(ds.records.back().label, 1);
  EXPECT_EQ(ds.records.back().snr_db, 6);
}

TEST(Crc32, StandardCheckValue) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())), 0xCBF43926u);
}

TEST(Sigset, RoundTripPreservesEveryField) {
  const Dataset ds = toy_dataset();
  const auto bytes = encode_sigset(ds);
  const Dataset back = decode_sigset(bytes);
  EXPECT_TRUE(back.same_content(ds));
  EXPECT_EQ(encode_sigset(back), bytes);
}

TEST(Sigset, HandAssembledFixture) {
  std::vector<std::uint8_t> b{'S', 'I', 'G', 'S', 'E', 'T', 0, 0};
  put_u32(b, 1);  // version
  put_u32(b, 3);  // records
  put_u32(b, 2);  // n
  put_u32(b, 1);  // m
  put_u32(b, 2);  // K
  put_u16(b, 1);
  b.push_back('a');
  put_u16(b, 2);
  b.push_back('b');
  b.push_back('c');
  const float values[3][2] = {{1.0f, -2.0f}, {0.5f, 0.25f}, {-8.0f, 1e-3f}};
  const std::uint16_t labels[3] = {0, 1, 1};
  const std::int16_t snrs[3] = {-20, 0, 18};
  for (int r = 0; r < 3; ++r) {
    put_u16(b, labels[r]);
    put_u16(b, static_cast<std::uint16_t>(snrs[r]));
    put_f32(b, values[r][0]);
    put_f32(b, values[r][1]);
  }
  put_u32(b, crc32(b));

  const Dataset ds = decode_sigset(b);
  EXPECT_EQ(ds.seq_len, 2u);
  EXPECT_EQ(ds.num_features, 1u);
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"a", "bc"}));
  ASSERT_EQ(ds.size(), 3u);
  for (int r = 0; r < 3; ++r) {
    EXPECT_EQ(ds.records[r].label, labels[r]);
    EXPECT_EQ(ds.records[r].snr_db, snrs[r]);
    EXPECT_EQ(ds.records[r].features[0], values[r][0]);
    EXPECT_EQ(ds.records[r].features[1], values[r][1]);
  }
  EXPECT_EQ(encode_sigset(ds), b);
}

TEST(Sigset, TruncationNamesByteCounts) {
  auto bytes = encode_sigset(toy_dataset());
  const std::size_t full = bytes.size();
  bytes.resize(full - 10);
  try {
    decode_sigset(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatErrorKind::kTruncated);
    const std::string what = e.what();
    EXPECT_NE(what.find(std::to_string(full)), std::string::npos) << what;
    EXPECT_NE(what.find(std::to_string(full - 10)), std::string::npos) << what;
  }
}

TEST(Sigset, DistinctErrorKinds) {
  const auto good = encode_sigset(toy_dataset());
  auto bad_magic = good;
  bad_magic[0] = 'X';
  auto bad_version = good;
  bad_version[8] = 2;
  auto extra = good;
  extra.insert(extra.end() - 4, 0);
  const auto kind_of = [](const std::vector<std::uint8_t>& b) {
    try {
      decode_sigset(b);
    } catch (const FormatError& e) {
      return e.kind();
    }
    return FormatErrorKind::kIo;
  };
  EXPECT_EQ(kind_of(bad_magic), FormatErrorKind::kBadMagic);
  EXPECT_EQ(kind_of(bad_version), FormatErrorKind::kVersionMismatch);
  EXPECT_EQ(kind_of(extra), FormatErrorKind::kShapeMismatch);
}

TEST(Sigset, CorruptHeaderCountsRejectedWithoutAllocating) {
  const auto good = encode_sigset(toy_dataset());
  for (std::size_t field = 12; field < 28; field += 4) {
    auto bad = good;
    bad[field + 3] = 0xff;
    EXPECT_THROW(decode_sigset(bad), FormatError) << "field at " << field;
  }
}

TEST(Sigset, EverySingleByteFlipInPayloadDetected) {
  const auto good = encode_sigset(toy_dataset());
  for (std::size_t pos = 32; pos < good.size(); pos += 37) {
    auto bad = good;
    bad[pos] ^= 0x01;
    EXPECT_THROW(decode_sigset(bad), FormatError) << pos;
  }
}

TEST_F(TempDir, SigsetFileRoundTrip) {
  const Dataset ds = toy_dataset();
  dataset_write(ds, dir_ / "toy.sigset");
  EXPECT_TRUE(dataset_read(dir_ / "toy.sigset").same_content(ds));
  EXPECT_THROW(dataset_read(dir_ / "missing.sigset"), FormatError);
}

TEST_F(TempDir, CheckpointProbesAgreeToFloatPrecision) {
  ModelConfig c;
  c.num_classes = 5;
  c.final_relu = false;
  Rng rng(8);
  const DaeModel model = DaeModel::create(c, rng);
  checkpoint_write(model, dir_ / "m.ckpt");
  const DaeModel back = checkpoint_read(dir_ / "m.ckpt");
  EXPECT_EQ(back.config, model.config);
  for (int probe = 0; probe < 10; ++probe) {
    Matrix x(c.seq_len, 2);
    for (double& v : x.span()) v = rng.uniform(-1.0, 1.0);
    const ForwardResult a = predict(model, x);
    const ForwardResult b = predict(back, x);
    EXPECT_LE(relative_gap(b.probs.span(), a.probs.span()), 1e-6);
    EXPECT_LE(relative_gap(b.x_hat.span(), a.x_hat.span()), 1e-6);
  }
}

TEST(Checkpoint, ConfigFieldsRoundTrip) {
  ModelConfig c;
  c.input_features = 1;
  c.seq_len = 200;
  c.hidden = 7;
  c.encoder_depth = 3;
  c.classifier_hidden = {9, 5};
  c.num_classes = 6;
  c.final_relu = false;
  c.lambda = 0.3;
  c.mask_rate = 0.05;
  c.dropout_rate = 0.1;
  c.transform = FeatureTransform::kNone;
  const DaeModel back = decode_checkpoint(encode_checkpoint(DaeModel::zeros(c)));
  EXPECT_EQ(back.config.input_features, 1u);
  EXPECT_EQ(back.config.seq_len, 200u);
  EXPECT_EQ(back.config.hidden, 7u);
  EXPECT_EQ(back.config.encoder_depth, 3u);
  EXPECT_EQ(back.config.classifier_hidden, (std::array<std::size_t, 2>{9, 5}));
  EXPECT_EQ(back.config.num_classes, 6u);
  EXPECT_FALSE(back.config.final_relu);
  EXPECT_EQ(back.config.lambda, 0.3);
  EXPECT_EQ(back.config.mask_rate, 0.05);
  EXPECT_EQ(back.config.dropout_rate, 0.1);
  EXPECT_EQ(back.config.transform, FeatureTransform::kNone);
}

TEST(Checkpoint, ReencodingIsBitExact) {
  Rng rng(9);
  const DaeModel model = DaeModel::create(ModelConfig{}, rng);
  const auto bytes = encode_checkpoint(model);
  EXPECT_EQ(encode_checkpoint(decode_checkpoint(bytes)), bytes);
}

TEST(Checkpoint, HeaderByteFlipRejected) {
  Rng rng(10);
  const auto good = encode_checkpoint(DaeModel::create(ModelConfig{}, rng));
  for (std::size_t pos : {12u, 20u, 40u, 60u}) {
    auto bad = good;
    bad[pos] ^= 0x10;
    try {
      decode_checkpoint(bad);
      FAIL() << "accepted flip at " << pos;
    } catch (const FormatError& e) {
      EXPECT_EQ(e.kind(), FormatErrorKind::kChecksumMismatch) << pos;
    }
  }
  auto bad_magic = good;
  bad_magic[1] = 'x';
  EXPECT_THROW(decode_checkpoint(bad_magic), FormatError);
}
