#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rfdae/matrix.hpp"
#include "rfdae/rng.hpp"

namespace rfdae {

enum class Modulation { kBpsk, kQpsk, kPsk8, kPam4, kQam16, kQam64, kGfsk, kCpfsk };

const char* to_string(Modulation mod);
// Accepts bpsk, qpsk, 8psk|psk8, pam4, qam16, qam64, gfsk, cpfsk (case-insensitive).
Modulation modulation_from_string(const std::string& name);

// Channel impairments, applied in order: timing offset, frequency offset, phase rotation, AWGN.
struct ChannelSpec {
  double snr_db = std::numeric_limits<double>::infinity();  // +inf: no noise
  double phase_rotation = 0.0;  // radians
  double freq_offset = 0.0;     // cycles per sample
  double timing_offset = 0.0;   // samples (fractional allowed)
  bool noise_enabled = true;
  bool phase_enabled = true;
  bool freq_enabled = true;
  bool timing_enabled = true;
};

struct PulseShape {
  double rolloff = 0.35;
  std::size_t samples_per_symbol = 8;
  std::size_t span_symbols = 8;  // RRC truncated to +-span_symbols
  double fsk_modulation_index = 0.5;
  double gfsk_bt = 0.3;
};

// Root-raised-cosine impulse response at time t (in symbol periods), peak-normalized form.
double rrc_pulse(double t, double rolloff);

// Complex baseband IQ as an n x 2 matrix [I, Q] with unit mean power before noise.
// Linear modulations are RRC pulse-shaped; GFSK/CPFSK are continuous-phase FM.
Matrix synthesize(Modulation mod, std::size_t n, const ChannelSpec& channel, Rng& rng,
                  const PulseShape& pulse = {});

// Mean |x|^2 over the rows of an n x 2 IQ matrix.
double mean_power(const Matrix& iq);

// Per-record random impairments for dataset generation.
struct ImpairmentRanges {
  bool random_phase = true;        // uniform in [0, 2 pi)
  bool random_timing = true;       // uniform in [0, samples_per_symbol)
  double max_freq_offset = 0.0;    // uniform in [-max, max]
};

struct GenConfig {
  std::vector<Modulation> modulations;
  std::vector<int> snrs_db;
  std::size_t per_class_per_snr = 100;
  std::size_t seq_len = 128;
  std::uint64_t seed = 0;
  PulseShape pulse;
  ImpairmentRanges impairments;
};

struct Dataset;

// Records ordered by (modulation, snr, index). Features are raw IQ (m = 2).
Dataset generate_dataset(const GenConfig& config);

// "lo:step:hi" inclusive, or a single integer, or a comma list of either.
std::vector<int> parse_snr_range(const std::string& spec);

}  // namespace rfdae
