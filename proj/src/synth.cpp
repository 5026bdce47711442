#include "rfdae/synth.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "rfdae/dataset.hpp"
#include "rfdae/errors.hpp"

namespace rfdae {

using cplx = std::complex<double>;

const char* to_string(Modulation mod) {
  switch (mod) {
    case Modulation::kBpsk: return "BPSK";
    case Modulation::kQpsk: return "QPSK";
    case Modulation::kPsk8: return "8PSK";
    case Modulation::kPam4: return "PAM4";
    case Modulation::kQam16: return "QAM16";
    case Modulation::kQam64: return "QAM64";
    case Modulation::kGfsk: return "GFSK";
    case Modulation::kCpfsk: return "CPFSK";
  }
  return "?";
}

Modulation modulation_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "bpsk") return Modulation::kBpsk;
  if (s == "qpsk") return Modulation::kQpsk;
  if (s == "8psk" || s == "psk8") return Modulation::kPsk8;
  if (s == "pam4") return Modulation::kPam4;
  if (s == "qam16") return Modulation::kQam16;
  if (s == "qam64") return Modulation::kQam64;
  if (s == "gfsk") return Modulation::kGfsk;
  if (s == "cpfsk") return Modulation::kCpfsk;
  throw ConfigError("unsupported modulation '" + name + "'");
}

double rrc_pulse(double t, double beta) {
  constexpr double pi = std::numbers::pi;
  if (std::abs(t) < 1e-12) return 1.0 - beta + 4.0 * beta / pi;
  if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
    return beta / std::sqrt(2.0) *
           ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * beta)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * beta)));
  }
  const double num = std::sin(pi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(pi * t * (1.0 + beta));
  const double den = pi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
  return num / den;
}

namespace {

cplx draw_symbol(Modulation mod, Rng& rng) {
  switch (mod) {
    case Modulation::kBpsk: return rng.below(2) == 0 ? -1.0 : 1.0;
    case Modulation::kQpsk: {
      const double s = 1.0 / std::sqrt(2.0);
      return {rng.below(2) == 0 ? -s : s, rng.below(2) == 0 ? -s : s};
    }
    case Modulation::kPsk8: {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(rng.below(8)) / 8.0;
      return std::polar(1.0, angle);
    }
    case Modulation::kPam4: {
      static constexpr std::array<double, 4> levels{-3, -1, 1, 3};
      return levels[rng.below(4)] / std::sqrt(5.0);
    }
    case Modulation::kQam16: {
      static constexpr std::array<double, 4> levels{-3, -1, 1, 3};
      const double s = 1.0 / std::sqrt(10.0);
      const double re = levels[rng.below(4)];
      const double im = levels[rng.below(4)];
      return {re * s, im * s};
    }
    case Modulation::kQam64: {
      static constexpr std::array<double, 8> levels{-7, -5, -3, -1, 1, 3, 5, 7};
      const double s = 1.0 / std::sqrt(42.0);
      const double re = levels[rng.below(8)];
      const double im = levels[rng.below(8)];
      return {re * s, im * s};
    }
    case Modulation::kGfsk:
    case Modulation::kCpfsk: return rng.below(2) == 0 ? -1.0 : 1.0;
  }
  throw ConfigError("unsupported modulation");
}

double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Frequency pulse of unit area over one symbol; GFSK smooths the rectangle with a Gaussian.
double frequency_pulse(Modulation mod, double t, double bt) {
  if (mod == Modulation::kCpfsk) return (t >= 0.0 && t < 1.0) ? 1.0 : 0.0;
  const double k = 2.0 * std::numbers::pi * bt / std::sqrt(std::log(2.0));
  return gaussian_q(k * (t - 1.0)) - gaussian_q(k * t);
}

std::vector<cplx> linear_waveform(Modulation mod, std::size_t n, double timing, Rng& rng,
                                  const PulseShape& pulse) {
  const double sps = static_cast<double>(pulse.samples_per_symbol);
  const auto span = static_cast<long>(pulse.span_symbols);
  const double t_first = (0.0 - timing) / sps;
  const double t_last = (static_cast<double>(n - 1) - timing) / sps;
  const long k0 = static_cast<long>(std::floor(t_first)) - span;
  const long k1 = static_cast<long>(std::ceil(t_last)) + span;
  std::vector<cplx> symbols;
  symbols.reserve(static_cast<std::size_t>(k1 - k0 + 1));
  for (long k = k0; k <= k1; ++k) symbols.push_back(draw_symbol(mod, rng));

  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) - timing) / sps;
    const long lo = std::max(k0, static_cast<long>(std::ceil(t)) - span);
    const long hi = std::min(k1, static_cast<long>(std::floor(t)) + span);
    cplx acc = 0.0;
    for (long k = lo; k <= hi; ++k) acc += symbols[static_cast<std::size_t>(k - k0)] * rrc_pulse(t - static_cast<double>(k), pulse.rolloff);
    out[j] = acc;
  }
  return out;
}

std::vector<cplx> fsk_waveform(Modulation mod, std::size_t n, double timing, Rng& rng,
                               const PulseShape& pulse) {
  const double sps = static_cast<double>(pulse.samples_per_symbol);
  const long span = mod == Modulation::kGfsk ? 3 : 1;
  const double t_last = (static_cast<double>(n - 1) - timing) / sps;
  const long k0 = static_cast<long>(std::floor(-timing / sps)) - span;
  const long k1 = static_cast<long>(std::ceil(t_last)) + span;
  std::vector<double> symbols;
  for (long k = k0; k <= k1; ++k) symbols.push_back(draw_symbol(mod, rng).real());

  std::vector<cplx> out(n);
  double phase = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) - timing) / sps;
    double freq = 0.0;
    for (long k = std::max(k0, static_cast<long>(std::floor(t)) - span);
         k <= std::min(k1, static_cast<long>(std::floor(t)) + span); ++k) {
      freq += symbols[static_cast<std::size_t>(k - k0)] *
              frequency_pulse(mod, t - static_cast<double>(k), pulse.gfsk_bt);
    }
    phase += std::numbers::pi * pulse.fsk_modulation_index * freq / sps;
    out[j] = std::polar(1.0, phase);
  }
  return out;
}

}  // namespace

double mean_power(const Matrix& iq) {
  if (iq.rows() == 0) return 0.0;
  double p = 0.0;
  for (std::size_t j = 0; j < iq.rows(); ++j) p += iq(j, 0) * iq(j, 0) + iq(j, 1) * iq(j, 1);
  return p / static_cast<double>(iq.rows());
}

Matrix synthesize(Modulation mod, std::size_t n, const ChannelSpec& channel, Rng& rng,
                  const PulseShape& pulse) {
  if (n < 16) throw ConfigError("synthesize: sequence length must be at least 16");
  if (pulse.samples_per_symbol == 0) throw ConfigError("synthesize: samples_per_symbol must be positive");
  if (!(pulse.rolloff > 0.0 && pulse.rolloff <= 1.0)) throw ConfigError("synthesize: rolloff must be in (0, 1]");
  const double timing = channel.timing_enabled ? channel.timing_offset : 0.0;

  std::vector<cplx> s = (mod == Modulation::kGfsk || mod == Modulation::kCpfsk)
                            ? fsk_waveform(mod, n, timing, rng, pulse)
                            : linear_waveform(mod, n, timing, rng, pulse);

  double power = 0.0;
  for (const cplx& v : s) power += std::norm(v);
  power /= static_cast<double>(n);
  if (power > 0.0) {
    const double g = 1.0 / std::sqrt(power);
    for (cplx& v : s) v *= g;
  }

  if (channel.freq_enabled && channel.freq_offset != 0.0) {
    for (std::size_t j = 0; j < n; ++j) {
      s[j] *= std::polar(1.0, 2.0 * std::numbers::pi * channel.freq_offset * static_cast<double>(j));
    }
  }
  if (channel.phase_enabled && channel.phase_rotation != 0.0) {
    const cplx rot = std::polar(1.0, channel.phase_rotation);
    for (cplx& v : s) v *= rot;
  }

  Matrix out(n, 2);
  for (std::size_t j = 0; j < n; ++j) {
    out(j, 0) = s[j].real();
    out(j, 1) = s[j].imag();
  }
  if (channel.noise_enabled && std::isfinite(channel.snr_db)) {
    const double signal_power = mean_power(out);
    const double noise_power = signal_power / std::pow(10.0, channel.snr_db / 10.0);
    const double sigma = std::sqrt(noise_power / 2.0);
    for (std::size_t j = 0; j < n; ++j) {
      out(j, 0) += sigma * rng.normal();
      out(j, 1) += sigma * rng.normal();
    }
  }
  return out;
}

Dataset generate_dataset(const GenConfig& config) {
  if (config.modulations.empty()) throw ConfigError("generate_dataset: no modulations given");
  if (config.snrs_db.empty()) throw ConfigError("generate_dataset: no SNRs given");
  if (config.per_class_per_snr == 0) throw ConfigError("generate_dataset: per-class count must be positive");
  if (config.modulations.size() > 0xffff) throw ConfigError("generate_dataset: too many classes");

  Dataset ds;
  ds.seq_len = config.seq_len;
  ds.num_features = 2;
  for (Modulation m : config.modulations) ds.class_names.emplace_back(to_string(m));
  std::ostringstream prov;
  prov << "synthetic seed=" << config.seed << " len=" << config.seq_len << " sps="
       << config.pulse.samples_per_symbol << " rolloff=" << config.pulse.rolloff;
  ds.provenance = prov.str();

  const Rng root = Rng(config.seed).substream("synth");
  std::uint64_t index = 0;
  ds.records.reserve(config.modulations.size() * config.snrs_db.size() * config.per_class_per_snr);
  for (std::size_t c = 0; c < config.modulations.size(); ++c) {
    for (int snr : config.snrs_db) {
      if (snr < -32768 || snr > 32767) throw ConfigError("SNR out of i16 range");
      for (std::size_t r = 0; r < config.per_class_per_snr; ++r, ++index) {
        Rng rng = root.child(index);
        ChannelSpec ch;
        ch.snr_db = snr;
        if (config.impairments.random_phase) ch.phase_rotation = rng.uniform(0.0, 2.0 * std::numbers::pi);
        if (config.impairments.random_timing) {
          ch.timing_offset = rng.uniform(0.0, static_cast<double>(config.pulse.samples_per_symbol));
        }
        if (config.impairments.max_freq_offset > 0.0) {
          ch.freq_offset = rng.uniform(-config.impairments.max_freq_offset, config.impairments.max_freq_offset);
        }
        const Matrix iq = synthesize(config.modulations[c], config.seq_len, ch, rng, config.pulse);
        SignalRecord rec;
        rec.label = static_cast<std::uint16_t>(c);
        rec.snr_db = static_cast<std::int16_t>(snr);
        rec.features.assign(iq.span().begin(), iq.span().end());
        ds.records.push_back(std::move(rec));
      }
    }
  }
  return ds;
}

std::vector<int> parse_snr_range(const std::string& spec) {
  std::vector<int> out;
  std::stringstream items(spec);
  std::string item;
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigError("bad SNR value '" + s + "' in '" + spec + "'");
    return v;
  };
  while (std::getline(items, item, ',')) {
    const auto first = item.find(':');
    if (first == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    const auto second = item.find(':', first + 1);
    if (second == std::string::npos) throw ConfigError("SNR range must be lo:step:hi, got '" + item + "'");
    const int lo = to_int(item.substr(0, first));
    const int step = to_int(item.substr(first + 1, second - first - 1));
    const int hi = to_int(item.substr(second + 1));
    if (step <= 0 || hi < lo) throw ConfigError("SNR range needs step > 0 and lo <= hi: '" + item + "'");
    for (int v = lo; v <= hi; v += step) out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty SNR specification");
  return out;
}

}  // namespace rfdae
