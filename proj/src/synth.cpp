#include "eogscrub/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "eogscrub/rng.hpp"

namespace eogscrub {

void SynthConfig::validate() const {
  const double nyquist = sample_rate_hz / 2.0;
  if (n_subjects == 0) throw InvalidConfig("synth: n_subjects must be positive");
  if (n_samples < kMinRecordSamples)
    throw InvalidConfig("synth: n_samples must be at least " + std::to_string(kMinRecordSamples));
  if (!(eeg_band_lo_hz > 0.0) || !(eeg_band_hi_hz > eeg_band_lo_hz) || eeg_band_hi_hz >= nyquist)
    throw BadBand("synth: EEG band must lie inside (0, nyquist)");
  if (!(eog_band_lo_hz > 0.0) || !(eog_band_hi_hz > eog_band_lo_hz) || eog_band_hi_hz >= nyquist)
    throw BadBand("synth: EOG band must lie inside (0, nyquist)");
  if (!(eeg_amp_uv > 0.0) || !(eog_amp_uv > 0.0))
    throw InvalidConfig("synth: amplitudes must be positive");
  if (!(eog_amp_uv > eeg_amp_uv))
    throw InvalidConfig("synth: artifact amplitude must exceed EEG amplitude");
}

void ContaminationCoeffs::validate() const {
  for (int j = 0; j < kNumChannels; ++j) {
    if (!std::isfinite(a[size_t(j)]) || !std::isfinite(b[size_t(j)]))
      throw InvalidConfig("coeffs: non-finite weight");
    if (a[size_t(j)] < 0.0f) throw InvalidConfig("coeffs: a_j must be nonnegative");
  }
}

ContaminationCoeffs default_coeffs() {
  ContaminationCoeffs c;
  auto set = [&c](const char* label, float a_val) {
    c.a[size_t(ChannelLabel::from_name(label).index)] = a_val;
  };
  // Frontal 0.6-1.0
  set("FP1", 1.00f); set("FP2", 0.98f); set("F7", 0.82f); set("F8", 0.80f);
  set("F3", 0.75f); set("F4", 0.74f); set("Fz", 0.70f);
  // Central / temporal / parietal 0.2-0.5
  set("C3", 0.40f); set("C4", 0.39f); set("Cz", 0.35f);
  set("T3", 0.30f); set("T4", 0.30f); set("T5", 0.28f); set("T6", 0.27f);
  set("P3", 0.25f); set("P4", 0.24f); set("Pz", 0.22f);
  // Occipital 0.05-0.15
  set("O1", 0.13f); set("O2", 0.12f);

  for (int j = 0; j < kNumChannels; ++j) {
    const std::string_view name = kChannelLabels[size_t(j)];
    const char last = name.back();
    float sign = 0.0f;  // midline ('z') gets no horizontal component
    if (last >= '0' && last <= '9') sign = ((last - '0') % 2 == 1) ? 1.0f : -1.0f;
    c.b[size_t(j)] = sign * 0.5f * c.a[size_t(j)];
  }
  return c;
}

namespace {

// Sum of `count` unit-variance-normalized sinusoids with distinct frequencies
// on the length-n DFT grid inside [lo_hz, hi_hz]. Each on-grid sinusoid sums
// to exactly zero over the window and is orthogonal to the others, so the
// result has zero mean, RMS == rms_uv, and no energy outside the band.
std::vector<float> bandlimited_noise(Rng& rng, uint32_t n, float fs, double lo_hz, double hi_hz,
                                     double rms_uv, int count) {
  const double df = double(fs) / double(n);
  const int64_t bin_lo = int64_t(std::ceil(lo_hz / df));
  const int64_t bin_hi = int64_t(std::floor(hi_hz / df));
  std::set<int64_t> bins;
  while (int64_t(bins.size()) < count && int64_t(bins.size()) < bin_hi - bin_lo + 1) {
    bins.insert(bin_lo + int64_t(rng.below(uint64_t(bin_hi - bin_lo + 1))));
  }
  const double amp = rms_uv * std::sqrt(2.0 / double(bins.size()));
  std::vector<double> acc(n, 0.0);
  for (const int64_t bin : bins) {
    const double omega = 2.0 * std::numbers::pi * double(bin) / double(n);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (uint32_t t = 0; t < n; ++t) acc[t] += amp * std::sin(omega * double(t) + phase);
  }
  std::vector<float> out(n);
  for (uint32_t t = 0; t < n; ++t) out[t] = float(acc[t]);
  return out;
}

}  // namespace

std::vector<float> gen_pure_eeg(const SynthConfig& cfg, uint32_t subject, uint32_t channel) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, RngStream::kPureEeg, subject, channel));
  return bandlimited_noise(rng, cfg.n_samples, cfg.sample_rate_hz, cfg.eeg_band_lo_hz,
                           cfg.eeg_band_hi_hz, cfg.eeg_amp_uv, 48);
}

EogPair gen_eog(const SynthConfig& cfg, uint32_t subject) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, RngStream::kEog, subject));
  const uint32_t n = cfg.n_samples;
  const double fs = cfg.sample_rate_hz;

  EogPair eog;
  // Vertical: small low-frequency baseline plus blink pulses.
  eog.veog = bandlimited_noise(rng, n, cfg.sample_rate_hz, cfg.eog_band_lo_hz,
                               cfg.eog_band_hi_hz, 0.1 * cfg.eog_amp_uv, 16);
  const int n_blinks = 3 + int(rng.below(6));  // 3..8
  for (int blink = 0; blink < n_blinks; ++blink) {
    const double width_s = rng.uniform(0.3, 0.5);
    const double amp = cfg.eog_amp_uv * rng.uniform(0.9, 1.1);
    const int width = int(width_s * fs);
    const int start = int(rng.below(uint64_t(n - uint32_t(width))));
    for (int t = 0; t < width; ++t) {
      const double tau = double(t) / double(width - 1);
      eog.veog[size_t(start + t)] +=
          float(amp * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * tau)));
    }
  }
  // Horizontal: band-limited drift only.
  eog.heog = bandlimited_noise(rng, n, cfg.sample_rate_hz, cfg.eog_band_lo_hz,
                               cfg.eog_band_hi_hz, 0.4 * cfg.eog_amp_uv, 24);
  return eog;
}

EegRecord gen_pure_record(const SynthConfig& cfg, uint32_t subject) {
  cfg.validate();
  std::vector<float> samples;
  samples.reserve(size_t(kNumChannels) * cfg.n_samples);
  for (uint32_t ch = 0; ch < uint32_t(kNumChannels); ++ch) {
    const auto row = gen_pure_eeg(cfg, subject, ch);
    samples.insert(samples.end(), row.begin(), row.end());
  }
  return EegRecord(subject, cfg.sample_rate_hz, cfg.n_samples, std::move(samples));
}

EegRecord contaminate(const EegRecord& pure, const EogPair& eog,
                      const ContaminationCoeffs& coeffs) {
  coeffs.validate();
  const uint32_t n = pure.n_samples();
  if (eog.veog.size() != n || eog.heog.size() != n)
    throw LengthMismatch("contaminate: EOG length does not match the record");
  std::vector<float> samples(size_t(kNumChannels) * n);
  for (int j = 0; j < kNumChannels; ++j) {
    const auto row = pure.channel(j);
    const float a = coeffs.a[size_t(j)];
    const float b = coeffs.b[size_t(j)];
    float* out = samples.data() + size_t(j) * n;
    for (uint32_t t = 0; t < n; ++t) out[t] = row[t] + a * eog.veog[t] + b * eog.heog[t];
  }
  return EegRecord(pure.subject_id(), pure.sample_rate_hz(), n, std::move(samples));
}

std::vector<SignalPair> make_dataset(const SynthConfig& cfg, const ContaminationCoeffs& coeffs) {
  cfg.validate();
  coeffs.validate();
  std::vector<SignalPair> pairs;
  pairs.reserve(cfg.n_subjects);
  for (uint32_t s = 0; s < cfg.n_subjects; ++s) {
    EegRecord pure = gen_pure_record(cfg, s);
    const EogPair eog = gen_eog(cfg, s);
    EegRecord cont = contaminate(pure, eog, coeffs);
    pairs.emplace_back(std::move(pure), std::move(cont));
  }
  return pairs;
}

void write_coeffs_file(const std::filesystem::path& path, const ContaminationCoeffs& coeffs,
                       uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw FormatError("coeffs: cannot open for writing: " + path.string());
  out << "seed = " << seed << "\n";
  char buf[64];
  for (int j = 0; j < kNumChannels; ++j) {
    std::snprintf(buf, sizeof(buf), "%.9g", double(coeffs.a[size_t(j)]));
    out << "a." << kChannelLabels[size_t(j)] << " = " << buf << "\n";
  }
  for (int j = 0; j < kNumChannels; ++j) {
    std::snprintf(buf, sizeof(buf), "%.9g", double(coeffs.b[size_t(j)]));
    out << "b." << kChannelLabels[size_t(j)] << " = " << buf << "\n";
  }
  if (!out) throw FormatError("coeffs: write failed: " + path.string());
}

ContaminationCoeffs read_coeffs_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("coeffs: cannot open: " + path.string());
  ContaminationCoeffs coeffs;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "seed" || key.empty()) continue;
    if (key.size() < 3 || key[1] != '.' || (key[0] != 'a' && key[0] != 'b'))
      throw FormatError("coeffs: unknown key: " + key);
    const int j = ChannelLabel::from_name(key.substr(2)).index;
    const float v = std::stof(value);
    (key[0] == 'a' ? coeffs.a : coeffs.b)[size_t(j)] = v;
  }
  coeffs.validate();
  return coeffs;
}

}  // namespace eogscrub
