#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "eogscrub/record.hpp"

namespace eogscrub {

// Seeded generator settings for the semi-simulated dataset. Amplitudes are
// microvolts; the artifact amplitude must dominate the EEG amplitude.
struct SynthConfig {
  uint32_t n_subjects = 54;
  uint32_t n_samples = 6000;
  uint64_t seed = 0;
  float sample_rate_hz = 200.0f;
  double eeg_band_lo_hz = 0.5;
  double eeg_band_hi_hz = 40.0;
  double eog_band_lo_hz = 0.5;
  double eog_band_hi_hz = 5.0;
  double eeg_amp_uv = 20.0;
  double eog_amp_uv = 100.0;

  void validate() const;
};

// Per-channel mixing weights of the linear contamination model
//   contaminated_j = pure_j + a_j * veog + b_j * heog.
// a_j is nonnegative; b_j carries the left/right sign asymmetry of the
// horizontal component, so it may be negative.
struct ContaminationCoeffs {
  std::array<float, kNumChannels> a{};
  std::array<float, kNumChannels> b{};

  void validate() const;
};

// Topographically decaying default profile: frontal sites get the strongest
// vertical weights, occipital the weakest; |b_j| = 0.5 * a_j signed by
// hemisphere (zero on the midline).
ContaminationCoeffs default_coeffs();

struct EogPair {
  std::vector<float> veog;
  std::vector<float> heog;
};

// Zero-mean band-limited noise: a sum of 48 random-phase sinusoids with
// frequencies drawn uniformly in the EEG band and snapped to the n_samples
// DFT grid (distinct bins), equal amplitudes scaled so RMS == eeg_amp_uv.
// Deterministic in (seed, subject, channel).
std::vector<float> gen_pure_eeg(const SynthConfig& cfg, uint32_t subject, uint32_t channel);

// VEOG: low-frequency baseline plus 3-8 raised-cosine blink pulses of width
// 0.3-0.5 s and amplitude ~eog_amp_uv. HEOG: band-limited 0.5-5 Hz drift.
// Deterministic in (seed, subject).
EogPair gen_eog(const SynthConfig& cfg, uint32_t subject);

EegRecord gen_pure_record(const SynthConfig& cfg, uint32_t subject);

EegRecord contaminate(const EegRecord& pure, const EogPair& eog,
                      const ContaminationCoeffs& coeffs);

std::vector<SignalPair> make_dataset(const SynthConfig& cfg, const ContaminationCoeffs& coeffs);

// coeffs.txt sidecar: seed plus a.<LABEL> / b.<LABEL> entries, key = value.
void write_coeffs_file(const std::filesystem::path& path, const ContaminationCoeffs& coeffs,
                       uint64_t seed);
ContaminationCoeffs read_coeffs_file(const std::filesystem::path& path);

}  // namespace eogscrub
