#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "eogscrub/channels.hpp"
#include "eogscrub/errors.hpp"

namespace eogscrub {

inline constexpr uint32_t kMinRecordSamples = 5400;

// One multichannel recording: 19 rows of n_samples 32-bit floats, microvolts,
// channel-major.
class EegRecord {
 public:
  EegRecord() = default;
  EegRecord(uint32_t subject_id, float sample_rate_hz, uint32_t n_samples,
            std::vector<float> samples);

  uint32_t subject_id() const { return subject_id_; }
  float sample_rate_hz() const { return sample_rate_hz_; }
  uint32_t n_samples() const { return n_samples_; }
  int n_channels() const { return kNumChannels; }

  std::span<const float> channel(int j) const {
    return std::span<const float>(samples_).subspan(size_t(j) * n_samples_, n_samples_);
  }
  std::span<float> channel(int j) {
    return std::span<float>(samples_).subspan(size_t(j) * n_samples_, n_samples_);
  }
  const std::vector<float>& data() const { return samples_; }

 private:
  uint32_t subject_id_ = 0;
  float sample_rate_hz_ = 200.0f;
  uint32_t n_samples_ = 0;
  std::vector<float> samples_;  // kNumChannels * n_samples_, channel-major
};

// Aligned pure/contaminated records for one subject.
struct SignalPair {
  EegRecord pure;
  EegRecord contaminated;

  SignalPair() = default;
  SignalPair(EegRecord pure_rec, EegRecord cont_rec);
};

// EEGR v1 container, little-endian:
//   "EEGR" | u32 version | u32 subject_id | u32 n_channels | u32 n_samples |
//   f32 sample_rate_hz | channel-major f32 payload
void write_eegr(const std::filesystem::path& path, const EegRecord& rec);
EegRecord read_eegr(const std::filesystem::path& path);

}  // namespace eogscrub
