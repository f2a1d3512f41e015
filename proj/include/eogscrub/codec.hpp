#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "eogscrub/record.hpp"

namespace eogscrub {

inline constexpr int32_t kAllChannels = -1;

// Signal-to-image pipeline settings. Per-channel planes use 6400 -> 80x80;
// whole-record planes use 131072 -> 512x256.
struct CodecConfig {
  double cutoff_hz = 40.0;
  uint32_t filter_taps = 101;
  uint32_t truncate_len = 5400;
  uint32_t resample_len = 6400;
  uint32_t image_height = 80;
  uint32_t image_width = 80;
  float y_min = 0.0f;
  float y_max = 1.0f;
  double sample_rate_hz = 200.0;

  void validate() const;

  static CodecConfig per_channel();   // 80 x 80
  static CodecConfig whole_record();  // 512 x 256
};

// Affine min-max transform state: y = (x - x_min)/(x_max - x_min) * (y_max -
// y_min) + y_min. `degenerate` marks a constant input (x_max == x_min), where
// outputs were pinned to the midpoint and the map is not invertible.
struct NormParams {
  float x_min = 0.0f;
  float x_max = 1.0f;
  float y_min = 0.0f;
  float y_max = 1.0f;
  bool degenerate = false;
};

// One normalized grayscale plane plus the transform state needed to invert it
// and the provenance of the encoded signal.
struct ImageSample {
  uint32_t height = 0;
  uint32_t width = 0;
  std::vector<float> pixels;  // row-major, height * width, in [y_min, y_max]
  NormParams norm;
  uint32_t subject_id = 0;
  int32_t channel = kAllChannels;  // kAllChannels for whole-record planes
  uint8_t method = 1;

  float& at(uint32_t r, uint32_t c) { return pixels[size_t(r) * width + c]; }
  float at(uint32_t r, uint32_t c) const { return pixels[size_t(r) * width + c]; }
};

// Windowed-sinc (Hamming) low-pass coefficients, odd length, unit DC gain.
std::vector<double> design_lowpass(double cutoff_hz, double sample_rate_hz, uint32_t taps);

// Zero-phase FIR: the symmetric kernel is applied center-aligned with
// mirrored edge padding, so output length equals input length and waveforms
// stay time-aligned.
std::vector<float> lowpass_filter(std::span<const float> x, double cutoff_hz,
                                  double sample_rate_hz, uint32_t taps);

// Linear interpolation onto the uniform grid t_k = k*(n_in-1)/(n_out-1);
// endpoints are preserved exactly.
std::vector<float> resample_linear(std::span<const float> x, size_t n_out);

std::pair<std::vector<float>, NormParams> minmax_normalize(std::span<const float> x,
                                                           float y_min, float y_max);
std::vector<float> minmax_denormalize(std::span<const float> y, const NormParams& params);

// 8-bit export path: q = round-half-up(255 * v) for v in [0, 1]; v' = q/255.
std::vector<uint8_t> quantize_u8(std::span<const float> v);
std::vector<float> dequantize_u8(std::span<const uint8_t> q);

// truncate -> filter -> resample -> normalize -> reshape row-major.
ImageSample channel_to_image(const EegRecord& rec, int channel, const CodecConfig& cfg,
                             uint8_t method = 1);
// Same pipeline but normalizing with caller-supplied params (the contaminated
// counterpart's), values clamped into [y_min, y_max].
ImageSample channel_to_image(const EegRecord& rec, int channel, const CodecConfig& cfg,
                             const NormParams& shared, uint8_t method);

// Per-channel truncate + filter, channels concatenated in label order, one
// global resample and normalization, reshaped row-major.
ImageSample record_to_image(const EegRecord& rec, const CodecConfig& cfg);
ImageSample record_to_image(const EegRecord& rec, const CodecConfig& cfg,
                            const NormParams& shared);

// Inverse path: denormalize with the image's stored params, then resample
// back to truncate_len per channel.
std::vector<float> image_to_channel(const ImageSample& img, const CodecConfig& cfg);
EegRecord image_to_record(const ImageSample& img, const CodecConfig& cfg,
                          uint32_t subject_id, float sample_rate_hz);

// EIMG v1 container, little-endian:
//   "EIMG" | u32 version | u32 height | u32 width | f32 x_min | f32 x_max |
//   u8 degenerate | u32 subject | i32 channel (-1 = whole record) |
//   u8 method | row-major f32 pixels
void write_eimg(const std::filesystem::path& path, const ImageSample& img);
ImageSample read_eimg(const std::filesystem::path& path);

}  // namespace eogscrub
