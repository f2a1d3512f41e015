#include "eogscrub/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace eogscrub {

void CodecConfig::validate() const {
  if (!(cutoff_hz > 0.0) || cutoff_hz >= sample_rate_hz / 2.0)
    throw BadCutoff("codec: cutoff must lie in (0, nyquist)");
  if (filter_taps % 2 == 0 || filter_taps < 3)
    throw InvalidConfig("codec: filter_taps must be odd and >= 3");
  if (size_t(image_height) * image_width != resample_len)
    throw InvalidConfig("codec: image dims must multiply to resample_len");
  if (truncate_len < filter_taps)
    throw InvalidConfig("codec: truncate_len shorter than the filter");
  if (!(y_max > y_min)) throw InvalidConfig("codec: y_max must exceed y_min");
}

CodecConfig CodecConfig::per_channel() { return CodecConfig{}; }

CodecConfig CodecConfig::whole_record() {
  CodecConfig cfg;
  cfg.resample_len = 131072;
  cfg.image_height = 512;
  cfg.image_width = 256;
  return cfg;
}

std::vector<double> design_lowpass(double cutoff_hz, double sample_rate_hz, uint32_t taps) {
  if (!(cutoff_hz > 0.0) || cutoff_hz >= sample_rate_hz / 2.0)
    throw BadCutoff("design_lowpass: cutoff must lie in (0, nyquist)");
  if (taps % 2 == 0 || taps < 3)
    throw InvalidConfig("design_lowpass: taps must be odd and >= 3");
  const double fc = cutoff_hz / sample_rate_hz;  // cycles per sample
  const uint32_t order = taps - 1;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (uint32_t n = 0; n < taps; ++n) {
    const double m = double(n) - double(order) / 2.0;
    double v = (m == 0.0) ? 2.0 * fc
                          : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
    v *= 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * double(n) / double(order));
    h[n] = v;
    sum += v;
  }
  for (auto& v : h) v /= sum;  // unit DC gain
  return h;
}

namespace {

// Mirror index about the edges (without repeating the edge sample).
inline size_t mirror_index(int64_t i, int64_t n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return size_t(i);
}

}  // namespace

std::vector<float> lowpass_filter(std::span<const float> x, double cutoff_hz,
                                  double sample_rate_hz, uint32_t taps) {
  if (x.size() < taps)
    throw SignalTooShort("lowpass_filter: signal shorter than the filter (" +
                         std::to_string(x.size()) + " < " + std::to_string(taps) + ")");
  const std::vector<double> h = design_lowpass(cutoff_hz, sample_rate_hz, taps);
  const int64_t n = int64_t(x.size());
  const int64_t half = int64_t(taps) / 2;
  std::vector<float> y(x.size());
  for (int64_t t = 0; t < n; ++t) {
    double acc = 0.0;
    const int64_t base = t - half;
    if (base >= 0 && base + int64_t(taps) <= n) {
      const float* px = x.data() + base;
      for (uint32_t k = 0; k < taps; ++k) acc += h[k] * double(px[k]);
    } else {
      for (uint32_t k = 0; k < taps; ++k) acc += h[k] * double(x[mirror_index(base + k, n)]);
    }
    y[size_t(t)] = float(acc);
  }
  return y;
}

std::vector<float> resample_linear(std::span<const float> x, size_t n_out) {
  if (x.size() < 2) throw TooShort("resample_linear: need at least 2 input samples");
  if (n_out == 0) throw TooShort("resample_linear: n_out must be positive");
  std::vector<float> y(n_out);
  if (n_out == 1) {
    y[0] = x[0];
    return y;
  }
  const double num = double(x.size() - 1);
  const double den = double(n_out - 1);
  for (size_t k = 0; k < n_out; ++k) {
    const double pos = double(k) * num / den;
    size_t i = size_t(pos);
    if (i >= x.size() - 1) i = x.size() - 2;
    const double frac = pos - double(i);
    y[k] = float((1.0 - frac) * double(x[i]) + frac * double(x[i + 1]));
  }
  return y;
}

std::pair<std::vector<float>, NormParams> minmax_normalize(std::span<const float> x,
                                                           float y_min, float y_max) {
  if (x.empty()) throw EmptyInput("minmax_normalize: empty input");
  if (!(y_max > y_min)) throw InvalidConfig("minmax_normalize: y_max must exceed y_min");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  NormParams params{*lo_it, *hi_it, y_min, y_max, *lo_it == *hi_it};
  std::vector<float> y(x.size());
  if (params.degenerate) {
    std::fill(y.begin(), y.end(), 0.5f * (y_min + y_max));
    return {std::move(y), params};
  }
  const float scale = (y_max - y_min) / (params.x_max - params.x_min);
  for (size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - params.x_min) * scale + y_min;
  return {std::move(y), params};
}

std::vector<float> minmax_denormalize(std::span<const float> y, const NormParams& params) {
  if (params.degenerate)
    throw DegenerateParams("minmax_denormalize: params from a constant signal are not invertible");
  if (!(params.y_max > params.y_min))
    throw DegenerateParams("minmax_denormalize: invalid y range");
  const float scale = (params.x_max - params.x_min) / (params.y_max - params.y_min);
  std::vector<float> x(y.size());
  for (size_t i = 0; i < y.size(); ++i) x[i] = (y[i] - params.y_min) * scale + params.x_min;
  return x;
}

std::vector<uint8_t> quantize_u8(std::span<const float> v) {
  std::vector<uint8_t> q(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0f && v[i] <= 1.0f))
      throw OutOfRange("quantize_u8: value outside [0, 1]: " + std::to_string(v[i]));
    q[i] = uint8_t(std::floor(255.0f * v[i] + 0.5f));  // round half up
  }
  return q;
}

std::vector<float> dequantize_u8(std::span<const uint8_t> q) {
  std::vector<float> v(q.size());
  for (size_t i = 0; i < q.size(); ++i) v[i] = float(q[i]) / 255.0f;
  return v;
}

namespace {

std::vector<float> filtered_truncated_channel(const EegRecord& rec, int channel,
                                              const CodecConfig& cfg) {
  if (channel < 0 || channel >= kNumChannels)
    throw InvalidConfig("codec: channel index out of range");
  if (rec.n_samples() < cfg.truncate_len)
    throw SignalTooShort("codec: record shorter than truncate_len");
  const auto row = rec.channel(channel).first(cfg.truncate_len);
  return lowpass_filter(row, cfg.cutoff_hz, cfg.sample_rate_hz, cfg.filter_taps);
}

ImageSample finish_image(std::vector<float> plane, NormParams norm, const CodecConfig& cfg,
                         uint32_t subject, int32_t channel, uint8_t method) {
  ImageSample img;
  img.height = cfg.image_height;
  img.width = cfg.image_width;
  img.pixels = std::move(plane);
  img.norm = norm;
  img.subject_id = subject;
  img.channel = channel;
  img.method = method;
  return img;
}

std::vector<float> apply_shared_norm(std::span<const float> x, const NormParams& shared) {
  if (shared.degenerate)
    throw DegenerateParams("codec: shared normalization params are degenerate");
  const float scale = (shared.y_max - shared.y_min) / (shared.x_max - shared.x_min);
  std::vector<float> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const float v = (x[i] - shared.x_min) * scale + shared.y_min;
    y[i] = std::clamp(v, shared.y_min, shared.y_max);
  }
  return y;
}

}  // namespace

ImageSample channel_to_image(const EegRecord& rec, int channel, const CodecConfig& cfg,
                             uint8_t method) {
  cfg.validate();
  const auto filtered = filtered_truncated_channel(rec, channel, cfg);
  const auto resampled = resample_linear(filtered, cfg.resample_len);
  auto [plane, norm] = minmax_normalize(resampled, cfg.y_min, cfg.y_max);
  return finish_image(std::move(plane), norm, cfg, rec.subject_id(), channel, method);
}

ImageSample channel_to_image(const EegRecord& rec, int channel, const CodecConfig& cfg,
                             const NormParams& shared, uint8_t method) {
  cfg.validate();
  const auto filtered = filtered_truncated_channel(rec, channel, cfg);
  const auto resampled = resample_linear(filtered, cfg.resample_len);
  auto plane = apply_shared_norm(resampled, shared);
  return finish_image(std::move(plane), shared, cfg, rec.subject_id(), channel, method);
}

namespace {

std::vector<float> concatenated_filtered(const EegRecord& rec, const CodecConfig& cfg) {
  std::vector<float> all;
  all.reserve(size_t(kNumChannels) * cfg.truncate_len);
  for (int j = 0; j < kNumChannels; ++j) {
    const auto filtered = filtered_truncated_channel(rec, j, cfg);
    all.insert(all.end(), filtered.begin(), filtered.end());
  }
  return all;
}

}  // namespace

ImageSample record_to_image(const EegRecord& rec, const CodecConfig& cfg) {
  cfg.validate();
  const auto all = concatenated_filtered(rec, cfg);
  const auto resampled = resample_linear(all, cfg.resample_len);
  auto [plane, norm] = minmax_normalize(resampled, cfg.y_min, cfg.y_max);
  return finish_image(std::move(plane), norm, cfg, rec.subject_id(), kAllChannels, 3);
}

ImageSample record_to_image(const EegRecord& rec, const CodecConfig& cfg,
                            const NormParams& shared) {
  cfg.validate();
  const auto all = concatenated_filtered(rec, cfg);
  const auto resampled = resample_linear(all, cfg.resample_len);
  auto plane = apply_shared_norm(resampled, shared);
  return finish_image(std::move(plane), shared, cfg, rec.subject_id(), kAllChannels, 3);
}

std::vector<float> image_to_channel(const ImageSample& img, const CodecConfig& cfg) {
  if (img.pixels.size() != size_t(img.height) * img.width)
    throw ShapeMismatch("image_to_channel: pixel count does not match dims");
  const auto values = minmax_denormalize(img.pixels, img.norm);
  return resample_linear(values, cfg.truncate_len);
}

EegRecord image_to_record(const ImageSample& img, const CodecConfig& cfg,
                          uint32_t subject_id, float sample_rate_hz) {
  if (img.channel != kAllChannels)
    throw SchemeMismatch("image_to_record: expected a whole-record image");
  const auto values = minmax_denormalize(img.pixels, img.norm);
  const auto all = resample_linear(values, size_t(kNumChannels) * cfg.truncate_len);
  std::vector<float> samples(all.begin(), all.end());
  return EegRecord(subject_id, sample_rate_hz, cfg.truncate_len, std::move(samples));
}

namespace {

constexpr char kEimgMagic[4] = {'E', 'I', 'M', 'G'};
constexpr uint32_t kEimgVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError(std::string("EIMG: truncated while reading ") + what);
  return value;
}

}  // namespace

void write_eimg(const std::filesystem::path& path, const ImageSample& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("EIMG: cannot open for writing: " + path.string());
  out.write(kEimgMagic, 4);
  write_pod(out, kEimgVersion);
  write_pod(out, img.height);
  write_pod(out, img.width);
  write_pod(out, img.norm.x_min);
  write_pod(out, img.norm.x_max);
  write_pod(out, uint8_t(img.norm.degenerate ? 1 : 0));
  write_pod(out, img.subject_id);
  write_pod(out, img.channel);
  write_pod(out, img.method);
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            std::streamsize(img.pixels.size() * sizeof(float)));
  if (!out) throw FormatError("EIMG: write failed: " + path.string());
}

ImageSample read_eimg(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("EIMG: cannot open: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kEimgMagic, 4) != 0)
    throw FormatError("EIMG: bad magic: " + path.string());
  const auto version = read_pod<uint32_t>(in, "version");
  if (version != kEimgVersion)
    throw VersionMismatch("EIMG: unsupported version " + std::to_string(version));
  ImageSample img;
  img.height = read_pod<uint32_t>(in, "height");
  img.width = read_pod<uint32_t>(in, "width");
  img.norm.x_min = read_pod<float>(in, "x_min");
  img.norm.x_max = read_pod<float>(in, "x_max");
  img.norm.degenerate = read_pod<uint8_t>(in, "degenerate") != 0;
  img.norm.y_min = 0.0f;
  img.norm.y_max = 1.0f;
  img.subject_id = read_pod<uint32_t>(in, "subject");
  img.channel = read_pod<int32_t>(in, "channel");
  img.method = read_pod<uint8_t>(in, "method");
  img.pixels.resize(size_t(img.height) * img.width);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          std::streamsize(img.pixels.size() * sizeof(float)));
  if (!in) throw FormatError("EIMG: truncated payload: " + path.string());
  return img;
}

}  // namespace eogscrub
