#include "eogscrub/record.hpp"

#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "EEGR/EIMG/UNET containers are little-endian; big-endian hosts are unsupported");

namespace eogscrub {

EegRecord::EegRecord(uint32_t subject_id, float sample_rate_hz, uint32_t n_samples,
                     std::vector<float> samples)
    : subject_id_(subject_id),
      sample_rate_hz_(sample_rate_hz),
      n_samples_(n_samples),
      samples_(std::move(samples)) {
  if (sample_rate_hz_ <= 0.0f) throw InvalidConfig("sample rate must be positive");
  if (n_samples_ < kMinRecordSamples)
    throw InvalidConfig("record too short: " + std::to_string(n_samples_) + " < " +
                        std::to_string(kMinRecordSamples) + " samples");
  if (samples_.size() != size_t(kNumChannels) * n_samples_)
    throw ShapeMismatch("record payload is not 19 x n_samples");
}

SignalPair::SignalPair(EegRecord pure_rec, EegRecord cont_rec)
    : pure(std::move(pure_rec)), contaminated(std::move(cont_rec)) {
  if (pure.subject_id() != contaminated.subject_id())
    throw InvalidConfig("signal pair: subject ids differ");
  if (pure.n_samples() != contaminated.n_samples())
    throw LengthMismatch("signal pair: sample counts differ");
  if (pure.sample_rate_hz() != contaminated.sample_rate_hz())
    throw InvalidConfig("signal pair: sample rates differ");
}

namespace {

constexpr char kMagic[4] = {'E', 'E', 'G', 'R'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError(std::string("EEGR: truncated while reading ") + what);
  return value;
}

}  // namespace

void write_eegr(const std::filesystem::path& path, const EegRecord& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("EEGR: cannot open for writing: " + path.string());
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, rec.subject_id());
  write_pod(out, uint32_t(rec.n_channels()));
  write_pod(out, rec.n_samples());
  write_pod(out, rec.sample_rate_hz());
  out.write(reinterpret_cast<const char*>(rec.data().data()),
            std::streamsize(rec.data().size() * sizeof(float)));
  if (!out) throw FormatError("EEGR: write failed: " + path.string());
}

EegRecord read_eegr(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("EEGR: cannot open: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("EEGR: bad magic: " + path.string());
  const auto version = read_pod<uint32_t>(in, "version");
  if (version != kVersion)
    throw VersionMismatch("EEGR: unsupported version " + std::to_string(version));
  const auto subject = read_pod<uint32_t>(in, "subject_id");
  const auto n_channels = read_pod<uint32_t>(in, "n_channels");
  const auto n_samples = read_pod<uint32_t>(in, "n_samples");
  const auto rate = read_pod<float>(in, "sample_rate_hz");
  if (n_channels != uint32_t(kNumChannels))
    throw FormatError("EEGR: expected 19 channels, got " + std::to_string(n_channels));
  std::vector<float> payload(size_t(n_channels) * n_samples);
  in.read(reinterpret_cast<char*>(payload.data()),
          std::streamsize(payload.size() * sizeof(float)));
  if (!in) throw FormatError("EEGR: truncated payload: " + path.string());
  return EegRecord(subject, rate, n_samples, std::move(payload));
}

}  // namespace eogscrub
