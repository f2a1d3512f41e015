#include "eogscrub/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <numeric>

namespace eogscrub {

UNetCheckpoint snapshot(UNet<float>& model) {
  UNetCheckpoint ckpt;
  ckpt.config = model.config();
  for (const auto& view : model.params()) {
    TensorBlob blob;
    blob.name = view.name;
    blob.shape = view.shape;
    blob.data.assign(view.value, view.value + view.size);
    ckpt.params.push_back(std::move(blob));
  }
  return ckpt;
}

void restore(UNet<float>& model, const UNetCheckpoint& ckpt) {
  if (!(model.config() == ckpt.config))
    throw ShapeMismatch("checkpoint restore: model config differs from checkpoint config");
  auto views = model.params();
  if (views.size() != ckpt.params.size())
    throw ShapeMismatch("checkpoint restore: parameter count mismatch");
  for (size_t i = 0; i < views.size(); ++i) {
    const auto& blob = ckpt.params[i];
    auto& view = views[i];
    if (blob.name != view.name || blob.shape != view.shape || blob.data.size() != view.size)
      throw ShapeMismatch("checkpoint restore: parameter '" + blob.name +
                          "' does not match model parameter '" + view.name + "'");
    std::copy(blob.data.begin(), blob.data.end(), view.value);
  }
}

UNet<float> build_model(const UNetCheckpoint& ckpt) {
  UNet<float> model(ckpt.config, 0);
  restore(model, ckpt);
  return model;
}

namespace {

constexpr char kMagic[4] = {'U', 'N', 'E', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError(std::string("UNET: truncated while reading ") + what);
  return value;
}

}  // namespace

void save_checkpoint(const UNetCheckpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("UNET: cannot open for writing: " + path.string());
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, ckpt.config.depth);
  write_pod(out, ckpt.config.base_width);
  write_pod(out, ckpt.config.in_channels);
  write_pod(out, ckpt.config.out_channels);
  write_pod(out, ckpt.config.elu_alpha);
  write_pod(out, ckpt.config.dropout_rate);
  write_pod(out, uint32_t(ckpt.params.size()));
  for (const auto& blob : ckpt.params) {
    write_pod(out, uint32_t(blob.name.size()));
    out.write(blob.name.data(), std::streamsize(blob.name.size()));
    write_pod(out, uint32_t(blob.shape.size()));
    for (const uint32_t dim : blob.shape) write_pod(out, dim);
    out.write(reinterpret_cast<const char*>(blob.data.data()),
              std::streamsize(blob.data.size() * sizeof(float)));
  }
  if (!out) throw FormatError("UNET: write failed: " + path.string());
}

UNetCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("UNET: cannot open: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("UNET: bad magic: " + path.string());
  const auto version = read_pod<uint32_t>(in, "version");
  if (version != kVersion)
    throw VersionMismatch("UNET: unsupported version " + std::to_string(version));
  UNetCheckpoint ckpt;
  ckpt.config.depth = read_pod<uint32_t>(in, "depth");
  ckpt.config.base_width = read_pod<uint32_t>(in, "base_width");
  ckpt.config.in_channels = read_pod<uint32_t>(in, "in_channels");
  ckpt.config.out_channels = read_pod<uint32_t>(in, "out_channels");
  ckpt.config.elu_alpha = read_pod<float>(in, "elu_alpha");
  ckpt.config.dropout_rate = read_pod<float>(in, "dropout_rate");
  ckpt.config.validate();
  const auto n_params = read_pod<uint32_t>(in, "n_params");
  ckpt.params.reserve(n_params);
  for (uint32_t i = 0; i < n_params; ++i) {
    TensorBlob blob;
    const auto name_len = read_pod<uint32_t>(in, "name length");
    if (name_len > 256) throw FormatError("UNET: implausible name length");
    blob.name.resize(name_len);
    in.read(blob.name.data(), name_len);
    if (!in) throw FormatError("UNET: truncated name");
    const auto rank = read_pod<uint32_t>(in, "rank");
    if (rank == 0 || rank > 4) throw FormatError("UNET: bad tensor rank");
    blob.shape.resize(rank);
    size_t count = 1;
    for (auto& dim : blob.shape) {
      dim = read_pod<uint32_t>(in, "dim");
      count *= dim;
    }
    blob.data.resize(count);
    in.read(reinterpret_cast<char*>(blob.data.data()),
            std::streamsize(count * sizeof(float)));
    if (!in) throw FormatError("UNET: truncated payload in '" + blob.name + "'");
    ckpt.params.push_back(std::move(blob));
  }
  // Validate against the config-determined parameter set.
  UNet<float> probe(ckpt.config, 0);
  auto views = probe.params();
  if (views.size() != ckpt.params.size())
    throw ShapeMismatch("UNET: parameter count does not match config");
  for (size_t i = 0; i < views.size(); ++i)
    if (views[i].name != ckpt.params[i].name || views[i].shape != ckpt.params[i].shape)
      throw ShapeMismatch("UNET: parameter '" + ckpt.params[i].name +
                          "' inconsistent with config");
  return ckpt;
}

}  // namespace eogscrub
