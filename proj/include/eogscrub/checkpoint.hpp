#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eogscrub/unet.hpp"

namespace eogscrub {

struct TensorBlob {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> data;
};

// In-memory snapshot of a model: the config plus every named parameter, in
// canonical order. load(save(m)) reproduces m bit-exactly.
struct UNetCheckpoint {
  UNetConfig config;
  std::vector<TensorBlob> params;
};

UNetCheckpoint snapshot(UNet<float>& model);

// Writes checkpoint params into an existing model; names, shapes and count
// must match the model exactly.
void restore(UNet<float>& model, const UNetCheckpoint& ckpt);

UNet<float> build_model(const UNetCheckpoint& ckpt);

// UNET v1 container, little-endian:
//   "UNET" | u32 version | u32 depth | u32 base_width | u32 in_channels |
//   u32 out_channels | f32 elu_alpha | f32 dropout_rate | u32 n_params |
//   repeated { u32 name_len | name bytes | u32 rank | u32 dims[rank] |
//              f32 payload }
void save_checkpoint(const UNetCheckpoint& ckpt, const std::filesystem::path& path);
UNetCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace eogscrub
