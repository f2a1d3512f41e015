#pragma once

#include <array>
#include <string_view>

#include "eogscrub/errors.hpp"

namespace eogscrub {

inline constexpr int kNumChannels = 19;

// 10-20 montage labels in the fixed storage order used everywhere (row j of
// an EegRecord is kChannelLabels[j]).
inline constexpr std::array<std::string_view, kNumChannels> kChannelLabels = {
    "FP1", "FP2", "F3", "F4", "C3", "C4", "P3", "P4", "O1", "O2",
    "F7",  "F8",  "T3", "T4", "T5", "T6", "Fz", "Cz", "Pz"};

struct ChannelLabel {
  int index = 0;

  std::string_view name() const { return kChannelLabels[size_t(index)]; }

  static ChannelLabel from_index(int index) {
    if (index < 0 || index >= kNumChannels)
      throw InvalidConfig("channel index out of range: " + std::to_string(index));
    return ChannelLabel{index};
  }

  static ChannelLabel from_name(std::string_view name) {
    for (int i = 0; i < kNumChannels; ++i)
      if (kChannelLabels[size_t(i)] == name) return ChannelLabel{i};
    throw InvalidConfig("unknown channel label: " + std::string(name));
  }

  bool operator==(const ChannelLabel&) const = default;
};

}  // namespace eogscrub
