#pragma once

#include <cstdint>
#include <vector>

#include "eogscrub/errors.hpp"

namespace eogscrub {

// 70/15/15 partition of sample indices. val and test sizes are
// round-half-up(frac * n); train takes the remainder, so val and test stay
// equal under the default ratios.
struct DatasetSplit {
  std::vector<uint32_t> train;
  std::vector<uint32_t> val;
  std::vector<uint32_t> test;
  uint64_t seed = 0;
};

DatasetSplit split_dataset(size_t n, uint64_t seed, double val_frac = 0.15,
                           double test_frac = 0.15);

}  // namespace eogscrub
