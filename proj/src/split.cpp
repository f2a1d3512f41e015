#include "eogscrub/split.hpp"

#include <cmath>
#include <numeric>

#include "eogscrub/rng.hpp"

namespace eogscrub {

DatasetSplit split_dataset(size_t n, uint64_t seed, double val_frac, double test_frac) {
  if (n < 3) throw TooFewSamples("split_dataset: need at least 3 samples, got " + std::to_string(n));
  const size_t n_val = size_t(std::floor(val_frac * double(n) + 0.5));
  const size_t n_test = size_t(std::floor(test_frac * double(n) + 0.5));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n)
    throw TooFewSamples("split_dataset: a partition would be empty for n = " + std::to_string(n));
  const size_t n_train = n - n_val - n_test;

  std::vector<uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng rng(derive_seed(seed, RngStream::kSplit));
  rng.shuffle(perm.begin(), perm.end());

  DatasetSplit split;
  split.seed = seed;
  split.train.assign(perm.begin(), perm.begin() + std::ptrdiff_t(n_train));
  split.val.assign(perm.begin() + std::ptrdiff_t(n_train),
                   perm.begin() + std::ptrdiff_t(n_train + n_val));
  split.test.assign(perm.begin() + std::ptrdiff_t(n_train + n_val), perm.end());
  return split;
}

}  // namespace eogscrub
