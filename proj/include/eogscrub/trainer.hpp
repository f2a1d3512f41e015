#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eogscrub/adam.hpp"
#include "eogscrub/checkpoint.hpp"
#include "eogscrub/codec.hpp"
#include "eogscrub/split.hpp"
#include "eogscrub/synth.hpp"

namespace eogscrub {

enum class SchemeId { M1, M2, M3 };

std::string scheme_name(SchemeId scheme);                 // "m1" / "m2" / "m3"
SchemeId scheme_from_name(const std::string& name);
CodecConfig codec_for_scheme(SchemeId scheme, const CodecConfig& base);

struct TrainConfig {
  double learning_rate = 1e-4;
  uint32_t batch_size = 2;
  uint32_t max_epochs = 120;
  uint32_t steps_per_epoch = 0;  // 0 = auto: ceil(n_train / batch_size)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint32_t patience = 10;
  uint64_t seed = 0;
  double val_frac = 0.15;
  double test_frac = 0.15;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

// Tracks the best validation score; stop() turns true once `patience`
// consecutive epochs fail to improve strictly on the best.
class EarlyStopping {
 public:
  explicit EarlyStopping(uint32_t patience) : patience_(patience) {}

  // Returns true if this epoch improved the best score. Epochs are 1-based.
  bool update(double val_loss) {
    ++epoch_;
    if (val_loss < best_) {
      best_ = val_loss;
      best_epoch_ = epoch_;
      streak_ = 0;
      return true;
    }
    ++streak_;
    return false;
  }

  bool should_stop() const { return streak_ >= patience_; }
  uint32_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }

 private:
  uint32_t patience_;
  uint32_t epoch_ = 0;
  uint32_t best_epoch_ = 0;
  uint32_t streak_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct FitResult {
  std::vector<double> train_curve;  // one entry per epoch actually run
  std::vector<double> val_curve;
  uint32_t best_epoch = 0;  // 1-based
  bool stopped_early = false;
  UNetCheckpoint best_checkpoint;
};

// A contaminated-input / pure-target image pair sharing one set of
// normalization params (the input's).
struct EncodedPair {
  ImageSample input;
  ImageSample target;
};

// Scheme sample builders. Ordering is deterministic: subjects ascending, and
// for the pooled scheme channels nested inside subjects (index = subject*19
// + channel).
std::vector<EncodedPair> encode_channel_pairs(const std::vector<SignalPair>& dataset, int channel,
                                              const CodecConfig& cfg, uint8_t method = 1);
std::vector<EncodedPair> encode_pooled_pairs(const std::vector<SignalPair>& dataset,
                                             const CodecConfig& cfg);
std::vector<EncodedPair> encode_record_pairs(const std::vector<SignalPair>& dataset,
                                             const CodecConfig& cfg);

// Runs Adam with seeded epoch-wise reshuffling, per-epoch full-validation
// MSE with dropout off, early stopping, and best-weights restoration (the
// model is left holding the best epoch's weights). Writes one
// "epoch=<k> train_mse=<v> val_mse=<v>" line per epoch to `log` if given.
FitResult fit(UNet<float>& model, std::span<const EncodedPair* const> train,
              std::span<const EncodedPair* const> val, const TrainConfig& cfg,
              std::ostream* log = nullptr);

FitResult fit(UNet<float>& model, const std::vector<EncodedPair>& train,
              const std::vector<EncodedPair>& val, const TrainConfig& cfg,
              std::ostream* log = nullptr);

struct SchemeArtifacts {
  SchemeId scheme = SchemeId::M1;
  DatasetSplit split;                 // subject-level (M1/M3) or image-level (M2)
  std::vector<FitResult> fits;        // 19 entries for M1, 1 for M2/M3
  std::vector<std::string> model_names;  // m1_ch00 ... / m2 / m3
};

// Trains the requested scheme end to end on in-memory records. M1 dispatches
// its 19 independent per-channel fits to `n_threads` workers; every model
// draws its RNG streams from (seed, channel), so results do not depend on
// the thread count. Per-model logs go to `<log_dir>/<model>.log` when given.
SchemeArtifacts train_scheme(SchemeId scheme, const std::vector<SignalPair>& dataset,
                             const CodecConfig& codec_cfg, const UNetConfig& unet_cfg,
                             const TrainConfig& train_cfg, unsigned n_threads = 1,
                             const std::filesystem::path* log_dir = nullptr);

// Same, but with the per-model sample lists already built (the CLI path,
// where inputs come from prepared .eimg files).
SchemeArtifacts train_on_pairs(SchemeId scheme, std::vector<std::vector<EncodedPair>> per_model,
                               const UNetConfig& unet_cfg, const TrainConfig& train_cfg,
                               unsigned n_threads = 1,
                               const std::filesystem::path* log_dir = nullptr);

// Encode -> forward (inference) -> invert with the contaminated input's
// normalization params. M1 expects 19 checkpoints (channel order), M2/M3 one.
EegRecord denoise(const std::vector<UNetCheckpoint>& checkpoints, SchemeId scheme,
                  const EegRecord& contaminated, const CodecConfig& codec_cfg);

// Predicted plane for one encoded input (inference mode).
ImageSample predict_image(UNet<float>& model, const ImageSample& input);

}  // namespace eogscrub
