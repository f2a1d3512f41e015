#include "eogscrub/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <thread>

#include "eogscrub/metrics.hpp"

namespace eogscrub {

std::string scheme_name(SchemeId scheme) {
  switch (scheme) {
    case SchemeId::M1: return "m1";
    case SchemeId::M2: return "m2";
    case SchemeId::M3: return "m3";
  }
  throw InvalidConfig("unknown scheme");
}

SchemeId scheme_from_name(const std::string& name) {
  if (name == "m1" || name == "M1") return SchemeId::M1;
  if (name == "m2" || name == "M2") return SchemeId::M2;
  if (name == "m3" || name == "M3") return SchemeId::M3;
  throw InvalidConfig("unknown scheme: " + name + " (expected m1, m2 or m3)");
}

CodecConfig codec_for_scheme(SchemeId scheme, const CodecConfig& base) {
  CodecConfig cfg = base;
  if (scheme == SchemeId::M3) {
    cfg.resample_len = 131072;
    cfg.image_height = 512;
    cfg.image_width = 256;
  } else {
    cfg.resample_len = 6400;
    cfg.image_height = 80;
    cfg.image_width = 80;
  }
  return cfg;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidConfig("train: learning_rate must be positive");
  if (batch_size == 0) throw InvalidConfig("train: batch_size must be positive");
  if (max_epochs == 0) throw InvalidConfig("train: max_epochs must be positive");
  if (patience == 0 || patience > max_epochs)
    throw InvalidConfig("train: patience must be in [1, max_epochs]");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    throw InvalidConfig("train: betas must be in (0, 1)");
  if (!(epsilon > 0.0)) throw InvalidConfig("train: epsilon must be positive");
}

std::vector<EncodedPair> encode_channel_pairs(const std::vector<SignalPair>& dataset, int channel,
                                              const CodecConfig& cfg, uint8_t method) {
  std::vector<EncodedPair> pairs;
  pairs.reserve(dataset.size());
  for (const auto& pair : dataset) {
    EncodedPair enc;
    enc.input = channel_to_image(pair.contaminated, channel, cfg, method);
    enc.target = channel_to_image(pair.pure, channel, cfg, enc.input.norm, method);
    pairs.push_back(std::move(enc));
  }
  return pairs;
}

std::vector<EncodedPair> encode_pooled_pairs(const std::vector<SignalPair>& dataset,
                                             const CodecConfig& cfg) {
  std::vector<EncodedPair> pairs;
  pairs.reserve(dataset.size() * size_t(kNumChannels));
  for (const auto& pair : dataset)
    for (int j = 0; j < kNumChannels; ++j) {
      EncodedPair enc;
      enc.input = channel_to_image(pair.contaminated, j, cfg, 2);
      enc.target = channel_to_image(pair.pure, j, cfg, enc.input.norm, 2);
      pairs.push_back(std::move(enc));
    }
  return pairs;
}

std::vector<EncodedPair> encode_record_pairs(const std::vector<SignalPair>& dataset,
                                             const CodecConfig& cfg) {
  std::vector<EncodedPair> pairs;
  pairs.reserve(dataset.size());
  for (const auto& pair : dataset) {
    EncodedPair enc;
    enc.input = record_to_image(pair.contaminated, cfg);
    enc.target = record_to_image(pair.pure, cfg, enc.input.norm);
    pairs.push_back(std::move(enc));
  }
  return pairs;
}

namespace {

// Endless shuffled index stream; reshuffles every time the list is exhausted
// so steps_per_epoch may under- or over-cover the training set.
class BatchStream {
 public:
  BatchStream(size_t n, uint64_t seed) : indices_(n), rng_(seed) {
    std::iota(indices_.begin(), indices_.end(), 0u);
    rng_.shuffle(indices_.begin(), indices_.end());
  }

  uint32_t next() {
    if (pos_ == indices_.size()) {
      rng_.shuffle(indices_.begin(), indices_.end());
      pos_ = 0;
    }
    return indices_[pos_++];
  }

 private:
  std::vector<uint32_t> indices_;
  Rng rng_;
  size_t pos_ = 0;
};

Tensor4<float> stack_images(std::span<const EncodedPair* const> pairs,
                            std::span<const uint32_t> indices, bool targets) {
  const ImageSample& first = targets ? pairs[indices[0]]->target : pairs[indices[0]]->input;
  Tensor4<float> out(uint32_t(indices.size()), 1, first.height, first.width);
  for (uint32_t b = 0; b < indices.size(); ++b) {
    const ImageSample& img = targets ? pairs[indices[b]]->target : pairs[indices[b]]->input;
    if (img.height != first.height || img.width != first.width)
      throw ShapeMismatch("fit: images of mixed dimensions");
    std::copy(img.pixels.begin(), img.pixels.end(), out.plane(b, 0).begin());
  }
  return out;
}

double validation_mse(UNet<float>& model, std::span<const EncodedPair* const> val) {
  double acc = 0.0;
  size_t count = 0;
  for (const EncodedPair* pair : val) {
    Tensor4<float> x(1, 1, pair->input.height, pair->input.width);
    std::copy(pair->input.pixels.begin(), pair->input.pixels.end(), x.data.begin());
    const Tensor4<float> pred = model.predict(x);
    acc += mse<float>(pred.data, pair->target.pixels) * double(pred.size());
    count += pred.size();
  }
  return acc / double(count);
}

void log_epoch(std::ostream* log, uint32_t epoch, double train_mse, double val_mse) {
  if (!log) return;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "epoch=%u train_mse=%.10g val_mse=%.10g\n", epoch, train_mse,
                val_mse);
  *log << buf;
}

}  // namespace

FitResult fit(UNet<float>& model, std::span<const EncodedPair* const> train,
              std::span<const EncodedPair* const> val, const TrainConfig& cfg,
              std::ostream* log) {
  cfg.validate();
  if (train.empty() || val.empty()) throw EmptySet("fit: train and val sets must be nonempty");

  const uint32_t steps =
      cfg.steps_per_epoch > 0
          ? cfg.steps_per_epoch
          : uint32_t((train.size() + cfg.batch_size - 1) / cfg.batch_size);

  BatchStream stream(train.size(), derive_seed(cfg.seed, RngStream::kFit, 1));
  Rng dropout_rng(derive_seed(cfg.seed, RngStream::kFit, 2));
  AdamState<float> adam_state;
  auto params = model.params();
  UNetCache<float> cache;

  FitResult result;
  EarlyStopping stopper(cfg.patience);
  std::vector<uint32_t> batch(cfg.batch_size);

  for (uint32_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double train_acc = 0.0;
    for (uint32_t step = 0; step < steps; ++step) {
      for (auto& idx : batch) idx = stream.next();
      const Tensor4<float> x = stack_images(train, batch, false);
      const Tensor4<float> target = stack_images(train, batch, true);
      const Tensor4<float> pred = model.forward(x, true, dropout_rng, &cache);
      // MSE loss; d/dpred = 2 (pred - target) / count.
      const double inv = 2.0 / double(pred.size());
      Tensor4<float> grad(pred.n, pred.c, pred.h, pred.w);
      double loss = 0.0;
      for (size_t i = 0; i < pred.size(); ++i) {
        const double d = double(pred.data[i]) - double(target.data[i]);
        loss += d * d;
        grad.data[i] = float(inv * d);
      }
      loss /= double(pred.size());
      train_acc += loss;
      model.zero_grads();
      model.backward(cache, grad);
      adam_step(params, adam_state, cfg.adam());
    }
    const double train_mse = train_acc / double(steps);
    const double val_mse = validation_mse(model, val);
    result.train_curve.push_back(train_mse);
    result.val_curve.push_back(val_mse);
    log_epoch(log, epoch, train_mse, val_mse);

    if (stopper.update(val_mse)) result.best_checkpoint = snapshot(model);
    if (stopper.should_stop()) {
      result.stopped_early = true;
      break;
    }
  }
  result.best_epoch = stopper.best_epoch();
  restore(model, result.best_checkpoint);
  return result;
}

FitResult fit(UNet<float>& model, const std::vector<EncodedPair>& train,
              const std::vector<EncodedPair>& val, const TrainConfig& cfg, std::ostream* log) {
  std::vector<const EncodedPair*> train_ptrs, val_ptrs;
  train_ptrs.reserve(train.size());
  val_ptrs.reserve(val.size());
  for (const auto& pair : train) train_ptrs.push_back(&pair);
  for (const auto& pair : val) val_ptrs.push_back(&pair);
  return fit(model, train_ptrs, val_ptrs, cfg, log);
}

namespace {

std::vector<const EncodedPair*> select(const std::vector<EncodedPair>& pairs,
                                       const std::vector<uint32_t>& indices) {
  std::vector<const EncodedPair*> out;
  out.reserve(indices.size());
  for (const uint32_t idx : indices) out.push_back(&pairs[idx]);
  return out;
}

FitResult fit_one_model(const std::vector<EncodedPair>& pairs, const DatasetSplit& split,
                        const UNetConfig& unet_cfg, const TrainConfig& train_cfg,
                        uint64_t model_seed, const std::filesystem::path* log_dir,
                        const std::string& model_name) {
  UNet<float> model(unet_cfg, model_seed);
  TrainConfig cfg = train_cfg;
  cfg.seed = model_seed;
  std::ofstream log_file;
  std::ostream* log = nullptr;
  if (log_dir) {
    log_file.open(*log_dir / (model_name + ".log"));
    if (!log_file) throw FormatError("fit: cannot open log file in " + log_dir->string());
    log = &log_file;
  }
  return fit(model, select(pairs, split.train), select(pairs, split.val), cfg, log);
}

}  // namespace

SchemeArtifacts train_on_pairs(SchemeId scheme, std::vector<std::vector<EncodedPair>> per_model,
                               const UNetConfig& unet_cfg, const TrainConfig& train_cfg,
                               unsigned n_threads, const std::filesystem::path* log_dir) {
  train_cfg.validate();
  unet_cfg.validate();
  if (per_model.empty()) throw EmptySet("train_on_pairs: no sample lists");
  const size_t expected_models = scheme == SchemeId::M1 ? size_t(kNumChannels) : 1;
  if (per_model.size() != expected_models)
    throw SchemeMismatch("train_on_pairs: expected " + std::to_string(expected_models) +
                         " model sample lists for scheme " + scheme_name(scheme));

  SchemeArtifacts artifacts;
  artifacts.scheme = scheme;
  artifacts.split = split_dataset(per_model[0].size(), train_cfg.seed, train_cfg.val_frac,
                                  train_cfg.test_frac);
  artifacts.fits.resize(per_model.size());
  artifacts.model_names.resize(per_model.size());
  for (size_t m = 0; m < per_model.size(); ++m) {
    if (per_model[m].size() != per_model[0].size())
      throw LengthMismatch("train_on_pairs: sample lists of unequal size");
    if (scheme == SchemeId::M1) {
      char name[16];
      std::snprintf(name, sizeof(name), "m1_ch%02zu", m);
      artifacts.model_names[m] = name;
    } else {
      artifacts.model_names[m] = scheme_name(scheme);
    }
  }

  const unsigned workers =
      std::max(1u, std::min<unsigned>(n_threads, unsigned(per_model.size())));
  std::atomic<size_t> next_model{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const size_t m = next_model.fetch_add(1);
      if (m >= per_model.size()) return;
      try {
        // Per-model RNG stream from (seed, model index): results do not
        // depend on the worker count.
        const uint64_t model_seed =
            scheme == SchemeId::M1 ? derive_seed(train_cfg.seed, RngStream::kFit, 100 + m)
                                   : train_cfg.seed;
        artifacts.fits[m] = fit_one_model(per_model[m], artifacts.split, unet_cfg, train_cfg,
                                          model_seed, log_dir, artifacts.model_names[m]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return artifacts;
}

SchemeArtifacts train_scheme(SchemeId scheme, const std::vector<SignalPair>& dataset,
                             const CodecConfig& codec_cfg, const UNetConfig& unet_cfg,
                             const TrainConfig& train_cfg, unsigned n_threads,
                             const std::filesystem::path* log_dir) {
  if (dataset.empty()) throw EmptySet("train_scheme: empty dataset");
  const CodecConfig cfg = codec_for_scheme(scheme, codec_cfg);
  std::vector<std::vector<EncodedPair>> per_model;
  switch (scheme) {
    case SchemeId::M1:
      per_model.resize(kNumChannels);
      for (int j = 0; j < kNumChannels; ++j) per_model[size_t(j)] = encode_channel_pairs(dataset, j, cfg);
      break;
    case SchemeId::M2:
      per_model.push_back(encode_pooled_pairs(dataset, cfg));
      break;
    case SchemeId::M3:
      per_model.push_back(encode_record_pairs(dataset, cfg));
      break;
  }
  return train_on_pairs(scheme, std::move(per_model), unet_cfg, train_cfg, n_threads, log_dir);
}

ImageSample predict_image(UNet<float>& model, const ImageSample& input) {
  Tensor4<float> x(1, 1, input.height, input.width);
  std::copy(input.pixels.begin(), input.pixels.end(), x.data.begin());
  const Tensor4<float> pred = model.predict(x);
  ImageSample out = input;  // inherits dims, norm params and provenance
  out.pixels.assign(pred.data.begin(), pred.data.end());
  return out;
}

EegRecord denoise(const std::vector<UNetCheckpoint>& checkpoints, SchemeId scheme,
                  const EegRecord& contaminated, const CodecConfig& codec_cfg) {
  const size_t expected = scheme == SchemeId::M1 ? size_t(kNumChannels) : 1;
  if (checkpoints.size() != expected)
    throw SchemeMismatch("denoise: scheme " + scheme_name(scheme) + " needs " +
                         std::to_string(expected) + " checkpoints, got " +
                         std::to_string(checkpoints.size()));
  const CodecConfig cfg = codec_for_scheme(scheme, codec_cfg);

  if (scheme == SchemeId::M3) {
    UNet<float> model = build_model(checkpoints[0]);
    const ImageSample input = record_to_image(contaminated, cfg);
    const ImageSample pred = predict_image(model, input);
    return image_to_record(pred, cfg, contaminated.subject_id(), contaminated.sample_rate_hz());
  }

  std::vector<float> samples(size_t(kNumChannels) * cfg.truncate_len);
  UNet<float> shared = build_model(checkpoints[0]);
  for (int j = 0; j < kNumChannels; ++j) {
    UNet<float>* model = &shared;
    std::optional<UNet<float>> per_channel;
    if (scheme == SchemeId::M1 && j > 0) {
      per_channel.emplace(build_model(checkpoints[size_t(j)]));
      model = &*per_channel;
    }
    const ImageSample input =
        channel_to_image(contaminated, j, cfg, scheme == SchemeId::M1 ? uint8_t(1) : uint8_t(2));
    const ImageSample pred = predict_image(*model, input);
    const auto row = image_to_channel(pred, cfg);
    std::copy(row.begin(), row.end(), samples.begin() + size_t(j) * cfg.truncate_len);
  }
  return EegRecord(contaminated.subject_id(), contaminated.sample_rate_hz(), cfg.truncate_len,
                   std::move(samples));
}

}  // namespace eogscrub
