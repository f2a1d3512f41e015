#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "eogscrub/trainer.hpp"

namespace eogscrub {

// Test-set MSE in normalized [0,1] image units. M1 carries one entry per
// channel plus their arithmetic mean; M2/M3 carry a single pooled value in
// average_mse. baseline values are MSE(contaminated, pure) on the same
// images, for before/after comparison.
struct EvalReport {
  SchemeId scheme = SchemeId::M1;
  std::map<int, double> per_channel_mse;
  std::map<int, double> per_channel_baseline_mse;
  double average_mse = 0.0;
  double average_baseline_mse = 0.0;
  size_t n_test = 0;
};

EvalReport evaluate(SchemeId scheme, const std::vector<UNetCheckpoint>& checkpoints,
                    const std::vector<SignalPair>& dataset, const DatasetSplit& split,
                    const CodecConfig& codec_cfg);

// Per-channel MSE magnitudes reported by the original full-scale clinical
// study, printed alongside desk-scale results for context. Their published
// scheme-level average (0.000573) differs from the arithmetic mean of the
// per-channel values (~0.000665); reports show both.
extern const std::array<double, kNumChannels> kReferenceChannelMse;
inline constexpr double kReferenceAverageM1 = 0.000573;
inline constexpr double kReferenceMseM2 = 0.0358;
inline constexpr double kReferenceMseM3 = 0.00712;

double reference_channel_mean();

// Tab-separated table; numbers printed with 17 significant digits so a TSV
// round trip recovers them exactly.
std::string eval_report_tsv(const EvalReport& report);
std::string eval_report_console(const EvalReport& report);

// Table-3-style scheme comparison (one row per evaluated scheme) plus the
// reference rows.
std::string comparison_tsv(const std::vector<EvalReport>& reports);

// Parsed-back loss curves keyed by model name, for plotting.
struct NamedCurves {
  std::string name;
  std::vector<double> train_curve;
  std::vector<double> val_curve;
  uint32_t best_epoch = 0;
};

// Two stacked panels: target vs predicted and target vs contaminated, axes
// in samples and normalized amplitude. Deterministic output, no timestamps.
std::string render_signal_plot(std::span<const float> pure, std::span<const float> predicted,
                               std::span<const float> contaminated,
                               std::string_view channel_label);

// One panel per entry: train/val MSE per epoch, log-scaled y, with a
// vertical rule at the best epoch.
std::string render_loss_curves(const std::vector<NamedCurves>& curves);

NamedCurves curves_from_fit(const std::string& name, const FitResult& fit);

// Parses "epoch=<k> train_mse=<v> val_mse=<v>" training logs.
NamedCurves parse_training_log(const std::filesystem::path& path, const std::string& name);

}  // namespace eogscrub
