#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "depprobe/embstore.hpp"
#include "depprobe/probe.hpp"
#include "depprobe/treebank.hpp"

namespace depprobe {

struct LossWeights {
  double structural = 1.0;
  double relational = 1.0;
  double depth = 1.0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double plateau_factor = 0.1;
  int early_stop_patience = 3;
  int max_epochs = 30;
  std::size_t batch_size = 64;
  std::uint64_t seed = 42;
  LossWeights weights;
  double weight_decay = 0.01;
  double plateau_threshold = 1e-4;

  /// Throws ArgumentError on out-of-range values.
  void validate() const;
};

// Per-sentence losses. `inputs` is the n x e embedding matrix of the sentence.

/// (1/n^2) sum over ordered pairs (including i = j) of |d_tree - d_B|.
double structural_loss(const Eigen::MatrixXd& B, const GoldSentence& sentence, const Eigen::MatrixXd& inputs);
/// Mean negative log-likelihood of the gold relations. Gold "ref" words lie
/// outside the label space and are left out of both sum and count.
double relational_loss(const Eigen::MatrixXd& L, const GoldSentence& sentence, const Eigen::MatrixXd& inputs);
/// (1/n) sum |depth_i - |C^T h_i|^2|.
double depth_loss(const Eigen::MatrixXd& C, const GoldSentence& sentence, const Eigen::MatrixXd& inputs);

Eigen::MatrixXd structural_loss_gradient(const Eigen::MatrixXd& B, const GoldSentence& sentence, const Eigen::MatrixXd& inputs);
Eigen::MatrixXd relational_loss_gradient(const Eigen::MatrixXd& L, const GoldSentence& sentence, const Eigen::MatrixXd& inputs);
Eigen::MatrixXd depth_loss_gradient(const Eigen::MatrixXd& C, const GoldSentence& sentence, const Eigen::MatrixXd& inputs);

struct LossTerms {
  double structural = 0.0;
  double relational = 0.0;
  double depth = 0.0;
};

/// Weighted sum of the terms that the model actually has.
double combined_loss(const ProbeModel& model, const LossTerms& terms, const LossWeights& weights);

/// Gradients shaped like the model's maps.
struct Gradients {
  Eigen::MatrixXd structural;
  std::optional<Eigen::MatrixXd> relational;
  std::optional<Eigen::MatrixXd> depth;
};

/// Losses of one sentence of `data` under `model`, each map reading its own layer.
LossTerms sentence_losses(const ProbeModel& model, const AlignedDataset& data, std::size_t index);
/// Mean per-sentence losses over the whole dataset.
LossTerms mean_losses(const ProbeModel& model, const AlignedDataset& data);

/// Analytic gradient of the batch mean of the weighted loss. Optionally
/// reports the batch-mean loss terms at the current parameters.
Gradients gradients(const ProbeModel& model, const AlignedDataset& data, const std::vector<std::size_t>& batch,
                    const LossWeights& weights, LossTerms* batch_losses = nullptr);

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;  // rate used during this epoch
  LossTerms train;
  LossTerms dev;
  double dev_loss = 0.0;  // combined, drives plateau detection
  bool improved = false;
};

struct TrainReport {
  ProbeKind kind = ProbeKind::kDepProbe;
  std::uint64_t seed = 0;
  double initial_dev_loss = 0.0;
  std::vector<EpochRecord> epochs;
  std::vector<double> learning_rates;  // one entry per epoch
  int stopping_epoch = 0;
  int best_epoch = 0;  // 0 = the initial parameters
  double best_dev_loss = 0.0;
  double dev_uuas = 0.0;
  std::optional<double> dev_rel_acc;
};

/// Probe-level dev metrics: UUAS of the undirected MST over the structural
/// distances, RelAcc of the per-word argmax relation.
struct ProbeMetrics {
  double uuas = 0.0;
  std::optional<double> rel_acc;
};
ProbeMetrics probe_metrics(const ProbeModel& model, const AlignedDataset& data);

/// AdamW with plateau-triggered learning-rate decay and early stopping.
/// Returns the parameters with the lowest dev loss seen, including the initial ones.
std::pair<ProbeModel, TrainReport> fit(ProbeModel model, const AlignedDataset& train, const AlignedDataset& dev,
                                       const TrainConfig& config);

std::string train_report_json(const TrainReport& report);

struct LayerScanRecord {
  std::uint32_t layer = 0;
  double uuas = 0.0;
  double rel_acc = 0.0;
  int stopping_epoch = 0;
};

struct LayerScanResult {
  std::vector<LayerScanRecord> records;
  std::uint32_t best_structural_layer = 0;
  std::uint32_t best_relational_layer = 0;
};

/// Trains an independent DepProbe per layer (both maps on that layer) and
/// reports dev UUAS and RelAcc. Both datasets must carry every listed layer.
LayerScanResult layer_scan(const AlignedDataset& train, const AlignedDataset& dev, const std::vector<std::uint32_t>& layers,
                           const TrainConfig& config, const ProbeDims& dims);

/// File-backed variant: loads one layer at a time. Throws IoError naming a missing file.
LayerScanResult layer_scan_files(const std::vector<GoldSentence>& train_corpus, const std::vector<GoldSentence>& dev_corpus,
                                 const std::vector<std::string>& train_files, const std::vector<std::string>& dev_files,
                                 const TrainConfig& config, const ProbeDims& dims);

std::string layer_scan_tsv(const LayerScanResult& result);

}  // namespace depprobe
