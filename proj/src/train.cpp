#include "depprobe/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "depprobe/decode.hpp"
#include "depprobe/errors.hpp"
#include "depprobe/parallel.hpp"

namespace depprobe {

namespace {

void check_inputs(const Eigen::MatrixXd& map, const GoldSentence& sentence, const Eigen::MatrixXd& inputs, const char* what) {
  if (static_cast<std::size_t>(inputs.rows()) != sentence.size()) {
    throw ArgumentError(std::string(what) + ": sentence has " + std::to_string(sentence.size()) + " words but " +
                        std::to_string(inputs.rows()) + " embedding rows");
  }
  if (inputs.cols() != map.rows()) {
    throw ArgumentError(std::string(what) + ": embeddings are " + std::to_string(inputs.cols()) + "-dimensional, map expects " +
                        std::to_string(map.rows()));
  }
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

Eigen::MatrixXd pair_distances(const Eigen::MatrixXd& projected) {
  const Eigen::Index n = projected.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = std::sqrt(kDistanceEpsilon);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = std::sqrt((projected.row(i) - projected.row(j)).squaredNorm() + kDistanceEpsilon);
    }
  }
  return d;
}

std::size_t scoreable_words(const GoldSentence& sentence) {
  return static_cast<std::size_t>(std::count_if(sentence.gold_rel.begin(), sentence.gold_rel.end(),
                                                [](std::size_t r) { return r < kNumRelations; }));
}

class AdamW {
 public:
  AdamW(double weight_decay) : weight_decay_(weight_decay) {}

  void step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, std::size_t slot, double lr) {
    if (slot >= first_.size()) {
      first_.resize(slot + 1);
      second_.resize(slot + 1);
    }
    auto& m = first_[slot];
    auto& v = second_[slot];
    if (m.size() == 0) {
      m = Eigen::MatrixXd::Zero(param.rows(), param.cols());
      v = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    }
    const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    param *= 1.0 - lr * weight_decay_;
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseAbs2();
    const double step_size = lr / correction1;
    const double sqrt_c2 = std::sqrt(correction2);
    param.array() -= step_size * m.array() / (v.array().sqrt() / sqrt_c2 + kEps);
  }

  void tick() { ++t_; }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double weight_decay_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> first_;
  std::vector<Eigen::MatrixXd> second_;
};

void check_model_layers(const ProbeModel& model, const AlignedDataset& data) {
  if (data.empty()) return;
  const auto need = [&](std::uint32_t layer) {
    if (!data.has_layer(layer)) throw ArgumentError("dataset has no embeddings for layer " + std::to_string(layer));
    if (data.dim() != model.embedding_dim()) {
      throw CompatibilityError("probe expects " + std::to_string(model.embedding_dim()) + "-dimensional embeddings, data has " +
                               std::to_string(data.dim()));
    }
  };
  need(model.layer_structural);
  if (model.relational) need(model.layer_relational.value());
  if (model.depth) need(model.layer_depth.value());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw ArgumentError("plateau factor must lie in (0, 1)");
  if (early_stop_patience < 1) throw ArgumentError("early-stopping patience must be at least 1");
  if (max_epochs < 0) throw ArgumentError("max epochs must be non-negative");
  if (batch_size < 1) throw ArgumentError("batch size must be at least 1");
  if (weight_decay < 0.0) throw ArgumentError("weight decay must be non-negative");
}

double structural_loss(const Eigen::MatrixXd& B, const GoldSentence& sentence, const Eigen::MatrixXd& inputs) {
  check_inputs(B, sentence, inputs, "structural_loss");
  const Eigen::MatrixXd d = pair_distances(inputs * B);
  const double n = static_cast<double>(sentence.size());
  return (sentence.tree_dist.cast<double>() - d).cwiseAbs().sum() / (n * n);
}

Eigen::MatrixXd structural_loss_gradient(const Eigen::MatrixXd& B, const GoldSentence& sentence, const Eigen::MatrixXd& inputs) {
  check_inputs(B, sentence, inputs, "structural_loss_gradient");
  const Eigen::MatrixXd projected = inputs * B;
  const Eigen::MatrixXd d = pair_distances(projected);
  const Eigen::Index n = d.rows();
  // d|t - d_ij|/dB = sign(d_ij - t) * (h_i - h_j)(h_i - h_j)^T B / d_ij; summed
  // over pairs this is 2 H^T (diag(S 1) - S) H B.
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      s(i, j) = sign(d(i, j) - sentence.tree_dist(i, j)) / d(i, j);
    }
  }
  Eigen::MatrixXd laplacian = -s;
  laplacian.diagonal() += s.rowwise().sum();
  const double scale = 2.0 / static_cast<double>(n * n);
  return scale * inputs.transpose() * (laplacian * projected);
}

double relational_loss(const Eigen::MatrixXd& L, const GoldSentence& sentence, const Eigen::MatrixXd& inputs) {
  check_inputs(L, sentence, inputs, "relational_loss");
  const std::size_t count = scoreable_words(sentence);
  if (count == 0) return 0.0;
  const Eigen::MatrixXd logits = inputs * L;
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const auto gold = sentence.gold_rel[static_cast<std::size_t>(i)];
    if (gold >= kNumRelations) continue;
    const double shift = logits.row(i).maxCoeff();
    const double log_norm = shift + std::log((logits.row(i).array() - shift).exp().sum());
    total += log_norm - logits(i, static_cast<Eigen::Index>(gold));
  }
  return total / static_cast<double>(count);
}

Eigen::MatrixXd relational_loss_gradient(const Eigen::MatrixXd& L, const GoldSentence& sentence, const Eigen::MatrixXd& inputs) {
  check_inputs(L, sentence, inputs, "relational_loss_gradient");
  const std::size_t count = scoreable_words(sentence);
  if (count == 0) return Eigen::MatrixXd::Zero(L.rows(), L.cols());
  Eigen::MatrixXd residual = softmax_rows(inputs * L);
  for (Eigen::Index i = 0; i < residual.rows(); ++i) {
    const auto gold = sentence.gold_rel[static_cast<std::size_t>(i)];
    if (gold >= kNumRelations) {
      residual.row(i).setZero();
    } else {
      residual(i, static_cast<Eigen::Index>(gold)) -= 1.0;
    }
  }
  return inputs.transpose() * residual / static_cast<double>(count);
}

double depth_loss(const Eigen::MatrixXd& C, const GoldSentence& sentence, const Eigen::MatrixXd& inputs) {
  check_inputs(C, sentence, inputs, "depth_loss");
  const Eigen::VectorXd predicted = (inputs * C).rowwise().squaredNorm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < predicted.size(); ++i) total += std::abs(sentence.depth[static_cast<std::size_t>(i)] - predicted(i));
  return total / static_cast<double>(sentence.size());
}

Eigen::MatrixXd depth_loss_gradient(const Eigen::MatrixXd& C, const GoldSentence& sentence, const Eigen::MatrixXd& inputs) {
  check_inputs(C, sentence, inputs, "depth_loss_gradient");
  const Eigen::MatrixXd projected = inputs * C;
  Eigen::VectorXd signs(projected.rows());
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    signs(i) = sign(projected.row(i).squaredNorm() - sentence.depth[static_cast<std::size_t>(i)]);
  }
  return (2.0 / static_cast<double>(sentence.size())) * inputs.transpose() * (signs.asDiagonal() * projected);
}

double combined_loss(const ProbeModel& model, const LossTerms& terms, const LossWeights& weights) {
  double total = weights.structural * terms.structural;
  if (model.relational) total += weights.relational * terms.relational;
  if (model.depth) total += weights.depth * terms.depth;
  return total;
}

LossTerms sentence_losses(const ProbeModel& model, const AlignedDataset& data, std::size_t index) {
  const auto& sentence = data.sentence(index);
  LossTerms terms;
  terms.structural = structural_loss(model.structural, sentence, data.inputs(index, model.layer_structural));
  if (model.relational) terms.relational = relational_loss(*model.relational, sentence, data.inputs(index, *model.layer_relational));
  if (model.depth) terms.depth = depth_loss(*model.depth, sentence, data.inputs(index, *model.layer_depth));
  return terms;
}

LossTerms mean_losses(const ProbeModel& model, const AlignedDataset& data) {
  LossTerms mean;
  if (data.empty()) return mean;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto terms = sentence_losses(model, data, i);
    mean.structural += terms.structural;
    mean.relational += terms.relational;
    mean.depth += terms.depth;
  }
  const double count = static_cast<double>(data.size());
  mean.structural /= count;
  mean.relational /= count;
  mean.depth /= count;
  return mean;
}

Gradients gradients(const ProbeModel& model, const AlignedDataset& data, const std::vector<std::size_t>& batch,
                    const LossWeights& weights, LossTerms* batch_losses) {
  if (batch.empty()) throw ArgumentError("gradients: empty batch");
  Gradients grad;
  grad.structural = Eigen::MatrixXd::Zero(model.structural.rows(), model.structural.cols());
  if (model.relational) grad.relational = Eigen::MatrixXd::Zero(model.relational->rows(), model.relational->cols());
  if (model.depth) grad.depth = Eigen::MatrixXd::Zero(model.depth->rows(), model.depth->cols());
  LossTerms sums;

  for (const auto index : batch) {
    const auto& sentence = data.sentence(index);
    const auto& structural_inputs = data.inputs(index, model.layer_structural);
    if (weights.structural != 0.0) {
      grad.structural += weights.structural * structural_loss_gradient(model.structural, sentence, structural_inputs);
    }
    if (batch_losses) sums.structural += structural_loss(model.structural, sentence, structural_inputs);
    if (model.relational) {
      const auto& inputs = data.inputs(index, *model.layer_relational);
      if (weights.relational != 0.0) *grad.relational += weights.relational * relational_loss_gradient(*model.relational, sentence, inputs);
      if (batch_losses) sums.relational += relational_loss(*model.relational, sentence, inputs);
    }
    if (model.depth) {
      const auto& inputs = data.inputs(index, *model.layer_depth);
      if (weights.depth != 0.0) *grad.depth += weights.depth * depth_loss_gradient(*model.depth, sentence, inputs);
      if (batch_losses) sums.depth += depth_loss(*model.depth, sentence, inputs);
    }
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  grad.structural *= scale;
  if (grad.relational) *grad.relational *= scale;
  if (grad.depth) *grad.depth *= scale;
  if (batch_losses) {
    batch_losses->structural = sums.structural * scale;
    batch_losses->relational = sums.relational * scale;
    batch_losses->depth = sums.depth * scale;
  }
  return grad;
}

ProbeMetrics probe_metrics(const ProbeModel& model, const AlignedDataset& data) {
  std::size_t gold_edges = 0;
  std::size_t found = 0;
  std::size_t tokens = 0;
  std::size_t labels_ok = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto& sentence = data.sentence(s);
    const auto d = distance_matrix(model.structural, data.inputs(s, model.layer_structural));
    auto predicted = undirected_mst(d);
    for (auto& edge : predicted) edge = {std::min(edge.first, edge.second), std::max(edge.first, edge.second)};
    std::sort(predicted.begin(), predicted.end());
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (sentence.gold_head[i] == kRootHead) continue;
      ++gold_edges;
      const UndirectedEdge edge{std::min(i, sentence.gold_head[i]), std::max(i, sentence.gold_head[i])};
      if (std::binary_search(predicted.begin(), predicted.end(), edge)) ++found;
    }
    if (model.relational) {
      const Eigen::MatrixXd logits = data.inputs(s, *model.layer_relational) * *model.relational;
      for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        Eigen::Index best = 0;
        logits.row(i).maxCoeff(&best);
        ++tokens;
        if (static_cast<std::size_t>(best) == sentence.gold_rel[static_cast<std::size_t>(i)]) ++labels_ok;
      }
    }
  }
  ProbeMetrics metrics;
  metrics.uuas = gold_edges == 0 ? 1.0 : static_cast<double>(found) / static_cast<double>(gold_edges);
  if (model.relational) metrics.rel_acc = tokens == 0 ? 0.0 : static_cast<double>(labels_ok) / static_cast<double>(tokens);
  return metrics;
}

std::pair<ProbeModel, TrainReport> fit(ProbeModel model, const AlignedDataset& train, const AlignedDataset& dev,
                                       const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw ArgumentError("fit: empty training set");
  check_model_layers(model, train);
  check_model_layers(model, dev);
  const AlignedDataset& signal = dev.empty() ? train : dev;

  TrainReport report;
  report.kind = model.kind;
  report.seed = config.seed;
  report.initial_dev_loss = combined_loss(model, mean_losses(model, signal), config.weights);
  report.best_dev_loss = report.initial_dev_loss;

  ProbeModel best = model;
  AdamW optimizer(config.weight_decay);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double lr = config.learning_rate;
  int stale_epochs = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord record;
    record.epoch = epoch;
    record.learning_rate = lr;
    LossTerms epoch_sums;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + config.batch_size)));
      LossTerms batch_losses;
      const auto grad = gradients(model, train, batch, config.weights, &batch_losses);
      const double share = static_cast<double>(batch.size());
      epoch_sums.structural += batch_losses.structural * share;
      epoch_sums.relational += batch_losses.relational * share;
      epoch_sums.depth += batch_losses.depth * share;
      optimizer.tick();
      optimizer.step(model.structural, grad.structural, 0, lr);
      if (model.relational) optimizer.step(*model.relational, *grad.relational, 1, lr);
      if (model.depth) optimizer.step(*model.depth, *grad.depth, 2, lr);
    }
    if (!model.all_finite()) throw DataError("training diverged: non-finite parameters at epoch " + std::to_string(epoch));
    const double count = static_cast<double>(train.size());
    record.train = {epoch_sums.structural / count, epoch_sums.relational / count, epoch_sums.depth / count};
    record.dev = mean_losses(model, signal);
    record.dev_loss = combined_loss(model, record.dev, config.weights);

    const double reference = report.best_dev_loss;
    record.improved = record.dev_loss < reference - config.plateau_threshold;
    if (record.dev_loss < reference) {
      report.best_dev_loss = record.dev_loss;
      report.best_epoch = epoch;
      best = model;
    }
    report.epochs.push_back(record);
    report.learning_rates.push_back(lr);
    report.stopping_epoch = epoch;
    if (record.improved) {
      stale_epochs = 0;
    } else {
      lr *= config.plateau_factor;
      if (++stale_epochs >= config.early_stop_patience) break;
    }
  }

  const auto metrics = probe_metrics(best, signal);
  report.dev_uuas = metrics.uuas;
  report.dev_rel_acc = metrics.rel_acc;
  return {std::move(best), std::move(report)};
}

std::string train_report_json(const TrainReport& report) {
  using nlohmann::json;
  const auto terms = [](const LossTerms& t) {
    return json{{"structural", t.structural}, {"relational", t.relational}, {"depth", t.depth}};
  };
  json epochs = json::array();
  for (const auto& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"learning_rate", e.learning_rate},
                      {"train", terms(e.train)},
                      {"dev", terms(e.dev)},
                      {"dev_loss", e.dev_loss},
                      {"improved", e.improved}});
  }
  json doc{{"kind", report.kind == ProbeKind::kDepProbe ? "depprobe" : "dirprobe"},
           {"seed", report.seed},
           {"initial_dev_loss", report.initial_dev_loss},
           {"epochs", epochs},
           {"learning_rates", report.learning_rates},
           {"stopping_epoch", report.stopping_epoch},
           {"best_epoch", report.best_epoch},
           {"best_dev_loss", report.best_dev_loss},
           {"dev_uuas", report.dev_uuas},
           {"dev_rel_acc", report.dev_rel_acc ? json(*report.dev_rel_acc) : json(nullptr)}};
  return doc.dump(2) + "\n";
}

LayerScanResult layer_scan(const AlignedDataset& train, const AlignedDataset& dev, const std::vector<std::uint32_t>& layers,
                           const TrainConfig& config, const ProbeDims& dims) {
  if (layers.empty()) throw ArgumentError("layer_scan: no layers given");
  LayerScanResult result;
  result.records.resize(layers.size());
  ProbeDims layer_dims = dims;
  layer_dims.embedding = train.dim();
  parallel_for(layers.size(), [&](std::size_t k) {
    const auto layer = layers[k];
    auto model = ProbeModel::initialize(ProbeKind::kDepProbe, layer_dims, config.seed, layer, layer);
    auto [trained, report] = fit(std::move(model), train, dev, config);
    result.records[k] = LayerScanRecord{layer, report.dev_uuas, report.dev_rel_acc.value_or(0.0), report.stopping_epoch};
  });
  std::size_t best_uuas = 0;
  std::size_t best_rel = 0;
  for (std::size_t k = 1; k < result.records.size(); ++k) {
    if (result.records[k].uuas > result.records[best_uuas].uuas) best_uuas = k;
    if (result.records[k].rel_acc > result.records[best_rel].rel_acc) best_rel = k;
  }
  result.best_structural_layer = result.records[best_uuas].layer;
  result.best_relational_layer = result.records[best_rel].layer;
  return result;
}

LayerScanResult layer_scan_files(const std::vector<GoldSentence>& train_corpus, const std::vector<GoldSentence>& dev_corpus,
                                 const std::vector<std::string>& train_files, const std::vector<std::string>& dev_files,
                                 const TrainConfig& config, const ProbeDims& dims) {
  if (train_files.size() != dev_files.size()) throw ArgumentError("layer_scan: train and dev layer file counts differ");
  if (train_files.empty()) throw ArgumentError("layer_scan: no layer files given");
  LayerScanResult result;
  for (std::size_t k = 0; k < train_files.size(); ++k) {
    const auto train_file = read_embeddings(train_files[k]);
    const auto dev_file = read_embeddings(dev_files[k]);
    if (train_file.layer != dev_file.layer) {
      throw ArgumentError("layer mismatch between " + train_files[k] + " and " + dev_files[k]);
    }
    const auto train = align(train_corpus, train_file.records, train_file.layer);
    const auto dev = align(dev_corpus, dev_file.records, dev_file.layer);
    const auto single = layer_scan(train, dev, {train_file.layer}, config, dims);
    result.records.push_back(single.records.front());
  }
  std::size_t best_uuas = 0;
  std::size_t best_rel = 0;
  for (std::size_t k = 1; k < result.records.size(); ++k) {
    if (result.records[k].uuas > result.records[best_uuas].uuas) best_uuas = k;
    if (result.records[k].rel_acc > result.records[best_rel].rel_acc) best_rel = k;
  }
  result.best_structural_layer = result.records[best_uuas].layer;
  result.best_relational_layer = result.records[best_rel].layer;
  return result;
}

std::string layer_scan_tsv(const LayerScanResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "layer\tuuas\trel_acc\tstopping_epoch\n";
  for (const auto& r : result.records) out << r.layer << '\t' << r.uuas << '\t' << r.rel_acc << '\t' << r.stopping_epoch << '\n';
  return out.str();
}

}  // namespace depprobe
