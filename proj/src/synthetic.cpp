#include "depprobe/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/QR>

#include "depprobe/errors.hpp"

namespace depprobe {

void SyntheticConfig::validate() const {
  if (sentences == 0) throw ArgumentError("synthetic: sentences must be positive");
  if (min_words < 1 || min_words > max_words) throw ArgumentError("synthetic: need 1 <= min_words <= max_words");
  if (majority_rate < 0.0 || majority_rate > 1.0) throw ArgumentError("synthetic: majority_rate must lie in [0, 1]");
  if (majority_label >= kNumRelations || majority_label == RelationVocab::root_index()) {
    throw ArgumentError("synthetic: majority_label must be a non-root relation");
  }
  if (mixing_spread < 0.0 || mixing_spread >= 1.0) throw ArgumentError("synthetic: mixing_spread must lie in [0, 1)");
  if (noise_scale < 0.0 || path_scale <= 0.0 || relation_scale <= 0.0) {
    throw ArgumentError("synthetic: scales must be positive");
  }
}

std::size_t synthetic_dim(const SyntheticConfig& config) { return config.max_words + kNumRelations + config.noise_dims; }

std::vector<GoldSentence> synthetic_trees(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> length(config.min_words, config.max_words);
  std::uniform_int_distribution<std::size_t> label(0, kNumRelations - 2);
  std::bernoulli_distribution majority(config.majority_rate);
  const std::size_t root_label = RelationVocab::root_index();

  std::vector<GoldSentence> corpus;
  corpus.reserve(config.sentences);
  for (std::size_t s = 0; s < config.sentences; ++s) {
    const std::size_t n = length(rng);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::size_t> heads(n, kRootHead);
    std::vector<std::size_t> rels(n, root_label);
    for (std::size_t k = 1; k < n; ++k) {
      const std::size_t child = order[k];
      heads[child] = order[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)];
      std::size_t r = label(rng);
      if (r >= root_label) ++r;
      if (majority(rng)) r = config.majority_label;
      rels[child] = r;
    }
    std::vector<std::string> words(n);
    for (std::size_t i = 0; i < n; ++i) words[i] = "w" + std::to_string(i + 1);
    corpus.push_back(GoldSentence::build("synth-" + std::to_string(s + 1), std::move(words), std::move(heads), std::move(rels)));
  }
  return corpus;
}

Eigen::MatrixXd synthetic_mixing(std::size_t dim, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> scale(1.0 - spread, 1.0 + spread);
  Eigen::MatrixXd gaussian(dim, dim);
  for (Eigen::Index c = 0; c < gaussian.cols(); ++c)
    for (Eigen::Index r = 0; r < gaussian.rows(); ++r) gaussian(r, c) = normal(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian).householderQ();
  Eigen::VectorXd s(dim);
  for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = scale(rng);
  return q * s.asDiagonal();
}

std::vector<EmbeddingMatrix> synthetic_embeddings(const std::vector<GoldSentence>& corpus, const SyntheticConfig& config) {
  config.validate();
  const std::size_t dim = synthetic_dim(config);
  const Eigen::MatrixXd mixing = synthetic_mixing(dim, config.seed ^ 0x9e3779b97f4a7c15ULL, config.mixing_spread);
  std::mt19937_64 rng(config.seed + 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto rel_offset = static_cast<Eigen::Index>(config.max_words);
  const auto noise_offset = rel_offset + static_cast<Eigen::Index>(kNumRelations);

  std::vector<EmbeddingMatrix> out;
  out.reserve(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& sentence = corpus[s];
    const std::size_t n = sentence.size();
    if (n > config.max_words) throw ArgumentError("synthetic: sentence longer than max_words");
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      for (std::size_t k = i; sentence.gold_head[k] != kRootHead; k = sentence.gold_head[k]) {
        raw(row, static_cast<Eigen::Index>(k)) = config.path_scale;
      }
      if (sentence.gold_rel[i] < kNumRelations) {
        raw(row, rel_offset + static_cast<Eigen::Index>(sentence.gold_rel[i])) = config.relation_scale;
      }
      for (std::size_t k = 0; k < config.noise_dims; ++k) {
        raw(row, noise_offset + static_cast<Eigen::Index>(k)) = config.noise_scale * noise(rng);
      }
    }
    EmbeddingMatrix m;
    m.sentence_index = static_cast<std::uint32_t>(s);
    m.values = (raw * mixing.transpose()).cast<float>();
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<EmbeddingMatrix> noise_embeddings(const std::vector<GoldSentence>& corpus, std::size_t dim, double mean,
                                              double stddev, std::uint64_t seed) {
  if (dim == 0) throw ArgumentError("noise_embeddings: dim must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(mean, stddev);
  std::vector<EmbeddingMatrix> out;
  out.reserve(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    EmbeddingMatrix m;
    m.sentence_index = static_cast<std::uint32_t>(s);
    m.values.resize(static_cast<Eigen::Index>(corpus[s].size()), static_cast<Eigen::Index>(dim));
    for (Eigen::Index r = 0; r < m.values.rows(); ++r)
      for (Eigen::Index c = 0; c < m.values.cols(); ++c) m.values(r, c) = static_cast<float>(normal(rng));
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace depprobe
