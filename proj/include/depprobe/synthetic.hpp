#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "depprobe/embstore.hpp"
#include "depprobe/treebank.hpp"

namespace depprobe {

/// Random gold trees with embeddings from which a linear probe can recover
/// both structure and labels.
struct SyntheticConfig {
  std::size_t sentences = 500;
  std::size_t min_words = 3;
  std::size_t max_words = 12;
  std::size_t noise_dims = 8;
  double noise_scale = 0.05;
  double path_scale = 1.0;
  double relation_scale = 1.5;
  /// Column scales of the mixing are drawn from [1 - spread, 1 + spread].
  double mixing_spread = 0.25;
  /// Probability that a non-root word takes `majority_label` instead of a
  /// uniformly drawn non-root label.
  double majority_rate = 0.0;
  std::size_t majority_label = 0;
  std::uint64_t seed = 1;

  /// Throws ArgumentError on inconsistent settings.
  void validate() const;
};

/// max_words path coordinates + one relation block + noise dims.
std::size_t synthetic_dim(const SyntheticConfig& config);

/// Heads are drawn by attaching each word to a uniformly chosen earlier word
/// of a random permutation. The root carries the root label.
std::vector<GoldSentence> synthetic_trees(const SyntheticConfig& config);

/// Word vector = [path block | relation one-hot | noise], times a fixed
/// invertible mixing matrix. The path block of word i is the sum of unit
/// vectors e_k over the words k on the path from the root to i (root
/// excluded), so squared distances between words equal tree distances.
std::vector<EmbeddingMatrix> synthetic_embeddings(const std::vector<GoldSentence>& corpus, const SyntheticConfig& config);

/// The mixing applied by synthetic_embeddings: Q * diag(s) with Q orthogonal
/// and s drawn from [1 - spread, 1 + spread].
Eigen::MatrixXd synthetic_mixing(std::size_t dim, std::uint64_t seed, double spread);

/// Label-free embeddings: i.i.d. normal entries with the given mean.
std::vector<EmbeddingMatrix> noise_embeddings(const std::vector<GoldSentence>& corpus, std::size_t dim, double mean,
                                              double stddev, std::uint64_t seed);

}  // namespace depprobe
