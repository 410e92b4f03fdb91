#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Core>

#include "depprobe/treebank.hpp"

namespace depprobe {

/// Smoothing inside the square root of the structural distance; keeps the
/// gradient finite at zero distance.
inline constexpr double kDistanceEpsilon = 1e-9;

enum class ProbeKind {
  kDepProbe,  // structural B + relational L
  kDirProbe,  // structural B + depth C
};

struct ProbeDims {
  std::size_t embedding = 768;  // e
  std::size_t structural = 128;  // b
  std::size_t depth = 128;      // c
  std::size_t relations = kNumRelations;  // l
};

/// Linear probe maps, each e x (output dim). Only the maps belonging to the
/// configured kind are present.
struct ProbeModel {
  ProbeKind kind = ProbeKind::kDepProbe;
  Eigen::MatrixXd structural;                // B, e x b
  std::optional<Eigen::MatrixXd> relational;  // L, e x l
  std::optional<Eigen::MatrixXd> depth;      // C, e x c
  std::uint32_t layer_structural = 6;
  std::optional<std::uint32_t> layer_relational;
  std::optional<std::uint32_t> layer_depth;

  std::size_t embedding_dim() const { return static_cast<std::size_t>(structural.rows()); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Uniform [-s, s] initialization with s = sqrt(6 / (e + cols)) per map.
  static ProbeModel initialize(ProbeKind kind, const ProbeDims& dims, std::uint64_t seed,
                               std::uint32_t layer_structural = 6, std::uint32_t layer_other = 7);
};

/// Trainable parameter count of a configuration without building it.
std::size_t parameter_count(ProbeKind kind, const ProbeDims& dims);

/// sqrt(|B^T (h_i - h_j)|^2 + eps).
double structural_distance(const Eigen::MatrixXd& B, const Eigen::VectorXd& h_i, const Eigen::VectorXd& h_j);

/// n x n matrix of structural distances between the rows of `embeddings`.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& B, const Eigen::MatrixXd& embeddings);

/// |C^T h|^2.
double depth_score(const Eigen::MatrixXd& C, const Eigen::VectorXd& h);
Eigen::VectorXd depth_scores(const Eigen::MatrixXd& C, const Eigen::MatrixXd& embeddings);

/// Max-shifted softmax over the logits L^T h.
Eigen::VectorXd relation_probs(const Eigen::MatrixXd& L, const Eigen::VectorXd& h);
/// Row-wise relation probabilities, n x l.
Eigen::MatrixXd relation_prob_matrix(const Eigen::MatrixXd& L, const Eigen::MatrixXd& embeddings);

/// Row-wise numerically stable softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

}  // namespace depprobe
