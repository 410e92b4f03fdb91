#include "depprobe/probe.hpp"

#include <cmath>
#include <string>

#include "depprobe/errors.hpp"

namespace depprobe {

namespace {

void require_rows(const Eigen::MatrixXd& map, Eigen::Index dim, const char* what) {
  if (map.rows() != dim) {
    throw ArgumentError(std::string(what) + ": map expects " + std::to_string(map.rows()) +
                        "-dimensional embeddings, got " + std::to_string(dim));
  }
}

Eigen::MatrixXd uniform_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  return m;
}

}  // namespace

std::size_t parameter_count(ProbeKind kind, const ProbeDims& dims) {
  const std::size_t second = kind == ProbeKind::kDepProbe ? dims.relations : dims.depth;
  return dims.embedding * dims.structural + dims.embedding * second;
}

std::size_t ProbeModel::parameter_count() const {
  std::size_t count = static_cast<std::size_t>(structural.size());
  if (relational) count += static_cast<std::size_t>(relational->size());
  if (depth) count += static_cast<std::size_t>(depth->size());
  return count;
}

bool ProbeModel::all_finite() const {
  return structural.allFinite() && (!relational || relational->allFinite()) && (!depth || depth->allFinite());
}

ProbeModel ProbeModel::initialize(ProbeKind kind, const ProbeDims& dims, std::uint64_t seed,
                                  std::uint32_t layer_structural, std::uint32_t layer_other) {
  if (dims.embedding == 0 || dims.structural == 0) throw ArgumentError("probe dimensionalities must be positive");
  std::mt19937_64 rng(seed);
  ProbeModel model;
  model.kind = kind;
  model.layer_structural = layer_structural;
  model.structural = uniform_matrix(dims.embedding, dims.structural, rng);
  if (kind == ProbeKind::kDepProbe) {
    if (dims.relations == 0) throw ArgumentError("relation count must be positive");
    model.relational = uniform_matrix(dims.embedding, dims.relations, rng);
    model.layer_relational = layer_other;
  } else {
    if (dims.depth == 0) throw ArgumentError("depth dimensionality must be positive");
    model.depth = uniform_matrix(dims.embedding, dims.depth, rng);
    model.layer_depth = layer_other;
  }
  return model;
}

double structural_distance(const Eigen::MatrixXd& B, const Eigen::VectorXd& h_i, const Eigen::VectorXd& h_j) {
  if (h_i.size() != h_j.size()) throw ArgumentError("structural_distance: vectors differ in length");
  require_rows(B, h_i.size(), "structural_distance");
  const Eigen::VectorXd projected = B.transpose() * (h_i - h_j);
  return std::sqrt(projected.squaredNorm() + kDistanceEpsilon);
}

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& B, const Eigen::MatrixXd& embeddings) {
  require_rows(B, embeddings.cols(), "distance_matrix");
  const Eigen::MatrixXd projected = embeddings * B;
  const Eigen::Index n = projected.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = std::sqrt(kDistanceEpsilon);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double value = std::sqrt((projected.row(i) - projected.row(j)).squaredNorm() + kDistanceEpsilon);
      d(i, j) = value;
      d(j, i) = value;
    }
  }
  return d;
}

double depth_score(const Eigen::MatrixXd& C, const Eigen::VectorXd& h) {
  require_rows(C, h.size(), "depth_score");
  return (C.transpose() * h).squaredNorm();
}

Eigen::VectorXd depth_scores(const Eigen::MatrixXd& C, const Eigen::MatrixXd& embeddings) {
  require_rows(C, embeddings.cols(), "depth_scores");
  return (embeddings * C).rowwise().squaredNorm();
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double shift = logits.row(i).maxCoeff();
    probs.row(i) = (logits.row(i).array() - shift).exp().matrix();
    probs.row(i) /= probs.row(i).sum();
  }
  return probs;
}

Eigen::VectorXd relation_probs(const Eigen::MatrixXd& L, const Eigen::VectorXd& h) {
  require_rows(L, h.size(), "relation_probs");
  const Eigen::MatrixXd logits = (L.transpose() * h).transpose();
  return softmax_rows(logits).row(0).transpose();
}

Eigen::MatrixXd relation_prob_matrix(const Eigen::MatrixXd& L, const Eigen::MatrixXd& embeddings) {
  require_rows(L, embeddings.cols(), "relation_prob_matrix");
  return softmax_rows(embeddings * L);
}

}  // namespace depprobe
