#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "depprobe/treebank.hpp"

namespace depprobe {

struct TreeEdge {
  std::size_t head = 0;
  std::size_t child = 0;
  std::optional<std::size_t> relation;  // absent for unlabeled decoders

  bool operator==(const TreeEdge&) const = default;
};

struct PredictedTree {
  std::size_t n = 0;
  std::size_t root = 0;
  std::vector<TreeEdge> edges;
  bool directed = true;
  bool labeled = false;

  /// Head per word, kRootHead for the root.
  std::vector<std::size_t> heads() const;
  /// Relation per word (root gets the root relation); nullopt when unlabeled.
  std::optional<std::vector<std::size_t>> relations() const;
  /// Undirected edge set as (min, max) pairs, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> undirected_edges() const;
  /// Throws StructureError if any tree invariant is violated.
  void validate() const;
};

/// Greedy root-first expansion over structural distances: roots the tree at
/// argmax p(root | w), then repeatedly attaches the closest outside word to
/// the tree, labeling it with its most probable non-root relation. O(n^2).
PredictedTree depprobe_decode(const Eigen::MatrixXd& distances, const Eigen::MatrixXd& rel_probs);

using UndirectedEdge = std::pair<std::size_t, std::size_t>;

/// Prim's algorithm over the complete graph, grown from vertex 0. Edges are
/// returned as (tree vertex, new vertex) in order of addition.
std::vector<UndirectedEdge> undirected_mst(const Eigen::MatrixXd& distances);

/// Orients an undirected spanning tree away from `root`.
PredictedTree orient_tree(std::size_t n, const std::vector<UndirectedEdge>& edges, std::size_t root);

/// Dense arc scores where a cell is either a finite score or forbidden.
class ArcScores {
 public:
  explicit ArcScores(std::size_t n) : n_(n), score_(n * n, 0.0), allowed_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool allowed(std::size_t head, std::size_t child) const { return allowed_[head * n_ + child] != 0; }
  double score(std::size_t head, std::size_t child) const { return score_[head * n_ + child]; }
  void set(std::size_t head, std::size_t child, double value) {
    score_[head * n_ + child] = value;
    allowed_[head * n_ + child] = 1;
  }
  void forbid(std::size_t head, std::size_t child) { allowed_[head * n_ + child] = 0; }

 private:
  std::size_t n_;
  std::vector<double> score_;
  std::vector<unsigned char> allowed_;
};

/// Maximum-weight spanning arborescence rooted at `root` (Chu-Liu-Edmonds
/// with cycle contraction). Returns the head of every word, kRootHead for the
/// root. Throws StructureError if no arborescence exists over allowed arcs.
std::vector<std::size_t> max_spanning_arborescence(const ArcScores& scores, std::size_t root);

enum class DepthGate {
  kForbidHeadDeeper,     // head deeper than child is forbidden (default reading)
  kForbidHeadShallower,  // the converse, for replication studies
};

struct DirProbeResult {
  PredictedTree tree;
  std::size_t relaxed_words = 0;  // words whose depth gate had to be lifted
};

/// Builds M[i][j] = -D[i][j], roots at the shallowest word, forbids arcs
/// violating the depth gate, and decodes the maximum arborescence.
DirProbeResult dirprobe_decode(const Eigen::MatrixXd& distances, const Eigen::VectorXd& depth_scores,
                               DepthGate gate = DepthGate::kForbidHeadDeeper);

/// The arc mask dirprobe_decode decodes over, after any relaxation.
ArcScores dirprobe_scores(const Eigen::MatrixXd& distances, const Eigen::VectorXd& depth_scores, DepthGate gate,
                          std::size_t* relaxed_words = nullptr);

struct PredictedSentence {
  std::string sentence_id;
  std::vector<std::string> words;
  PredictedTree tree;
};

/// CoNLL-U with HEAD and DEPREL filled ("_" for unlabeled trees); undirected
/// trees carry a "# directed = false" comment.
void write_predictions(std::ostream& out, const PredictedSentence& sentence);
std::vector<PredictedSentence> read_predictions(std::istream& in);

}  // namespace depprobe
