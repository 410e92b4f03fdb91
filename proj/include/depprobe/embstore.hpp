#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "depprobe/treebank.hpp"

namespace depprobe {

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Word embeddings of one sentence at one encoder layer (n x e).
struct EmbeddingMatrix {
  std::uint32_t sentence_index = 0;
  FloatMatrix values;

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t e() const { return static_cast<std::size_t>(values.cols()); }
};

/// Contents of one DPE1 file.
///
/// Layout (little-endian throughout):
///   header:  "DPE1" | version u32 = 1 | num_sentences u32 | e u32 | layer u32
///   records: sentence_index u32 | n u32 | n*e float32, word-major
struct EmbeddingFile {
  std::uint32_t layer = 0;
  std::uint32_t dim = 0;
  std::vector<EmbeddingMatrix> records;
};

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 20;

EmbeddingFile read_embeddings(const std::string& path);
void write_embeddings(const std::vector<EmbeddingMatrix>& records, std::uint32_t layer, const std::string& path);

/// Gold sentences paired with their embeddings, possibly at several layers.
/// Embeddings are held in double precision for the probe arithmetic.
class AlignedDataset {
 public:
  AlignedDataset() = default;
  explicit AlignedDataset(std::vector<GoldSentence> sentences);

  /// Throws AlignmentError on a count or word-count mismatch.
  void add_layer(std::uint32_t layer, const std::vector<EmbeddingMatrix>& embeddings);

  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  bool has_layer(std::uint32_t layer) const { return layers_.count(layer) != 0; }
  std::vector<std::uint32_t> layers() const;
  std::size_t dim() const { return dim_; }

  const GoldSentence& sentence(std::size_t i) const { return sentences_.at(i); }
  const std::vector<GoldSentence>& sentences() const { return sentences_; }
  /// n x e inputs of sentence i at `layer`; throws ArgumentError if the layer is absent.
  const Eigen::MatrixXd& inputs(std::size_t i, std::uint32_t layer) const;

  /// A dataset over the given sentence indices (used for train/dev splits).
  AlignedDataset subset(const std::vector<std::size_t>& indices) const;

 private:
  std::vector<GoldSentence> sentences_;
  std::map<std::uint32_t, std::vector<Eigen::MatrixXd>> layers_;
  std::size_t dim_ = 0;
};

/// Pairs a corpus with one embedding file's records.
AlignedDataset align(std::vector<GoldSentence> corpus, const std::vector<EmbeddingMatrix>& embeddings,
                     std::uint32_t layer = 0);

}  // namespace depprobe
