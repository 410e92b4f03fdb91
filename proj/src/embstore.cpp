#include "depprobe/embstore.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "depprobe/errors.hpp"

namespace depprobe {

namespace {

constexpr std::array<char, 4> kMagic = {'D', 'P', 'E', '1'};

void put_u32(std::string& out, std::uint32_t value) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((value >> shift) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* bytes) {
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

class Reader {
 public:
  Reader(std::ifstream& in, const std::string& path) : in_(in), path_(path) {}

  void read(unsigned char* dst, std::size_t count, const char* what) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != count) {
      throw IoError(path_ + ": truncated " + what + " at byte offset " + std::to_string(offset_ + got));
    }
    offset_ += count;
  }

  std::uint32_t u32(const char* what) {
    unsigned char bytes[4];
    read(bytes, 4, what);
    return get_u32(bytes);
  }

  std::size_t offset() const { return offset_; }

 private:
  std::ifstream& in_;
  const std::string& path_;
  std::size_t offset_ = 0;
};

}  // namespace

EmbeddingFile read_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  Reader reader(in, path);

  std::array<unsigned char, 4> magic{};
  reader.read(magic.data(), magic.size(), "header");
  if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) throw FormatError(path + ": bad magic, not a DPE1 file");
  const auto version = reader.u32("header");
  if (version != kEmbeddingFormatVersion) throw FormatError(path + ": unsupported version " + std::to_string(version));
  const auto count = reader.u32("header");
  EmbeddingFile file;
  file.dim = reader.u32("header");
  file.layer = reader.u32("header");
  if (file.dim == 0) throw FormatError(path + ": embedding dimensionality is zero");

  file.records.reserve(count);
  std::vector<unsigned char> buffer;
  for (std::uint32_t s = 0; s < count; ++s) {
    EmbeddingMatrix record;
    record.sentence_index = reader.u32("record header");
    const auto n = reader.u32("record header");
    const std::size_t values = static_cast<std::size_t>(n) * file.dim;
    const std::size_t payload_offset = reader.offset();
    buffer.resize(values * 4);
    reader.read(buffer.data(), buffer.size(), "record payload");
    record.values.resize(n, file.dim);
    float* dst = record.values.data();
    for (std::size_t k = 0; k < values; ++k) {
      const float v = std::bit_cast<float>(get_u32(buffer.data() + 4 * k));
      if (!std::isfinite(v)) {
        throw DataError(path + ": non-finite value in sentence " + std::to_string(s) + " at byte offset " +
                        std::to_string(payload_offset + 4 * k));
      }
      dst[k] = v;
    }
    file.records.push_back(std::move(record));
  }
  return file;
}

void write_embeddings(const std::vector<EmbeddingMatrix>& records, std::uint32_t layer, const std::string& path) {
  std::uint32_t dim = records.empty() ? 1u : static_cast<std::uint32_t>(records.front().e());
  for (const auto& record : records) {
    if (record.e() != dim) throw ArgumentError("records have non-uniform embedding dimensionality");
  }
  if (dim == 0) throw ArgumentError("embedding dimensionality must be positive");

  std::string bytes(kMagic.begin(), kMagic.end());
  put_u32(bytes, kEmbeddingFormatVersion);
  put_u32(bytes, static_cast<std::uint32_t>(records.size()));
  put_u32(bytes, dim);
  put_u32(bytes, layer);
  for (const auto& record : records) {
    put_u32(bytes, record.sentence_index);
    put_u32(bytes, static_cast<std::uint32_t>(record.n()));
    const float* src = record.values.data();
    for (std::size_t k = 0; k < record.n() * dim; ++k) put_u32(bytes, std::bit_cast<std::uint32_t>(src[k]));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

AlignedDataset::AlignedDataset(std::vector<GoldSentence> sentences) : sentences_(std::move(sentences)) {}

void AlignedDataset::add_layer(std::uint32_t layer, const std::vector<EmbeddingMatrix>& embeddings) {
  if (embeddings.size() != sentences_.size()) {
    throw AlignmentError("corpus has " + std::to_string(sentences_.size()) + " sentences but embeddings have " +
                             std::to_string(embeddings.size()),
                         std::min(embeddings.size(), sentences_.size()));
  }
  std::vector<Eigen::MatrixXd> converted;
  converted.reserve(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto& emb = embeddings[i];
    if (emb.n() != sentences_[i].size()) {
      throw AlignmentError("expected " + std::to_string(sentences_[i].size()) + " word vectors, found " +
                               std::to_string(emb.n()),
                           i);
    }
    if (dim_ == 0) dim_ = emb.e();
    if (emb.e() != dim_) throw AlignmentError("embedding dimensionality differs from earlier layers", i);
    converted.push_back(emb.values.cast<double>());
  }
  layers_[layer] = std::move(converted);
}

std::vector<std::uint32_t> AlignedDataset::layers() const {
  std::vector<std::uint32_t> result;
  for (const auto& [layer, _] : layers_) result.push_back(layer);
  return result;
}

const Eigen::MatrixXd& AlignedDataset::inputs(std::size_t i, std::uint32_t layer) const {
  const auto it = layers_.find(layer);
  if (it == layers_.end()) throw ArgumentError("no embeddings loaded for layer " + std::to_string(layer));
  return it->second.at(i);
}

AlignedDataset AlignedDataset::subset(const std::vector<std::size_t>& indices) const {
  AlignedDataset out;
  out.dim_ = dim_;
  for (const auto i : indices) out.sentences_.push_back(sentences_.at(i));
  for (const auto& [layer, matrices] : layers_) {
    auto& dst = out.layers_[layer];
    for (const auto i : indices) dst.push_back(matrices.at(i));
  }
  return out;
}

AlignedDataset align(std::vector<GoldSentence> corpus, const std::vector<EmbeddingMatrix>& embeddings,
                     std::uint32_t layer) {
  AlignedDataset dataset(std::move(corpus));
  dataset.add_layer(layer, embeddings);
  return dataset;
}

}  // namespace depprobe
