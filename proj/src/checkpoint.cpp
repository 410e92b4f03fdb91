#include "depprobe/checkpoint.hpp"

#include <bit>
#include <cstdint>

#include <json.hpp>

#include "depprobe/digest.hpp"
#include "depprobe/errors.hpp"

namespace depprobe {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "depprobe-checkpoint";
constexpr int kVersion = 1;
constexpr const char* kEncoding = "f64le-rowmajor-base64";

json encode_matrix(const Eigen::MatrixXd& m) {
  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(m.size()) * 8);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto bits = std::bit_cast<std::uint64_t>(m(i, j));
      for (int shift = 0; shift < 64; shift += 8) bytes.push_back(static_cast<char>((bits >> shift) & 0xFFu));
    }
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"encoding", kEncoding}, {"data", base64_encode(bytes)}};
}

Eigen::MatrixXd decode_matrix(const json& node, const char* name) {
  if (!node.is_object()) throw FormatError(std::string("checkpoint matrix '") + name + "' is missing");
  if (node.at("encoding").get<std::string>() != kEncoding) throw FormatError("unsupported matrix encoding");
  const auto rows = node.at("rows").get<Eigen::Index>();
  const auto cols = node.at("cols").get<Eigen::Index>();
  const std::string bytes = base64_decode(node.at("data").get<std::string>());
  if (rows < 0 || cols < 0 || bytes.size() != static_cast<std::size_t>(rows * cols) * 8) {
    throw FormatError(std::string("checkpoint matrix '") + name + "' payload size does not match its shape");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t offset = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + k])) << (8 * k);
      offset += 8;
      m(i, j) = std::bit_cast<double>(bits);
    }
  }
  if (!m.allFinite()) throw DataError(std::string("checkpoint matrix '") + name + "' contains non-finite values");
  return m;
}

json optional_layer(const std::optional<std::uint32_t>& layer) { return layer ? json(*layer) : json(nullptr); }

}  // namespace

std::string serialize_checkpoint(const ProbeModel& model) {
  json labels = json::array();
  for (const auto label : RelationVocab::labels()) labels.push_back(std::string(label));

  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["kind"] = model.kind == ProbeKind::kDepProbe ? "depprobe" : "dirprobe";
  doc["e"] = model.structural.rows();
  doc["b"] = model.structural.cols();
  doc["c"] = model.depth ? json(model.depth->cols()) : json(nullptr);
  doc["l"] = model.relational ? json(model.relational->cols()) : json(nullptr);
  doc["layers"] = {{"structural", model.layer_structural},
                   {"relational", optional_layer(model.layer_relational)},
                   {"depth", optional_layer(model.layer_depth)}};
  doc["relations"] = labels;
  doc["matrices"] = {{"structural", encode_matrix(model.structural)},
                     {"relational", model.relational ? encode_matrix(*model.relational) : json(nullptr)},
                     {"depth", model.depth ? encode_matrix(*model.depth) : json(nullptr)}};
  return doc.dump(2) + "\n";
}

ProbeModel deserialize_checkpoint(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw FormatError("not a depprobe checkpoint");
    if (doc.at("version").get<int>() != kVersion) throw FormatError("unsupported checkpoint version");
    const auto& labels = doc.at("relations");
    if (labels.size() != kNumRelations) throw FormatError("checkpoint relation vocabulary has the wrong size");
    for (std::size_t k = 0; k < kNumRelations; ++k) {
      if (labels[k].get<std::string>() != RelationVocab::labels()[k]) {
        throw FormatError("checkpoint relation vocabulary differs at index " + std::to_string(k));
      }
    }

    ProbeModel model;
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "depprobe") {
      model.kind = ProbeKind::kDepProbe;
    } else if (kind == "dirprobe") {
      model.kind = ProbeKind::kDirProbe;
    } else {
      throw FormatError("unknown probe kind '" + kind + "'");
    }
    const auto& layers = doc.at("layers");
    const auto& matrices = doc.at("matrices");
    model.layer_structural = layers.at("structural").get<std::uint32_t>();
    model.structural = decode_matrix(matrices.at("structural"), "structural");
    if (!matrices.at("relational").is_null()) {
      model.relational.emplace(decode_matrix(matrices.at("relational"), "relational"));
      model.layer_relational = layers.at("relational").get<std::uint32_t>();
    }
    if (!matrices.at("depth").is_null()) {
      model.depth.emplace(decode_matrix(matrices.at("depth"), "depth"));
      model.layer_depth = layers.at("depth").get<std::uint32_t>();
    }

    const auto e = doc.at("e").get<Eigen::Index>();
    const bool shapes_ok = model.structural.rows() == e && model.structural.cols() == doc.at("b").get<Eigen::Index>() &&
                           (!model.relational || (model.relational->rows() == e &&
                                                  model.relational->cols() == doc.at("l").get<Eigen::Index>())) &&
                           (!model.depth || (model.depth->rows() == e && model.depth->cols() == doc.at("c").get<Eigen::Index>()));
    if (!shapes_ok) throw FormatError("checkpoint matrix shapes disagree with declared dimensionalities");
    if (model.kind == ProbeKind::kDepProbe && !model.relational) throw FormatError("depprobe checkpoint lacks a relational map");
    if (model.kind == ProbeKind::kDirProbe && !model.depth) throw FormatError("dirprobe checkpoint lacks a depth map");
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ProbeModel& model, const std::string& path) { write_file(path, serialize_checkpoint(model)); }

ProbeModel load_checkpoint(const std::string& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace depprobe
