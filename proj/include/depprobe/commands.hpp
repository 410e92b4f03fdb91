#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depprobe/analysis.hpp"
#include "depprobe/decode.hpp"
#include "depprobe/eval.hpp"
#include "depprobe/synthetic.hpp"
#include "depprobe/train.hpp"

namespace depprobe {

inline constexpr const char* kToolVersion = "0.1.0";

/// Every command writes into an output directory laid out as
///   checkpoints/  predictions/  reports/  manifest.json
/// The manifest records the command, its configuration, content digests of
/// inputs and outputs, seeds, the tool version and the wall-clock duration.

/// Reads a CoNLL-U file and one DPE1 file per layer. Throws ArgumentError
/// when two files carry the same layer.
AlignedDataset load_dataset(const std::string& conllu, const std::vector<std::string>& embedding_files);

struct TrainOptions {
  std::string train_conllu;
  std::vector<std::string> train_embeddings;
  std::string dev_conllu;  // empty: plateau detection falls back to train loss
  std::vector<std::string> dev_embeddings;
  std::string out_dir;
  ProbeKind kind = ProbeKind::kDepProbe;
  std::size_t dim_b = 128;
  std::size_t dim_c = 128;
  std::uint32_t layer_b = 6;
  std::uint32_t layer_l = 7;
  std::uint32_t layer_c = 7;
  TrainConfig config;
  std::vector<std::uint64_t> seeds{42};
};

struct TrainOutcome {
  std::vector<std::string> checkpoints;
  std::vector<TrainReport> reports;
};

/// Writes checkpoints/seed<S>.json and reports/train.seed<S>.json per seed,
/// plus reports/train.mean.json when several seeds are given.
TrainOutcome cmd_train(const TrainOptions& options);

enum class DecoderKind { kDepProbe, kMst, kDirProbe };

struct ParseOptions {
  std::string checkpoint;
  std::string conllu;
  std::vector<std::string> embeddings;
  DecoderKind decoder = DecoderKind::kDepProbe;
  DepthGate gate = DepthGate::kForbidHeadDeeper;
  std::string out_dir;
};

struct ParseOutcome {
  std::string predictions_path;
  std::vector<PredictedSentence> sentences;
  std::size_t relaxed_words = 0;
};

/// Decodes every sentence in input order into predictions/<decoder>.conllu.
/// Throws CompatibilityError when the checkpoint and embeddings disagree on e.
ParseOutcome cmd_parse(const ParseOptions& options);

struct EvalOptions {
  std::string predictions;
  std::string gold;
  std::string out_dir;
};

/// Writes reports/eval.json and reports/eval.tsv.
EvalReport cmd_eval(const EvalOptions& options);

struct TransferOptions {
  std::string parser_scores;
  std::string probe_scores;
  std::map<std::string, std::string> checkpoints;  // language -> path
  std::string lang2vec;                              // optional
  bool include_diagonal = true;
  std::string out_dir;
};

struct NamedZTest {
  std::string first;
  std::string second;
  std::optional<ZTest> test;  // absent when either correlation is degenerate
};

struct TransferOutcome {
  TransferCorrelation probe;
  std::map<std::string, SsaCorrelation> ssa;  // keyed by map name
  std::optional<TransferCorrelation> lang2vec;
  bool lang2vec_degenerate = false;
  std::vector<NamedZTest> z_tests;
};

/// Writes reports/transfer.json and reports/best_source.tsv. Throws
/// ArgumentError listing the languages that differ between inputs.
TransferOutcome cmd_transfer(const TransferOptions& options);

struct LayerScanOptions {
  std::string train_conllu;
  std::string dev_conllu;
  std::string train_pattern;  // contains "{layer}"
  std::string dev_pattern;
  std::vector<std::uint32_t> layers;
  std::size_t dim_b = 128;
  TrainConfig config;
  std::string out_dir;
};

/// Writes reports/layer_scan.tsv.
LayerScanResult cmd_layer_scan(const LayerScanOptions& options);

/// Replaces every "{layer}" in `pattern`. Throws ArgumentError without one.
std::string expand_layer_pattern(const std::string& pattern, std::uint32_t layer);

struct SynthOptions {
  SyntheticConfig config;
  std::vector<std::uint32_t> layers{0};
  std::uint32_t signal_layer = 0;  // other layers get label-free noise
  std::string out_dir;
};

/// Writes {train,dev,test}.conllu and {train,dev,test}.layer<L>.dpe with an
/// 80/10/10 split in generation order.
void cmd_synth(const SynthOptions& options);

}  // namespace depprobe
