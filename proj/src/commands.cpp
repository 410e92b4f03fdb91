#include "depprobe/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "depprobe/checkpoint.hpp"
#include "depprobe/digest.hpp"
#include "depprobe/errors.hpp"

namespace depprobe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string kind_name(ProbeKind kind) { return kind == ProbeKind::kDepProbe ? "depprobe" : "dirprobe"; }

std::string decoder_name(DecoderKind decoder) {
  switch (decoder) {
    case DecoderKind::kDepProbe: return "depprobe";
    case DecoderKind::kMst: return "mst";
    case DecoderKind::kDirProbe: return "dirprobe";
  }
  return "unknown";
}

json optional_json(const std::optional<double>& value) { return value ? json(*value) : json(nullptr); }

json config_json(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate},
              {"plateau_factor", c.plateau_factor},
              {"plateau_threshold", c.plateau_threshold},
              {"early_stop_patience", c.early_stop_patience},
              {"max_epochs", c.max_epochs},
              {"batch_size", c.batch_size},
              {"weight_decay", c.weight_decay},
              {"weights", {{"structural", c.weights.structural}, {"relational", c.weights.relational}, {"depth", c.weights.depth}}}};
}

/// Collects inputs and outputs of one command run and writes manifest.json.
class Manifest {
 public:
  Manifest(std::string command, std::string out_dir)
      : command_(std::move(command)), out_dir_(std::move(out_dir)), start_(std::chrono::steady_clock::now()) {
    std::error_code ec;
    for (const char* sub : {"checkpoints", "predictions", "reports"}) {
      fs::create_directories(fs::path(out_dir_) / sub, ec);
      if (ec) throw IoError("cannot create " + (fs::path(out_dir_) / sub).string() + ": " + ec.message());
    }
  }

  void input(const std::string& path) { inputs_.push_back(path); }
  void config(json value) { config_ = std::move(value); }
  void seeds(std::vector<std::uint64_t> values) { seeds_ = std::move(values); }

  /// Writes `contents` to <out_dir>/<relative> and records it.
  std::string output(const std::string& relative, std::string_view contents) {
    const auto path = (fs::path(out_dir_) / relative).string();
    write_file(path, contents);
    outputs_.push_back(relative);
    return path;
  }

  void write() const {
    json inputs = json::array();
    for (const auto& path : inputs_) inputs.push_back({{"path", path}, {"sha256", sha256_file(path)}});
    json outputs = json::array();
    for (const auto& rel : outputs_) {
      outputs.push_back({{"path", rel}, {"sha256", sha256_file((fs::path(out_dir_) / rel).string())}});
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json doc{{"command", command_},
             {"config", config_},
             {"inputs", inputs},
             {"outputs", outputs},
             {"seeds", seeds_},
             {"tool_version", kToolVersion},
             {"wall_clock_seconds", seconds}};
    write_file((fs::path(out_dir_) / "manifest.json").string(), doc.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::string out_dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  json config_ = json::object();
  std::vector<std::uint64_t> seeds_;
};

void require_layer(const AlignedDataset& data, std::uint32_t layer, const std::string& what) {
  if (!data.empty() && !data.has_layer(layer)) {
    throw ArgumentError("no embedding file for layer " + std::to_string(layer) + " (" + what + ")");
  }
}

std::vector<GoldSentence> read_gold(const std::string& path) { return read_conllu_file(path); }

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& item : items) out += (out.empty() ? "" : ", ") + item;
  return out.empty() ? "-" : out;
}

/// Throws ArgumentError naming the languages missing from / extra in `actual`.
void check_languages(const std::set<std::string>& expected, const std::set<std::string>& actual, const std::string& what,
                     bool allow_extra = false) {
  std::set<std::string> missing;
  std::set<std::string> extra;
  std::set_difference(expected.begin(), expected.end(), actual.begin(), actual.end(), std::inserter(missing, missing.end()));
  std::set_difference(actual.begin(), actual.end(), expected.begin(), expected.end(), std::inserter(extra, extra.end()));
  if (!missing.empty() || (!allow_extra && !extra.empty())) {
    throw ArgumentError("language set mismatch in " + what + ": missing {" + join(missing) + "}" +
                        (allow_extra ? "" : ", unexpected {" + join(extra) + "}"));
  }
}

std::set<std::string> unique_labels(const std::vector<std::string>& labels, const std::string& what) {
  std::set<std::string> out(labels.begin(), labels.end());
  if (out.size() != labels.size()) throw ArgumentError(what + " lists a language twice");
  return out;
}

json correlation_json(const Correlation& c) { return json{{"rho", c.rho}, {"p_value", c.p_value}, {"n", c.n}}; }

json transfer_json(const TransferCorrelation& t) {
  return json{{"pearson", correlation_json(t.pearson)},
              {"tau_w", t.tau_w},
              {"tau_w_global", t.tau_w_global},
              {"hit_rate", t.hit_rate},
              {"cells", t.cells}};
}

std::string map_name(ProbeMap which) {
  switch (which) {
    case ProbeMap::kStructural: return "structural";
    case ProbeMap::kDepth: return "depth";
    case ProbeMap::kRelational: return "relational";
  }
  return "unknown";
}

std::size_t argmax_root_probability(const Eigen::MatrixXd& probs) {
  const auto root = static_cast<Eigen::Index>(RelationVocab::root_index());
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < probs.rows(); ++i)
    if (probs(i, root) > probs(best, root)) best = i;
  return static_cast<std::size_t>(best);
}

std::size_t argmin_depth(const Eigen::VectorXd& depth) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < depth.size(); ++i)
    if (depth(i) < depth(best)) best = i;
  return static_cast<std::size_t>(best);
}

}  // namespace

AlignedDataset load_dataset(const std::string& conllu, const std::vector<std::string>& embedding_files) {
  AlignedDataset data(read_gold(conllu));
  std::set<std::uint32_t> seen;
  for (const auto& path : embedding_files) {
    const auto file = read_embeddings(path);
    if (!seen.insert(file.layer).second) throw ArgumentError("two embedding files for layer " + std::to_string(file.layer) + ": " + path);
    data.add_layer(file.layer, file.records);
  }
  return data;
}

TrainOutcome cmd_train(const TrainOptions& options) {
  if (options.seeds.empty()) throw ArgumentError("train: at least one seed is required");
  if (options.train_embeddings.empty()) throw ArgumentError("train: no training embedding files");
  options.config.validate();
  Manifest manifest("train", options.out_dir);

  const auto train = load_dataset(options.train_conllu, options.train_embeddings);
  manifest.input(options.train_conllu);
  for (const auto& f : options.train_embeddings) manifest.input(f);
  AlignedDataset dev;
  if (!options.dev_conllu.empty()) {
    dev = load_dataset(options.dev_conllu, options.dev_embeddings);
    manifest.input(options.dev_conllu);
    for (const auto& f : options.dev_embeddings) manifest.input(f);
    if (!dev.empty() && !train.empty() && dev.dim() != train.dim()) {
      throw CompatibilityError("train embeddings have e = " + std::to_string(train.dim()) + ", dev embeddings e = " +
                               std::to_string(dev.dim()));
    }
  }
  if (train.empty()) throw DataError("train: training corpus is empty");
  const std::uint32_t layer_other = options.kind == ProbeKind::kDepProbe ? options.layer_l : options.layer_c;
  for (const AlignedDataset* data : std::initializer_list<const AlignedDataset*>{&train, &dev}) {
    require_layer(*data, options.layer_b, "structural map");
    require_layer(*data, layer_other, options.kind == ProbeKind::kDepProbe ? "relational map" : "depth map");
  }

  ProbeDims dims;
  dims.embedding = train.dim();
  dims.structural = options.dim_b;
  dims.depth = options.dim_c;

  manifest.config(json{{"kind", kind_name(options.kind)},
                       {"dim_b", options.dim_b},
                       {"dim_c", options.kind == ProbeKind::kDirProbe ? json(options.dim_c) : json(nullptr)},
                       {"layer_b", options.layer_b},
                       {"layer_l", options.kind == ProbeKind::kDepProbe ? json(options.layer_l) : json(nullptr)},
                       {"layer_c", options.kind == ProbeKind::kDirProbe ? json(options.layer_c) : json(nullptr)},
                       {"embedding_dim", dims.embedding},
                       {"train", config_json(options.config)}});
  manifest.seeds(options.seeds);

  TrainOutcome outcome;
  for (const auto seed : options.seeds) {
    TrainConfig config = options.config;
    config.seed = seed;
    auto model = ProbeModel::initialize(options.kind, dims, seed, options.layer_b, layer_other);
    auto [trained, report] = fit(std::move(model), train, dev, config);
    const auto name = "seed" + std::to_string(seed);
    outcome.checkpoints.push_back(manifest.output("checkpoints/" + name + ".json", serialize_checkpoint(trained)));
    manifest.output("reports/train." + name + ".json", train_report_json(report));
    outcome.reports.push_back(std::move(report));
  }

  if (options.seeds.size() > 1) {
    const double count = static_cast<double>(outcome.reports.size());
    double loss = 0.0, uuas = 0.0, rel = 0.0, epochs = 0.0;
    bool has_rel = true;
    json per_seed = json::array();
    for (const auto& r : outcome.reports) {
      loss += r.best_dev_loss;
      uuas += r.dev_uuas;
      epochs += r.stopping_epoch;
      has_rel = has_rel && r.dev_rel_acc.has_value();
      rel += r.dev_rel_acc.value_or(0.0);
      per_seed.push_back({{"seed", r.seed},
                          {"best_dev_loss", r.best_dev_loss},
                          {"dev_uuas", r.dev_uuas},
                          {"dev_rel_acc", optional_json(r.dev_rel_acc)},
                          {"stopping_epoch", r.stopping_epoch}});
    }
    json mean{{"best_dev_loss", loss / count},
              {"dev_uuas", uuas / count},
              {"dev_rel_acc", has_rel ? json(rel / count) : json(nullptr)},
              {"stopping_epoch", epochs / count}};
    json doc{{"kind", kind_name(options.kind)}, {"seeds", options.seeds}, {"mean", mean}, {"per_seed", per_seed}};
    manifest.output("reports/train.mean.json", doc.dump(2) + "\n");
  }
  manifest.write();
  return outcome;
}

ParseOutcome cmd_parse(const ParseOptions& options) {
  Manifest manifest("parse", options.out_dir);
  const auto model = load_checkpoint(options.checkpoint);
  manifest.input(options.checkpoint);
  const auto data = load_dataset(options.conllu, options.embeddings);
  manifest.input(options.conllu);
  for (const auto& f : options.embeddings) manifest.input(f);

  if (!data.empty() && data.dim() != model.embedding_dim()) {
    throw CompatibilityError("checkpoint expects e = " + std::to_string(model.embedding_dim()) + ", embeddings have e = " +
                             std::to_string(data.dim()));
  }
  if (options.decoder == DecoderKind::kDepProbe && !model.relational) {
    throw ArgumentError("decoder depprobe needs a relational map; checkpoint is " + kind_name(model.kind));
  }
  if (options.decoder == DecoderKind::kDirProbe && !model.depth) {
    throw ArgumentError("decoder dirprobe needs a depth map; checkpoint is " + kind_name(model.kind));
  }
  require_layer(data, model.layer_structural, "structural map");
  if (model.relational) require_layer(data, *model.layer_relational, "relational map");
  if (model.depth) require_layer(data, *model.layer_depth, "depth map");

  ParseOutcome outcome;
  std::ostringstream text;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& gold = data.sentence(i);
    const Eigen::MatrixXd distances = distance_matrix(model.structural, data.inputs(i, model.layer_structural));
    PredictedSentence out{gold.sentence_id, gold.words, {}};
    switch (options.decoder) {
      case DecoderKind::kDepProbe:
        out.tree = depprobe_decode(distances, relation_prob_matrix(*model.relational, data.inputs(i, *model.layer_relational)));
        break;
      case DecoderKind::kMst: {
        std::size_t root = 0;
        if (model.relational) {
          root = argmax_root_probability(relation_prob_matrix(*model.relational, data.inputs(i, *model.layer_relational)));
        } else if (model.depth) {
          root = argmin_depth(depth_scores(*model.depth, data.inputs(i, *model.layer_depth)));
        }
        out.tree = orient_tree(gold.size(), undirected_mst(distances), root);
        out.tree.directed = false;
        out.tree.labeled = false;
        break;
      }
      case DecoderKind::kDirProbe: {
        auto result = dirprobe_decode(distances, depth_scores(*model.depth, data.inputs(i, *model.layer_depth)), options.gate);
        outcome.relaxed_words += result.relaxed_words;
        out.tree = std::move(result.tree);
        break;
      }
    }
    out.tree.validate();
    write_predictions(text, out);
    outcome.sentences.push_back(std::move(out));
  }

  manifest.config(json{{"decoder", decoder_name(options.decoder)},
                       {"gate", options.gate == DepthGate::kForbidHeadDeeper ? "forbid-head-deeper" : "forbid-head-shallower"}});
  outcome.predictions_path = manifest.output("predictions/" + decoder_name(options.decoder) + ".conllu", text.str());
  json report{{"decoder", decoder_name(options.decoder)},
              {"sentences", outcome.sentences.size()},
              {"relaxed_words", outcome.relaxed_words}};
  manifest.output("reports/parse.json", report.dump(2) + "\n");
  manifest.write();
  return outcome;
}

EvalReport cmd_eval(const EvalOptions& options) {
  Manifest manifest("eval", options.out_dir);
  std::ifstream in(options.predictions);
  if (!in) throw IoError("cannot open " + options.predictions);
  const auto predicted = read_predictions(in);
  manifest.input(options.predictions);
  const auto gold = read_gold(options.gold);
  manifest.input(options.gold);

  if (predicted.size() != gold.size()) {
    throw AlignmentError("predictions have " + std::to_string(predicted.size()) + " sentences, gold has " +
                             std::to_string(gold.size()),
                         std::min(predicted.size(), gold.size()));
  }
  std::vector<PredictedTree> trees;
  trees.reserve(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].words != gold[i].words) throw AlignmentError("word forms differ between prediction and gold", i);
    trees.push_back(predicted[i].tree);
  }
  const auto report = score(trees, gold);
  manifest.output("reports/eval.json", eval_report_json(report));
  manifest.output("reports/eval.tsv", eval_report_tsv(report));
  manifest.write();
  return report;
}

TransferOutcome cmd_transfer(const TransferOptions& options) {
  Manifest manifest("transfer", options.out_dir);
  const auto parser = read_score_matrix_file(options.parser_scores);
  manifest.input(options.parser_scores);
  const auto probe_raw = read_score_matrix_file(options.probe_scores);
  manifest.input(options.probe_scores);

  const auto sources = unique_labels(parser.sources, "parser scores");
  const auto targets = unique_labels(parser.targets, "parser scores");
  check_languages(sources, unique_labels(probe_raw.sources, "probe scores"), "probe score sources");
  check_languages(targets, unique_labels(probe_raw.targets, "probe score targets"), "probe score targets");

  ScoreMatrix probe;
  probe.metric = probe_raw.metric;
  probe.sources = parser.sources;
  probe.targets = parser.targets;
  probe.values.resize(parser.values.rows(), parser.values.cols());
  for (std::size_t s = 0; s < parser.sources.size(); ++s)
    for (std::size_t t = 0; t < parser.targets.size(); ++t)
      probe.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = probe_raw.at(parser.sources[s], parser.targets[t]);

  TransferOutcome outcome;
  outcome.probe = transfer_correlation(parser, probe, options.include_diagonal);

  std::set<std::string> languages = sources;
  languages.insert(targets.begin(), targets.end());

  if (!options.checkpoints.empty()) {
    std::set<std::string> given;
    for (const auto& [lang, path] : options.checkpoints) given.insert(lang);
    check_languages(languages, given, "probe checkpoints");
    std::map<std::string, ProbeModel> models;
    for (const auto& [lang, path] : options.checkpoints) {
      models.emplace(lang, load_checkpoint(path));
      manifest.input(path);
    }
    for (const auto which : {ProbeMap::kStructural, ProbeMap::kRelational, ProbeMap::kDepth}) {
      const bool present = std::all_of(models.begin(), models.end(), [&](const auto& entry) {
        const auto& m = entry.second;
        return which == ProbeMap::kStructural || (which == ProbeMap::kRelational ? m.relational.has_value() : m.depth.has_value());
      });
      if (present) outcome.ssa.emplace(map_name(which), ssa_correlation(parser, models, which));
    }
  }

  if (!options.lang2vec.empty()) {
    const auto table = read_lang2vec_file(options.lang2vec);
    manifest.input(options.lang2vec);
    std::set<std::string> known;
    for (const auto& [lang, values] : table.languages) known.insert(lang);
    check_languages(languages, known, "lang2vec table", true);
    ScoreMatrix similarity;
    similarity.metric = "lang2vec";
    similarity.sources = parser.sources;
    similarity.targets = parser.targets;
    similarity.values = Eigen::MatrixXd::Zero(parser.values.rows(), parser.values.cols());
    try {
      for (std::size_t s = 0; s < parser.sources.size(); ++s)
        for (std::size_t t = 0; t < parser.targets.size(); ++t)
          similarity.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) =
              lang2vec_similarity(table, parser.sources[s], parser.targets[t]);
      outcome.lang2vec = transfer_correlation(parser, similarity, false);
    } catch (const DegenerateError&) {
      outcome.lang2vec_degenerate = true;
    }
  }

  std::vector<std::pair<std::string, std::optional<Correlation>>> named;
  named.emplace_back("probe", outcome.probe.pearson);
  for (const auto& [name, ssa] : outcome.ssa) named.emplace_back("ssa_" + name, ssa.pearson);
  if (!options.lang2vec.empty()) {
    named.emplace_back("lang2vec", outcome.lang2vec ? std::optional<Correlation>(outcome.lang2vec->pearson) : std::nullopt);
  }
  for (std::size_t a = 0; a < named.size(); ++a) {
    for (std::size_t b = a + 1; b < named.size(); ++b) {
      NamedZTest entry{named[a].first, named[b].first, std::nullopt};
      if (named[a].second && named[b].second) {
        try {
          entry.test = correlation_z_test(named[a].second->rho, named[a].second->n, named[b].second->rho, named[b].second->n);
        } catch (const DegenerateError&) {
        }
      }
      outcome.z_tests.push_back(std::move(entry));
    }
  }

  json ssa = json::object();
  for (const auto& [name, s] : outcome.ssa) {
    ssa[name] = json{{"pearson", s.pearson ? correlation_json(*s.pearson) : json(nullptr)},
                     {"tau_w", optional_json(s.tau_w)},
                     {"degenerate", s.degenerate},
                     {"pairs", s.pairs}};
  }
  json z_tests = json::array();
  for (const auto& z : outcome.z_tests) {
    z_tests.push_back(json{{"first", z.first},
                           {"second", z.second},
                           {"z", z.test ? json(z.test->z) : json(nullptr)},
                           {"p_value", z.test ? json(z.test->p_value) : json(nullptr)}});
  }
  json doc{{"include_diagonal", options.include_diagonal},
           {"probe", transfer_json(outcome.probe)},
           {"ssa", ssa},
           {"lang2vec", outcome.lang2vec ? transfer_json(*outcome.lang2vec) : json(nullptr)},
           {"lang2vec_degenerate", outcome.lang2vec_degenerate},
           {"z_tests", z_tests},
           {"z_test_note", "independent-samples Fisher approximation; the correlations share data"}};
  manifest.config(json{{"include_diagonal", options.include_diagonal}});
  manifest.output("reports/transfer.json", doc.dump(2) + "\n");

  std::ostringstream best;
  best << "target\tparser_best\tprobe_best\thit";
  if (outcome.lang2vec) best << "\tlang2vec_best";
  best << '\n';
  for (std::size_t t = 0; t < parser.targets.size(); ++t) {
    best << parser.targets[t] << '\t' << outcome.probe.parser_best[t] << '\t' << outcome.probe.probe_best[t] << '\t'
         << (outcome.probe.parser_best[t] == outcome.probe.probe_best[t] ? 1 : 0);
    if (outcome.lang2vec) best << '\t' << outcome.lang2vec->probe_best[t];
    best << '\n';
  }
  best << "hit_rate\t\t\t" << outcome.probe.hit_rate << '\n';
  manifest.output("reports/best_source.tsv", best.str());
  manifest.write();
  return outcome;
}

std::string expand_layer_pattern(const std::string& pattern, std::uint32_t layer) {
  static const std::string kPlaceholder = "{layer}";
  if (pattern.find(kPlaceholder) == std::string::npos) throw ArgumentError("pattern '" + pattern + "' has no {layer} placeholder");
  std::string out = pattern;
  const auto value = std::to_string(layer);
  for (auto pos = out.find(kPlaceholder); pos != std::string::npos; pos = out.find(kPlaceholder, pos + value.size())) {
    out.replace(pos, kPlaceholder.size(), value);
  }
  return out;
}

LayerScanResult cmd_layer_scan(const LayerScanOptions& options) {
  if (options.layers.empty()) throw ArgumentError("layer-scan: no layers given");
  options.config.validate();
  Manifest manifest("layer-scan", options.out_dir);
  const auto train = read_gold(options.train_conllu);
  const auto dev = read_gold(options.dev_conllu);
  manifest.input(options.train_conllu);
  manifest.input(options.dev_conllu);
  std::vector<std::string> train_files;
  std::vector<std::string> dev_files;
  for (const auto layer : options.layers) {
    train_files.push_back(expand_layer_pattern(options.train_pattern, layer));
    dev_files.push_back(expand_layer_pattern(options.dev_pattern, layer));
  }
  ProbeDims dims;
  dims.structural = options.dim_b;
  const auto result = layer_scan_files(train, dev, train_files, dev_files, options.config, dims);
  for (std::size_t k = 0; k < options.layers.size(); ++k) {
    if (result.records[k].layer != options.layers[k]) {
      throw ArgumentError(train_files[k] + " holds layer " + std::to_string(result.records[k].layer) + ", expected " +
                          std::to_string(options.layers[k]));
    }
  }
  for (std::size_t k = 0; k < train_files.size(); ++k) {
    manifest.input(train_files[k]);
    manifest.input(dev_files[k]);
  }
  manifest.config(json{{"layers", options.layers}, {"dim_b", options.dim_b}, {"train", config_json(options.config)}});
  manifest.seeds({options.config.seed});
  manifest.output("reports/layer_scan.tsv", layer_scan_tsv(result));
  manifest.write();
  return result;
}

void cmd_synth(const SynthOptions& options) {
  options.config.validate();
  if (options.layers.empty()) throw ArgumentError("synth: no layers given");
  if (std::find(options.layers.begin(), options.layers.end(), options.signal_layer) == options.layers.end()) {
    throw ArgumentError("synth: signal layer " + std::to_string(options.signal_layer) + " is not among the layers");
  }
  Manifest manifest("synth", options.out_dir);
  const auto corpus = synthetic_trees(options.config);
  const auto signal = synthetic_embeddings(corpus, options.config);
  const std::size_t dim = synthetic_dim(options.config);

  const std::size_t n = corpus.size();
  const std::size_t train_end = n * 8 / 10;
  const std::size_t dev_end = n * 9 / 10;
  const std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> splits{
      {"train", {0, train_end}}, {"dev", {train_end, dev_end}}, {"test", {dev_end, n}}};

  for (const auto layer : options.layers) {
    const auto embeddings = layer == options.signal_layer
                                ? signal
                                : noise_embeddings(corpus, dim, 1.0, 1.0, options.config.seed * 1000003ULL + layer);
    for (const auto& [name, range] : splits) {
      std::vector<EmbeddingMatrix> part(embeddings.begin() + static_cast<std::ptrdiff_t>(range.first),
                                        embeddings.begin() + static_cast<std::ptrdiff_t>(range.second));
      for (std::size_t k = 0; k < part.size(); ++k) part[k].sentence_index = static_cast<std::uint32_t>(k);
      const auto rel = name + ".layer" + std::to_string(layer) + ".dpe";
      write_embeddings(part, layer, (fs::path(options.out_dir) / rel).string());
      manifest.output(rel, read_file((fs::path(options.out_dir) / rel).string()));
    }
  }
  for (const auto& [name, range] : splits) {
    std::ostringstream text;
    write_conllu(text, std::vector<GoldSentence>(corpus.begin() + static_cast<std::ptrdiff_t>(range.first),
                                                 corpus.begin() + static_cast<std::ptrdiff_t>(range.second)));
    manifest.output(name + ".conllu", text.str());
  }
  const auto& c = options.config;
  manifest.config(json{{"sentences", c.sentences},
                       {"min_words", c.min_words},
                       {"max_words", c.max_words},
                       {"noise_dims", c.noise_dims},
                       {"noise_scale", c.noise_scale},
                       {"path_scale", c.path_scale},
                       {"relation_scale", c.relation_scale},
                       {"mixing_spread", c.mixing_spread},
                       {"majority_rate", c.majority_rate},
                       {"majority_label", std::string(RelationVocab::label(c.majority_label))},
                       {"layers", options.layers},
                       {"signal_layer", options.signal_layer},
                       {"dim", dim}});
  manifest.seeds({c.seed});
  manifest.write();
}

}  // namespace depprobe
