#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depprobe/commands.hpp"
#include "depprobe/errors.hpp"

using namespace depprobe;

namespace {

void add_train_config(CLI::App* cmd, TrainConfig& config) {
  cmd->add_option("--lr", config.learning_rate, "initial learning rate")->capture_default_str();
  cmd->add_option("--plateau-factor", config.plateau_factor, "learning-rate decay on plateau")->capture_default_str();
  cmd->add_option("--plateau-threshold", config.plateau_threshold, "minimum dev-loss improvement")->capture_default_str();
  cmd->add_option("--patience", config.early_stop_patience, "epochs without improvement before stopping")->capture_default_str();
  cmd->add_option("--max-epochs", config.max_epochs)->capture_default_str();
  cmd->add_option("--batch-size", config.batch_size)->capture_default_str();
  cmd->add_option("--weight-decay", config.weight_decay)->capture_default_str();
  cmd->add_option("--weight-structural", config.weights.structural)->capture_default_str();
  cmd->add_option("--weight-relational", config.weights.relational)->capture_default_str();
  cmd->add_option("--weight-depth", config.weights.depth)->capture_default_str();
}

std::vector<std::uint32_t> parse_layers(const std::string& spec) {
  std::vector<std::uint32_t> layers;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        layers.push_back(static_cast<std::uint32_t>(std::stoul(item)));
      } else {
        const auto lo = std::stoul(item.substr(0, dash));
        const auto hi = std::stoul(item.substr(dash + 1));
        if (lo > hi) throw std::invalid_argument(item);
        for (auto l = lo; l <= hi; ++l) layers.push_back(static_cast<std::uint32_t>(l));
      }
    } catch (const std::exception&) {
      throw ArgumentError("bad layer list '" + spec + "'");
    }
  }
  return layers;
}

std::map<std::string, std::string> parse_checkpoints(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ArgumentError("expected LANG=PATH, got '" + item + "'");
    if (!out.emplace(item.substr(0, eq), item.substr(eq + 1)).second) throw ArgumentError("checkpoint given twice for " + item.substr(0, eq));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dependency probing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  TrainOptions train;
  std::string train_kind = "depprobe";
  std::vector<std::uint64_t> seeds;
  std::uint64_t seed = 42;
  auto* train_cmd = app.add_subcommand("train", "train probes on aligned CoNLL-U and embeddings");
  train_cmd->add_option("--train-conllu", train.train_conllu)->required();
  train_cmd->add_option("--train-emb", train.train_embeddings, "one DPE1 file per layer")->required();
  train_cmd->add_option("--dev-conllu", train.dev_conllu);
  train_cmd->add_option("--dev-emb", train.dev_embeddings);
  train_cmd->add_option("--out", train.out_dir)->required();
  train_cmd->add_option("--probe", train_kind)->check(CLI::IsMember({"depprobe", "dirprobe"}))->capture_default_str();
  train_cmd->add_option("--dim-b", train.dim_b)->capture_default_str();
  train_cmd->add_option("--dim-c", train.dim_c)->capture_default_str();
  train_cmd->add_option("--layer-b", train.layer_b)->capture_default_str();
  train_cmd->add_option("--layer-l", train.layer_l)->capture_default_str();
  train_cmd->add_option("--layer-c", train.layer_c)->capture_default_str();
  auto* seed_opt = train_cmd->add_option("--seed", seed)->capture_default_str();
  train_cmd->add_option("--seeds", seeds, "comma-separated seeds")->delimiter(',')->excludes(seed_opt);
  add_train_config(train_cmd, train.config);

  ParseOptions parse;
  std::string decoder = "depprobe";
  std::string gate = "forbid-head-deeper";
  auto* parse_cmd = app.add_subcommand("parse", "decode trees with a trained probe");
  parse_cmd->add_option("--checkpoint", parse.checkpoint)->required();
  parse_cmd->add_option("--conllu", parse.conllu)->required();
  parse_cmd->add_option("--emb", parse.embeddings)->required();
  parse_cmd->add_option("--decoder", decoder)->check(CLI::IsMember({"depprobe", "mst", "dirprobe"}))->capture_default_str();
  parse_cmd->add_option("--gate", gate)->check(CLI::IsMember({"forbid-head-deeper", "forbid-head-shallower"}))->capture_default_str();
  parse_cmd->add_option("--out", parse.out_dir)->required();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold");
  eval_cmd->add_option("--pred", eval.predictions)->required();
  eval_cmd->add_option("--gold", eval.gold)->required();
  eval_cmd->add_option("--out", eval.out_dir)->required();

  TransferOptions transfer;
  std::vector<std::string> checkpoints;
  bool exclude_diagonal = false;
  auto* transfer_cmd = app.add_subcommand("transfer", "correlate probe-based predictors with parser transfer scores");
  transfer_cmd->add_option("--parser-scores", transfer.parser_scores)->required();
  transfer_cmd->add_option("--probe-scores", transfer.probe_scores)->required();
  transfer_cmd->add_option("--checkpoint", checkpoints, "LANG=PATH, repeatable");
  transfer_cmd->add_option("--lang2vec", transfer.lang2vec);
  transfer_cmd->add_flag("--exclude-diagonal", exclude_diagonal, "drop in-language cells from probe correlations");
  transfer_cmd->add_option("--out", transfer.out_dir)->required();

  LayerScanOptions scan;
  std::string scan_layers = "0-12";
  auto* scan_cmd = app.add_subcommand("layer-scan", "train one probe per encoder layer");
  scan_cmd->add_option("--train-conllu", scan.train_conllu)->required();
  scan_cmd->add_option("--dev-conllu", scan.dev_conllu)->required();
  scan_cmd->add_option("--train-pattern", scan.train_pattern, "path with {layer}")->required();
  scan_cmd->add_option("--dev-pattern", scan.dev_pattern, "path with {layer}")->required();
  scan_cmd->add_option("--layers", scan_layers, "e.g. 0-12 or 0,6,7")->capture_default_str();
  scan_cmd->add_option("--dim-b", scan.dim_b)->capture_default_str();
  scan_cmd->add_option("--seed", scan.config.seed)->capture_default_str();
  scan_cmd->add_option("--out", scan.out_dir)->required();
  add_train_config(scan_cmd, scan.config);

  SynthOptions synth;
  std::string synth_layers = "0";
  std::string majority_label = "nmod";
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic treebank with embeddings");
  synth_cmd->add_option("--sentences", synth.config.sentences)->capture_default_str();
  synth_cmd->add_option("--min-words", synth.config.min_words)->capture_default_str();
  synth_cmd->add_option("--max-words", synth.config.max_words)->capture_default_str();
  synth_cmd->add_option("--noise-dims", synth.config.noise_dims)->capture_default_str();
  synth_cmd->add_option("--majority-rate", synth.config.majority_rate)->capture_default_str();
  synth_cmd->add_option("--majority-label", majority_label)->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed)->capture_default_str();
  synth_cmd->add_option("--layers", synth_layers)->capture_default_str();
  synth_cmd->add_option("--signal-layer", synth.signal_layer)->capture_default_str();
  synth_cmd->add_option("--out", synth.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_codes::kOk : exit_codes::kUsage;
  }

  try {
    if (*train_cmd) {
      train.kind = train_kind == "depprobe" ? ProbeKind::kDepProbe : ProbeKind::kDirProbe;
      train.seeds = seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
      const auto outcome = cmd_train(train);
      for (std::size_t k = 0; k < outcome.reports.size(); ++k) {
        const auto& r = outcome.reports[k];
        std::cout << "seed " << r.seed << ": best epoch " << r.best_epoch << ", dev loss " << r.best_dev_loss << ", dev UUAS "
                  << r.dev_uuas;
        if (r.dev_rel_acc) std::cout << ", dev RelAcc " << *r.dev_rel_acc;
        std::cout << " -> " << outcome.checkpoints[k] << '\n';
      }
    } else if (*parse_cmd) {
      parse.decoder = decoder == "depprobe" ? DecoderKind::kDepProbe : decoder == "mst" ? DecoderKind::kMst : DecoderKind::kDirProbe;
      parse.gate = gate == "forbid-head-deeper" ? DepthGate::kForbidHeadDeeper : DepthGate::kForbidHeadShallower;
      const auto outcome = cmd_parse(parse);
      std::cout << outcome.sentences.size() << " sentences -> " << outcome.predictions_path << '\n';
      if (parse.decoder == DecoderKind::kDirProbe) std::cout << "relaxed words: " << outcome.relaxed_words << '\n';
    } else if (*eval_cmd) {
      const auto report = cmd_eval(eval);
      std::cout << "UAS " << report.uas;
      if (report.las) std::cout << "  LAS " << *report.las;
      if (report.rel_acc) std::cout << "  RelAcc " << *report.rel_acc;
      if (report.uuas) std::cout << "  UUAS " << *report.uuas;
      std::cout << '\n';
    } else if (*transfer_cmd) {
      transfer.checkpoints = parse_checkpoints(checkpoints);
      transfer.include_diagonal = !exclude_diagonal;
      const auto outcome = cmd_transfer(transfer);
      std::cout << "rho " << outcome.probe.pearson.rho << " (p " << outcome.probe.pearson.p_value << ")  tau_w " << outcome.probe.tau_w
                << "  hit-rate " << outcome.probe.hit_rate << '\n';
    } else if (*scan_cmd) {
      scan.layers = parse_layers(scan_layers);
      const auto result = cmd_layer_scan(scan);
      std::cout << layer_scan_tsv(result) << "best structural layer " << result.best_structural_layer << ", best relational layer "
                << result.best_relational_layer << '\n';
    } else if (*synth_cmd) {
      synth.layers = parse_layers(synth_layers);
      const auto label = RelationVocab::find(majority_label);
      if (!label) throw ArgumentError("unknown relation '" + majority_label + "'");
      synth.config.majority_label = *label;
      cmd_synth(synth);
      std::cout << "wrote " << synth.config.sentences << " sentences to " << synth.out_dir << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return exit_codes::kInternal;
  }
  return exit_codes::kOk;
}
