// Runs each primary acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>

#include "depprobe/commands.hpp"
#include "depprobe/digest.hpp"
#include "depprobe/errors.hpp"
#include "support/datasets.hpp"
#include "support/oracles.hpp"

using namespace depprobe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void require(Outcome& o, bool condition, const std::string& what) {
  if (!condition && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

std::string str(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "depprobe_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- criteria -------------------------------------------------------------

Outcome parameter_accounting() {
  Outcome o;
  const auto dep = parameter_count(ProbeKind::kDepProbe, ProbeDims{768, 128, 128, 37});
  const auto dir = parameter_count(ProbeKind::kDirProbe, ProbeDims{768, 128, 128, 37});
  require(o, dep == 126720, "depprobe count " + std::to_string(dep));
  require(o, dir == 196608, "dirprobe count " + std::to_string(dir));
  if (o.pass) o.detail = "126720 / 196608";
  return o;
}

double batch_loss(const ProbeModel& m, const AlignedDataset& data, const std::vector<std::size_t>& batch, const LossWeights& w) {
  double total = 0.0;
  for (auto i : batch) total += combined_loss(m, sentence_losses(m, data, i), w);
  return total / static_cast<double>(batch.size());
}

Outcome gradient_suite() {
  Outcome o;
  const LossWeights weights{1.0, 1.0, 1.0};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const auto data = testdata::random_dataset(4, 6, 5, {6, 7}, rng);
    const auto batch = testdata::iota(0, data.size());
    for (auto kind : {ProbeKind::kDepProbe, ProbeKind::kDirProbe}) {
      const auto model = ProbeModel::initialize(kind, ProbeDims{5, 3, 2, kNumRelations}, seed, 6, 7);
      const auto grad = gradients(model, data, batch, weights);
      auto check = [&](const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& at, const std::function<void(ProbeModel&, const Eigen::MatrixXd&)>& set,
                       const std::string& name) {
        const auto numeric = oracle::numeric_gradient(
            [&](const Eigen::MatrixXd& m) {
              ProbeModel copy = model;
              set(copy, m);
              return batch_loss(copy, data, batch, weights);
            },
            at);
        const double mismatch = oracle::gradient_mismatch(analytic, numeric);
        worst = std::max(worst, mismatch);
        require(o, mismatch <= 1.0, name + " gradient off on seed " + std::to_string(seed));
      };
      check(grad.structural, model.structural, [](ProbeModel& p, const Eigen::MatrixXd& m) { p.structural = m; }, "structural");
      if (model.relational) check(*grad.relational, *model.relational, [](ProbeModel& p, const Eigen::MatrixXd& m) { p.relational = m; }, "relational");
      if (model.depth) check(*grad.depth, *model.depth, [](ProbeModel& p, const Eigen::MatrixXd& m) { p.depth = m; }, "depth");
    }
  }
  if (o.pass) o.detail = "20 instances, worst scaled mismatch " + str(worst);
  return o;
}

Outcome decoder_oracles() {
  Outcome o;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 7)(rng);
    const auto d = oracle::random_symmetric(n, rng);
    double weight = 0.0;
    for (const auto& [a, b] : undirected_mst(d)) weight += d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    require(o, std::abs(weight - oracle::brute_force_mst_weight(d)) <= 1e-9, "mst trial " + std::to_string(trial));
  }
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    const auto d = oracle::random_symmetric(n, rng);
    Eigen::VectorXd depth(static_cast<Eigen::Index>(n));
    for (auto& v : depth) v = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    std::size_t root = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (depth(static_cast<Eigen::Index>(i)) < depth(static_cast<Eigen::Index>(root))) root = i;
    const auto best = oracle::brute_force_arborescence(
        n, root, [&](std::size_t h, std::size_t c) { return depth(static_cast<Eigen::Index>(h)) <= depth(static_cast<Eigen::Index>(c)); },
        [&](std::size_t h, std::size_t c) { return -d(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(c)); });
    const auto heads = dirprobe_decode(d, depth).tree.heads();
    double weight = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      if (heads[v] != kRootHead) weight -= d(static_cast<Eigen::Index>(heads[v]), static_cast<Eigen::Index>(v));
    require(o, best.has_value() && std::abs(weight - *best) <= 1e-9, "dirprobe trial " + std::to_string(trial));
  }
  const std::size_t root_label = RelationVocab::root_index();
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    Eigen::MatrixXd d = oracle::random_symmetric(n, rng);
    if (trial % 5 == 0) d = d.array().round();
    const auto p = oracle::random_probs(n, kNumRelations, rng);
    const auto tree = depprobe_decode(d, p);
    const auto expected = oracle::resimulate_greedy(d, p, root_label);
    bool same = tree.root == expected.root;
    const auto heads = tree.heads();
    const auto rels = *tree.relations();
    for (std::size_t i = 0; i < n; ++i) {
      same = same && (heads[i] == kRootHead ? oracle::kNoHead : heads[i]) == expected.head[i];
      same = same && rels[i] == expected.label[i];
    }
    require(o, same, "depprobe trial " + std::to_string(trial));
  }
  if (o.pass) o.detail = "200 mst, 200 arborescence, 500 greedy";
  return o;
}

Outcome synthetic_recoverability() {
  Outcome o;
  SyntheticConfig synth;
  synth.sentences = 500;
  synth.seed = 1;
  const auto split = testdata::synthetic_split(synth, 400, 50);
  const auto model = ProbeModel::initialize(ProbeKind::kDepProbe, ProbeDims{split.train.dim(), 128, 128, kNumRelations}, 42, 0, 0);
  const TrainConfig config;
  const auto [trained, report] = fit(model, split.train, split.dev, config);

  std::vector<PredictedTree> pred;
  std::vector<GoldSentence> gold;
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    const auto& h = split.test.inputs(i, 0);
    pred.push_back(depprobe_decode(distance_matrix(trained.structural, h), relation_prob_matrix(*trained.relational, h)));
    gold.push_back(split.test.sentence(i));
  }
  const auto r = score(pred, gold);
  const double uuas = r.uuas.value_or(0.0), rel = r.rel_acc.value_or(0.0), las = r.las.value_or(0.0);
  require(o, static_cast<int>(report.epochs.size()) <= 30, "trained " + std::to_string(report.epochs.size()) + " epochs");
  require(o, uuas >= 0.99, "UUAS " + str(uuas));
  require(o, rel >= 0.99, "RelAcc " + str(rel));
  require(o, las >= 0.95, "LAS " + str(las));
  o.detail = "test UUAS " + str(uuas) + ", RelAcc " + str(rel) + ", LAS " + str(las) + ", epochs " + std::to_string(report.epochs.size()) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome metric_oracle() {
  Outcome o;
  std::mt19937_64 rng(42);
  for (int corpus = 0; corpus < 200; ++corpus) {
    std::vector<GoldSentence> gold;
    std::vector<PredictedTree> pred;
    oracle::Counts c;
    const bool labeled = corpus % 4 != 0;
    const int count = std::uniform_int_distribution<int>(1, 8)(rng);
    for (int s = 0; s < count; ++s) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 9)(rng);
      gold.push_back(testdata::random_sentence(n, rng));
      auto heads = oracle::random_heads(n, rng);
      std::vector<std::size_t> rels;
      if (labeled) {
        const auto donor = testdata::random_sentence(n, rng);
        for (std::size_t i = 0; i < n; ++i) {
          rels.push_back(std::bernoulli_distribution(0.5)(rng) ? gold.back().gold_rel[i] : donor.gold_rel[i]);
          if (rels[i] == RelationVocab::root_index()) rels[i] = RelationVocab::index_of("dep");
        }
      }
      PredictedTree t;
      t.n = n;
      t.labeled = labeled;
      for (std::size_t i = 0; i < n; ++i) {
        if (heads[i] == oracle::kNoHead) {
          heads[i] = kRootHead;
          t.root = i;
          if (labeled) rels[i] = RelationVocab::root_index();
        } else {
          t.edges.push_back(TreeEdge{heads[i], i, labeled ? std::optional<std::size_t>(rels[i]) : std::nullopt});
        }
      }
      pred.push_back(std::move(t));
      oracle::count_sentence(c, gold.back().gold_head, gold.back().gold_rel, heads, rels);
    }
    const auto r = score(pred, gold);
    const auto tokens = static_cast<double>(c.tokens);
    const std::string where = "corpus " + std::to_string(corpus);
    require(o, r.tokens == c.tokens && r.uas == static_cast<double>(c.head) / tokens, where + " UAS");
    if (c.gold_edges > 0) require(o, r.uuas == static_cast<double>(c.edges_found) / static_cast<double>(c.gold_edges), where + " UUAS");
    if (labeled) {
      require(o, r.las == static_cast<double>(c.both) / tokens, where + " LAS");
      require(o, r.rel_acc == static_cast<double>(c.label) / tokens, where + " RelAcc");
      require(o, *r.las <= std::min(r.uas, *r.rel_acc), where + " LAS bound");
    } else {
      require(o, !r.las && !r.rel_acc, where + " unlabeled metrics present");
    }
  }
  if (o.pass) o.detail = "200 corpora";
  return o;
}

Outcome tau_w_oracle() {
  Outcome o;
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    std::vector<double> g(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (trial % 2 == 0) {
        g[i] = std::uniform_int_distribution<int>(0, 3)(rng);
        p[i] = std::uniform_int_distribution<int>(0, 3)(rng);
      } else {
        g[i] = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        p[i] = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      }
    }
    if (std::all_of(g.begin(), g.end(), [&](double v) { return v == g[0]; })) g[0] += 1.0;
    if (std::all_of(p.begin(), p.end(), [&](double v) { return v == p[0]; })) p[0] += 1.0;
    require(o, weighted_kendall(g, p) == oracle::weighted_kendall(g, p), "trial " + std::to_string(trial));
  }
  std::vector<double> up{0.1, 0.5, 0.2, 0.9, 0.7}, down;
  for (double v : up) down.push_back(-v);
  require(o, weighted_kendall(up, up) == 1.0, "identical ranking");
  require(o, weighted_kendall(up, down) == -1.0, "reversed ranking");
  if (o.pass) o.detail = "500 inputs, exact";
  return o;
}

Eigen::MatrixXd invertible(Eigen::Index k, std::mt19937_64& rng) {
  Eigen::MatrixXd r = oracle::random_matrix(k, k, rng);
  r.diagonal().array() += 3.0 * static_cast<double>(k);
  return r;
}

Outcome ssa_properties() {
  Outcome o;
  constexpr double tol = 1e-6;
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index k = std::uniform_int_distribution<Eigen::Index>(1, 4)(rng);
    const Eigen::Index m = std::uniform_int_distribution<Eigen::Index>(1, 4)(rng);
    const Eigen::MatrixXd a = oracle::random_matrix(12, k, rng), b = oracle::random_matrix(12, m, rng);
    const double ab = subspace_angle(a, b);
    const std::string where = "trial " + std::to_string(trial);
    require(o, std::abs(subspace_angle(a, a)) <= tol, where + " self angle");
    require(o, std::abs(ab - subspace_angle(b, a)) <= tol, where + " symmetry");
    require(o, std::abs(subspace_angle(a, a * invertible(k, rng))) <= tol, where + " column space");
    require(o, std::abs(subspace_angle(a * invertible(k, rng), b) - ab) <= tol, where + " invariance in A");
    require(o, std::abs(subspace_angle(a, b * invertible(m, rng)) - ab) <= tol, where + " invariance in B");

    const Eigen::Index split = std::uniform_int_distribution<Eigen::Index>(1, 6)(rng);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(12, 12);
    const Eigen::MatrixXd x = eye.leftCols(split) * invertible(split, rng);
    const Eigen::MatrixXd y = eye.middleCols(split, split) * invertible(split, rng);
    require(o, std::abs(subspace_angle(x, y) - 90.0) <= tol, where + " orthogonal axes");
  }
  if (o.pass) o.detail = "20 trials within 1e-6 degrees";
  return o;
}

void write_matrix(const fs::path& path, const Eigen::MatrixXd& values) {
  const std::vector<std::string> langs{"ar", "en", "fi", "ja", "zh"};
  ScoreMatrix m{"LAS", langs, langs, values};
  std::ofstream(path) << score_matrix_tsv(m);
}

Outcome transfer_smoke() {
  Outcome o;
  const auto dir = scratch("transfer");
  std::mt19937_64 rng(10);
  Eigen::MatrixXd parser(5, 5);
  for (auto& v : parser.reshaped()) v = std::uniform_real_distribution<double>(0.2, 0.9)(rng);
  write_matrix(dir / "parser.tsv", parser);
  write_matrix(dir / "same.tsv", parser);
  TransferOptions options;
  options.parser_scores = (dir / "parser.tsv").string();
  options.probe_scores = (dir / "same.tsv").string();
  options.out_dir = (dir / "identity").string();
  const auto same = cmd_transfer(options);
  require(o, std::abs(same.probe.pearson.rho - 1.0) <= 1e-12, "identity rho " + str(same.probe.pearson.rho));
  require(o, same.probe.tau_w == 1.0, "identity tau_w " + str(same.probe.tau_w));
  require(o, same.probe.hit_rate == 1.0, "identity hit rate " + str(same.probe.hit_rate));

  double rho = 1.0;
  int attempts = 0;
  while (attempts < 3 && std::abs(rho) >= 0.5) {
    ++attempts;
    Eigen::MatrixXd shuffled = parser;
    std::shuffle(shuffled.reshaped().begin(), shuffled.reshaped().end(), rng);
    write_matrix(dir / "shuffled.tsv", shuffled);
    options.probe_scores = (dir / "shuffled.tsv").string();
    options.out_dir = (dir / ("shuffled" + std::to_string(attempts))).string();
    rho = cmd_transfer(options).probe.pearson.rho;
  }
  require(o, std::abs(rho) < 0.5, "shuffled |rho| " + str(std::abs(rho)) + " after 3 attempts");
  if (o.pass) o.detail = "identity rho 1, tau_w 1, hit 1; shuffled rho " + str(rho) + " after " + std::to_string(attempts) + " attempt(s)";
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto dir = scratch("determinism");
  SynthOptions synth;
  synth.out_dir = (dir / "data").string();
  cmd_synth(synth);

  std::vector<std::string> bytes[2];
  for (int run = 0; run < 2; ++run) {
    TrainOptions options;
    options.train_conllu = (dir / "data" / "train.conllu").string();
    options.train_embeddings = {(dir / "data" / "train.layer0.dpe").string()};
    options.dev_conllu = (dir / "data" / "dev.conllu").string();
    options.dev_embeddings = {(dir / "data" / "dev.layer0.dpe").string()};
    options.layer_b = options.layer_l = 0;
    options.seeds = {42};
    options.out_dir = (dir / ("run" + std::to_string(run))).string();
    const auto outcome = cmd_train(options);
    bytes[run].push_back(slurp(outcome.checkpoints.at(0)));
    bytes[run].push_back(slurp((fs::path(options.out_dir) / "reports" / "train.seed42.json").string()));
  }
  require(o, !bytes[0][0].empty() && bytes[0][0] == bytes[1][0], "checkpoints differ");
  require(o, !bytes[0][1].empty() && bytes[0][1] == bytes[1][1], "reports differ");
  if (o.pass) o.detail = "checkpoint sha256 " + sha256_hex(bytes[0][0]).substr(0, 16);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"parameter accounting", parameter_accounting},
      {"gradient suite", gradient_suite},
      {"decoder oracles", decoder_oracles},
      {"synthetic recoverability", synthetic_recoverability},
      {"metric oracle", metric_oracle},
      {"weighted kendall oracle", tau_w_oracle},
      {"subspace angle properties", ssa_properties},
      {"transfer pipeline smoke", transfer_smoke},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << o.detail << ", " << str(seconds) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
