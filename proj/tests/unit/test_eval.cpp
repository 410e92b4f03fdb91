#include <random>

#include <gtest/gtest.h>

#include "depprobe/errors.hpp"
#include "depprobe/eval.hpp"
#include "support/datasets.hpp"
#include "support/oracles.hpp"

using namespace depprobe;

namespace {

std::size_t rel(std::string_view label) { return RelationVocab::index_of(label); }

PredictedTree tree_from(const std::vector<std::size_t>& heads, const std::vector<std::size_t>& rels = {}) {
  PredictedTree t;
  t.n = heads.size();
  t.labeled = !rels.empty();
  for (std::size_t i = 0; i < heads.size(); ++i) {
    if (heads[i] == kRootHead) {
      t.root = i;
      continue;
    }
    t.edges.push_back(TreeEdge{heads[i], i, rels.empty() ? std::nullopt : std::optional<std::size_t>(rels[i])});
  }
  t.validate();
  return t;
}

PredictedTree copy_gold(const GoldSentence& g) {
  std::vector<std::size_t> rels = g.gold_rel;
  for (auto& r : rels)
    if (r == kRefRelation) r = rel("dep");
  return tree_from(g.gold_head, rels);
}

}  // namespace

TEST(Score, PerfectPredictionScoresOne) {
  std::mt19937_64 rng(41);
  std::vector<GoldSentence> gold;
  std::vector<PredictedTree> pred;
  for (int s = 0; s < 10; ++s) {
    gold.push_back(testdata::random_sentence(std::uniform_int_distribution<std::size_t>(1, 9)(rng), rng));
    pred.push_back(copy_gold(gold.back()));
  }
  const auto r = score(pred, gold);
  EXPECT_EQ(r.uas, 1.0);
  EXPECT_EQ(*r.las, 1.0);
  EXPECT_EQ(*r.rel_acc, 1.0);
  EXPECT_EQ(r.uuas.value_or(1.0), 1.0);
  EXPECT_EQ(r.offsets.ratio(OffsetHistogram::bucket_of(0)), r.offsets.total == 0 ? 0.0 : 1.0);
  for (const auto& [name, tally] : r.groups->by_relation) EXPECT_EQ(tally.accuracy(), 1.0) << name;
}

TEST(Score, HandCountedThreeWordSentence) {
  const auto g = GoldSentence::build("s", {"a", "b", "c"}, {kRootHead, 0, 0}, {rel("root"), rel("nsubj"), rel("obj")});
  const auto p = tree_from({kRootHead, 0, 1}, {rel("root"), rel("nsubj"), rel("obj")});
  const auto r = score({p}, {g});
  EXPECT_DOUBLE_EQ(r.uas, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.las, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.rel_acc, 1.0);
  EXPECT_DOUBLE_EQ(*r.uuas, 0.5);
  EXPECT_EQ(r.tokens, 3u);
  EXPECT_EQ(r.gold_edges, 2u);
}

TEST(Score, UnlabeledPredictionsLeaveLabelMetricsAbsent) {
  const auto g = GoldSentence::build("s", {"a", "b"}, {1, kRootHead}, {rel("nsubj"), rel("root")});
  const auto r = score({tree_from({1, kRootHead})}, {g});
  EXPECT_EQ(r.uas, 1.0);
  EXPECT_FALSE(r.las.has_value());
  EXPECT_FALSE(r.rel_acc.has_value());
  EXPECT_FALSE(r.groups.has_value());
  EXPECT_NE(eval_report_tsv(r).find("metric\tlas\tNA"), std::string::npos);
  EXPECT_THROW(group_relation_accuracy({tree_from({1, kRootHead})}, {g}), ContractError);
}

TEST(Score, MisalignedInputIsRejected) {
  const auto g = GoldSentence::build("s", {"a", "b"}, {1, kRootHead}, {rel("nsubj"), rel("root")});
  EXPECT_THROW(score({}, {g}), ArgumentError);
  EXPECT_THROW(score({tree_from({kRootHead})}, {g}), ArgumentError);
  EXPECT_THROW(head_offsets({tree_from({kRootHead})}, {g}), ArgumentError);
}

TEST(Score, SingleWordSentencesReduceToRootIdentification) {
  const auto g = GoldSentence::build("s", {"a"}, {kRootHead}, {rel("root")});
  const auto r = score({tree_from({kRootHead}, {rel("root")})}, {g});
  EXPECT_EQ(r.uas, 1.0);
  EXPECT_EQ(*r.las, 1.0);
  EXPECT_FALSE(r.uuas.has_value());
}

TEST(Score, RefWordsAreNeverCorrect) {
  const auto g = GoldSentence::build("s", {"a", "who"}, {kRootHead, 0}, {rel("root"), kRefRelation});
  const auto r = score({tree_from({kRootHead, 0}, {rel("root"), rel("dep")})}, {g});
  EXPECT_EQ(r.ref_tokens, 1u);
  EXPECT_DOUBLE_EQ(*r.rel_acc, 0.5);
  EXPECT_DOUBLE_EQ(*r.las, 0.5);
  EXPECT_EQ(r.groups->by_relation.at("ref").correct, 0u);
}

TEST(Score, MatchesPerTokenCountingOracle) {
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
        rels.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          rels[i] = std::bernoulli_distribution(0.5)(rng) ? gold.back().gold_rel[i] : donor.gold_rel[i];
          if (rels[i] == RelationVocab::root_index()) rels[i] = rel("dep");
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (heads[i] == oracle::kNoHead) {
          heads[i] = kRootHead;
          if (labeled) rels[i] = RelationVocab::root_index();
        }
      }
      pred.push_back(tree_from(heads, rels));
      oracle::count_sentence(c, gold.back().gold_head, gold.back().gold_rel, heads, rels);
    }
    const auto r = score(pred, gold);
    EXPECT_EQ(r.tokens, c.tokens);
    EXPECT_EQ(r.uas, static_cast<double>(c.head) / static_cast<double>(c.tokens));
    if (c.gold_edges > 0) {
      ASSERT_TRUE(r.uuas.has_value());
      EXPECT_EQ(*r.uuas, static_cast<double>(c.edges_found) / static_cast<double>(c.gold_edges));
    }
    if (labeled) {
      EXPECT_EQ(*r.las, static_cast<double>(c.both) / static_cast<double>(c.tokens));
      EXPECT_EQ(*r.rel_acc, static_cast<double>(c.label) / static_cast<double>(c.tokens));
      EXPECT_LE(*r.las, std::min(r.uas, *r.rel_acc));
    }
    double sum = 0.0;
    for (std::size_t b = 0; b < OffsetHistogram::kBuckets; ++b) sum += r.offsets.ratio(b);
    if (r.offsets.total > 0) {
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }

    std::vector<std::size_t> order = testdata::iota(0, gold.size());
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<GoldSentence> gold2;
    std::vector<PredictedTree> pred2;
    for (auto k : order) {
      gold2.push_back(gold[k]);
      pred2.push_back(pred[k]);
    }
    EXPECT_EQ(eval_report_json(score(pred2, gold2)), eval_report_json(r));
  }
}

TEST(HeadOffsets, BucketLabels) {
  EXPECT_EQ(OffsetHistogram::bucket_label(OffsetHistogram::bucket_of(-9)), "<-5");
  EXPECT_EQ(OffsetHistogram::bucket_label(OffsetHistogram::bucket_of(-5)), "-5");
  EXPECT_EQ(OffsetHistogram::bucket_label(OffsetHistogram::bucket_of(0)), "0");
  EXPECT_EQ(OffsetHistogram::bucket_label(OffsetHistogram::bucket_of(5)), "5");
  EXPECT_EQ(OffsetHistogram::bucket_label(OffsetHistogram::bucket_of(6)), ">5");
}

TEST(HeadOffsets, PredictedSevenGoldOneIsOverFive) {
  std::vector<std::size_t> gold_heads(8, 0), pred_heads(8, 0);
  gold_heads[0] = pred_heads[0] = kRootHead;
  gold_heads[2] = 1;
  pred_heads[2] = 7;
  const auto g = GoldSentence::build("s", std::vector<std::string>(8, "w"), gold_heads,
                                     std::vector<std::size_t>{rel("root"), rel("dep"), rel("dep"), rel("dep"), rel("dep"), rel("dep"), rel("dep"), rel("dep")});
  const auto h = head_offsets({tree_from(pred_heads)}, {g});
  EXPECT_EQ(h.total, 7u);
  EXPECT_EQ(h.counts[OffsetHistogram::bucket_of(6)], 1u);
  EXPECT_EQ(h.counts[OffsetHistogram::bucket_of(0)], 6u);
}

TEST(HeadOffsets, HandTalliedTenWordCorpus) {
  std::vector<std::size_t> gold_heads(10), pred_heads(10, 0);
  for (std::size_t i = 0; i < 10; ++i) gold_heads[i] = i == 0 ? kRootHead : i - 1;
  pred_heads[0] = kRootHead;
  std::vector<std::size_t> rels(10, rel("dep"));
  rels[0] = rel("root");
  const auto g = GoldSentence::build("chain", std::vector<std::string>(10, "w"), gold_heads, rels);
  const auto h = head_offsets({tree_from(pred_heads)}, {g});
  EXPECT_EQ(h.total, 9u);
  EXPECT_EQ(h.counts[OffsetHistogram::bucket_of(0)], 1u);
  for (int off = -5; off <= -1; ++off) EXPECT_EQ(h.counts[OffsetHistogram::bucket_of(off)], 1u) << off;
  EXPECT_EQ(h.counts[OffsetHistogram::bucket_of(-6)], 3u);
  EXPECT_DOUBLE_EQ(h.ratio(OffsetHistogram::bucket_of(-6)), 3.0 / 9.0);
}

TEST(GroupAccuracy, AllPunctPredictions) {
  const auto g = GoldSentence::build("s", {"a", ",", ".", "b", "c"}, {kRootHead, 0, 0, 0, 0},
                                     {rel("root"), rel("punct"), rel("punct"), rel("nsubj"), rel("nsubj")});
  const auto p = tree_from({3, 3, 3, kRootHead, 3}, {rel("punct"), rel("punct"), rel("punct"), rel("root"), rel("punct")});
  const auto acc = group_relation_accuracy({p}, {g});
  EXPECT_EQ(acc.by_relation.at("punct").accuracy(), 1.0);
  EXPECT_EQ(acc.by_relation.at("nsubj").accuracy(), 0.0);
  EXPECT_EQ(acc.by_relation.at("root").accuracy(), 0.0);
  EXPECT_EQ(acc.by_relation.count("obj"), 0u);
  EXPECT_DOUBLE_EQ(acc.by_group.at("other").accuracy(), 2.0 / 3.0);
  EXPECT_EQ(acc.by_group.at("nominal").accuracy(), 0.0);
  EXPECT_EQ(acc.by_group.count("clause"), 0u);
}

TEST(GroupAccuracy, HandTalliedMixedCorpus) {
  const auto g = GoldSentence::build("s", {"the", "dog", "saw", "a", "cat", "."}, {1, 2, kRootHead, 4, 2, 2},
                                     {rel("det"), rel("nsubj"), rel("root"), rel("det"), rel("obj"), rel("punct")});
  const auto p = tree_from({1, 2, kRootHead, 4, 2, 2}, {rel("det"), rel("obj"), rel("root"), rel("amod"), rel("obj"), rel("punct")});
  const auto acc = group_relation_accuracy({p}, {g});
  EXPECT_DOUBLE_EQ(acc.by_relation.at("det").accuracy(), 0.5);
  EXPECT_DOUBLE_EQ(acc.by_relation.at("nsubj").accuracy(), 0.0);
  EXPECT_DOUBLE_EQ(acc.by_relation.at("obj").accuracy(), 1.0);
  EXPECT_DOUBLE_EQ(acc.by_group.at("function").accuracy(), 0.5);
  EXPECT_DOUBLE_EQ(acc.by_group.at("nominal").accuracy(), 0.5);
  EXPECT_DOUBLE_EQ(acc.by_group.at("other").accuracy(), 1.0);
}

TEST(EdgeLengthStats, Chain) {
  std::vector<std::size_t> heads(6), rels(6, rel("dep"));
  for (std::size_t i = 0; i < 6; ++i) heads[i] = i == 0 ? kRootHead : i - 1;
  rels[0] = rel("root");
  const auto stats = edge_length_stats({GoldSentence::build("c", std::vector<std::string>(6, "w"), heads, rels)});
  EXPECT_EQ(stats.median, 1.0);
  EXPECT_EQ(stats.mean, 1.0);
  EXPECT_EQ(stats.stddev, 0.0);
  EXPECT_EQ(stats.fraction_over_10, 0.0);
  EXPECT_EQ(stats.edges, 5u);
}

TEST(EdgeLengthStats, OneLongEdge) {
  std::vector<std::size_t> heads(13), rels(13, rel("dep"));
  for (std::size_t i = 0; i < 12; ++i) heads[i] = i == 0 ? kRootHead : i - 1;
  heads[12] = 0;
  rels[0] = rel("root");
  const auto stats = edge_length_stats({GoldSentence::build("l", std::vector<std::string>(13, "w"), heads, rels)});
  // eleven edges of length 1 and one of length 12
  const double mean = 23.0 / 12.0;
  const double var = (11.0 * (1.0 - mean) * (1.0 - mean) + (12.0 - mean) * (12.0 - mean)) / 12.0;
  EXPECT_EQ(stats.median, 1.0);
  EXPECT_NEAR(stats.mean, mean, 1e-12);
  EXPECT_NEAR(stats.stddev, std::sqrt(var), 1e-12);
  EXPECT_NEAR(stats.fraction_over_10, 1.0 / 12.0, 1e-12);
}
