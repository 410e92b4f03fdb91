#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depprobe/decode.hpp"
#include "depprobe/treebank.hpp"

namespace depprobe {

/// Head-offset histogram over buckets "<-5", -5 .. 5, ">5".
struct OffsetHistogram {
  static constexpr std::size_t kBuckets = 13;
  std::array<std::size_t, kBuckets> counts{};
  std::size_t total = 0;

  static std::string bucket_label(std::size_t bucket);
  static std::size_t bucket_of(long long offset);
  double ratio(std::size_t bucket) const {
    return total == 0 ? 0.0 : static_cast<double>(counts[bucket]) / static_cast<double>(total);
  }
};

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// Relation accuracy keyed by gold relation label, micro-averaged per
/// taxonomy group. Relations and groups absent from gold are absent here.
struct GroupAccuracy {
  std::map<std::string, Tally> by_relation;
  std::map<std::string, Tally> by_group;
};

struct EvalReport {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t gold_edges = 0;
  std::size_t ref_tokens = 0;  // gold "ref" words, never predictable by the probe
  double uas = 0.0;
  std::optional<double> las;      // absent for unlabeled predictions
  std::optional<double> rel_acc;  // absent for unlabeled predictions
  std::optional<double> uuas;     // absent when the corpus has no gold edges
  OffsetHistogram offsets;
  std::optional<GroupAccuracy> groups;
};

/// Micro-averaged attachment scores over all words, punctuation included.
/// The root word's head is correct iff the predicted root matches the gold root.
EvalReport score(const std::vector<PredictedTree>& pred, const std::vector<GoldSentence>& gold);

/// Offsets predicted head - gold head over gold non-root words; a root head
/// sits at virtual position -1.
OffsetHistogram head_offsets(const std::vector<PredictedTree>& pred, const std::vector<GoldSentence>& gold);

/// Throws ContractError on unlabeled predictions.
GroupAccuracy group_relation_accuracy(const std::vector<PredictedTree>& pred, const std::vector<GoldSentence>& gold);

struct EdgeLengthStats {
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double fraction_over_10 = 0.0;
  std::size_t edges = 0;
};

/// Statistics of |head - child| over all non-root words.
EdgeLengthStats edge_length_stats(const std::vector<GoldSentence>& gold);

std::string eval_report_json(const EvalReport& report);
/// One row per metric, per relation, per group, per offset bucket.
std::string eval_report_tsv(const EvalReport& report);

}  // namespace depprobe
