#include "depprobe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "depprobe/errors.hpp"

namespace depprobe {

namespace {

void check_aligned(const std::vector<PredictedTree>& pred, const std::vector<GoldSentence>& gold) {
  if (pred.size() != gold.size()) {
    throw ArgumentError("predictions have " + std::to_string(pred.size()) + " sentences, gold has " + std::to_string(gold.size()));
  }
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].n != gold[s].size()) {
      throw ArgumentError("sentence " + std::to_string(s) + ": prediction has " + std::to_string(pred[s].n) +
                          " words, gold has " + std::to_string(gold[s].size()));
    }
  }
}

long long position(std::size_t head) { return head == kRootHead ? -1 : static_cast<long long>(head); }

}  // namespace

std::string OffsetHistogram::bucket_label(std::size_t bucket) {
  if (bucket == 0) return "<-5";
  if (bucket == kBuckets - 1) return ">5";
  return std::to_string(static_cast<int>(bucket) - 6);
}

std::size_t OffsetHistogram::bucket_of(long long offset) {
  if (offset < -5) return 0;
  if (offset > 5) return kBuckets - 1;
  return static_cast<std::size_t>(offset + 6);
}

OffsetHistogram head_offsets(const std::vector<PredictedTree>& pred, const std::vector<GoldSentence>& gold) {
  check_aligned(pred, gold);
  OffsetHistogram histogram;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const auto heads = pred[s].heads();
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      if (gold[s].gold_head[i] == kRootHead) continue;
      ++histogram.counts[OffsetHistogram::bucket_of(position(heads[i]) - position(gold[s].gold_head[i]))];
      ++histogram.total;
    }
  }
  return histogram;
}

GroupAccuracy group_relation_accuracy(const std::vector<PredictedTree>& pred, const std::vector<GoldSentence>& gold) {
  check_aligned(pred, gold);
  GroupAccuracy result;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const auto relations = pred[s].relations();
    if (!relations) throw ContractError("relation accuracy requires labeled predictions");
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      const auto gold_rel = gold[s].gold_rel[i];
      const bool correct = (*relations)[i] == gold_rel;
      auto& rel = result.by_relation[std::string(RelationVocab::label(gold_rel))];
      auto& group = result.by_group[std::string(TaxonomyGroups::name(TaxonomyGroups::group_of(gold_rel)))];
      rel.total += 1;
      group.total += 1;
      rel.correct += correct ? 1 : 0;
      group.correct += correct ? 1 : 0;
    }
  }
  return result;
}

EvalReport score(const std::vector<PredictedTree>& pred, const std::vector<GoldSentence>& gold) {
  check_aligned(pred, gold);
  const bool labeled = std::all_of(pred.begin(), pred.end(), [](const PredictedTree& t) { return t.labeled; });

  EvalReport report;
  report.sentences = pred.size();
  std::size_t head_ok = 0;
  std::size_t label_ok = 0;
  std::size_t both_ok = 0;
  std::size_t edges_found = 0;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    const auto& g = gold[s];
    const auto heads = pred[s].heads();
    const auto relations = pred[s].relations();
    for (std::size_t i = 0; i < g.size(); ++i) {
      ++report.tokens;
      if (g.gold_rel[i] == kRefRelation) ++report.ref_tokens;
      const bool head_correct = heads[i] == g.gold_head[i];
      const bool label_correct = relations && (*relations)[i] == g.gold_rel[i];
      head_ok += head_correct ? 1 : 0;
      label_ok += label_correct ? 1 : 0;
      both_ok += head_correct && label_correct ? 1 : 0;
    }
    const auto predicted_edges = pred[s].undirected_edges();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.gold_head[i] == kRootHead) continue;
      ++report.gold_edges;
      const std::pair<std::size_t, std::size_t> edge{std::min(i, g.gold_head[i]), std::max(i, g.gold_head[i])};
      if (std::binary_search(predicted_edges.begin(), predicted_edges.end(), edge)) ++edges_found;
    }
  }
  const auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  report.uas = ratio(head_ok, report.tokens);
  if (labeled) {
    report.las = ratio(both_ok, report.tokens);
    report.rel_acc = ratio(label_ok, report.tokens);
    report.groups = group_relation_accuracy(pred, gold);
  }
  if (report.gold_edges > 0) report.uuas = ratio(edges_found, report.gold_edges);
  report.offsets = head_offsets(pred, gold);
  return report;
}

EdgeLengthStats edge_length_stats(const std::vector<GoldSentence>& gold) {
  std::vector<double> lengths;
  for (const auto& sentence : gold) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (sentence.gold_head[i] == kRootHead) continue;
      const auto head = sentence.gold_head[i];
      lengths.push_back(static_cast<double>(head > i ? head - i : i - head));
    }
  }
  EdgeLengthStats stats;
  stats.edges = lengths.size();
  if (lengths.empty()) return stats;
  std::sort(lengths.begin(), lengths.end());
  const std::size_t m = lengths.size();
  stats.median = m % 2 == 1 ? lengths[m / 2] : 0.5 * (lengths[m / 2 - 1] + lengths[m / 2]);
  double sum = 0.0;
  std::size_t long_edges = 0;
  for (const auto l : lengths) {
    sum += l;
    long_edges += l > 10.0 ? 1 : 0;
  }
  stats.mean = sum / static_cast<double>(m);
  double squares = 0.0;
  for (const auto l : lengths) squares += (l - stats.mean) * (l - stats.mean);
  stats.stddev = std::sqrt(squares / static_cast<double>(m));
  stats.fraction_over_10 = static_cast<double>(long_edges) / static_cast<double>(m);
  return stats;
}

std::string eval_report_json(const EvalReport& report) {
  using nlohmann::json;
  const auto optional = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json doc;
  doc["sentences"] = report.sentences;
  doc["tokens"] = report.tokens;
  doc["gold_edges"] = report.gold_edges;
  doc["ref_tokens"] = report.ref_tokens;
  doc["uas"] = report.uas;
  doc["las"] = optional(report.las);
  doc["uuas"] = optional(report.uuas);
  doc["rel_acc"] = optional(report.rel_acc);
  json offsets = json::object();
  for (std::size_t b = 0; b < OffsetHistogram::kBuckets; ++b) offsets[OffsetHistogram::bucket_label(b)] = report.offsets.ratio(b);
  doc["offset_histogram"] = offsets;
  if (report.groups) {
    json groups = json::object();
    for (const auto& [name, tally] : report.groups->by_group) {
      groups[name] = {{"accuracy", tally.accuracy()}, {"count", tally.total}};
    }
    json relations = json::object();
    for (const auto& [name, tally] : report.groups->by_relation) {
      relations[name] = {{"accuracy", tally.accuracy()}, {"count", tally.total}};
    }
    doc["group_rel_acc"] = groups;
    doc["relation_acc"] = relations;
  } else {
    doc["group_rel_acc"] = nullptr;
    doc["relation_acc"] = nullptr;
  }
  if (report.ref_tokens > 0) doc["note"] = "gold 'ref' relations are outside the probe's label space and always count as wrong";
  return doc.dump(2) + "\n";
}

std::string eval_report_tsv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "section\tkey\tvalue\tcount\n";
  const auto metric = [&](const char* name, const std::optional<double>& v, std::size_t count) {
    out << "metric\t" << name << '\t';
    if (v) {
      out << *v;
    } else {
      out << "NA";
    }
    out << '\t' << count << '\n';
  };
  metric("uas", report.uas, report.tokens);
  metric("las", report.las, report.tokens);
  metric("uuas", report.uuas, report.gold_edges);
  metric("rel_acc", report.rel_acc, report.tokens);
  if (report.groups) {
    for (const auto& [name, tally] : report.groups->by_relation) out << "relation\t" << name << '\t' << tally.accuracy() << '\t' << tally.total << '\n';
    for (const auto& [name, tally] : report.groups->by_group) out << "group\t" << name << '\t' << tally.accuracy() << '\t' << tally.total << '\n';
  }
  for (std::size_t b = 0; b < OffsetHistogram::kBuckets; ++b) {
    out << "offset\t" << OffsetHistogram::bucket_label(b) << '\t' << report.offsets.ratio(b) << '\t' << report.offsets.counts[b] << '\n';
  }
  return out.str();
}

}  // namespace depprobe
