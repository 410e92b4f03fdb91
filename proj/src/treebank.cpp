#include "depprobe/treebank.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <sstream>

#include "depprobe/errors.hpp"

namespace depprobe {

namespace {

constexpr std::array<std::string_view, kNumRelations> kLabels = {
    "acl",       "advcl",      "advmod", "amod",     "appos",    "aux",    "case",  "cc",
    "ccomp",     "clf",        "compound", "conj",   "cop",      "csubj",  "dep",   "det",
    "discourse", "dislocated", "expl",   "fixed",    "flat",     "goeswith", "iobj", "list",
    "mark",      "nmod",       "nsubj",  "nummod",   "obj",      "obl",    "orphan", "parataxis",
    "punct",     "reparandum", "root",   "vocative", "xcomp"};

constexpr std::size_t kRootIndex = 34;
static_assert(kLabels[kRootIndex] == "root");

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::optional<std::size_t> parse_index(std::string_view text) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
  return value;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

}  // namespace

const std::array<std::string_view, kNumRelations>& RelationVocab::labels() { return kLabels; }

std::size_t RelationVocab::root_index() { return kRootIndex; }

std::optional<std::size_t> RelationVocab::find(std::string_view label) {
  const auto it = std::lower_bound(kLabels.begin(), kLabels.end(), label);
  if (it != kLabels.end() && *it == label) return static_cast<std::size_t>(it - kLabels.begin());
  if (label == "ref") return kRefRelation;
  return std::nullopt;
}

std::size_t RelationVocab::index_of(std::string_view label) {
  if (auto index = find(label)) return *index;
  throw VocabError("relation '" + std::string(label) + "' is not a universal UD relation");
}

std::string_view RelationVocab::label(std::size_t index) {
  if (index == kRefRelation) return "ref";
  if (index > kRefRelation) throw ArgumentError("relation index out of range: " + std::to_string(index));
  return kLabels[index];
}

std::string_view RelationVocab::universal_part(std::string_view label) {
  return label.substr(0, label.find(':'));
}

TaxonomyGroup TaxonomyGroups::group_of(std::size_t relation) {
  const std::string_view label = RelationVocab::label(relation);
  struct Entry {
    std::string_view label;
    TaxonomyGroup group;
  };
  static constexpr Entry kTable[] = {
      {"appos", TaxonomyGroup::kNominal},    {"dislocated", TaxonomyGroup::kNominal},
      {"expl", TaxonomyGroup::kNominal},     {"iobj", TaxonomyGroup::kNominal},
      {"nmod", TaxonomyGroup::kNominal},     {"nsubj", TaxonomyGroup::kNominal},
      {"nummod", TaxonomyGroup::kNominal},   {"obj", TaxonomyGroup::kNominal},
      {"obl", TaxonomyGroup::kNominal},      {"vocative", TaxonomyGroup::kNominal},
      {"acl", TaxonomyGroup::kClause},       {"advcl", TaxonomyGroup::kClause},
      {"ccomp", TaxonomyGroup::kClause},     {"csubj", TaxonomyGroup::kClause},
      {"xcomp", TaxonomyGroup::kClause},     {"advmod", TaxonomyGroup::kModifier},
      {"amod", TaxonomyGroup::kModifier},    {"discourse", TaxonomyGroup::kModifier},
      {"aux", TaxonomyGroup::kFunction},     {"case", TaxonomyGroup::kFunction},
      {"clf", TaxonomyGroup::kFunction},     {"cop", TaxonomyGroup::kFunction},
      {"det", TaxonomyGroup::kFunction},     {"mark", TaxonomyGroup::kFunction},
      {"cc", TaxonomyGroup::kCoord},         {"conj", TaxonomyGroup::kCoord},
      {"compound", TaxonomyGroup::kMulti},   {"fixed", TaxonomyGroup::kMulti},
      {"flat", TaxonomyGroup::kMulti},       {"list", TaxonomyGroup::kLoose},
      {"parataxis", TaxonomyGroup::kLoose},  {"goeswith", TaxonomyGroup::kSpecial},
      {"orphan", TaxonomyGroup::kSpecial},   {"reparandum", TaxonomyGroup::kSpecial},
      {"dep", TaxonomyGroup::kOther},        {"punct", TaxonomyGroup::kOther},
      {"ref", TaxonomyGroup::kOther},        {"root", TaxonomyGroup::kOther},
  };
  for (const auto& entry : kTable) {
    if (entry.label == label) return entry.group;
  }
  throw ArgumentError("no taxonomy group for relation " + std::string(label));
}

std::string_view TaxonomyGroups::name(TaxonomyGroup group) {
  switch (group) {
    case TaxonomyGroup::kNominal: return "nominal";
    case TaxonomyGroup::kClause: return "clause";
    case TaxonomyGroup::kModifier: return "modifier";
    case TaxonomyGroup::kFunction: return "function";
    case TaxonomyGroup::kCoord: return "coord";
    case TaxonomyGroup::kMulti: return "multi";
    case TaxonomyGroup::kLoose: return "loose";
    case TaxonomyGroup::kSpecial: return "special";
    case TaxonomyGroup::kOther: return "other";
  }
  return "other";
}

TreeGeometry compute_tree_geometry(const std::vector<std::size_t>& heads) {
  const std::size_t n = heads.size();
  if (n == 0) throw StructureError("empty tree");

  std::vector<std::vector<std::size_t>> children(n);
  std::optional<std::size_t> root;
  for (std::size_t i = 0; i < n; ++i) {
    if (heads[i] == kRootHead) {
      if (root) throw StructureError("more than one root (words " + std::to_string(*root) + " and " + std::to_string(i) + ")");
      root = i;
    } else if (heads[i] >= n) {
      throw StructureError("head of word " + std::to_string(i) + " is out of range");
    } else if (heads[i] == i) {
      throw StructureError("word " + std::to_string(i) + " is its own head");
    } else {
      children[heads[i]].push_back(i);
    }
  }
  if (!root) throw StructureError("no root word");

  TreeGeometry geometry;
  geometry.depth.assign(n, -1);
  std::deque<std::size_t> queue{*root};
  geometry.depth[*root] = 0;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const auto node = queue.front();
    queue.pop_front();
    for (const auto child : children[node]) {
      geometry.depth[child] = geometry.depth[node] + 1;
      ++reached;
      queue.push_back(child);
    }
  }
  if (reached != n) throw StructureError("heads contain a cycle or a detached fragment");

  // Undirected BFS from every word.
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (heads[i] == kRootHead) continue;
    adjacency[i].push_back(heads[i]);
    adjacency[heads[i]].push_back(i);
  }
  geometry.distance = Eigen::MatrixXi::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), -1);
  for (std::size_t source = 0; source < n; ++source) {
    auto row = geometry.distance.row(static_cast<Eigen::Index>(source));
    row(static_cast<Eigen::Index>(source)) = 0;
    queue.assign(1, source);
    while (!queue.empty()) {
      const auto node = queue.front();
      queue.pop_front();
      for (const auto next : adjacency[node]) {
        if (row(static_cast<Eigen::Index>(next)) >= 0) continue;
        row(static_cast<Eigen::Index>(next)) = row(static_cast<Eigen::Index>(node)) + 1;
        queue.push_back(next);
      }
    }
  }
  return geometry;
}

std::size_t GoldSentence::root() const {
  const auto it = std::find(gold_head.begin(), gold_head.end(), kRootHead);
  return static_cast<std::size_t>(it - gold_head.begin());
}

GoldSentence GoldSentence::build(std::string sentence_id, std::vector<std::string> words,
                                 std::vector<std::size_t> heads, std::vector<std::size_t> rels) {
  if (words.empty()) throw StructureError("sentence " + sentence_id + " has no words");
  if (heads.size() != words.size() || rels.size() != words.size()) {
    throw ArgumentError("sentence " + sentence_id + ": words/heads/relations differ in length");
  }
  TreeGeometry geometry;
  try {
    geometry = compute_tree_geometry(heads);
  } catch (const StructureError& e) {
    throw StructureError("sentence " + sentence_id + ": " + e.what());
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    const bool is_root = heads[i] == kRootHead;
    const bool root_label = rels[i] == RelationVocab::root_index();
    if (rels[i] > kRefRelation) throw VocabError("sentence " + sentence_id + ": relation index out of range");
    if (is_root != root_label) {
      throw StructureError("sentence " + sentence_id + ": word " + std::to_string(i + 1) +
                           (is_root ? " is the root but is not labeled 'root'" : " is labeled 'root' but has a head"));
    }
  }
  GoldSentence sentence;
  sentence.sentence_id = std::move(sentence_id);
  sentence.words = std::move(words);
  sentence.gold_head = std::move(heads);
  sentence.gold_rel = std::move(rels);
  sentence.tree_dist = std::move(geometry.distance);
  sentence.depth = std::move(geometry.depth);
  return sentence;
}

std::optional<std::string> ConlluBlock::comment_value(std::string_view key) const {
  for (const auto& comment : comments) {
    const auto eq = comment.find('=');
    if (eq == std::string::npos) continue;
    if (trim(std::string_view(comment).substr(0, eq)) == key) return trim(std::string_view(comment).substr(eq + 1));
  }
  return std::nullopt;
}

std::vector<ConlluBlock> read_conllu_blocks(std::istream& in) {
  std::vector<ConlluBlock> blocks;
  ConlluBlock current;
  bool open = false;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (open && !current.rows.empty()) blocks.push_back(std::move(current));
    current = ConlluBlock{};
    open = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (!open) {
      open = true;
      current.first_line = line_no;
    }
    if (line.front() == '#') {
      current.comments.push_back(line.substr(1));
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, found " + std::to_string(fields.size()), line_no);
    }
    const std::string& id = fields[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;  // range / empty node
    const auto index = parse_index(id);
    if (!index || *index == 0) throw ParseError("invalid token ID '" + id + "'", line_no);
    if (*index != current.rows.size() + 1) {
      throw ParseError("token ID " + id + " is out of sequence (expected " + std::to_string(current.rows.size() + 1) + ")",
                       line_no);
    }
    current.rows.push_back(ConlluRow{*index, fields[1], fields[6], fields[7], line_no});
  }
  flush();
  return blocks;
}

std::vector<GoldSentence> parse_conllu(std::istream& in) {
  std::vector<GoldSentence> corpus;
  const auto blocks = read_conllu_blocks(in);
  corpus.reserve(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    std::string id = block.comment_value("sent_id").value_or(std::to_string(b + 1));
    std::vector<std::string> words;
    std::vector<std::size_t> heads;
    std::vector<std::size_t> rels;
    for (const auto& row : block.rows) {
      const auto head = parse_index(row.head);
      if (!head) throw ParseError("invalid HEAD '" + row.head + "'", row.line);
      if (*head > block.rows.size()) throw StructureError("sentence " + id + ": HEAD " + row.head + " points past the sentence");
      const auto rel = RelationVocab::find(RelationVocab::universal_part(row.deprel));
      if (!rel) {
        throw VocabError("line " + std::to_string(row.line) + ": relation '" + row.deprel + "' is not a universal UD relation");
      }
      words.push_back(row.form);
      heads.push_back(*head == 0 ? kRootHead : *head - 1);
      rels.push_back(*rel);
    }
    corpus.push_back(GoldSentence::build(std::move(id), std::move(words), std::move(heads), std::move(rels)));
  }
  return corpus;
}

std::vector<GoldSentence> read_conllu_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_conllu(in);
}

void write_conllu(std::ostream& out, const GoldSentence& sentence) {
  out << "# sent_id = " << sentence.sentence_id << '\n';
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const auto head = sentence.gold_head[i] == kRootHead ? 0 : sentence.gold_head[i] + 1;
    out << (i + 1) << '\t' << sentence.words[i] << "\t_\t_\t_\t_\t" << head << '\t'
        << RelationVocab::label(sentence.gold_rel[i]) << "\t_\t_\n";
  }
  out << '\n';
}

void write_conllu(std::ostream& out, const std::vector<GoldSentence>& corpus) {
  for (const auto& sentence : corpus) write_conllu(out, sentence);
}

}  // namespace depprobe
