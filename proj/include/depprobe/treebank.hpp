#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace depprobe {

/// Head value carried by the root word. Never a valid word index.
inline constexpr std::size_t kRootHead = std::numeric_limits<std::size_t>::max();

/// Number of universal relations the probe predicts.
inline constexpr std::size_t kNumRelations = 37;

/// Internal index of the legacy "ref" label. Accepted on input and used for
/// evaluation grouping only; the probe never predicts it.
inline constexpr std::size_t kRefRelation = kNumRelations;

/// The fixed, alphabetically ordered set of 37 UD v2 universal relations.
class RelationVocab {
 public:
  static const std::array<std::string_view, kNumRelations>& labels();
  static std::size_t root_index();
  /// Index for a label with its subtype already stripped; "ref" maps to
  /// kRefRelation. Throws VocabError for anything else.
  static std::size_t index_of(std::string_view label);
  static std::optional<std::size_t> find(std::string_view label);
  /// Accepts indices in [0, kNumRelations]; the last one is "ref".
  static std::string_view label(std::size_t index);
  /// "nmod:poss" -> "nmod".
  static std::string_view universal_part(std::string_view label);
};

enum class TaxonomyGroup { kNominal, kClause, kModifier, kFunction, kCoord, kMulti, kLoose, kSpecial, kOther };

inline constexpr std::array<TaxonomyGroup, 9> kAllTaxonomyGroups = {
    TaxonomyGroup::kNominal, TaxonomyGroup::kClause, TaxonomyGroup::kModifier,
    TaxonomyGroup::kFunction, TaxonomyGroup::kCoord, TaxonomyGroup::kMulti,
    TaxonomyGroup::kLoose, TaxonomyGroup::kSpecial, TaxonomyGroup::kOther};

/// UD taxonomy grouping over the 37 relations plus "ref".
class TaxonomyGroups {
 public:
  static TaxonomyGroup group_of(std::size_t relation);
  static std::string_view name(TaxonomyGroup group);
};

/// Tree geometry derived from a head vector.
struct TreeGeometry {
  Eigen::MatrixXi distance;  // n x n edge counts
  std::vector<int> depth;    // edges from the root
};

/// BFS-based depth and pairwise undirected distances. Throws StructureError
/// unless `heads` encodes exactly one root and a single connected tree.
TreeGeometry compute_tree_geometry(const std::vector<std::size_t>& heads);

struct GoldSentence {
  std::string sentence_id;
  std::vector<std::string> words;
  std::vector<std::size_t> gold_head;  // kRootHead for the root word
  std::vector<std::size_t> gold_rel;   // indices into RelationVocab (or kRefRelation)
  Eigen::MatrixXi tree_dist;
  std::vector<int> depth;

  std::size_t size() const { return words.size(); }
  std::size_t root() const;

  /// Validates the invariants and fills tree_dist/depth.
  static GoldSentence build(std::string sentence_id, std::vector<std::string> words,
                            std::vector<std::size_t> heads, std::vector<std::size_t> rels);
};

/// One token line of a CoNLL-U sentence, after dropping range and empty-node
/// lines. Columns other than FORM/HEAD/DEPREL are not retained.
struct ConlluRow {
  std::size_t id = 0;  // 1-based
  std::string form;
  std::string head;    // raw HEAD column
  std::string deprel;  // raw DEPREL column
  std::size_t line = 0;
};

struct ConlluBlock {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<ConlluRow> rows;
  std::size_t first_line = 0;

  /// Value of a "# key = value" comment, if present.
  std::optional<std::string> comment_value(std::string_view key) const;
};

/// Splits a CoNLL-U stream into sentence blocks. Throws ParseError on lines
/// with the wrong column count or unparsable/non-consecutive IDs.
std::vector<ConlluBlock> read_conllu_blocks(std::istream& in);

/// Parses gold treebank text. Sentence ids come from "# sent_id = ..." when
/// present, otherwise the 1-based ordinal of the sentence.
std::vector<GoldSentence> parse_conllu(std::istream& in);
std::vector<GoldSentence> read_conllu_file(const std::string& path);

void write_conllu(std::ostream& out, const GoldSentence& sentence);
void write_conllu(std::ostream& out, const std::vector<GoldSentence>& corpus);

}  // namespace depprobe
