#include "depprobe/decode.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "depprobe/errors.hpp"

namespace depprobe {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void require_square(const Eigen::MatrixXd& distances, const char* what) {
  if (distances.rows() == 0) throw ArgumentError(std::string(what) + ": empty sentence");
  if (distances.rows() != distances.cols()) throw ArgumentError(std::string(what) + ": distance matrix is not square");
  if (!distances.allFinite()) throw ArgumentError(std::string(what) + ": distance matrix has non-finite entries");
}

}  // namespace

std::vector<std::size_t> PredictedTree::heads() const {
  std::vector<std::size_t> result(n, kRootHead);
  for (const auto& edge : edges) result.at(edge.child) = edge.head;
  return result;
}

std::optional<std::vector<std::size_t>> PredictedTree::relations() const {
  if (!labeled) return std::nullopt;
  std::vector<std::size_t> result(n, RelationVocab::root_index());
  for (const auto& edge : edges) result.at(edge.child) = edge.relation.value();
  return result;
}

std::vector<std::pair<std::size_t, std::size_t>> PredictedTree::undirected_edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> result;
  result.reserve(edges.size());
  for (const auto& edge : edges) result.emplace_back(std::min(edge.head, edge.child), std::max(edge.head, edge.child));
  std::sort(result.begin(), result.end());
  return result;
}

void PredictedTree::validate() const {
  if (n == 0) throw StructureError("tree has no words");
  if (root >= n) throw StructureError("root index out of range");
  if (edges.size() != n - 1) throw StructureError("tree has " + std::to_string(edges.size()) + " edges for " + std::to_string(n) + " words");
  std::vector<std::size_t> head(n, kNone);
  for (const auto& edge : edges) {
    if (edge.head >= n || edge.child >= n) throw StructureError("edge endpoint out of range");
    if (edge.child == root) throw StructureError("edge points into the root");
    if (edge.head == edge.child) throw StructureError("self edge");
    if (head[edge.child] != kNone) throw StructureError("word " + std::to_string(edge.child) + " has two heads");
    head[edge.child] = edge.head;
    if (labeled) {
      if (!edge.relation) throw StructureError("labeled tree has an unlabeled edge");
      if (*edge.relation == RelationVocab::root_index()) throw StructureError("non-root edge labeled 'root'");
      if (*edge.relation >= kNumRelations) throw StructureError("edge relation out of range");
    }
  }
  // Every word must reach the root by following heads.
  std::vector<int> state(n, 0);  // 0 unknown, 1 on current path, 2 reaches root
  state[root] = 2;
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<std::size_t> path;
    std::size_t v = start;
    while (state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = head[v];
      if (v == kNone) throw StructureError("word without a head");
    }
    if (state[v] == 1) throw StructureError("edges contain a cycle");
    for (const auto p : path) state[p] = 2;
  }
}

PredictedTree depprobe_decode(const Eigen::MatrixXd& distances, const Eigen::MatrixXd& rel_probs) {
  require_square(distances, "depprobe_decode");
  const auto n = static_cast<std::size_t>(distances.rows());
  if (static_cast<std::size_t>(rel_probs.rows()) != n || rel_probs.cols() != static_cast<Eigen::Index>(kNumRelations)) {
    throw ArgumentError("depprobe_decode: relation probabilities must be n x " + std::to_string(kNumRelations));
  }
  const auto root_label = static_cast<Eigen::Index>(RelationVocab::root_index());

  PredictedTree tree;
  tree.n = n;
  tree.labeled = true;
  tree.directed = true;
  for (std::size_t i = 1; i < n; ++i) {
    if (rel_probs(static_cast<Eigen::Index>(i), root_label) > rel_probs(static_cast<Eigen::Index>(tree.root), root_label)) {
      tree.root = i;
    }
  }

  // Prim-style expansion from the root. For each outside word keep the
  // closest tree word (lowest index on ties).
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_head(n, kNone);
  auto absorb = [&](std::size_t i) {
    in_tree[i] = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (d < best[j] || (d == best[j] && i < best_head[j])) {
        best[j] = d;
        best_head[j] = i;
      }
    }
  };
  absorb(tree.root);
  tree.edges.reserve(n - 1);
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t pick = kNone;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      if (pick == kNone || best[j] < best[pick] || (best[j] == best[pick] && best_head[j] < best_head[pick])) pick = j;
    }
    std::size_t label = kNone;
    for (Eigen::Index k = 0; k < rel_probs.cols(); ++k) {
      if (k == root_label) continue;
      if (label == kNone || rel_probs(static_cast<Eigen::Index>(pick), k) > rel_probs(static_cast<Eigen::Index>(pick), static_cast<Eigen::Index>(label))) {
        label = static_cast<std::size_t>(k);
      }
    }
    tree.edges.push_back(TreeEdge{best_head[pick], pick, label});
    absorb(pick);
  }
  return tree;
}

std::vector<UndirectedEdge> undirected_mst(const Eigen::MatrixXd& distances) {
  require_square(distances, "undirected_mst");
  const auto n = static_cast<std::size_t>(distances.rows());
  std::vector<bool> in_tree(n, false);
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, kNone);
  std::vector<UndirectedEdge> edges;
  edges.reserve(n - 1);

  std::size_t current = 0;
  for (std::size_t step = 0; step < n; ++step) {
    in_tree[current] = true;
    if (parent[current] != kNone) edges.emplace_back(parent[current], current);
    std::size_t next = kNone;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = distances(static_cast<Eigen::Index>(current), static_cast<Eigen::Index>(j));
      if (d < key[j] || (d == key[j] && current < parent[j])) {
        key[j] = d;
        parent[j] = current;
      }
      if (next == kNone || key[j] < key[next]) next = j;
    }
    if (next == kNone) break;
    current = next;
  }
  return edges;
}

PredictedTree orient_tree(std::size_t n, const std::vector<UndirectedEdge>& edges, std::size_t root) {
  if (root >= n) throw ArgumentError("orient_tree: root out of range");
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (const auto& [a, b] : edges) {
    adjacency.at(a).push_back(b);
    adjacency.at(b).push_back(a);
  }
  PredictedTree tree;
  tree.n = n;
  tree.root = root;
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (const auto w : adjacency[v]) {
      if (seen[w]) continue;
      seen[w] = true;
      tree.edges.push_back(TreeEdge{v, w, std::nullopt});
      stack.push_back(w);
    }
  }
  std::sort(tree.edges.begin(), tree.edges.end(), [](const TreeEdge& a, const TreeEdge& b) { return a.child < b.child; });
  return tree;
}

namespace {

std::vector<std::size_t> chu_liu_edmonds(const ArcScores& g, std::size_t root) {
  const std::size_t n = g.size();
  std::vector<std::size_t> best(n, kRootHead);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == root) continue;
    std::size_t arg = kNone;
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v || !g.allowed(u, v)) continue;
      if (arg == kNone || g.score(u, v) > g.score(arg, v)) arg = u;
    }
    if (arg == kNone) throw StructureError("no admissible head for word " + std::to_string(v));
    best[v] = arg;
  }

  // Look for a cycle among the greedy choices.
  std::vector<std::size_t> stamp(n, kNone);
  std::vector<std::size_t> cycle;
  for (std::size_t start = 0; start < n && cycle.empty(); ++start) {
    std::size_t v = start;
    while (v != root && stamp[v] == kNone) {
      stamp[v] = start;
      v = best[v];
    }
    if (v != root && stamp[v] == start) {
      std::size_t u = v;
      do {
        cycle.push_back(u);
        u = best[u];
      } while (u != v);
    }
  }
  if (cycle.empty()) return best;

  std::vector<bool> in_cycle(n, false);
  for (const auto v : cycle) in_cycle[v] = true;
  std::vector<std::size_t> to_new(n, kNone);
  std::vector<std::size_t> to_old;
  for (std::size_t v = 0; v < n; ++v) {
    if (in_cycle[v]) continue;
    to_new[v] = to_old.size();
    to_old.push_back(v);
  }
  const std::size_t contracted = to_old.size();
  ArcScores sub(contracted + 1);
  std::vector<std::size_t> enter_child(n, kNone);  // cycle word entered from outside word u
  std::vector<std::size_t> exit_head(n, kNone);    // cycle word heading outside word v

  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v || !g.allowed(u, v)) continue;
      if (!in_cycle[u] && !in_cycle[v]) {
        sub.set(to_new[u], to_new[v], g.score(u, v));
      } else if (!in_cycle[u] && in_cycle[v]) {
        const double value = g.score(u, v) - g.score(best[v], v);
        if (!sub.allowed(to_new[u], contracted) || value > sub.score(to_new[u], contracted)) {
          sub.set(to_new[u], contracted, value);
          enter_child[u] = v;
        }
      } else if (in_cycle[u] && !in_cycle[v]) {
        if (!sub.allowed(contracted, to_new[v]) || g.score(u, v) > sub.score(contracted, to_new[v])) {
          sub.set(contracted, to_new[v], g.score(u, v));
          exit_head[v] = u;
        }
      }
    }
  }

  const auto sub_heads = chu_liu_edmonds(sub, to_new[root]);
  std::vector<std::size_t> heads(n, kRootHead);
  for (std::size_t k = 0; k < contracted; ++k) {
    const auto v = to_old[k];
    if (v == root) continue;
    const auto h = sub_heads[k];
    heads[v] = h == contracted ? exit_head[v] : to_old[h];
  }
  for (const auto v : cycle) heads[v] = best[v];
  const auto entering = to_old[sub_heads[contracted]];
  heads[enter_child[entering]] = entering;
  return heads;
}

}  // namespace

std::vector<std::size_t> max_spanning_arborescence(const ArcScores& scores, std::size_t root) {
  if (scores.size() == 0) throw ArgumentError("max_spanning_arborescence: empty graph");
  if (root >= scores.size()) throw ArgumentError("max_spanning_arborescence: root out of range");
  ArcScores g = scores;
  for (std::size_t u = 0; u < g.size(); ++u) {
    g.forbid(u, u);
    g.forbid(u, root);
  }
  // Reachability check up front gives a clear error instead of a failure deep in the recursion.
  std::vector<bool> seen(g.size(), false);
  std::vector<std::size_t> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (!seen[v] && g.allowed(u, v)) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!seen[v]) throw StructureError("word " + std::to_string(v) + " is unreachable from the root over allowed arcs");
  }
  return chu_liu_edmonds(g, root);
}

ArcScores dirprobe_scores(const Eigen::MatrixXd& distances, const Eigen::VectorXd& depth_scores, DepthGate gate,
                          std::size_t* relaxed_words) {
  require_square(distances, "dirprobe_decode");
  const auto n = static_cast<std::size_t>(distances.rows());
  if (static_cast<std::size_t>(depth_scores.size()) != n) throw ArgumentError("dirprobe_decode: depth scores must have n entries");
  if (!depth_scores.allFinite()) throw ArgumentError("dirprobe_decode: non-finite depth score");

  std::size_t root = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (depth_scores(static_cast<Eigen::Index>(i)) < depth_scores(static_cast<Eigen::Index>(root))) root = i;
  }
  auto violates = [&](std::size_t head, std::size_t child) {
    const double dh = depth_scores(static_cast<Eigen::Index>(head));
    const double dc = depth_scores(static_cast<Eigen::Index>(child));
    return gate == DepthGate::kForbidHeadDeeper ? dh > dc : dh < dc;
  };

  ArcScores scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || j == root || violates(i, j)) continue;
      scores.set(i, j, -distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }

  // Lift the gate for the lowest-index unreachable word until every word is
  // reachable from the root.
  std::size_t relaxed = 0;
  while (true) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{root};
    seen[root] = true;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        if (!seen[v] && scores.allowed(u, v)) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    const auto it = std::find(seen.begin(), seen.end(), false);
    if (it == seen.end()) break;
    const auto word = static_cast<std::size_t>(it - seen.begin());
    for (std::size_t i = 0; i < n; ++i) {
      if (i != word) scores.set(i, word, -distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(word)));
    }
    ++relaxed;
  }
  if (relaxed_words) *relaxed_words = relaxed;
  return scores;
}

DirProbeResult dirprobe_decode(const Eigen::MatrixXd& distances, const Eigen::VectorXd& depth_scores, DepthGate gate) {
  DirProbeResult result;
  const ArcScores scores = dirprobe_scores(distances, depth_scores, gate, &result.relaxed_words);
  const auto n = scores.size();
  std::size_t root = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (depth_scores(static_cast<Eigen::Index>(i)) < depth_scores(static_cast<Eigen::Index>(root))) root = i;
  }
  const auto heads = max_spanning_arborescence(scores, root);
  result.tree.n = n;
  result.tree.root = root;
  result.tree.directed = true;
  result.tree.labeled = false;
  for (std::size_t v = 0; v < n; ++v) {
    if (heads[v] != kRootHead) result.tree.edges.push_back(TreeEdge{heads[v], v, std::nullopt});
  }
  return result;
}

void write_predictions(std::ostream& out, const PredictedSentence& sentence) {
  const auto& tree = sentence.tree;
  if (sentence.words.size() != tree.n) throw ArgumentError("prediction has " + std::to_string(tree.n) + " words but sentence has " + std::to_string(sentence.words.size()));
  out << "# sent_id = " << sentence.sentence_id << '\n';
  if (!tree.directed) out << "# directed = false\n";
  const auto heads = tree.heads();
  const auto relations = tree.relations();
  for (std::size_t i = 0; i < tree.n; ++i) {
    out << (i + 1) << '\t' << sentence.words[i] << "\t_\t_\t_\t_\t" << (heads[i] == kRootHead ? 0 : heads[i] + 1) << '\t'
        << (relations ? RelationVocab::label((*relations)[i]) : std::string_view("_")) << "\t_\t_\n";
  }
  out << '\n';
}

std::vector<PredictedSentence> read_predictions(std::istream& in) {
  std::vector<PredictedSentence> result;
  const auto blocks = read_conllu_blocks(in);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    PredictedSentence sentence;
    sentence.sentence_id = block.comment_value("sent_id").value_or(std::to_string(b + 1));
    const auto directed = block.comment_value("directed");
    const std::size_t n = block.rows.size();
    PredictedTree& tree = sentence.tree;
    tree.n = n;
    tree.directed = !(directed && *directed == "false");
    tree.labeled = std::all_of(block.rows.begin(), block.rows.end(), [](const ConlluRow& r) { return r.deprel != "_"; });
    std::optional<std::size_t> root;
    for (const auto& row : block.rows) {
      std::size_t head = 0;
      const auto* end = row.head.data() + row.head.size();
      auto [ptr, ec] = std::from_chars(row.head.data(), end, head);
      if (ec != std::errc{} || ptr != end || row.head.empty()) throw ParseError("invalid HEAD '" + row.head + "'", row.line);
      if (head > n) throw StructureError("sentence " + sentence.sentence_id + ": HEAD points past the sentence");
      sentence.words.push_back(row.form);
      const std::size_t child = row.id - 1;
      if (head == 0) {
        if (root) throw StructureError("sentence " + sentence.sentence_id + ": more than one root");
        root = child;
        continue;
      }
      TreeEdge edge{head - 1, child, std::nullopt};
      if (tree.labeled) edge.relation = RelationVocab::index_of(RelationVocab::universal_part(row.deprel));
      tree.edges.push_back(edge);
    }
    if (!root) throw StructureError("sentence " + sentence.sentence_id + ": no root");
    tree.root = *root;
    tree.validate();
    result.push_back(std::move(sentence));
  }
  return result;
}

}  // namespace depprobe
