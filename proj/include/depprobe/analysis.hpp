#pragma once

#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "depprobe/probe.hpp"

namespace depprobe {

/// Scores of models trained on each source and evaluated on each target.
struct ScoreMatrix {
  std::string metric;
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  Eigen::MatrixXd values;  // sources x targets

  double at(const std::string& source, const std::string& target) const;
};

/// TSV layout: header row "<metric>\t<target>...", then "<source>\t<value>...".
ScoreMatrix read_score_matrix(std::istream& in);
ScoreMatrix read_score_matrix_file(const std::string& path);
std::string score_matrix_tsv(const ScoreMatrix& matrix);

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Sample Pearson correlation; two-sided p-value from the t statistic with
/// n - 2 degrees of freedom. Throws DegenerateError on constant input.
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Weighted Kendall tau with additive hyperbolic weights
/// 1/(1 + rank_i) + 1/(1 + rank_j), ranks taken from `ground` in decreasing
/// order (0 = best, ties share their average rank). Pairs tied in either list
/// only add to the denominator.
double weighted_kendall(std::span<const double> ground, std::span<const double> predicted);

/// Descending 0-based ranks with ties averaged.
std::vector<double> descending_ranks(std::span<const double> values);

struct ZTest {
  double z = 0.0;
  double p_value = 1.0;
};

/// Fisher-transformed two-sample comparison of correlation coefficients.
/// Treats the samples as independent. Throws DegenerateError for |r| >= 1 or n <= 3.
ZTest correlation_z_test(double r1, std::size_t n1, double r2, std::size_t n2);

/// Principal angles (degrees, ascending) between the column spaces of two
/// matrices with the same row count. Small angles come from sines and large
/// ones from cosines, so both ends stay accurate.
std::vector<double> principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Mean principal angle in degrees. Throws RankError naming the
/// rank-deficient argument ("A" or "B").
double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct TransferCorrelation {
  Correlation pearson;
  double tau_w = 0.0;         // per-target source ranking, averaged over targets
  double tau_w_global = 0.0;  // over the flattened cells
  double hit_rate = 0.0;      // targets where both pick the same best source
  std::vector<std::string> parser_best;  // per target
  std::vector<std::string> probe_best;
  std::size_t cells = 0;
};

/// Compares probe scores to parser scores over identical orderings.
/// `include_diagonal` keeps in-language cells (source == target code).
TransferCorrelation transfer_correlation(const ScoreMatrix& parser, const ScoreMatrix& probe, bool include_diagonal = true);

enum class ProbeMap { kStructural, kDepth, kRelational };

struct SsaCorrelation {
  std::optional<Correlation> pearson;  // absent when degenerate
  std::optional<double> tau_w;
  bool degenerate = false;
  std::size_t pairs = 0;
  ScoreMatrix angles;  // SSA in degrees, diagonal 0
};

/// Correlates negative cross-language SSA of one probe map with parser scores
/// over off-diagonal pairs.
SsaCorrelation ssa_correlation(const ScoreMatrix& parser, const std::map<std::string, ProbeModel>& probes, ProbeMap which);

/// Typological feature vectors per language. Features are kept in the block
/// order syntax, phonology, inventory; nullopt marks a missing value.
struct Lang2VecTable {
  std::vector<std::string> feature_names;
  std::map<std::string, std::vector<std::optional<double>>> languages;
};

/// CSV with a header "<id column>,<feature>...". Feature names are assigned to
/// blocks by prefix: "S_" syntax, "P_" phonology, "INV_" inventory (other
/// prefixes are rejected). "--" marks a missing value.
Lang2VecTable read_lang2vec(std::istream& in);
Lang2VecTable read_lang2vec_file(const std::string& path);

/// Cosine over the dimensions known for both languages.
double lang2vec_similarity(const Lang2VecTable& table, const std::string& a, const std::string& b);

}  // namespace depprobe
