#include "depprobe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/SVD>
#include <boost/math/distributions/students_t.hpp>

#include "depprobe/errors.hpp"

namespace depprobe {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRankTolerance = 1e-10;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::stringstream stream(line);
  std::string field;
  while (std::getline(stream, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::string strip(std::string text) {
  while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.pop_back();
  while (!text.empty() && text.front() == ' ') text.erase(text.begin());
  return text;
}

double parse_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(value)) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw FormatError(where + ": '" + text + "' is not a finite number");
  }
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m, const char* name) {
  if (m.cols() == 0 || m.rows() < m.cols()) throw RankError(std::string("matrix ") + name + " is rank-deficient");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  if (!(sigma(0) > 0.0) || sigma(sigma.size() - 1) <= kRankTolerance * sigma(0)) {
    throw RankError(std::string("matrix ") + name + " is rank-deficient");
  }
  return svd.matrixU();
}

/// Best source per target column, lowest source index on ties.
std::vector<std::size_t> best_sources(const ScoreMatrix& m, bool include_diagonal) {
  std::vector<std::size_t> best(m.targets.size(), 0);
  for (std::size_t t = 0; t < m.targets.size(); ++t) {
    std::optional<std::size_t> arg;
    for (std::size_t s = 0; s < m.sources.size(); ++s) {
      if (!include_diagonal && m.sources[s] == m.targets[t]) continue;
      if (!arg || m.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) >
                      m.values(static_cast<Eigen::Index>(*arg), static_cast<Eigen::Index>(t))) {
        arg = s;
      }
    }
    best[t] = arg.value_or(0);
  }
  return best;
}

}  // namespace

double ScoreMatrix::at(const std::string& source, const std::string& target) const {
  const auto s = std::find(sources.begin(), sources.end(), source);
  const auto t = std::find(targets.begin(), targets.end(), target);
  if (s == sources.end() || t == targets.end()) throw LookupError("no score for " + source + " -> " + target);
  return values(s - sources.begin(), t - targets.begin());
}

ScoreMatrix read_score_matrix(std::istream& in) {
  ScoreMatrix matrix;
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    auto fields = split(line, '\t');
    for (auto& f : fields) f = strip(f);
    if (matrix.targets.empty()) {
      if (fields.size() < 2) throw ParseError("score matrix header needs at least one target", line_no);
      matrix.metric = fields[0];
      matrix.targets.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != matrix.targets.size() + 1) {
      throw ParseError("expected " + std::to_string(matrix.targets.size() + 1) + " fields, found " + std::to_string(fields.size()), line_no);
    }
    matrix.sources.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t k = 1; k < fields.size(); ++k) row.push_back(parse_number(fields[k], "line " + std::to_string(line_no)));
    rows.push_back(std::move(row));
  }
  if (matrix.targets.empty() || rows.empty()) throw FormatError("score matrix is empty");
  matrix.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(matrix.targets.size()));
  for (std::size_t s = 0; s < rows.size(); ++s)
    for (std::size_t t = 0; t < rows[s].size(); ++t) matrix.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = rows[s][t];
  return matrix;
}

ScoreMatrix read_score_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_score_matrix(in);
}

std::string score_matrix_tsv(const ScoreMatrix& matrix) {
  std::ostringstream out;
  out.precision(17);
  out << matrix.metric;
  for (const auto& t : matrix.targets) out << '\t' << t;
  out << '\n';
  for (std::size_t s = 0; s < matrix.sources.size(); ++s) {
    out << matrix.sources[s];
    for (std::size_t t = 0; t < matrix.targets.size(); ++t) out << '\t' << matrix.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
    out << '\n';
  }
  return out.str();
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("pearson: inputs differ in length");
  if (x.size() < 3) throw ArgumentError("pearson: need at least 3 observations");
  const double n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateError("pearson: correlation undefined for constant input");
  Correlation result;
  result.n = x.size();
  result.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(result.rho) >= 1.0) {
    result.p_value = 0.0;
  } else {
    const double dof = n - 2.0;
    const double t = result.rho * std::sqrt(dof / (1.0 - result.rho * result.rho));
    const boost::math::students_t dist(dof);
    result.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  }
  return result;
}

std::vector<double> descending_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi + 1 < order.size() && values[order[hi + 1]] == values[order[lo]]) ++hi;
    const double average = 0.5 * static_cast<double>(lo + hi);
    for (std::size_t k = lo; k <= hi; ++k) ranks[order[k]] = average;
    lo = hi + 1;
  }
  return ranks;
}

double weighted_kendall(std::span<const double> ground, std::span<const double> predicted) {
  if (ground.size() != predicted.size()) throw ArgumentError("weighted_kendall: inputs differ in length");
  if (ground.size() < 2) throw ArgumentError("weighted_kendall: need at least 2 items");
  const auto ranks = descending_ranks(ground);
  double agreement = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < ground.size(); ++i) {
    for (std::size_t j = i + 1; j < ground.size(); ++j) {
      const double weight = 1.0 / (1.0 + ranks[i]) + 1.0 / (1.0 + ranks[j]);
      total += weight;
      const double g = ground[i] - ground[j];
      const double p = predicted[i] - predicted[j];
      if (g == 0.0 || p == 0.0) continue;
      agreement += (g > 0.0) == (p > 0.0) ? weight : -weight;
    }
  }
  return total == 0.0 ? 0.0 : agreement / total;
}

ZTest correlation_z_test(double r1, std::size_t n1, double r2, std::size_t n2) {
  if (std::abs(r1) >= 1.0 || std::abs(r2) >= 1.0) throw DegenerateError("z-test: |r| must be below 1");
  if (n1 <= 3 || n2 <= 3) throw DegenerateError("z-test: each sample needs more than 3 observations");
  ZTest result;
  const double se = std::sqrt(1.0 / static_cast<double>(n1 - 3) + 1.0 / static_cast<double>(n2 - 3));
  result.z = (std::atanh(r1) - std::atanh(r2)) / se;
  result.p_value = std::erfc(std::abs(result.z) / std::sqrt(2.0));
  return result;
}

std::vector<double> principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) throw ArgumentError("principal_angles: matrices have different row counts");
  Eigen::MatrixXd qa = orthonormal_basis(a, "A");
  Eigen::MatrixXd qb = orthonormal_basis(b, "B");
  if (qa.cols() < qb.cols()) std::swap(qa, qb);

  const Eigen::MatrixXd overlap = qa.transpose() * qb;
  const Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(overlap).singularValues();  // descending
  const Eigen::MatrixXd residual = qb - qa * overlap;
  const Eigen::VectorXd sines = Eigen::JacobiSVD<Eigen::MatrixXd>(residual).singularValues();  // descending

  const auto m = static_cast<std::size_t>(qb.cols());
  std::vector<double> angles(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double c = std::min(1.0, cosines(static_cast<Eigen::Index>(i)));
    const double s = std::min(1.0, sines(static_cast<Eigen::Index>(m - 1 - i)));
    const double radians = c * c >= 0.5 ? std::asin(s) : std::acos(c);
    angles[i] = radians * 180.0 / kPi;
  }
  return angles;
}

double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const auto angles = principal_angles(a, b);
  return std::accumulate(angles.begin(), angles.end(), 0.0) / static_cast<double>(angles.size());
}

TransferCorrelation transfer_correlation(const ScoreMatrix& parser, const ScoreMatrix& probe, bool include_diagonal) {
  if (parser.sources != probe.sources || parser.targets != probe.targets) {
    throw ArgumentError("transfer_correlation: score matrices disagree on source/target ordering");
  }
  if (parser.values.rows() != probe.values.rows() || parser.values.cols() != probe.values.cols()) {
    throw ArgumentError("transfer_correlation: score matrices differ in shape");
  }
  TransferCorrelation result;
  std::vector<double> x;
  std::vector<double> y;
  double tau_sum = 0.0;
  std::size_t tau_targets = 0;
  for (std::size_t t = 0; t < parser.targets.size(); ++t) {
    std::vector<double> ground;
    std::vector<double> predicted;
    for (std::size_t s = 0; s < parser.sources.size(); ++s) {
      if (!include_diagonal && parser.sources[s] == parser.targets[t]) continue;
      ground.push_back(parser.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)));
      predicted.push_back(probe.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)));
    }
    x.insert(x.end(), predicted.begin(), predicted.end());
    y.insert(y.end(), ground.begin(), ground.end());
    if (ground.size() >= 2) {
      tau_sum += weighted_kendall(ground, predicted);
      ++tau_targets;
    }
  }
  result.cells = x.size();
  result.pearson = pearson(x, y);
  result.tau_w = tau_targets == 0 ? 0.0 : tau_sum / static_cast<double>(tau_targets);
  result.tau_w_global = weighted_kendall(y, x);

  const auto parser_best = best_sources(parser, include_diagonal);
  const auto probe_best = best_sources(probe, include_diagonal);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < parser.targets.size(); ++t) {
    result.parser_best.push_back(parser.sources[parser_best[t]]);
    result.probe_best.push_back(probe.sources[probe_best[t]]);
    hits += parser_best[t] == probe_best[t] ? 1 : 0;
  }
  result.hit_rate = static_cast<double>(hits) / static_cast<double>(parser.targets.size());
  return result;
}

SsaCorrelation ssa_correlation(const ScoreMatrix& parser, const std::map<std::string, ProbeModel>& probes, ProbeMap which) {
  const auto matrix_of = [&](const std::string& language) -> const Eigen::MatrixXd& {
    const auto it = probes.find(language);
    if (it == probes.end()) throw ArgumentError("ssa_correlation: no probe for language " + language);
    const ProbeModel& model = it->second;
    switch (which) {
      case ProbeMap::kStructural: return model.structural;
      case ProbeMap::kDepth:
        if (!model.depth) throw ArgumentError("ssa_correlation: probe for " + language + " has no depth map");
        return *model.depth;
      case ProbeMap::kRelational:
        if (!model.relational) throw ArgumentError("ssa_correlation: probe for " + language + " has no relational map");
        return *model.relational;
    }
    throw ArgumentError("ssa_correlation: unknown probe map");
  };

  SsaCorrelation result;
  result.angles.metric = "SSA";
  result.angles.sources = parser.sources;
  result.angles.targets = parser.targets;
  result.angles.values = Eigen::MatrixXd::Zero(parser.values.rows(), parser.values.cols());

  std::vector<double> x;
  std::vector<double> y;
  double tau_sum = 0.0;
  std::size_t tau_targets = 0;
  for (std::size_t t = 0; t < parser.targets.size(); ++t) {
    std::vector<double> ground;
    std::vector<double> predicted;
    for (std::size_t s = 0; s < parser.sources.size(); ++s) {
      if (parser.sources[s] == parser.targets[t]) continue;
      const double angle = subspace_angle(matrix_of(parser.sources[s]), matrix_of(parser.targets[t]));
      result.angles.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = angle;
      ground.push_back(parser.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)));
      predicted.push_back(-angle);
    }
    x.insert(x.end(), predicted.begin(), predicted.end());
    y.insert(y.end(), ground.begin(), ground.end());
    if (ground.size() >= 2) {
      tau_sum += weighted_kendall(ground, predicted);
      ++tau_targets;
    }
  }
  result.pairs = x.size();
  if (tau_targets > 0) result.tau_w = tau_sum / static_cast<double>(tau_targets);
  try {
    result.pearson = pearson(x, y);
  } catch (const DegenerateError&) {
    result.degenerate = true;
  } catch (const ArgumentError&) {
    result.degenerate = true;
  }
  return result;
}

Lang2VecTable read_lang2vec(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<std::size_t> order;  // output position -> input column
  Lang2VecTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    auto fields = split(line, ',');
    for (auto& f : fields) f = strip(f);
    if (header.empty()) {
      header = fields;
      if (header.size() < 2) throw ParseError("lang2vec header needs at least one feature column", line_no);
      std::vector<std::size_t> blocks[3];
      for (std::size_t c = 1; c < header.size(); ++c) {
        const auto& name = header[c];
        if (name.rfind("S_", 0) == 0) {
          blocks[0].push_back(c);
        } else if (name.rfind("P_", 0) == 0) {
          blocks[1].push_back(c);
        } else if (name.rfind("INV_", 0) == 0) {
          blocks[2].push_back(c);
        } else {
          throw ParseError("feature '" + name + "' is not a syntax (S_), phonology (P_) or inventory (INV_) feature", line_no);
        }
      }
      for (const auto& block : blocks) order.insert(order.end(), block.begin(), block.end());
      for (const auto c : order) table.feature_names.push_back(header[c]);
      continue;
    }
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()), line_no);
    }
    std::vector<std::optional<double>> values;
    values.reserve(order.size());
    for (const auto c : order) {
      if (fields[c] == "--") {
        values.emplace_back(std::nullopt);
      } else {
        values.emplace_back(parse_number(fields[c], "line " + std::to_string(line_no)));
      }
    }
    if (!table.languages.emplace(fields[0], std::move(values)).second) {
      throw ParseError("duplicate language '" + fields[0] + "'", line_no);
    }
  }
  if (header.empty()) throw FormatError("lang2vec table is empty");
  return table;
}

Lang2VecTable read_lang2vec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_lang2vec(in);
}

double lang2vec_similarity(const Lang2VecTable& table, const std::string& a, const std::string& b) {
  const auto ita = table.languages.find(a);
  if (ita == table.languages.end()) throw LookupError("lang2vec table has no language '" + a + "'");
  const auto itb = table.languages.find(b);
  if (itb == table.languages.end()) throw LookupError("lang2vec table has no language '" + b + "'");
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  std::size_t support = 0;
  for (std::size_t k = 0; k < ita->second.size(); ++k) {
    const auto& va = ita->second[k];
    const auto& vb = itb->second[k];
    if (!va || !vb) continue;
    ++support;
    dot += *va * *vb;
    norm_a += *va * *va;
    norm_b += *vb * *vb;
  }
  if (support == 0) throw DegenerateError("languages " + a + " and " + b + " share no known features");
  if (norm_a == 0.0 || norm_b == 0.0) throw DegenerateError("zero feature vector on the common support of " + a + " and " + b);
  return std::clamp(dot / std::sqrt(norm_a * norm_b), -1.0, 1.0);
}

}  // namespace depprobe
