#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "depprobe/checkpoint.hpp"
#include "depprobe/errors.hpp"
#include "depprobe/probe.hpp"
#include "support/oracles.hpp"

using namespace depprobe;

namespace {

double scalar_distance(const Eigen::MatrixXd& B, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < B.cols(); ++k) {
    double proj = 0.0;
    for (Eigen::Index r = 0; r < B.rows(); ++r) proj += B(r, k) * (x(r) - y(r));
    total += proj * proj;
  }
  return std::sqrt(total + 1e-9);
}

}  // namespace

TEST(StructuralDistance, EuclideanExample) {
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_NEAR(structural_distance(B, Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)), 5.0, 1e-6);
  EXPECT_NEAR(structural_distance(B, Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)), std::sqrt(1e-9), 1e-12);
  EXPECT_NEAR(std::sqrt(kDistanceEpsilon), 3.16e-5, 1e-7);
  EXPECT_THROW(structural_distance(B, Eigen::Vector3d(0, 0, 0), Eigen::Vector2d(3, 4)), ArgumentError);
}

TEST(StructuralDistance, MatchesScalarRecomputation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd B = oracle::random_matrix(6, 4, rng);
    const Eigen::VectorXd x = oracle::random_matrix(6, 1, rng), y = oracle::random_matrix(6, 1, rng);
    EXPECT_NEAR(structural_distance(B, x, y), scalar_distance(B, x, y), 1e-12);
    EXPECT_DOUBLE_EQ(structural_distance(B, x, y), structural_distance(B, y, x));
  }
}

TEST(StructuralDistance, TriangleInequality) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd B = oracle::random_matrix(5, 3, rng);
    const Eigen::VectorXd x = oracle::random_matrix(5, 1, rng), y = oracle::random_matrix(5, 1, rng),
                          z = oracle::random_matrix(5, 1, rng);
    EXPECT_LE(structural_distance(B, x, z), structural_distance(B, x, y) + structural_distance(B, y, z) + 1e-4);
  }
}

TEST(DistanceMatrix, SingletonSymmetryAndPairwiseAgreement) {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd B = oracle::random_matrix(4, 3, rng);
  const auto one = distance_matrix(B, oracle::random_matrix(1, 4, rng));
  ASSERT_EQ(one.rows(), 1);
  EXPECT_NEAR(one(0, 0), std::sqrt(1e-9), 1e-15);

  const Eigen::MatrixXd h = oracle::random_matrix(3, 4, rng);
  const auto d = distance_matrix(B, h);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(d(i, j), d(j, i));
      EXPECT_NEAR(d(i, j), structural_distance(B, h.row(i).transpose(), h.row(j).transpose()), 1e-12);
    }
  }
  EXPECT_THROW(distance_matrix(B, oracle::random_matrix(3, 5, rng)), ArgumentError);
}

TEST(DistanceMatrix, PositiveScalingScalesOffDiagonal) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd B = oracle::random_matrix(5, 3, rng);
    const Eigen::MatrixXd h = oracle::random_matrix(6, 5, rng);
    const double s = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    const auto d = distance_matrix(B, h), ds = distance_matrix(s * B, h);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (i != j) {
          EXPECT_NEAR(ds(i, j) * ds(i, j), s * s * (d(i, j) * d(i, j) - 1e-9) + 1e-9, 1e-12 * s * s * d(i, j) * d(i, j));
        }
  }
}

TEST(DepthScore, Examples) {
  const Eigen::MatrixXd C = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_DOUBLE_EQ(depth_score(C, Eigen::Vector2d(3, 4)), 25.0);
  EXPECT_DOUBLE_EQ(depth_score(C, Eigen::Vector2d(0, 0)), 0.0);
  EXPECT_THROW(depth_score(C, Eigen::Vector3d(0, 0, 1)), ArgumentError);
  std::mt19937_64 rng(15);
  const Eigen::MatrixXd R = oracle::random_matrix(4, 3, rng);
  const Eigen::MatrixXd h = oracle::random_matrix(5, 4, rng);
  const auto scores = depth_scores(R, h);
  for (int i = 0; i < 5; ++i) {
    double expected = 0.0;
    for (int k = 0; k < 3; ++k) {
      double proj = 0.0;
      for (int r = 0; r < 4; ++r) proj += R(r, k) * h(i, r);
      expected += proj * proj;
    }
    EXPECT_NEAR(scores(i), expected, 1e-12);
    EXPECT_NEAR(depth_score(R, h.row(i).transpose()), expected, 1e-12);
  }
}

TEST(RelationProbs, UniformAndStabilized) {
  const Eigen::MatrixXd L = Eigen::MatrixXd::Zero(3, 37);
  const auto uniform = relation_probs(L, Eigen::Vector3d(1, 2, 3));
  for (int k = 0; k < 37; ++k) EXPECT_NEAR(uniform(k), 1.0 / 37.0, 1e-15);

  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(1, 37);
  big(0, 0) = 1000.0;
  const auto p = relation_probs(big, Eigen::VectorXd::Ones(1));
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p(0), 1.0, 1e-12);
  EXPECT_THROW(relation_probs(L, Eigen::Vector2d(1, 2)), ArgumentError);
}

TEST(RelationProbs, MatchesExpNormalizeOracle) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd L = oracle::random_matrix(4, 37, rng, 3.0);
    const Eigen::VectorXd h = oracle::random_matrix(4, 1, rng);
    const auto p = relation_probs(L, h);
    std::vector<double> logits(37);
    double top = -1e300;
    for (int k = 0; k < 37; ++k) {
      logits[k] = 0.0;
      for (int r = 0; r < 4; ++r) logits[k] += L(r, k) * h(r);
      top = std::max(top, logits[k]);
    }
    double z = 0.0;
    for (double v : logits) z += std::exp(v - top);
    double sum = 0.0;
    for (int k = 0; k < 37; ++k) {
      EXPECT_NEAR(p(k), std::exp(logits[k] - top) / z, 1e-9);
      EXPECT_GT(p(k), 0.0);
      sum += p(k);
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  const Eigen::MatrixXd rows = softmax_rows(oracle::random_matrix(5, 7, rng, 50.0));
  EXPECT_TRUE(rows.allFinite());
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(rows.row(i).sum(), 1.0, 1e-9);
}

TEST(ParameterCount, DefaultConfigurations) {
  const ProbeDims dims{768, 128, 128, 37};
  EXPECT_EQ(parameter_count(ProbeKind::kDepProbe, dims), 126720u);
  EXPECT_EQ(parameter_count(ProbeKind::kDirProbe, dims), 196608u);
  EXPECT_EQ(ProbeModel::initialize(ProbeKind::kDepProbe, dims, 1).parameter_count(), 126720u);
  EXPECT_EQ(ProbeModel::initialize(ProbeKind::kDirProbe, dims, 1).parameter_count(), 196608u);
}

TEST(ProbeModel, InitializationIsSeededAndBounded) {
  const ProbeDims dims{10, 4, 3, 37};
  const auto a = ProbeModel::initialize(ProbeKind::kDepProbe, dims, 5);
  const auto b = ProbeModel::initialize(ProbeKind::kDepProbe, dims, 5);
  const auto c = ProbeModel::initialize(ProbeKind::kDepProbe, dims, 6);
  EXPECT_EQ(a.structural, b.structural);
  EXPECT_EQ(*a.relational, *b.relational);
  EXPECT_NE(a.structural, c.structural);
  EXPECT_FALSE(a.depth.has_value());
  EXPECT_LE(a.structural.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 14.0));
  EXPECT_LE(a.relational->cwiseAbs().maxCoeff(), std::sqrt(6.0 / 47.0));
  EXPECT_TRUE(a.all_finite());
  const auto d = ProbeModel::initialize(ProbeKind::kDirProbe, dims, 5, 6, 7);
  EXPECT_FALSE(d.relational.has_value());
  ASSERT_TRUE(d.depth.has_value());
  EXPECT_EQ(d.depth->cols(), 3);
  EXPECT_EQ(d.layer_depth, 7u);
}

TEST(Checkpoint, RoundTripIsExact) {
  for (auto kind : {ProbeKind::kDepProbe, ProbeKind::kDirProbe}) {
    const auto model = ProbeModel::initialize(kind, ProbeDims{9, 4, 3, 37}, 77, 3, 8);
    const auto text = serialize_checkpoint(model);
    const auto back = deserialize_checkpoint(text);
    EXPECT_EQ(back.kind, model.kind);
    EXPECT_EQ(back.structural, model.structural);
    EXPECT_EQ(back.relational.has_value(), model.relational.has_value());
    if (model.relational) {
      EXPECT_EQ(*back.relational, *model.relational);
    }
    if (model.depth) {
      EXPECT_EQ(*back.depth, *model.depth);
    }
    EXPECT_EQ(back.layer_structural, 3u);
    EXPECT_EQ(back.layer_relational, model.layer_relational);
    EXPECT_EQ(back.layer_depth, model.layer_depth);
    EXPECT_EQ(serialize_checkpoint(back), text);
  }
}

TEST(Checkpoint, RejectsMalformedInput) {
  EXPECT_THROW(deserialize_checkpoint("not json"), FormatError);
  EXPECT_THROW(deserialize_checkpoint("{\"format\": \"other\"}"), FormatError);
  auto text = serialize_checkpoint(ProbeModel::initialize(ProbeKind::kDepProbe, ProbeDims{3, 2, 2, 37}, 1));
  const auto pos = text.find("\"acl\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 5, "\"xyz\"");
  EXPECT_THROW(deserialize_checkpoint(text), FormatError);
}
