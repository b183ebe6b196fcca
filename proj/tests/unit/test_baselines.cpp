#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "semgeo/baselines.hpp"
#include "semgeo/error.hpp"
#include "semgeo/metrics.hpp"
#include "semgeo/phate.hpp"

using namespace semgeo;
using Eigen::MatrixXd;

namespace {

AlignedData wrap(const MatrixXd& x) {
    return align_matrix(fixtures::labelled(std::vector<std::string>(static_cast<std::size_t>(x.rows()), "c")), x);
}

double distance_error(const MatrixXd& a, const MatrixXd& b) {
    return (pairwise_distances(a) - pairwise_distances(b)).cwiseAbs().maxCoeff();
}

MatrixXd lifted_line(std::initializer_list<double> xs, std::size_t dim) {
    // A fixed rotation of the x axis into `dim` dimensions.
    Eigen::VectorXd dir = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(dim), 1.0, 2.0);
    dir.normalize();
    MatrixXd m(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(dim));
    Eigen::Index i = 0;
    for (double x : xs) m.row(i++) = x * dir.transpose();
    return m;
}

}  // namespace

TEST(Pca, CollinearFirstAxisCarriesAllVariance) {
    const MatrixXd x = lifted_line({0, 1, 2, 4, 7}, 8);
    const Projection p = pca_project(wrap(x), 2);
    EXPECT_TRUE(p.coords.col(1).isZero(1e-12));
    EXPECT_GT(p.coords.col(0).squaredNorm(), 0.0);
}

TEST(Pca, TwoDimensionalInputIsRotationOnly) {
    const MatrixXd x = fixtures::random_matrix(12, 2, 20);
    EXPECT_LE(distance_error(pca_project(wrap(x), 2).coords, x), 1e-9);
}

TEST(Pca, AxisVariancesMatchEigenOracle) {
    const MatrixXd x = fixtures::random_matrix(10, 6, 21);
    const MatrixXd y = pca_project(wrap(x), 6).coords;
    // Brute-force covariance.
    const auto pts = fixtures::to_points(x);
    std::vector<double> mean(6, 0.0);
    for (const auto& p : pts)
        for (int j = 0; j < 6; ++j) mean[j] += p[j] / 10.0;
    oracle::Mat cov(6, std::vector<double>(6, 0.0));
    for (const auto& p : pts)
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) cov[a][b] += (p[a] - mean[a]) * (p[b] - mean[b]) / 10.0;
    const auto ev = oracle::jacobi_eigenvalues(cov);
    for (int j = 0; j < 6; ++j) {
        const double var = (y.col(j).array() - y.col(j).mean()).square().sum() / 10.0;
        EXPECT_NEAR(var, ev[j], 1e-9) << j;
    }
}

TEST(Pca, OrthogonalAxesWithNonIncreasingVariance) {
    const MatrixXd y = pca_project(wrap(fixtures::random_matrix(40, 9, 22)), 4).coords;
    for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) EXPECT_LE(std::abs(y.col(a).dot(y.col(b))), 1e-9);
        if (a > 0) EXPECT_LE(y.col(a).squaredNorm(), y.col(a - 1).squaredNorm() + 1e-12);
    }
}

TEST(Pca, PadsBeyondRank) {
    const MatrixXd y = pca_project(wrap(fixtures::random_matrix(3, 5, 23)), 4).coords;
    EXPECT_EQ(y.cols(), 4);
    EXPECT_TRUE(y.col(2).isZero(1e-12));
    EXPECT_TRUE(y.col(3).isZero(0.0));
}

TEST(Cmds, RecoversSquare) {
    MatrixXd sq(4, 2);
    sq << 0, 0, 1, 0, 1, 1, 0, 1;
    EXPECT_LT(distance_error(cmds_project(wrap(sq), 2).coords, sq), 1e-9);
}

TEST(Cmds, IdenticalPointsGiveZeros) {
    EXPECT_TRUE(cmds_project(wrap(MatrixXd::Constant(5, 4, 2.5)), 2).coords.isZero(0.0));
}

TEST(Cmds, LiftedLineDistances) {
    const MatrixXd x = lifted_line({0, 3, 5}, 8);
    const MatrixXd d = pairwise_distances(cmds_project(wrap(x), 2).coords);
    EXPECT_NEAR(d(0, 1), 3.0, 1e-9);
    EXPECT_NEAR(d(0, 2), 5.0, 1e-9);
    EXPECT_NEAR(d(1, 2), 2.0, 1e-9);
}

TEST(Cmds, AgreesWithPcaUpToRigidMotion) {
    const MatrixXd x = fixtures::random_matrix(25, 7, 24);
    EXPECT_LE(distance_error(cmds_project(wrap(x), 3).coords, pca_project(wrap(x), 3).coords), 1e-9);
}

TEST(Cmds, StressIsRawStressAgainstInput) {
    const MatrixXd x = fixtures::random_matrix(15, 5, 25);
    const Projection p = cmds_project(wrap(x), 2);
    EXPECT_NEAR(p.stress, raw_stress(pairwise_distances(x), p.coords), 1e-9);
}

TEST(Spectral, FarBlobsAreLinearlySeparable) {
    const fixtures::Blobs b = fixtures::blobs({{0, 0}, {50, 0}}, 10, 1.0, 4, 26);
    const Projection p = spectral_project(wrap(b.x), 3, 2);
    // Separable when some axis splits the two blobs completely.
    bool separable = false;
    for (Eigen::Index c = 0; c < 2; ++c) {
        const auto first = p.coords.col(c).head(10), second = p.coords.col(c).tail(10);
        separable = separable || first.maxCoeff() < second.minCoeff() || second.maxCoeff() < first.minCoeff();
    }
    EXPECT_TRUE(separable);
}

TEST(Spectral, DisconnectedComponentsOffsetWithWarning) {
    const fixtures::Blobs b = fixtures::blobs({{0, 0}, {1000, 0}}, 10, 1.0, 3, 27);
    const Projection p = spectral_project(wrap(b.x), 3, 2);
    ASSERT_FALSE(p.warnings.empty());
    EXPECT_LT(p.coords.col(0).head(10).maxCoeff(), p.coords.col(0).tail(10).minCoeff());
}

TEST(Spectral, IdenticalPointsGiveZeros) {
    const Projection p = spectral_project(wrap(MatrixXd::Ones(4, 3)), 3, 2);
    EXPECT_TRUE(p.coords.isZero(0.0));
}

TEST(Spectral, FiedlerVectorMonotoneAlongPath) {
    // Widening gaps make each point's nearest neighbour its predecessor, so
    // the k = 1 graph is exactly a path.
    MatrixXd x = lifted_line({0, 1, 2.1, 3.3, 4.6, 6, 7.5, 9.1, 10.8, 12.6, 14.5, 16.5}, 5);
    const Projection p = spectral_project(wrap(x), 1, 1);
    std::vector<double> order, pos;
    for (int i = 0; i < 12; ++i) {
        order.push_back(i);
        pos.push_back(p.coords(i, 0));
    }
    EXPECT_NEAR(std::abs(spearman(order, pos)), 1.0, 1e-12);
}

TEST(Spectral, PermutationEquivariant) {
    const MatrixXd x = fixtures::random_matrix(30, 4, 28);
    std::vector<Eigen::Index> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(28));
    MatrixXd xp(30, 4);
    for (int i = 0; i < 30; ++i) xp.row(i) = x.row(perm[i]);
    const MatrixXd a = spectral_project(wrap(x), 5, 2).coords;
    const MatrixXd b = spectral_project(wrap(xp), 5, 2).coords;
    for (int i = 0; i < 30; ++i) EXPECT_LE((b.row(i) - a.row(perm[i])).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Project, DispatchAndValidation) {
    const AlignedData data = wrap(fixtures::random_matrix(20, 4, 29));
    for (MethodId m : kAllMethods) {
        ProjectionParams params;
        params.method = m;
        params.spectral_k = 5;
        params.phate.k = 5;
        const Projection p = project(data, params);
        EXPECT_EQ(p.method, m);
        EXPECT_EQ(p.coords.rows(), 20);
        EXPECT_EQ(p.coords.cols(), 2);
        EXPECT_EQ(p.labels.size(), 20u);
    }
    ProjectionParams bad;
    bad.method = MethodId::spectral;
    bad.spectral_k = 20;
    EXPECT_THROW(project(data, bad), ValidationError);
    EXPECT_THROW(parse_method("tsne"), ValidationError);
}

TEST(Project, NormalizeEmbeddingsFlag) {
    MatrixXd x = fixtures::random_matrix(10, 3, 30);
    MatrixXd scaled = x;
    for (int i = 0; i < 10; ++i) scaled.row(i) *= (i + 1.0);
    ProjectionParams params;
    params.method = MethodId::pca;
    params.normalize_embeddings = true;
    EXPECT_LE(distance_error(project(wrap(x), params).coords, project(wrap(scaled), params).coords), 1e-9);
}
