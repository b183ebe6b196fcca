#include <cmath>
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

MatrixXd pts(std::initializer_list<std::pair<double, double>> xs) {
    MatrixXd m(static_cast<Eigen::Index>(xs.size()), 2);
    Eigen::Index i = 0;
    for (auto [x, y] : xs) m.row(i++) << x, y;
    return m;
}

Labels random_labels(std::size_t n, std::size_t k, std::mt19937& rng) {
    Labels l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = "c" + std::to_string(i < k ? i : rng() % k);
    return l;
}

Projection as_projection(const MatrixXd& coords, const Dataset& d) {
    Projection p;
    p.coords = coords;
    p.dataset_id = d.id;
    for (const auto& it : d.items) p.labels.push_back(it.label);
    return p;
}

}  // namespace

TEST(Silhouette, HandExample) {
    const MatrixXd x = pts({{0, 0}, {0, 1}, {10, 0}, {10, 1}});
    const double b = (10.0 + std::sqrt(101.0)) / 2.0;
    EXPECT_NEAR(silhouette(x, {"a", "a", "b", "b"}), (b - 1.0) / b, 1e-12);
    EXPECT_NEAR(silhouette(x, {"a", "a", "b", "b"}), 0.900, 1e-3);
}

TEST(Silhouette, IdenticalClustersAndErrors) {
    // Identical point sets: a = S/(m-1) and b = S/m, so the score tends to 0
    // as clusters grow and is exactly 0 when every point coincides.
    const MatrixXd base = fixtures::random_matrix(200, 2, 30);
    MatrixXd twice(400, 2);
    twice << base, base;
    Labels ab(200, "a");
    ab.insert(ab.end(), 200, "b");
    EXPECT_LT(std::abs(silhouette(twice, ab)), 0.01);
    EXPECT_EQ(silhouette(MatrixXd::Zero(4, 2), {"a", "a", "b", "b"}), 0.0);
    const MatrixXd x = pts({{0, 0}, {1, 0}, {0, 0}, {1, 0}});
    EXPECT_THROW(silhouette(x, {"a", "a", "a", "a"}), UndefinedMetricError);
    EXPECT_THROW(silhouette(x, {"a", "b", "c", "d"}), UndefinedMetricError);
    // Singletons contribute zero.
    const MatrixXd y = pts({{0, 0}, {0, 1}, {10, 0}});
    const double s = silhouette(y, {"a", "a", "b"});
    EXPECT_NEAR(s, oracle::silhouette(fixtures::to_points(y), {"a", "a", "b"}), 1e-12);
}

TEST(Silhouette, MatchesOracleAndIsSimilarityInvariant) {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd x = fixtures::random_matrix(25, 2, 100 + trial);
        const Labels l = random_labels(25, 3, rng);
        const double s = silhouette(x, l);
        EXPECT_NEAR(s, oracle::silhouette(fixtures::to_points(x), l), 1e-9);
        Eigen::Matrix2d rot;
        rot << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
        const MatrixXd moved = ((x * rot.transpose()) * 3.5).rowwise() + Eigen::RowVector2d(4, -9);
        EXPECT_NEAR(silhouette(moved, l), s, 1e-12);
    }
}

TEST(DaviesBouldin, Examples) {
    EXPECT_EQ(davies_bouldin(pts({{0, 0}, {50, 0}}), {"a", "b"}), 0.0);
    const MatrixXd x = pts({{-1, 0}, {1, 0}, {99, 0}, {101, 0}});
    EXPECT_NEAR(davies_bouldin(x, {"a", "a", "b", "b"}), 2.0 / 100.0, 1e-15);
    EXPECT_THROW(davies_bouldin(pts({{0, 0}, {1, 1}, {1, 1}, {0, 0}}), {"a", "a", "b", "b"}), UndefinedMetricError);
}

TEST(DaviesBouldin, MatchesOracleAndInvariances) {
    std::mt19937 rng(32);
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd x = fixtures::random_matrix(20, 2, 200 + trial);
        const Labels l = random_labels(20, 4, rng);
        const double db = davies_bouldin(x, l);
        EXPECT_NEAR(db, oracle::davies_bouldin(fixtures::to_points(x), l), 1e-9);
        EXPECT_NEAR(davies_bouldin((x * 7.0).rowwise() + Eigen::RowVector2d(1, 2), l), db, 1e-9);
    }
}

TEST(LanguageCoherence, Examples) {
    const MatrixXd x = fixtures::random_matrix(12, 2, 33);
    EXPECT_EQ(language_coherence(x, Labels(12, "zh"), 5), 1.0);
    EXPECT_EQ(language_coherence(x.topRows(6), Labels(6, "zh"), 5), 1.0);
    // Alternating tags around a closed ring: both nearest neighbours differ.
    const int n = 16;
    MatrixXd ring(n, 2);
    Labels tags;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * std::acos(-1.0) * i / n;
        ring.row(i) << std::cos(a), std::sin(a);
        tags.push_back(i % 2 ? "en" : "zh");
    }
    EXPECT_NEAR(language_coherence(ring, tags, 2), 0.0, 1e-15);
}

TEST(Connectivity, Examples) {
    const MatrixXd x = fixtures::random_matrix(121, 2, 34);
    const GraphStats g = connectivity_graph_stats(x, 1.0);
    EXPECT_EQ(g.total_edges, 7260u);
    EXPECT_EQ(g.connected_components, 1u);
    EXPECT_EQ(g.graph_density, 1.0);
    EXPECT_EQ(g.clustering_coefficient, 1.0);
    EXPECT_EQ(g.density_mean, 120.0);
    EXPECT_EQ(g.density_std, 0.0);

    const GraphStats path = connectivity_graph_stats(pts({{0, 0}, {1, 0}, {2, 0}}), 0.5);
    EXPECT_EQ(path.total_edges, 2u);
    EXPECT_NEAR(path.graph_density, 2.0 / 3.0, 1e-15);
    EXPECT_EQ(path.clustering_coefficient, 0.0);
    EXPECT_EQ(path.connected_components, 1u);

    const GraphStats two = connectivity_graph_stats(pts({{0, 0}, {3, 4}}), 1.0);
    EXPECT_EQ(two.total_edges, 1u);
    EXPECT_EQ(two.graph_density, 1.0);
    EXPECT_EQ(two.connected_components, 1u);

    const GraphStats split = connectivity_graph_stats(pts({{0, 0}, {0.1, 0}, {10, 0}, {10.1, 0}}), 0.05);
    EXPECT_EQ(split.connected_components, 2u);
    EXPECT_EQ(split.total_edges, 2u);
}

TEST(Connectivity, KnnMode) {
    const GraphStats g = knn_graph_stats(pts({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}}), 1);
    EXPECT_EQ(g.total_edges, 4u);
    EXPECT_EQ(g.connected_components, 1u);
}

TEST(Hull, Examples) {
    EXPECT_DOUBLE_EQ(polygon_area(convex_hull(pts({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}}))), 1.0);
    EXPECT_EQ(polygon_area(convex_hull(pts({{0, 0}, {1, 1}, {2, 2}}))), 0.0);
    const HullAreas h = convex_hull_areas(pts({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {5, 5}, {6, 6}}),
                                          {"sq", "sq", "sq", "sq", "pair", "pair"});
    EXPECT_DOUBLE_EQ(h.per_label.at("sq"), 1.0);
    EXPECT_EQ(h.per_label.at("pair"), 0.0);
    EXPECT_DOUBLE_EQ(h.total_hull_area, 1.0);
    EXPECT_DOUBLE_EQ(h.mean_hull_area, 0.5);
}

TEST(Hull, FiveEqualClustersRatio) {
    MatrixXd x(15, 2);
    Labels l;
    const double s = std::sqrt(2 * 0.0031);  // right triangle with legs s has area 0.0031
    for (int c = 0; c < 5; ++c) {
        x.row(3 * c) << 10 * c, 0;
        x.row(3 * c + 1) << 10 * c + s, 0;
        x.row(3 * c + 2) << 10 * c, s;
        for (int k = 0; k < 3; ++k) l.push_back("c" + std::to_string(c));
    }
    const HullAreas h = convex_hull_areas(x, l);
    EXPECT_NEAR(h.total_hull_area, 0.0155, 1e-12);
    EXPECT_NEAR(h.mean_hull_area, 0.0031, 1e-12);
}

TEST(Hull, MatchesOracle) {
    std::mt19937 rng(35);
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd x = fixtures::random_matrix(30, 2, 300 + trial);
        const Labels l = random_labels(30, 3, rng);
        const HullAreas h = convex_hull_areas(x, l);
        for (const auto& [name, area] : h.per_label) {
            oracle::Points members;
            for (int i = 0; i < 30; ++i)
                if (l[i] == name) members.push_back({x(i, 0), x(i, 1)});
            EXPECT_NEAR(area, oracle::hull_area(members), 1e-9);
            EXPECT_GE(area, 0.0);
        }
    }
}

TEST(BranchLinearity, Examples) {
    BranchSpec b{"seq", "", {0, 1, 2, 3, 4}};
    const auto line = branch_linearity(pts({{0, 0}, {1, 2}, {2, 4}, {3, 6}, {4, 8}}), b);
    EXPECT_NEAR(line.variance_ratio, 1.0, 1e-12);
    EXPECT_NEAR(std::abs(line.spearman), 1.0, 1e-12);

    const int n = 24;
    MatrixXd circle(n, 2);
    BranchSpec ring{"ring", "", {}};
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * std::acos(-1.0) * i / n;
        circle.row(i) << std::cos(a), std::sin(a);
        ring.indices.push_back(static_cast<std::size_t>(i));
    }
    EXPECT_NEAR(branch_linearity(circle, ring).variance_ratio, 0.5, 1e-9);

    EXPECT_THROW(branch_linearity(pts({{1, 1}, {1, 1}, {1, 1}}), BranchSpec{"c", "", {0, 1, 2}}), UndefinedMetricError);
    EXPECT_THROW(branch_linearity(pts({{1, 1}, {2, 1}}), BranchSpec{"c", "", {0, 1}}), ValidationError);
}

TEST(BranchLinearity, NoisyLine) {
    const int n = 40;
    MatrixXd x = fixtures::random_matrix(n, 2, 36, 0.05 * n);
    BranchSpec b{"seq", "", {}};
    for (int i = 0; i < n; ++i) {
        x(i, 0) += i;
        b.indices.push_back(static_cast<std::size_t>(i));
    }
    EXPECT_GT(branch_linearity(x, b).variance_ratio, 0.9);
}

TEST(BranchLinearity, MatchesOracle) {
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd x = fixtures::random_matrix(20, 2, 400 + trial);
        std::vector<std::size_t> idx{1, 4, 5, 9, 12, 13, 17};
        oracle::Points sub;
        for (auto i : idx) sub.push_back({x(static_cast<Eigen::Index>(i), 0), x(static_cast<Eigen::Index>(i), 1)});
        const auto got = branch_linearity(x, BranchSpec{"b", "", idx});
        const auto want = oracle::branch_linearity(sub);
        EXPECT_NEAR(got.variance_ratio, want.variance_ratio, 1e-9);
        EXPECT_NEAR(std::abs(got.spearman), std::abs(want.spearman), 1e-9);
    }
}

TEST(DiscoverBranches, GroupsByCategoryAndRoot) {
    std::vector<LexicalItem> items{
        fixtures::item("a2", "n", ItemClass::functional, "zxx", 2),
        fixtures::item("a0", "n", ItemClass::functional, "zxx", 0),
        fixtures::item("x", "n"),
        fixtures::item("a1", "n", ItemClass::functional, "zxx", 1),
        fixtures::item("b0", "m", ItemClass::functional, "zxx", 0),
        fixtures::item("b1", "m", ItemClass::functional, "zxx", 1),
    };
    auto r0 = fixtures::item("r0", "n", ItemClass::compositional, "zxx", 0);
    r0.network_root = "子";
    items.push_back(r0);
    const auto bs = discover_branches(fixtures::make_dataset("d", items));
    ASSERT_EQ(bs.size(), 1u);
    EXPECT_EQ(bs[0].name(), "n");
    EXPECT_EQ(bs[0].indices, (std::vector<std::size_t>{1, 3, 0}));
}

TEST(Spearman, TiesUseAverageRanks) {
    EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), oracle::spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 1e-15);
    EXPECT_NEAR(spearman({1, 2, 3}, {3, 2, 1}), -1.0, 1e-15);
}

TEST(GlobalPreservation, Examples) {
    const MatrixXd x = fixtures::random_matrix(30, 2, 37);
    EXPECT_NEAR(global_preservation(x, x), 1.0, 1e-12);

    const MatrixXd hi = fixtures::random_matrix(50, 6, 38);
    MatrixXd shuffled = hi;
    std::vector<int> perm(50);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(38));
    for (int i = 0; i < 50; ++i) shuffled.row(i) = hi.row(perm[i]);
    EXPECT_LT(std::abs(global_preservation(hi, shuffled.leftCols(2))), 0.3);

    const MatrixXd real = fixtures::random_matrix(20, 2, 39) * fixtures::random_matrix(2, 8, 40);
    const AlignedData data = align_matrix(fixtures::labelled(Labels(20, "c")), real);
    EXPECT_NEAR(global_preservation(real, cmds_project(data, 2).coords), 1.0, 1e-9);

    EXPECT_THROW(global_preservation(MatrixXd::Ones(5, 2), MatrixXd::Ones(5, 2)), UndefinedMetricError);
    EXPECT_THROW(global_preservation(x.topRows(3), x.topRows(3)), ValidationError);
}

TEST(GlobalPreservation, MatchesOracle) {
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd hi = fixtures::random_matrix(15 + trial, 5, 500 + trial);
        const MatrixXd lo = fixtures::random_matrix(15 + trial, 2, 600 + trial);
        EXPECT_NEAR(global_preservation(hi, lo),
                    oracle::global_preservation(fixtures::to_points(hi), fixtures::to_points(lo)), 1e-9);
    }
}

TEST(VoidAnalysis, SaturatedLatticeHasNoVoids) {
    const VoidAnalysis v = void_analysis(fixtures::lattice(40));
    EXPECT_EQ(v.void_count, 0u);
    EXPECT_EQ(v.total_void_area, 0.0);
}

TEST(VoidAnalysis, HoleIsFound) {
    const VoidAnalysis v = void_analysis(fixtures::lattice(40, true, 15.0, 25.0));
    ASSERT_GE(v.void_count, 1u);
    EXPECT_EQ(v.void_count, v.voids.size());
    const auto& big = *std::max_element(v.voids.begin(), v.voids.end(),
                                        [](const auto& a, const auto& b) { return a.area < b.area; });
    EXPECT_GT(big.centroid.x(), 15.0);
    EXPECT_LT(big.centroid.x(), 25.0);
    EXPECT_GT(big.centroid.y(), 15.0);
    EXPECT_LT(big.centroid.y(), 25.0);
    EXPECT_GT(v.mean_void_distance, v.threshold);
    EXPECT_THROW(void_analysis(MatrixXd::Ones(5, 2)), UndefinedMetricError);
}

TEST(ChiSquare, Examples) {
    MatrixXd balanced(12, 2);
    for (int i = 0; i < 12; ++i) balanced.row(i) << (i % 2 ? 1.0 : -1.0) * (1 + i), ((i / 2) % 2 ? 1.0 : -1.0) * (2 + i);
    EXPECT_EQ(spatial_chi_square(balanced), 1.0);

    const MatrixXd corner = fixtures::random_matrix(100, 2, 41).cwiseAbs().array() + 0.5;
    const double p = spatial_chi_square(corner);
    EXPECT_LT(p, 1e-10);
    EXPECT_GT(p, 0.0);
    // Statistic 300 with 3 degrees of freedom.
    const double x = 150.0;
    const double q = std::erfc(std::sqrt(x)) + 2.0 * std::sqrt(x / std::acos(-1.0)) * std::exp(-x);
    EXPECT_NEAR(p / q, 1.0, 1e-9);
    EXPECT_THROW(spatial_chi_square(corner.topRows(9)), ValidationError);
}

TEST(IntraCluster, Examples) {
    const auto icd = intra_cluster_distance(pts({{0, 0}, {0, 1}, {1, 0}}), {"a", "a", "a"});
    EXPECT_NEAR(icd.overall, (2.0 + std::sqrt(2.0)) / 3.0, 1e-15);
    EXPECT_NEAR(icd.overall, 1.138, 1e-3);
    EXPECT_EQ(intra_cluster_distance(MatrixXd::Ones(4, 2), Labels(4, "a")).overall, 0.0);
    const auto single = intra_cluster_distance(pts({{0, 0}, {0, 1}, {5, 5}}), {"a", "a", "b"});
    EXPECT_EQ(single.warnings.size(), 1u);
    EXPECT_EQ(single.overall, 1.0);
}

TEST(TwoDimensionalMetrics, RejectOneDimensionalCoords) {
    EXPECT_THROW(convex_hull_areas(MatrixXd::Ones(4, 1), Labels(4, "a")), UndefinedMetricError);
    EXPECT_THROW(spatial_chi_square(MatrixXd::Random(12, 1)), UndefinedMetricError);
}

TEST(FullReport, ThreeBlobsAllFieldsPopulated) {
    const auto fx = fixtures::cluster_branch_fixture();
    const Projection p = phate_project(fx.data, PhateParams{});
    const MetricsReport r = full_report(fx.data, p);
    EXPECT_TRUE(r.absent.empty()) << r.absent.begin()->first << ": " << r.absent.begin()->second;
    ASSERT_TRUE(r.silhouette);
    EXPECT_GT(*r.silhouette, 0.5);
    ASSERT_TRUE(r.void_count);
    ASSERT_TRUE(r.global_preservation);
    ASSERT_EQ(r.branches.size(), 1u);
    EXPECT_EQ(r.branches[0].name, "branch");
    EXPECT_EQ(r.item_count, 90u);
    EXPECT_EQ(r.method, "phate");
}

TEST(FullReport, SingleCategoryIsPartial) {
    const AlignedData data = align_matrix(fixtures::labelled(Labels(20, "only")), fixtures::random_matrix(20, 2, 42));
    const MetricsReport r = full_report(data, as_projection(data.matrix, data.dataset));
    EXPECT_FALSE(r.silhouette);
    EXPECT_FALSE(r.davies_bouldin);
    EXPECT_TRUE(r.absent.count("silhouette"));
    EXPECT_TRUE(r.absent.count("davies_bouldin"));
    EXPECT_TRUE(r.absent.count("linearity_score"));
    EXPECT_TRUE(r.total_edges);
    EXPECT_TRUE(r.chi_square_p);
    EXPECT_TRUE(r.global_preservation);
}

TEST(FullReport, CompleteGraphOn121Points) {
    const AlignedData data = align_matrix(fixtures::labelled(Labels(121, "c")), fixtures::random_matrix(121, 4, 43));
    const MetricsReport r = full_report(data, as_projection(pca_project(data, 2).coords, data.dataset));
    EXPECT_EQ(r.total_edges, 7260u);
}

TEST(FullReport, NoEmbeddingsMeansNoGlobalPreservation) {
    const Dataset d = fixtures::labelled({"a", "a", "a", "b", "b", "b"});
    const MatrixXd coords = fixtures::random_matrix(6, 2, 44);
    AlignedData data = align_matrix(d, MatrixXd(6, 0));
    const MetricsReport r = full_report(data, as_projection(coords, d));
    EXPECT_FALSE(r.global_preservation);
    EXPECT_TRUE(r.absent.count("global_preservation"));
    EXPECT_TRUE(r.silhouette);
}

TEST(FullReport, LabelMismatchRejected) {
    const Dataset d = fixtures::labelled({"a", "b", "a", "b"});
    Projection p = as_projection(fixtures::random_matrix(4, 2, 45), d);
    std::swap(p.labels[0], p.labels[1]);
    EXPECT_THROW(full_report(align_matrix(d, MatrixXd(4, 0)), p), ValidationError);
}

TEST(ReportIo, TextAndJsonRoundTrip) {
    const auto fx = fixtures::cluster_branch_fixture();
    const MetricsReport r = full_report(fx.data, phate_project(fx.data, PhateParams{}));
    const MetricsReport back = report_from_json(report_to_json(r));
    EXPECT_EQ(back, r);

    fixtures::TempDir tmp;
    export_report(r, tmp.path());
    EXPECT_EQ(import_report(tmp.path()), r);

    const std::string text = format_report_text(r);
    for (const auto& key : report_field_names()) EXPECT_NE(text.find(key + "="), std::string::npos) << key;
}

TEST(ReportIo, AbsentFieldsSurvive) {
    const AlignedData data = align_matrix(fixtures::labelled(Labels(12, "only")), fixtures::random_matrix(12, 2, 46));
    const MetricsReport r = full_report(data, as_projection(data.matrix, data.dataset));
    EXPECT_EQ(report_from_json(report_to_json(r)), r);
    EXPECT_NE(format_report_text(r).find("silhouette=absent:"), std::string::npos);
}
