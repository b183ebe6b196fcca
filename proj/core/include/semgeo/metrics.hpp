#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semgeo/dataset.hpp"
#include "semgeo/embedding.hpp"
#include "semgeo/projection.hpp"

namespace semgeo {

// Cluster labels are arbitrary strings; points sharing a string form a cluster.
using Labels = std::vector<std::string>;

/// Mean silhouette; singleton clusters contribute 0. UndefinedMetricError
/// with fewer than two clusters or when every cluster is a singleton.
double silhouette(const Eigen::MatrixXd& coords, const Labels& labels);

/// UndefinedMetricError with fewer than two clusters or coincident centroids.
double davies_bouldin(const Eigen::MatrixXd& coords, const Labels& labels);

/// Mean fraction of each point's k nearest neighbours (ties by index) that
/// share its tag.
double language_coherence(const Eigen::MatrixXd& coords, const Labels& tags, std::size_t k);

struct GraphStats {
    std::size_t connected_components = 0;
    std::size_t total_edges = 0;
    double clustering_coefficient = 0.0;
    double graph_density = 0.0;
    double density_mean = 0.0;  // mean degree
    double density_std = 0.0;   // population std of degree
};

/// Epsilon graph with radius = radius_fraction * max pairwise distance
/// (distance <= radius is an edge).
GraphStats connectivity_graph_stats(const Eigen::MatrixXd& coords, double radius_fraction);
/// Symmetric kNN graph (i~j when either lists the other).
GraphStats knn_graph_stats(const Eigen::MatrixXd& coords, std::size_t k);

/// Counter-clockwise hull of the first two columns, no repeated endpoint.
std::vector<Eigen::Vector2d> convex_hull(const Eigen::MatrixXd& points);
double polygon_area(const std::vector<Eigen::Vector2d>& polygon);

struct HullAreas {
    std::map<std::string, double> per_label;
    double mean_hull_area = 0.0;
    double total_hull_area = 0.0;
};
HullAreas convex_hull_areas(const Eigen::MatrixXd& coords, const Labels& labels);

struct BranchSpec {
    std::string category;
    std::string network_root;          // empty when absent
    std::vector<std::size_t> indices;  // ordered by sequence_index

    std::string name() const { return network_root.empty() ? category : category + "/" + network_root; }
};

/// Groups of >= min_size items sharing (category, network_root) that carry a
/// sequence_index, in order of first appearance.
std::vector<BranchSpec> discover_branches(const Dataset& dataset, std::size_t min_size = 3);

struct BranchLinearity {
    double variance_ratio = 1.0;  // lambda1 / (lambda1 + lambda2) of the branch covariance
    double spearman = 0.0;        // branch order vs position along the first principal axis
};
BranchLinearity branch_linearity(const Eigen::MatrixXd& coords, const BranchSpec& branch);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

double global_preservation(const Eigen::MatrixXd& high_dim, const Eigen::MatrixXd& coords);

struct VoidRegion {
    std::vector<std::size_t> cell_indices;  // row-major, row = y bin
    double area = 0.0;
    double mean_distance_to_nearest_point = 0.0;
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
};

struct VoidAnalysis {
    std::vector<VoidRegion> voids;
    std::size_t void_count = 0;
    double mean_void_distance = 0.0;
    double total_void_area = 0.0;
    double threshold = 0.0;
};

VoidAnalysis void_analysis(const Eigen::MatrixXd& coords, std::size_t grid_resolution = 50,
                           double radius_multiplier = 2.0);

/// p-value of the chi-square uniformity test over a cells x cells grid centred
/// on the origin (2 x 2 = the coordinate quadrants).
double spatial_chi_square(const Eigen::MatrixXd& coords, std::size_t cells_per_axis = 2);

struct IntraClusterDistance {
    std::map<std::string, double> per_label;
    double overall = 0.0;
    std::vector<std::string> warnings;
};
IntraClusterDistance intra_cluster_distance(const Eigen::MatrixXd& points, const Labels& labels);

enum class GraphMode { epsilon, knn };

struct MetricsConfig {
    double radius_fraction = 1.0;
    GraphMode graph_mode = GraphMode::epsilon;
    std::size_t graph_k = 10;
    std::size_t grid_resolution = 50;
    double radius_multiplier = 2.0;
    std::size_t coherence_k = 10;
    std::size_t chi_cells = 2;
    bool cluster_metrics_on_embeddings = false;  // silhouette / Davies-Bouldin on raw rows

    bool operator==(const MetricsConfig&) const = default;
};

struct BranchResult {
    std::string name;
    std::size_t size = 0;
    double variance_ratio = 0.0;
    double spearman = 0.0;

    bool operator==(const BranchResult&) const = default;
};

struct MetricsReport {
    std::optional<double> silhouette;
    std::optional<double> davies_bouldin;
    std::optional<double> language_coherence;
    std::optional<std::size_t> connected_components;
    std::optional<std::size_t> total_edges;
    std::optional<double> clustering_coefficient;
    std::optional<double> graph_density;
    std::optional<double> density_mean;
    std::optional<double> density_std;
    std::optional<double> mean_hull_area;
    std::optional<double> total_hull_area;
    std::optional<double> linearity_score;
    std::optional<double> spearman_linearity;
    std::optional<std::size_t> void_count;
    std::optional<double> mean_void_distance;
    std::optional<double> total_void_area;
    std::optional<double> chi_square_p;
    std::optional<double> global_preservation;
    std::optional<double> intra_cluster_distance_mean;

    std::map<std::string, std::string> absent;  // field name -> reason
    MetricsConfig config;
    std::vector<BranchResult> branches;
    std::string dataset_id;
    std::string method;
    std::size_t item_count = 0;
    std::string projection_checksum;
    std::vector<std::string> warnings;

    bool operator==(const MetricsReport&) const = default;
};

/// Field names of MetricsReport in report order.
const std::vector<std::string>& report_field_names();

/// Computes every metric; failures become entries in `absent`. A matrix with
/// zero columns means no embeddings are available (global_preservation absent).
MetricsReport full_report(const AlignedData& data, const Projection& projection, const MetricsConfig& config = {});

/// `key=value` lines in report_field_names() order, absent ones as
/// `key=absent:<reason>`.
std::string format_report_text(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(std::string_view text);

/// Writes report.txt and report.json into `dir`.
void export_report(const MetricsReport& report, const std::filesystem::path& dir);
MetricsReport import_report(const std::filesystem::path& dir);

}  // namespace semgeo
