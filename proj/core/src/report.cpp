#include <exception>
#include <functional>

#include "semgeo/error.hpp"
#include "semgeo/metrics.hpp"

namespace semgeo {

namespace {

// Runs one metric; on failure marks every listed field absent with the reason.
void attempt(MetricsReport& report, std::initializer_list<const char*> fields, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        for (const char* f : fields) report.absent[f] = e.what();
    }
}

}  // namespace

const std::vector<std::string>& report_field_names() {
    static const std::vector<std::string> names = {
        "silhouette",         "davies_bouldin",     "language_coherence",
        "connected_components", "total_edges",      "clustering_coefficient",
        "graph_density",      "density_mean",       "density_std",
        "mean_hull_area",     "total_hull_area",    "linearity_score",
        "spearman_linearity", "void_count",         "mean_void_distance",
        "total_void_area",    "chi_square_p",       "global_preservation",
        "intra_cluster_distance_mean",
    };
    return names;
}

MetricsReport full_report(const AlignedData& data, const Projection& projection, const MetricsConfig& config) {
    const auto& items = data.dataset.items;
    if (static_cast<std::size_t>(projection.coords.rows()) != items.size() ||
        static_cast<std::size_t>(data.matrix.rows()) != items.size()) {
        throw ValidationError("projection has " + std::to_string(projection.coords.rows()) + " rows for " +
                              std::to_string(items.size()) + " dataset items");
    }
    if (!projection.labels.empty()) {
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (projection.labels[i] != items[i].label) {
                throw ValidationError("projection row " + std::to_string(i) + " is '" + projection.labels[i] +
                                      "' but the dataset has '" + items[i].label + "'");
            }
        }
    }

    MetricsReport r;
    r.config = config;
    r.dataset_id = data.dataset.id;
    r.method = std::string(to_string(projection.method));
    r.item_count = items.size();
    r.projection_checksum = coords_checksum(projection.coords);

    const auto& xy = projection.coords;
    Labels categories, languages;
    for (const auto& it : items) {
        categories.push_back(it.category);
        languages.push_back(it.language);
    }
    const Eigen::MatrixXd& cluster_space = config.cluster_metrics_on_embeddings ? data.matrix : xy;
    if (config.cluster_metrics_on_embeddings && data.matrix.cols() == 0) {
        throw ValidationError("cluster metrics on embeddings requested without an embedding matrix");
    }

    attempt(r, {"silhouette"}, [&] { r.silhouette = silhouette(cluster_space, categories); });
    attempt(r, {"davies_bouldin"}, [&] { r.davies_bouldin = davies_bouldin(cluster_space, categories); });
    attempt(r, {"language_coherence"}, [&] {
        if (items.size() < 2) throw UndefinedMetricError("language coherence needs at least 2 points");
        r.language_coherence = language_coherence(xy, languages, std::min(config.coherence_k, items.size() - 1));
    });
    attempt(r,
            {"connected_components", "total_edges", "clustering_coefficient", "graph_density", "density_mean",
             "density_std"},
            [&] {
                const auto g = config.graph_mode == GraphMode::knn ? knn_graph_stats(xy, config.graph_k)
                                                                   : connectivity_graph_stats(xy, config.radius_fraction);
                r.connected_components = g.connected_components;
                r.total_edges = g.total_edges;
                r.clustering_coefficient = g.clustering_coefficient;
                r.graph_density = g.graph_density;
                r.density_mean = g.density_mean;
                r.density_std = g.density_std;
            });
    attempt(r, {"mean_hull_area", "total_hull_area"}, [&] {
        const auto h = convex_hull_areas(xy, categories);
        r.mean_hull_area = h.mean_hull_area;
        r.total_hull_area = h.total_hull_area;
    });
    attempt(r, {"linearity_score", "spearman_linearity"}, [&] {
        const auto branches = discover_branches(data.dataset);
        if (branches.empty()) throw UndefinedMetricError("no ordered branch with at least 3 items");
        double vr = 0.0, sp = 0.0;
        for (const auto& b : branches) {
            try {
                const auto bl = branch_linearity(xy, b);
                r.branches.push_back({b.name(), b.indices.size(), bl.variance_ratio, bl.spearman});
                vr += bl.variance_ratio;
                sp += std::abs(bl.spearman);
            } catch (const Error& e) {
                r.warnings.push_back("branch '" + b.name() + "' skipped: " + e.what());
            }
        }
        if (r.branches.empty()) throw UndefinedMetricError("every branch was degenerate");
        r.linearity_score = vr / static_cast<double>(r.branches.size());
        r.spearman_linearity = sp / static_cast<double>(r.branches.size());
    });
    attempt(r, {"void_count", "mean_void_distance", "total_void_area"}, [&] {
        const auto v = void_analysis(xy, config.grid_resolution, config.radius_multiplier);
        r.void_count = v.void_count;
        r.mean_void_distance = v.mean_void_distance;
        r.total_void_area = v.total_void_area;
    });
    attempt(r, {"chi_square_p"}, [&] { r.chi_square_p = spatial_chi_square(xy, config.chi_cells); });
    attempt(r, {"global_preservation"}, [&] {
        if (data.matrix.cols() == 0) throw UndefinedMetricError("no embedding matrix available");
        r.global_preservation = global_preservation(data.matrix, xy);
    });
    attempt(r, {"intra_cluster_distance_mean"}, [&] {
        auto icd = intra_cluster_distance(xy, categories);
        r.intra_cluster_distance_mean = icd.overall;
        r.warnings.insert(r.warnings.end(), icd.warnings.begin(), icd.warnings.end());
    });
    return r;
}

}  // namespace semgeo
