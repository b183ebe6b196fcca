#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "semgeo/error.hpp"
#include "semgeo/metrics.hpp"

namespace semgeo {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Visits the metric fields in report_field_names() order.
template <class R, class F>
void for_each_field(R& r, F&& f) {
    f("silhouette", r.silhouette);
    f("davies_bouldin", r.davies_bouldin);
    f("language_coherence", r.language_coherence);
    f("connected_components", r.connected_components);
    f("total_edges", r.total_edges);
    f("clustering_coefficient", r.clustering_coefficient);
    f("graph_density", r.graph_density);
    f("density_mean", r.density_mean);
    f("density_std", r.density_std);
    f("mean_hull_area", r.mean_hull_area);
    f("total_hull_area", r.total_hull_area);
    f("linearity_score", r.linearity_score);
    f("spearman_linearity", r.spearman_linearity);
    f("void_count", r.void_count);
    f("mean_void_distance", r.mean_void_distance);
    f("total_void_area", r.total_void_area);
    f("chi_square_p", r.chi_square_p);
    f("global_preservation", r.global_preservation);
    f("intra_cluster_distance_mean", r.intra_cluster_distance_mean);
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
std::string format_value(std::size_t v) { return std::to_string(v); }

const char* graph_mode_name(GraphMode m) { return m == GraphMode::knn ? "knn" : "epsilon"; }

json config_json(const MetricsConfig& c) {
    return {
        {"radius_fraction", c.radius_fraction},
        {"graph_mode", graph_mode_name(c.graph_mode)},
        {"graph_k", c.graph_k},
        {"grid_resolution", c.grid_resolution},
        {"radius_multiplier", c.radius_multiplier},
        {"coherence_k", c.coherence_k},
        {"chi_cells", c.chi_cells},
        {"cluster_metrics_on_embeddings", c.cluster_metrics_on_embeddings},
    };
}

MetricsConfig config_from(const json& j) {
    MetricsConfig c;
    c.radius_fraction = j.value("radius_fraction", c.radius_fraction);
    c.graph_mode = j.value("graph_mode", std::string("epsilon")) == "knn" ? GraphMode::knn : GraphMode::epsilon;
    c.graph_k = j.value("graph_k", c.graph_k);
    c.grid_resolution = j.value("grid_resolution", c.grid_resolution);
    c.radius_multiplier = j.value("radius_multiplier", c.radius_multiplier);
    c.coherence_k = j.value("coherence_k", c.coherence_k);
    c.chi_cells = j.value("chi_cells", c.chi_cells);
    c.cluster_metrics_on_embeddings = j.value("cluster_metrics_on_embeddings", false);
    return c;
}

}  // namespace

std::string format_report_text(const MetricsReport& report) {
    std::ostringstream out;
    for_each_field(report, [&](const char* name, const auto& field) {
        out << name << '=';
        if (field) {
            out << format_value(*field);
        } else {
            auto it = report.absent.find(name);
            std::string reason = it == report.absent.end() ? "not computed" : it->second;
            for (char& ch : reason) {
                if (ch == '\n' || ch == '\r') ch = ' ';
            }
            out << "absent:" << reason;
        }
        out << '\n';
    });
    return out.str();
}

std::string report_to_json(const MetricsReport& report) {
    json metrics = json::object();
    for_each_field(report, [&](const char* name, const auto& field) {
        metrics[name] = field ? json(*field) : json(nullptr);
    });
    json branches = json::array();
    for (const auto& b : report.branches) {
        branches.push_back({{"name", b.name}, {"size", b.size}, {"variance_ratio", b.variance_ratio},
                            {"spearman", b.spearman}});
    }
    json j = {
        {"dataset_id", report.dataset_id},
        {"method", report.method},
        {"item_count", report.item_count},
        {"projection_checksum", report.projection_checksum},
        {"metrics", metrics},
        {"absent", report.absent},
        {"config", config_json(report.config)},
        {"branches", branches},
        {"warnings", report.warnings},
    };
    return j.dump(2);
}

MetricsReport report_from_json(std::string_view text) {
    MetricsReport r;
    try {
        const json j = json::parse(text);
        r.dataset_id = j.value("dataset_id", "");
        r.method = j.value("method", "");
        r.item_count = j.value("item_count", std::size_t{0});
        r.projection_checksum = j.value("projection_checksum", "");
        const json& m = j.at("metrics");
        for_each_field(r, [&](const char* name, auto& field) {
            if (m.contains(name) && !m.at(name).is_null()) field = m.at(name).get<typename std::decay_t<decltype(field)>::value_type>();
        });
        r.absent = j.value("absent", std::map<std::string, std::string>{});
        if (j.contains("config")) r.config = config_from(j.at("config"));
        for (const auto& b : j.value("branches", json::array())) {
            r.branches.push_back({b.at("name").get<std::string>(), b.at("size").get<std::size_t>(),
                                  b.at("variance_ratio").get<double>(), b.at("spearman").get<double>()});
        }
        r.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed report document: ") + e.what());
    }
    return r;
}

void export_report(const MetricsReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream txt(dir / "report.txt", std::ios::binary | std::ios::trunc);
    std::ofstream js(dir / "report.json", std::ios::binary | std::ios::trunc);
    if (!txt || !js) throw IoError("cannot write report files in " + dir.string());
    txt << format_report_text(report);
    js << report_to_json(report) << '\n';
    if (!txt || !js) throw IoError("write failed in " + dir.string());
}

MetricsReport import_report(const fs::path& dir) {
    std::ifstream in(dir / "report.json", std::ios::binary);
    if (!in) throw IoError("cannot open " + (dir / "report.json").string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

}  // namespace semgeo
