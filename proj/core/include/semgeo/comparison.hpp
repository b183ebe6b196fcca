#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semgeo/embedding.hpp"
#include "semgeo/metrics.hpp"
#include "semgeo/projection.hpp"

namespace semgeo {

struct ComparisonCell {
    std::string dataset_id;
    MethodId method = MethodId::phate;
    ProjectionParams params;
    std::string params_hash;
    std::optional<Projection> projection;
    std::optional<MetricsReport> report;
    double wall_time_ms = 0.0;
    std::string status;  // "ok" or "failed:<reason>"

    bool ok() const { return status == "ok"; }
};

/// One cell per (dataset, method, params) in that nesting order. The method
/// field of each grid entry is overridden by the method being run. A failing
/// cell is recorded and the run continues.
std::vector<ComparisonCell> run_matrix(const std::vector<AlignedData>& datasets, const std::vector<MethodId>& methods,
                                       const std::vector<ProjectionParams>& param_grid,
                                       const MetricsConfig& metrics = {});

struct RankWeights {
    double silhouette = 1.0;
    double branch_linearity = 1.0;
    double global_preservation = 1.0;
};

struct MethodScore {
    MethodId method = MethodId::phate;
    double score = 0.0;
    // Raw per-method means over successful cells.
    std::optional<double> silhouette;
    std::optional<double> branch_linearity;
    std::optional<double> global_preservation;
};

/// Each criterion is averaged per method, min-max normalised across methods
/// (a criterion with zero range or a missing value contributes 0) and
/// combined by the weights. Descending score, ties in enum order.
std::vector<MethodScore> rank_methods(const std::vector<ComparisonCell>& cells, const RankWeights& weights = {});

/// Writes comparison.csv and cells/<dataset>__<method>__<hash>/ with the
/// projection and report of each successful cell.
void export_comparison(const std::vector<ComparisonCell>& cells, const std::filesystem::path& dir);

/// Directory name used for a cell inside export_comparison's output.
std::string cell_dir_name(const ComparisonCell& cell);

}  // namespace semgeo
