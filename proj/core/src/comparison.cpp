#include "semgeo/comparison.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>

#include "csv.hpp"
#include "semgeo/error.hpp"

namespace semgeo {
namespace fs = std::filesystem;

std::vector<ComparisonCell> run_matrix(const std::vector<AlignedData>& datasets, const std::vector<MethodId>& methods,
                                       const std::vector<ProjectionParams>& param_grid, const MetricsConfig& metrics) {
    if (datasets.empty() || methods.empty() || param_grid.empty()) {
        throw ValidationError("comparison grid is empty (need datasets, methods and at least one param set)");
    }
    std::vector<ComparisonCell> cells;
    cells.reserve(datasets.size() * methods.size() * param_grid.size());
    for (const auto& data : datasets) {
        for (MethodId method : methods) {
            for (ProjectionParams params : param_grid) {
                params.method = method;
                ComparisonCell cell;
                cell.dataset_id = data.dataset.id;
                cell.method = method;
                cell.params = params;
                cell.params_hash = params_hash(params);
                const auto start = std::chrono::steady_clock::now();
                try {
                    Projection p = project(data, params);
                    cell.report = full_report(data, p, metrics);
                    cell.projection = std::move(p);
                    cell.status = "ok";
                } catch (const std::exception& e) {
                    cell.projection.reset();
                    cell.report.reset();
                    cell.status = std::string("failed:") + e.what();
                }
                cell.wall_time_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

std::vector<MethodScore> rank_methods(const std::vector<ComparisonCell>& cells, const RankWeights& weights) {
    struct Acc {
        double sum[3] = {0, 0, 0};
        int count[3] = {0, 0, 0};
    };
    std::map<MethodId, Acc> acc;
    for (const auto& c : cells) {
        if (!c.ok() || !c.report) continue;
        auto& a = acc[c.method];
        const std::optional<double> v[3] = {c.report->silhouette, c.report->linearity_score,
                                            c.report->global_preservation};
        for (int k = 0; k < 3; ++k) {
            if (v[k]) {
                a.sum[k] += *v[k];
                ++a.count[k];
            }
        }
    }

    std::vector<MethodScore> out;
    for (MethodId m : kAllMethods) {
        auto it = acc.find(m);
        if (it == acc.end()) continue;
        MethodScore s;
        s.method = m;
        std::optional<double>* slots[3] = {&s.silhouette, &s.branch_linearity, &s.global_preservation};
        for (int k = 0; k < 3; ++k) {
            if (it->second.count[k]) *slots[k] = it->second.sum[k] / it->second.count[k];
        }
        out.push_back(s);
    }

    const double w[3] = {weights.silhouette, weights.branch_linearity, weights.global_preservation};
    for (int k = 0; k < 3; ++k) {
        auto get = [k](const MethodScore& s) -> const std::optional<double>& {
            return k == 0 ? s.silhouette : k == 1 ? s.branch_linearity : s.global_preservation;
        };
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (const auto& s : out) {
            if (const auto& v = get(s)) {
                lo = any ? std::min(lo, *v) : *v;
                hi = any ? std::max(hi, *v) : *v;
                any = true;
            }
        }
        if (!any || !(hi > lo)) continue;
        for (auto& s : out) {
            if (const auto& v = get(s)) s.score += w[k] * (*v - lo) / (hi - lo);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const MethodScore& a, const MethodScore& b) { return a.score > b.score; });
    return out;
}

std::string cell_dir_name(const ComparisonCell& cell) {
    std::string id = cell.dataset_id;
    for (char& ch : id) {
        if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
    }
    return id + "__" + std::string(to_string(cell.method)) + "__" + cell.params_hash;
}

void export_comparison(const std::vector<ComparisonCell>& cells, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream csv(dir / "comparison.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw IoError("cannot write " + (dir / "comparison.csv").string());
    csv << "dataset,method,params_hash,silhouette,branch_linearity,global_preservation,status,wall_time_ms\n";

    auto num = [](const std::optional<double>& v) -> std::string {
        if (!v) return "";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *v);
        return buf;
    };
    for (const auto& c : cells) {
        char wall[32];
        std::snprintf(wall, sizeof wall, "%.3f", c.wall_time_ms);
        const MetricsReport empty;
        const MetricsReport& r = c.report ? *c.report : empty;
        csv << detail::join_csv_record({c.dataset_id, std::string(to_string(c.method)), c.params_hash, num(r.silhouette),
                                        num(r.linearity_score), num(r.global_preservation), c.status, wall})
            << '\n';
        if (c.ok() && c.projection && c.report) {
            const auto cell_dir = dir / "cells" / cell_dir_name(c);
            export_projection(*c.projection, cell_dir);
            export_report(*c.report, cell_dir);
        }
    }
    if (!csv) throw IoError("write failed for " + (dir / "comparison.csv").string());
}

}  // namespace semgeo
