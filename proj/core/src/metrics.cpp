#include "semgeo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "linalg.hpp"
#include "semgeo/error.hpp"
#include "semgeo/phate.hpp"

namespace semgeo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double dist(const MatrixXd& x, Index i, Index j) { return (x.row(i) - x.row(j)).norm(); }

void check_labels(const MatrixXd& coords, const Labels& labels) {
    if (static_cast<std::size_t>(coords.rows()) != labels.size()) {
        throw ValidationError("got " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(coords.rows()) + " points");
    }
}

std::map<std::string, std::vector<Index>> group(const Labels& labels) {
    std::map<std::string, std::vector<Index>> g;
    for (std::size_t i = 0; i < labels.size(); ++i) g[labels[i]].push_back(static_cast<Index>(i));
    return g;
}

// Neighbours of i sorted by (distance, index), self excluded.
std::vector<Index> ranked_neighbours(const MatrixXd& d, Index i) {
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(d.rows()));
    for (Index j = 0; j < d.rows(); ++j) {
        if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d(i, a) < d(i, b); });
    return order;
}

GraphStats graph_stats(const std::vector<std::vector<char>>& adj) {
    const std::size_t n = adj.size();
    GraphStats g;
    std::vector<std::size_t> degree(n, 0);
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!adj[i][j]) continue;
            ++g.total_edges;
            ++degree[i];
            ++degree[j];
            parent[find(i)] = find(j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (find(i) == i) ++g.connected_components;
    }

    double cc_sum = 0.0;
    std::vector<std::size_t> nbrs;
    for (std::size_t i = 0; i < n; ++i) {
        if (degree[i] < 2) continue;
        nbrs.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && adj[i][j]) nbrs.push_back(j);
        }
        std::size_t links = 0;
        for (std::size_t a = 0; a < nbrs.size(); ++a) {
            for (std::size_t b = a + 1; b < nbrs.size(); ++b) links += adj[nbrs[a]][nbrs[b]] ? 1 : 0;
        }
        const double possible = 0.5 * static_cast<double>(nbrs.size()) * static_cast<double>(nbrs.size() - 1);
        cc_sum += static_cast<double>(links) / possible;
    }
    const double nd = static_cast<double>(n);
    g.clustering_coefficient = n ? cc_sum / nd : 0.0;
    g.graph_density = n > 1 ? static_cast<double>(g.total_edges) / (0.5 * nd * (nd - 1.0)) : 0.0;
    double mean = 0.0;
    for (auto d : degree) mean += static_cast<double>(d);
    mean /= nd;
    double var = 0.0;
    for (auto d : degree) var += (static_cast<double>(d) - mean) * (static_cast<double>(d) - mean);
    g.density_mean = mean;
    g.density_std = std::sqrt(var / nd);
    return g;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

MatrixXd planar(const MatrixXd& coords, const char* metric) {
    if (coords.cols() < 2) {
        throw UndefinedMetricError(std::string(metric) + " needs at least 2 projection dimensions");
    }
    return coords.leftCols(2);
}

}  // namespace

double silhouette(const MatrixXd& coords, const Labels& labels) {
    check_labels(coords, labels);
    const auto groups = group(labels);
    if (groups.size() < 2) throw UndefinedMetricError("silhouette needs at least 2 clusters");
    if (std::none_of(groups.begin(), groups.end(), [](const auto& g) { return g.second.size() >= 2; })) {
        throw UndefinedMetricError("silhouette needs a cluster with at least 2 points");
    }
    const Index n = coords.rows();
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
        const auto& own = groups.at(labels[i]);
        if (own.size() < 2) continue;
        double a = 0.0;
        for (Index j : own) {
            if (j != i) a += dist(coords, i, j);
        }
        a /= static_cast<double>(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [name, members] : groups) {
            if (name == labels[i]) continue;
            double s = 0.0;
            for (Index j : members) s += dist(coords, i, j);
            b = std::min(b, s / static_cast<double>(members.size()));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

double davies_bouldin(const MatrixXd& coords, const Labels& labels) {
    check_labels(coords, labels);
    const auto groups = group(labels);
    if (groups.size() < 2) throw UndefinedMetricError("Davies-Bouldin needs at least 2 clusters");
    std::vector<std::string> names;
    std::vector<VectorXd> centroids;
    std::vector<double> scatter;
    for (const auto& [name, members] : groups) {
        VectorXd c = VectorXd::Zero(coords.cols());
        for (Index i : members) c += coords.row(i).transpose();
        c /= static_cast<double>(members.size());
        double s = 0.0;
        for (Index i : members) s += (coords.row(i).transpose() - c).norm();
        names.push_back(name);
        centroids.push_back(c);
        scatter.push_back(s / static_cast<double>(members.size()));
    }
    const std::size_t c = names.size();
    double total = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            if (i == j) continue;
            const double m = (centroids[i] - centroids[j]).norm();
            if (!(m > 0.0)) {
                throw UndefinedMetricError("clusters '" + names[i] + "' and '" + names[j] + "' have coincident centroids");
            }
            worst = std::max(worst, (scatter[i] + scatter[j]) / m);
        }
        total += worst;
    }
    return total / static_cast<double>(c);
}

double language_coherence(const MatrixXd& coords, const Labels& tags, std::size_t k) {
    check_labels(coords, tags);
    const auto n = static_cast<std::size_t>(coords.rows());
    if (k == 0) throw ValidationError("coherence k must be positive");
    if (k >= n) throw ValidationError("coherence k=" + std::to_string(k) + " must be smaller than n=" + std::to_string(n));
    const MatrixXd d = pairwise_distances(coords);
    double total = 0.0;
    for (Index i = 0; i < d.rows(); ++i) {
        const auto nb = ranked_neighbours(d, i);
        std::size_t same = 0;
        for (std::size_t r = 0; r < k; ++r) same += tags[nb[r]] == tags[i] ? 1 : 0;
        total += static_cast<double>(same) / static_cast<double>(k);
    }
    return total / static_cast<double>(n);
}

GraphStats connectivity_graph_stats(const MatrixXd& coords, double radius_fraction) {
    if (coords.rows() < 2) throw ValidationError("graph statistics need at least 2 points");
    if (!(radius_fraction > 0.0 && radius_fraction <= 1.0)) {
        throw ValidationError("radius_fraction must lie in (0, 1]");
    }
    const MatrixXd d = pairwise_distances(coords);
    const double radius = radius_fraction * d.maxCoeff();
    const auto n = static_cast<std::size_t>(coords.rows());
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            adj[i][j] = adj[j][i] = d(i, j) <= radius ? 1 : 0;
        }
    }
    return graph_stats(adj);
}

GraphStats knn_graph_stats(const MatrixXd& coords, std::size_t k) {
    const auto n = static_cast<std::size_t>(coords.rows());
    if (n < 2) throw ValidationError("graph statistics need at least 2 points");
    if (k == 0 || k >= n) throw ValidationError("graph k must lie in [1, n-1]");
    const MatrixXd d = pairwise_distances(coords);
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (Index i = 0; i < d.rows(); ++i) {
        const auto nb = ranked_neighbours(d, i);
        for (std::size_t r = 0; r < k; ++r) adj[i][nb[r]] = adj[nb[r]][i] = 1;
    }
    return graph_stats(adj);
}

std::vector<Eigen::Vector2d> convex_hull(const MatrixXd& points) {
    std::vector<Eigen::Vector2d> pts;
    for (Index i = 0; i < points.rows(); ++i) pts.emplace_back(points(i, 0), points(i, 1));
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;

    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
    if (poly.size() < 3) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        s += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * std::abs(s);
}

HullAreas convex_hull_areas(const MatrixXd& coords, const Labels& labels) {
    check_labels(coords, labels);
    const MatrixXd xy = planar(coords, "convex hull area");
    HullAreas out;
    for (const auto& [name, members] : group(labels)) {
        MatrixXd pts(static_cast<Index>(members.size()), 2);
        for (std::size_t r = 0; r < members.size(); ++r) pts.row(static_cast<Index>(r)) = xy.row(members[r]);
        const double a = members.size() < 3 ? 0.0 : polygon_area(convex_hull(pts));
        out.per_label[name] = a;
        out.total_hull_area += a;
    }
    if (!out.per_label.empty()) out.mean_hull_area = out.total_hull_area / static_cast<double>(out.per_label.size());
    return out;
}

std::vector<BranchSpec> discover_branches(const Dataset& dataset, std::size_t min_size) {
    std::vector<BranchSpec> branches;
    std::map<std::pair<std::string, std::string>, std::size_t> slot;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> entries;
    for (std::size_t i = 0; i < dataset.items.size(); ++i) {
        const auto& it = dataset.items[i];
        if (!it.sequence_index) continue;
        auto key = std::make_pair(it.category, it.network_root.value_or(""));
        auto [pos, fresh] = slot.emplace(key, branches.size());
        if (fresh) {
            branches.push_back(BranchSpec{key.first, key.second, {}});
            entries.emplace_back();
        }
        entries[pos->second].emplace_back(*it.sequence_index, i);
    }
    std::vector<BranchSpec> out;
    for (std::size_t b = 0; b < branches.size(); ++b) {
        if (entries[b].size() < min_size) continue;
        std::sort(entries[b].begin(), entries[b].end());
        for (const auto& [seq, idx] : entries[b]) branches[b].indices.push_back(idx);
        out.push_back(std::move(branches[b]));
    }
    return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("spearman inputs differ in length");
    if (a.size() < 2) throw UndefinedMetricError("spearman needs at least 2 observations");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) throw UndefinedMetricError("spearman undefined for a constant input");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

BranchLinearity branch_linearity(const MatrixXd& coords, const BranchSpec& branch) {
    if (branch.indices.size() < 3) throw ValidationError("branch '" + branch.name() + "' has fewer than 3 points");
    const auto m = static_cast<Index>(branch.indices.size());
    MatrixXd pts(m, coords.cols());
    for (Index r = 0; r < m; ++r) {
        const auto idx = branch.indices[static_cast<std::size_t>(r)];
        if (idx >= static_cast<std::size_t>(coords.rows())) throw ValidationError("branch index out of range");
        pts.row(r) = coords.row(static_cast<Index>(idx));
    }
    const MatrixXd centred = pts.rowwise() - pts.colwise().mean();
    const MatrixXd cov = centred.transpose() * centred / static_cast<double>(m);
    const auto eig = detail::sym_eigen_desc(cov);
    const double l1 = eig.values[0];
    const double l2 = eig.values.size() > 1 ? std::max(eig.values[1], 0.0) : 0.0;
    if (!(l1 > 0.0)) throw UndefinedMetricError("branch '" + branch.name() + "' points all coincide");

    BranchLinearity out;
    out.variance_ratio = std::clamp(l1 / (l1 + l2), 0.5, 1.0);
    MatrixXd axis = eig.vectors.col(0);
    detail::orient_columns(axis);
    const VectorXd proj = centred * axis;
    std::vector<double> order(static_cast<std::size_t>(m)), pos(static_cast<std::size_t>(m));
    for (Index r = 0; r < m; ++r) {
        order[r] = static_cast<double>(r);
        pos[r] = proj[r];
    }
    out.spearman = spearman(order, pos);
    return out;
}

double global_preservation(const MatrixXd& high_dim, const MatrixXd& coords) {
    if (high_dim.rows() != coords.rows()) throw ValidationError("global preservation inputs differ in row count");
    if (coords.rows() < 4) throw ValidationError("global preservation needs at least 4 points");
    const MatrixXd dh = pairwise_distances(high_dim);
    const MatrixXd dl = pairwise_distances(coords);
    std::vector<double> a, b;
    for (Index i = 0; i < dh.rows(); ++i) {
        for (Index j = i + 1; j < dh.cols(); ++j) {
            a.push_back(dh(i, j));
            b.push_back(dl(i, j));
        }
    }
    return spearman(a, b);
}

VoidAnalysis void_analysis(const MatrixXd& coords, std::size_t grid_resolution, double radius_multiplier) {
    if (coords.rows() < 3) throw ValidationError("void analysis needs at least 3 points");
    if (grid_resolution < 4) throw ValidationError("grid_resolution must be at least 4");
    if (!(radius_multiplier > 0.0)) throw ValidationError("radius_multiplier must be positive");
    const MatrixXd xy = planar(coords, "void analysis");

    const double x0 = xy.col(0).minCoeff(), x1 = xy.col(0).maxCoeff();
    const double y0 = xy.col(1).minCoeff(), y1 = xy.col(1).maxCoeff();
    if (!(x1 > x0) || !(y1 > y0)) throw UndefinedMetricError("void analysis: degenerate bounding box");

    const MatrixXd d = pairwise_distances(xy);
    std::vector<double> nn(static_cast<std::size_t>(xy.rows()));
    for (Index i = 0; i < d.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < d.cols(); ++j) {
            if (j != i) best = std::min(best, d(i, j));
        }
        nn[i] = best;
    }
    std::sort(nn.begin(), nn.end());
    const std::size_t h = nn.size() / 2;
    const double median = nn.size() % 2 ? nn[h] : 0.5 * (nn[h - 1] + nn[h]);

    VoidAnalysis out;
    out.threshold = radius_multiplier * median;
    const std::size_t g = grid_resolution;
    const double cw = (x1 - x0) / static_cast<double>(g);
    const double ch = (y1 - y0) / static_cast<double>(g);

    std::vector<double> nearest(g * g);
    std::vector<char> is_void(g * g, 0);
    for (std::size_t r = 0; r < g; ++r) {
        for (std::size_t c = 0; c < g; ++c) {
            const Eigen::Vector2d centre(x0 + (static_cast<double>(c) + 0.5) * cw, y0 + (static_cast<double>(r) + 0.5) * ch);
            double best = std::numeric_limits<double>::infinity();
            for (Index i = 0; i < xy.rows(); ++i) best = std::min(best, (xy.row(i).transpose() - centre).norm());
            nearest[r * g + c] = best;
            is_void[r * g + c] = best > out.threshold ? 1 : 0;
        }
    }

    std::vector<char> seen(g * g, 0);
    std::size_t void_cells = 0;
    double dist_sum = 0.0;
    for (std::size_t start = 0; start < g * g; ++start) {
        if (!is_void[start] || seen[start]) continue;
        VoidRegion region;
        std::vector<std::size_t> stack{start};
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t cell = stack.back();
            stack.pop_back();
            region.cell_indices.push_back(cell);
            const std::size_t r = cell / g, c = cell % g;
            const std::size_t nbrs[4] = {r > 0 ? cell - g : cell, r + 1 < g ? cell + g : cell,
                                         c > 0 ? cell - 1 : cell, c + 1 < g ? cell + 1 : cell};
            for (std::size_t nb : nbrs) {
                if (nb != cell && is_void[nb] && !seen[nb]) {
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        std::sort(region.cell_indices.begin(), region.cell_indices.end());
        double s = 0.0;
        for (std::size_t cell : region.cell_indices) {
            s += nearest[cell];
            region.centroid += Eigen::Vector2d(x0 + (static_cast<double>(cell % g) + 0.5) * cw,
                                               y0 + (static_cast<double>(cell / g) + 0.5) * ch);
        }
        const auto cells = static_cast<double>(region.cell_indices.size());
        region.centroid /= cells;
        region.area = cells * cw * ch;
        region.mean_distance_to_nearest_point = s / cells;
        void_cells += region.cell_indices.size();
        dist_sum += s;
        out.total_void_area += region.area;
        out.voids.push_back(std::move(region));
    }
    out.void_count = out.voids.size();
    out.mean_void_distance = void_cells ? dist_sum / static_cast<double>(void_cells) : 0.0;
    return out;
}

double spatial_chi_square(const MatrixXd& coords, std::size_t cells_per_axis) {
    if (coords.rows() < 10) throw ValidationError("chi-square test needs at least 10 points");
    if (cells_per_axis < 1) throw ValidationError("chi-square grid needs at least 1 cell per axis");
    const MatrixXd xy = planar(coords, "chi-square test");
    const std::size_t g = cells_per_axis;
    if (g * g < 2) throw UndefinedMetricError("chi-square test needs at least 2 cells");

    // The grid is centred on the coordinate origin and spans +-max|coordinate|
    // per axis, so a 2x2 grid is the four quadrants.
    auto bin = [g](double v, double r) -> std::size_t {
        if (!(r > 0.0)) return 0;
        const auto b = static_cast<std::size_t>(std::floor((v + r) / (2.0 * r) * static_cast<double>(g)));
        return std::min(b, g - 1);
    };
    const double rx = xy.col(0).cwiseAbs().maxCoeff(), ry = xy.col(1).cwiseAbs().maxCoeff();
    std::vector<double> counts(g * g, 0.0);
    for (Index i = 0; i < xy.rows(); ++i) counts[bin(xy(i, 1), ry) * g + bin(xy(i, 0), rx)] += 1.0;

    const double expected = static_cast<double>(xy.rows()) / static_cast<double>(g * g);
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    const double df = static_cast<double>(g * g - 1);
    if (stat <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

IntraClusterDistance intra_cluster_distance(const MatrixXd& points, const Labels& labels) {
    check_labels(points, labels);
    IntraClusterDistance out;
    double sum = 0.0;
    for (const auto& [name, members] : group(labels)) {
        if (members.size() < 2) {
            out.warnings.push_back("cluster '" + name + "' has a single point and is excluded");
            continue;
        }
        double s = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                s += dist(points, members[a], members[b]);
                ++pairs;
            }
        }
        out.per_label[name] = s / static_cast<double>(pairs);
        sum += out.per_label[name];
    }
    if (out.per_label.empty()) throw UndefinedMetricError("no cluster has at least 2 points");
    out.overall = sum / static_cast<double>(out.per_label.size());
    return out;
}

}  // namespace semgeo
