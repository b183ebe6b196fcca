#include "semgeo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linalg.hpp"
#include "semgeo/error.hpp"
#include "semgeo/phate.hpp"

namespace semgeo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Projection base_projection(const AlignedData& data, MethodId method, std::size_t out_dims) {
    Projection p;
    p.method = method;
    p.params.method = method;
    p.params.phate.out_dims = out_dims;
    p.dataset_id = data.dataset.id;
    p.labels = data.dataset.labels();
    p.provenance.bundle_checksum = data.bundle_checksum;
    p.provenance.timestamp = current_timestamp();
    return p;
}

void check_input(const AlignedData& data, const ProjectionParams& params) {
    validate(params, static_cast<std::size_t>(data.matrix.rows()));
    if (!data.matrix.allFinite()) throw NumericError("input matrix has non-finite entries");
}

}  // namespace

Projection pca_project(const AlignedData& data, std::size_t out_dims) {
    Projection p = base_projection(data, MethodId::pca, out_dims);
    check_input(data, p.params);

    const MatrixXd centred = data.matrix.rowwise() - data.matrix.colwise().mean();
    Eigen::BDCSVD<MatrixXd> svd(centred, Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    const double tol = sv.size() ? sv[0] * 1e-10 * static_cast<double>(std::max(centred.rows(), centred.cols())) : 0.0;

    const auto m = static_cast<Index>(out_dims);
    p.coords = MatrixXd::Zero(centred.rows(), m);
    for (Index c = 0; c < std::min<Index>(m, sv.size()); ++c) {
        if (sv[c] > tol) p.coords.col(c) = centred * svd.matrixV().col(c);
    }
    detail::orient_columns(p.coords);
    p.stress = raw_stress(pairwise_distances(data.matrix), p.coords);
    return p;
}

Projection cmds_project(const AlignedData& data, std::size_t out_dims) {
    Projection p = base_projection(data, MethodId::cmds, out_dims);
    check_input(data, p.params);
    const MatrixXd d = pairwise_distances(data.matrix);
    p.coords = classical_mds(d, out_dims);
    p.stress = raw_stress(d, p.coords);
    return p;
}

Projection spectral_project(const AlignedData& data, std::size_t k, std::size_t out_dims) {
    Projection p = base_projection(data, MethodId::spectral, out_dims);
    p.params.spectral_k = k;
    check_input(data, p.params);

    const Index n = data.matrix.rows();
    const auto m = static_cast<Index>(out_dims);
    const MatrixXd d = pairwise_distances(data.matrix);
    p.coords = MatrixXd::Zero(n, m);

    if (d.maxCoeff() == 0.0) {
        p.warnings.push_back("all points coincide; spectral embedding is degenerate and set to zero");
        p.stress = 0.0;
        return p;
    }

    // Symmetric kNN adjacency, neighbours ranked by (distance, index).
    MatrixXd adj = MatrixXd::Zero(n, n);
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d(i, a) < d(i, b); });
        std::size_t taken = 0;
        for (Index j : order) {
            if (j == i) continue;
            adj(i, j) = adj(j, i) = 1.0;
            if (++taken == k) break;
        }
    }

    // Connected components.
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<Index>> members;
    for (Index s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(members.size());
        members.emplace_back();
        std::vector<Index> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            const Index u = stack.back();
            stack.pop_back();
            members[id].push_back(u);
            for (Index v = 0; v < n; ++v) {
                if (adj(u, v) > 0.0 && comp[v] < 0) {
                    comp[v] = id;
                    stack.push_back(v);
                }
            }
        }
        std::sort(members[id].begin(), members[id].end());
    }
    auto min_label = [&](const std::vector<Index>& ms) {
        std::string best = p.labels[ms.front()];
        for (Index i : ms) best = std::min(best, p.labels[i]);
        return best;
    };
    std::stable_sort(members.begin(), members.end(),
                     [&](const auto& a, const auto& b) { return min_label(a) < min_label(b); });

    for (const auto& ms : members) {
        const auto s = static_cast<Index>(ms.size());
        if (s < 2) continue;
        MatrixXd a(s, s);
        for (Index r = 0; r < s; ++r) {
            for (Index c = 0; c < s; ++c) a(r, c) = adj(ms[r], ms[c]);
        }
        const VectorXd inv_sqrt_deg = a.rowwise().sum().array().rsqrt().matrix();
        MatrixXd lap = -(inv_sqrt_deg.asDiagonal() * a * inv_sqrt_deg.asDiagonal());
        lap.diagonal().array() += 1.0;
        lap = 0.5 * (lap + lap.transpose()).eval();

        Eigen::SelfAdjointEigenSolver<MatrixXd> solver(lap);  // ascending
        MatrixXd block = MatrixXd::Zero(s, m);
        for (Index c = 0; c < m && c + 1 < s; ++c) {
            VectorXd v = inv_sqrt_deg.asDiagonal() * solver.eigenvectors().col(c + 1);
            v.normalize();
            block.col(c) = v;
        }
        detail::orient_columns(block);
        for (Index r = 0; r < s; ++r) p.coords.row(ms[r]) = block.row(r);
    }

    if (members.size() > 1) {
        p.warnings.push_back("kNN graph (k=" + std::to_string(k) + ") has " + std::to_string(members.size()) +
                             " connected components; components laid out along the first axis");
        double spread = 0.0;
        for (const auto& ms : members) {
            for (Index c = 0; c < m; ++c) {
                double lo = p.coords(ms.front(), c), hi = lo;
                for (Index i : ms) {
                    lo = std::min(lo, p.coords(i, c));
                    hi = std::max(hi, p.coords(i, c));
                }
                spread = std::max(spread, hi - lo);
            }
        }
        if (!(spread > 0.0)) spread = 1.0;
        for (std::size_t ci = 0; ci < members.size(); ++ci) {
            double lo = p.coords(members[ci].front(), 0);
            for (Index i : members[ci]) lo = std::min(lo, p.coords(i, 0));
            const double shift = static_cast<double>(ci) * 2.0 * spread - lo;
            for (Index i : members[ci]) p.coords(i, 0) += shift;
        }
    }
    p.stress = raw_stress(d, p.coords);
    return p;
}

}  // namespace semgeo
