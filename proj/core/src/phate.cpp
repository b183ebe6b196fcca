#include "semgeo/phate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "linalg.hpp"
#include "semgeo/error.hpp"

namespace semgeo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd pairwise_distances(const MatrixXd& x) {
    if (x.rows() < 2) throw ValidationError("pairwise distances need at least 2 points");
    const Index n = x.rows();
    MatrixXd d = MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double v = (x.row(i) - x.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

VectorXd knn_bandwidths(const MatrixXd& d, std::size_t k, std::vector<std::string>* warnings) {
    const auto n = static_cast<std::size_t>(d.rows());
    if (k == 0) throw ValidationError("k must be positive");
    if (k >= n) {
        throw ValidationError("k=" + std::to_string(k) + " must be smaller than the number of points (" +
                              std::to_string(n) + ")");
    }
    VectorXd sigma(d.rows());
    std::vector<double> row;
    row.reserve(n - 1);
    for (Index i = 0; i < d.rows(); ++i) {
        row.clear();
        for (Index j = 0; j < d.cols(); ++j) {
            if (j != i) row.push_back(d(i, j));
        }
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
        sigma[i] = row[k - 1];
    }

    std::size_t zeros = 0;
    double smallest = 0.0;
    for (Index i = 0; i < sigma.size(); ++i) {
        if (sigma[i] > 0.0) {
            smallest = smallest == 0.0 ? sigma[i] : std::min(smallest, sigma[i]);
        } else {
            ++zeros;
        }
    }
    if (zeros > 0) {
        const double repl = smallest > 0.0 ? smallest : 1e-12;
        for (Index i = 0; i < sigma.size(); ++i) {
            if (!(sigma[i] > 0.0)) sigma[i] = repl;
        }
        if (warnings) {
            std::ostringstream msg;
            msg << zeros << " point(s) had a zero k-NN bandwidth (duplicate points); replaced with " << repl;
            warnings->push_back(msg.str());
        }
    }
    return sigma;
}

MatrixXd alpha_decay_kernel(const MatrixXd& d, const VectorXd& sigma, double alpha) {
    if (sigma.size() != d.rows()) throw ValidationError("bandwidth vector length does not match distances");
    for (Index i = 0; i < sigma.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw ValidationError("bandwidth " + std::to_string(i) + " is not positive");
    }
    const Index n = d.rows();
    MatrixXd k(n, n);
    for (Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Index j = i + 1; j < n; ++j) {
            const double v = 0.5 * std::exp(-std::pow(d(i, j) / sigma[i], alpha)) +
                             0.5 * std::exp(-std::pow(d(i, j) / sigma[j], alpha));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

DiffusionOperator markov_normalize(const MatrixXd& k, VectorXd bandwidths) {
    if ((k.array() < 0.0).any()) throw ValidationError("affinity matrix has negative entries");
    DiffusionOperator op;
    op.p = k;
    for (Index i = 0; i < k.rows(); ++i) {
        const double s = k.row(i).sum();
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw NumericError("isolated point: affinity row " + std::to_string(i) + " sums to zero");
        }
        op.p.row(i) /= s;
    }
    op.bandwidths = std::move(bandwidths);
    return op;
}

MatrixXd diffuse(const DiffusionOperator& op, std::size_t t) {
    if (t == 0) throw ValidationError("diffusion time t must be at least 1");
    MatrixXd result;
    MatrixXd base = op.p;
    bool have = false;
    while (t > 0) {
        if (t & 1U) {
            if (have) {
                result = (result * base).eval();
            } else {
                result = base;
                have = true;
            }
        }
        t >>= 1U;
        if (t > 0) base = (base * base).eval();
    }
    return result;
}

MatrixXd potential_distances(const MatrixXd& pt, double log_floor) {
    if (!(log_floor > 0.0)) throw ValidationError("log_floor must be positive");
    const MatrixXd l = (pt.array() + log_floor).log().matrix();
    const Index n = pt.rows();
    MatrixXd v = MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double dist = (l.row(i) - l.row(j)).norm();
            v(i, j) = dist;
            v(j, i) = dist;
        }
    }
    return v;
}

MatrixXd classical_mds(const MatrixXd& v, std::size_t out_dims) {
    if (v.rows() != v.cols()) throw ValidationError("distance matrix must be square");
    if (out_dims == 0) throw ValidationError("out_dims must be at least 1");
    const Index n = v.rows();
    const auto m = static_cast<Index>(out_dims);
    MatrixXd coords = MatrixXd::Zero(n, m);
    if (n == 0) return coords;

    const MatrixXd s = v.array().square().matrix();
    const VectorXd row_mean = s.rowwise().mean();
    const VectorXd col_mean = s.colwise().mean().transpose();
    const double grand = s.mean();
    MatrixXd b(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) b(i, j) = -0.5 * (s(i, j) - row_mean[i] - col_mean[j] + grand);
    }
    b = 0.5 * (b + b.transpose()).eval();

    const auto eig = detail::sym_eigen_desc(b);
    const double tol = detail::negligible_eigenvalue(eig.values);
    for (Index c = 0; c < std::min(m, n); ++c) {
        const double lambda = eig.values[c];
        if (lambda > tol) coords.col(c) = eig.vectors.col(c) * std::sqrt(lambda);
    }
    detail::orient_columns(coords);
    return coords;
}

double raw_stress(const MatrixXd& target, const MatrixXd& coords) {
    double s = 0.0;
    const Index n = coords.rows();
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double diff = target(i, j) - (coords.row(i) - coords.row(j)).norm();
            s += diff * diff;
        }
    }
    return s;
}

SmacofResult smacof_refine(const MatrixXd& v, const MatrixXd& init, std::size_t max_iter, double tol) {
    if (!init.allFinite()) throw NumericError("SMACOF initial configuration is not finite");
    if (v.rows() != init.rows()) throw ValidationError("SMACOF init rows do not match distance matrix");
    const Index n = init.rows();
    SmacofResult res;
    res.coords = init;
    res.stress = raw_stress(v, init);
    res.stress_history.push_back(res.stress);

    MatrixXd next(n, init.cols());
    while (res.iterations < max_iter && res.stress > 0.0) {
        // Guttman transform: x_i <- (1/n) sum_j w_ij (x_i - x_j), w_ij = v_ij / d_ij.
        next.setZero();
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                if (j == i) continue;
                const double dist = (res.coords.row(i) - res.coords.row(j)).norm();
                if (dist > 0.0) {
                    next.row(i) += (v(i, j) / dist) * (res.coords.row(i) - res.coords.row(j));
                }
            }
        }
        next /= static_cast<double>(n);
        const double s = raw_stress(v, next);
        // Majorization guarantees s <= stress; anything else is rounding noise
        // at convergence and the previous iterate is kept.
        if (!(s <= res.stress)) break;
        const double decrease = (res.stress - s) / res.stress;
        res.coords = next;
        res.stress = s;
        res.stress_history.push_back(s);
        ++res.iterations;
        if (decrease < tol) break;
    }
    return res;
}

std::vector<double> entropy_curve(const DiffusionOperator& op, const std::vector<std::size_t>& ts) {
    Eigen::EigenSolver<MatrixXd> solver(op.p, false);
    if (solver.info() != Eigen::Success) throw NumericError("eigen-decomposition of diffusion operator failed");
    const VectorXd mags = solver.eigenvalues().cwiseAbs();
    std::vector<double> out;
    out.reserve(ts.size());
    for (std::size_t t : ts) {
        VectorXd eta = mags.array().pow(static_cast<double>(t)).matrix();
        const double total = eta.sum();
        double h = 0.0;
        if (total > 0.0) {
            eta /= total;
            for (Index i = 0; i < eta.size(); ++i) {
                if (eta[i] > 0.0) h -= eta[i] * std::log(eta[i]);
            }
        }
        out.push_back(h);
    }
    return out;
}

std::size_t select_t_entropy(const DiffusionOperator& op, const std::vector<std::size_t>& t_candidates) {
    if (t_candidates.empty()) throw ValidationError("select_t_entropy needs at least one candidate");
    std::vector<std::size_t> ts = t_candidates;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    if (ts.front() == 0) throw ValidationError("diffusion time candidates must be positive");
    if (ts.size() <= 2) return ts.front();

    const auto h = entropy_curve(op, ts);
    auto rescale = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        std::vector<double> out(v.size(), 0.0);
        const double range = *hi - *lo;
        if (range > 0.0) {
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
        }
        return out;
    };
    const auto x = rescale(std::vector<double>(ts.begin(), ts.end()));
    const auto y = rescale(h);

    const double dx = x.back() - x.front();
    const double dy = y.back() - y.front();
    const double len = std::hypot(dx, dy);
    std::size_t best = 0;
    double best_dist = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double dist = len > 0.0 ? std::abs(dy * (x[i] - x.front()) - dx * (y[i] - y.front())) / len : 0.0;
        if (dist > best_dist + 1e-12) {
            best_dist = dist;
            best = i;
        }
    }
    return ts[best];
}

DiffusionOperator build_operator(const MatrixXd& x, const PhateParams& params, std::vector<std::string>* warnings) {
    const MatrixXd d = pairwise_distances(x);
    VectorXd sigma = knn_bandwidths(d, params.k, warnings);
    const MatrixXd k = alpha_decay_kernel(d, sigma, params.alpha);
    return markov_normalize(k, std::move(sigma));
}

Projection phate_project(const AlignedData& data, const PhateParams& params) {
    ProjectionParams pp;
    pp.method = MethodId::phate;
    pp.phate = params;
    validate(pp, static_cast<std::size_t>(data.matrix.rows()));
    if (!data.matrix.allFinite()) throw NumericError("input matrix has non-finite entries");

    Projection out;
    out.method = MethodId::phate;
    out.params = pp;
    out.dataset_id = data.dataset.id;
    out.labels = data.dataset.labels();

    const DiffusionOperator op = build_operator(data.matrix, params, &out.warnings);
    const MatrixXd pt = diffuse(op, params.t);
    const MatrixXd v = potential_distances(pt, params.log_floor);
    const MatrixXd init = classical_mds(v, params.out_dims);
    auto refined = smacof_refine(v, init, params.mds_max_iter, params.mds_tol);

    out.coords = std::move(refined.coords);
    out.stress = refined.stress;
    out.provenance.bundle_checksum = data.bundle_checksum;
    out.provenance.timestamp = current_timestamp();
    if (!out.coords.allFinite()) throw NumericError("PHATE produced non-finite coordinates");
    return out;
}

}  // namespace semgeo
