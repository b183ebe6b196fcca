#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semgeo/embedding.hpp"
#include "semgeo/projection.hpp"

namespace semgeo {

struct DiffusionOperator {
    Eigen::MatrixXd p;           // row-stochastic
    Eigen::VectorXd bandwidths;  // may be empty when built from a bare kernel
};

/// Euclidean distance matrix of the rows of `x`. Needs at least two rows.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& x);

/// Distance from each point to its k-th nearest neighbour (self excluded).
/// Zero bandwidths are replaced by the smallest positive one (1e-12 if none)
/// and a warning is appended when `warnings` is given.
Eigen::VectorXd knn_bandwidths(const Eigen::MatrixXd& d, std::size_t k,
                               std::vector<std::string>* warnings = nullptr);

Eigen::MatrixXd alpha_decay_kernel(const Eigen::MatrixXd& d, const Eigen::VectorXd& sigma, double alpha);

DiffusionOperator markov_normalize(const Eigen::MatrixXd& k, Eigen::VectorXd bandwidths = {});

/// p^t.
Eigen::MatrixXd diffuse(const DiffusionOperator& op, std::size_t t);

Eigen::MatrixXd potential_distances(const Eigen::MatrixXd& pt, double log_floor);

/// Classical (Torgerson) MDS. Axes beyond the number of positive eigenvalues
/// are zero.
Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& v, std::size_t out_dims);

/// Raw stress sum_{i<j} (target(i,j) - |x_i - x_j|)^2.
double raw_stress(const Eigen::MatrixXd& target, const Eigen::MatrixXd& coords);

struct SmacofResult {
    Eigen::MatrixXd coords;
    double stress = 0.0;
    std::vector<double> stress_history;  // stress of init followed by each iterate
    std::size_t iterations = 0;
};

SmacofResult smacof_refine(const Eigen::MatrixXd& v, const Eigen::MatrixXd& init, std::size_t max_iter,
                           double tol);

/// Von Neumann entropy of the normalised |eigenvalue|^t spectrum of p, per t.
std::vector<double> entropy_curve(const DiffusionOperator& op, const std::vector<std::size_t>& t_candidates);
/// Knee of the entropy curve: the candidate farthest from the chord joining
/// the first and last points (both axes rescaled to [0,1]); ties go to the
/// earliest candidate.
std::size_t select_t_entropy(const DiffusionOperator& op, const std::vector<std::size_t>& t_candidates);

/// Builds the diffusion operator for `x` using params.k and params.alpha.
DiffusionOperator build_operator(const Eigen::MatrixXd& x, const PhateParams& params,
                                 std::vector<std::string>* warnings = nullptr);

Projection phate_project(const AlignedData& data, const PhateParams& params);

}  // namespace semgeo
