#pragma once

#include <Eigen/Dense>

namespace semgeo::detail {

struct SymEigen {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // column j pairs with values[j]
};

SymEigen sym_eigen_desc(const Eigen::MatrixXd& a);

/// Flips each column so that its largest-magnitude entry is positive.
void orient_columns(Eigen::MatrixXd& m);

/// Tolerance below which an eigenvalue of a Gram-like matrix counts as zero.
double negligible_eigenvalue(const Eigen::VectorXd& values);

}  // namespace semgeo::detail
