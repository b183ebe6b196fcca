#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semgeo::detail {

SymEigen sym_eigen_desc(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    // Eigen returns ascending order.
    SymEigen out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

void orient_columns(Eigen::MatrixXd& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Eigen::Index best = 0;
        double mag = -1.0;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (std::abs(m(r, c)) > mag) {
                mag = std::abs(m(r, c));
                best = r;
            }
        }
        if (m.rows() > 0 && m(best, c) < 0.0) m.col(c) = -m.col(c);
    }
}

double negligible_eigenvalue(const Eigen::VectorXd& values) {
    const double scale = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
    return scale * 1e-10 * static_cast<double>(std::max<Eigen::Index>(values.size(), 1));
}

}  // namespace semgeo::detail
