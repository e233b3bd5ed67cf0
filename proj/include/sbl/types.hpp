#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace sbl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Default relative tolerance for behavior membership tests.
inline constexpr double kDefaultMembershipTol = 1e-8;

/// Default relative tolerance for the similarity feasibility check.
inline constexpr double kDefaultSimilarityTol = 1e-8;

inline std::string shape_string(Index rows, Index cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

namespace detail {

/// Flips column j of M so that its largest-magnitude entry is positive.
/// Ties are broken by the lowest row index, which keeps the orientation
/// reproducible across platforms. Returns true if the column was negated.
inline bool orient_column(Matrix& m, Index j) {
    Index best_row = 0;
    double best_abs = std::abs(m(0, j));
    for (Index i = 1; i < m.rows(); ++i) {
        const double a = std::abs(m(i, j));
        if (a > best_abs) {
            best_abs = a;
            best_row = i;
        }
    }
    if (m(best_row, j) < 0.0) {
        m.col(j) = -m.col(j);
        return true;
    }
    return false;
}

inline void orient_columns(Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j) {
        orient_column(m, j);
    }
}

}  // namespace detail

}  // namespace sbl
