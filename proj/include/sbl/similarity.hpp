#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "sbl/behavior.hpp"
#include "sbl/types.hpp"

namespace sbl {

/**
 * Outcome of the joint-feasibility test: do the two trajectory sets share at
 * least one point? `residual` is the least-squares defect of the stacked
 * system, `rhs_norm` the size of its right-hand side, and `witness` holds a
 * shared trajectory when one exists.
 */
struct SimilarityCheck {
    bool similar = false;
    double residual = 0.0;
    double rhs_norm = 0.0;
    std::optional<Vector> witness;
};

/**
 * Checks whether the two systems admit a common trajectory from their given
 * initial states by solving
 *
 *   [ -G1  I ]       [ L1 x1 ]
 *   [ -G2  I ] w  =  [ L2 x2 ]
 *
 * in the least-squares sense. The verdict compares the residual against
 * tol * (1 + ||rhs||). Both systems must share input size, output size and
 * horizon; state dimensions may differ.
 */
inline SimilarityCheck check_similar(const LiftedOperators& ops1, const Vector& x1,
                                     const LiftedOperators& ops2, const Vector& x2,
                                     double tol = kDefaultSimilarityTol) {
    if (ops1.n_u != ops2.n_u || ops1.n_y != ops2.n_y || ops1.T != ops2.T) {
        throw std::invalid_argument(
            "check_similar: systems must share input size, output size and horizon; got (" +
            std::to_string(ops1.n_u) + ", " + std::to_string(ops1.n_y) + ", " +
            std::to_string(ops1.T) + ") vs (" + std::to_string(ops2.n_u) + ", " +
            std::to_string(ops2.n_y) + ", " + std::to_string(ops2.T) + ")");
    }
    if (x1.size() != ops1.n_x || x2.size() != ops2.n_x) {
        throw std::invalid_argument("check_similar: initial state length mismatch");
    }
    const Index n_ut = ops1.n_u * ops1.T;
    const Index n_yt = ops1.n_y * ops1.T;

    Matrix stacked(2 * n_yt, n_ut + n_yt);
    stacked.topLeftCorner(n_yt, n_ut) = -ops1.G;
    stacked.topRightCorner(n_yt, n_yt) = Matrix::Identity(n_yt, n_yt);
    stacked.bottomLeftCorner(n_yt, n_ut) = -ops2.G;
    stacked.bottomRightCorner(n_yt, n_yt) = Matrix::Identity(n_yt, n_yt);

    Vector rhs(2 * n_yt);
    rhs.head(n_yt) = ops1.L * x1;
    rhs.tail(n_yt) = ops2.L * x2;

    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector w = svd.solve(rhs);

    SimilarityCheck out;
    out.rhs_norm = rhs.norm();
    out.residual = (stacked * w - rhs).norm();
    out.similar = out.residual <= tol * (1.0 + out.rhs_norm);
    if (out.similar) {
        out.witness = w;
    }
    return out;
}

/**
 * Similarity indexes between two trajectory sets, together with the paired
 * principal trajectories that realize them.
 *
 * The indexes are the singular values of H1^T H2 (clamped into [0, 1]):
 * cosines of the principal angles between the two subspaces, sorted in
 * decreasing order. P_host = H1 U and P_guest = H2 V are orthonormal bases of
 * the respective subspaces satisfying <P_host_i, P_guest_j> = delta_ij s_i.
 */
struct SimilarityReport {
    SimilarityCheck check;
    Vector s;
    Vector theta;
    Matrix P_host;
    Matrix P_guest;

    Matrix D_diag() const {
        Matrix d = Matrix::Zero(s.size(), s.size());
        d.diagonal() = s;
        return d;
    }

    double mean_index() const { return s.size() == 0 ? 0.0 : s.mean(); }
};

inline SimilarityReport similarity_indexes(const BehaviorDecomposition& host,
                                           const BehaviorDecomposition& guest,
                                           double tol = kDefaultSimilarityTol) {
    if (host.H.rows() != guest.H.rows()) {
        throw std::invalid_argument("similarity_indexes: trajectory lengths differ (" +
                                    std::to_string(host.H.rows()) + " vs " +
                                    std::to_string(guest.H.rows()) + ")");
    }
    SimilarityReport rep;
    rep.check = check_similar(host.lifted, host.x0, guest.lifted, guest.x0, tol);

    const Matrix cross = host.H.transpose() * guest.H;
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix u = svd.matrixU();
    Matrix v = svd.matrixV();

    // Fix the joint sign of each (U, V) column pair so results are
    // reproducible; flipping both columns leaves U D V^T unchanged.
    for (Index j = 0; j < u.cols(); ++j) {
        if (detail::orient_column(u, j) && j < v.cols()) {
            v.col(j) = -v.col(j);
        }
    }

    rep.s = svd.singularValues();
    for (Index k = 0; k < rep.s.size(); ++k) {
        rep.s(k) = std::clamp(rep.s(k), 0.0, 1.0);
    }
    rep.theta = rep.s.array().acos();
    rep.P_host = host.H * u;
    rep.P_guest = guest.H * v;
    return rep;
}

/**
 * Reference implementation of principal angles by direct search, usable as an
 * independent check for ambient dimension up to 3.
 *
 * Follows the defining recursion: maximize <x, y> over unit vectors of the
 * two subspaces orthogonal to the pairs already found, by scanning gridded
 * unit spheres in subspace coordinates. Accuracy is limited by the grid, so
 * compare results with a loose tolerance.
 */
inline Vector principal_angles_bruteforce(const Matrix& h1, const Matrix& h2,
                                          int grid_count = 720) {
    if (h1.rows() != h2.rows()) {
        throw std::invalid_argument("principal_angles_bruteforce: ambient dimensions differ");
    }
    if (h1.rows() > 3) {
        throw std::invalid_argument(
            "principal_angles_bruteforce: ambient dimension above 3 is not supported");
    }
    if (grid_count < 2) {
        throw std::invalid_argument("principal_angles_bruteforce: grid too coarse");
    }

    // Unit vectors covering the sphere in m coordinates, one per column.
    auto sphere_grid = [grid_count](Index m) {
        Matrix pts;
        if (m == 1) {
            pts.resize(1, 2);
            pts << 1.0, -1.0;
        } else if (m == 2) {
            pts.resize(2, grid_count);
            for (int i = 0; i < grid_count; ++i) {
                const double a = 2.0 * std::numbers::pi * i / grid_count;
                pts(0, i) = std::cos(a);
                pts(1, i) = std::sin(a);
            }
        } else {
            // Fibonacci sphere: near-uniform coverage with grid_count^2 points.
            const int n = grid_count * grid_count;
            pts.resize(3, n);
            const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
            for (int i = 0; i < n; ++i) {
                const double z = 1.0 - 2.0 * (i + 0.5) / n;
                const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                const double a = golden * i;
                pts(0, i) = r * std::cos(a);
                pts(1, i) = r * std::sin(a);
                pts(2, i) = z;
            }
        }
        return pts;
    };

    Matrix b1 = h1;
    Matrix b2 = h2;
    const Index pairs = std::min(b1.cols(), b2.cols());
    Vector cosines(pairs);

    for (Index k = 0; k < pairs; ++k) {
        const Matrix cand1 = b1 * sphere_grid(b1.cols());
        const Matrix cand2 = b2 * sphere_grid(b2.cols());
        double best = -2.0;
        Index best_i = 0;
        Index best_j = 0;
        for (Index i = 0; i < cand1.cols(); ++i) {
            Index j = 0;
            const double top = (cand2.transpose() * cand1.col(i)).maxCoeff(&j);
            if (top > best) {
                best = top;
                best_i = i;
                best_j = j;
            }
        }
        const Vector best_x = cand1.col(best_i);
        const Vector best_y = cand2.col(best_j);
        cosines(k) = std::clamp(best, -1.0, 1.0);

        // Deflate: restrict each subspace to the complement of the vector
        // just found, re-orthonormalizing what remains.
        auto deflate = [](const Matrix& basis, const Vector& used) {
            Matrix res = basis - used * (used.transpose() * basis);
            Eigen::HouseholderQR<Matrix> qr(res);
            Matrix q = Matrix::Identity(res.rows(), res.cols());
            q = qr.householderQ() * q;
            Matrix r = qr.matrixQR().topRows(res.cols()).triangularView<Eigen::Upper>();
            std::vector<Index> keep;
            for (Index j = 0; j < res.cols(); ++j) {
                if (std::abs(r(j, j)) > 1e-9) {
                    keep.push_back(j);
                }
            }
            Matrix out(res.rows(), static_cast<Index>(keep.size()));
            for (std::size_t j = 0; j < keep.size(); ++j) {
                out.col(static_cast<Index>(j)) = q.col(keep[j]);
            }
            return out;
        };
        if (k + 1 < pairs) {
            b1 = deflate(b1, best_x);
            b2 = deflate(b2, best_y);
            if (b1.cols() == 0 || b2.cols() == 0) {
                throw std::runtime_error("principal_angles_bruteforce: deflation lost rank");
            }
        }
    }
    Vector angles = cosines.array().min(1.0).max(-1.0).acos();
    return angles;
}

}  // namespace sbl
