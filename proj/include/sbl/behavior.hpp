#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "sbl/lifting.hpp"
#include "sbl/types.hpp"

namespace sbl {

/**
 * Affine decomposition of the set of admissible trajectories for a fixed
 * initial state:
 *
 *   { w = col(u, y) : y = G u + L x0 } = span(H) + w_off.
 *
 * H has orthonormal columns spanning the kernel of [-G, I] (one column per
 * input degree of freedom over the horizon, i.e. n_u * T of them), and
 * w_off = col(0, L x0) is the particular trajectory produced by zero input.
 */
struct BehaviorDecomposition {
    Matrix H;
    Vector w_off;
    LiftedOperators lifted;
    Vector x0;
};

/// Result of an admissibility test: the defect y - G u - L x0 measured in
/// norm, and the verdict at the tolerance the test was run with.
struct Membership {
    bool inside = false;
    double residual = 0.0;
};

/**
 * Builds the affine decomposition from lifted operators and an initial state.
 *
 * The kernel of [-G, I] equals the column span of col(I, G); a thin QR of
 * that stacked matrix yields the orthonormal basis. Its smallest singular
 * value is at least 1 because of the identity block, so the basis is always
 * well defined. Column signs are fixed deterministically so repeated runs
 * produce the identical matrix.
 */
inline BehaviorDecomposition decompose(const LiftedOperators& ops, const Vector& x0) {
    if (x0.size() != ops.n_x) {
        throw std::invalid_argument("decompose: initial state length " +
                                    std::to_string(x0.size()) + ", expected " +
                                    std::to_string(ops.n_x));
    }
    const Index n_ut = ops.n_u * ops.T;
    const Index n_yt = ops.n_y * ops.T;

    Matrix stacked(n_ut + n_yt, n_ut);
    stacked.topRows(n_ut) = Matrix::Identity(n_ut, n_ut);
    stacked.bottomRows(n_yt) = ops.G;

    Eigen::HouseholderQR<Matrix> qr(stacked);
    Matrix thin_q = Matrix::Identity(n_ut + n_yt, n_ut);
    thin_q = qr.householderQ() * thin_q;
    detail::orient_columns(thin_q);

    BehaviorDecomposition dec;
    dec.H = std::move(thin_q);
    dec.w_off = Vector::Zero(n_ut + n_yt);
    dec.w_off.tail(n_yt) = ops.L * x0;
    dec.lifted = ops;
    dec.x0 = x0;
    return dec;
}

/// Decomposition at the system's own initial state.
inline BehaviorDecomposition decompose(const LtvSystem& sys) {
    return decompose(lift(sys), sys.x0);
}

/**
 * Tests whether a stacked trajectory satisfies the system equations for the
 * decomposition's initial state. The residual is compared against
 * tol * (1 + ||L x0||) so the verdict scales with the offset size.
 */
inline Membership contains(const BehaviorDecomposition& dec, const Vector& w,
                           double tol = kDefaultMembershipTol) {
    const Index n_ut = dec.lifted.n_u * dec.lifted.T;
    const Index n_yt = dec.lifted.n_y * dec.lifted.T;
    if (w.size() != n_ut + n_yt) {
        throw std::invalid_argument("contains: trajectory length " + std::to_string(w.size()) +
                                    ", expected " + std::to_string(n_ut + n_yt));
    }
    const Vector defect =
        w.tail(n_yt) - dec.lifted.G * w.head(n_ut) - dec.w_off.tail(n_yt);
    Membership m;
    m.residual = defect.norm();
    m.inside = m.residual <= tol * (1.0 + dec.w_off.tail(n_yt).norm());
    return m;
}

/// Orthogonal projection onto the column span of an orthonormal basis.
inline Vector project_subspace(const Matrix& basis, const Vector& z) {
    return basis * (basis.transpose() * z);
}

/// Column-wise variant: projects every column of z at once.
inline Matrix project_subspace_columns(const Matrix& basis, const Matrix& z) {
    return basis * (basis.transpose() * z);
}

/// Orthogonal projection of an arbitrary point onto the affine trajectory set.
inline Vector project_behavior(const BehaviorDecomposition& dec, const Vector& z) {
    if (z.size() != dec.H.rows()) {
        throw std::invalid_argument("project_behavior: point length " + std::to_string(z.size()) +
                                    ", expected " + std::to_string(dec.H.rows()));
    }
    return dec.w_off + project_subspace(dec.H, z - dec.w_off);
}

}  // namespace sbl
