#pragma once

#include "sbl/system.hpp"
#include "sbl/types.hpp"

namespace sbl {

/**
 * Lifted input/output operators over the full horizon:
 *
 *   y = G u + L x0,
 *
 * where u, y stack the per-step signals. G is block lower triangular with
 * block (t, tau) equal to D(t) for tau = t and C(t) Phi(t, tau+1) B(tau) for
 * tau < t; row block t of L is C(t) Phi(t, 0).
 */
struct LiftedOperators {
    Matrix G;
    Matrix L;
    Index n_x = 0;
    Index n_u = 0;
    Index n_y = 0;
    Index T = 0;
};

/**
 * Builds the lifted operators for a validated system.
 *
 * Each row block t is filled right to left while accumulating the partial
 * transition product, so the whole construction costs one pass over the
 * horizon per row instead of forming every Phi(t, s) from scratch.
 */
inline LiftedOperators lift(const LtvSystem& sys) {
    LiftedOperators ops;
    ops.n_x = sys.n_x;
    ops.n_u = sys.n_u;
    ops.n_y = sys.n_y;
    ops.T = sys.T;
    ops.G = Matrix::Zero(sys.n_y * sys.T, sys.n_u * sys.T);
    ops.L = Matrix::Zero(sys.n_y * sys.T, sys.n_x);

    for (Index t = 0; t < sys.T; ++t) {
        ops.G.block(t * sys.n_y, t * sys.n_u, sys.n_y, sys.n_u) =
            sys.D[static_cast<std::size_t>(t)];
        // reach = C(t) * Phi(t, tau + 1), maintained while tau walks down.
        Matrix reach = sys.C[static_cast<std::size_t>(t)];
        for (Index tau = t - 1; tau >= 0; --tau) {
            ops.G.block(t * sys.n_y, tau * sys.n_u, sys.n_y, sys.n_u) =
                reach * sys.B[static_cast<std::size_t>(tau)];
            reach = reach * sys.A[static_cast<std::size_t>(tau)];
        }
        ops.L.block(t * sys.n_y, 0, sys.n_y, sys.n_x) = reach;
    }
    return ops;
}

/// Output of the lifted map for a given input and initial state.
inline Vector lifted_response(const LiftedOperators& ops, const Vector& u, const Vector& x0) {
    return ops.G * u + ops.L * x0;
}

}  // namespace sbl
