#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "sbl/behavior.hpp"
#include "sbl/similarity.hpp"
#include "sbl/system.hpp"
#include "sbl/transfer.hpp"
#include "sbl/types.hpp"

namespace sbl {

namespace detail {

/// Uniform double in [0, 1). std::uniform_real_distribution is allowed to
/// differ across standard libraries, so the mantissa is built by hand to keep
/// sweeps reproducible everywhere.
inline double canonical(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * canonical(rng);
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            m(i, j) = uniform(rng, -1.0, 1.0);
        }
    }
    return m;
}

inline Vector random_vector(std::mt19937_64& rng, Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = uniform(rng, -1.0, 1.0);
    }
    return v;
}

}  // namespace detail

/// Bounds for randomized stress sweeps. Kept small so a full sweep stays
/// well under a second per thousand cases.
struct SweepDims {
    Index max_n_x = 4;
    Index max_n_u = 2;
    Index max_n_y = 2;
    Index max_T = 8;
};

inline LtvSystem random_system(std::mt19937_64& rng, const SweepDims& dims = {}) {
    const Index n_x = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(dims.max_n_x));
    const Index n_u = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(dims.max_n_u));
    const Index n_y = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(dims.max_n_y));
    const Index T = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(dims.max_T));

    std::vector<Matrix> a, b, c, d;
    for (Index t = 0; t < T; ++t) {
        a.push_back(detail::random_matrix(rng, n_x, n_x));
        b.push_back(detail::random_matrix(rng, n_x, n_u));
        c.push_back(detail::random_matrix(rng, n_y, n_x));
        d.push_back(detail::random_matrix(rng, n_y, n_u));
    }

    SystemDescription desc;
    desc.name = "random";
    desc.T = T;
    desc.A = MatrixSchedule::per_step(std::move(a));
    desc.B = MatrixSchedule::per_step(std::move(b));
    desc.C = MatrixSchedule::per_step(std::move(c));
    desc.D = MatrixSchedule::per_step(std::move(d));
    desc.x0 = detail::random_vector(rng, n_x);
    return validate(desc);
}

/**
 * A pair of independent random systems sharing input size, output size and
 * horizon, drawn with n_u >= n_y. With more input than output channels per
 * step the joint feasibility system has more unknowns than equations and is
 * generically solvable, so such pairs are similar with probability one.
 */
inline std::pair<LtvSystem, LtvSystem> random_similar_pair(std::mt19937_64& rng,
                                                           const SweepDims& dims = {}) {
    const Index n_y = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(dims.max_n_y));
    const Index span = dims.max_n_u - n_y + 1;
    const Index n_u =
        span >= 1 ? n_y + static_cast<Index>(rng() % static_cast<std::uint64_t>(span)) : n_y;
    const Index T = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(dims.max_T));

    auto draw = [&](const char* name) {
        const Index n_x = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(dims.max_n_x));
        std::vector<Matrix> a, b, c, d;
        for (Index t = 0; t < T; ++t) {
            a.push_back(detail::random_matrix(rng, n_x, n_x));
            b.push_back(detail::random_matrix(rng, n_x, n_u));
            c.push_back(detail::random_matrix(rng, n_y, n_x));
            d.push_back(detail::random_matrix(rng, n_y, n_u));
        }
        SystemDescription desc;
        desc.name = name;
        desc.T = T;
        desc.A = MatrixSchedule::per_step(std::move(a));
        desc.B = MatrixSchedule::per_step(std::move(b));
        desc.C = MatrixSchedule::per_step(std::move(c));
        desc.D = MatrixSchedule::per_step(std::move(d));
        desc.x0 = detail::random_vector(rng, n_x);
        return validate(desc);
    };
    return {draw("host"), draw("guest")};
}

/// Worst-case figures across one randomized sweep; all should sit at
/// round-off level for a healthy build.
struct SweepStats {
    int cases = 0;
    double max_basis_defect = 0.0;
    double max_membership_residual = 0.0;
    double max_biorthogonality_defect = 0.0;
    double max_transfer_vs_oracle = 0.0;
    double max_host_residual = 0.0;
};

/**
 * Randomized self-check: draws `cases` host/guest pairs, validates the basis
 * construction, the index factorization and the transfer law against their
 * defining properties, and accumulates worst-case defects.
 */
inline SweepStats run_sweep(std::uint64_t seed, int cases, const SweepDims& dims = {}) {
    std::mt19937_64 rng(seed);
    SweepStats stats;
    for (int i = 0; i < cases; ++i) {
        const auto [host_sys, guest_sys] = random_similar_pair(rng, dims);
        const BehaviorDecomposition host = decompose(host_sys);
        const BehaviorDecomposition guest = decompose(guest_sys);

        // Basis columns must be orthonormal and annihilated by [-G, I].
        const Matrix gram = host.H.transpose() * host.H;
        const double ortho =
            (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
        const Index n_ut = host.lifted.n_u * host.lifted.T;
        const Matrix kernel_defect =
            host.lifted.G * host.H.topRows(n_ut) - host.H.bottomRows(host.H.rows() - n_ut);
        stats.max_basis_defect =
            std::max({stats.max_basis_defect, ortho, kernel_defect.cwiseAbs().maxCoeff()});

        // A rollout must land inside the decomposed set.
        const Vector u = detail::random_vector(rng, n_ut);
        const Trajectory traj = rollout(host_sys, u);
        stats.max_membership_residual =
            std::max(stats.max_membership_residual, contains(host, traj.w).residual);

        const SimilarityReport rep = similarity_indexes(host, guest);

        // <P_host_i, P_guest_j> must equal delta_ij s_i.
        Matrix cross = rep.P_host.transpose() * rep.P_guest;
        cross.diagonal() -= rep.s;
        stats.max_biorthogonality_defect =
            std::max(stats.max_biorthogonality_defect, cross.cwiseAbs().maxCoeff());

        // Transfer of a guest rollout must match the projection oracle.
        const Vector u_g = detail::random_vector(rng, n_ut);
        const Vector w_g = rollout(guest_sys, u_g).w;
        const TransferPlan plan(host, guest, rep);
        const TransferResult res = plan.transfer(w_g);
        const Vector oracle = constrained_projection_oracle(host.lifted, host.x0, w_g);
        stats.max_transfer_vs_oracle =
            std::max(stats.max_transfer_vs_oracle, (res.w_h - oracle).norm());
        stats.max_host_residual = std::max(stats.max_host_residual, res.host_residual);

        ++stats.cases;
    }
    return stats;
}

}  // namespace sbl
