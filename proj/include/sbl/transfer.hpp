#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Cholesky>

#include "sbl/behavior.hpp"
#include "sbl/similarity.hpp"
#include "sbl/types.hpp"

namespace sbl {

/**
 * Guest-side experience: the coordinates of the learned trajectory in the
 * guest's principal basis, g_bar = P_guest^T (w_g - w_off). `admissible`
 * records whether w_g actually lies in the guest's trajectory set; callers
 * decide how strictly to treat a violation.
 */
struct Experience {
    Vector g_bar;
    double residual = 0.0;
    bool admissible = false;
};

inline Experience extract_experience(const SimilarityReport& report,
                                     const BehaviorDecomposition& guest, const Vector& w_g,
                                     double tol = kDefaultMembershipTol) {
    const Membership m = contains(guest, w_g, tol);
    Experience e;
    e.residual = m.residual;
    e.admissible = m.inside;
    e.g_bar = report.P_guest.transpose() * (w_g - guest.w_off);
    return e;
}

/// Transferred trajectory plus the quantities used to compute and audit it.
struct TransferResult {
    Vector w_h;
    Vector g_bar;
    double guest_residual = 0.0;
    double host_residual = 0.0;
    double distance = 0.0;
};

/**
 * Closed-form transfer of a guest trajectory onto the host trajectory set.
 *
 * Construction caches everything that does not depend on the particular
 * trajectory: with the similarity factorization H1^T H2 = U D V^T,
 *
 *   w_h = (H1 U) D g_bar + P1 (w_2off - w_1off) + w_1off,
 *
 * where g_bar are the guest principal coordinates of the learned trajectory
 * and P1 projects onto span(H1). The result is the orthogonal projection of
 * w_g onto the host's affine trajectory set, so it is the admissible host
 * trajectory closest to the guest one in the Euclidean sense. No similarity
 * between the sets is required for the formula to hold.
 */
class TransferPlan {
  public:
    TransferPlan(const BehaviorDecomposition& host, const BehaviorDecomposition& guest,
                 const SimilarityReport& report)
        : host_(host), guest_(guest) {
        if (host.H.rows() != guest.H.rows()) {
            throw std::invalid_argument("TransferPlan: trajectory lengths differ");
        }
        if (report.P_host.rows() != host.H.rows() || report.P_host.cols() != host.H.cols() ||
            report.P_guest.rows() != guest.H.rows() || report.P_guest.cols() != guest.H.cols()) {
            throw std::invalid_argument("TransferPlan: report shape does not match decompositions");
        }
        // The report must have been computed from these same subspaces:
        // each principal basis has to lie in the span it claims to describe.
        const double host_defect =
            (report.P_host - project_subspace_columns(host.H, report.P_host)).norm();
        const double guest_defect =
            (report.P_guest - project_subspace_columns(guest.H, report.P_guest)).norm();
        if (host_defect > 1e-6 || guest_defect > 1e-6) {
            throw std::invalid_argument(
                "TransferPlan: report does not describe these trajectory sets");
        }
        guest_principal_ = report.P_guest;
        host_scaled_principal_ = report.P_host * report.D_diag();
        offset_term_ = host.w_off + project_subspace(host.H, guest.w_off - host.w_off);
    }

    /// Transfers one guest trajectory. Inadmissible inputs are transferred
    /// anyway; the residual is reported so callers can flag them.
    TransferResult transfer(const Vector& w_g, double tol = kDefaultMembershipTol) const {
        if (w_g.size() != guest_.H.rows()) {
            throw std::invalid_argument("transfer: trajectory length " +
                                        std::to_string(w_g.size()) + ", expected " +
                                        std::to_string(guest_.H.rows()));
        }
        TransferResult res;
        res.guest_residual = contains(guest_, w_g, tol).residual;
        res.g_bar = guest_principal_.transpose() * (w_g - guest_.w_off);
        res.w_h = host_scaled_principal_ * res.g_bar + offset_term_;
        res.host_residual = contains(host_, res.w_h, tol).residual;
        res.distance = (res.w_h - w_g).norm();
        return res;
    }

  private:
    BehaviorDecomposition host_;
    BehaviorDecomposition guest_;
    Matrix guest_principal_;
    Matrix host_scaled_principal_;
    Vector offset_term_;
};

/**
 * One-shot transfer: extracts the experience, refuses trajectories that are
 * not admissible for the guest, and applies the plan.
 */
inline TransferResult similarity_based_learning(const BehaviorDecomposition& host,
                                                const BehaviorDecomposition& guest,
                                                const SimilarityReport& report, const Vector& w_g,
                                                double tol = kDefaultMembershipTol) {
    const Experience exp = extract_experience(report, guest, w_g, tol);
    if (!exp.admissible) {
        throw std::invalid_argument(
            "similarity_based_learning: trajectory is not admissible for the guest (residual " +
            std::to_string(exp.residual) + ")");
    }
    const TransferPlan plan(host, guest, report);
    return plan.transfer(w_g, tol);
}

/**
 * Independent oracle for the transferred trajectory: minimizes ||w - w_g||
 * subject to [-G, I] w = L x1 via the normal equations of the constraint,
 *
 *   w = w_g - M^T (M M^T)^{-1} (M w_g - b),   M = [-G, I],  b = L x1.
 *
 * M M^T = G G^T + I is symmetric positive definite, so a Cholesky solve is
 * exact and stable. Costs a dense factorization per call; intended for tests
 * and audits rather than the hot path.
 */
inline Vector constrained_projection_oracle(const LiftedOperators& host_ops, const Vector& x1,
                                            const Vector& w_g) {
    const Index n_ut = host_ops.n_u * host_ops.T;
    const Index n_yt = host_ops.n_y * host_ops.T;
    if (w_g.size() != n_ut + n_yt) {
        throw std::invalid_argument("constrained_projection_oracle: trajectory length mismatch");
    }
    if (x1.size() != host_ops.n_x) {
        throw std::invalid_argument("constrained_projection_oracle: initial state length mismatch");
    }
    Matrix m(n_yt, n_ut + n_yt);
    m.leftCols(n_ut) = -host_ops.G;
    m.rightCols(n_yt) = Matrix::Identity(n_yt, n_yt);
    const Vector b = host_ops.L * x1;
    const Matrix gram = m * m.transpose();
    const Vector defect = m * w_g - b;
    const Vector multiplier = Eigen::LLT<Matrix>(gram).solve(defect);
    return w_g - m.transpose() * multiplier;
}

}  // namespace sbl
