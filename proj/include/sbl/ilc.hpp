#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "sbl/lifting.hpp"
#include "sbl/types.hpp"

namespace sbl {

/// Knobs for the gradient learning loop. `gamma` empty means pick the safe
/// default 1 / sigma_max(G)^2 automatically.
struct IlcOptions {
    std::optional<double> gamma;
    int max_iters = 500;
    double err_tol = 1e-12;
};

/**
 * Result of a learning run. `error_norms` holds the tracking error norm
 * before any update and after each of the `iterations` updates performed, so
 * its length is iterations + 1.
 */
struct IlcRun {
    Vector u_final;
    Vector y_final;
    std::vector<double> error_norms;
    int iterations = 0;
    bool converged = false;
    double learning_gain = 0.0;
};

/**
 * Gradient-descent iterative learning on the lifted model: starting from zero
 * input, repeat
 *
 *   e_k = r - (G u_k + L x0),   u_{k+1} = u_k + gamma G^T e_k.
 *
 * The quadratic cost ||e||^2 contracts monotonically for any gain in
 * (0, 2 / sigma_max(G)^2); gains at or past that bound are rejected up front
 * rather than allowed to diverge. Stops early once the error norm drops
 * below err_tol.
 */
inline IlcRun gradient_ilc(const LiftedOperators& ops, const Vector& x0, const Vector& reference,
                           const IlcOptions& opts = {}) {
    const Index n_ut = ops.n_u * ops.T;
    const Index n_yt = ops.n_y * ops.T;
    if (reference.size() != n_yt) {
        throw std::invalid_argument("gradient_ilc: reference length " +
                                    std::to_string(reference.size()) + ", expected " +
                                    std::to_string(n_yt));
    }
    if (x0.size() != ops.n_x) {
        throw std::invalid_argument("gradient_ilc: initial state length mismatch");
    }
    if (opts.max_iters < 0) {
        throw std::invalid_argument("gradient_ilc: max_iters must be nonnegative");
    }

    const double sigma_max = Eigen::JacobiSVD<Matrix>(ops.G).singularValues()(0);
    double gamma;
    if (opts.gamma.has_value()) {
        gamma = *opts.gamma;
        if (gamma <= 0.0) {
            throw std::invalid_argument("gradient_ilc: gamma must be positive, got " +
                                        std::to_string(gamma));
        }
        if (sigma_max > 0.0 && gamma >= 2.0 / (sigma_max * sigma_max)) {
            throw std::invalid_argument("gradient_ilc: gamma " + std::to_string(gamma) +
                                        " at or beyond the stability bound " +
                                        std::to_string(2.0 / (sigma_max * sigma_max)));
        }
    } else {
        gamma = sigma_max > 0.0 ? 1.0 / (sigma_max * sigma_max) : 1.0;
    }

    IlcRun run;
    run.learning_gain = gamma;
    Vector u = Vector::Zero(n_ut);
    const Vector bias = ops.L * x0;
    Vector e = reference - (ops.G * u + bias);
    run.error_norms.push_back(e.norm());

    for (int k = 0; k < opts.max_iters; ++k) {
        if (run.error_norms.back() <= opts.err_tol) {
            run.converged = true;
            break;
        }
        u += gamma * (ops.G.transpose() * e);
        e = reference - (ops.G * u + bias);
        run.error_norms.push_back(e.norm());
        run.iterations = k + 1;
    }
    if (run.error_norms.back() <= opts.err_tol) {
        run.converged = true;
    }

    run.u_final = u;
    run.y_final = ops.G * u + bias;
    return run;
}

/// Euclidean norm of the tracking error over the horizon.
inline double tracking_error(const Vector& y, const Vector& reference) {
    if (y.size() != reference.size()) {
        throw std::invalid_argument("tracking_error: length mismatch");
    }
    return (y - reference).norm();
}

/// Root-mean-square tracking error per sample.
inline double tracking_error_rms(const Vector& y, const Vector& reference) {
    if (y.size() == 0) {
        throw std::invalid_argument("tracking_error_rms: empty signals");
    }
    return tracking_error(y, reference) / std::sqrt(static_cast<double>(y.size()));
}

}  // namespace sbl
