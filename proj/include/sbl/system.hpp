#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbl/types.hpp"

namespace sbl {

/**
 * One matrix of a discrete LTV model, given either as an explicit per-step
 * list, or as the affine-in-t shorthand M(t) = base + t * slope (a constant
 * matrix is the zero-slope special case). Schedules are expanded to per-step
 * form when the system is validated.
 */
struct MatrixSchedule {
    Matrix base;
    Matrix slope;
    std::vector<Matrix> steps;
    bool explicit_steps = false;

    static MatrixSchedule constant(Matrix m) {
        MatrixSchedule s;
        s.base = std::move(m);
        s.slope = Matrix::Zero(s.base.rows(), s.base.cols());
        return s;
    }

    static MatrixSchedule affine(Matrix m0, Matrix m1) {
        MatrixSchedule s;
        s.base = std::move(m0);
        s.slope = std::move(m1);
        return s;
    }

    static MatrixSchedule per_step(std::vector<Matrix> list) {
        MatrixSchedule s;
        s.steps = std::move(list);
        s.explicit_steps = true;
        return s;
    }

    std::vector<Matrix> expand(Index horizon, const std::string& name) const {
        if (explicit_steps) {
            if (static_cast<Index>(steps.size()) != horizon) {
                throw std::invalid_argument("schedule " + name + " lists " +
                                            std::to_string(steps.size()) + " matrices, expected " +
                                            std::to_string(horizon));
            }
            return steps;
        }
        if (base.size() == 0) {
            throw std::invalid_argument("schedule " + name + " is empty");
        }
        if (slope.rows() != base.rows() || slope.cols() != base.cols()) {
            throw std::invalid_argument("schedule " + name + ": slope shape " +
                                        shape_string(slope.rows(), slope.cols()) +
                                        " does not match base shape " +
                                        shape_string(base.rows(), base.cols()));
        }
        std::vector<Matrix> out;
        out.reserve(static_cast<std::size_t>(horizon));
        for (Index t = 0; t < horizon; ++t) {
            out.push_back(base + static_cast<double>(t) * slope);
        }
        return out;
    }
};

/// Raw, not-yet-checked description of a discrete LTV system over a finite
/// horizon. `validate` turns this into an LtvSystem.
struct SystemDescription {
    std::string name;
    Index T = 0;
    MatrixSchedule A;
    MatrixSchedule B;
    MatrixSchedule C;
    MatrixSchedule D;
    Vector x0;
};

/**
 * Dimension-checked discrete LTV system
 *
 *   x(t+1) = A(t) x(t) + B(t) u(t)
 *   y(t)   = C(t) x(t) + D(t) u(t),   t = 0 .. T-1,
 *
 * with all schedules expanded to one matrix per step and a fixed initial
 * state x0. Values are immutable after construction and safe to share.
 */
struct LtvSystem {
    std::string name;
    Index n_x = 0;
    Index n_u = 0;
    Index n_y = 0;
    Index T = 0;
    std::vector<Matrix> A;
    std::vector<Matrix> B;
    std::vector<Matrix> C;
    std::vector<Matrix> D;
    Vector x0;
};

/// Stacked input/output/trajectory supervectors over the horizon. The full
/// trajectory is always w = col(u, y): input block first, output block second.
struct Trajectory {
    Vector u;
    Vector y;
    Vector w;
};

inline Vector stack_trajectory(const Vector& u, const Vector& y) {
    Vector w(u.size() + y.size());
    w.head(u.size()) = u;
    w.tail(y.size()) = y;
    return w;
}

namespace detail {

inline void check_schedule(const std::vector<Matrix>& mats, const std::string& name,
                           Index rows, Index cols) {
    for (std::size_t t = 0; t < mats.size(); ++t) {
        const Matrix& m = mats[t];
        if (m.rows() != rows || m.cols() != cols) {
            throw std::invalid_argument("dimension mismatch at " + name + "(" + std::to_string(t) +
                                        "): expected " + shape_string(rows, cols) + ", got " +
                                        shape_string(m.rows(), m.cols()));
        }
        if (!m.allFinite()) {
            throw std::invalid_argument("non-finite entry in " + name + "(" + std::to_string(t) +
                                        ")");
        }
    }
}

}  // namespace detail

/**
 * Checks a raw system description and returns the per-step-expanded system.
 *
 * Dimensions are anchored on x0 (n_x), B (n_u) and C (n_y); every step of
 * every schedule must be consistent with them and finite. Throws
 * std::invalid_argument naming the offending matrix and step.
 */
inline LtvSystem validate(const SystemDescription& desc) {
    if (desc.T < 1) {
        throw std::invalid_argument("horizon T must be at least 1, got " + std::to_string(desc.T));
    }
    LtvSystem sys;
    sys.name = desc.name;
    sys.T = desc.T;
    sys.A = desc.A.expand(desc.T, "A");
    sys.B = desc.B.expand(desc.T, "B");
    sys.C = desc.C.expand(desc.T, "C");
    sys.D = desc.D.expand(desc.T, "D");

    sys.n_x = desc.x0.size();
    if (sys.n_x < 1) {
        throw std::invalid_argument("initial state x0 must not be empty");
    }
    if (!desc.x0.allFinite()) {
        throw std::invalid_argument("non-finite entry in x0");
    }
    sys.x0 = desc.x0;

    sys.n_u = sys.B.front().cols();
    sys.n_y = sys.C.front().rows();
    if (sys.n_u < 1 || sys.n_y < 1) {
        throw std::invalid_argument("input and output dimensions must be at least 1");
    }

    detail::check_schedule(sys.A, "A", sys.n_x, sys.n_x);
    detail::check_schedule(sys.B, "B", sys.n_x, sys.n_u);
    detail::check_schedule(sys.C, "C", sys.n_y, sys.n_x);
    detail::check_schedule(sys.D, "D", sys.n_y, sys.n_u);
    return sys;
}

/**
 * State-transition matrix Phi(t_end, t_start) = A(t_end-1) * ... * A(t_start),
 * with Phi(t, t) = I.
 */
inline Matrix state_transition(const LtvSystem& sys, Index t_end, Index t_start) {
    if (t_start > t_end) {
        throw std::invalid_argument("state_transition: t_start " + std::to_string(t_start) +
                                    " exceeds t_end " + std::to_string(t_end));
    }
    if (t_start < 0 || t_end > sys.T) {
        throw std::invalid_argument("state_transition: step range [" + std::to_string(t_start) +
                                    ", " + std::to_string(t_end) + "] outside horizon 0.." +
                                    std::to_string(sys.T));
    }
    Matrix phi = Matrix::Identity(sys.n_x, sys.n_x);
    for (Index t = t_start; t < t_end; ++t) {
        phi = sys.A[static_cast<std::size_t>(t)] * phi;
    }
    return phi;
}

/// Simulates the system step by step from the given initial state.
inline Trajectory rollout(const LtvSystem& sys, const Vector& u, const Vector& x0) {
    if (u.size() != sys.n_u * sys.T) {
        throw std::invalid_argument("rollout: input length " + std::to_string(u.size()) +
                                    ", expected " + std::to_string(sys.n_u * sys.T));
    }
    if (x0.size() != sys.n_x) {
        throw std::invalid_argument("rollout: initial state length " + std::to_string(x0.size()) +
                                    ", expected " + std::to_string(sys.n_x));
    }
    Trajectory traj;
    traj.u = u;
    traj.y = Vector(sys.n_y * sys.T);
    Vector x = x0;
    for (Index t = 0; t < sys.T; ++t) {
        const auto& a = sys.A[static_cast<std::size_t>(t)];
        const auto& b = sys.B[static_cast<std::size_t>(t)];
        const auto& c = sys.C[static_cast<std::size_t>(t)];
        const auto& d = sys.D[static_cast<std::size_t>(t)];
        const auto u_t = u.segment(t * sys.n_u, sys.n_u);
        traj.y.segment(t * sys.n_y, sys.n_y) = c * x + d * u_t;
        x = a * x + b * u_t;
    }
    traj.w = stack_trajectory(traj.u, traj.y);
    return traj;
}

/// Simulates from the system's own initial state.
inline Trajectory rollout(const LtvSystem& sys, const Vector& u) {
    return rollout(sys, u, sys.x0);
}

}  // namespace sbl
