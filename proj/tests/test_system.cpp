#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <random>

#include "sbl/lifting.hpp"
#include "sbl/runner.hpp"
#include "sbl/sweep.hpp"
#include "sbl/system.hpp"

namespace {

sbl::LtvSystem scalar_integrator(sbl::Index T) {
    sbl::SystemDescription desc;
    desc.name = "integrator";
    desc.T = T;
    desc.A = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 1.0));
    desc.B = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 1.0));
    desc.C = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 1.0));
    desc.D = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 0.0));
    desc.x0 = sbl::Vector::Zero(1);
    return sbl::validate(desc);
}

}  // namespace

TEST_CASE("validate accepts a consistent scalar system", "[system]") {
    const sbl::LtvSystem sys = scalar_integrator(2);
    CHECK(sys.n_x == 1);
    CHECK(sys.n_u == 1);
    CHECK(sys.n_y == 1);
    CHECK(sys.T == 2);
    CHECK(sys.A.size() == 2);
}

TEST_CASE("validate rejects inconsistent dimensions with a named matrix", "[system]") {
    sbl::SystemDescription desc;
    desc.name = "bad";
    desc.T = 2;
    desc.A = sbl::MatrixSchedule::constant(sbl::Matrix::Identity(2, 2));
    desc.B = sbl::MatrixSchedule::constant(sbl::Matrix::Ones(3, 1));
    desc.C = sbl::MatrixSchedule::constant(sbl::Matrix::Ones(1, 2));
    desc.D = sbl::MatrixSchedule::constant(sbl::Matrix::Zero(1, 1));
    desc.x0 = sbl::Vector::Zero(2);
    CHECK_THROWS_WITH(sbl::validate(desc),
                      Catch::Matchers::ContainsSubstring("dimension mismatch at B(0)"));
}

TEST_CASE("validate rejects zero horizon and non-finite entries", "[system]") {
    sbl::SystemDescription desc;
    desc.name = "bad";
    desc.T = 0;
    desc.A = sbl::MatrixSchedule::constant(sbl::Matrix::Identity(1, 1));
    desc.B = desc.A;
    desc.C = desc.A;
    desc.D = desc.A;
    desc.x0 = sbl::Vector::Zero(1);
    CHECK_THROWS_AS(sbl::validate(desc), std::invalid_argument);

    desc.T = 1;
    sbl::Matrix nan_mat = sbl::Matrix::Constant(1, 1, std::nan(""));
    desc.C = sbl::MatrixSchedule::constant(nan_mat);
    CHECK_THROWS_WITH(sbl::validate(desc), Catch::Matchers::ContainsSubstring("non-finite"));
}

TEST_CASE("affine schedules expand to base plus t times slope", "[system]") {
    sbl::Matrix base(1, 1), slope(1, 1);
    base << 2.0;
    slope << 0.05;
    const auto mats = sbl::MatrixSchedule::affine(base, slope).expand(4, "A");
    REQUIRE(mats.size() == 4);
    CHECK(mats[0](0, 0) == 2.0);
    CHECK(mats[3](0, 0) == Catch::Approx(2.15).margin(1e-15));
}

TEST_CASE("per-step schedules must list one matrix per step", "[system]") {
    const std::vector<sbl::Matrix> two(2, sbl::Matrix::Identity(1, 1));
    CHECK_THROWS_AS(sbl::MatrixSchedule::per_step(two).expand(3, "A"), std::invalid_argument);
}

TEST_CASE("state transition multiplies step matrices in order", "[system]") {
    sbl::SystemDescription desc;
    desc.name = "doubling";
    desc.T = 4;
    desc.A = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 2.0));
    desc.B = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 1.0));
    desc.C = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 1.0));
    desc.D = sbl::MatrixSchedule::constant(sbl::Matrix::Zero(1, 1));
    desc.x0 = sbl::Vector::Zero(1);
    const sbl::LtvSystem sys = sbl::validate(desc);

    CHECK(sbl::state_transition(sys, 2, 2).isIdentity(0.0));
    CHECK(sbl::state_transition(sys, 3, 1)(0, 0) == 4.0);
    CHECK_THROWS_AS(sbl::state_transition(sys, 1, 3), std::invalid_argument);
}

TEST_CASE("time-ordered transition product for the built-in host", "[system]") {
    const sbl::Scenario sc = sbl::example_scenario(1);
    const sbl::LtvSystem& host = sc.systems.at("sigma1");

    CHECK(host.A[3](0, 0) == Catch::Approx(0.15).margin(1e-15));

    sbl::Matrix expected(3, 3);
    expected << 0.0, 0.05, 1.0, -0.5, -1.85, -2.45, 1.225, 4.0325, 4.275;
    const sbl::Matrix phi = sbl::state_transition(host, 2, 0);
    CHECK((phi - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("lift of the scalar integrator over two steps", "[lifting]") {
    const sbl::LtvSystem sys = scalar_integrator(2);
    const sbl::LiftedOperators ops = sbl::lift(sys);

    sbl::Matrix g_expected(2, 2);
    g_expected << 0.0, 0.0, 1.0, 0.0;
    sbl::Matrix l_expected(2, 1);
    l_expected << 1.0, 1.0;
    CHECK((ops.G - g_expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ops.L - l_expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lifted map is causal", "[lifting]") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 10; ++i) {
        const sbl::LtvSystem sys = sbl::random_system(rng);
        const sbl::LiftedOperators ops = sbl::lift(sys);
        for (sbl::Index t = 0; t < sys.T; ++t) {
            for (sbl::Index tau = t + 1; tau < sys.T; ++tau) {
                const sbl::Matrix block =
                    ops.G.block(t * sys.n_y, tau * sys.n_u, sys.n_y, sys.n_u);
                CHECK(block.cwiseAbs().maxCoeff() == 0.0);
            }
        }
    }
}

TEST_CASE("perturbing an input never changes earlier outputs", "[system]") {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 20; ++i) {
        const sbl::LtvSystem sys = sbl::random_system(rng);
        const sbl::Vector u = sbl::detail::random_vector(rng, sys.n_u * sys.T);
        const sbl::Trajectory base = sbl::rollout(sys, u);

        const auto t = static_cast<sbl::Index>(rng() % static_cast<std::uint64_t>(sys.T));
        const auto ch = static_cast<sbl::Index>(rng() % static_cast<std::uint64_t>(sys.n_u));
        sbl::Vector bumped = u;
        bumped(t * sys.n_u + ch) += 0.5;
        const sbl::Trajectory alt = sbl::rollout(sys, bumped);

        // Steps before t see identical inputs and state, so their outputs are
        // reproduced exactly, not merely approximately.
        if (t > 0) {
            const sbl::Vector gap = alt.y.head(t * sys.n_y) - base.y.head(t * sys.n_y);
            CHECK(gap.cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("first input column of the built-in guest's lifted map", "[lifting]") {
    const sbl::Scenario sc = sbl::example_scenario(1);
    const sbl::LiftedOperators ops = sbl::lift(sc.systems.at("sigma2"));
    CHECK(ops.G(0, 0) == 0.0);
    CHECK(ops.G(1, 0) == Catch::Approx(12.0).margin(1e-12));
}

TEST_CASE("lifted response matches step-by-step simulation", "[lifting]") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 100; ++i) {
        const sbl::LtvSystem sys = sbl::random_system(rng);
        const sbl::LiftedOperators ops = sbl::lift(sys);
        const sbl::Vector u = sbl::detail::random_vector(rng, sys.n_u * sys.T);
        const sbl::Trajectory traj = sbl::rollout(sys, u);
        const sbl::Vector y_lifted = sbl::lifted_response(ops, u, sys.x0);
        REQUIRE((traj.y - y_lifted).norm() <= 1e-10 * (1.0 + traj.y.norm()));
    }
}

TEST_CASE("rollout is linear in input and initial state", "[system]") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
        const sbl::LtvSystem sys = sbl::random_system(rng);
        const sbl::Vector u1 = sbl::detail::random_vector(rng, sys.n_u * sys.T);
        const sbl::Vector u2 = sbl::detail::random_vector(rng, sys.n_u * sys.T);
        const sbl::Vector zero_state = sbl::Vector::Zero(sys.n_x);
        const sbl::Vector combined = sbl::rollout(sys, u1 + u2, sys.x0).y;
        const sbl::Vector split =
            sbl::rollout(sys, u1, sys.x0).y + sbl::rollout(sys, u2, zero_state).y;
        CHECK((combined - split).norm() <= 1e-12 * (1.0 + combined.norm()));
    }
}

TEST_CASE("rollout validates lengths", "[system]") {
    const sbl::LtvSystem sys = scalar_integrator(3);
    CHECK_THROWS_AS(sbl::rollout(sys, sbl::Vector::Zero(2)), std::invalid_argument);
    CHECK_THROWS_AS(sbl::rollout(sys, sbl::Vector::Zero(3), sbl::Vector::Zero(2)),
                    std::invalid_argument);
}

TEST_CASE("stacked trajectory is input block then output block", "[system]") {
    const sbl::LtvSystem sys = scalar_integrator(2);
    sbl::Vector u(2);
    u << 1.0, 0.0;
    const sbl::Trajectory traj = sbl::rollout(sys, u);
    REQUIRE(traj.w.size() == 4);
    CHECK(traj.w(0) == 1.0);
    CHECK(traj.w(1) == 0.0);
    CHECK(traj.w(2) == 0.0);
    CHECK(traj.w(3) == 1.0);
}
