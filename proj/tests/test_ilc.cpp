#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sbl/behavior.hpp"
#include "sbl/ilc.hpp"
#include "sbl/runner.hpp"
#include "sbl/sweep.hpp"

namespace {

sbl::LtvSystem scalar_integrator(sbl::Index T) {
    sbl::SystemDescription desc;
    desc.name = "integrator";
    desc.T = T;
    desc.A = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 1.0));
    desc.B = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 1.0));
    desc.C = sbl::MatrixSchedule::constant(sbl::Matrix::Constant(1, 1, 1.0));
    desc.D = sbl::MatrixSchedule::constant(sbl::Matrix::Zero(1, 1));
    desc.x0 = sbl::Vector::Zero(1);
    return sbl::validate(desc);
}

}  // namespace

TEST_CASE("a reference equal to the free response needs no input", "[ilc]") {
    std::mt19937_64 rng(101);
    const sbl::LtvSystem sys = sbl::random_system(rng);
    const sbl::LiftedOperators ops = sbl::lift(sys);
    const sbl::Vector r = ops.L * sys.x0;

    const sbl::IlcRun run = sbl::gradient_ilc(ops, sys.x0, r);
    CHECK(run.converged);
    CHECK(run.iterations == 0);
    CHECK(run.u_final.norm() == 0.0);
    REQUIRE(run.error_norms.size() == 1);
    CHECK(run.error_norms.front() <= 1e-12);
}

TEST_CASE("integrator learning approaches the minimum-norm input", "[ilc]") {
    const sbl::LtvSystem sys = scalar_integrator(2);
    const sbl::LiftedOperators ops = sbl::lift(sys);
    sbl::Vector r(2);
    r << 0.0, 1.0;

    sbl::IlcOptions opts;
    opts.max_iters = 200;
    const sbl::IlcRun run = sbl::gradient_ilc(ops, sys.x0, r, opts);
    CHECK(run.u_final(0) == Catch::Approx(1.0).margin(1e-10));
    CHECK(run.u_final(1) == Catch::Approx(0.0).margin(1e-10));
    CHECK(run.error_norms.back() <= 1e-10);
}

TEST_CASE("error norms never increase for admissible gains", "[ilc]") {
    std::mt19937_64 rng(103);
    for (int i = 0; i < 20; ++i) {
        const sbl::LtvSystem sys = sbl::random_system(rng);
        const sbl::LiftedOperators ops = sbl::lift(sys);
        const sbl::Vector r = sbl::detail::random_vector(rng, sys.n_y * sys.T);

        const double sigma_max = Eigen::JacobiSVD<sbl::Matrix>(ops.G).singularValues()(0);
        sbl::IlcOptions opts;
        opts.max_iters = 50;
        if (sigma_max > 0.0) {
            opts.gamma = sbl::detail::uniform(rng, 0.1, 1.9) / (sigma_max * sigma_max);
        }
        const sbl::IlcRun run = sbl::gradient_ilc(ops, sys.x0, r, opts);
        for (std::size_t k = 1; k < run.error_norms.size(); ++k) {
            CHECK(run.error_norms[k] <= run.error_norms[k - 1] + 1e-12);
        }
    }
}

TEST_CASE("final input reproduces the recorded error under rollout", "[ilc]") {
    std::mt19937_64 rng(107);
    const sbl::LtvSystem sys = sbl::random_system(rng);
    const sbl::LiftedOperators ops = sbl::lift(sys);
    const sbl::Vector r = sbl::detail::random_vector(rng, sys.n_y * sys.T);

    const sbl::IlcRun run = sbl::gradient_ilc(ops, sys.x0, r);
    const sbl::Trajectory traj = sbl::rollout(sys, run.u_final);
    CHECK((traj.y - run.y_final).norm() <= 1e-10 * (1.0 + traj.y.norm()));
    CHECK(sbl::tracking_error(traj.y, r) ==
          Catch::Approx(run.error_norms.back()).margin(1e-10));
}

TEST_CASE("learned trajectories are admissible for the system that learned them", "[ilc]") {
    std::mt19937_64 rng(109);
    for (int i = 0; i < 10; ++i) {
        const sbl::LtvSystem sys = sbl::random_system(rng);
        const sbl::LiftedOperators ops = sbl::lift(sys);
        const sbl::BehaviorDecomposition dec = sbl::decompose(ops, sys.x0);
        const sbl::Vector r = sbl::detail::random_vector(rng, sys.n_y * sys.T);

        sbl::IlcOptions opts;
        opts.max_iters = 100;
        const sbl::IlcRun run = sbl::gradient_ilc(ops, sys.x0, r, opts);
        const sbl::Vector w = sbl::stack_trajectory(run.u_final, run.y_final);
        CHECK(sbl::contains(dec, w, 1e-10).inside);
    }
}

TEST_CASE("destabilizing gains are rejected up front", "[ilc]") {
    const sbl::LtvSystem sys = scalar_integrator(3);
    const sbl::LiftedOperators ops = sbl::lift(sys);
    const double sigma_max = Eigen::JacobiSVD<sbl::Matrix>(ops.G).singularValues()(0);
    const sbl::Vector r = sbl::Vector::Ones(3);

    sbl::IlcOptions opts;
    opts.gamma = 2.0 / (sigma_max * sigma_max);
    CHECK_THROWS_AS(sbl::gradient_ilc(ops, sys.x0, r, opts), std::invalid_argument);
    opts.gamma = -1.0;
    CHECK_THROWS_AS(sbl::gradient_ilc(ops, sys.x0, r, opts), std::invalid_argument);
}

TEST_CASE("iteration budget zero reports the initial error only", "[ilc]") {
    const sbl::LtvSystem sys = scalar_integrator(2);
    const sbl::LiftedOperators ops = sbl::lift(sys);
    sbl::Vector r(2);
    r << 0.0, 1.0;

    sbl::IlcOptions opts;
    opts.max_iters = 0;
    const sbl::IlcRun run = sbl::gradient_ilc(ops, sys.x0, r, opts);
    CHECK(run.iterations == 0);
    CHECK_FALSE(run.converged);
    REQUIRE(run.error_norms.size() == 1);
    CHECK(run.error_norms.front() == Catch::Approx(1.0));
}

TEST_CASE("built-in guest tracks both references below the accuracy target", "[ilc]") {
    const sbl::Scenario sc = sbl::example_scenario(1);
    const sbl::LtvSystem& guest = sc.systems.at("sigma2");
    const sbl::LiftedOperators ops = sbl::lift(guest);

    for (const char* ref_name : {"r1", "r2"}) {
        const sbl::Vector& r = sc.references.at(ref_name);
        const sbl::IlcRun run = sbl::gradient_ilc(ops, guest.x0, r, sc.ilc);
        CHECK(run.iterations <= 500);
        CHECK(sbl::tracking_error_rms(run.y_final, r) <= 1e-3);
    }
}

TEST_CASE("tracking error helpers", "[ilc]") {
    sbl::Vector y(4), r(4);
    y << 1.0, 2.0, 3.0, 4.0;
    r = y;
    CHECK(sbl::tracking_error(y, r) == 0.0);
    r.setZero();
    r(0) = 1.0;
    y.setZero();
    CHECK(sbl::tracking_error(y, r) == 1.0);
    CHECK(sbl::tracking_error_rms(y, r) == Catch::Approx(0.5));
    CHECK_THROWS_AS(sbl::tracking_error(y, sbl::Vector::Zero(3)), std::invalid_argument);
}
