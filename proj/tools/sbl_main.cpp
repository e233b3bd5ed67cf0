#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sbl/sbl.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
    std::string scenario_path;
    int example_id = 0;
    std::string out_dir;
    double tol = 0.0;
    bool tol_set = false;
    double gamma = 0.0;
    bool gamma_set = false;
    int max_iters = 0;
    bool max_iters_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_ilc_knobs) {
    cmd->add_option("--scenario", args.scenario_path, "Scenario file (JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--example", args.example_id, "Built-in example scenario")
        ->check(CLI::Range(1, 2));
    cmd->add_option("--out", args.out_dir, "Output directory (default: scenario's output_dir)");
    cmd->add_option("--tol", args.tol, "Override similarity and membership tolerances")
        ->check(CLI::PositiveNumber);
    if (with_ilc_knobs) {
        cmd->add_option("--gamma", args.gamma, "Learning gain (default: 1/sigma_max(G)^2)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--max-iters", args.max_iters, "Learning iteration budget")
            ->check(CLI::NonNegativeNumber);
    }
}

sbl::Scenario resolve_scenario(const CommonArgs& args, const CLI::App* cmd) {
    const bool have_file = !args.scenario_path.empty();
    const bool have_example = cmd->count("--example") > 0;
    if (have_file == have_example) {
        throw CLI::ValidationError(cmd->get_name(),
                                   "give exactly one of --scenario or --example");
    }
    sbl::Scenario sc = have_file ? sbl::load_scenario(args.scenario_path)
                                 : sbl::example_scenario(args.example_id);
    if (!args.out_dir.empty()) {
        sc.output_dir = args.out_dir;
    }
    if (args.tol_set) {
        sc.tolerances.similarity = args.tol;
        sc.tolerances.membership = args.tol;
    }
    if (args.gamma_set) {
        sc.ilc.gamma = args.gamma;
    }
    if (args.max_iters_set) {
        sc.ilc.max_iters = args.max_iters;
    }
    return sc;
}

void mark_set_flags(CommonArgs& args, const CLI::App* cmd, bool with_ilc_knobs) {
    args.tol_set = cmd->count("--tol") > 0;
    if (with_ilc_knobs) {
        args.gamma_set = cmd->count("--gamma") > 0;
        args.max_iters_set = cmd->count("--max-iters") > 0;
    }
}

void print_pairs(const sbl::ScenarioResults& results) {
    for (const sbl::PairResult& pr : results.pairs) {
        const auto& check = pr.report.check;
        std::printf("pair %s <- %s: %s (feasibility residual %.6g, rhs norm %.6g)\n",
                    pr.host.c_str(), pr.guest.c_str(),
                    check.similar ? "similar" : "dissimilar", check.residual, check.rhs_norm);
        std::printf("  indexes: count %ld, mean %.12g, min %.12g\n",
                    static_cast<long>(pr.report.s.size()), pr.report.mean_index(),
                    pr.report.s.size() ? pr.report.s.minCoeff() : 0.0);
        if (!check.similar) {
            std::fprintf(stderr,
                         "warning: pair %s <- %s is dissimilar; the indexes describe "
                         "subspace alignment only, and any transfer between these "
                         "behaviors is an override\n",
                         pr.host.c_str(), pr.guest.c_str());
        }
    }
}

void print_tasks(const sbl::ScenarioResults& results, bool with_transfer) {
    for (const sbl::TaskResult& tr : results.tasks) {
        std::printf("task %s: guest %s learned %s in %d iterations (final error %.6g, gain %.6g)\n",
                    tr.spec.name.c_str(), tr.spec.guest.c_str(), tr.spec.reference.c_str(),
                    tr.ilc.iterations, tr.ilc.error_norms.back(), tr.ilc.learning_gain);
        if (with_transfer) {
            std::printf(
                "  transfer to %s: distance %.6g, guest residual %.6g, host residual %.6g\n",
                tr.spec.host.c_str(), tr.transfer.distance, tr.transfer.guest_residual,
                tr.transfer.host_residual);
        }
    }
}

void print_written(const std::vector<std::string>& files, const std::string& dir) {
    for (const std::string& f : files) {
        std::printf("wrote %s/%s\n", dir.c_str(), f.c_str());
    }
}

int run_stage(const CommonArgs& args, const CLI::App* cmd, sbl::detail::RunStage stage) {
    sbl::Scenario sc = resolve_scenario(args, cmd);
    sbl::ScenarioResults results = sbl::run_scenario(sc, stage);
    const auto files = sbl::emit_outputs(results, sc.output_dir);
    print_pairs(results);
    print_tasks(results, stage == sbl::detail::RunStage::full);
    print_written(files, sc.output_dir);
    return kExitOk;
}

int run_sweep_cmd(std::uint64_t seed, int cases) {
    const sbl::SweepStats stats = sbl::run_sweep(seed, cases);
    std::printf("sweep: %d cases, seed %llu\n", stats.cases,
                static_cast<unsigned long long>(seed));
    std::printf("  max basis defect            %.3e\n", stats.max_basis_defect);
    std::printf("  max membership residual     %.3e\n", stats.max_membership_residual);
    std::printf("  max biorthogonality defect  %.3e\n", stats.max_biorthogonality_defect);
    std::printf("  max transfer vs oracle      %.3e\n", stats.max_transfer_vs_oracle);
    std::printf("  max host residual           %.3e\n", stats.max_host_residual);
    const bool ok = stats.max_basis_defect <= 1e-10 && stats.max_membership_residual <= 1e-9 &&
                    stats.max_biorthogonality_defect <= 1e-10 &&
                    stats.max_transfer_vs_oracle <= 1e-8 && stats.max_host_residual <= 1e-9;
    if (!ok) {
        std::fprintf(stderr, "sweep: defect beyond threshold\n");
        return kExitRuntime;
    }
    std::printf("sweep: all defects within thresholds\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trajectory-set similarity and experience transfer for discrete LTV systems"};
    app.require_subcommand(1);

    CommonArgs sim_args, ilc_args, transfer_args;
    CLI::App* sim = app.add_subcommand(
        "similarity", "Compare trajectory sets and write similarity indexes");
    add_common(sim, sim_args, false);
    CLI::App* ilc = app.add_subcommand("ilc", "Run the guest learning loop for each task");
    add_common(ilc, ilc_args, true);
    CLI::App* transfer = app.add_subcommand(
        "transfer", "Learn on the guest, then transfer each task to its host");
    add_common(transfer, transfer_args, true);

    int demo_id = 0;
    std::string demo_out = "out";
    CLI::App* demo = app.add_subcommand("demo", "Run a built-in example end to end");
    demo->add_option("--example", demo_id, "Example id")->check(CLI::Range(1, 2))->required();
    demo->add_option("--out", demo_out, "Output directory");

    std::uint64_t seed = 12345;
    int cases = 200;
    CLI::App* sweep =
        app.add_subcommand("sweep", "Randomized self-check of the library invariants");
    sweep->add_option("--seed", seed, "Random seed");
    sweep->add_option("--cases", cases, "Number of random host/guest pairs")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (sim->parsed()) {
            mark_set_flags(sim_args, sim, false);
            return run_stage(sim_args, sim, sbl::detail::RunStage::similarity_only);
        }
        if (ilc->parsed()) {
            mark_set_flags(ilc_args, ilc, true);
            return run_stage(ilc_args, ilc, sbl::detail::RunStage::ilc_only);
        }
        if (transfer->parsed()) {
            mark_set_flags(transfer_args, transfer, true);
            return run_stage(transfer_args, transfer, sbl::detail::RunStage::full);
        }
        if (demo->parsed()) {
            sbl::ScenarioResults results = sbl::run_demo(demo_id, demo_out);
            print_pairs(results);
            print_tasks(results, true);
            std::printf("demo %d outputs in %s\n", demo_id, demo_out.c_str());
            return kExitOk;
        }
        if (sweep->parsed()) {
            return run_sweep_cmd(seed, cases);
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    } catch (const sbl::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kExitIo;
    } catch (const sbl::ScenarioError& e) {
        std::fprintf(stderr, "scenario error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitValidation;
}
