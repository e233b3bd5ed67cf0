#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbl/behavior.hpp"
#include "sbl/csv.hpp"
#include "sbl/ilc.hpp"
#include "sbl/scenario.hpp"
#include "sbl/similarity.hpp"
#include "sbl/transfer.hpp"
#include "sbl/types.hpp"

namespace sbl {

/// Similarity report for one ordered (host, guest) pair of a scenario.
struct PairResult {
    std::string host;
    std::string guest;
    SimilarityReport report;
};

/// Everything produced for one transfer task: the guest's learning run, the
/// trajectory it settled on, and the transferred host trajectory.
struct TaskResult {
    TaskSpec spec;
    Vector reference;
    IlcRun ilc;
    Trajectory guest_traj;
    TransferResult transfer;
    Vector host_u;
    Vector host_y;
};

struct ScenarioResults {
    std::string scenario_name;
    Index n_u = 0;
    Index n_y = 0;
    Index T = 0;
    std::vector<PairResult> pairs;
    std::vector<TaskResult> tasks;
};

/**
 * Built-in demonstration scenarios over horizon T = 25.
 *
 * Scenario 1 holds a host (sigma1) and a guest (sigma2): third-order systems
 * with time-varying A, single input and output, differing in their last A
 * row and initial state. The guest learns two references (a sine and a
 * square pulse) and both experiences transfer to the host. Scenario 2 adds a
 * second guest (sigma3) and transfers the sine task from both guests so the
 * two similarity index vectors can be compared.
 */
inline Scenario example_scenario(int id) {
    if (id != 1 && id != 2) {
        throw std::invalid_argument("example id must be 1 or 2, got " + std::to_string(id));
    }
    const Index T = 25;

    auto make_sys = [T](const std::string& name, double a31, double a32, double a33_base,
                        const Vector& x0) {
        Matrix a_base(3, 3);
        a_base << 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, a31, a32, a33_base;
        Matrix a_slope = Matrix::Zero(3, 3);
        a_slope(0, 0) = 0.05;
        a_slope(1, 1) = 0.05;
        a_slope(2, 2) = 0.05;
        Matrix b(3, 1);
        b << 6.0, 0.0, 0.5;
        Matrix c(1, 3);
        c << 2.0, std::sqrt(2.0), 0.0;
        SystemDescription desc;
        desc.name = name;
        desc.T = T;
        desc.A = MatrixSchedule::affine(a_base, a_slope);
        desc.B = MatrixSchedule::constant(b);
        desc.C = MatrixSchedule::constant(c);
        desc.D = MatrixSchedule::constant(Matrix::Zero(1, 1));
        desc.x0 = x0;
        return validate(desc);
    };

    Vector x1(3), x2(3), x3(3);
    x1 << 0.0, 0.0, 1.02;
    x2 << 0.0, 0.0, 1.0;
    x3 << 0.0, 0.0, 1.1;

    Scenario sc;
    sc.name = id == 1 ? "example1" : "example2";
    sc.T = T;
    sc.systems.emplace("sigma1", make_sys("sigma1", -0.500, -1.850, -2.500, x1));
    sc.systems.emplace("sigma2", make_sys("sigma2", -0.512, -1.920, -2.400, x2));
    if (id == 2) {
        sc.systems.emplace("sigma3", make_sys("sigma3", -0.600, -2.000, -2.300, x3));
    }

    Vector r1(T), r2(T);
    for (Index t = 0; t < T; ++t) {
        r1(t) = std::sin(std::numbers::pi * static_cast<double>(t) / 4.0);
        const Index phase = t % 8;
        r2(t) = (phase >= 1 && phase <= 4) ? 1.0 : 0.0;
    }
    sc.references.emplace("r1", r1);
    sc.references.emplace("r2", r2);

    if (id == 1) {
        sc.tasks.push_back({"r1", "sigma1", "sigma2", "r1"});
        sc.tasks.push_back({"r2", "sigma1", "sigma2", "r2"});
    } else {
        sc.tasks.push_back({"sigma2_r1", "sigma1", "sigma2", "r1"});
        sc.tasks.push_back({"sigma3_r1", "sigma1", "sigma3", "r1"});
    }
    return sc;
}

namespace detail {

enum class RunStage { similarity_only, ilc_only, full };

}  // namespace detail

/**
 * Executes a scenario: decomposes every system once, produces one similarity
 * report per distinct (host, guest) task pair, then runs each task's guest
 * learning loop and transfer. With no tasks at all, every unordered system
 * pair (alphabetical order) is compared instead so `similarity` still has
 * something to report.
 */
inline ScenarioResults run_scenario(const Scenario& sc,
                                    detail::RunStage stage = detail::RunStage::full) {
    ScenarioResults out;
    out.scenario_name = sc.name;
    out.T = sc.T;
    const LtvSystem& first = sc.systems.begin()->second;
    out.n_u = first.n_u;
    out.n_y = first.n_y;

    std::map<std::string, BehaviorDecomposition> decs;
    for (const auto& [name, sys] : sc.systems) {
        decs.emplace(name, decompose(sys));
    }

    std::vector<std::pair<std::string, std::string>> pair_keys;
    auto add_pair = [&](const std::string& host, const std::string& guest) {
        const std::pair<std::string, std::string> key{host, guest};
        for (const auto& existing : pair_keys) {
            if (existing == key) {
                return;
            }
        }
        pair_keys.push_back(key);
    };
    for (const TaskSpec& task : sc.tasks) {
        add_pair(task.host, task.guest);
    }
    if (sc.tasks.empty()) {
        for (auto it = sc.systems.begin(); it != sc.systems.end(); ++it) {
            for (auto jt = std::next(it); jt != sc.systems.end(); ++jt) {
                add_pair(it->first, jt->first);
            }
        }
    }

    std::map<std::pair<std::string, std::string>, std::size_t> pair_index;
    if (stage != detail::RunStage::ilc_only) {
        for (const auto& [host, guest] : pair_keys) {
            PairResult pr;
            pr.host = host;
            pr.guest = guest;
            pr.report =
                similarity_indexes(decs.at(host), decs.at(guest), sc.tolerances.similarity);
            pair_index.emplace(std::make_pair(host, guest), out.pairs.size());
            out.pairs.push_back(std::move(pr));
        }
    }
    if (stage == detail::RunStage::similarity_only) {
        return out;
    }

    std::map<std::pair<std::string, std::string>, TransferPlan> plans;
    for (const TaskSpec& task : sc.tasks) {
        const BehaviorDecomposition& host = decs.at(task.host);
        const BehaviorDecomposition& guest = decs.at(task.guest);

        TaskResult tr;
        tr.spec = task;
        tr.reference = sc.references.at(task.reference);
        tr.ilc = gradient_ilc(guest.lifted, guest.x0, tr.reference, sc.ilc);
        tr.guest_traj.u = tr.ilc.u_final;
        tr.guest_traj.y = tr.ilc.y_final;
        tr.guest_traj.w = stack_trajectory(tr.ilc.u_final, tr.ilc.y_final);

        if (stage == detail::RunStage::full) {
            const SimilarityReport& report =
                out.pairs[pair_index.at({task.host, task.guest})].report;
            auto plan_it = plans.find({task.host, task.guest});
            if (plan_it == plans.end()) {
                plan_it = plans
                              .emplace(std::make_pair(task.host, task.guest),
                                       TransferPlan(host, guest, report))
                              .first;
            }
            tr.transfer = plan_it->second.transfer(tr.guest_traj.w, sc.tolerances.membership);
            const Index n_ut = out.n_u * sc.T;
            tr.host_u = tr.transfer.w_h.head(n_ut);
            tr.host_y = tr.transfer.w_h.tail(out.n_y * sc.T);
        }
        out.tasks.push_back(std::move(tr));
    }
    return out;
}

/**
 * Writes the result files into `dir` (created if needed):
 *
 *   similarity.csv                k, s_k, theta_k_radians
 *   trajectory_<task>.csv         t, reference, guest_u, guest_y, host_u, host_y
 *   summary.csv                   task, distance, guest_residual, host_residual,
 *                                 ilc_final_error
 *   ilc_<task>.csv                iteration, error_norm
 *   comparison.csv                per-k indexes of every pair side by side,
 *                                 plus a mean row (written when two or more
 *                                 pairs were compared)
 *
 * With several pairs the similarity files are named
 * similarity_<host>_<guest>.csv instead. All floats carry 17 significant
 * digits and identical inputs produce byte-identical files.
 */
inline std::vector<std::string> emit_outputs(const ScenarioResults& results,
                                             const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir + ": " + ec.message());
    }
    std::vector<std::string> written;
    auto emit = [&](const std::string& file_name, auto&& fill) {
        CsvWriter w(fs::path(dir) / file_name);
        fill(w);
        w.close();
        written.push_back(file_name);
    };

    const bool single_pair = results.pairs.size() <= 1;
    for (const PairResult& pr : results.pairs) {
        const std::string file_name =
            single_pair ? "similarity.csv" : "similarity_" + pr.host + "_" + pr.guest + ".csv";
        emit(file_name, [&](CsvWriter& w) {
            w.row({"k", "s_k", "theta_k_radians"});
            for (Index k = 0; k < pr.report.s.size(); ++k) {
                w.row({std::to_string(k + 1), format_float(pr.report.s(k)),
                       format_float(pr.report.theta(k))});
            }
        });
    }
    if (results.pairs.empty() && results.tasks.empty()) {
        emit("similarity.csv",
             [&](CsvWriter& w) { w.row({"k", "s_k", "theta_k_radians"}); });
    }
    if (results.pairs.size() >= 2) {
        emit("comparison.csv", [&](CsvWriter& w) {
            std::vector<std::string> header{"k"};
            for (const PairResult& pr : results.pairs) {
                header.push_back("s_" + pr.host + "_" + pr.guest);
            }
            w.row(header);
            Index max_k = 0;
            for (const PairResult& pr : results.pairs) {
                max_k = std::max(max_k, pr.report.s.size());
            }
            for (Index k = 0; k < max_k; ++k) {
                std::vector<std::string> cells{std::to_string(k + 1)};
                for (const PairResult& pr : results.pairs) {
                    cells.push_back(k < pr.report.s.size() ? format_float(pr.report.s(k)) : "");
                }
                w.row(cells);
            }
            std::vector<std::string> mean_row{"mean"};
            for (const PairResult& pr : results.pairs) {
                mean_row.push_back(format_float(pr.report.mean_index()));
            }
            w.row(mean_row);
        });
    }

    const bool has_transfer = !results.tasks.empty() && results.tasks.front().host_u.size() > 0;
    for (const TaskResult& tr : results.tasks) {
        emit("ilc_" + tr.spec.name + ".csv", [&](CsvWriter& w) {
            w.row({"iteration", "error_norm"});
            for (std::size_t i = 0; i < tr.ilc.error_norms.size(); ++i) {
                w.row({std::to_string(i), format_float(tr.ilc.error_norms[i])});
            }
        });
        if (tr.host_u.size() == 0) {
            continue;
        }
        emit("trajectory_" + tr.spec.name + ".csv", [&](CsvWriter& w) {
            std::vector<std::string> header{"t"};
            auto append = [&header](const std::vector<std::string>& labels) {
                header.insert(header.end(), labels.begin(), labels.end());
            };
            append(channel_labels("reference", results.n_y));
            append(channel_labels("guest_u", results.n_u));
            append(channel_labels("guest_y", results.n_y));
            append(channel_labels("host_u", results.n_u));
            append(channel_labels("host_y", results.n_y));
            w.row(header);
            for (Index t = 0; t < results.T; ++t) {
                std::vector<std::string> cells{std::to_string(t)};
                auto push_block = [&cells, t](const Vector& v, Index channels) {
                    for (Index c = 0; c < channels; ++c) {
                        cells.push_back(format_float(v(t * channels + c)));
                    }
                };
                push_block(tr.reference, results.n_y);
                push_block(tr.guest_traj.u, results.n_u);
                push_block(tr.guest_traj.y, results.n_y);
                push_block(tr.host_u, results.n_u);
                push_block(tr.host_y, results.n_y);
                w.row(cells);
            }
        });
    }
    if (has_transfer) {
        emit("summary.csv", [&](CsvWriter& w) {
            w.row({"task", "distance", "guest_residual", "host_residual", "ilc_final_error"});
            for (const TaskResult& tr : results.tasks) {
                w.row({tr.spec.name, format_float(tr.transfer.distance),
                       format_float(tr.transfer.guest_residual),
                       format_float(tr.transfer.host_residual),
                       format_float(tr.ilc.error_norms.back())});
            }
        });
    }
    return written;
}

/// Runs a built-in scenario end to end and writes its files into `out_dir`.
inline ScenarioResults run_demo(int id, const std::string& out_dir) {
    Scenario sc = example_scenario(id);
    ScenarioResults results = run_scenario(sc);
    emit_outputs(results, out_dir);
    return results;
}

}  // namespace sbl
