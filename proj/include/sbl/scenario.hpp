#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbl/ilc.hpp"
#include "sbl/system.hpp"
#include "sbl/types.hpp"

namespace sbl {

/// Scenario file or schema problem. The message carries the field path of
/// the offending entry (for example "systems.sigma1.A").
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem problem while reading or writing artifacts.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ToleranceConfig {
    double similarity = kDefaultSimilarityTol;
    double membership = kDefaultMembershipTol;
};

/// One transfer job: the guest solves `reference`, the host receives it.
struct TaskSpec {
    std::string name;
    std::string host;
    std::string guest;
    std::string reference;
};

/**
 * A full experiment description: named systems over a shared horizon, named
 * reference signals, and the transfer tasks to run between them. All systems
 * in one scenario share input size, output size and horizon.
 */
struct Scenario {
    std::string name;
    Index T = 0;
    std::map<std::string, LtvSystem> systems;
    std::map<std::string, Vector> references;
    std::vector<TaskSpec> tasks;
    ToleranceConfig tolerances;
    IlcOptions ilc;
    std::string output_dir = "out";
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& msg) {
    throw ScenarioError(path.empty() ? msg : path + ": " + msg);
}

inline double require_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        schema_fail(path, "expected a number");
    }
    return j.get<double>();
}

inline Matrix matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        schema_fail(path, "expected a matrix as an array of rows");
    }
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j.front().size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            schema_fail(path, "row " + std::to_string(i) + " has length " +
                                  std::to_string(row.size()) + ", expected " +
                                  std::to_string(cols));
        }
        for (Index k = 0; k < cols; ++k) {
            m(i, k) = require_number(row[static_cast<std::size_t>(k)],
                                     path + "[" + std::to_string(i) + "][" + std::to_string(k) +
                                         "]");
        }
    }
    return m;
}

inline Vector vector_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) {
        schema_fail(path, "expected an array of numbers");
    }
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Index>(i)) = require_number(j[i], path + "[" + std::to_string(i) + "]");
    }
    return v;
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index k = 0; k < m.cols(); ++k) {
            row.push_back(m(i, k));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

/**
 * A schedule is either a bare matrix (constant in t), an object with "base"
 * and optional "slope" (affine in t), or an object with "steps" listing one
 * matrix per time step.
 */
inline MatrixSchedule schedule_from_json(const json& j, const std::string& path) {
    if (j.is_array()) {
        return MatrixSchedule::constant(matrix_from_json(j, path));
    }
    if (!j.is_object()) {
        schema_fail(path, "expected a matrix, {base, slope} or {steps}");
    }
    if (j.contains("steps")) {
        const json& steps = j.at("steps");
        if (!steps.is_array()) {
            schema_fail(path + ".steps", "expected an array of matrices");
        }
        std::vector<Matrix> mats;
        mats.reserve(steps.size());
        for (std::size_t t = 0; t < steps.size(); ++t) {
            mats.push_back(matrix_from_json(steps[t], path + ".steps[" + std::to_string(t) + "]"));
        }
        return MatrixSchedule::per_step(std::move(mats));
    }
    if (!j.contains("base")) {
        schema_fail(path, "schedule object needs \"base\" or \"steps\"");
    }
    Matrix base = matrix_from_json(j.at("base"), path + ".base");
    Matrix slope = j.contains("slope")
                       ? matrix_from_json(j.at("slope"), path + ".slope")
                       : Matrix(Matrix::Zero(base.rows(), base.cols()));
    return MatrixSchedule::affine(std::move(base), std::move(slope));
}

inline Vector sample_reference(const json& j, Index T, Index n_y, const std::string& path) {
    if (j.is_array()) {
        Vector v = vector_from_json(j, path);
        if (v.size() != n_y * T) {
            schema_fail(path, "sample list has length " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(n_y * T));
        }
        return v;
    }
    if (!j.is_object() || !j.contains("type")) {
        schema_fail(path, "expected a sample array or a generator object with \"type\"");
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "samples") {
        if (!j.contains("values")) {
            schema_fail(path, "samples generator needs \"values\"");
        }
        return sample_reference(j.at("values"), T, n_y, path + ".values");
    }
    if (n_y != 1) {
        schema_fail(path, "generator \"" + type +
                              "\" produces one channel; give explicit samples for " +
                              std::to_string(n_y) + " output channels");
    }
    const double amplitude = j.contains("amplitude")
                                 ? require_number(j.at("amplitude"), path + ".amplitude")
                                 : 1.0;
    if (!j.contains("period")) {
        schema_fail(path, "generator \"" + type + "\" needs \"period\"");
    }
    const double period = require_number(j.at("period"), path + ".period");
    if (period <= 0.0) {
        schema_fail(path + ".period", "must be positive");
    }
    Vector r(T);
    if (type == "sine") {
        for (Index t = 0; t < T; ++t) {
            r(t) = amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
        }
        return r;
    }
    if (type == "pulse") {
        std::set<long> high;
        if (j.contains("high")) {
            for (const json& h : j.at("high")) {
                high.insert(h.get<long>());
            }
        } else {
            schema_fail(path, "pulse generator needs \"high\" (list of step offsets)");
        }
        for (Index t = 0; t < T; ++t) {
            const long phase = static_cast<long>(t) % static_cast<long>(period);
            r(t) = high.count(phase) ? amplitude : 0.0;
        }
        return r;
    }
    schema_fail(path + ".type", "unknown generator \"" + type + "\"");
}

}  // namespace detail

/// Builds a validated Scenario from parsed JSON. `source` names the origin
/// for error messages (a file path or "<inline>").
inline Scenario scenario_from_json(const nlohmann::json& root, const std::string& source) {
    using detail::schema_fail;
    if (!root.is_object()) {
        schema_fail(source, "top level must be an object");
    }
    Scenario sc;
    sc.name = root.value("name", source);
    if (!root.contains("horizon")) {
        schema_fail("horizon", "missing (number of time steps)");
    }
    sc.T = root.at("horizon").get<Index>();
    if (sc.T < 1) {
        schema_fail("horizon", "must be at least 1");
    }

    if (!root.contains("systems") || !root.at("systems").is_object()) {
        schema_fail("systems", "missing or not an object of named systems");
    }
    Index n_u = -1;
    Index n_y = -1;
    for (const auto& [sys_name, body] : root.at("systems").items()) {
        const std::string path = "systems." + sys_name;
        if (!body.is_object()) {
            schema_fail(path, "expected an object");
        }
        SystemDescription desc;
        desc.name = sys_name;
        desc.T = sc.T;
        for (const char* field : {"A", "B", "C", "D", "x0"}) {
            if (!body.contains(field)) {
                schema_fail(path + "." + field, "missing");
            }
        }
        desc.A = detail::schedule_from_json(body.at("A"), path + ".A");
        desc.B = detail::schedule_from_json(body.at("B"), path + ".B");
        desc.C = detail::schedule_from_json(body.at("C"), path + ".C");
        desc.D = detail::schedule_from_json(body.at("D"), path + ".D");
        desc.x0 = detail::vector_from_json(body.at("x0"), path + ".x0");
        LtvSystem sys;
        try {
            sys = validate(desc);
        } catch (const std::invalid_argument& err) {
            schema_fail(path, err.what());
        }
        if (n_u < 0) {
            n_u = sys.n_u;
            n_y = sys.n_y;
        } else if (sys.n_u != n_u || sys.n_y != n_y) {
            schema_fail(path, "input/output sizes (" + std::to_string(sys.n_u) + ", " +
                                  std::to_string(sys.n_y) +
                                  ") differ from the scenario's (" + std::to_string(n_u) + ", " +
                                  std::to_string(n_y) + ")");
        }
        sc.systems.emplace(sys_name, std::move(sys));
    }
    if (sc.systems.empty()) {
        schema_fail("systems", "at least one system is required");
    }

    if (root.contains("references")) {
        if (!root.at("references").is_object()) {
            schema_fail("references", "expected an object of named signals");
        }
        for (const auto& [ref_name, body] : root.at("references").items()) {
            sc.references.emplace(
                ref_name, detail::sample_reference(body, sc.T, n_y, "references." + ref_name));
        }
    }

    if (root.contains("tasks")) {
        if (!root.at("tasks").is_array()) {
            schema_fail("tasks", "expected an array");
        }
        std::set<std::string> used_names;
        for (std::size_t i = 0; i < root.at("tasks").size(); ++i) {
            const std::string path = "tasks[" + std::to_string(i) + "]";
            const nlohmann::json& body = root.at("tasks")[i];
            if (!body.is_object()) {
                schema_fail(path, "expected an object");
            }
            TaskSpec task;
            for (const char* field : {"host", "guest", "reference"}) {
                if (!body.contains(field)) {
                    schema_fail(path + "." + field, "missing");
                }
            }
            task.host = body.at("host").get<std::string>();
            task.guest = body.at("guest").get<std::string>();
            task.reference = body.at("reference").get<std::string>();
            task.name = body.value("name", task.guest + "_" + task.reference);
            for (const std::string& sys_name : {task.host, task.guest}) {
                if (!sc.systems.count(sys_name)) {
                    schema_fail(path, "unknown system: " + sys_name);
                }
            }
            if (!sc.references.count(task.reference)) {
                schema_fail(path, "unknown reference: " + task.reference);
            }
            if (!used_names.insert(task.name).second) {
                schema_fail(path, "duplicate task name: " + task.name);
            }
            sc.tasks.push_back(std::move(task));
        }
    }

    if (root.contains("tolerances")) {
        const nlohmann::json& tols = root.at("tolerances");
        sc.tolerances.similarity = tols.value("similarity", sc.tolerances.similarity);
        sc.tolerances.membership = tols.value("membership", sc.tolerances.membership);
    }
    if (root.contains("ilc")) {
        const nlohmann::json& ilc = root.at("ilc");
        if (ilc.contains("gamma") && !ilc.at("gamma").is_null()) {
            sc.ilc.gamma = detail::require_number(ilc.at("gamma"), "ilc.gamma");
        }
        sc.ilc.max_iters = ilc.value("max_iters", sc.ilc.max_iters);
        sc.ilc.err_tol = ilc.value("err_tol", sc.ilc.err_tol);
        if (sc.ilc.max_iters < 0) {
            schema_fail("ilc.max_iters", "must be nonnegative");
        }
    }
    sc.output_dir = root.value("output_dir", sc.output_dir);
    return sc;
}

/// Loads and validates a scenario file. Parse errors keep the parser's line
/// and column information, prefixed with the path.
inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open scenario file: " + path);
    }
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw ScenarioError(path + ": " + err.what());
    }
    try {
        return scenario_from_json(root, path);
    } catch (const nlohmann::json::exception& err) {
        throw ScenarioError(path + ": " + err.what());
    }
}

/// Serializes a scenario back to JSON with all schedules in expanded per-step
/// form and all references as explicit samples; reloading the result yields
/// an equivalent scenario.
inline nlohmann::json scenario_to_json(const Scenario& sc) {
    using detail::matrix_to_json;
    nlohmann::json root;
    root["name"] = sc.name;
    root["horizon"] = sc.T;
    nlohmann::json systems = nlohmann::json::object();
    for (const auto& [sys_name, sys] : sc.systems) {
        nlohmann::json body;
        auto steps = [](const std::vector<Matrix>& mats) {
            nlohmann::json arr = nlohmann::json::array();
            for (const Matrix& m : mats) {
                arr.push_back(matrix_to_json(m));
            }
            return nlohmann::json{{"steps", std::move(arr)}};
        };
        body["A"] = steps(sys.A);
        body["B"] = steps(sys.B);
        body["C"] = steps(sys.C);
        body["D"] = steps(sys.D);
        body["x0"] = detail::vector_to_json(sys.x0);
        systems[sys_name] = std::move(body);
    }
    root["systems"] = std::move(systems);
    nlohmann::json refs = nlohmann::json::object();
    for (const auto& [ref_name, samples] : sc.references) {
        refs[ref_name] = detail::vector_to_json(samples);
    }
    root["references"] = std::move(refs);
    nlohmann::json tasks = nlohmann::json::array();
    for (const TaskSpec& t : sc.tasks) {
        tasks.push_back({{"name", t.name},
                         {"host", t.host},
                         {"guest", t.guest},
                         {"reference", t.reference}});
    }
    root["tasks"] = std::move(tasks);
    root["tolerances"] = {{"similarity", sc.tolerances.similarity},
                          {"membership", sc.tolerances.membership}};
    nlohmann::json ilc;
    if (sc.ilc.gamma.has_value()) {
        ilc["gamma"] = *sc.ilc.gamma;
    }
    ilc["max_iters"] = sc.ilc.max_iters;
    ilc["err_tol"] = sc.ilc.err_tol;
    root["ilc"] = std::move(ilc);
    root["output_dir"] = sc.output_dir;
    return root;
}

}  // namespace sbl
