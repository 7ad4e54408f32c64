#pragma once

// Experiment orchestration: flat key=value configs, presets, single runs and
// sweeps, CSV persistence. Output formatting is pinned ("%.12g", index-ordered
// aggregation, no wall-clock fields in CSVs) so identical config + seed gives
// byte-identical files regardless of the worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <numbers>
#include <thread>
#include <vector>

#include "mqlab/cost_model.hpp"
#include "mqlab/fem.hpp"
#include "mqlab/solvers.hpp"
#include "mqlab/spectral.hpp"
#include "mqlab/time_integrators.hpp"
#include "mqlab/two_scale.hpp"

namespace mqlab::cli {

// values accept plain decimals and fractions like 1/8
inline double parse_number(const std::string& s) {
    const auto slash = s.find('/');
    std::size_t used = 0;
    if (slash == std::string::npos) {
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("bad number: " + s);
        return v;
    }
    const double num = std::stod(s.substr(0, slash), &used);
    if (used != slash) throw std::invalid_argument("bad number: " + s);
    const std::string den_s = s.substr(slash + 1);
    const double den = std::stod(den_s, &used);
    if (used != den_s.size() || den == 0.0) throw std::invalid_argument("bad number: " + s);
    return num / den;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct Config {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    const std::string& get(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) throw std::invalid_argument("config: missing required key " + key);
        return it->second;
    }
    std::string get_or(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    double number(const std::string& key) const { return parse_number(get(key)); }
    std::size_t integer(const std::string& key) const {
        const double v = number(key);
        if (v < 0.0 || v != std::floor(v))
            throw std::invalid_argument("config: key " + key + " must be a nonnegative integer");
        return static_cast<std::size_t>(v);
    }
    std::vector<double> number_list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(get(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) out.push_back(parse_number(item));
        }
        if (out.empty()) throw std::invalid_argument("config: empty range for key " + key);
        return out;
    }
};

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "equation", "model", "d",       "n",          "eps1",     "delta",
        "coefficient", "seed", "mesh.N", "time.dt",   "sweep.eps1", "sweep.h",
        "sweep.dt",
    };
    return keys;
}

inline Config parse_config_text(const std::string& text) {
    Config cfg;
    std::stringstream ss(text);
    std::string line;
    std::vector<std::string> unknown;
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value, got '" + line + "'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config: empty key or value in '" + line + "'");
        const auto& kk = known_keys();
        if (std::find(kk.begin(), kk.end(), key) == kk.end()) unknown.push_back(key);
        cfg.values[key] = value;
    }
    if (!unknown.empty()) {
        std::string msg = "config: unknown keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw std::invalid_argument(msg);
    }
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline Config preset(const std::string& name) {
    if (name == "elliptic_sin1d_smoke")
        return parse_config_text(
            "equation=elliptic\nmodel=canonical\nd=1\nn=1\n"
            "eps1=1/8\ndelta=1/8\ncoefficient=sin1d\nseed=0\n");
    if (name == "table1_d1")
        return parse_config_text(
            "equation=elliptic\nmodel=canonical\nd=1\nn=1\n"
            "eps1=1/8\ndelta=eps1\ncoefficient=sin1d\nseed=0\n"
            "sweep.eps1=1/8,1/16,1/32,1/64\n");
    if (name == "eps_sweep")
        return parse_config_text(
            "equation=elliptic\nmodel=canonical\nd=1\nn=1\n"
            "eps1=1/8\ndelta=eps1\ncoefficient=sin1d\nseed=0\n"
            "sweep.eps1=1/8,1/16,1/32,1/64\n");
    if (name == "h_sweep")
        return parse_config_text(
            "equation=elliptic\nmodel=canonical\nd=1\nn=1\n"
            "eps1=1/8\ndelta=1/8\ncoefficient=sin1d\nseed=0\n"
            "sweep.h=1/8,1/16,1/32,1/64\n");
    if (name == "dt_sweep")
        return parse_config_text(
            "equation=parabolic\nmodel=canonical\nd=1\nn=1\n"
            "eps1=1/8\ndelta=1/8\ncoefficient=sin1d\nseed=0\n"
            "sweep.dt=1/8,1/16,1/32,1/64\n");
    throw std::invalid_argument("unknown preset: " + name);
}

struct RunManifest {
    Config config;
    std::size_t seed = 0;
    std::vector<std::string> outputs;
    double wall_time = 0.0;
    bool ok = true;
};

namespace detail {

inline Equation parse_equation(const std::string& s) {
    if (s == "elliptic") return Equation::elliptic;
    if (s == "parabolic") return Equation::parabolic;
    if (s == "wave") return Equation::wave;
    throw std::invalid_argument("config: unknown equation " + s);
}

inline Model parse_model(const std::string& s) {
    if (s == "canonical") return Model::canonical;
    if (s == "homogenized") return Model::homogenized;
    throw std::invalid_argument("config: unknown model " + s);
}

inline ExperimentConfig experiment_from(const Config& cfg) {
    ExperimentConfig e;
    e.equation = parse_equation(cfg.get("equation"));
    e.model = parse_model(cfg.get("model"));
    e.d = cfg.integer("d");
    e.n = std::max<std::size_t>(1, cfg.has("n") ? cfg.integer("n") : 1);
    e.eps1 = cfg.number("eps1");
    e.delta = cfg.get_or("delta", "eps1") == "eps1" ? e.eps1 : cfg.number("delta");
    e.validate();
    return e;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);  // binary: stable newlines everywhere
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 == header.size() ? "\n" : ",");
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::runtime_error("csv row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 == row.size() ? "\n" : ",");
    }
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline std::vector<double> node_coordinates(const TensorMesh& mesh, std::size_t flat) {
    std::vector<double> x(mesh.d);
    const double h = mesh.h();
    for (std::size_t dim = 0; dim < mesh.d; ++dim) {
        x[dim] = static_cast<double>(flat % mesh.N + 1) * h;
        flat /= mesh.N;
    }
    return x;
}

inline OperatorFamily family_of(const ExperimentConfig& e) {
    switch (e.equation) {
        case Equation::elliptic:
            return e.model == Model::canonical ? OperatorFamily::elliptic_canonical
                                               : OperatorFamily::elliptic_two_scale;
        case Equation::parabolic:
            return e.model == Model::canonical ? OperatorFamily::parabolic_canonical
                                               : OperatorFamily::parabolic_homogenized;
        case Equation::wave:
        default:
            return e.model == Model::canonical ? OperatorFamily::wave_canonical
                                               : OperatorFamily::wave_homogenized;
    }
}

}  // namespace detail

// single pipeline: assemble -> solve -> analyze -> persist four CSVs
inline RunManifest run_single(const Config& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out_dir);
    auto e = detail::experiment_from(cfg);
    auto params = select_parameters(e);
    if (cfg.has("mesh.N")) {
        params.N = cfg.integer("mesh.N");
        if (params.N == 0) throw std::invalid_argument("config: mesh.N must be positive");
        params.h = 1.0 / static_cast<double>(params.N + 1);
    }
    const double dt = cfg.has("time.dt") ? cfg.number("time.dt") : e.delta;
    const std::size_t n_steps =
        e.equation == Equation::elliptic ? 0 : static_cast<std::size_t>(std::ceil(1.0 / dt));
    auto coeff = presets::by_name(cfg.get_or("coefficient", "sin1d"), e.eps1, e.n);

    TensorMesh mesh(e.d, params.N);
    const auto one = [](const std::vector<double>&) { return 1.0; };
    std::vector<double> u;           // primary unknown at the final state
    bool oracle_checked = false, oracle_pass = true;

    auto check_oracle = [&](const SparseSymMatrix& a, const std::vector<double>& rhs,
                            const std::vector<double>& x, double tol) {
        if (a.n_rows() > 5000) return;
        oracle_checked = true;
        auto ref = dense_direct_solve(a, rhs);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            diff += (ref[i] - x[i]) * (ref[i] - x[i]);
            scale += ref[i] * ref[i];
        }
        if (std::sqrt(diff) > tol * std::max(1.0, std::sqrt(scale))) oracle_pass = false;
    };

    if (e.equation == Equation::elliptic) {
        if (e.model == Model::canonical) {
            auto a = assemble_canonical(coeff, mesh);
            auto f = assemble_force(one, mesh);
            u = cg_solve(a, f, 1e-10).first;
            check_oracle(a, f, u, 1e-8);
        } else {
            auto hs = assemble_homogenized(coeff, mesh, e.n, one);
            auto x = cg_solve(hs.matrix, hs.force, 1e-10).first;
            check_oracle(hs.matrix, hs.force, x, 1e-8);
            u.assign(x.begin() + static_cast<std::ptrdiff_t>(hs.u0_offset), x.end());
        }
    } else {
        auto M = mass_d(mesh);
        auto force = assemble_force(one, mesh);
        const std::size_t nd = M.n_rows();
        TimeForce F = [&](double) { return force; };
        std::vector<double> u0(nd, 0.0), v0(nd, 0.0);
        if (e.equation == Equation::wave) {
            // smooth standing-wave initial data, zero force
            for (std::size_t i = 0; i < nd; ++i) {
                double val = 1.0;
                for (double x : detail::node_coordinates(mesh, i))
                    val *= std::sin(std::numbers::pi * x);
                u0[i] = val;
            }
            F = [nd](double) { return std::vector<double>(nd, 0.0); };
        }
        BlockTimeSystem sys;
        std::size_t u_offset = 0, u_len = nd;
        if (e.model == Model::canonical) {
            auto a = assemble_canonical(coeff, mesh);
            sys = e.equation == Equation::parabolic
                      ? parabolic_canonical(M, a, dt, n_steps, F, u0)
                      : wave_canonical(M, a, dt, n_steps, F, u0, v0);
        } else {
            auto hs = assemble_homogenized(coeff, mesh, e.n, one);
            sys = e.equation == Equation::parabolic
                      ? parabolic_homogenized(hs, M, dt, n_steps, F, u0)
                      : wave_homogenized(hs, M, dt, n_steps, F, u0, v0);
            u_offset = hs.u0_offset;
        }
        auto traj = march_reference(sys);
        const auto& last = traj.back();
        u.assign(last.begin() + static_cast<std::ptrdiff_t>(u_offset),
                 last.begin() + static_cast<std::ptrdiff_t>(u_offset + u_len));
        if (sys.block_size() * sys.n_steps <= 5000) {
            oracle_checked = true;
            auto global = solve_global(sys);
            const std::size_t off = (sys.n_steps - 1) * sys.block_size();
            for (std::size_t i = 0; i < sys.block_size(); ++i)
                if (std::abs(global[off + i] - last[i]) > 1e-9) oracle_pass = false;
        }
    }

    // solution.csv: final-state u over the macro mesh
    std::vector<std::vector<std::string>> sol_rows;
    std::vector<std::string> sol_header = {"index"};
    for (std::size_t dim = 0; dim < e.d; ++dim) sol_header.push_back("x" + std::to_string(dim));
    sol_header.push_back("u");
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i)};
        for (double x : detail::node_coordinates(mesh, i)) row.push_back(format_number(x));
        row.push_back(format_number(u[i]));
        sol_rows.push_back(std::move(row));
    }

    // spectral.csv: the verify_bounds report for the matching operator family
    BoundsCase bc;
    bc.coeff = coeff;
    bc.d = e.d;
    bc.N = params.N;
    bc.dt = e.equation == Equation::elliptic ? 0.0 : dt;
    bc.family = detail::family_of(e);
    auto spec = verify_bounds(bc);
    std::vector<std::vector<std::string>> spec_rows = {{
        std::to_string(spec.s),
        format_number(spec.max_entry),
        format_number(spec.lambda_min),
        format_number(spec.lambda_max),
        format_number(spec.kappa),
        format_number(spec.theory_bound_kappa),
        spec.bound_satisfied ? "1" : "0",
    }};
    if (!spec.bound_satisfied) oracle_pass = false;

    // cost.csv: the theory-constant cost report at the selected parameters
    auto cost = theory_report(e);
    std::vector<std::vector<std::string>> cost_rows = {{
        format_number(cost.params.h),
        format_number(cost.params.dof),
        format_number(cost.s),
        format_number(cost.kappa),
        format_number(cost.classical_cost),
        format_number(cost.tau),
        format_number(cost.queries),
        format_number(cost.gates),
        format_number(cost.m_qubits),
    }};

    // summary.csv: config echo plus the oracle verdicts (no wall-clock fields)
    std::vector<std::vector<std::string>> sum_rows = {{
        cfg.get("equation"),
        cfg.get("model"),
        std::to_string(e.d),
        std::to_string(e.n),
        format_number(e.eps1),
        format_number(e.delta),
        format_number(params.h),
        std::to_string(params.N),
        format_number(e.equation == Equation::elliptic ? 0.0 : dt),
        std::to_string(n_steps),
        oracle_checked ? "1" : "0",
        oracle_pass ? "1" : "0",
    }};

    RunManifest man;
    man.config = cfg;
    man.seed = cfg.has("seed") ? cfg.integer("seed") : 0;
    const std::string base = out_dir + "/";
    detail::write_csv(base + "solution.csv", sol_header, sol_rows);
    detail::write_csv(base + "spectral.csv",
                      {"s", "max_entry", "lambda_min", "lambda_max", "kappa", "bound", "pass"},
                      spec_rows);
    detail::write_csv(base + "cost.csv",
                      {"h", "dof", "s", "kappa", "classical_cost", "tau", "queries", "gates", "m"},
                      cost_rows);
    detail::write_csv(base + "summary.csv",
                      {"equation", "model", "d", "n", "eps1", "delta", "h", "N", "dt", "n_steps",
                       "oracle_checked", "oracle_pass"},
                      sum_rows);
    man.outputs = {base + "solution.csv", base + "spectral.csv", base + "cost.csv",
                   base + "summary.csv"};
    man.ok = oracle_pass;
    man.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return man;
}

// expand the (single) active sweep key into per-run configs
inline std::vector<Config> expand_sweep(const Config& cfg) {
    std::vector<std::string> active;
    for (const std::string& key : {"sweep.eps1", "sweep.h", "sweep.dt"})
        if (cfg.has(key)) active.push_back(key);
    if (active.empty()) return {cfg};
    if (active.size() > 1)
        throw std::invalid_argument("config: only one sweep key may be active");
    const std::string& key = active[0];
    std::vector<Config> runs;
    for (double v : cfg.number_list(key)) {
        Config c = cfg;
        c.values.erase(key);
        if (key == "sweep.eps1") {
            c.values["eps1"] = format_number(v);
        } else if (key == "sweep.h") {
            const auto cells = static_cast<std::size_t>(std::llround(1.0 / v));
            if (cells < 2) throw std::invalid_argument("config: sweep.h value too coarse");
            c.values["mesh.N"] = std::to_string(cells - 1);
        } else {
            c.values["time.dt"] = format_number(v);
        }
        runs.push_back(std::move(c));
    }
    return runs;
}

// deterministic orchestration: runs execute on up to `jobs` workers, results
// aggregate strictly by run index
inline std::vector<RunManifest> run_sweep(const Config& cfg, const std::string& out_dir,
                                          std::size_t jobs = 1) {
    auto runs = expand_sweep(cfg);
    std::vector<RunManifest> manifests(runs.size());
    std::vector<std::string> errors(runs.size());
    jobs = std::max<std::size_t>(1, std::min(jobs, runs.size()));
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= runs.size()) return;
            try {
                manifests[i] = run_single(runs[i], out_dir + "/run_" + std::to_string(i));
            } catch (const std::exception& ex) {
                errors[i] = ex.what();
            }
        }
    };
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < runs.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("run " + std::to_string(i) + " failed: " + errors[i]);

    // aggregated sweep.csv: one summary row per run, index order
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < manifests.size(); ++i) {
        auto sum = detail::read_csv(out_dir + "/run_" + std::to_string(i) + "/summary.csv");
        std::vector<std::string> row = {std::to_string(i)};
        row.insert(row.end(), sum.at(1).begin(), sum.at(1).end());
        rows.push_back(std::move(row));
    }
    if (!manifests.empty()) {
        detail::write_csv(out_dir + "/sweep.csv",
                          {"run", "equation", "model", "d", "n", "eps1", "delta", "h", "N", "dt",
                           "n_steps", "oracle_checked", "oracle_pass"},
                          rows);
        for (auto& m : manifests) m.outputs.push_back(out_dir + "/sweep.csv");
    }
    return manifests;
}

// Table 1 reproduction: numeric exponent fits against the symbolic values
inline bool run_table1(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::vector<double> eps = {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0};
    std::vector<std::vector<std::string>> rows;
    bool all_pass = true;
    const char* eq_names[] = {"elliptic", "parabolic", "wave"};
    const char* mo_names[] = {"canonical", "homogenized"};
    for (auto eq : {Equation::elliptic, Equation::parabolic, Equation::wave}) {
        for (auto mo : {Model::canonical, Model::homogenized}) {
            std::vector<double> cc, qc;
            ExperimentConfig e;
            e.equation = eq;
            e.model = mo;
            e.d = 1;
            e.n = 1;
            for (double ep : eps) {
                e.eps1 = ep;
                e.delta = ep;
                auto rep = theory_report(e);
                cc.push_back(rep.classical_cost);
                qc.push_back(rep.queries);
            }
            e.eps1 = e.delta = 0.25;
            const double kc = classical_exponent(e).value();
            const double kq = quantum_exponent(e).value();
            const double fc = fit_table1(eps, cc).exponent;
            const double fq = fit_table1(eps, qc).exponent;
            const bool pc = std::abs(fc - kc) <= 0.2;
            const bool pq = std::abs(fq - kq) <= 0.2;
            all_pass = all_pass && pc && pq;
            rows.push_back({eq_names[static_cast<int>(eq)], mo_names[static_cast<int>(mo)],
                            "classical", format_number(kc), format_number(fc), pc ? "1" : "0"});
            rows.push_back({eq_names[static_cast<int>(eq)], mo_names[static_cast<int>(mo)],
                            "quantum", format_number(kq), format_number(fq), pq ? "1" : "0"});
        }
    }
    detail::write_csv(out_dir + "/table1.csv",
                      {"equation", "model", "cost_kind", "exponent_theory", "exponent_fit",
                       "pass"},
                      rows);
    return all_pass;
}

// quick structural invariant suite for --verify
inline bool verify_suite() {
    bool ok = true;
    // mass/stiffness entries at N = 7
    TensorMesh mesh(1, 7);
    const double h = mesh.h();
    auto m = mass_1d(mesh);
    auto k = stiffness_1d(mesh);
    for (std::size_t i = 0; i < 7; ++i) {
        for (const auto& e : m.row(i)) {
            const double want = e.col == i ? 2.0 * h / 3.0 : h / 6.0;
            if (std::abs(e.value - want) > 1e-15) ok = false;
        }
        for (const auto& e : k.row(i)) {
            const double want = e.col == i ? 2.0 / h : -1.0 / h;
            if (std::abs(e.value - want) > 1e-15) ok = false;
        }
    }
    // sparsity equality and CG-vs-dense on a small canonical system
    for (std::size_t d : {1, 2}) {
        TensorMesh md(d, 5);
        auto a = assemble_canonical(presets::sin1d(0.25), md);
        if (a.sparsity() != static_cast<std::size_t>(std::pow(3.0, static_cast<double>(d))))
            ok = false;
        auto f = assemble_force([](const std::vector<double>&) { return 1.0; }, md);
        auto x = cg_solve(a, f, 1e-12).first;
        auto ref = dense_direct_solve(a, f);
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::abs(x[i] - ref[i]) > 1e-8) ok = false;
    }
    return ok;
}

}  // namespace mqlab::cli
