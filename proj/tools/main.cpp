// aniso_topo: command-line driver for the anisotropic phase-field topology
// optimization solver. Subcommands: run, scenario, frank, wulff, sweep,
// validate. Exit codes: 0 success, 1 configuration/parameter error,
// 2 solver or IO failure.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "atop/anisotropy.hpp"
#include "atop/config.hpp"
#include "atop/simulate.hpp"
#include "atop/vtk.hpp"

namespace fs = std::filesystem;
using namespace atop;

namespace {

bool is_config_error(const std::exception& e) {
    return dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
           dynamic_cast<const UnknownScenario*>(&e) || dynamic_cast<const InvalidTagSegment*>(&e) ||
           dynamic_cast<const NonConvexUnsupported*>(&e);
}

std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string trace_header() { return "step,time,E_gl,compliance,J_total,mass,multiplier,inner_iters\n"; }

std::string trace_line(const TraceRow& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.12g,%.9g,%ld\n", r.step, r.time, r.e_gl,
                  r.compliance, r.j_total, r.mass, r.multiplier, r.inner_iters);
    return buf;
}

/// Execute one configured run into `out`, writing run.meta, trace.csv and
/// snapshots. Returns the final trace row.
TraceRow execute_run(const SimConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    write_text_atomic(out / "run.meta", "# resolved aniso_topo configuration\n" + print_config(cfg));

    std::string trace_text = trace_header();
    RunSinks sinks;
    sinks.on_trace = [&](const TraceRow& r) {
        trace_text += trace_line(r);
        write_text_atomic(out / "trace.csv", trace_text);
    };
    sinks.on_snapshot = [&](const Snapshot& s, const FeMesh& mesh) {
        write_vtk(mesh, {{"phi", &s.phi}}, {}, out / ("phi_" + std::to_string(s.step) + ".vtk"));
        if (!s.u.empty())
            write_vtk(mesh, {}, {{"displacement", &s.u}}, out / ("u_" + std::to_string(s.step) + ".vtk"));
    };

    RunResult result = run(cfg, &sinks);
    if (result.trace.empty()) throw SolverDiverged("run produced no steps");
    return result.trace.back();
}

void print_report(const TraceRow& r) {
    std::printf("step=%d t=%.9g E_gl=%.9g compliance=%.9g J_total=%.9g mass=%.12g multiplier=%.9g\n",
                r.step, r.time, r.e_gl, r.compliance, r.j_total, r.mass, r.multiplier);
}

int sweep_threads() {
    const char* env = std::getenv("ANISO_TOPO_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 1 ? n : 1;
}

std::string sanitize_token(std::string s) {
    for (char& c : s)
        if (c == '/' || c == '\\' || c == ' ' || c == ',') c = '_';
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic phase-field topology optimization"};
    app.require_subcommand(1);

    std::string config_path, out_dir, out_file, scenario_name, sweep_key, sweep_values, write_config;
    long seed_override = -1;
    double alpha = 0.0, delta = -1.0, lambda = -1.0;
    int samples = 256;

    CLI::App* cmd_run = app.add_subcommand("run", "run a configured simulation");
    cmd_run->add_option("--config", config_path, "configuration file")->required();
    cmd_run->add_option("--out", out_dir, "output directory")->required();
    cmd_run->add_option("--seed", seed_override, "override run.seed");

    CLI::App* cmd_scenario = app.add_subcommand("scenario", "run a built-in scenario preset");
    cmd_scenario->add_option("name", scenario_name,
                             "wulff_relax | dripping_convex | dripping_nonconvex | cantilever | bridge")
        ->required();
    cmd_scenario->add_option("--out", out_dir, "output directory");
    cmd_scenario->add_option("--write-config", write_config, "write the preset config file instead of running");
    cmd_scenario->add_option("--seed", seed_override, "override run.seed");

    CLI::App* cmd_frank = app.add_subcommand("frank", "sample a Frank diagram boundary to CSV");
    cmd_frank->add_option("--alpha", alpha, "cone parameter in (0,1]")->required();
    cmd_frank->add_option("--delta", delta, "regularization weight (> 0)");
    cmd_frank->add_option("--lambda", lambda, "non-convex apex parameter in (0,1)");
    cmd_frank->add_option("--samples", samples, "number of points (>= 8)");
    cmd_frank->add_option("--out", out_file, "output CSV file")->required();

    CLI::App* cmd_wulff = app.add_subcommand("wulff", "sample a Wulff shape boundary to CSV");
    cmd_wulff->add_option("--alpha", alpha, "cone parameter in (0,1]")->required();
    cmd_wulff->add_option("--delta", delta, "regularization weight (> 0)");
    cmd_wulff->add_option("--lambda", lambda, "rejected: Wulff shapes need a convex density");
    cmd_wulff->add_option("--samples", samples, "number of points (>= 8)");
    cmd_wulff->add_option("--out", out_file, "output CSV file")->required();

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run one simulation per value of a numeric config key");
    cmd_sweep->add_option("--config", config_path, "base configuration file")->required();
    cmd_sweep->add_option("--key", sweep_key, "entry to vary, as section.key")->required();
    cmd_sweep->add_option("--values", sweep_values, "comma-separated numeric values")->required();
    cmd_sweep->add_option("--out", out_dir, "output directory")->required();

    CLI::App* cmd_validate = app.add_subcommand("validate", "parse and validate a config without running");
    cmd_validate->add_option("--config", config_path, "configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_run->parsed()) {
            SimConfig cfg = parse_config(read_file(config_path));
            if (seed_override >= 0) cfg.seed = static_cast<unsigned long>(seed_override);
            print_report(execute_run(cfg, out_dir));
            return 0;
        }

        if (cmd_scenario->parsed()) {
            SimConfig cfg = scenario(scenario_name);
            if (seed_override >= 0) cfg.seed = static_cast<unsigned long>(seed_override);
            if (!write_config.empty()) {
                write_text_atomic(write_config, print_config(cfg));
                std::printf("wrote %s\n", write_config.c_str());
                if (out_dir.empty()) return 0;
            }
            if (out_dir.empty())
                throw ValidationError("scenario.--out", "present unless --write-config is used");
            print_report(execute_run(cfg, out_dir));
            return 0;
        }

        if (cmd_frank->parsed() || cmd_wulff->parsed()) {
            if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("anisotropy.alpha", "in (0,1]");
            if (delta >= 0.0 && !(delta > 0.0)) throw ValidationError("anisotropy.delta", "positive");
            if (lambda >= 0.0 && !(lambda > 0.0 && lambda < 1.0))
                throw ValidationError("anisotropy.lambda", "in (0,1)");
            if (delta > 0.0 && lambda > 0.0)
                throw ValidationError("anisotropy", "delta and lambda are mutually exclusive");
            if (samples < 8) throw ValidationError("samples", ">= 8");
            Anisotropy a = Anisotropy::convex_overhang(alpha);
            if (delta > 0.0) a = Anisotropy::regularized_overhang(alpha, delta);
            if (lambda > 0.0) a = Anisotropy::nonconvex_overhang(alpha, lambda);
            const DiagramSample d = cmd_frank->parsed() ? sample_frank(a, samples) : sample_wulff(a, samples);
            write_diagram_csv(d, out_file);
            std::printf("wrote %s\n", out_file.c_str());
            return 0;
        }

        if (cmd_sweep->parsed()) {
            const size_t dot = sweep_key.find('.');
            if (dot == std::string::npos || dot == 0 || dot + 1 == sweep_key.size())
                throw ValidationError("sweep.key", "of the form section.key");
            const std::string section = sweep_key.substr(0, dot);
            const std::string key = sweep_key.substr(dot + 1);

            std::vector<std::string> tokens;
            {
                std::stringstream ss(sweep_values);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    if (!std::string(cfgdetail::trim(tok)).empty())
                        tokens.push_back(std::string(cfgdetail::trim(tok)));
            }
            if (tokens.empty()) throw ValidationError("sweep.values", "a non-empty value list");

            const ConfigDocument base = parse_document(read_file(config_path));
            if (!base.has(section, key))
                throw ValidationError("sweep.key", "an existing numeric entry (" + sweep_key + " not found)");

            // validate every value up front so a typo cannot abort mid-sweep
            std::vector<SimConfig> cfgs;
            for (const std::string& tok : tokens) {
                cfgdetail::parse_double(sweep_key, tok);
                ConfigDocument doc = base;
                doc.set(section, key, tok);
                cfgs.push_back(resolve_config(doc));
            }

            std::atomic<size_t> next{0};
            std::atomic<bool> failed{false};
            std::mutex err_mutex;
            std::string first_error;
            bool error_is_config = false;

            const auto worker = [&]() {
                while (!failed.load()) {
                    const size_t i = next.fetch_add(1);
                    if (i >= cfgs.size()) return;
                    try {
                        const fs::path sub = fs::path(out_dir) / (key + "_" + sanitize_token(tokens[i]));
                        const TraceRow last = execute_run(cfgs[i], sub);
                        std::lock_guard<std::mutex> lock(err_mutex);
                        std::printf("%s=%s: ", sweep_key.c_str(), tokens[i].c_str());
                        print_report(last);
                    } catch (const std::exception& e) {
                        std::lock_guard<std::mutex> lock(err_mutex);
                        if (!failed.exchange(true)) {
                            first_error = e.what();
                            error_is_config = is_config_error(e);
                        }
                    }
                }
            };

            const int n_threads = std::min<int>(sweep_threads(), static_cast<int>(cfgs.size()));
            if (n_threads <= 1) {
                worker();
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
                for (std::thread& t : pool) t.join();
            }
            if (failed.load()) {
                std::fprintf(stderr, "error: %s\n", first_error.c_str());
                return error_is_config ? 1 : 2;
            }
            return 0;
        }

        if (cmd_validate->parsed()) {
            parse_config(read_file(config_path));
            std::printf("OK\n");
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return is_config_error(e) ? 1 : 2;
    }
    return 1;
}
