// Command-line front end: gen, build-roadmap, solve, bench, verify, render.

#include "rearrange/bench.hpp"
#include "rearrange/io.hpp"
#include "rearrange/render.hpp"
#include "rearrange/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace rearrange;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::uint64_t seed{0};
    std::size_t k_grasps{4};
    std::size_t samples{600};
    double grasp_ratio{0.5};
    std::string roadmap_cache;
    std::string out;

    [[nodiscard]] RoadmapParams roadmap() const {
        RoadmapParams p;
        p.num_samples = samples;
        p.k_grasps = k_grasps;
        p.grasp_ratio = grasp_ratio;
        p.seed = seed;
        return p;
    }
};

void add_roadmap_flags(CLI::App* app, Common& c) {
    app->add_option("--k-grasps", c.k_grasps, "grasp configurations per cell")->check(CLI::PositiveNumber);
    app->add_option("--samples", c.samples, "roadmap configurations (excluding home)");
    app->add_option("--grasp-ratio", c.grasp_ratio, "share of samples that are grasp configurations")->check(CLI::Range(0.0, 1.0));
    app->add_option("--roadmap-cache", c.roadmap_cache, "directory for cached labeled roadmaps");
}

GenMode parse_mode(const std::string& s) {
    if (s == "rows") return GenMode::random_start_row_goals;
    if (s == "random") return GenMode::random_both;
    throw CLI::ValidationError("--mode", "expected rows or random");
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rearrangement planning for disc objects in a confined shelf"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--seed", c.seed, "base seed (REARRANGE_SEED overrides)");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random instance");
    std::size_t gen_n = 6;
    std::string gen_mode = "rows";
    gen->add_option("--n", gen_n, "number of objects");
    gen->add_option("--mode", gen_mode, "goal layout: rows (front rows first) or random");
    gen->add_option("--seed", c.seed, "instance seed");
    gen->add_option("--out", c.out, "output file (default stdout)");

    // build-roadmap
    auto* build = app.add_subcommand("build-roadmap", "sample and label a roadmap for the default workspace");
    build->add_option("--seed", c.seed, "roadmap seed");
    add_roadmap_flags(build, c);
    build->add_option("--out", c.out, "output file (default stdout unless --roadmap-cache is set)");

    // solve
    auto* solve = app.add_subcommand("solve", "solve one instance");
    std::string instance_path, solver_name = "cirs", dump_ledger;
    std::size_t solve_n = 6;
    bool global = false, start_blocking = false;
    double time_limit = 180;
    solve->add_option("--instance", instance_path, "instance JSON (otherwise generated from --n/--seed)");
    solve->add_option("--n", solve_n, "objects when generating");
    solve->add_option("--seed", c.seed, "instance and roadmap seed");
    solve->add_option("--solver", solver_name, "mrs, dfsdp or cirs")->check(CLI::IsMember({"mrs", "dfsdp", "cirs"}));
    solve->add_flag("--global", global, "wrap the solver in the buffer-perturbation planner");
    solve->add_option("--time-limit", time_limit, "seconds")->check(CLI::PositiveNumber);
    solve->add_flag("--start-blocking", start_blocking, "also prune moves blocked by other objects' start discs");
    solve->add_option("--dump-ledger", dump_ledger, "write the invalid-move ledger to this file ('-' for stderr)");
    solve->add_option("--out", c.out, "result JSON (default stdout)");
    add_roadmap_flags(solve, c);

    // bench
    auto* bench = app.add_subcommand("bench", "paired benchmark over seeded instances");
    BenchConfig bc;
    std::vector<std::string> bench_solvers{"cirs", "dfsdp", "mrs"};
    std::string bench_mode = "rows";
    std::size_t threads = 0;
    bench->add_option("--n", bc.n_values, "object counts (comma separated)")->delimiter(',');
    bench->add_option("--trials", bc.trials, "trials per object count")->check(CLI::PositiveNumber);
    bench->add_option("--solver", bench_solvers, "solvers (comma separated)")->delimiter(',')->check(CLI::IsMember({"mrs", "dfsdp", "cirs"}));
    bench->add_flag("--global", bc.global, "wrap each solver in the buffer-perturbation planner");
    bench->add_option("--time-limit", bc.time_limit, "seconds per run")->check(CLI::PositiveNumber);
    bench->add_option("--mode", bench_mode, "goal layout: rows or random");
    bench->add_flag("--start-blocking", start_blocking, "also prune moves blocked by other objects' start discs");
    bench->add_option("--threads", threads, "worker threads (0 = all cores)");
    bench->add_option("--seed", c.seed, "base seed");
    bench->add_option("--out", c.out, "output directory for trials.csv and summary.json")->required();
    add_roadmap_flags(bench, c);

    // verify
    auto* verify = app.add_subcommand("verify", "run the oracle suite");
    VerifyConfig vc;
    verify->add_option("--trials", vc.seeds, "instances per suite");
    verify->add_option("--n", vc.max_n, "largest object count (at most 5 for brute force)")->check(CLI::Range(0, 6));
    verify->add_option("--seed", c.seed, "base seed");
    verify->add_option("--samples", vc.roadmap.num_samples, "roadmap configurations for the label audit");
    verify->add_flag("--corrupt-label", vc.corrupt_label, "flip one label bit before the audit");
    verify->add_flag("--start-blocking", vc.constraints.start_blocking, "include start-blocking predicates");

    // render
    auto* render = app.add_subcommand("render", "write SVG scene and per-action frames");
    std::string result_path;
    render->add_option("--instance", instance_path, "instance JSON")->required();
    render->add_option("--result", result_path, "result JSON from solve (adds one frame per action)");
    render->add_option("--out", c.out, "output path prefix")->required();
    render->add_option("--seed", c.seed, "roadmap seed used by solve");
    add_roadmap_flags(render, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (const char* env = std::getenv("REARRANGE_SEED"); env && *env) {
        try {
            c.seed = std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "error: REARRANGE_SEED must be an unsigned integer\n";
            return 2;
        }
    }

    try {
        if (*gen) {
            const Instance inst = gen_instance(gen_n, parse_mode(gen_mode), c.seed);
            emit(c.out, to_json(inst).dump(2) + "\n");
            return 0;
        }

        if (*build) {
            const Instance world = make_world(WorldConfig{});
            ensure_dir(c.roadmap_cache);
            const LabeledRoadmap rm = load_or_build_roadmap(world, c.roadmap(), c.roadmap_cache);
            if (!c.out.empty() || c.roadmap_cache.empty()) emit(c.out, to_json(rm, roadmap_key(world, c.roadmap())).dump() + "\n");
            std::cerr << "roadmap " << roadmap_key(world, c.roadmap()) << ": " << rm.nodes.size() << " nodes, " << rm.edges.size()
                      << " edges, " << rm.count_role(NodeRole::grasp) << " grasp nodes\n";
            return 0;
        }

        if (*solve) {
            const Instance inst = instance_path.empty() ? gen_instance(solve_n, GenMode::random_start_row_goals, c.seed)
                                                        : instance_from_json(read_json_file(instance_path));
            ensure_dir(c.roadmap_cache);
            const LabeledRoadmap rm = load_or_build_roadmap(inst, c.roadmap(), c.roadmap_cache);
            ConstraintOptions opts;
            opts.start_blocking = start_blocking;
            if (!dump_ledger.empty()) {
                std::ostringstream os;
                detect_invalidity(inst, rm, opts).dump(os);
                if (dump_ledger == "-")
                    std::cerr << os.str();
                else
                    write_text_file(dump_ledger, os.str());
            }
            const LocalSolver kind = local_solver_from_string(solver_name);
            const Deadline deadline = Deadline::after(time_limit);
            json result;
            try {
                if (global) {
                    PertsOptions po;
                    po.constraints = opts;
                    result = to_json(perts(inst, rm, kind, deadline, c.seed, po), &rm);
                } else {
                    result = to_json(solve_monotone(kind, inst, rm, inst.start, deadline, opts), &rm);
                }
            } catch (const InstanceInfeasible& e) {
                result = {{"outcome", "infeasible"}, {"reason", e.what()}};
            }
            result["solver"] = solver_label(kind, global);
            emit(c.out, result.dump(2) + "\n");
            return 0;
        }

        if (*bench) {
            bc.solvers.clear();
            for (const auto& s : bench_solvers) bc.solvers.push_back(local_solver_from_string(s));
            bc.mode = parse_mode(bench_mode);
            bc.roadmap = c.roadmap();
            bc.constraints.start_blocking = start_blocking;
            bc.seed = c.seed;
            bc.threads = threads;
            bc.validate();
            ensure_dir(c.out);
            const auto rows = run_benchmark(bc);
            write_text_file(c.out + "/trials.csv", to_csv(rows));
            write_text_file(c.out + "/summary.json", summarize(rows).dump(2) + "\n");
            std::cerr << rows.size() << " rows written to " << c.out << "\n";
            return 0;
        }

        if (*verify) {
            vc.seed = c.seed;
            vc.roadmap.seed = c.seed;
            bool ok = true;
            for (const auto& p : run_verification(vc)) {
                std::cout << (p.passed ? "PASS " : "FAIL ") << p.name << " [" << p.cases << " cases] " << p.detail << "\n";
                ok = ok && p.passed;
            }
            return ok ? 0 : 1;
        }

        if (*render) {
            const Instance inst = instance_from_json(read_json_file(instance_path));
            std::vector<std::string> frames;
            if (result_path.empty()) {
                frames.push_back(render_scene(inst));
            } else {
                const json res = read_json_file(result_path);
                std::vector<ManipPath> actions;
                for (const auto& a : res.at("actions")) {
                    ManipPath p;
                    p.object = a.at("object").get<std::size_t>();
                    p.from_cell = a.at("from_cell").get<std::size_t>();
                    p.to_cell = a.at("to_cell").get<std::size_t>();
                    p.transit = a.at("transit").get<std::vector<std::size_t>>();
                    p.transfer = a.at("transfer").get<std::vector<std::size_t>>();
                    actions.push_back(std::move(p));
                }
                std::optional<LabeledRoadmap> rm;
                if (!c.roadmap_cache.empty()) rm = load_or_build_roadmap(inst, c.roadmap(), c.roadmap_cache);
                frames = render_frames(inst, rm ? &*rm : nullptr, actions);
            }
            write_text_file(c.out + ".svg", frames.front());
            char name[32];
            for (std::size_t i = 1; i < frames.size(); ++i) {
                std::snprintf(name, sizeof name, "_frame_%03zu.svg", i);
                write_text_file(c.out + name, frames[i]);
            }
            std::cerr << frames.size() << " frame(s) written\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
