#pragma once
/**
 * @file    bench.hpp
 * @brief   Seeded benchmark runs: one instance per (n, trial), every solver on
 *          the same instance and roadmap, one record per (instance, solver).
 */

#include "rearrange/io.hpp"
#include "rearrange/parallel.hpp"
#include "rearrange/perts.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace rearrange {

struct BenchConfig {
    std::vector<std::size_t> n_values{3, 4, 5, 6, 7, 8};
    std::size_t trials{20};
    std::vector<LocalSolver> solvers{LocalSolver::cirs, LocalSolver::dfs_dp, LocalSolver::mrs};
    bool global{false};     ///< wrap each solver in PERTS
    double time_limit{180}; ///< seconds per (instance, solver)
    GenMode mode{GenMode::random_start_row_goals};
    WorldConfig world;
    RoadmapParams roadmap;
    ConstraintOptions constraints;
    std::uint64_t seed{0};
    std::size_t threads{0}; ///< 0 = hardware concurrency

    void validate() const {
        if (trials < 1) throw std::invalid_argument("trials must be at least 1");
        if (!(time_limit > 0)) throw std::invalid_argument("time limit must be positive");
        if (n_values.empty()) throw std::invalid_argument("no object counts given");
        if (solvers.empty()) throw std::invalid_argument("no solvers given");
    }
};

struct TrialRecord {
    std::string instance_id;
    std::string solver;
    std::string outcome;
    double wall_time{0};
    std::size_t mp_calls{0};
    std::size_t expansions{0};
    std::size_t pruned{0};
    std::size_t buffers{0};
    std::uint64_t seed{0};
};

/// Instance seed of trial t at size n; independent of the solver set and thread count.
inline std::uint64_t trial_seed(std::uint64_t base, std::size_t n, std::size_t t) { return base * 1'000'003ull + n * 10'000ull + t; }

inline std::string solver_label(LocalSolver s, bool global) { return global ? "perts(" + to_string(s) + ")" : to_string(s); }

inline TrialRecord run_trial(const Instance& inst, const LabeledRoadmap& rm, LocalSolver solver, const BenchConfig& cfg,
                             const std::string& id) {
    TrialRecord rec;
    rec.instance_id = id;
    rec.solver = solver_label(solver, cfg.global);
    rec.seed = inst.seed;
    const auto t0 = Clock::now();
    try {
        const Deadline deadline = Deadline::after(cfg.time_limit);
        if (cfg.global) {
            PertsOptions opts;
            opts.constraints = cfg.constraints;
            const auto r = perts(inst, rm, solver, deadline, inst.seed, opts);
            rec.outcome = to_string(r.outcome);
            rec.mp_calls = r.stats.mp_calls;
            rec.expansions = r.stats.expansions;
            rec.pruned = r.stats.pruned;
            rec.buffers = r.buffers;
        } else {
            const auto r = solve_monotone(solver, inst, rm, inst.start, deadline, cfg.constraints);
            rec.outcome = to_string(r.outcome);
            rec.mp_calls = r.stats.mp_calls;
            rec.expansions = r.stats.expansions;
            rec.pruned = r.stats.pruned;
        }
    } catch (const InstanceInfeasible&) {
        rec.outcome = "infeasible";
    } catch (const std::exception&) {
        rec.outcome = "error";
    }
    rec.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
    return rec;
}

/// Runs every (n, trial, solver) combination; rows come back ordered by n, trial, then solver.
inline std::vector<TrialRecord> run_benchmark(const BenchConfig& cfg) {
    cfg.validate();
    const Instance world = make_world(cfg.world);
    const LabeledRoadmap rm = build_labeled_roadmap(world, cfg.roadmap);

    struct Job {
        std::size_t n, t;
    };
    std::vector<Job> jobs;
    for (auto n : cfg.n_values)
        for (std::size_t t = 0; t < cfg.trials; ++t) jobs.push_back({n, t});

    const std::size_t S = cfg.solvers.size();
    std::vector<TrialRecord> rows(jobs.size() * S);
    parallel_for(
        jobs.size(),
        [&](std::size_t j) {
            const auto [n, t] = jobs[j];
            const std::uint64_t seed = trial_seed(cfg.seed, n, t);
            const std::string id = "n" + std::to_string(n) + "_t" + std::to_string(t);
            Instance inst;
            try {
                inst = gen_instance(n, cfg.mode, seed, cfg.world);
            } catch (const std::exception&) {
                for (std::size_t s = 0; s < S; ++s)
                    rows[j * S + s] = TrialRecord{id, solver_label(cfg.solvers[s], cfg.global), "error", 0, 0, 0, 0, 0, seed};
                return;
            }
            for (std::size_t s = 0; s < S; ++s) rows[j * S + s] = run_trial(inst, rm, cfg.solvers[s], cfg, id);
        },
        cfg.threads);
    return rows;
}

inline constexpr const char* kCsvHeader = "instance_id,solver,outcome,wall_time,mp_calls,expansions,pruned,buffers,seed";

inline std::string to_csv(const std::vector<TrialRecord>& rows) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    char wall[32];
    for (const auto& r : rows) {
        std::snprintf(wall, sizeof wall, "%.6f", r.wall_time);
        os << r.instance_id << ',' << r.solver << ',' << r.outcome << ',' << wall << ',' << r.mp_calls << ',' << r.expansions << ','
           << r.pruned << ',' << r.buffers << ',' << r.seed << '\n';
    }
    return os.str();
}

namespace detail {

template <class T>
double median(std::vector<T> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? static_cast<double>(v[m]) : 0.5 * (static_cast<double>(v[m - 1]) + static_cast<double>(v[m]));
}

inline std::size_t n_of(const std::string& id) { return std::stoul(id.substr(1, id.find('_') - 1)); }

} // namespace detail

/**
 * Aggregates per (n, solver): trials, solved, success_rate = solved / trials,
 * medians of wall time, planner calls and expansions over all rows, and mean
 * buffers over solved rows.
 */
inline json summarize(const std::vector<TrialRecord>& rows) {
    std::map<std::pair<std::size_t, std::string>, std::vector<const TrialRecord*>> groups;
    std::vector<std::pair<std::size_t, std::string>> order;
    for (const auto& r : rows) {
        const auto key = std::make_pair(detail::n_of(r.instance_id), r.solver);
        if (groups.find(key) == groups.end()) order.push_back(key);
        groups[key].push_back(&r);
    }
    json out = json::array();
    for (const auto& key : order) {
        const auto& g = groups[key];
        std::vector<double> times;
        std::vector<std::size_t> calls, exps;
        std::size_t solved = 0, buffers = 0;
        for (const auto* r : g) {
            times.push_back(r->wall_time);
            calls.push_back(r->mp_calls);
            exps.push_back(r->expansions);
            if (r->outcome == "solved") {
                ++solved;
                buffers += r->buffers;
            }
        }
        out.push_back({{"n", key.first},
                       {"solver", key.second},
                       {"trials", g.size()},
                       {"solved", solved},
                       {"success_rate", static_cast<double>(solved) / static_cast<double>(g.size())},
                       {"median_time", detail::median(times)},
                       {"median_mp_calls", detail::median(calls)},
                       {"median_expansions", detail::median(exps)},
                       {"mean_buffers", solved ? static_cast<double>(buffers) / static_cast<double>(solved) : 0.0}});
    }
    return out;
}

} // namespace rearrange
