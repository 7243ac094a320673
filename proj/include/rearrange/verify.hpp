#pragma once
/**
 * @file    verify.hpp
 * @brief   Oracle suite: solver verdicts vs permutation brute force, ledger
 *          soundness, prune subset, label equivalence and label-vs-online
 *          path queries. Each property reports pass/fail with a short detail.
 */

#include "rearrange/oracles.hpp"
#include "rearrange/solvers.hpp"

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace rearrange {

struct PropertyResult {
    std::string name;
    bool passed{true};
    std::size_t cases{0};
    std::string detail;
};

struct VerifyConfig {
    std::size_t seeds{100};
    std::size_t max_n{5};
    std::uint64_t seed{0};
    WorldConfig world;
    RoadmapParams roadmap{150, 0.5, 10, 4, 0.5, 0, kDefaultEdgeResolution};
    std::size_t path_queries{1000};
    bool corrupt_label{false};
    ConstraintOptions constraints;
};

struct SuiteTally {
    std::size_t instances{0};
    std::size_t verdict_mismatches{0};
    std::size_t replay_failures{0};
    std::size_t ledger_violations{0};
    std::size_t exhausted_pairs{0};
    std::size_t prune_violations{0};
    std::size_t prune_strict{0};

    void add(const SuiteTally& o) {
        instances += o.instances;
        verdict_mismatches += o.verdict_mismatches;
        replay_failures += o.replay_failures;
        ledger_violations += o.ledger_violations;
        exhausted_pairs += o.exhausted_pairs;
        prune_violations += o.prune_violations;
        prune_strict += o.prune_strict;
    }
};

namespace detail {

/// Checks the three solvers plus the ledger against brute force for one oracle; `make` yields a fresh oracle per run.
template <class MakeOracle>
SuiteTally check_instance(MakeOracle&& make, const InvalidityLedger& ledger) {
    SuiteTally t;
    t.instances = 1;
    auto ref_oracle = make();
    const PermutationVerdict ref = permutation_oracle(*ref_oracle);
    const MonoState root = ref_oracle->root();

    auto m = make();
    const SolveResult r_mrs = mrs(*m);
    auto d = make();
    const SolveResult r_dfs = dfs_dp(*d);
    auto c = make();
    const SolveResult r_ci = cidfs_dp(*c, ledger);

    for (const auto* r : {&r_mrs, &r_dfs, &r_ci}) {
        if (r->solved() != ref.solvable) ++t.verdict_mismatches;
        if (r->solved()) {
            auto replay = make();
            // replay only the moves after the root (objects already at goal never move)
            if (!replay_monotone(*replay, r->order)) ++t.replay_failures;
        }
    }
    for (const auto& order : ref.solutions)
        if (ledger_blocks_ordering(ledger, root, order)) {
            ++t.ledger_violations;
            break;
        }
    if (!r_dfs.solved() && !r_ci.solved()) {
        ++t.exhausted_pairs;
        if (r_ci.stats.expansions > r_dfs.stats.expansions) ++t.prune_violations;
        if (r_ci.stats.expansions < r_dfs.stats.expansions) ++t.prune_strict;
        for (MonoState s : r_ci.tree.states())
            if (!r_dfs.tree.contains(s)) {
                ++t.prune_violations;
                break;
            }
    }
    return t;
}

} // namespace detail

/// Random synthetic blocker scenes with n in [1, max_n].
inline SuiteTally synthetic_suite(std::size_t count, std::size_t max_n, std::uint64_t seed, double density = 0.35) {
    SuiteTally total;
    if (max_n == 0) return total;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n = 1 + i % max_n;
        const BlockerScene scene = random_blocker_scene(n, 1 + i % 3, density, seed * 7919 + i);
        const InvalidityLedger ledger = scene.ledger();
        total.add(detail::check_instance([&] { return std::make_unique<SyntheticOracle>(scene.oracle()); }, ledger));
    }
    return total;
}

/// Random geometric instances with n in [1, max_n] over one shared roadmap.
inline SuiteTally geometric_suite(const LabeledRoadmap& rm, std::size_t count, std::size_t max_n, std::uint64_t seed,
                                  const WorldConfig& world, const ConstraintOptions& opts = {}) {
    SuiteTally total;
    if (max_n == 0) return total;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n = 1 + i % max_n;
        const GenMode mode = i % 2 ? GenMode::random_both : GenMode::random_start_row_goals;
        const Instance inst = gen_instance(n, mode, seed * 7919 + i, world);
        const InvalidityLedger ledger = detect_invalidity(inst, rm, opts);
        total.add(detail::check_instance([&] { return std::make_unique<GeometricOracle>(inst, rm); }, ledger));
    }
    return total;
}

/// Random plan_path queries answered with labels and with online checks; counts disagreements.
inline std::pair<std::size_t, std::size_t> path_query_agreement(const LabeledRoadmap& rm, const Instance& inst, std::size_t queries,
                                                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> node(0, rm.nodes.size() - 1);
    std::bernoulli_distribution occupied(0.3), ignored(0.2), transfer(0.5);
    std::size_t mismatches = 0, feasible = 0;
    for (std::size_t i = 0; i < queries; ++i) {
        Query q;
        q.from_node = node(rng);
        q.to_node = node(rng);
        q.mode = transfer(rng) ? Mode::transfer : Mode::transit;
        q.occupied = CellSet(inst.grid.size());
        q.ignore = CellSet(inst.grid.size());
        for (std::size_t c = 0; c < inst.grid.size(); ++c) {
            if (occupied(rng)) q.occupied.insert(c);
            if (ignored(rng)) q.ignore.insert(c);
        }
        const auto a = plan_path(rm, inst, q, EdgeCheck::labels);
        const auto b = plan_path(rm, inst, q, EdgeCheck::online);
        if (a.has_value() != b.has_value() || (a && (a->cost != b->cost || a->nodes != b->nodes))) ++mismatches;
        feasible += a.has_value();
    }
    return {mismatches, feasible};
}

/// Flips one label bit; used to demonstrate that the audit catches corruption.
inline void corrupt_one_label(LabeledRoadmap& rm) {
    if (rm.edges.empty() || rm.num_cells == 0) return;
    rm.edges.front().transit_labels.flip(0);
}

inline std::vector<PropertyResult> run_verification(const VerifyConfig& cfg) {
    std::vector<PropertyResult> out;
    const std::size_t count = cfg.max_n == 0 ? 0 : cfg.seeds;

    const SuiteTally syn = synthetic_suite(count, cfg.max_n, cfg.seed);
    const Instance world = make_world(cfg.world);
    LabeledRoadmap rm = build_labeled_roadmap(world, cfg.roadmap);
    const SuiteTally geo = geometric_suite(rm, count, cfg.max_n, cfg.seed, cfg.world, cfg.constraints);
    SuiteTally all = syn;
    all.add(geo);

    auto add = [&](std::string name, bool ok, std::size_t cases, std::string detail) {
        out.push_back({std::move(name), ok, cases, std::move(detail)});
    };
    add("solver verdicts match permutation brute force", all.verdict_mismatches == 0, all.instances,
        std::to_string(all.verdict_mismatches) + " mismatches (" + std::to_string(syn.instances) + " synthetic, " +
            std::to_string(geo.instances) + " geometric)");
    add("solved sequences replay", all.replay_failures == 0, all.instances, std::to_string(all.replay_failures) + " failures");
    add("ledger never blocks a brute-force solution", all.ledger_violations == 0, all.instances,
        std::to_string(all.ledger_violations) + " violations");
    add("pruned search stays inside unpruned search", all.prune_violations == 0, all.exhausted_pairs,
        std::to_string(all.prune_violations) + " violations, " + std::to_string(all.prune_strict) + " strictly smaller");

    if (cfg.corrupt_label) corrupt_one_label(rm);
    if (count > 0) {
        const LabelAudit audit = audit_labels(rm, world);
        add("edge labels equal online collision checks", audit.mismatches == 0 && audit.wall_mismatches == 0, audit.checked,
            std::to_string(audit.mismatches) + " label and " + std::to_string(audit.wall_mismatches) + " wall mismatches over " +
                std::to_string(rm.edges.size()) + " edges");
        const auto [mism, feas] = path_query_agreement(rm, world, cfg.path_queries, cfg.seed);
        add("plan_path agrees with and without labels", mism == 0, cfg.path_queries,
            std::to_string(mism) + " disagreements, " + std::to_string(feas) + " feasible queries");
    } else {
        add("edge labels equal online collision checks", true, 0, "no instances");
        add("plan_path agrees with and without labels", true, 0, "no instances");
    }
    return out;
}

} // namespace rearrange
