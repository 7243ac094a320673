#include "rearrange/verify.hpp"

#include <gtest/gtest.h>

using namespace rearrange;

namespace {

// Four objects; object 3 cannot be grasped once object 0 sits at its goal.
SyntheticOracle four_object_scenario() {
    return SyntheticOracle(4, [](MonoState s, ObjectId o) { return !(o == 3 && (s & bit(0))); });
}

InvalidityLedger four_object_ledger() {
    BlockerScene scene;
    scene.n = 4;
    scene.pick = {{0}, {0}, {0}, {bit(0), bit(0)}};
    scene.place = {{0}, {0}, {0}, {0}};
    return scene.ledger();
}

std::size_t falling_factorial_sum(std::size_t n) {
    std::size_t total = 0, term = 1;
    for (std::size_t k = 0; k < n; ++k) {
        total += term; // P(n, k)
        term *= n - k;
    }
    return total;
}

const Instance& world() {
    static const Instance w = make_world(WorldConfig{});
    return w;
}

const LabeledRoadmap& roadmap() {
    static const LabeledRoadmap rm = build_labeled_roadmap(world(), RoadmapParams{300, 0.5, 10, 4, 0.5, 3, kDefaultEdgeResolution});
    return rm;
}

} // namespace

TEST(Solvers, SingleFeasibleObjectIsSolvedByAll) {
    SyntheticOracle o(1, [](MonoState, ObjectId) { return true; });
    for (auto* solve : {+[](MoveOracle& m) { return mrs(m); }, +[](MoveOracle& m) { return dfs_dp(m); }}) {
        const auto r = solve(o);
        EXPECT_TRUE(r.solved());
        EXPECT_EQ(r.order, std::vector<ObjectId>{0});
    }
    EXPECT_EQ(cidfs_dp(o, InvalidityLedger(1)).order, std::vector<ObjectId>{0});
}

TEST(Solvers, NothingToMoveIsSolvedImmediately) {
    SyntheticOracle o(3, [](MonoState, ObjectId) { return false; }, full_mask(3));
    EXPECT_TRUE(dfs_dp(o).solved());
    EXPECT_TRUE(mrs(o).solved());
    EXPECT_TRUE(dfs_dp(o).order.empty());
}

TEST(Solvers, LateObjectIsMovedLast) {
    SyntheticOracle o(3, [](MonoState s, ObjectId obj) { return obj != 0 || (s & (bit(1) | bit(2))) == (bit(1) | bit(2)); });
    const auto r = mrs(o);
    ASSERT_TRUE(r.solved());
    EXPECT_EQ(r.order.back(), 0u);
    EXPECT_EQ(r.order.size(), 3u);
}

TEST(Solvers, BacktrackingVisitsEveryPrefixWhenUnsolvable) {
    for (std::size_t n = 1; n <= 6; ++n) {
        // the final move always fails, so every ordering prefix shorter than n is visited once
        SyntheticOracle o(n, [n](MonoState s, ObjectId) { return static_cast<std::size_t>(std::popcount(s)) + 1 < n; });
        const auto r = mrs(o);
        EXPECT_EQ(r.outcome, Outcome::exhausted);
        EXPECT_EQ(r.stats.expansions, falling_factorial_sum(n)) << n;
    }
}

TEST(Solvers, SubsetSearchVisitsEachStateAtMostOnce) {
    for (std::size_t n = 1; n <= 8; ++n) {
        SyntheticOracle o(n, [n](MonoState s, ObjectId) { return static_cast<std::size_t>(std::popcount(s)) + 1 < n; });
        const auto r = dfs_dp(o);
        EXPECT_EQ(r.outcome, Outcome::exhausted);
        EXPECT_EQ(r.stats.expansions, (std::size_t{1} << n) - 1);
        EXPECT_LE(r.stats.expansions, std::size_t{1} << n);
    }
}

TEST(Solvers, FourObjectScenarioOrder) {
    auto o = four_object_scenario();
    const auto r = dfs_dp(o);
    ASSERT_TRUE(r.solved());
    EXPECT_EQ(r.order, (std::vector<ObjectId>{1, 2, 3, 0}));
}

TEST(Solvers, LedgerSkipsTheDoomedBranch) {
    const auto ledger = four_object_ledger();
    EXPECT_TRUE(is_invalid(ledger, 0, 0));
    auto o = four_object_scenario();
    const auto plain = dfs_dp(o);
    auto o2 = four_object_scenario();
    const auto pruned = cidfs_dp(o2, ledger);
    ASSERT_TRUE(pruned.solved());
    EXPECT_EQ(pruned.order, plain.order);
    EXPECT_FALSE(pruned.tree.contains(bit(0)));
    for (MonoState s : pruned.tree.states()) EXPECT_TRUE(!(s & bit(0)) || (s & bit(3))) << s;
    EXPECT_TRUE(plain.tree.contains(bit(0)));
    EXPECT_LT(pruned.stats.expansions, plain.stats.expansions);
    EXPECT_LT(pruned.stats.mp_calls, plain.stats.mp_calls);
    EXPECT_GT(pruned.stats.pruned, 0u);
}

TEST(Solvers, EmptyLedgerChangesNothing) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto scene = random_blocker_scene(2 + seed % 5, 2, 0.4, seed);
        auto a = scene.oracle(), b = scene.oracle();
        const auto ra = dfs_dp(a);
        const auto rb = cidfs_dp(b, InvalidityLedger(scene.n));
        EXPECT_EQ(ra.outcome, rb.outcome);
        EXPECT_EQ(ra.order, rb.order);
        EXPECT_EQ(ra.stats.expansions, rb.stats.expansions);
        EXPECT_EQ(rb.stats.pruned, 0u);
    }
}

TEST(Solvers, SyntheticVerdictsMatchPermutationOracle) {
    const auto t = synthetic_suite(300, 5, 17);
    EXPECT_EQ(t.instances, 300u);
    EXPECT_EQ(t.verdict_mismatches, 0u);
    EXPECT_EQ(t.replay_failures, 0u);
    EXPECT_EQ(t.ledger_violations, 0u);
    EXPECT_EQ(t.prune_violations, 0u);
    EXPECT_GT(t.exhausted_pairs, 20u);
}

TEST(Solvers, GeometricVerdictsMatchPermutationOracle) {
    const auto t = geometric_suite(roadmap(), 40, 4, 5, WorldConfig{});
    EXPECT_EQ(t.verdict_mismatches, 0u);
    EXPECT_EQ(t.replay_failures, 0u);
    EXPECT_EQ(t.ledger_violations, 0u);
    EXPECT_EQ(t.prune_violations, 0u);
}

TEST(Solvers, SolvedOrdersReplayAndMoveEachObjectOnce) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t n = 1 + seed % 6;
        const auto scene = random_blocker_scene(n, 2, 0.3, seed);
        auto o = scene.oracle();
        for (const auto& r : {mrs(o), dfs_dp(o), cidfs_dp(o, scene.ledger())}) {
            if (!r.solved()) continue;
            auto replay = scene.oracle();
            EXPECT_TRUE(replay_monotone(replay, r.order));
            EXPECT_EQ(r.order.size(), n);
            EXPECT_EQ(r.paths.size(), n);
        }
    }
}

TEST(Solvers, PartialTreesReplayFromRoot) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto scene = random_blocker_scene(2 + seed % 5, 1, 0.5, seed);
        auto o = scene.oracle();
        const auto r = cidfs_dp(o, scene.ledger());
        if (r.solved()) continue;
        for (MonoState s : r.tree.states()) {
            const auto& node = r.tree.node(s);
            EXPECT_EQ(s, node.parent | bit(node.moved));
            EXPECT_FALSE(node.parent & bit(node.moved));
            MonoState cur = r.tree.root();
            for (auto obj : r.tree.trace(s)) {
                ASSERT_TRUE(scene.feasible(cur, obj));
                cur |= bit(obj);
            }
            EXPECT_EQ(cur, s);
        }
    }
}

TEST(Solvers, PrunedSearchExpandsNoMoreOnUnsolvableScenes) {
    std::size_t strict = 0, pairs = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto scene = random_blocker_scene(3 + seed % 3, 1 + seed % 2, 0.5, seed);
        auto a = scene.oracle(), b = scene.oracle();
        const auto plain = dfs_dp(a);
        const auto pruned = cidfs_dp(b, scene.ledger());
        ASSERT_EQ(plain.solved(), pruned.solved());
        if (plain.solved()) continue;
        ++pairs;
        EXPECT_LE(pruned.stats.expansions, plain.stats.expansions);
        for (MonoState s : pruned.tree.states()) EXPECT_TRUE(plain.tree.contains(s));
        strict += pruned.stats.expansions < plain.stats.expansions;
    }
    EXPECT_GT(pairs, 30u);
    EXPECT_GT(strict, 0u);
}

TEST(Solvers, PlannerCallsAreMemoized) {
    SyntheticOracle o(5, [](MonoState s, ObjectId obj) { return obj != 4 || std::popcount(s) == 4; });
    const auto r = mrs(o);
    EXPECT_TRUE(r.solved());
    EXPECT_LE(r.stats.mp_calls, r.stats.queries);
    EXPECT_LE(r.stats.mp_calls, 5u * 32u);
}

TEST(Solvers, ExpiredDeadlineTimesOut) {
    auto o = four_object_scenario();
    const auto d = Deadline::after(0.0);
    EXPECT_EQ(dfs_dp(o, d).outcome, Outcome::timed_out);
    EXPECT_EQ(mrs(o, d).outcome, Outcome::timed_out);
    EXPECT_EQ(cidfs_dp(o, InvalidityLedger(4), d).tree.size(), 1u);
    EXPECT_FALSE(Deadline::never().expired());
}

TEST(Solvers, SingleGeometricObjectIsSolvedWithoutPruning) {
    Instance inst = world();
    inst.start = {inst.grid.cells[3]};
    inst.goal = {inst.grid.cells[14]};
    const auto r = cirs(inst, roadmap());
    ASSERT_TRUE(r.solved());
    EXPECT_EQ(r.order, std::vector<ObjectId>{0});
    EXPECT_EQ(r.stats.pruned, 0u);
    EXPECT_EQ(r.ledger_size, 0u);
    ASSERT_EQ(r.paths.size(), 1u);
    EXPECT_EQ(r.paths[0].to_cell, 14u);
}

TEST(Solvers, CirsSolvesWheneverUnprunedSearchDoes) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Instance inst = gen_instance(3 + seed % 4, GenMode::random_start_row_goals, 100 + seed);
        const auto c = solve_monotone(LocalSolver::cirs, inst, roadmap(), inst.start, Deadline::never());
        const auto d = solve_monotone(LocalSolver::dfs_dp, inst, roadmap(), inst.start, Deadline::never());
        const auto m = solve_monotone(LocalSolver::mrs, inst, roadmap(), inst.start, Deadline::never());
        EXPECT_EQ(c.solved(), d.solved()) << seed;
        EXPECT_EQ(m.solved(), d.solved()) << seed;
        if (!d.solved()) {
            EXPECT_LE(c.stats.expansions, d.stats.expansions);
        }
    }
}

TEST(Solvers, MissingGraspNodeMeansInfeasibleInstance) {
    const auto rm = build_labeled_roadmap(world(), RoadmapParams{199, 5.0 / 199.0, 10, 4, 0.5, 1, kDefaultEdgeResolution});
    Instance inst = world();
    inst.start = {inst.grid.cells[1]};
    inst.goal = {inst.grid.cells[12]};
    for (auto s : {LocalSolver::cirs, LocalSolver::dfs_dp, LocalSolver::mrs})
        EXPECT_THROW(solve_monotone(s, inst, rm, inst.start, Deadline::never()), InstanceInfeasible);
}

TEST(Solvers, SolverNamesRoundTrip) {
    for (auto s : {LocalSolver::cirs, LocalSolver::dfs_dp, LocalSolver::mrs}) EXPECT_EQ(local_solver_from_string(to_string(s)), s);
    EXPECT_EQ(local_solver_from_string("dfs_dp"), LocalSolver::dfs_dp);
    EXPECT_THROW(local_solver_from_string("astar"), std::invalid_argument);
}
