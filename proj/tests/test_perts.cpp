#include "rearrange/perts.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace rearrange;

namespace {

const Instance& world() {
    static const Instance w = make_world(WorldConfig{});
    return w;
}

const LabeledRoadmap& roadmap() {
    static const LabeledRoadmap rm = build_labeled_roadmap(world(), RoadmapParams{300, 0.5, 10, 4, 0.5, 3, kDefaultEdgeResolution});
    return rm;
}

Instance with_cells(const std::vector<std::size_t>& start, const std::vector<std::size_t>& goal) {
    Instance inst = world();
    for (auto c : start) inst.start.push_back(inst.grid.cells[c]);
    for (auto c : goal) inst.goal.push_back(inst.grid.cells[c]);
    return inst;
}

/// Two objects whose goals are each other's starts.
Instance swap_deadlock() { return with_cells({1, 2}, {2, 1}); }

GlobalNode leveled(Arrangement a, std::size_t parent, std::size_t level) {
    GlobalNode n;
    n.arrangement = std::move(a);
    n.parent = parent;
    n.level = level;
    return n;
}

/// Replays the actions with fresh planner calls; returns the final arrangement or nullopt on the first failure.
std::optional<Arrangement> replay(const Instance& inst, const std::vector<ManipPath>& actions) {
    Arrangement a = inst.start;
    for (const auto& m : actions) {
        if (!plan_manipulation(roadmap(), inst, a, m.object, m.to_cell)) return std::nullopt;
        a[m.object] = inst.grid.cells[m.to_cell];
        if (!is_valid_arrangement(a, inst.ws, inst.radius)) return std::nullopt;
    }
    return a;
}

} // namespace

TEST(SelectNode, SingleNodeTreeReturnsRoot) {
    GlobalTree t(Arrangement{Vec2{0.1, 0.1}});
    std::mt19937_64 rng(1);
    EXPECT_EQ(select_node(t, 2, rng), 0u);
    t.node(0).attempts = 2;
    EXPECT_FALSE(select_node(t, 2, rng).has_value());
}

TEST(SelectNode, LowestLevelWinsUntilItsBudgetIsSpent) {
    GlobalTree t(Arrangement{Vec2{0.1, 0.1}});
    t.insert(leveled({Vec2{0.2, 0.1}}, 0, 1));
    t.insert(leveled({Vec2{0.3, 0.1}}, 0, 0));
    std::mt19937_64 rng(5);
    std::vector<SelectionRecord> log;
    for (int i = 0; i < 4; ++i) {
        const auto c = select_node(t, 2, rng, &log);
        ASSERT_TRUE(c);
        EXPECT_EQ(t.node(*c).level, 0u);
        ++t.node(*c).attempts;
    }
    EXPECT_EQ(log.front().pool, (std::vector<std::size_t>{0, 2}));
    const auto c = select_node(t, 2, rng, &log);
    EXPECT_EQ(c, 1u);
    EXPECT_EQ(log.back().level, 1u);
}

TEST(SelectNode, DrawIsUniformOverThePool) {
    GlobalTree t(Arrangement{Vec2{0.1, 0.1}});
    for (int i = 1; i < 4; ++i) t.insert(leveled({Vec2{0.1 + 0.1 * i, 0.1}}, 0, 0));
    std::mt19937_64 rng(9);
    std::vector<int> hits(4, 0);
    for (int i = 0; i < 4000; ++i) ++hits[*select_node(t, 1, rng)];
    for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(SelectNode, FixedSeedRepeatsTheSequence) {
    GlobalTree t(Arrangement{Vec2{0.1, 0.1}});
    for (int i = 1; i < 6; ++i) t.insert(leveled({Vec2{0.1 + 0.1 * i, 0.1}}, 0, i % 2));
    std::mt19937_64 a(77), b(77);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(select_node(t, 3, a), select_node(t, 3, b));
}

TEST(PerturbNode, PackedGridHasNoBuffer) {
    std::vector<std::size_t> all;
    for (std::size_t c = 0; c < world().grid.size(); ++c) all.push_back(c);
    const Instance inst = with_cells(all, all);
    GlobalTree t(inst.start);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) EXPECT_FALSE(perturb_node(t, 0, inst, roadmap(), rng).has_value());
}

TEST(PerturbNode, EmptyArrangementCannotBePerturbed) {
    const Instance inst = with_cells({}, {});
    GlobalTree t(inst.start);
    std::mt19937_64 rng(2);
    EXPECT_FALSE(perturb_node(t, 0, inst, roadmap(), rng).has_value());
}

TEST(PerturbNode, SingleObjectMovesToANonGoalCell) {
    const Instance inst = with_cells({7}, {1});
    GlobalTree t(inst.start);
    std::mt19937_64 rng(4);
    int made = 0;
    for (int i = 0; i < 50; ++i) {
        const auto c = perturb_node(t, 0, inst, roadmap(), rng);
        if (!c) continue;
        ++made;
        ASSERT_EQ(c->arrangement.size(), 1u);
        EXPECT_NE(c->arrangement[0], inst.goal[0]);
        EXPECT_NE(c->arrangement[0], inst.start[0]);
        EXPECT_TRUE(cell_of(c->arrangement[0], inst.grid).has_value());
        EXPECT_EQ(c->level, 1u);
        EXPECT_TRUE(c->perturbation);
        EXPECT_EQ(c->parent, 0u);
        EXPECT_EQ(c->move->object, 0u);
    }
    EXPECT_GT(made, 0);
}

TEST(PerturbNode, ChildrenStayValidAndDifferInOneObject) {
    std::mt19937_64 rng(21);
    int made = 0, tried = 0;
    for (std::uint64_t seed = 0; tried < 1000; ++seed) {
        const Instance inst = gen_instance(2 + seed % 6, GenMode::random_both, seed);
        GlobalTree t(inst.start);
        for (int i = 0; i < 20; ++i, ++tried) {
            const auto c = perturb_node(t, 0, inst, roadmap(), rng);
            if (!c) continue;
            ++made;
            EXPECT_TRUE(is_valid_arrangement(c->arrangement, inst.ws, inst.radius));
            std::size_t changed = 0;
            for (std::size_t o = 0; o < inst.num_objects(); ++o) changed += c->arrangement[o] != inst.start[o];
            EXPECT_EQ(changed, 1u);
            const ObjectId o = c->move->object;
            EXPECT_NE(c->arrangement[o], inst.goal[o]);
            EXPECT_EQ(c->arrangement[o], inst.grid.cells[c->move->to_cell]);
        }
    }
    EXPECT_GT(made, 100);
}

TEST(GlobalTree, DuplicateArrangementIsNotInserted) {
    GlobalTree t(Arrangement{Vec2{0.1, 0.1}});
    const auto [i, fresh] = t.insert(leveled({Vec2{0.2, 0.1}}, 0, 1));
    EXPECT_TRUE(fresh);
    const auto [j, again] = t.insert(leveled({Vec2{0.2, 0.1}}, 0, 0));
    EXPECT_FALSE(again);
    EXPECT_EQ(i, j);
    EXPECT_EQ(t.node(j).level, 1u);
    EXPECT_EQ(t.path_to(j), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(t.find(Arrangement{Vec2{0.1, 0.1}}), 0u);
}

TEST(Perts, MonotoneInstanceNeedsNoBuffer) {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 40 && checked < 5; ++seed) {
        const Instance inst = gen_instance(3, GenMode::random_start_row_goals, seed);
        if (!solve_monotone(LocalSolver::cirs, inst, roadmap(), inst.start, Deadline::never()).solved()) continue;
        ++checked;
        const auto r = perts(inst, roadmap(), LocalSolver::cirs, Deadline::never(), seed);
        ASSERT_TRUE(r.solved());
        EXPECT_EQ(r.buffers, 0u);
        EXPECT_EQ(r.stats.perturbations, 0u);
        EXPECT_TRUE(r.selections.empty());
        EXPECT_EQ(r.actions.size(), 3u);
    }
    EXPECT_EQ(checked, 5);
}

TEST(Perts, SwapDeadlockIsNotMonotone) {
    const Instance inst = swap_deadlock();
    EXPECT_FALSE(solve_monotone(LocalSolver::dfs_dp, inst, roadmap(), inst.start, Deadline::never()).solved());
}

TEST(Perts, SwapDeadlockUsesOneBuffer) {
    const Instance inst = swap_deadlock();
    int one = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto r = perts(inst, roadmap(), LocalSolver::cirs, Deadline::never(), seed);
        ASSERT_TRUE(r.solved()) << seed;
        EXPECT_GE(r.buffers, 1u);
        one += r.buffers == 1;
        const auto end = replay(inst, r.actions);
        ASSERT_TRUE(end) << seed;
        EXPECT_EQ(*end, inst.goal);
    }
    EXPECT_GE(one, 27);
}

TEST(Perts, LevelsCountBufferMoves) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const Instance inst = gen_instance(4 + seed % 3, GenMode::random_start_row_goals, 100 + seed);
        const auto r = perts(inst, roadmap(), LocalSolver::cirs, Deadline::after(60), seed);
        for (std::size_t i = 1; i < r.tree.size(); ++i) {
            const auto& n = r.tree.node(i);
            const auto& p = r.tree.node(*n.parent);
            EXPECT_EQ(n.level, p.level + (n.perturbation ? 1 : 0)) << seed;
        }
        if (!r.solved()) continue;
        std::size_t perturbation_edges = 0, off_goal_moves = 0;
        for (std::size_t i = 1; i < r.node_path.size(); ++i) perturbation_edges += r.tree.node(r.node_path[i]).perturbation;
        for (const auto& m : r.actions) off_goal_moves += inst.grid.cells[m.to_cell] != inst.goal[m.object];
        EXPECT_EQ(r.buffers, perturbation_edges);
        EXPECT_EQ(r.buffers, off_goal_moves);
        const auto end = replay(inst, r.actions);
        ASSERT_TRUE(end) << seed;
        EXPECT_EQ(*end, inst.goal);
    }
}

TEST(Perts, NewLevelOnlyAfterEveryLowerNodeWasOffered) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const Instance inst = gen_instance(5 + seed % 3, GenMode::random_start_row_goals, 200 + seed);
        const auto r = perts(inst, roadmap(), LocalSolver::cirs, Deadline::after(60), seed);
        std::set<std::size_t> offered;
        for (const auto& rec : r.selections) {
            offered.insert(rec.pool.begin(), rec.pool.end());
            if (!rec.created) continue;
            const std::size_t k = r.tree.node(*rec.created).level - 1;
            for (std::size_t i = 0; i < *rec.created; ++i)
                if (r.tree.node(i).level == k) {
                    EXPECT_TRUE(offered.count(i)) << "seed " << seed << " node " << i;
                }
        }
    }
}

TEST(Perts, SameSeedSameResult) {
    const Instance inst = gen_instance(5, GenMode::random_start_row_goals, 3);
    const auto a = perts(inst, roadmap(), LocalSolver::cirs, Deadline::never(), 8);
    const auto b = perts(inst, roadmap(), LocalSolver::cirs, Deadline::never(), 8);
    EXPECT_EQ(a.outcome, b.outcome);
    EXPECT_EQ(a.node_path, b.node_path);
    EXPECT_EQ(a.tree.size(), b.tree.size());
    EXPECT_EQ(a.stats.mp_calls, b.stats.mp_calls);
}

TEST(Perts, ExhaustedWhenNoBufferExists) {
    std::vector<std::size_t> start, goal;
    for (std::size_t c = 0; c < world().grid.size(); ++c) start.push_back(c), goal.push_back(c);
    std::swap(goal[0], goal[1]);
    const Instance inst = with_cells(start, goal);
    const auto r = perts(inst, roadmap(), LocalSolver::cirs, Deadline::never(), 1);
    EXPECT_EQ(r.outcome, Outcome::exhausted);
    EXPECT_TRUE(r.actions.empty());
}

TEST(Perts, ExpiredDeadlineTimesOut) {
    const Instance inst = swap_deadlock();
    const auto r = perts(inst, roadmap(), LocalSolver::cirs, Deadline::after(0), 1);
    EXPECT_EQ(r.outcome, Outcome::timed_out);
}

TEST(Perts, EveryLocalSolverReachesTheGoal) {
    const Instance inst = swap_deadlock();
    for (auto s : {LocalSolver::mrs, LocalSolver::dfs_dp, LocalSolver::cirs}) {
        const auto r = perts(inst, roadmap(), s, Deadline::never(), 4);
        ASSERT_TRUE(r.solved()) << to_string(s);
        EXPECT_EQ(*replay(inst, r.actions), inst.goal);
    }
}
