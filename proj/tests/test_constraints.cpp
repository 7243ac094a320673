#include "rearrange/oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace rearrange;

namespace {

std::vector<CollidingSet> family(ObjectId o, std::initializer_list<MonoState> blockers) {
    std::vector<CollidingSet> out;
    std::size_t k = 0;
    for (auto b : blockers) out.push_back({o, GraspPhase::pick, k++, b});
    return out;
}

std::set<MonoState> masks(const std::vector<ConstraintSet>& cs) {
    std::set<MonoState> out;
    for (const auto& c : cs) out.insert(c.members);
    return out;
}

/// Minimal hitting sets by enumerating every subset of the universe.
std::set<MonoState> brute_force_minimal_hitting_sets(const std::vector<CollidingSet>& sets, std::size_t universe) {
    std::vector<MonoState> hitting;
    for (MonoState m = 1; m < (MonoState{1} << universe); ++m) {
        bool hits_all = true;
        for (const auto& s : sets) hits_all = hits_all && (m & s.blockers);
        if (hits_all) hitting.push_back(m);
    }
    std::set<MonoState> out;
    for (auto m : hitting) {
        bool minimal = true;
        for (auto k : hitting)
            if (k != m && (k & m) == k) minimal = false;
        if (minimal) out.insert(m);
    }
    return out;
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

TEST(Constraints, ThreeCollidingSetsGiveTwoConstraintSets) {
    // object 3 has three grasps blocked by {1}, {0} and {2,4}
    const auto cs = constraint_sets(family(3, {mask_of({1}), mask_of({0}), mask_of({2, 4})}));
    ASSERT_EQ(cs.size(), 2u);
    EXPECT_EQ(masks(cs), (std::set<MonoState>{mask_of({0, 1, 2}), mask_of({0, 1, 4})}));
    for (const auto& c : cs) EXPECT_EQ(c.object, 3u);
}

TEST(Constraints, AnyFreeGraspMeansNoConstraint) {
    EXPECT_TRUE(constraint_sets(family(0, {mask_of({1}), 0, mask_of({2})})).empty());
    EXPECT_TRUE(constraint_sets(std::vector<CollidingSet>{}).empty());
}

TEST(Constraints, ConstraintSetsAreMinimalHittingSets) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + trial % 7, k = 1 + trial % 5;
        std::vector<CollidingSet> sets;
        for (std::size_t i = 0; i < k; ++i) {
            MonoState b = 0;
            while (b == 0) b = rng() & (full_mask(n) & ~bit(0));
            if (n == 2) b = bit(1);
            sets.push_back({0, GraspPhase::place, i, b});
        }
        const auto cs = constraint_sets(sets);
        const auto got = masks(cs);
        EXPECT_EQ(got.size(), cs.size());
        EXPECT_EQ(got, brute_force_minimal_hitting_sets(sets, n)) << trial;
        for (const auto& c : cs) EXPECT_FALSE(c.members & bit(0));
    }
}

TEST(Constraints, OversizedProductIsCappedWithoutPredicates) {
    // 14 disjoint pairs: 2^14 minimal sets
    std::vector<CollidingSet> sets;
    for (std::size_t i = 0; i < 14; ++i) sets.push_back({0, GraspPhase::pick, i, bit(1 + 2 * i) | bit(2 + 2 * i)});
    bool capped = false;
    EXPECT_TRUE(constraint_sets(sets, 10'000, &capped).empty());
    EXPECT_TRUE(capped);
    EXPECT_EQ(constraint_sets(sets, 20'000, &capped).size(), 16384u);
    EXPECT_FALSE(capped);
    const auto ledger = ledger_from_colliding_sets(29, sets);
    EXPECT_TRUE(ledger.empty());
    EXPECT_EQ(ledger.capped, std::vector<ObjectId>{0});
}

TEST(Constraints, ThreeMemberSetElicitsFourPredicates) {
    const auto preds = elicit_predicates({3, mask_of({0, 1, 2})});
    ASSERT_EQ(preds.size(), 4u);
    const std::set<InvalidPredicate> got(preds.begin(), preds.end());
    const std::set<InvalidPredicate> want{{0, 3, mask_of({1, 2})}, {1, 3, mask_of({0, 2})}, {2, 3, mask_of({0, 1})}, {3, 3, mask_of({0, 1, 2})}};
    EXPECT_EQ(got, want);
    EXPECT_THROW(elicit_predicates({3, 0}), std::invalid_argument);
}

TEST(Constraints, PredicateCountIsMembersPlusOne) {
    for (MonoState m = 1; m < 64; ++m) EXPECT_EQ(elicit_predicates({6, m}).size(), static_cast<std::size_t>(std::popcount(m)) + 1);
}

TEST(Constraints, SingletonForbidsMovingBlockerWhileVictimAtStart) {
    // every grasp of object 1 is blocked by object 0's goal
    const auto ledger = ledger_from_colliding_sets(2, family(1, {bit(0), bit(0), bit(0)}));
    EXPECT_TRUE(is_invalid(ledger, 0, 0));
    EXPECT_FALSE(is_invalid(ledger, 0, bit(1)));
    EXPECT_FALSE(is_invalid(ledger, 1, 0));
    EXPECT_TRUE(is_invalid(ledger, 1, bit(0)));
    std::ostringstream os;
    ledger.dump(os);
    EXPECT_NE(os.str().find("forbid move o0 while o1 at start"), std::string::npos);
}

TEST(Constraints, EmptyLedgerNeverFires) {
    const InvalidityLedger ledger(4);
    for (MonoState s = 0; s < 16; ++s)
        for (ObjectId o = 0; o < 4; ++o) EXPECT_FALSE(is_invalid(ledger, o, s));
}

TEST(Constraints, LedgerDeduplicates) {
    InvalidityLedger ledger(3);
    ledger.add({0, 1, bit(2)});
    ledger.add({0, 1, bit(2)});
    EXPECT_EQ(ledger.size(), 1u);
}

TEST(Constraints, FiringSurvivesMoreObjectsAtGoal) {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 2000; ++i) {
        const std::size_t n = 6;
        const InvalidPredicate p{rng() % n, rng() % n, rng() & full_mask(n)};
        const MonoState s = rng() & full_mask(n);
        const MonoState sup = (s | (rng() & full_mask(n))) & ~bit(p.anchor_at_start);
        if (p.fires(s)) {
            EXPECT_TRUE(p.fires(sup));
        }
    }
}

TEST(Constraints, SyntheticLedgersNeverBlockASolution) {
    std::size_t solvable = 0, predicates = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const std::size_t n = 2 + seed % 5;
        const auto scene = random_blocker_scene(n, 1 + seed % 3, 0.4, seed);
        const auto ledger = scene.ledger();
        predicates += ledger.size();
        auto oracle = scene.oracle();
        const auto verdict = permutation_oracle(oracle);
        solvable += verdict.solvable;
        for (const auto& order : verdict.solutions) ASSERT_FALSE(ledger_blocks_ordering(ledger, 0, order)) << seed;
    }
    EXPECT_GT(solvable, 50u);
    EXPECT_GT(predicates, 100u);
}

TEST(Constraints, PredicatesOnlyFireWhenVictimIsTrulyStuck) {
    // Whenever a constraint set is complete, its object must be immovable in every later state.
    std::size_t audited = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Instance inst = gen_instance(3 + seed % 3, seed % 2 ? GenMode::random_both : GenMode::random_start_row_goals, seed);
        const std::size_t n = inst.num_objects();
        const auto ledger = detect_invalidity(inst, roadmap());
        GeometricOracle oracle(inst, roadmap());
        for (ObjectId o = 0; o < n; ++o)
            for (const auto& p : ledger.predicates(o)) {
                const ObjectId victim = p.anchor_at_start;
                const MonoState sealed = p.required_at_goal | (p.forbidden_move == victim ? 0 : bit(p.forbidden_move));
                for (MonoState t = 0; t <= full_mask(n); ++t) {
                    if ((t & sealed) != sealed || (t & bit(victim))) continue;
                    ++audited;
                    EXPECT_FALSE(oracle.feasible(t, victim).has_value()) << "seed " << seed << " victim " << victim;
                }
            }
    }
    EXPECT_GT(audited, 20u);
}

TEST(Constraints, BlockerSetsMatchDirectGeometry) {
    const auto& rm = roadmap();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Instance inst = gen_instance(6, GenMode::random_both, seed);
        const auto goals = goal_cells(inst);
        for (ObjectId o = 0; o < inst.num_objects(); ++o) {
            const auto sets = colliding_sets(inst, rm, o);
            const std::size_t pick_cell = snap_to_grid(inst.start[o], inst.grid);
            const auto& picks = rm.grasp_nodes(pick_cell);
            const auto& places = rm.grasp_nodes(goals[o]);
            ASSERT_EQ(sets.size(), picks.size() + places.size());
            for (const auto& s : sets) {
                EXPECT_EQ(s.object, o);
                EXPECT_FALSE(s.blockers & bit(o));
                const bool place = s.phase == GraspPhase::place;
                const auto node = (place ? places : picks)[s.config_index];
                for (ObjectId j = 0; j < inst.num_objects(); ++j) {
                    if (j == o) continue;
                    const bool hit = collides_disc(forward_kinematics(inst.arm, rm.nodes[node].q, place ? std::optional<double>(inst.radius) : std::nullopt),
                                                   inst.goal[j], inst.radius);
                    EXPECT_EQ(static_cast<bool>(s.blockers & bit(j)), hit && goals[j] != pick_cell);
                }
            }
        }
    }
}

TEST(Constraints, CompleteConstraintSetBlocksEveryGraspOfItsPhase) {
    const auto& rm = roadmap();
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Instance inst = gen_instance(6, GenMode::random_both, seed);
        for (ObjectId o = 0; o < inst.num_objects(); ++o) {
            const auto sets = colliding_sets(inst, rm, o);
            for (auto phase : {GraspPhase::pick, GraspPhase::place}) {
                std::vector<CollidingSet> fam;
                for (const auto& s : sets)
                    if (s.phase == phase) fam.push_back(s);
                for (const auto& c : constraint_sets(fam)) {
                    ++checked;
                    for (const auto& s : fam) EXPECT_TRUE(s.blockers & c.members);
                }
            }
        }
    }
    EXPECT_GT(checked, 0u);
}

TEST(Constraints, LoneObjectHasEmptyLedger) {
    Instance inst = world();
    inst.start = {inst.grid.cells[13]};
    inst.goal = {inst.grid.cells[4]};
    for (const auto& s : colliding_sets(inst, roadmap(), 0)) EXPECT_EQ(s.blockers, 0u);
    EXPECT_TRUE(detect_invalidity(inst, roadmap()).empty());
}

TEST(Constraints, ObjectsAlreadyHomeContributeNothing) {
    Instance inst = gen_instance(4, GenMode::random_both, 7);
    inst.start = inst.goal;
    EXPECT_TRUE(detect_invalidity(inst, roadmap()).empty());
}

TEST(Constraints, StartBlockingOnlyAddsSoundPredicates) {
    ConstraintOptions opts;
    opts.start_blocking = true;
    std::size_t extra = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Instance inst = gen_instance(3 + seed % 3, GenMode::random_start_row_goals, seed);
        const auto base = detect_invalidity(inst, roadmap());
        const auto ext = detect_invalidity(inst, roadmap(), opts);
        EXPECT_GE(ext.size(), base.size());
        extra += ext.size() - base.size();
        GeometricOracle oracle(inst, roadmap());
        const auto verdict = permutation_oracle(oracle);
        for (const auto& order : verdict.solutions) EXPECT_FALSE(ledger_blocks_ordering(ext, 0, order)) << seed;
    }
    RecordProperty("start_blocking_predicates", static_cast<int>(extra));
}
