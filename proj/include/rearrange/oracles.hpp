#pragma once
/**
 * @file    oracles.hpp
 * @brief   Brute-force reference implementations used to cross-check the
 *          solvers, the ledger and the labeled roadmap.
 *
 * Nothing here shares search code with the production paths: orderings are
 * enumerated with std::next_permutation, shortest paths use a plain Dijkstra
 * over freshly collision-checked edges, and label audits resweep every edge.
 */

#include "rearrange/constraints.hpp"
#include "rearrange/roadmap.hpp"
#include "rearrange/solvers.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <vector>

namespace rearrange {

/// Caching adapter so permutation enumeration does not replan shared prefixes.
class CachedOracle {
public:
    explicit CachedOracle(MoveOracle& inner) : inner_(inner) {}
    bool operator()(MonoState s, ObjectId o) {
        auto it = cache_.find({s, o});
        if (it != cache_.end()) return it->second;
        const bool ok = inner_.feasible(s, o).has_value();
        cache_.emplace(std::make_pair(s, o), ok);
        return ok;
    }

private:
    MoveOracle& inner_;
    std::map<std::pair<MonoState, ObjectId>, bool> cache_;
};

struct PermutationVerdict {
    bool solvable{false};
    std::vector<std::vector<ObjectId>> solutions; ///< every feasible ordering (up to the cap)
};

/// Enumerates every ordering of the objects not yet at goal and replays it move by move.
inline PermutationVerdict permutation_oracle(MoveOracle& oracle, std::size_t max_solutions = 100'000) {
    const std::size_t n = oracle.num_objects();
    const MonoState root = oracle.root();
    std::vector<ObjectId> perm;
    for (ObjectId o = 0; o < n; ++o)
        if (!(root & bit(o))) perm.push_back(o);
    CachedOracle feasible(oracle);
    PermutationVerdict v;
    do {
        MonoState s = root;
        bool ok = true;
        for (auto o : perm) {
            if (!feasible(s, o)) {
                ok = false;
                break;
            }
            s |= bit(o);
        }
        if (ok) {
            v.solvable = true;
            if (v.solutions.size() < max_solutions) v.solutions.push_back(perm);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return v;
}

/// True when some ledger predicate fires on a proper prefix state of `order` for the next move.
inline bool ledger_blocks_ordering(const InvalidityLedger& ledger, MonoState root, const std::vector<ObjectId>& order) {
    MonoState s = root;
    for (auto o : order) {
        if (ledger.is_invalid(o, s)) return true;
        s |= bit(o);
    }
    return false;
}

/// Replays a solved sequence: each move must be feasible at its turn and each object moved exactly once.
inline bool replay_monotone(MoveOracle& oracle, const std::vector<ObjectId>& order) {
    MonoState s = oracle.root();
    for (auto o : order) {
        if (o >= oracle.num_objects() || (s & bit(o)) || !oracle.feasible(s, o)) return false;
        s |= bit(o);
    }
    return s == full_mask(oracle.num_objects());
}

// ---------------------------------------------------------------------------
// Synthetic blocker scenes

/**
 * Geometry-free stand-in for the roadmap oracle. Each object owns a list of
 * pick and place grasps, each blocked by the goal discs of a set of objects.
 * A move is feasible iff some pick grasp and some place grasp are both free
 * of objects already at goal. The colliding sets are then exact, so a ledger
 * built from them must be sound.
 */
struct BlockerScene {
    std::size_t n{0};
    std::vector<std::vector<MonoState>> pick;  ///< per object, blocker mask per grasp
    std::vector<std::vector<MonoState>> place; ///< per object, blocker mask per grasp

    [[nodiscard]] bool feasible(MonoState s, ObjectId o) const {
        auto any_free = [s](const std::vector<MonoState>& grasps) {
            return std::any_of(grasps.begin(), grasps.end(), [s](MonoState b) { return (b & s) == 0; });
        };
        return any_free(pick[o]) && any_free(place[o]);
    }

    [[nodiscard]] std::vector<CollidingSet> colliding_sets() const {
        std::vector<CollidingSet> out;
        for (ObjectId o = 0; o < n; ++o) {
            for (std::size_t k = 0; k < pick[o].size(); ++k) out.push_back({o, GraspPhase::pick, k, pick[o][k]});
            for (std::size_t k = 0; k < place[o].size(); ++k) out.push_back({o, GraspPhase::place, k, place[o][k]});
        }
        return out;
    }

    [[nodiscard]] InvalidityLedger ledger(const ConstraintOptions& opts = {}) const {
        const auto sets = colliding_sets();
        return ledger_from_colliding_sets(n, sets, opts);
    }

    [[nodiscard]] SyntheticOracle oracle() const {
        return SyntheticOracle(n, [scene = *this](MonoState s, ObjectId o) { return scene.feasible(s, o); });
    }
};

/// Random scene: each grasp is blocked by each other object with probability `density`.
inline BlockerScene random_blocker_scene(std::size_t n, std::size_t k, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(density);
    BlockerScene sc;
    sc.n = n;
    sc.pick.resize(n);
    sc.place.resize(n);
    for (ObjectId o = 0; o < n; ++o)
        for (auto* grasps : {&sc.pick[o], &sc.place[o]})
            for (std::size_t g = 0; g < k; ++g) {
                MonoState b = 0;
                for (ObjectId j = 0; j < n; ++j)
                    if (j != o && coin(rng)) b |= bit(j);
                grasps->push_back(b);
            }
    return sc;
}

// ---------------------------------------------------------------------------
// Roadmap references

/// Online collision verdict for one edge against a single disc (or none) in one mode.
inline bool edge_blocked_online(const LabeledRoadmap& rm, const Instance& inst, std::size_t edge, std::optional<Position> disc,
                                Mode mode) {
    const auto& e = rm.edges.at(edge);
    const std::optional<double> grasp = mode == Mode::transfer ? std::optional<double>(inst.radius) : std::nullopt;
    std::vector<Position> obstacles;
    if (disc) obstacles.push_back(*disc);
    return edge_collides(inst.arm, rm.nodes[e.u].q, rm.nodes[e.v].q, obstacles, inst.radius, nullptr, grasp, rm.params.resolution);
}

struct LabelAudit {
    std::size_t checked{0};
    std::size_t mismatches{0};
    std::size_t wall_mismatches{0};
};

/// Exhaustive comparison of every (edge, cell, mode) label bit against a fresh sweep.
inline LabelAudit audit_labels(const LabeledRoadmap& rm, const Instance& inst) {
    LabelAudit a;
    for (std::size_t e = 0; e < rm.edges.size(); ++e) {
        for (auto mode : {Mode::transit, Mode::transfer})
            for (std::size_t c = 0; c < inst.grid.size(); ++c) {
                ++a.checked;
                if (rm.edges[e].labels(mode).contains(c) != edge_blocked_online(rm, inst, e, inst.grid.cells[c], mode)) ++a.mismatches;
            }
        const auto& ed = rm.edges[e];
        const bool wall = edge_collides(inst.arm, rm.nodes[ed.u].q, rm.nodes[ed.v].q, {}, 0.0, &inst.ws, inst.radius,
                                        rm.params.resolution);
        if (wall != ed.transfer_wall_blocked) ++a.wall_mismatches;
    }
    return a;
}

/// Plain Dijkstra in one mode with every edge checked online against the blocked cells' discs.
inline std::optional<double> reference_path_cost(const LabeledRoadmap& rm, const Instance& inst, const Query& q) {
    const CellSet blocked = q.occupied.minus(q.ignore);
    std::vector<Position> discs;
    for (auto c : blocked.members()) discs.push_back(inst.grid.cells[c]);
    const std::optional<double> grasp = q.mode == Mode::transfer ? std::optional<double>(inst.radius) : std::nullopt;

    std::vector<double> d(rm.nodes.size(), std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    d[q.from_node] = 0.0;
    pq.emplace(0.0, q.from_node);
    while (!pq.empty()) {
        const auto [du, u] = pq.top();
        pq.pop();
        if (du > d[u]) continue;
        if (u == q.to_node) return du;
        for (std::size_t e = 0; e < rm.edges.size(); ++e) {
            const auto& ed = rm.edges[e];
            if (ed.u != u && ed.v != u) continue;
            const std::size_t w = ed.u == u ? ed.v : ed.u;
            if (du + ed.cost >= d[w]) continue;
            if (edge_collides(inst.arm, rm.nodes[ed.u].q, rm.nodes[ed.v].q, discs, inst.radius, &inst.ws, grasp, rm.params.resolution))
                continue;
            d[w] = du + ed.cost;
            pq.emplace(d[w], w);
        }
    }
    return std::nullopt;
}

} // namespace rearrange
