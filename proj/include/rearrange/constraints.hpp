#pragma once
/**
 * @file    constraints.hpp
 * @brief   Offline detection of provably futile moves for monotone search.
 *
 * For an object o, every grasp configuration k (pick at its current cell or
 * place at its goal cell) is blocked by the goal discs of a colliding set
 * C^k. Once one member of every C^k rests at its goal while o has not moved,
 * o can never be manipulated again. Each minimal hitting set of the C^k
 * (a constraint set) therefore yields predicates that forbid completing it.
 */

#include "rearrange/roadmap.hpp"
#include "rearrange/world.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <set>
#include <span>
#include <vector>

namespace rearrange {

enum class GraspPhase : std::uint8_t { pick, place };

inline std::vector<ObjectId> objects_of(MonoState mask) {
    std::vector<ObjectId> out;
    while (mask) {
        out.push_back(static_cast<ObjectId>(std::countr_zero(mask)));
        mask &= mask - 1;
    }
    return out;
}

inline MonoState mask_of(std::initializer_list<ObjectId> objs) {
    MonoState m = 0;
    for (auto o : objs) m |= bit(o);
    return m;
}

struct CollidingSet {
    ObjectId object{0};
    GraspPhase phase{GraspPhase::pick};
    std::size_t config_index{0};
    MonoState blockers{0}; ///< objects whose goal discs collide with this configuration
};

struct ConstraintSet {
    ObjectId object{0};
    MonoState members{0};

    friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

/// Moving `forbidden_move` is futile while `anchor_at_start` has not moved and every `required_at_goal` object has.
struct InvalidPredicate {
    ObjectId forbidden_move{0};
    ObjectId anchor_at_start{0};
    MonoState required_at_goal{0};

    friend auto operator<=>(const InvalidPredicate&, const InvalidPredicate&) = default;

    [[nodiscard]] bool fires(MonoState s) const noexcept {
        return !(s & bit(anchor_at_start)) && (s & required_at_goal) == required_at_goal;
    }
};

class InvalidityLedger {
public:
    InvalidityLedger() = default;
    explicit InvalidityLedger(std::size_t n) : by_object_(n) {}

    void add(const InvalidPredicate& p) {
        if (p.forbidden_move >= by_object_.size()) by_object_.resize(p.forbidden_move + 1);
        auto& v = by_object_[p.forbidden_move];
        auto it = std::lower_bound(v.begin(), v.end(), p);
        if (it == v.end() || !(*it == p)) v.insert(it, p);
    }

    [[nodiscard]] bool is_invalid(ObjectId o, MonoState s) const noexcept {
        if (o >= by_object_.size()) return false;
        for (const auto& p : by_object_[o])
            if (p.fires(s)) return true;
        return false;
    }

    [[nodiscard]] std::span<const InvalidPredicate> predicates(ObjectId o) const noexcept {
        if (o >= by_object_.size()) return {};
        return by_object_[o];
    }

    [[nodiscard]] std::size_t size() const noexcept {
        std::size_t n = 0;
        for (const auto& v : by_object_) n += v.size();
        return n;
    }

    [[nodiscard]] bool empty() const noexcept { return size() == 0; }
    [[nodiscard]] std::size_t num_objects() const noexcept { return by_object_.size(); }

    /// Objects whose constraint products hit the size cap (no predicates emitted for them).
    std::vector<ObjectId> capped;

    void dump(std::ostream& os) const {
        for (const auto& preds : by_object_)
            for (const auto& p : preds) {
                os << "forbid move o" << p.forbidden_move << " while o" << p.anchor_at_start << " at start";
                const auto req = objects_of(p.required_at_goal);
                if (!req.empty()) {
                    os << " and {";
                    for (std::size_t i = 0; i < req.size(); ++i) os << (i ? "," : "") << 'o' << req[i];
                    os << "} at goal";
                }
                os << '\n';
            }
    }

private:
    std::vector<std::vector<InvalidPredicate>> by_object_;
};

inline bool is_invalid(const InvalidityLedger& ledger, ObjectId o, MonoState s) noexcept { return ledger.is_invalid(o, s); }

struct ConstraintOptions {
    std::size_t product_cap{10'000};
    bool start_blocking{false};
};

/// Grasp configurations for picking `o` at its current (snapped) cell and placing it at its goal cell.
/// Blockers are the other objects whose goal discs the configuration's body collides with, except a
/// goal on o's own snapped cell, which the planner forgives.
inline std::vector<CollidingSet> colliding_sets(const Instance& inst, const LabeledRoadmap& rm, const Arrangement& root,
                                                ObjectId o) {
    const auto goals = goal_cells(inst);
    const std::size_t pick_cell = snap_to_grid(root.at(o), inst.grid);
    const auto& picks = rm.grasp_nodes(pick_cell);
    const auto& places = rm.grasp_nodes(goals.at(o));
    if (picks.empty() || places.empty())
        throw EmptyGraspSet("object " + std::to_string(o) + " has no grasp configuration in the roadmap");

    std::vector<CollidingSet> out;
    auto scan = [&](const std::vector<std::size_t>& nodes, GraspPhase phase) {
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const auto grasp = phase == GraspPhase::place ? std::optional<double>(inst.radius) : std::nullopt;
            const SweptBody body = forward_kinematics(inst.arm, rm.nodes[nodes[k]].q, grasp);
            CollidingSet cs{o, phase, k, 0};
            for (std::size_t j = 0; j < inst.num_objects(); ++j)
                if (j != o && goals[j] != pick_cell && collides_disc(body, inst.goal[j], inst.radius)) cs.blockers |= bit(j);
            out.push_back(cs);
        }
    };
    scan(picks, GraspPhase::pick);
    scan(places, GraspPhase::place);
    return out;
}

inline std::vector<CollidingSet> colliding_sets(const Instance& inst, const LabeledRoadmap& rm, ObjectId o) {
    return colliding_sets(inst, rm, inst.start, o);
}

namespace detail {

/// Drops every mask that strictly contains another mask of the family.
inline std::vector<MonoState> minimal_masks(std::vector<MonoState> family) {
    std::sort(family.begin(), family.end(), [](MonoState a, MonoState b) {
        const int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });
    family.erase(std::unique(family.begin(), family.end()), family.end());
    std::vector<MonoState> keep;
    for (auto m : family) {
        bool dominated = false;
        for (auto k : keep)
            if ((k & m) == k) {
                dominated = true;
                break;
            }
        if (!dominated) keep.push_back(m);
    }
    return keep;
}

} // namespace detail

/**
 * Constraint sets of one family of colliding sets: the cross product
 * collapsed to sets, deduplicated and reduced to minimal members. Empty when
 * any colliding set is empty (a free configuration exists), when the family
 * is empty, or when an intermediate product exceeds `cap`.
 */
inline std::vector<ConstraintSet> constraint_sets(std::span<const CollidingSet> sets, std::size_t cap = 10'000,
                                                  bool* capped = nullptr) {
    if (capped) *capped = false;
    if (sets.empty()) return {};
    for (const auto& s : sets)
        if (s.blockers == 0) return {};
    std::vector<MonoState> partial{0};
    for (const auto& s : sets) {
        std::vector<MonoState> next;
        for (auto p : partial)
            for (auto b : objects_of(s.blockers)) next.push_back(p | bit(b));
        partial = detail::minimal_masks(std::move(next));
        if (partial.size() > cap) {
            if (capped) *capped = true;
            return {};
        }
    }
    std::vector<ConstraintSet> out;
    out.reserve(partial.size());
    for (auto m : partial) out.push_back({sets.front().object, m});
    std::sort(out.begin(), out.end(), [](const ConstraintSet& a, const ConstraintSet& b) { return a.members < b.members; });
    return out;
}

/// One predicate per member (completing the set seals c.object) plus one forbidding c.object itself.
inline std::vector<InvalidPredicate> elicit_predicates(const ConstraintSet& c) {
    if (c.members == 0) throw std::invalid_argument("elicit_predicates: empty constraint set");
    std::vector<InvalidPredicate> out;
    for (auto m : objects_of(c.members)) out.push_back({m, c.object, c.members & ~bit(m)});
    out.push_back({c.object, c.object, c.members});
    return out;
}

/// Ledger from precomputed colliding sets; pick and place families are crossed separately.
inline InvalidityLedger ledger_from_colliding_sets(std::size_t n, std::span<const CollidingSet> all,
                                                   const ConstraintOptions& opts = {}) {
    InvalidityLedger ledger(n);
    for (ObjectId o = 0; o < n; ++o) {
        for (auto phase : {GraspPhase::pick, GraspPhase::place}) {
            std::vector<CollidingSet> family;
            for (const auto& s : all)
                if (s.object == o && s.phase == phase) family.push_back(s);
            bool capped = false;
            for (const auto& c : constraint_sets(family, opts.product_cap, &capped))
                for (const auto& p : elicit_predicates(c)) ledger.add(p);
            if (capped) ledger.capped.push_back(o);
        }
    }
    return ledger;
}

/**
 * Builds the invalid-move ledger for the monotone problem root -> goal.
 * Objects already at their goal in `root` never move and contribute nothing.
 */
inline InvalidityLedger detect_invalidity(const Instance& inst, const LabeledRoadmap& rm, const Arrangement& root,
                                          const ConstraintOptions& opts = {}) {
    const std::size_t n = inst.num_objects();
    std::vector<std::vector<CollidingSet>> per_object(n);
    parallel_for(n, [&](std::size_t o) {
        if (!(root[o] == inst.goal[o])) per_object[o] = colliding_sets(inst, rm, root, o);
    });
    std::vector<CollidingSet> all;
    for (auto& v : per_object) all.insert(all.end(), v.begin(), v.end());
    InvalidityLedger ledger = ledger_from_colliding_sets(n, all, opts);

    if (opts.start_blocking) {
        const auto goals = goal_cells(inst);
        for (ObjectId o = 0; o < n; ++o) {
            if (root[o] == inst.goal[o]) continue;
            const std::size_t own = snap_to_grid(root[o], inst.grid);
            std::vector<SweptBody> place_bodies;
            for (auto node : rm.grasp_nodes(goals[o])) place_bodies.push_back(forward_kinematics(inst.arm, rm.nodes[node].q, inst.radius));
            for (ObjectId j = 0; j < n; ++j) {
                if (j == o || root[j] == inst.goal[j]) continue;
                const std::size_t cell = snap_to_grid(root[j], inst.grid);
                if (cell == own || cell == goals[o]) continue;
                const Position disc = inst.grid.cells[cell];
                const bool all_blocked = std::all_of(place_bodies.begin(), place_bodies.end(),
                                                     [&](const SweptBody& b) { return collides_disc(b, disc, inst.radius); });
                if (all_blocked && !place_bodies.empty()) ledger.add({o, j, 0});
            }
        }
    }
    return ledger;
}

inline InvalidityLedger detect_invalidity(const Instance& inst, const LabeledRoadmap& rm, const ConstraintOptions& opts = {}) {
    return detect_invalidity(inst, rm, inst.start, opts);
}

} // namespace rearrange
