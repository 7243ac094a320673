#pragma once
/**
 * @file    perts.hpp
 * @brief   Buffer-perturbation global planner for non-monotone instances.
 *
 * A forest of monotone search trees is grown in arrangement space. Whenever
 * the local solver fails, a node of the lowest perturbation level is picked,
 * one object is parked in a free grid cell, and the local solver restarts
 * from there. The perturbation level of a node counts the buffer moves on its
 * path from the start arrangement.
 */

#include "rearrange/solvers.hpp"

#include <map>
#include <optional>
#include <random>
#include <vector>

namespace rearrange {

struct GlobalNode {
    Arrangement arrangement;
    std::optional<std::size_t> parent;
    std::optional<ManipPath> move; ///< move from parent to this node
    bool perturbation{false};      ///< the incoming move parks an object in a buffer
    std::size_t level{0};
    std::size_t attempts{0}; ///< perturbation attempts made from this node
};

struct SelectionRecord {
    std::size_t chosen{0};
    std::size_t level{0};
    std::vector<std::size_t> pool; ///< every node offered to the draw
    std::optional<std::size_t> created; ///< node added by the perturbation that followed, if any
};

class GlobalTree {
public:
    explicit GlobalTree(Arrangement root) { insert(GlobalNode{std::move(root), std::nullopt, std::nullopt, false, 0, 0}); }

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] const GlobalNode& node(std::size_t i) const { return nodes_.at(i); }
    [[nodiscard]] GlobalNode& node(std::size_t i) { return nodes_.at(i); }
    [[nodiscard]] const std::vector<GlobalNode>& nodes() const noexcept { return nodes_; }

    [[nodiscard]] std::optional<std::size_t> find(const Arrangement& a) const {
        auto it = index_.find(key(a));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Adds `n` unless its arrangement is already present; returns the index holding that arrangement.
    std::pair<std::size_t, bool> insert(GlobalNode n) {
        auto [it, inserted] = index_.try_emplace(key(n.arrangement), nodes_.size());
        if (inserted) nodes_.push_back(std::move(n));
        return {it->second, inserted};
    }

    /// Node indices root ... i.
    [[nodiscard]] std::vector<std::size_t> path_to(std::size_t i) const {
        std::vector<std::size_t> out{i};
        while (nodes_.at(out.back()).parent) out.push_back(*nodes_[out.back()].parent);
        std::reverse(out.begin(), out.end());
        return out;
    }

private:
    static std::vector<double> key(const Arrangement& a) {
        std::vector<double> k;
        k.reserve(2 * a.size());
        for (const auto& p : a) {
            k.push_back(p.x);
            k.push_back(p.y);
        }
        return k;
    }

    std::vector<GlobalNode> nodes_;
    std::map<std::vector<double>, std::size_t> index_;
};

struct PertsOptions {
    std::size_t attempts_per_node{0}; ///< 0 means 2n
    double local_time_divisor{8.0};   ///< each local solve gets remaining time / divisor
    ConstraintOptions constraints;
    EdgeCheck check{EdgeCheck::labels};
};

struct PertsStats {
    std::size_t local_solves{0};
    std::size_t perturbation_attempts{0};
    std::size_t perturbations{0};
    std::size_t expansions{0};
    std::size_t mp_calls{0};
    std::size_t pruned{0};
};

struct GlobalResult {
    Outcome outcome{Outcome::exhausted};
    std::vector<ManipPath> actions; ///< objects may appear several times
    std::vector<std::size_t> node_path;
    std::size_t buffers{0};
    GlobalTree tree{Arrangement{}};
    std::vector<SelectionRecord> selections;
    PertsStats stats;

    [[nodiscard]] bool solved() const noexcept { return outcome == Outcome::solved; }
};

/// Uniform draw among the lowest-level nodes with budget left; nullopt once every node is spent.
template <class Rng>
std::optional<std::size_t> select_node(const GlobalTree& tree, std::size_t budget, Rng& rng,
                                       std::vector<SelectionRecord>* log = nullptr) {
    std::optional<std::size_t> min_level;
    for (const auto& n : tree.nodes())
        if (n.attempts < budget && (!min_level || n.level < *min_level)) min_level = n.level;
    if (!min_level) return std::nullopt;
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < tree.size(); ++i)
        if (tree.node(i).level == *min_level && tree.node(i).attempts < budget) pool.push_back(i);
    const std::size_t chosen = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    if (log) log->push_back({chosen, *min_level, std::move(pool), std::nullopt});
    return chosen;
}

/// Grid cells a buffer for `o` may use in `a`: not its goal and clear of every disc.
inline std::vector<std::size_t> buffer_cells(const Instance& inst, const LabeledRoadmap& rm, const Arrangement& a, ObjectId o) {
    const auto goal = cell_of(inst.goal.at(o), inst.grid);
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < inst.grid.size(); ++c) {
        if ((goal && *goal == c) || rm.grasp_nodes(c).empty()) continue;
        bool clear = true;
        for (const auto& p : a) clear = clear && !discs_overlap(p, inst.grid.cells[c], inst.radius);
        if (clear) out.push_back(c);
    }
    return out;
}

/// One random buffer move from `parent`: uniform object, uniform admissible cell. nullopt on any failure.
template <class Rng>
std::optional<GlobalNode> perturb_node(const GlobalTree& tree, std::size_t parent, const Instance& inst,
                                       const LabeledRoadmap& rm, Rng& rng, EdgeCheck check = EdgeCheck::labels) {
    const GlobalNode& p = tree.node(parent);
    const std::size_t n = p.arrangement.size();
    if (n == 0) return std::nullopt;
    const ObjectId o = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const auto cells = buffer_cells(inst, rm, p.arrangement, o);
    if (cells.empty()) return std::nullopt;
    const std::size_t b = cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng)];
    auto path = plan_manipulation(rm, inst, p.arrangement, o, b, check);
    if (!path) return std::nullopt;
    GlobalNode child;
    child.arrangement = p.arrangement;
    child.arrangement[o] = inst.grid.cells[b];
    child.parent = parent;
    child.move = std::move(path);
    child.perturbation = true;
    child.level = p.level + 1;
    return child;
}

namespace detail {

/// Copies a local search tree rooted at tree node `root` into the global tree; returns the goal node if reached.
inline std::optional<std::size_t> graft(GlobalTree& tree, std::size_t root, const SearchTree& local, const Instance& inst) {
    const Arrangement base = tree.node(root).arrangement;
    std::unordered_map<MonoState, std::size_t> where{{local.root(), root}};
    std::optional<std::size_t> goal;
    if (base == inst.goal) goal = root;
    for (MonoState s : local.states()) {
        const TreeNode& tn = local.node(s);
        GlobalNode g;
        g.arrangement = arrangement_of(s, base, inst.goal);
        g.parent = where.at(tn.parent);
        g.move = tn.path;
        g.level = tree.node(*g.parent).level; // the parent may be an older node reached again
        const auto [idx, inserted] = tree.insert(std::move(g));
        where.emplace(s, idx);
        if (tree.node(idx).arrangement == inst.goal) goal = idx;
    }
    return goal;
}

} // namespace detail

/**
 * Global planner: local monotone solve from the start, then select, perturb
 * and solve again until the goal arrangement joins the tree, the deadline
 * passes, or every node has spent its perturbation budget.
 */
inline GlobalResult perts(const Instance& inst, const LabeledRoadmap& rm, LocalSolver local, Deadline deadline,
                          std::uint64_t seed, const PertsOptions& opts = {}) {
    GlobalResult result;
    result.tree = GlobalTree(inst.start);
    GlobalTree& tree = result.tree;
    std::mt19937_64 rng(seed);
    const std::size_t budget = opts.attempts_per_node ? opts.attempts_per_node : 2 * inst.num_objects();
    bool timed_out = false;

    auto solve_from = [&](std::size_t node) -> std::optional<std::size_t> {
        const double slice = deadline.remaining() / opts.local_time_divisor;
        auto r = solve_monotone(local, inst, rm, tree.node(node).arrangement, Deadline::after(slice), opts.constraints, opts.check);
        ++result.stats.local_solves;
        result.stats.expansions += r.stats.expansions;
        result.stats.mp_calls += r.stats.mp_calls;
        result.stats.pruned += r.stats.pruned;
        return detail::graft(tree, node, r.tree, inst);
    };

    std::optional<std::size_t> goal = solve_from(0);
    while (!goal) {
        if (deadline.expired()) {
            timed_out = true;
            break;
        }
        const auto chosen = select_node(tree, budget, rng, &result.selections);
        if (!chosen) break;
        ++tree.node(*chosen).attempts;
        ++result.stats.perturbation_attempts;
        auto child = perturb_node(tree, *chosen, inst, rm, rng, opts.check);
        if (!child) continue;
        const auto [idx, inserted] = tree.insert(std::move(*child));
        if (!inserted) continue;
        result.selections.back().created = idx;
        ++result.stats.perturbations;
        goal = solve_from(idx);
    }

    if (!goal) {
        result.outcome = timed_out ? Outcome::timed_out : Outcome::exhausted;
        return result;
    }
    result.outcome = Outcome::solved;
    result.node_path = tree.path_to(*goal);
    for (std::size_t i = 1; i < result.node_path.size(); ++i) result.actions.push_back(*tree.node(result.node_path[i]).move);
    result.buffers = tree.node(*goal).level;
    return result;
}

} // namespace rearrange
