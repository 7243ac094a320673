#pragma once
/**
 * @file    roadmap.hpp
 * @brief   Configuration-space roadmap whose edges carry, per manipulation
 *          mode, the grid cells whose occupancy invalidates them.
 *
 * Labels are computed once per workspace geometry. An online query then only
 * needs set intersections: an edge is usable in mode m at arrangement a iff
 * labels_m(edge) does not meet the occupied, non-ignored cells of a.
 */

#include "rearrange/cell_set.hpp"
#include "rearrange/geom2d.hpp"
#include "rearrange/parallel.hpp"
#include "rearrange/world.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace rearrange {

enum class Mode : std::uint8_t { transit = 0, transfer = 1 };
enum class NodeRole : std::uint8_t { home, grasp, random };

inline constexpr std::size_t kNoCell = std::numeric_limits<std::size_t>::max();

struct RoadmapNode {
    Config q;
    NodeRole role{NodeRole::random};
    std::size_t cell{kNoCell}; ///< grid cell grasped at this configuration (grasp nodes only)
};

struct RoadmapEdge {
    std::size_t u{0}; ///< u < v; interpolation always runs u -> v
    std::size_t v{0};
    double cost{0};
    CellSet transit_labels;
    CellSet transfer_labels;
    bool transfer_wall_blocked{false}; ///< the carried disc would hit a wall

    [[nodiscard]] const CellSet& labels(Mode m) const noexcept {
        return m == Mode::transit ? transit_labels : transfer_labels;
    }
};

struct RoadmapParams {
    std::size_t num_samples{600};
    double grasp_ratio{0.5};
    std::size_t connection_k{15};
    std::size_t k_grasps{4};
    double workspace_bias{0.5}; ///< share of free samples drawn by IK to random tip points inside the shelf
    std::uint64_t seed{0};
    double resolution{kDefaultEdgeResolution};

    friend bool operator==(const RoadmapParams&, const RoadmapParams&) = default;
};

struct LabeledRoadmap {
    RoadmapParams params;
    std::vector<RoadmapNode> nodes;
    std::vector<RoadmapEdge> edges;
    std::size_t home{0};
    std::size_t num_cells{0};
    bool labeled{false};

    // Derived indices, rebuilt by rebuild_index().
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency; ///< (neighbour, edge)
    std::vector<std::vector<std::size_t>> grasp_by_cell;

    void rebuild_index() {
        adjacency.assign(nodes.size(), {});
        for (std::size_t e = 0; e < edges.size(); ++e) {
            adjacency[edges[e].u].emplace_back(edges[e].v, e);
            adjacency[edges[e].v].emplace_back(edges[e].u, e);
        }
        for (auto& adj : adjacency) std::sort(adj.begin(), adj.end());
        grasp_by_cell.assign(num_cells, {});
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].role == NodeRole::grasp) grasp_by_cell.at(nodes[i].cell).push_back(i);
    }

    [[nodiscard]] const std::vector<std::size_t>& grasp_nodes(std::size_t cell) const { return grasp_by_cell.at(cell); }

    [[nodiscard]] std::size_t count_role(NodeRole r) const noexcept {
        return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [r](const RoadmapNode& n) { return n.role == r; }));
    }
};

class DisconnectedHome : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoGraspNode : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline bool body_hits_walls(const PlanarArm& arm, const WorkspaceGeom& ws, const Config& q) {
    return collides_workspace(forward_kinematics(arm, q), ws);
}

inline void check_home_connectivity(const LabeledRoadmap& rm) {
    if (rm.count_role(NodeRole::grasp) == 0) return; // plain PRM
    std::vector<char> seen(rm.nodes.size(), 0);
    std::vector<std::size_t> stack{rm.home};
    seen[rm.home] = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        if (rm.nodes[u].role == NodeRole::grasp) return;
        for (auto [w, e] : rm.adjacency[u])
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    throw DisconnectedHome("home configuration's component holds no grasp node; rebuild with more samples");
}

} // namespace detail

/**
 * Samples the roadmap (unlabeled). Node 0 is home; then up to
 * round(grasp_ratio * num_samples) grasp nodes, taking the cells'
 * IK solutions round-robin; the rest are wall-free samples, a
 * `workspace_bias` share of them placing the tip at a random shelf point.
 * Each node links to its connection_k nearest neighbours in joint space;
 * links whose bare-arm sweep touches a wall are dropped.
 */
inline LabeledRoadmap build_roadmap(const Instance& inst, const RoadmapParams& params) {
    if (params.num_samples < inst.grid.size())
        throw std::invalid_argument("num_samples must be at least the number of grid cells");
    if (params.grasp_ratio < 0.0 || params.grasp_ratio > 1.0) throw std::invalid_argument("grasp_ratio must lie in [0, 1]");
    if (params.k_grasps == 0) throw std::invalid_argument("k_grasps must be positive");

    LabeledRoadmap rm;
    rm.params = params;
    rm.num_cells = inst.grid.size();
    rm.home = 0;
    rm.nodes.push_back({inst.arm.home, NodeRole::home, kNoCell});
    if (detail::body_hits_walls(inst.arm, inst.ws, inst.arm.home))
        throw std::invalid_argument("home configuration touches a wall");

    std::mt19937_64 rng(params.seed);

    std::vector<std::vector<Config>> per_cell(inst.grid.size());
    for (std::size_t c = 0; c < inst.grid.size(); ++c) {
        try {
            for (const auto& q : ik_grasp_configs(inst.arm, inst.grid.cells[c], params.k_grasps))
                if (!detail::body_hits_walls(inst.arm, inst.ws, q)) per_cell[c].push_back(q);
        } catch (const EmptyGraspSet&) {
        }
    }
    const auto grasp_target = static_cast<std::size_t>(std::llround(params.grasp_ratio * static_cast<double>(params.num_samples)));
    std::vector<std::size_t> next(inst.grid.size(), 0);
    std::size_t grasp_added = 0;
    for (bool progress = true; progress && grasp_added < grasp_target;) {
        progress = false;
        for (std::size_t c = 0; c < inst.grid.size() && grasp_added < grasp_target; ++c) {
            if (next[c] >= per_cell[c].size()) continue;
            rm.nodes.push_back({per_cell[c][next[c]++], NodeRole::grasp, c});
            ++grasp_added;
            progress = true;
        }
    }

    const auto& lim = inst.arm.joint_limits;
    std::size_t attempts = 0;
    const std::size_t max_attempts = 1000 * params.num_samples + 1000;
    while (rm.nodes.size() < params.num_samples + 1) {
        if (++attempts > max_attempts) throw std::runtime_error("could not sample wall-free configurations");
        Config q;
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < params.workspace_bias) {
            const Rect& R = inst.ws.rect;
            const Position tip{std::uniform_real_distribution<double>(R.min.x, R.max.x)(rng),
                               std::uniform_real_distribution<double>(R.min.y, R.max.y)(rng)};
            const double phi = inst.arm.heading + std::uniform_real_distribution<double>(-kPi / 2, kPi / 2)(rng);
            const double sign = std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0;
            const auto sol = ik_solve(inst.arm, tip, phi, sign);
            if (!sol) continue;
            q = *sol;
        } else {
            for (std::size_t j = 0; j < 3; ++j) q[j] = std::uniform_real_distribution<double>(lim[j].lo, lim[j].hi)(rng);
        }
        if (detail::body_hits_walls(inst.arm, inst.ws, q)) continue;
        rm.nodes.push_back({q, NodeRole::random, kNoCell});
    }

    // k-nearest neighbour candidate edges, deduplicated as (min, max).
    const std::size_t N = rm.nodes.size();
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    std::vector<std::pair<double, std::size_t>> dists;
    for (std::size_t i = 0; i < N; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < N; ++j) {
            if (j == i) continue;
            const double d = config_distance(rm.nodes[i].q, rm.nodes[j].q);
            if (d > 0.0) dists.emplace_back(d, j);
        }
        const std::size_t k = std::min(params.connection_k, dists.size());
        std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k), dists.end());
        for (std::size_t m = 0; m < k; ++m) candidates.emplace_back(std::min(i, dists[m].second), std::max(i, dists[m].second));
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::uint8_t> status(candidates.size(), 0); // bit0: drop, bit1: transfer wall-blocked
    parallel_for(candidates.size(), [&](std::size_t i) {
        const auto& a = rm.nodes[candidates[i].first].q;
        const auto& b = rm.nodes[candidates[i].second].q;
        if (edge_collides(inst.arm, a, b, {}, 0.0, &inst.ws, std::nullopt, params.resolution))
            status[i] = 1;
        else if (edge_collides(inst.arm, a, b, {}, 0.0, &inst.ws, inst.radius, params.resolution))
            status[i] = 2;
    });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (status[i] & 1) continue;
        RoadmapEdge e;
        e.u = candidates[i].first;
        e.v = candidates[i].second;
        e.cost = config_distance(rm.nodes[e.u].q, rm.nodes[e.v].q);
        e.transit_labels = CellSet(rm.num_cells);
        e.transfer_labels = CellSet(rm.num_cells);
        e.transfer_wall_blocked = (status[i] & 2) != 0;
        rm.edges.push_back(std::move(e));
    }
    rm.rebuild_index();
    detail::check_home_connectivity(rm);
    return rm;
}

/// Offline labels: cell c joins an edge's mode-m label iff a lone disc at c collides with the mode-m sweep.
inline LabeledRoadmap label_edges(LabeledRoadmap rm, const Instance& inst) {
    const auto& cells = inst.grid.cells;
    const double r = inst.radius;
    parallel_for(rm.edges.size(), [&](std::size_t ei) {
        auto& e = rm.edges[ei];
        e.transit_labels = CellSet(cells.size());
        e.transfer_labels = CellSet(cells.size());
        const Config& a = rm.nodes[e.u].q;
        const Config& b = rm.nodes[e.v].q;
        const std::size_t steps = interpolation_steps(a, b, rm.params.resolution);
        for (std::size_t i = 0; i <= steps; ++i) {
            SweptBody carrying = forward_kinematics(inst.arm, interpolate(a, b, i, steps), r);
            SweptBody bare = carrying;
            bare.grasped_disc.reset();
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (!e.transit_labels.contains(c) && collides_disc(bare, cells[c], r)) e.transit_labels.insert(c);
                if (!e.transfer_labels.contains(c) && collides_disc(carrying, cells[c], r)) e.transfer_labels.insert(c);
            }
        }
    });
    rm.labeled = true;
    return rm;
}

inline LabeledRoadmap build_labeled_roadmap(const Instance& inst, const RoadmapParams& params) {
    return label_edges(build_roadmap(inst, params), inst);
}

// ---------------------------------------------------------------------------
// Queries

enum class EdgeCheck { labels, online };

struct Query {
    std::size_t from_node{0};
    std::size_t to_node{0};
    Mode mode{Mode::transit};
    CellSet occupied;
    CellSet ignore;
};

struct PathResult {
    std::vector<std::size_t> nodes;
    double cost{0};
};

namespace detail {

/// Cells whose discs make an edge unusable in one mode, plus how to test an edge against them.
class EdgeFilter {
public:
    EdgeFilter(const LabeledRoadmap& rm, const Instance& inst, EdgeCheck check, const CellSet& blocked_transit,
               const CellSet& blocked_transfer)
        : rm_(rm), inst_(inst), check_(check), blocked_{blocked_transit, blocked_transfer} {
        if (check_ == EdgeCheck::online) {
            for (int m = 0; m < 2; ++m)
                for (auto c : blocked_[m].members()) discs_[m].push_back(inst.grid.cells[c]);
            cache_[0].assign(rm.edges.size(), -1);
            cache_[1].assign(rm.edges.size(), -1);
        } else if (!rm.labeled) {
            throw std::logic_error("label-based query on an unlabeled roadmap");
        }
    }

    bool allowed(std::size_t edge, Mode mode) {
        const int m = static_cast<int>(mode);
        const auto& e = rm_.edges[edge];
        if (check_ == EdgeCheck::labels)
            return !(mode == Mode::transfer && e.transfer_wall_blocked) && !e.labels(mode).intersects(blocked_[m]);
        auto& slot = cache_[m][edge];
        if (slot < 0) {
            const std::optional<double> grasp = mode == Mode::transfer ? std::optional<double>(inst_.radius) : std::nullopt;
            slot = edge_collides(inst_.arm, rm_.nodes[e.u].q, rm_.nodes[e.v].q, discs_[m], inst_.radius, &inst_.ws, grasp,
                                 rm_.params.resolution)
                       ? 0
                       : 1;
        }
        return slot == 1;
    }

private:
    const LabeledRoadmap& rm_;
    const Instance& inst_;
    EdgeCheck check_;
    CellSet blocked_[2];
    std::vector<Position> discs_[2];
    std::vector<signed char> cache_[2];
};

/**
 * Two-layer search (layer 0 = transit, layer 1 = transfer) from a single
 * source state to any target state. Layer switches are zero-cost and only
 * allowed at `switch_nodes`.
 *
 * A* runs backwards from the targets with the joint-space distance to the
 * source as heuristic, so every closed state holds its exact cost-to-go.
 * The path is then read forwards by always stepping to the smallest closed
 * successor state that preserves optimality.
 */
struct LayeredResult {
    std::vector<std::pair<std::size_t, int>> states; ///< (node, layer)
    double cost{0};
};

inline std::optional<LayeredResult> layered_search(const LabeledRoadmap& rm, EdgeFilter& filter, std::size_t source,
                                                   int source_layer, std::span<const std::size_t> targets, int target_layer,
                                                   std::span<const std::size_t> switch_nodes) {
    const std::size_t V = rm.nodes.size();
    auto id = [V](std::size_t v, int layer) { return static_cast<std::size_t>(layer) * V + v; };
    const std::size_t S = 2 * V;
    const std::size_t src = id(source, source_layer);
    const Config& qs = rm.nodes[source].q;

    std::vector<char> is_switch(V, 0);
    for (auto p : switch_nodes) is_switch[p] = 1;
    std::vector<char> is_target(S, 0);
    for (auto t : targets) is_target[id(t, target_layer)] = 1;

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> g(S, inf);
    std::vector<char> closed(S, 0);
    using Entry = std::tuple<double, std::size_t>; // (f, state)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    auto h = [&](std::size_t state) { return config_distance(rm.nodes[state % V].q, qs); };
    for (std::size_t t = 0; t < S; ++t)
        if (is_target[t]) {
            g[t] = 0.0;
            open.emplace(h(t), t);
        }

    while (!open.empty()) {
        const auto [f, x] = open.top();
        open.pop();
        if (closed[x]) continue;
        closed[x] = 1;
        if (x == src) break;
        const std::size_t v = x % V;
        const int layer = static_cast<int>(x / V);
        for (auto [w, e] : rm.adjacency[v]) {
            const std::size_t y = id(w, layer);
            if (closed[y] || !filter.allowed(e, static_cast<Mode>(layer))) continue;
            const double ng = g[x] + rm.edges[e].cost;
            if (ng < g[y]) {
                g[y] = ng;
                open.emplace(ng + h(y), y);
            }
        }
        if (layer == 1 && is_switch[v]) { // reverse of the forward switch (v,0) -> (v,1)
            const std::size_t y = id(v, 0);
            if (!closed[y] && g[x] < g[y]) {
                g[y] = g[x];
                open.emplace(g[x] + h(y), y);
            }
        }
    }
    if (!closed[src]) return std::nullopt;

    LayeredResult out;
    out.cost = g[src];
    std::size_t x = src;
    out.states.emplace_back(x % V, static_cast<int>(x / V));
    while (!is_target[x] || g[x] != 0.0) {
        const std::size_t v = x % V;
        const int layer = static_cast<int>(x / V);
        std::size_t best = S;
        for (auto [w, e] : rm.adjacency[v]) {
            const std::size_t y = id(w, layer);
            if (closed[y] && y < best && g[y] + rm.edges[e].cost == g[x] && filter.allowed(e, static_cast<Mode>(layer))) best = y;
        }
        if (layer == 0 && is_switch[v]) {
            const std::size_t y = id(v, 1);
            if (closed[y] && y < best && g[y] == g[x]) best = y;
        }
        if (best == S) throw std::logic_error("layered_search: broken optimal-successor chain");
        x = best;
        out.states.emplace_back(x % V, static_cast<int>(x / V));
    }
    return out;
}

} // namespace detail

/// A* between two nodes in one mode. Edges are usable iff their labels miss (occupied \ ignore).
inline std::optional<PathResult> plan_path(const LabeledRoadmap& rm, const Instance& inst, const Query& q,
                                           EdgeCheck check = EdgeCheck::labels) {
    if (q.from_node >= rm.nodes.size() || q.to_node >= rm.nodes.size()) throw std::out_of_range("plan_path: bad node index");
    const CellSet blocked = q.occupied.minus(q.ignore);
    detail::EdgeFilter filter(rm, inst, check, blocked, blocked);
    const int layer = static_cast<int>(q.mode);
    const std::size_t target[] = {q.to_node};
    auto res = detail::layered_search(rm, filter, q.from_node, layer, target, layer, {});
    if (!res) return std::nullopt;
    PathResult out;
    out.cost = res->cost;
    for (auto [v, l] : res->states) out.nodes.push_back(v);
    return out;
}

/// One manipulation: home -> pick (transit), pick -> place (transfer). Retreat is the transfer leg reversed.
struct ManipPath {
    ObjectId object{0};
    std::size_t from_cell{kNoCell};
    std::size_t to_cell{kNoCell};
    std::vector<std::size_t> transit;  ///< home ... pick node
    std::vector<std::size_t> transfer; ///< pick node ... place node
    double cost{0};
    bool verified{true}; ///< false when the snapped plan collides with an unsnapped object position
};

/**
 * Plans moving object `o` from its position in `a` to grid cell `target_cell`.
 * Other objects occupy their snapped cells; the moved object's own cell is
 * forgiven in both legs and the target cell in the transfer leg. The pick
 * grasp is chosen jointly with the transfer leg. Returns nullopt when the
 * target disc overlaps another object or no path exists.
 */
inline std::optional<ManipPath> plan_manipulation(const LabeledRoadmap& rm, const Instance& inst, const Arrangement& a,
                                                  ObjectId o, std::size_t target_cell, EdgeCheck check = EdgeCheck::labels) {
    if (o >= a.size()) throw std::out_of_range("plan_manipulation: bad object id");
    if (target_cell >= inst.grid.size()) throw std::out_of_range("plan_manipulation: bad target cell");
    const Position target = inst.grid.cells[target_cell];
    for (std::size_t j = 0; j < a.size(); ++j)
        if (j != o && discs_overlap(a[j], target, inst.radius)) return std::nullopt;

    const std::size_t src = snap_to_grid(a[o], inst.grid);
    if (src == target_cell && a[o] == target) throw std::invalid_argument("plan_manipulation: object already at target");
    const auto& picks = rm.grasp_nodes(src);
    const auto& places = rm.grasp_nodes(target_cell);
    if (picks.empty()) throw NoGraspNode("no grasp node for cell " + std::to_string(src));
    if (places.empty()) throw NoGraspNode("no grasp node for cell " + std::to_string(target_cell));

    CellSet occupied(inst.grid.size());
    bool off_grid = false;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (j == o) continue;
        occupied.insert(snap_to_grid(a[j], inst.grid));
        off_grid = off_grid || !cell_of(a[j], inst.grid);
    }
    const CellSet blocked_transit = occupied.minus(CellSet(inst.grid.size(), {src}));
    const CellSet blocked_transfer = occupied.minus(CellSet(inst.grid.size(), {src, target_cell}));
    detail::EdgeFilter filter(rm, inst, check, blocked_transit, blocked_transfer);
    auto res = detail::layered_search(rm, filter, rm.home, 0, places, 1, picks);
    if (!res) return std::nullopt;

    ManipPath path;
    path.object = o;
    path.from_cell = src;
    path.to_cell = target_cell;
    path.cost = res->cost;
    for (auto [v, layer] : res->states) (layer == 0 ? path.transit : path.transfer).push_back(v);

    if (off_grid && check == EdgeCheck::labels) {
        std::vector<Position> others;
        for (std::size_t j = 0; j < a.size(); ++j)
            if (j != o) others.push_back(a[j]);
        auto leg_clear = [&](const std::vector<std::size_t>& leg, std::optional<double> grasp) {
            for (std::size_t i = 1; i < leg.size(); ++i)
                if (edge_collides(inst.arm, rm.nodes[leg[i - 1]].q, rm.nodes[leg[i]].q, others, inst.radius, nullptr, grasp,
                                  rm.params.resolution))
                    return false;
            return true;
        };
        path.verified = leg_clear(path.transit, std::nullopt) && leg_clear(path.transfer, inst.radius);
    }
    return path;
}

} // namespace rearrange
