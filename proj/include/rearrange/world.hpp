#pragma once
// Objects, arrangements, the candidate-position grid and instance generation.

#include "rearrange/geom2d.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace rearrange {

using ObjectId = std::size_t;

/// Dense map ObjectId -> resting position.
using Arrangement = std::vector<Position>;

/// At-goal bitmask of a monotone search state; bit i set iff object i rests at its goal.
using MonoState = std::uint64_t;

inline constexpr std::size_t kMaxObjects = 63;

inline constexpr MonoState bit(ObjectId o) noexcept { return MonoState{1} << o; }
inline constexpr MonoState full_mask(std::size_t n) noexcept { return n == 0 ? 0 : (~MonoState{0} >> (64 - n)); }

/// Candidate object positions. Cells are row-major, row 0 nearest the open side.
struct PositionGrid {
    std::vector<Position> cells;
    double spacing{0};
    std::size_t cols{0};
    std::size_t rows{0};

    [[nodiscard]] std::size_t size() const noexcept { return cells.size(); }
};

struct Instance {
    WorkspaceGeom ws;
    PlanarArm arm;
    double radius{0};
    Arrangement start;
    Arrangement goal;
    PositionGrid grid;
    std::uint64_t seed{0};

    [[nodiscard]] std::size_t num_objects() const noexcept { return start.size(); }
};

/// Geometry knobs for generated instances. Lengths are in workspace units.
struct WorldConfig {
    double radius{0.05};
    std::size_t cols{6};
    std::size_t rows{3};
    Side open_side{Side::south};
    double base_offset{0.6};
    std::array<double, 3> link_lengths{0.55, 0.40, 0.15};
    double link_thickness{0.012};
    double approach_half_angle{kPi / 3};
    std::array<Interval, 3> joint_limits{Interval{-kPi, kPi}, Interval{-2.6, 2.6}, Interval{-2.6, 2.6}};
    Config home{{0.0, 2.5, 2.5}};
    double spacing_factor{3.0}; ///< grid pitch in radii

    [[nodiscard]] double spacing() const noexcept { return spacing_factor * radius; }
};

enum class GenMode { random_start_row_goals, random_both };

class GenerationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotMonotoneState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Maps shelf-local coordinates (u along the open side, v into the shelf) to world coordinates.
struct ShelfFrame {
    Side side;
    double width;
    double depth;

    [[nodiscard]] Vec2 to_world(double u, double v) const noexcept {
        switch (side) {
        case Side::south: return {u, v};
        case Side::north: return {width - u, depth - v};
        case Side::west: return {v, width - u};
        case Side::east: return {depth - v, u};
        }
        return {u, v};
    }

    [[nodiscard]] double inward_heading() const noexcept {
        switch (side) {
        case Side::south: return kPi / 2;
        case Side::north: return -kPi / 2;
        case Side::west: return 0.0;
        case Side::east: return kPi;
        }
        return kPi / 2;
    }

    [[nodiscard]] Rect rect() const noexcept {
        const bool sideways = side == Side::east || side == Side::west;
        return sideways ? Rect{{0, 0}, {depth, width}} : Rect{{0, 0}, {width, depth}};
    }
};

} // namespace detail

/// Builds the shelf, arm and grid for `cfg` with no objects.
inline Instance make_world(const WorldConfig& cfg) {
    if (cfg.cols == 0 || cfg.rows == 0) throw std::invalid_argument("grid must have at least one cell");
    const double s = cfg.spacing();
    const detail::ShelfFrame frame{cfg.open_side, static_cast<double>(cfg.cols) * s, static_cast<double>(cfg.rows) * s};

    Instance inst;
    inst.radius = cfg.radius;
    inst.ws = WorkspaceGeom::make(frame.rect(), cfg.open_side, 0.5 * s);
    inst.grid.spacing = s;
    inst.grid.cols = cfg.cols;
    inst.grid.rows = cfg.rows;
    for (std::size_t r = 0; r < cfg.rows; ++r)
        for (std::size_t c = 0; c < cfg.cols; ++c)
            inst.grid.cells.push_back(frame.to_world((static_cast<double>(c) + 0.5) * s, (static_cast<double>(r) + 0.5) * s));

    inst.arm.base = frame.to_world(0.5 * frame.width, -cfg.base_offset);
    inst.arm.link_lengths = cfg.link_lengths;
    inst.arm.link_thickness = cfg.link_thickness;
    inst.arm.joint_limits = cfg.joint_limits;
    inst.arm.heading = frame.inward_heading();
    inst.arm.approach_half_angle = cfg.approach_half_angle;
    inst.arm.home = cfg.home;
    return inst;
}

/// Index of the nearest cell; ties go to the lowest index.
inline std::size_t snap_to_grid(Position p, const PositionGrid& grid) {
    if (grid.cells.empty()) throw std::invalid_argument("snap_to_grid: empty grid");
    std::size_t best = 0;
    double best_d = dist(p, grid.cells[0]);
    for (std::size_t i = 1; i < grid.cells.size(); ++i) {
        const double d = dist(p, grid.cells[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

/// Exact cell index of `p`, if `p` is a grid cell.
inline std::optional<std::size_t> cell_of(Position p, const PositionGrid& grid) {
    for (std::size_t i = 0; i < grid.cells.size(); ++i)
        if (grid.cells[i] == p) return i;
    return std::nullopt;
}

inline bool discs_overlap(Position a, Position b, double r) noexcept { return dist(a, b) < 2.0 * r; }

inline bool is_valid_arrangement(const Arrangement& a, const WorkspaceGeom& ws, double r) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i].x) || !std::isfinite(a[i].y) || !ws.clear_of_walls(a[i])) return false;
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (discs_overlap(a[i], a[j], r)) return false;
    }
    return true;
}

/// Goal cell index per object; throws when a goal is off the grid.
inline std::vector<std::size_t> goal_cells(const Instance& inst) {
    std::vector<std::size_t> out;
    out.reserve(inst.goal.size());
    for (const auto& g : inst.goal) {
        auto c = cell_of(g, inst.grid);
        if (!c) throw std::invalid_argument("goal position is not a grid cell");
        out.push_back(*c);
    }
    return out;
}

/**
 * Random instance with `n` objects. Goals either fill the grid front row
 * first (`random_start_row_goals`) or take random distinct cells; starts are
 * rejection-sampled anywhere inside the shelf. Pure in (n, mode, seed, cfg).
 */
inline Instance gen_instance(std::size_t n, GenMode mode, std::uint64_t seed, const WorldConfig& cfg = {}) {
    Instance inst = make_world(cfg);
    inst.seed = seed;
    if (n > inst.grid.size()) throw std::invalid_argument("more objects than grid cells");
    if (n > kMaxObjects) throw std::invalid_argument("too many objects");

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(inst.grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (mode == GenMode::random_both) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) inst.goal.push_back(inst.grid.cells[order[i]]);

    const Rect& R = inst.ws.rect;
    const double c = inst.ws.clearance;
    std::uniform_real_distribution<double> ux(R.min.x + c, R.max.x - c);
    std::uniform_real_distribution<double> uy(R.min.y + c, R.max.y - c);
    constexpr int kMaxSamples = 10'000;
    int samples = 0;
    while (inst.start.size() < n) {
        if (samples++ >= kMaxSamples) throw GenerationFailed("rejection sampling exhausted; workspace over-packed");
        const Position p{ux(rng), uy(rng)};
        bool ok = inst.ws.clear_of_walls(p);
        for (const auto& q : inst.start) ok = ok && !discs_overlap(p, q, inst.radius);
        if (ok) inst.start.push_back(p);
    }
    return inst;
}

inline MonoState mono_state_of(const Arrangement& a, const Instance& inst) {
    if (a.size() != inst.num_objects()) throw std::invalid_argument("arrangement size mismatch");
    MonoState s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == inst.goal[i])
            s |= bit(i);
        else if (!(a[i] == inst.start[i]))
            throw NotMonotoneState("object " + std::to_string(i) + " is at neither its start nor its goal");
    }
    return s;
}

/// Arrangement of the monotone state `s` relative to `root` (objects with bit set sit at their goals).
inline Arrangement arrangement_of(MonoState s, const Arrangement& root, const Arrangement& goal) {
    Arrangement a = root;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (s & bit(i)) a[i] = goal[i];
    return a;
}

} // namespace rearrange
