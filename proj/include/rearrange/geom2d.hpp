#pragma once
/**
 * @file    geom2d.hpp
 * @brief   Planar geometry, 3R arm kinematics, grasp generation and
 *          collision predicates for the confined-shelf embodiment.
 *
 * Conventions:
 * - Angles are radians. A joint vector of zeros stretches the arm along
 *   `PlanarArm::heading`; joint i is the angle of link i relative to link i-1.
 * - Links are capsules (segment + radius). A grasped object is a disc rigidly
 *   centred on the tip of the last link.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rearrange {

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
    double x{0};
    double y{0};

    friend bool operator==(const Vec2&, const Vec2&) = default;
    Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const noexcept { return {x * s, y * s}; }
};

using Position = Vec2;

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) noexcept { return norm(a - b); }
inline Vec2 unit(double angle) noexcept { return {std::cos(angle), std::sin(angle)}; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) noexcept {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

struct Segment {
    Vec2 a;
    Vec2 b;
};

inline double point_segment_distance(Vec2 p, const Segment& s) noexcept {
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return dist(p, s.a + d * t);
}

inline bool segments_intersect(const Segment& s, const Segment& t) noexcept {
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); };
    const double d1 = orient(t.a, t.b, s.a);
    const double d2 = orient(t.a, t.b, s.b);
    const double d3 = orient(s.a, s.b, t.a);
    const double d4 = orient(s.a, s.b, t.b);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

inline double segment_segment_distance(const Segment& s, const Segment& t) noexcept {
    if (segments_intersect(s, t)) return 0.0;
    return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                     point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

struct Rect {
    Vec2 min;
    Vec2 max;

    [[nodiscard]] bool contains(Vec2 p) const noexcept {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
};

enum class Side { north, south, east, west };

inline std::string to_string(Side s) {
    switch (s) {
    case Side::north: return "north";
    case Side::south: return "south";
    case Side::east: return "east";
    case Side::west: return "west";
    }
    return "south";
}

inline Side side_from_string(const std::string& s) {
    if (s == "north") return Side::north;
    if (s == "south") return Side::south;
    if (s == "east") return Side::east;
    if (s == "west") return Side::west;
    throw std::invalid_argument("unknown side: " + s);
}

/// Axis-aligned shelf with one open side. Objects rest inside `rect`.
struct WorkspaceGeom {
    Rect rect;
    Side open_side{Side::south};
    std::array<Segment, 3> walls{};
    double clearance{0};

    static WorkspaceGeom make(Rect rect, Side open, double clearance) {
        const Vec2 sw = rect.min, ne = rect.max;
        const Vec2 se{ne.x, sw.y}, nw{sw.x, ne.y};
        const Segment south{sw, se}, east{se, ne}, north{ne, nw}, west{nw, sw};
        WorkspaceGeom ws{rect, open, {}, clearance};
        switch (open) {
        case Side::south: ws.walls = {east, north, west}; break;
        case Side::east: ws.walls = {north, west, south}; break;
        case Side::north: ws.walls = {west, south, east}; break;
        case Side::west: ws.walls = {south, east, north}; break;
        }
        return ws;
    }

    static constexpr double kTolerance = 1e-9; ///< absorbs rounding of grid cells placed exactly at the clearance

    /// True when a disc centred at p sits inside the rectangle with the required wall clearance.
    [[nodiscard]] bool clear_of_walls(Vec2 p) const noexcept {
        const double c = clearance - kTolerance;
        return p.x - rect.min.x >= c && rect.max.x - p.x >= c && p.y - rect.min.y >= c && rect.max.y - p.y >= c;
    }
};

struct Interval {
    double lo{-kPi};
    double hi{kPi};

    [[nodiscard]] bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct Config {
    std::array<double, 3> joints{};

    friend bool operator==(const Config&, const Config&) = default;
    double operator[](std::size_t i) const noexcept { return joints[i]; }
    double& operator[](std::size_t i) noexcept { return joints[i]; }
};

inline double config_distance(const Config& a, const Config& b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct PlanarArm {
    Position base;
    std::array<double, 3> link_lengths{};
    double link_thickness{0};
    std::array<Interval, 3> joint_limits{};
    double heading{kPi / 2};         ///< direction of the stretched arm at q = 0
    double approach_half_angle{kPi}; ///< grasp orientations are kept within heading +/- this
    Config home{};                   ///< rest configuration, parked outside the workspace

    [[nodiscard]] double reach() const noexcept { return link_lengths[0] + link_lengths[1] + link_lengths[2]; }

    [[nodiscard]] bool within_limits(const Config& q) const noexcept {
        for (std::size_t i = 0; i < 3; ++i)
            if (!joint_limits[i].contains(q[i])) return false;
        return true;
    }
};

struct Capsule {
    Segment axis;
    double radius{0};
};

struct Disc {
    Position center;
    double radius{0};
};

struct SweptBody {
    std::array<Capsule, 3> capsules{};
    std::optional<Disc> grasped_disc;

    [[nodiscard]] Position tip() const noexcept { return capsules[2].axis.b; }
};

inline SweptBody forward_kinematics(const PlanarArm& arm, const Config& q,
                                    std::optional<double> grasped_radius = std::nullopt) {
    SweptBody body;
    Position p = arm.base;
    double theta = arm.heading;
    for (std::size_t i = 0; i < 3; ++i) {
        theta += q[i];
        const Position next = p + unit(theta) * arm.link_lengths[i];
        body.capsules[i] = Capsule{{p, next}, arm.link_thickness};
        p = next;
    }
    if (grasped_radius) body.grasped_disc = Disc{p, *grasped_radius};
    return body;
}

class EmptyGraspSet : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed-form IK for a tip at `target` with last-link direction `phi`; elbow_sign picks the branch.
inline std::optional<Config> ik_solve(const PlanarArm& arm, Position target, double phi, double elbow_sign) {
    const double l1 = arm.link_lengths[0], l2 = arm.link_lengths[1], l3 = arm.link_lengths[2];
    const Vec2 bw = target - unit(phi) * l3 - arm.base;
    const double d = norm(bw);
    const double c2 = (d * d - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if (c2 < -1.0 - 1e-9 || c2 > 1.0 + 1e-9) return std::nullopt;
    const double elbow = (elbow_sign < 0 ? -1.0 : 1.0) * std::acos(std::clamp(c2, -1.0, 1.0));
    const double link1 = std::atan2(bw.y, bw.x) - std::atan2(l2 * std::sin(elbow), l1 + l2 * std::cos(elbow));
    Config q{{wrap_angle(link1 - arm.heading), elbow, wrap_angle(phi - link1 - elbow)}};
    if (!arm.within_limits(q) || dist(forward_kinematics(arm, q).tip(), target) > 1e-9) return std::nullopt;
    return q;
}

/**
 * Grasp configurations whose tip coincides with `target`.
 *
 * K approach orientations are spread evenly over the orientations that are
 * both kinematically reachable and inside the approach cone; each yields an
 * elbow-up and an elbow-down solution from the closed-form 2-link IK on the
 * wrist point. Limit-violating and duplicate solutions are dropped and the
 * survivors thinned to at most K by even striding.
 */
inline std::vector<Config> ik_grasp_configs(const PlanarArm& arm, Position target, std::size_t K) {
    if (K == 0) throw std::invalid_argument("ik_grasp_configs: K must be positive");
    const double l1 = arm.link_lengths[0], l2 = arm.link_lengths[1], l3 = arm.link_lengths[2];
    const Vec2 v = target - arm.base;
    const double dv = norm(v);
    const double rmax = l1 + l2, rmin = std::abs(l1 - l2);
    constexpr double eps = 1e-12;
    if (dv < eps || dv > arm.reach() * (1.0 + eps)) throw EmptyGraspSet("target out of reach");

    // |wrist - base|^2 = dv^2 + l3^2 - 2 l3 dv cos(phi - psi)
    const double psi = std::atan2(v.y, v.x);
    const double c_hi = (dv * dv + l3 * l3 - rmax * rmax) / (2.0 * l3 * dv);
    const double c_lo = (dv * dv + l3 * l3 - rmin * rmin) / (2.0 * l3 * dv);
    if (c_hi > 1.0 + 1e-9) throw EmptyGraspSet("target out of reach");
    const double a_hi = c_hi >= 1.0 - eps ? 0.0 : std::acos(std::max(-1.0, c_hi));
    const double a_lo = c_lo >= 1.0 ? 0.0 : std::acos(std::max(-1.0, c_lo));

    const double d0 = wrap_angle(arm.heading - psi);
    const double lo = std::max(-a_hi, d0 - arm.approach_half_angle);
    const double hi = std::min(a_hi, d0 + arm.approach_half_angle);
    if (lo > hi + eps) throw EmptyGraspSet("no approach orientation inside the cone");

    std::vector<Config> candidates;
    for (std::size_t k = 0; k < K; ++k) {
        const double delta = K == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(K - 1);
        if (std::abs(delta) < a_lo - eps) continue;
        for (const double sign : {1.0, -1.0}) {
            const auto q = ik_solve(arm, target, psi + delta, sign);
            if (!q || std::find(candidates.begin(), candidates.end(), *q) != candidates.end()) continue;
            candidates.push_back(*q);
        }
    }
    if (candidates.empty()) throw EmptyGraspSet("no limit-respecting grasp configuration");
    if (candidates.size() <= K) return candidates;
    std::vector<Config> out;
    out.reserve(K);
    for (std::size_t i = 0; i < K; ++i) out.push_back(candidates[i * candidates.size() / K]);
    return out;
}

inline bool collides_disc(const SweptBody& body, Position disc_center, double r) noexcept {
    for (const auto& c : body.capsules)
        if (point_segment_distance(disc_center, c.axis) < c.radius + r) return true;
    if (body.grasped_disc && dist(body.grasped_disc->center, disc_center) < body.grasped_disc->radius + r) return true;
    return false;
}

inline bool collides_workspace(const SweptBody& body, const WorkspaceGeom& ws) noexcept {
    for (const auto& wall : ws.walls) {
        for (const auto& c : body.capsules)
            if (segment_segment_distance(c.axis, wall) < c.radius) return true;
        if (body.grasped_disc && point_segment_distance(body.grasped_disc->center, wall) < body.grasped_disc->radius)
            return true;
    }
    return false;
}

inline constexpr double kDefaultEdgeResolution = 0.02;

/**
 * Number of interpolation intervals used for an edge: the smallest power of
 * two keeping every joint step within `resolution`. Powers of two make the
 * samples at resolution/2 a superset of those at resolution.
 */
inline std::size_t interpolation_steps(const Config& a, const Config& b, double resolution) {
    double m = 0.0;
    for (std::size_t i = 0; i < 3; ++i) m = std::max(m, std::abs(b[i] - a[i]));
    std::size_t steps = 1;
    while (static_cast<double>(steps) * resolution < m) steps *= 2;
    return steps;
}

inline Config interpolate(const Config& a, const Config& b, std::size_t i, std::size_t steps) noexcept {
    if (i == 0) return a;
    if (i >= steps) return b;
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    Config q;
    for (std::size_t j = 0; j < 3; ++j) q[j] = a[j] + t * (b[j] - a[j]);
    return q;
}

/// Invokes `fn(body)` on every interpolated body of the straight joint-space edge; stops when fn returns true.
template <class Fn>
bool any_interpolated_body(const PlanarArm& arm, const Config& from, const Config& to,
                           std::optional<double> grasped, double resolution, Fn&& fn) {
    if (!(resolution > 0.0)) throw std::invalid_argument("edge resolution must be positive");
    const std::size_t steps = interpolation_steps(from, to, resolution);
    for (std::size_t i = 0; i <= steps; ++i)
        if (fn(forward_kinematics(arm, interpolate(from, to, i, steps), grasped))) return true;
    return false;
}

/**
 * True iff some interpolated body along from->to hits a wall of `ws` (when
 * given) or any disc of radius `obstacle_radius` centred in `obstacles`.
 */
inline bool edge_collides(const PlanarArm& arm, const Config& from, const Config& to,
                          std::span<const Position> obstacles, double obstacle_radius,
                          const WorkspaceGeom* ws, std::optional<double> grasped,
                          double resolution = kDefaultEdgeResolution) {
    return any_interpolated_body(arm, from, to, grasped, resolution, [&](const SweptBody& body) {
        if (ws && collides_workspace(body, *ws)) return true;
        for (const auto& c : obstacles)
            if (collides_disc(body, c, obstacle_radius)) return true;
        return false;
    });
}

} // namespace rearrange
