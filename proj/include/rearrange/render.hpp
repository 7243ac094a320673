#pragma once
// SVG snapshots of a scene and of each step of a plan.

#include "rearrange/roadmap.hpp"
#include "rearrange/world.hpp"

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rearrange {

namespace detail {

/// World -> pixel mapping with y pointing up in the world and down on screen.
class SvgCanvas {
public:
    SvgCanvas(const Instance& inst, double width_px) {
        lo_ = inst.ws.rect.min;
        hi_ = inst.ws.rect.max;
        extend(inst.arm.base);
        const double pad = inst.arm.reach() * 0.05 + inst.radius;
        lo_ = lo_ - Vec2{pad, pad};
        hi_ = hi_ + Vec2{pad, pad};
        scale_ = width_px / (hi_.x - lo_.x);
    }

    [[nodiscard]] double width() const { return (hi_.x - lo_.x) * scale_; }
    [[nodiscard]] double height() const { return (hi_.y - lo_.y) * scale_; }
    [[nodiscard]] double len(double l) const { return l * scale_; }
    [[nodiscard]] Vec2 px(Vec2 p) const { return {(p.x - lo_.x) * scale_, (hi_.y - p.y) * scale_}; }

private:
    void extend(Vec2 p) {
        lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
        hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
    }

    Vec2 lo_{}, hi_{};
    double scale_{1};
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline void line(std::ostream& os, const SvgCanvas& c, const char* cls, Vec2 a, Vec2 b, double stroke) {
    const Vec2 pa = c.px(a), pb = c.px(b);
    os << "<line class=\"" << cls << "\" x1=\"" << fmt(pa.x) << "\" y1=\"" << fmt(pa.y) << "\" x2=\"" << fmt(pb.x) << "\" y2=\""
       << fmt(pb.y) << "\" stroke-width=\"" << fmt(stroke) << "\"/>\n";
}

inline void circle(std::ostream& os, const SvgCanvas& c, const char* cls, Vec2 p, double r, const std::string& label = {}) {
    const Vec2 pp = c.px(p);
    os << "<circle class=\"" << cls << "\" cx=\"" << fmt(pp.x) << "\" cy=\"" << fmt(pp.y) << "\" r=\"" << fmt(c.len(r)) << "\"";
    if (!label.empty()) os << " data-object=\"" << label << "\"";
    os << "/>\n";
}

} // namespace detail

struct SvgFrame {
    Arrangement arrangement;
    std::optional<Config> arm; ///< arm pose to draw; nothing drawn when empty
};

/**
 * One SVG document: walls, opening, grid dots, goal outlines, discs at
 * `frame.arrangement`, then the arm. An instance without objects renders as
 * the workspace outline alone. Element order is fixed for diffing.
 */
inline std::string render_svg(const Instance& inst, const SvgFrame& frame, double width_px = 640) {
    const detail::SvgCanvas c(inst, width_px);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(c.width()) << "\" height=\"" << detail::fmt(c.height())
       << "\" viewBox=\"0 0 " << detail::fmt(c.width()) << ' ' << detail::fmt(c.height()) << "\">\n";
    os << "<style>.wall{stroke:#222}.opening{stroke:#bbb;stroke-dasharray:4 4}.grid{fill:#999}"
          ".goal{fill:none;stroke:#2a6;stroke-dasharray:3 2}.start{fill:#48c;fill-opacity:0.8}"
          ".arm{stroke:#c42;stroke-linecap:round}.held{fill:#c42;fill-opacity:0.5}</style>\n";

    const auto& R = inst.ws.rect;
    for (const auto& w : inst.ws.walls) detail::line(os, c, "wall", w.a, w.b, 3);
    const Vec2 sw = R.min, se{R.max.x, R.min.y}, ne = R.max, nw{R.min.x, R.max.y};
    const Segment opening = inst.ws.open_side == Side::south ? Segment{sw, se}
                            : inst.ws.open_side == Side::north ? Segment{ne, nw}
                            : inst.ws.open_side == Side::east  ? Segment{se, ne}
                                                               : Segment{nw, sw};
    detail::line(os, c, "opening", opening.a, opening.b, 1);

    if (inst.num_objects() > 0) {
        for (const auto& cell : inst.grid.cells) detail::circle(os, c, "grid", cell, inst.radius * 0.08);
        for (std::size_t i = 0; i < inst.goal.size(); ++i) detail::circle(os, c, "goal", inst.goal[i], inst.radius, std::to_string(i));
        for (std::size_t i = 0; i < frame.arrangement.size(); ++i)
            detail::circle(os, c, "start", frame.arrangement[i], inst.radius, std::to_string(i));
        if (frame.arm) {
            const SweptBody body = forward_kinematics(inst.arm, *frame.arm);
            for (const auto& cap : body.capsules) detail::line(os, c, "arm", cap.axis.a, cap.axis.b, c.len(2 * cap.radius));
        }
    }
    os << "</svg>\n";
    return os.str();
}

/// Scene at the start arrangement with the arm at home.
inline std::string render_scene(const Instance& inst) { return render_svg(inst, {inst.start, inst.arm.home}); }

/**
 * Frames for a plan: frame 0 is the start, frame i shows the arrangement
 * after action i with the arm at that action's place configuration.
 */
inline std::vector<std::string> render_frames(const Instance& inst, const LabeledRoadmap* rm, const std::vector<ManipPath>& actions) {
    std::vector<std::string> out;
    Arrangement a = inst.start;
    out.push_back(render_svg(inst, {a, inst.arm.home}));
    for (const auto& act : actions) {
        if (act.object >= a.size() || act.to_cell >= inst.grid.size()) throw std::out_of_range("render: action does not fit the instance");
        a[act.object] = inst.grid.cells[act.to_cell];
        std::optional<Config> pose;
        if (rm && !act.transfer.empty()) pose = rm->nodes.at(act.transfer.back()).q;
        out.push_back(render_svg(inst, {a, pose}));
    }
    return out;
}

} // namespace rearrange
