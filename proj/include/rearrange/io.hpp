#pragma once
// JSON forms of instances, roadmaps and solver results (nlohmann::json).

#include "rearrange/perts.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rearrange {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline json to_json(Vec2 p) { return json::array({p.x, p.y}); }

inline Vec2 vec2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw FormatError("expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const Arrangement& a) {
    json out = json::array();
    for (const auto& p : a) out.push_back(to_json(p));
    return out;
}

inline Arrangement arrangement_from_json(const json& j) {
    Arrangement a;
    for (const auto& p : j) a.push_back(vec2_from_json(p));
    return a;
}

inline json to_json(const Config& q) { return json::array({q[0], q[1], q[2]}); }

inline Config config_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw FormatError("expected three joint values");
    return Config{{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}};
}

inline json geometry_json(const Instance& inst) {
    json limits = json::array();
    for (const auto& l : inst.arm.joint_limits) limits.push_back({l.lo, l.hi});
    json cells = json::array();
    for (const auto& c : inst.grid.cells) cells.push_back(to_json(c));
    return {
        {"radius", inst.radius},
        {"workspace",
         {{"min", to_json(inst.ws.rect.min)},
          {"max", to_json(inst.ws.rect.max)},
          {"open_side", to_string(inst.ws.open_side)},
          {"clearance", inst.ws.clearance}}},
        {"arm",
         {{"base", to_json(inst.arm.base)},
          {"link_lengths", inst.arm.link_lengths},
          {"link_thickness", inst.arm.link_thickness},
          {"joint_limits", limits},
          {"heading", inst.arm.heading},
          {"approach_half_angle", inst.arm.approach_half_angle},
          {"home", to_json(inst.arm.home)}}},
        {"grid", {{"cells", cells}, {"spacing", inst.grid.spacing}, {"cols", inst.grid.cols}, {"rows", inst.grid.rows}}},
    };
}

inline json to_json(const Instance& inst) {
    json j = geometry_json(inst);
    j["schema"] = kSchemaVersion;
    j["seed"] = inst.seed;
    j["start"] = to_json(inst.start);
    j["goal"] = to_json(inst.goal);
    return j;
}

/// Parses and validates an instance; rejects overlapping or wall-violating arrangements and off-grid goals.
inline Instance instance_from_json(const json& j) {
    try {
        if (j.value("schema", 0) != kSchemaVersion) throw FormatError("unsupported instance schema");
        Instance inst;
        inst.seed = j.at("seed").get<std::uint64_t>();
        inst.radius = j.at("radius").get<double>();
        const auto& w = j.at("workspace");
        inst.ws = WorkspaceGeom::make(Rect{vec2_from_json(w.at("min")), vec2_from_json(w.at("max"))},
                                      side_from_string(w.at("open_side").get<std::string>()), w.at("clearance").get<double>());
        const auto& a = j.at("arm");
        inst.arm.base = vec2_from_json(a.at("base"));
        inst.arm.link_lengths = a.at("link_lengths").get<std::array<double, 3>>();
        inst.arm.link_thickness = a.at("link_thickness").get<double>();
        const auto& lim = a.at("joint_limits");
        if (lim.size() != 3) throw FormatError("expected three joint limits");
        for (std::size_t i = 0; i < 3; ++i) inst.arm.joint_limits[i] = Interval{lim[i].at(0).get<double>(), lim[i].at(1).get<double>()};
        inst.arm.heading = a.at("heading").get<double>();
        inst.arm.approach_half_angle = a.at("approach_half_angle").get<double>();
        inst.arm.home = config_from_json(a.at("home"));
        const auto& g = j.at("grid");
        for (const auto& c : g.at("cells")) inst.grid.cells.push_back(vec2_from_json(c));
        inst.grid.spacing = g.at("spacing").get<double>();
        inst.grid.cols = g.at("cols").get<std::size_t>();
        inst.grid.rows = g.at("rows").get<std::size_t>();
        inst.start = arrangement_from_json(j.at("start"));
        inst.goal = arrangement_from_json(j.at("goal"));
        if (inst.start.size() != inst.goal.size()) throw FormatError("start and goal sizes differ");
        if (inst.start.size() > kMaxObjects) throw FormatError("too many objects");
        if (!is_valid_arrangement(inst.start, inst.ws, inst.radius)) throw FormatError("start arrangement is invalid");
        if (!is_valid_arrangement(inst.goal, inst.ws, inst.radius)) throw FormatError("goal arrangement is invalid");
        for (const auto& p : inst.goal)
            if (!cell_of(p, inst.grid)) throw FormatError("goal position is not a grid cell");
        return inst;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed instance: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("malformed instance: ") + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Roadmaps

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline json to_json(const RoadmapParams& p) {
    return {{"num_samples", p.num_samples}, {"grasp_ratio", p.grasp_ratio}, {"connection_k", p.connection_k},
            {"k_grasps", p.k_grasps},       {"workspace_bias", p.workspace_bias}, {"seed", p.seed},
            {"resolution", p.resolution}};
}

inline RoadmapParams roadmap_params_from_json(const json& j) {
    RoadmapParams p;
    p.num_samples = j.at("num_samples").get<std::size_t>();
    p.grasp_ratio = j.at("grasp_ratio").get<double>();
    p.connection_k = j.at("connection_k").get<std::size_t>();
    p.k_grasps = j.at("k_grasps").get<std::size_t>();
    p.workspace_bias = j.at("workspace_bias").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.resolution = j.at("resolution").get<double>();
    return p;
}

/// Cache key: hash of the workspace geometry (objects excluded) and the roadmap parameters.
inline std::string roadmap_key(const Instance& inst, const RoadmapParams& p) {
    const json j = {{"geometry", geometry_json(inst)}, {"params", to_json(p)}};
    std::ostringstream os;
    os << std::hex << fnv1a(j.dump());
    return os.str();
}

inline json to_json(const LabeledRoadmap& rm, const std::string& key = {}) {
    json nodes = json::array();
    for (const auto& n : rm.nodes) {
        const char* role = n.role == NodeRole::home ? "home" : n.role == NodeRole::grasp ? "grasp" : "random";
        json jn = {{"q", to_json(n.q)}, {"role", role}};
        if (n.cell != kNoCell) jn["cell"] = n.cell;
        nodes.push_back(std::move(jn));
    }
    json edges = json::array();
    for (const auto& e : rm.edges)
        edges.push_back({{"u", e.u},
                         {"v", e.v},
                         {"cost", e.cost},
                         {"transit", e.transit_labels.members()},
                         {"transfer", e.transfer_labels.members()},
                         {"transfer_wall_blocked", e.transfer_wall_blocked}});
    return {{"schema", kSchemaVersion}, {"key", key},       {"params", to_json(rm.params)}, {"home", rm.home},
            {"num_cells", rm.num_cells}, {"labeled", rm.labeled}, {"nodes", nodes},          {"edges", edges}};
}

inline LabeledRoadmap roadmap_from_json(const json& j) {
    try {
        if (j.value("schema", 0) != kSchemaVersion) throw FormatError("unsupported roadmap schema");
        LabeledRoadmap rm;
        rm.params = roadmap_params_from_json(j.at("params"));
        rm.home = j.at("home").get<std::size_t>();
        rm.num_cells = j.at("num_cells").get<std::size_t>();
        rm.labeled = j.at("labeled").get<bool>();
        for (const auto& jn : j.at("nodes")) {
            RoadmapNode n;
            n.q = config_from_json(jn.at("q"));
            const auto role = jn.at("role").get<std::string>();
            n.role = role == "home" ? NodeRole::home : role == "grasp" ? NodeRole::grasp : NodeRole::random;
            n.cell = jn.value("cell", kNoCell);
            if (n.role == NodeRole::grasp && n.cell >= rm.num_cells) throw FormatError("grasp node without a valid cell");
            rm.nodes.push_back(n);
        }
        for (const auto& je : j.at("edges")) {
            RoadmapEdge e;
            e.u = je.at("u").get<std::size_t>();
            e.v = je.at("v").get<std::size_t>();
            if (e.u >= rm.nodes.size() || e.v >= rm.nodes.size()) throw FormatError("edge endpoint out of range");
            e.cost = je.at("cost").get<double>();
            e.transit_labels = CellSet(rm.num_cells);
            e.transfer_labels = CellSet(rm.num_cells);
            for (auto c : je.at("transit")) e.transit_labels.insert(c.get<std::size_t>());
            for (auto c : je.at("transfer")) e.transfer_labels.insert(c.get<std::size_t>());
            e.transfer_wall_blocked = je.at("transfer_wall_blocked").get<bool>();
            rm.edges.push_back(std::move(e));
        }
        if (rm.home >= rm.nodes.size()) throw FormatError("home node out of range");
        rm.rebuild_index();
        return rm;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed roadmap: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw FormatError(std::string("malformed roadmap: ") + e.what());
    }
}

/**
 * Loads the roadmap for (inst geometry, params) from `cache_dir` when a file
 * with the matching key exists; otherwise builds, labels and stores it.
 * An empty `cache_dir` disables caching.
 */
inline LabeledRoadmap load_or_build_roadmap(const Instance& inst, const RoadmapParams& params, const std::string& cache_dir) {
    const std::string key = roadmap_key(inst, params);
    if (cache_dir.empty()) return build_labeled_roadmap(inst, params);
    const std::string path = cache_dir + "/roadmap_" + key + ".json";
    if (std::ifstream probe(path); probe) {
        auto rm = roadmap_from_json(read_json_file(path));
        if (rm.params == params && rm.num_cells == inst.grid.size()) return rm;
    }
    auto rm = build_labeled_roadmap(inst, params);
    write_text_file(path, to_json(rm, key).dump());
    return rm;
}

// ---------------------------------------------------------------------------
// Results

inline json to_json(const ManipPath& p, const LabeledRoadmap* rm = nullptr) {
    json j = {{"object", p.object}, {"from_cell", p.from_cell}, {"to_cell", p.to_cell},
              {"transit", p.transit}, {"transfer", p.transfer}, {"cost", p.cost}, {"verified", p.verified}};
    if (rm) {
        auto configs = [&](const std::vector<std::size_t>& leg) {
            json out = json::array();
            for (auto v : leg) out.push_back(to_json(rm->nodes.at(v).q));
            return out;
        };
        j["transit_configs"] = configs(p.transit);
        j["transfer_configs"] = configs(p.transfer);
    }
    return j;
}

inline json to_json(const SolveResult& r, const LabeledRoadmap* rm = nullptr) {
    json actions = json::array();
    for (const auto& p : r.paths) actions.push_back(to_json(p, rm));
    return {{"outcome", to_string(r.outcome)},
            {"order", r.order},
            {"actions", actions},
            {"buffers", 0},
            {"tree_size", r.tree.size()},
            {"ledger_size", r.ledger_size},
            {"stats",
             {{"expansions", r.stats.expansions},
              {"mp_calls", r.stats.mp_calls},
              {"queries", r.stats.queries},
              {"pruned", r.stats.pruned}}}};
}

inline json to_json(const GlobalResult& r, const LabeledRoadmap* rm = nullptr) {
    json actions = json::array();
    json order = json::array();
    for (const auto& p : r.actions) {
        actions.push_back(to_json(p, rm));
        order.push_back(p.object);
    }
    return {{"outcome", to_string(r.outcome)},
            {"order", order},
            {"actions", actions},
            {"buffers", r.buffers},
            {"tree_size", r.tree.size()},
            {"stats",
             {{"local_solves", r.stats.local_solves},
              {"perturbation_attempts", r.stats.perturbation_attempts},
              {"perturbations", r.stats.perturbations},
              {"expansions", r.stats.expansions},
              {"mp_calls", r.stats.mp_calls},
              {"pruned", r.stats.pruned}}}};
}

} // namespace rearrange
