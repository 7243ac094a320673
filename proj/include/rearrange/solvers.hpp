#pragma once
/**
 * @file    solvers.hpp
 * @brief   Monotone rearrangement solvers over a pluggable move oracle.
 *
 * All three solvers try objects in ascending id and stop at the first full
 * ordering found:
 *  - mrs:       backtracking over object orderings, no state memoization;
 *  - dfs_dp:    depth-first over at-goal subsets, each subset entered once;
 *  - cidfs_dp:  dfs_dp that skips moves the invalidity ledger rules out.
 * cirs = detect_invalidity + cidfs_dp over the roadmap-backed oracle.
 */

#include "rearrange/constraints.hpp"
#include "rearrange/roadmap.hpp"
#include "rearrange/world.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rearrange {

using Clock = std::chrono::steady_clock;

class Deadline {
public:
    static Deadline never() { return Deadline(Clock::time_point::max()); }
    static Deadline after(double seconds) {
        if (!(seconds < 1e9)) return never();
        return Deadline(Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds)));
    }

    [[nodiscard]] bool expired() const { return at_ != Clock::time_point::max() && Clock::now() >= at_; }
    [[nodiscard]] double remaining() const {
        if (at_ == Clock::time_point::max()) return 1e18;
        return std::max(0.0, std::chrono::duration<double>(at_ - Clock::now()).count());
    }

private:
    explicit Deadline(Clock::time_point at) : at_(at) {}
    Clock::time_point at_;
};

/// Single-move feasibility. `feasible(s, o)`: can object o move from its root position to its goal at state s?
class MoveOracle {
public:
    virtual ~MoveOracle() = default;
    [[nodiscard]] virtual std::size_t num_objects() const = 0;
    /// Objects already at their goal when the search starts.
    [[nodiscard]] virtual MonoState root() const { return 0; }
    virtual std::optional<ManipPath> feasible(MonoState s, ObjectId o) = 0;
};

/// Roadmap-backed oracle for the monotone problem root -> inst.goal.
class GeometricOracle final : public MoveOracle {
public:
    GeometricOracle(const Instance& inst, const LabeledRoadmap& rm, Arrangement root, EdgeCheck check = EdgeCheck::labels)
        : inst_(inst), rm_(rm), root_arr_(std::move(root)), goals_(goal_cells(inst)), check_(check) {
        if (root_arr_.size() > kMaxObjects) throw std::invalid_argument("too many objects for a monotone search");
        for (std::size_t i = 0; i < root_arr_.size(); ++i)
            if (root_arr_[i] == inst.goal[i]) root_mask_ |= bit(i);
    }
    GeometricOracle(const Instance& inst, const LabeledRoadmap& rm, EdgeCheck check = EdgeCheck::labels)
        : GeometricOracle(inst, rm, inst.start, check) {}

    [[nodiscard]] std::size_t num_objects() const override { return root_arr_.size(); }
    [[nodiscard]] MonoState root() const override { return root_mask_; }
    [[nodiscard]] const Arrangement& root_arrangement() const noexcept { return root_arr_; }

    std::optional<ManipPath> feasible(MonoState s, ObjectId o) override {
        auto path = plan_manipulation(rm_, inst_, arrangement_of(s, root_arr_, inst_.goal), o, goals_[o], check_);
        if (path && !path->verified) ++unverified_;
        return path;
    }

    /// Plans that collide once off-grid objects are checked at their true positions.
    [[nodiscard]] std::size_t unverified_paths() const noexcept { return unverified_; }

private:
    const Instance& inst_;
    const LabeledRoadmap& rm_;
    Arrangement root_arr_;
    std::vector<std::size_t> goals_;
    EdgeCheck check_;
    MonoState root_mask_{0};
    std::size_t unverified_{0};
};

/// Table-driven oracle for geometry-free tests.
class SyntheticOracle final : public MoveOracle {
public:
    using Table = std::function<bool(MonoState, ObjectId)>;

    SyntheticOracle(std::size_t n, Table table, MonoState root = 0) : n_(n), table_(std::move(table)), root_(root) {}

    [[nodiscard]] std::size_t num_objects() const override { return n_; }
    [[nodiscard]] MonoState root() const override { return root_; }

    std::optional<ManipPath> feasible(MonoState s, ObjectId o) override {
        if (!table_(s, o)) return std::nullopt;
        ManipPath p;
        p.object = o;
        return p;
    }

private:
    std::size_t n_;
    Table table_;
    MonoState root_;
};

/// Per-solve memo over (state, object); counts planner invocations.
class MemoOracle {
public:
    explicit MemoOracle(MoveOracle& inner) : inner_(inner) {}

    const std::optional<ManipPath>& operator()(MonoState s, ObjectId o) {
        ++queries_;
        auto [it, inserted] = memo_.try_emplace(Key{s, o});
        if (inserted) {
            ++calls_;
            it->second = inner_.feasible(s, o);
        }
        return it->second;
    }

    [[nodiscard]] std::size_t calls() const noexcept { return calls_; }
    [[nodiscard]] std::size_t queries() const noexcept { return queries_; }

private:
    struct Key {
        MonoState s;
        ObjectId o;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept {
            return std::hash<std::uint64_t>{}(k.s * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(k.o));
        }
    };
    MoveOracle& inner_;
    std::unordered_map<Key, std::optional<ManipPath>, KeyHash> memo_;
    std::size_t calls_{0};
    std::size_t queries_{0};
};

struct TreeNode {
    MonoState parent{0};
    ObjectId moved{0};
    ManipPath path;
};

/// Arrangement-space search tree keyed by at-goal mask; children record the move that reached them.
class SearchTree {
public:
    explicit SearchTree(MonoState root = 0) : root_(root) {}

    [[nodiscard]] MonoState root() const noexcept { return root_; }
    [[nodiscard]] bool contains(MonoState s) const { return s == root_ || nodes_.count(s) > 0; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size() + 1; }

    void add(MonoState s, MonoState parent, ObjectId moved, ManipPath path) {
        if (contains(s)) return;
        nodes_.emplace(s, TreeNode{parent, moved, std::move(path)});
        order_.push_back(s);
    }

    [[nodiscard]] const TreeNode& node(MonoState s) const { return nodes_.at(s); }
    /// Non-root states in insertion order (parents precede children).
    [[nodiscard]] const std::vector<MonoState>& states() const noexcept { return order_; }

    /// Objects moved on the way root -> s.
    [[nodiscard]] std::vector<ObjectId> trace(MonoState s) const {
        std::vector<ObjectId> out;
        while (s != root_) {
            const auto& n = nodes_.at(s);
            out.push_back(n.moved);
            s = n.parent;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] std::vector<ManipPath> trace_paths(MonoState s) const {
        std::vector<ManipPath> out;
        while (s != root_) {
            const auto& n = nodes_.at(s);
            out.push_back(n.path);
            s = n.parent;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

private:
    MonoState root_;
    std::unordered_map<MonoState, TreeNode> nodes_;
    std::vector<MonoState> order_;
};

enum class Outcome { solved, exhausted, timed_out };

inline std::string to_string(Outcome o) {
    switch (o) {
    case Outcome::solved: return "solved";
    case Outcome::exhausted: return "exhausted";
    case Outcome::timed_out: return "timed_out";
    }
    return "unknown";
}

struct SolveStats {
    std::size_t expansions{0}; ///< search nodes entered (prefixes for mrs, states otherwise)
    std::size_t mp_calls{0};   ///< distinct motion-planning calls
    std::size_t queries{0};    ///< oracle queries including memo hits
    std::size_t pruned{0};     ///< moves skipped by the ledger
};

struct SolveResult {
    Outcome outcome{Outcome::exhausted};
    std::vector<ObjectId> order;
    std::vector<ManipPath> paths;
    SearchTree tree;
    SolveStats stats;
    std::size_t ledger_size{0};

    [[nodiscard]] bool solved() const noexcept { return outcome == Outcome::solved; }
};

namespace detail {

inline SolveResult finish(SearchTree tree, MonoState goal, bool found, bool timed_out, SolveStats stats) {
    SolveResult r;
    r.stats = stats;
    if (found) {
        r.outcome = Outcome::solved;
        r.order = tree.trace(goal);
        r.paths = tree.trace_paths(goal);
    } else {
        r.outcome = timed_out ? Outcome::timed_out : Outcome::exhausted;
    }
    r.tree = std::move(tree);
    return r;
}

class SubsetSearch {
public:
    SubsetSearch(MoveOracle& oracle, const InvalidityLedger* ledger, Deadline deadline)
        : n_(oracle.num_objects()), full_(full_mask(n_)), memo_(oracle), ledger_(ledger), deadline_(deadline),
          tree_(oracle.root()) {}

    SolveResult run() {
        const MonoState root = tree_.root();
        const bool found = root == full_ || expand(root);
        stats_.mp_calls = memo_.calls();
        stats_.queries = memo_.queries();
        return finish(std::move(tree_), full_, found, timed_out_, stats_);
    }

private:
    bool expand(MonoState s) {
        if (deadline_.expired()) {
            timed_out_ = true;
            return false;
        }
        ++stats_.expansions;
        for (ObjectId o = 0; o < n_; ++o) {
            if (s & bit(o)) continue;
            if (ledger_ && ledger_->is_invalid(o, s)) {
                ++stats_.pruned;
                continue;
            }
            const MonoState next = s | bit(o);
            if (tree_.contains(next)) continue;
            const auto& path = memo_(s, o);
            if (!path) continue;
            tree_.add(next, s, o, *path);
            if (next == full_) return true;
            if (expand(next)) return true;
            if (timed_out_) return false;
        }
        return false;
    }

    std::size_t n_;
    MonoState full_;
    MemoOracle memo_;
    const InvalidityLedger* ledger_;
    Deadline deadline_;
    SearchTree tree_;
    SolveStats stats_;
    bool timed_out_{false};
};

} // namespace detail

inline SolveResult dfs_dp(MoveOracle& oracle, Deadline deadline = Deadline::never()) {
    return detail::SubsetSearch(oracle, nullptr, deadline).run();
}

inline SolveResult cidfs_dp(MoveOracle& oracle, const InvalidityLedger& ledger, Deadline deadline = Deadline::never()) {
    auto r = detail::SubsetSearch(oracle, &ledger, deadline).run();
    r.ledger_size = ledger.size();
    return r;
}

/// Backtracking over orderings. The tree records the first route to each reached state for partial solutions.
inline SolveResult mrs(MoveOracle& oracle, Deadline deadline = Deadline::never()) {
    const std::size_t n = oracle.num_objects();
    const MonoState full = full_mask(n);
    MemoOracle memo(oracle);
    SearchTree tree(oracle.root());
    SolveStats stats;
    bool timed_out = false;
    std::vector<ObjectId> prefix;
    std::vector<ManipPath> prefix_paths;

    std::function<bool(MonoState)> visit = [&](MonoState s) -> bool {
        if (deadline.expired()) {
            timed_out = true;
            return false;
        }
        ++stats.expansions;
        if (s == full) return true;
        for (ObjectId o = 0; o < n; ++o) {
            if (s & bit(o)) continue;
            const auto& path = memo(s, o);
            if (!path) continue;
            prefix.push_back(o);
            prefix_paths.push_back(*path);
            tree.add(s | bit(o), s, o, *path);
            if (visit(s | bit(o))) return true;
            prefix.pop_back();
            prefix_paths.pop_back();
            if (timed_out) return false;
        }
        return false;
    };

    const bool found = visit(tree.root());
    stats.mp_calls = memo.calls();
    stats.queries = memo.queries();
    SolveResult r;
    r.stats = stats;
    r.outcome = found ? Outcome::solved : (timed_out ? Outcome::timed_out : Outcome::exhausted);
    if (found) {
        r.order = prefix;
        r.paths = prefix_paths;
    }
    r.tree = std::move(tree);
    return r;
}

class InstanceInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Constraint-informed search: ledger for root -> goal, then cidfs_dp over the roadmap oracle.
inline SolveResult cirs(const Instance& inst, const LabeledRoadmap& rm, const Arrangement& root,
                        Deadline deadline = Deadline::never(), const ConstraintOptions& opts = {},
                        EdgeCheck check = EdgeCheck::labels) {
    InvalidityLedger ledger;
    try {
        ledger = detect_invalidity(inst, rm, root, opts);
    } catch (const EmptyGraspSet& e) {
        throw InstanceInfeasible(e.what());
    }
    GeometricOracle oracle(inst, rm, root, check);
    return cidfs_dp(oracle, ledger, deadline);
}

inline SolveResult cirs(const Instance& inst, const LabeledRoadmap& rm, Deadline deadline = Deadline::never(),
                        const ConstraintOptions& opts = {}, EdgeCheck check = EdgeCheck::labels) {
    return cirs(inst, rm, inst.start, deadline, opts, check);
}

enum class LocalSolver { cirs, dfs_dp, mrs };

inline std::string to_string(LocalSolver s) {
    switch (s) {
    case LocalSolver::cirs: return "cirs";
    case LocalSolver::dfs_dp: return "dfsdp";
    case LocalSolver::mrs: return "mrs";
    }
    return "cirs";
}

inline LocalSolver local_solver_from_string(const std::string& s) {
    if (s == "cirs") return LocalSolver::cirs;
    if (s == "dfsdp" || s == "dfs_dp") return LocalSolver::dfs_dp;
    if (s == "mrs") return LocalSolver::mrs;
    throw std::invalid_argument("unknown solver: " + s);
}

/// Runs the chosen monotone solver on root -> inst.goal. Missing grasp nodes surface as InstanceInfeasible.
inline SolveResult solve_monotone(LocalSolver kind, const Instance& inst, const LabeledRoadmap& rm, const Arrangement& root,
                                  Deadline deadline, const ConstraintOptions& opts = {}, EdgeCheck check = EdgeCheck::labels) {
    try {
        if (kind == LocalSolver::cirs) return cirs(inst, rm, root, deadline, opts, check);
        GeometricOracle oracle(inst, rm, root, check);
        return kind == LocalSolver::mrs ? mrs(oracle, deadline) : dfs_dp(oracle, deadline);
    } catch (const NoGraspNode& e) {
        throw InstanceInfeasible(e.what());
    }
}

} // namespace rearrange
