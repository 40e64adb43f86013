#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "preskit/errors.hpp"
#include "preskit/eval.hpp"
#include "preskit/preserve.hpp"
#include "preskit/structure.hpp"

namespace preskit {

/// A finite structure whose signature is a single binary relation. The
/// undirected flag asserts symmetry of the relation.
struct Graph {
    FiniteStructure structure;
    std::string relation;
    bool directed = false;

    static Graph from_structure(FiniteStructure s, std::optional<bool> directed = {}) {
        s.validate();
        if (!s.signature.functions.empty())
            throw ValidationError("a graph structure must not declare function symbols");
        if (s.signature.relations.size() != 1)
            throw ValidationError("a graph structure must declare exactly one relation");
        Graph g;
        g.relation = s.signature.relations.begin()->first;
        if (s.signature.relations.begin()->second != 2)
            throw ValidationError("relation '" + g.relation + "' must be binary");
        bool symmetric = true;
        for (const auto& t : s.relation_sets.at(g.relation))
            if (!s.relation_sets.at(g.relation).count(Tuple{t[1], t[0]})) {
                symmetric = false;
                break;
            }
        g.directed = directed.value_or(!symmetric);
        if (!g.directed && !symmetric)
            throw ValidationError("undirected graph requires a symmetric relation");
        g.structure = std::move(s);
        return g;
    }

    /// An undirected graph from unordered edges over {0..n-1}.
    static Graph undirected(int n, const std::vector<std::pair<int, int>>& edges,
                            const std::string& rel = "R") {
        FiniteStructure s;
        s.size = n;
        s.signature.relations[rel] = 2;
        TupleSet ts;
        for (auto [a, b] : edges) {
            ts.insert(Tuple{a, b});
            ts.insert(Tuple{b, a});
        }
        s.relation_sets[rel] = std::move(ts);
        return from_structure(std::move(s), false);
    }

    int size() const { return structure.size; }

    bool edge(int a, int b) const { return structure.rel_contains(relation, Tuple{a, b}); }

    bool has_loop() const {
        for (int v = 0; v < size(); ++v)
            if (edge(v, v)) return true;
        return false;
    }

    /// Symmetrized neighbor lists (arcs read in both directions).
    std::vector<std::vector<int>> sym_adjacency() const {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(size()));
        for (const auto& t : structure.relation_sets.at(relation)) {
            adj[static_cast<std::size_t>(t[0])].push_back(t[1]);
            if (t[0] != t[1]) adj[static_cast<std::size_t>(t[1])].push_back(t[0]);
        }
        for (auto& row : adj) {
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
        }
        return adj;
    }

    /// Unordered edge list {a,b} with a <= b, symmetrized reading.
    std::vector<std::pair<int, int>> sym_edges() const {
        std::set<std::pair<int, int>> es;
        for (const auto& t : structure.relation_sets.at(relation))
            es.emplace(std::min(t[0], t[1]), std::max(t[0], t[1]));
        return {es.begin(), es.end()};
    }
};

enum class PathVariant { WalkExact, PathExact, AtMost, DistExact };

namespace detail {

inline Formula graph_step(const std::string& rel, const std::string& u, const std::string& v,
                          bool directed) {
    Formula f = Formula::atom(rel, {Term::var(u), Term::var(v)});
    if (directed) return f;
    return Formula::disjunction(std::move(f), Formula::atom(rel, {Term::var(v), Term::var(u)}));
}

/// Exact-length chain from x to y; distinctness constraints, when asked
/// for, sit at their quantifier level so evaluation prunes early.
inline Formula chain_formula(const std::string& rel, int length, bool directed, bool distinct) {
    std::vector<std::string> points;
    points.push_back("x");
    for (int i = 1; i < length; ++i) points.push_back("z" + std::to_string(i));
    points.push_back("y");

    Formula body = graph_step(rel, points[static_cast<std::size_t>(length - 1)], "y", directed);
    for (int i = length - 1; i >= 1; --i) {
        std::vector<Formula> level;
        if (distinct) {
            for (int j = 0; j < i; ++j)
                level.push_back(Formula::negation(
                    Formula::equal(Term::var(points[static_cast<std::size_t>(i)]),
                                   Term::var(points[static_cast<std::size_t>(j)]))));
            level.push_back(Formula::negation(
                Formula::equal(Term::var(points[static_cast<std::size_t>(i)]), Term::var("y"))));
        }
        level.push_back(graph_step(rel, points[static_cast<std::size_t>(i - 1)],
                                   points[static_cast<std::size_t>(i)], directed));
        level.push_back(std::move(body));
        body = Formula::exists(points[static_cast<std::size_t>(i)], Formula::conjoin(level));
    }
    if (distinct)
        body = Formula::conjunction(
            Formula::negation(Formula::equal(Term::var("x"), Term::var("y"))), std::move(body));
    return body;
}

inline Formula swap_xy(const Formula& f) {
    return f.rename_free({{"x", "y"}, {"y", "x"}});
}

} // namespace detail

/// Path/walk/distance formulas in free variables x, y over the graph's
/// relation. walkExact is the plain existential chain (steps symmetrized
/// unless the graph is directed); pathExact adds pairwise distinctness;
/// atMost disjoins walkExact for lengths 1..n; distExact is
/// atMost(n) & !atMost(n-1) with atMost(0) := x = y.
inline Formula path_formula(const Graph& g, int n, PathVariant variant, int max_length = 32) {
    if (n < 1) throw ValidationError("path formula length must be >= 1");
    if (n > max_length)
        throw ValidationError("path formula length " + std::to_string(n) +
                              " exceeds the configured bound " + std::to_string(max_length));
    switch (variant) {
        case PathVariant::WalkExact:
            return detail::chain_formula(g.relation, n, g.directed, false);
        case PathVariant::PathExact:
            return detail::chain_formula(g.relation, n, g.directed, true);
        case PathVariant::AtMost: {
            std::vector<Formula> parts;
            for (int m = 1; m <= n; ++m)
                parts.push_back(detail::chain_formula(g.relation, m, g.directed, false));
            return Formula::disjoin(parts);
        }
        case PathVariant::DistExact: {
            // atMost(0) := x = y; the cumulative lower level always carries
            // it, so bounce walks back to x never count as a distance.
            Formula reach_n = path_formula(g, n, PathVariant::AtMost, max_length);
            Formula reach_less = Formula::equal(Term::var("x"), Term::var("y"));
            if (n > 1)
                reach_less = Formula::disjunction(
                    std::move(reach_less), path_formula(g, n - 1, PathVariant::AtMost, max_length));
            return Formula::conjunction(std::move(reach_n),
                                        Formula::negation(std::move(reach_less)));
        }
    }
    throw InternalError("unreachable path variant");
}

/// A binary graph formula as a type with one single-variable parameter
/// block x and result block y.
inline BlockType edge_type(const Graph& g, Formula f) {
    (void)g;
    return BlockType{{{"x"}}, {"y"}, {std::move(f)}};
}

/// True iff every block is independent: R(x,y) is totally
/// (P_i, complement(P_i))-preserving for each block.
inline bool check_partition(const Graph& g, const NamedPartition& partition,
                            const EvalOptions& opts = {}) {
    partition.validate(g.size());
    Formula r = Formula::atom(g.relation, {Term::var("x"), Term::var("y")});
    for (const auto& block : partition.blocks)
        if (!check_preservation(g.structure, edge_type(g, r), {block},
                                complement_property(g.structure, block), Mode::TotallyPreserved,
                                opts))
            return false;
    return true;
}

/// Exact backtracking search for a proper coloring with at most k colors;
/// returns the nonempty color classes. Loops make the search fail.
inline std::optional<NamedPartition> find_k_partition(const Graph& g, int k,
                                                      const EvalOptions& opts = {}) {
    if (k < 1) throw ValidationError("block count must be >= 1");
    int n = g.size();
    if (checked_pow(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(n)) >
        static_cast<std::uint64_t>(opts.budget) * 64)
        throw BudgetError("coloring search space too large");
    if (g.has_loop()) return std::nullopt;
    auto adj = g.sym_adjacency();
    std::vector<int> color(static_cast<std::size_t>(n), -1);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return adj[static_cast<std::size_t>(a)].size() > adj[static_cast<std::size_t>(b)].size();
    });
    auto rec = [&](auto&& self, int pos, int used) -> bool {
        if (pos == n) return true;
        int v = order[static_cast<std::size_t>(pos)];
        int limit = std::min(k, used + 1); // new colors introduced in order
        for (int c = 0; c < limit; ++c) {
            bool clash = false;
            for (int w : adj[static_cast<std::size_t>(v)])
                if (color[static_cast<std::size_t>(w)] == c) {
                    clash = true;
                    break;
                }
            if (clash) continue;
            color[static_cast<std::size_t>(v)] = c;
            if (self(self, pos + 1, std::max(used, c + 1))) return true;
            color[static_cast<std::size_t>(v)] = -1;
        }
        return false;
    };
    if (!rec(rec, 0, 0)) return std::nullopt;
    NamedPartition part;
    for (int c = 0; c < k; ++c) {
        Property block(1, {});
        for (int v = 0; v < n; ++v)
            if (color[static_cast<std::size_t>(v)] == c) block.tuples.insert(Tuple{v});
        if (!block.empty()) part.blocks.push_back(std::move(block));
    }
    part.validate(n);
    if (!check_partition(g, part, opts))
        throw InternalError("coloring search returned an improper partition");
    return part;
}

enum class GraphShape { Empty, Complete, Neither };

inline std::string graph_shape_name(GraphShape s) {
    switch (s) {
        case GraphShape::Empty: return "empty";
        case GraphShape::Complete: return "complete";
        case GraphShape::Neither: return "neither";
    }
    throw InternalError("unreachable graph shape");
}

/// Verdict computed three ways (edge count, (M, empty)-preservation,
/// (M, M)-disjointness, dually with the negated edge formula for
/// completeness); the routes must agree.
inline GraphShape emptiness_completeness(const Graph& g, const EvalOptions& opts = {}) {
    const auto& tuples = g.structure.relation_sets.at(g.relation);
    std::uint64_t all = static_cast<std::uint64_t>(g.size()) * static_cast<std::uint64_t>(g.size());
    bool empty_direct = tuples.empty();
    bool complete_direct = tuples.size() == all;

    Property universe = Property::full(g.size(), 1);
    Property none(1, {});
    Formula r = Formula::atom(g.relation, {Term::var("x"), Term::var("y")});
    Formula notr = Formula::negation(r);

    bool empty_pres = check_preservation(g.structure, edge_type(g, r), {universe}, none,
                                         Mode::TotallyPreserved, opts);
    bool empty_disj = check_preservation(g.structure, edge_type(g, r), {universe}, universe,
                                         Mode::TotallyDisjoint, opts);
    bool complete_pres = check_preservation(g.structure, edge_type(g, notr), {universe}, none,
                                            Mode::TotallyPreserved, opts);
    bool complete_disj = check_preservation(g.structure, edge_type(g, notr), {universe}, universe,
                                            Mode::TotallyDisjoint, opts);
    if (empty_direct != empty_pres || empty_direct != empty_disj)
        throw InternalError("emptiness routes disagree");
    if (complete_direct != complete_pres || complete_direct != complete_disj)
        throw InternalError("completeness routes disagree");
    if (empty_direct) return GraphShape::Empty;
    if (complete_direct) return GraphShape::Complete;
    return GraphShape::Neither;
}

/// Connected components of the symmetrized graph, in order of their least
/// vertices.
inline std::vector<Property> bfs_components(const Graph& g) {
    auto adj = g.sym_adjacency();
    std::vector<bool> seen(static_cast<std::size_t>(g.size()), false);
    std::vector<Property> out;
    for (int s = 0; s < g.size(); ++s) {
        if (seen[static_cast<std::size_t>(s)]) continue;
        Property comp(1, {});
        std::deque<int> q{s};
        seen[static_cast<std::size_t>(s)] = true;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            comp.tuples.insert(Tuple{v});
            for (int w : adj[static_cast<std::size_t>(v)])
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    q.push_back(w);
                }
        }
        out.push_back(std::move(comp));
    }
    return out;
}

struct ComponentVerdict {
    bool is_union_of_components = false;
    bool via_preservation = false;
};

/// Union-of-components oracle against total preservation under the
/// symmetrized edge formula. The levelled reachability clauses
/// (lengths 1, 2 and |M|) are cross-checked where the budget allows.
inline ComponentVerdict component_analysis(const Graph& g, const Property& p,
                                           const EvalOptions& opts = {}) {
    if (p.arity != 1) throw ValidationError("component analysis expects an arity-1 property");
    if (p.empty()) throw ValidationError("component analysis requires a nonempty property");
    p.validate(g.size());

    ComponentVerdict v;
    auto elems = p.elements();
    v.is_union_of_components = true;
    for (const auto& comp : bfs_components(g)) {
        bool some = false, every = true;
        for (const auto& t : comp.tuples) {
            if (elems.count(t[0])) some = true;
            else every = false;
        }
        if (some && !every) v.is_union_of_components = false;
    }

    Formula sym_edge = detail::graph_step(g.relation, "x", "y", false);
    v.via_preservation = check_preservation(g.structure, edge_type(g, sym_edge), {p}, p,
                                            Mode::TotallyPreserved, opts);

    Graph sym = g;
    sym.directed = false; // symmetrized reading of the reachability formulas
    for (int n : {1, 2, g.size()}) {
        std::uint64_t est =
            checked_pow(static_cast<std::uint64_t>(g.size()), static_cast<std::uint64_t>(n + 1)) *
            static_cast<std::uint64_t>(g.size());
        if (est > static_cast<std::uint64_t>(opts.budget)) continue;
        Formula psi = path_formula(sym, n, PathVariant::AtMost, std::max(32, n));
        Formula both = Formula::disjunction(psi, detail::swap_xy(psi));
        bool level = check_preservation(g.structure, edge_type(g, both), {p}, p,
                                        Mode::TotallyPreserved, opts);
        if (level != v.via_preservation)
            throw InternalError("levelled reachability clause disagrees with the edge formula");
    }
    return v;
}

/// Connected components as the minimal nonempty totally preserved sets:
/// each component is verified preserved, and the preserved closure of each
/// of its vertices recovers the whole component.
inline std::vector<Property> minimal_preserved_sets(const Graph& g, const EvalOptions& opts = {}) {
    auto comps = bfs_components(g);
    auto adj = g.sym_adjacency();
    for (const auto& comp : comps) {
        if (!component_analysis(g, comp, opts).via_preservation)
            throw InternalError("component is not preserved");
        for (const auto& t : comp.tuples) {
            std::set<int> closure{t[0]};
            std::deque<int> q{t[0]};
            while (!q.empty()) {
                int v = q.front();
                q.pop_front();
                for (int w : adj[static_cast<std::size_t>(v)])
                    if (closure.insert(w).second) q.push_back(w);
            }
            if (Property::unary_from(closure) != comp)
                throw InternalError("preserved closure of a vertex missed its component");
        }
    }
    return comps;
}

struct Subdivision {
    Graph graph;
    std::vector<Property> layers; // [originals, distance-1 intermediates, ...]
    std::map<std::pair<int, int>, std::vector<int>> edge_paths; // original edge -> fresh vertices
};

/// Replaces every edge {a,b} by a fresh path of the given length; the
/// original edges disappear. Layer d collects the intermediates at distance
/// d from their nearer original endpoint; every layer is verified totally
/// preserved under the exact-length path formula on the new graph.
inline Subdivision subdivide(const Graph& g, int length, const EvalOptions& opts = {}) {
    if (g.directed) throw ValidationError("subdivision expects an undirected graph");
    if (g.has_loop()) throw ValidationError("subdivision expects a loopless graph");
    if (length < 2) throw ValidationError("subdivision length must be >= 2");

    auto edges = g.sym_edges();
    int n = g.size();
    int total = n + static_cast<int>(edges.size()) * (length - 1);

    FiniteStructure s;
    s.size = total;
    s.signature.relations[g.relation] = 2;
    TupleSet ts;
    auto connect = [&](int a, int b) {
        ts.insert(Tuple{a, b});
        ts.insert(Tuple{b, a});
    };
    Subdivision out;
    int next = n;
    for (auto [a, b] : edges) {
        std::vector<int> path;
        int prev = a;
        for (int j = 0; j < length - 1; ++j) {
            connect(prev, next);
            path.push_back(next);
            prev = next++;
        }
        connect(prev, b);
        out.edge_paths[{a, b}] = std::move(path);
    }
    s.relation_sets[g.relation] = std::move(ts);
    out.graph = Graph::from_structure(std::move(s), false);

    out.layers.assign(static_cast<std::size_t>(length), Property(1, {}));
    for (int v = 0; v < n; ++v) out.layers[0].tuples.insert(Tuple{v});
    for (const auto& [edge, path] : out.edge_paths)
        for (std::size_t j = 0; j < path.size(); ++j) {
            int d = std::min(static_cast<int>(j) + 1, length - static_cast<int>(j) - 1);
            out.layers[static_cast<std::size_t>(d)].tuples.insert(Tuple{path[j]});
        }

    Formula exact = path_formula(out.graph, length, PathVariant::PathExact, std::max(32, length));
    for (const auto& layer : out.layers) {
        if (layer.empty()) continue;
        if (!check_preservation(out.graph.structure, edge_type(out.graph, exact), {layer}, layer,
                                Mode::TotallyPreserved, opts))
            throw InternalError("subdivision layer is not preserved under the path formula");
    }
    return out;
}

/// Iterated closure of each seed under the solution sets of the
/// exact-length path formula, to the fixpoint. On a subdivided graph with
/// matching length this recovers the seed's original component.
inline std::vector<Property> reconstruct_components(const Graph& gprime,
                                                    const std::vector<int>& seeds, int length,
                                                    const EvalOptions& opts = {}) {
    Formula exact = path_formula(gprime, length, PathVariant::PathExact, std::max(32, length));
    BlockType type = edge_type(gprime, exact);
    std::vector<Property> out;
    for (int seed : seeds) {
        if (seed < 0 || seed >= gprime.size())
            throw ValidationError("seed outside the universe");
        std::set<int> closure{seed};
        std::deque<int> frontier{seed};
        while (!frontier.empty()) {
            int v = frontier.front();
            frontier.pop_front();
            Property sol = solution_set(gprime.structure, type, {Tuple{v}}, opts);
            for (const auto& t : sol.tuples)
                if (closure.insert(t[0]).second) frontier.push_back(t[0]);
        }
        out.push_back(Property::unary_from(closure));
    }
    return out;
}

/// All-pairs BFS distances over the symmetrized graph; -1 when unreachable.
inline std::vector<std::vector<int>> bfs_distances(const Graph& g) {
    auto adj = g.sym_adjacency();
    std::vector<std::vector<int>> dist(
        static_cast<std::size_t>(g.size()),
        std::vector<int>(static_cast<std::size_t>(g.size()), -1));
    for (int s = 0; s < g.size(); ++s) {
        auto& row = dist[static_cast<std::size_t>(s)];
        row[static_cast<std::size_t>(s)] = 0;
        std::deque<int> q{s};
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int w : adj[static_cast<std::size_t>(v)])
                if (row[static_cast<std::size_t>(w)] == -1) {
                    row[static_cast<std::size_t>(w)] = row[static_cast<std::size_t>(v)] + 1;
                    q.push_back(w);
                }
        }
    }
    return dist;
}

/// Vertices reached from a by a walk of exactly n symmetrized steps.
inline Property neighbourhood(const Graph& g, int a, int n) {
    if (a < 0 || a >= g.size()) throw ValidationError("vertex outside the universe");
    if (n < 1) throw ValidationError("neighbourhood length must be >= 1");
    auto adj = g.sym_adjacency();
    std::set<int> cur{a};
    for (int step = 0; step < n; ++step) {
        std::set<int> nxt;
        for (int v : cur)
            for (int w : adj[static_cast<std::size_t>(v)]) nxt.insert(w);
        cur = std::move(nxt);
    }
    return Property::unary_from(cur);
}

struct DistanceWitnessReport {
    std::map<int, std::optional<int>> witnesses; // n -> vertex a, when any
    int diameter = 0;
};

/// For each n up to |M|, a vertex with some vertex at distance exactly n,
/// found through exact-length walk reachability (the solution sets of the
/// distance formulas); the largest witnessed n is the diameter. On small
/// graphs each level verdict is re-verified against the distance formula
/// through the preservation engine.
inline DistanceWitnessReport distance_witnesses(const Graph& g, const EvalOptions& opts = {}) {
    if (g.directed) throw ValidationError("distance witnesses expect an undirected graph");
    if (bfs_components(g).size() != 1)
        throw ValidationError("distance witnesses expect a connected graph");

    // at-most-n reachability from exact-length walk sets; a walk of the
    // exact shorter length exists whenever the distance allows it.
    auto adj = g.sym_adjacency();
    std::vector<std::set<int>> reach_cum(static_cast<std::size_t>(g.size()));
    DistanceWitnessReport rep;
    std::vector<std::set<int>> frontier(static_cast<std::size_t>(g.size()));
    for (int v = 0; v < g.size(); ++v) frontier[static_cast<std::size_t>(v)] = {v};
    for (int n = 1; n <= g.size(); ++n) {
        std::optional<int> witness;
        for (int a = 0; a < g.size(); ++a) {
            std::set<int> nxt;
            for (int v : frontier[static_cast<std::size_t>(a)])
                for (int w : adj[static_cast<std::size_t>(v)]) nxt.insert(w);
            frontier[static_cast<std::size_t>(a)] = nxt;
            auto& cum = reach_cum[static_cast<std::size_t>(a)];
            bool fresh = false;
            for (int w : nxt)
                if (w != a && cum.insert(w).second) fresh = true;
            if (fresh && !witness) witness = a;
        }
        rep.witnesses[n] = witness;
        if (witness) rep.diameter = n;
    }

    // Formula-route verification where the estimate fits the budget.
    for (int n = 1; n <= g.size(); ++n) {
        std::uint64_t est =
            checked_pow(static_cast<std::uint64_t>(g.size()), static_cast<std::uint64_t>(n + 1)) *
            static_cast<std::uint64_t>(g.size());
        if (est > static_cast<std::uint64_t>(opts.budget) / 16) break;
        Formula dn = path_formula(g, n, PathVariant::DistExact, std::max(32, n));
        BlockType type = edge_type(g, dn);
        Property universe = Property::full(g.size(), 1);
        std::optional<int> formula_witness;
        for (int a = 0; a < g.size(); ++a) {
            if (check_preservation(g.structure, type, {Property::unary({a})}, universe,
                                   Mode::ExistsPartiallyPreserved, opts)) {
                formula_witness = a;
                break;
            }
        }
        if (formula_witness.has_value() != rep.witnesses[n].has_value())
            throw InternalError("distance witness routes disagree at level " + std::to_string(n));
    }
    return rep;
}

/// Tarjan strongly connected components, for comparison against the
/// conjunctive mutual-reachability formulas (which need not capture them).
inline std::vector<Property> strong_components(const Graph& g) {
    int n = g.size();
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& t : g.structure.relation_sets.at(g.relation))
        adj[static_cast<std::size_t>(t[0])].push_back(t[1]);
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    std::vector<Property> out;
    int counter = 0;
    auto rec = [&](auto&& self, int v) -> void {
        index[static_cast<std::size_t>(v)] = low[static_cast<std::size_t>(v)] = counter++;
        stack.push_back(v);
        on_stack[static_cast<std::size_t>(v)] = true;
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (index[static_cast<std::size_t>(w)] == -1) {
                self(self, w);
                low[static_cast<std::size_t>(v)] =
                    std::min(low[static_cast<std::size_t>(v)], low[static_cast<std::size_t>(w)]);
            } else if (on_stack[static_cast<std::size_t>(w)]) {
                low[static_cast<std::size_t>(v)] =
                    std::min(low[static_cast<std::size_t>(v)], index[static_cast<std::size_t>(w)]);
            }
        }
        if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
            Property comp(1, {});
            while (true) {
                int w = stack.back();
                stack.pop_back();
                on_stack[static_cast<std::size_t>(w)] = false;
                comp.tuples.insert(Tuple{w});
                if (w == v) break;
            }
            out.push_back(std::move(comp));
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[static_cast<std::size_t>(v)] == -1) rec(rec, v);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace preskit
