#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "preskit/errors.hpp"
#include "preskit/eval.hpp"
#include "preskit/preserve.hpp"
#include "preskit/structure.hpp"

namespace preskit {

/// Reflexive, symmetric, transitive arity-2 property over a fixed universe;
/// the closure properties are checked on construction.
struct EquivalenceRelation {
    int universe = 0;
    Property pairs{2, {}};

    static EquivalenceRelation from_property(int universe, Property p) {
        if (p.arity != 2) throw ValidationError("equivalence relation must have arity 2");
        p.validate(universe);
        for (int v = 0; v < universe; ++v)
            if (!p.contains(Tuple{v, v}))
                throw ValidationError("equivalence relation not reflexive at " + std::to_string(v));
        for (const auto& t : p.tuples) {
            if (!p.contains(Tuple{t[1], t[0]}))
                throw ValidationError("equivalence relation not symmetric at (" +
                                      std::to_string(t[0]) + "," + std::to_string(t[1]) + ")");
            for (const auto& u : p.tuples)
                if (u[0] == t[1] && !p.contains(Tuple{t[0], u[1]}))
                    throw ValidationError("equivalence relation not transitive through " +
                                          std::to_string(t[1]));
        }
        return EquivalenceRelation{universe, std::move(p)};
    }

    static EquivalenceRelation from_blocks(int universe, const std::vector<std::set<int>>& blocks) {
        Property p(2, {});
        for (const auto& b : blocks)
            for (int x : b)
                for (int y : b) p.tuples.insert(Tuple{x, y});
        return from_property(universe, std::move(p));
    }

    static EquivalenceRelation from_class_map(const std::vector<int>& class_of) {
        Property p(2, {});
        int n = static_cast<int>(class_of.size());
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                if (class_of[static_cast<std::size_t>(x)] == class_of[static_cast<std::size_t>(y)])
                    p.tuples.insert(Tuple{x, y});
        return from_property(n, std::move(p));
    }

    bool related(int a, int b) const { return pairs.contains(Tuple{a, b}); }

    /// Canonical class map: each element mapped to the least member of its
    /// class.
    std::vector<int> class_map() const {
        std::vector<int> out(static_cast<std::size_t>(universe));
        for (int v = 0; v < universe; ++v) {
            int least = v;
            for (int w = 0; w < v; ++w)
                if (related(v, w)) {
                    least = out[static_cast<std::size_t>(w)];
                    break;
                }
            out[static_cast<std::size_t>(v)] = least;
        }
        return out;
    }

    std::vector<std::set<int>> blocks() const {
        std::map<int, std::set<int>> by_rep;
        auto cm = class_map();
        for (int v = 0; v < universe; ++v) by_rep[cm[static_cast<std::size_t>(v)]].insert(v);
        std::vector<std::set<int>> out;
        for (auto& [rep, blk] : by_rep) out.push_back(std::move(blk));
        return out;
    }

    auto operator<=>(const EquivalenceRelation&) const = default;
};

namespace detail {

inline std::vector<std::string> fresh_vars(const Signature& sig, const std::string& base, int count) {
    std::vector<std::string> out;
    std::string suffix;
    while (true) {
        bool clash = false;
        for (int i = 1; i <= count; ++i) {
            std::string v = base + std::to_string(i) + suffix;
            if (sig.has_function(v) || sig.has_relation(v)) {
                clash = true;
                break;
            }
        }
        if (!clash) break;
        suffix += "_";
    }
    for (int i = 1; i <= count; ++i) out.push_back(base + std::to_string(i) + suffix);
    return out;
}

inline std::string fresh_var(const Signature& sig, const std::string& base) {
    std::string v = base;
    while (sig.has_function(v) || sig.has_relation(v)) v += "_";
    return v;
}

} // namespace detail

/// The atomic graph formula f(x1..xk) = y as a type with k single-variable
/// parameter blocks.
inline BlockType function_graph_type(const Signature& sig, const std::string& fn) {
    int arity = sig.function_arity(fn);
    auto xs = detail::fresh_vars(sig, "x", arity);
    std::string y = detail::fresh_var(sig, "y");
    std::vector<Term> args;
    std::vector<std::vector<std::string>> blocks;
    for (const auto& x : xs) {
        args.push_back(Term::var(x));
        blocks.push_back({x});
    }
    return BlockType{blocks, {y}, {Formula::equal(Term::app(fn, std::move(args)), Term::var(y))}};
}

struct SubuniverseVerdict {
    bool via_preservation = false;
    bool via_closure = false;
};

/// P is a subuniverse iff every function-graph formula is totally
/// (P,..,P,P)-preserving; the direct closure scan must agree. Constants
/// (arity-0 functions) must lie in P.
inline SubuniverseVerdict is_subuniverse(const FiniteStructure& m, const Property& p,
                                         const EvalOptions& opts = {}) {
    if (p.arity != 1) throw ValidationError("subuniverse test expects an arity-1 property");
    if (p.empty()) throw ValidationError("subuniverse test requires a nonempty property");
    p.validate(m.size);

    SubuniverseVerdict v;
    v.via_closure = true;
    auto elems = p.elements();
    for (const auto& [name, arity] : m.signature.functions) {
        bool closed = true;
        for_each_tuple(m.size, arity, [&](const Tuple& args) {
            if (!closed) return;
            for (int a : args)
                if (!elems.count(a)) return;
            if (!elems.count(m.fn_value(name, args))) closed = false;
        });
        if (!closed) {
            v.via_closure = false;
            break;
        }
    }

    v.via_preservation = true;
    for (const auto& [name, arity] : m.signature.functions) {
        BlockType type = function_graph_type(m.signature, name);
        std::vector<Property> ps(static_cast<std::size_t>(arity), p);
        if (arity == 0) ps = {Property(0, {Tuple{}})};
        if (!check_preservation(m, type, ps, p, Mode::TotallyPreserved, opts)) {
            v.via_preservation = false;
            break;
        }
    }
    return v;
}

struct CongruenceVerdict {
    bool via_preservation = false;
    bool via_compatibility = false;
};

/// E is a congruence iff for every function symbol the paired formula
/// E(y1,y2) & f(x11..x1k) = y1 & f(x21..x2k) = y2 is totally
/// (E,..,E,E)-preserving with blocks of argument pairs; the direct
/// compatibility scan must agree.
inline CongruenceVerdict is_congruence(const FiniteStructure& m, const EquivalenceRelation& e,
                                       const EvalOptions& opts = {}) {
    if (e.universe != m.size)
        throw ValidationError("equivalence relation universe does not match the structure");

    CongruenceVerdict v;
    v.via_compatibility = true;
    std::vector<Tuple> epairs(e.pairs.tuples.begin(), e.pairs.tuples.end());
    for (const auto& [name, arity] : m.signature.functions) {
        bool compatible = true;
        std::vector<std::size_t> idx(static_cast<std::size_t>(arity), 0);
        while (compatible) {
            Tuple left, right;
            for (int i = 0; i < arity; ++i) {
                left.push_back(epairs[idx[static_cast<std::size_t>(i)]][0]);
                right.push_back(epairs[idx[static_cast<std::size_t>(i)]][1]);
            }
            if (!e.related(m.fn_value(name, left), m.fn_value(name, right))) compatible = false;
            int i = arity - 1;
            while (i >= 0) {
                if (++idx[static_cast<std::size_t>(i)] < epairs.size()) break;
                idx[static_cast<std::size_t>(i)] = 0;
                --i;
            }
            if (i < 0) break;
        }
        if (!compatible) {
            v.via_compatibility = false;
            break;
        }
    }

    v.via_preservation = true;
    const std::string erel = "E";
    for (const auto& [name, arity] : m.signature.functions) {
        // Expanded structure carrying E as a relation so the formula can
        // name it.
        FiniteStructure em = m;
        std::string esym = detail::fresh_var(m.signature, erel);
        em.signature.relations[esym] = 2;
        em.relation_sets[esym] = e.pairs.tuples;

        auto x1s = detail::fresh_vars(em.signature, "a", arity);
        auto x2s = detail::fresh_vars(em.signature, "b", arity);
        auto ys = detail::fresh_vars(em.signature, "c", 2);
        std::vector<Term> args1, args2;
        std::vector<std::vector<std::string>> blocks;
        for (int i = 0; i < arity; ++i) {
            args1.push_back(Term::var(x1s[static_cast<std::size_t>(i)]));
            args2.push_back(Term::var(x2s[static_cast<std::size_t>(i)]));
            blocks.push_back({x1s[static_cast<std::size_t>(i)], x2s[static_cast<std::size_t>(i)]});
        }
        Formula body = Formula::conjoin(
            {Formula::atom(esym, {Term::var(ys[0]), Term::var(ys[1])}),
             Formula::equal(Term::app(name, std::move(args1)), Term::var(ys[0])),
             Formula::equal(Term::app(name, std::move(args2)), Term::var(ys[1]))});
        BlockType type{blocks, {ys[0], ys[1]}, {body}};
        std::vector<Property> ps(static_cast<std::size_t>(arity), e.pairs);
        if (arity == 0) ps = {Property(0, {Tuple{}})};
        if (!check_preservation(em, type, ps, e.pairs, Mode::TotallyPreserved, opts)) {
            v.via_preservation = false;
            break;
        }
    }
    return v;
}

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);
        parent[static_cast<std::size_t>(b)] = a;
        return true;
    }
    std::vector<int> canonical() {
        std::vector<int> out(parent.size());
        for (int v = 0; v < static_cast<int>(parent.size()); ++v)
            out[static_cast<std::size_t>(v)] = find(v);
        return out;
    }
};

/// Smallest congruence containing the given pairs: union-find closed under
/// every operation table.
inline std::vector<int> congruence_closure(const FiniteStructure& m,
                                           const std::vector<std::pair<int, int>>& seed) {
    UnionFind uf(m.size);
    for (auto [a, b] : seed) uf.unite(a, b);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [name, arity] : m.signature.functions) {
            if (arity == 0) continue;
            for_each_tuple(m.size, arity, [&](const Tuple& left) {
                for_each_tuple(m.size, arity, [&](const Tuple& right) {
                    bool congruent = true;
                    for (int i = 0; i < arity; ++i)
                        if (uf.find(left[static_cast<std::size_t>(i)]) !=
                            uf.find(right[static_cast<std::size_t>(i)])) {
                            congruent = false;
                            break;
                        }
                    if (congruent && uf.unite(m.fn_value(name, left), m.fn_value(name, right)))
                        changed = true;
                });
            });
        }
    }
    return uf.canonical();
}

} // namespace detail

/// All congruences: principal congruences of the generating pairs, closed
/// under joins. Includes the identity and the full relation.
inline std::vector<EquivalenceRelation> enumerate_congruences(const FiniteStructure& m,
                                                              const EvalOptions& opts = {}) {
    if (m.signature.functions.empty())
        throw ValidationError("congruence enumeration requires at least one function symbol");
    int max_arity = 0;
    for (const auto& [name, arity] : m.signature.functions) max_arity = std::max(max_arity, arity);
    std::uint64_t scan = checked_pow(static_cast<std::uint64_t>(m.size),
                                     static_cast<std::uint64_t>(2 * std::max(max_arity, 1)));
    if (scan > static_cast<std::uint64_t>(opts.budget))
        throw BudgetError("congruence closure scan too large");

    std::set<std::vector<int>> found;
    detail::UnionFind identity(m.size);
    found.insert(identity.canonical());
    for (int a = 0; a < m.size; ++a)
        for (int b = a + 1; b < m.size; ++b)
            found.insert(detail::congruence_closure(m, {{a, b}}));

    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::vector<int>> snapshot(found.begin(), found.end());
        for (std::size_t i = 0; i < snapshot.size() && !grew; ++i)
            for (std::size_t j = i + 1; j < snapshot.size() && !grew; ++j) {
                std::vector<std::pair<int, int>> seed;
                for (int v = 0; v < m.size; ++v) {
                    seed.emplace_back(v, snapshot[i][static_cast<std::size_t>(v)]);
                    seed.emplace_back(v, snapshot[j][static_cast<std::size_t>(v)]);
                }
                auto join = detail::congruence_closure(m, seed);
                if (found.insert(join).second) grew = true;
            }
        if (found.size() > 10000) throw BudgetError("congruence lattice too large");
    }

    std::vector<EquivalenceRelation> out;
    for (const auto& cm : found) out.push_back(EquivalenceRelation::from_class_map(cm));
    std::sort(out.begin(), out.end());
    return out;
}

struct GradedVerdict {
    bool ok = false;
    std::map<Tuple, int> grade_map; // block index tuple -> target block index
};

/// Checks that the partition grades the operation: the image of every
/// block tuple lies inside a single block. When it does, the function-graph
/// formula is re-verified totally preserving for each graded triple.
inline GradedVerdict check_graded_partition(const FiniteStructure& m, const std::string& op,
                                            const NamedPartition& partition,
                                            const EvalOptions& opts = {}) {
    int arity = m.signature.function_arity(op);
    if (arity < 1) throw ValidationError("graded check expects an operation of arity >= 1");
    partition.validate(m.size);

    GradedVerdict v;
    v.ok = true;
    int blocks = static_cast<int>(partition.blocks.size());
    for_each_tuple(blocks, arity, [&](const Tuple& bidx) {
        std::vector<Property> factors;
        for (int i : bidx) factors.push_back(partition.blocks[static_cast<std::size_t>(i)]);
        int target = -1;
        bool consistent = true;
        Property product = cartesian_product(factors);
        for (const auto& args : product.tuples) {
            int k = partition.block_of(m.fn_value(op, args));
            if (target == -1) target = k;
            else if (target != k) consistent = false;
        }
        if (consistent && target != -1) v.grade_map[bidx] = target;
        else v.ok = false;
    });

    if (v.ok) {
        BlockType type = function_graph_type(m.signature, op);
        for (const auto& [bidx, target] : v.grade_map) {
            std::vector<Property> ps;
            for (int i : bidx) ps.push_back(partition.blocks[static_cast<std::size_t>(i)]);
            if (!check_preservation(m, type, ps, partition.blocks[static_cast<std::size_t>(target)],
                                    Mode::TotallyPreserved, opts))
                throw InternalError("graded triple fails preservation cross-check");
        }
    }
    return v;
}

} // namespace preskit
