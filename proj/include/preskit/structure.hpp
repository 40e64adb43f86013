#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "preskit/errors.hpp"
#include "preskit/signature.hpp"

namespace preskit {

using Tuple = std::vector<int>;
using TupleSet = std::set<Tuple>;

/// n^k with saturation; used for table sizes and work estimates.
inline std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp,
                                 std::uint64_t cap = UINT64_MAX) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && r > cap / base) return cap;
        r *= base;
    }
    return r;
}

/// Rank of a tuple over {0..n-1} in lexicographic order.
inline std::uint64_t tuple_rank(const Tuple& t, int n) {
    std::uint64_t r = 0;
    for (int v : t) r = r * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(v);
    return r;
}

/// Inverse of tuple_rank.
inline Tuple tuple_unrank(std::uint64_t rank, int arity, int n) {
    Tuple t(static_cast<std::size_t>(arity), 0);
    for (int i = arity - 1; i >= 0; --i) {
        t[static_cast<std::size_t>(i)] = static_cast<int>(rank % static_cast<std::uint64_t>(n));
        rank /= static_cast<std::uint64_t>(n);
    }
    return t;
}

/// Calls fn for every tuple in {0..n-1}^arity in lexicographic order.
template <typename Fn>
void for_each_tuple(int n, int arity, Fn&& fn) {
    Tuple t(static_cast<std::size_t>(arity), 0);
    if (arity == 0) {
        fn(t);
        return;
    }
    if (n == 0) return;
    while (true) {
        fn(t);
        int i = arity - 1;
        while (i >= 0 && t[static_cast<std::size_t>(i)] == n - 1) {
            t[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
        ++t[static_cast<std::size_t>(i)];
    }
}

/// An arity-k subset of M^k. Arity-0 properties are either {()} or empty and
/// stand for the empty parameter-block list.
struct Property {
    int arity = 0;
    TupleSet tuples;

    Property() = default;
    Property(int a, TupleSet ts) : arity(a), tuples(std::move(ts)) {}

    /// Arity-1 convenience constructor.
    static Property unary(std::initializer_list<int> elems) {
        TupleSet ts;
        for (int e : elems) ts.insert(Tuple{e});
        return Property(1, std::move(ts));
    }

    static Property unary_from(const std::set<int>& elems) {
        TupleSet ts;
        for (int e : elems) ts.insert(Tuple{e});
        return Property(1, std::move(ts));
    }

    /// The full relation M^k.
    static Property full(int universe, int a) {
        TupleSet ts;
        for_each_tuple(universe, a, [&](const Tuple& t) { ts.insert(t); });
        return Property(a, std::move(ts));
    }

    bool empty() const { return tuples.empty(); }
    std::size_t size() const { return tuples.size(); }
    bool contains(const Tuple& t) const { return tuples.count(t) != 0; }

    std::set<int> elements() const {
        if (arity != 1) throw ValidationError("elements() requires an arity-1 property");
        std::set<int> out;
        for (const auto& t : tuples) out.insert(t[0]);
        return out;
    }

    void validate(int universe) const {
        for (const auto& t : tuples) {
            if (static_cast<int>(t.size()) != arity)
                throw ValidationError("property tuple has length " + std::to_string(t.size()) +
                                      ", expected arity " + std::to_string(arity));
            for (int v : t)
                if (v < 0 || v >= universe)
                    throw ValidationError("property entry " + std::to_string(v) +
                                          " outside universe {0.." + std::to_string(universe - 1) + "}");
        }
    }

    auto operator<=>(const Property&) const = default;
};

/// A finite structure: universe {0..n-1}, total function tables, relation
/// tuple sets. Constants are arity-0 functions with a one-entry table.
struct FiniteStructure {
    Signature signature;
    int size = 0;
    std::map<std::string, std::vector<int>> function_tables; // lex order of input tuples
    std::map<std::string, TupleSet> relation_sets;

    int fn_value(const std::string& name, const Tuple& args) const {
        int arity = signature.function_arity(name);
        if (static_cast<int>(args.size()) != arity)
            throw ValidationError("function '" + name + "' applied to " + std::to_string(args.size()) +
                                  " arguments, arity is " + std::to_string(arity));
        const auto& table = function_tables.at(name);
        return table[static_cast<std::size_t>(tuple_rank(args, size))];
    }

    bool rel_contains(const std::string& name, const Tuple& t) const {
        int arity = signature.relation_arity(name);
        if (static_cast<int>(t.size()) != arity)
            throw ValidationError("relation '" + name + "' applied to " + std::to_string(t.size()) +
                                  " arguments, arity is " + std::to_string(arity));
        return relation_sets.at(name).count(t) != 0;
    }

    void validate() const {
        signature.validate();
        if (size < 1) throw ValidationError("universe size must be positive");
        for (const auto& [name, arity] : signature.functions) {
            auto it = function_tables.find(name);
            if (it == function_tables.end())
                throw ValidationError("missing table for function '" + name + "'");
            std::uint64_t expect = checked_pow(static_cast<std::uint64_t>(size),
                                               static_cast<std::uint64_t>(arity));
            if (it->second.size() != expect)
                throw ValidationError("function '" + name + "' table has " +
                                      std::to_string(it->second.size()) + " entries, expected " +
                                      std::to_string(expect));
            for (int v : it->second)
                if (v < 0 || v >= size)
                    throw ValidationError("function '" + name + "' output " + std::to_string(v) +
                                          " outside universe");
        }
        for (const auto& [name, arity] : signature.relations) {
            auto it = relation_sets.find(name);
            if (it == relation_sets.end())
                throw ValidationError("missing tuple set for relation '" + name + "'");
            for (const auto& t : it->second) {
                if (static_cast<int>(t.size()) != arity)
                    throw ValidationError("relation '" + name + "' tuple has length " +
                                          std::to_string(t.size()) + ", expected " +
                                          std::to_string(arity));
                for (int v : t)
                    if (v < 0 || v >= size)
                        throw ValidationError("relation '" + name + "' entry " + std::to_string(v) +
                                              " outside universe");
            }
        }
        if (function_tables.size() != signature.functions.size())
            throw ValidationError("function table present for undeclared symbol");
        if (relation_sets.size() != signature.relations.size())
            throw ValidationError("relation set present for undeclared symbol");
    }
};

/// M^k \ P.
inline Property complement_property(const FiniteStructure& m, const Property& p) {
    p.validate(m.size);
    Property out(p.arity, {});
    for_each_tuple(m.size, p.arity, [&](const Tuple& t) {
        if (!p.contains(t)) out.tuples.insert(t);
    });
    return out;
}

/// P1 x ... x Pn as a property of arity sum(arities); the empty list of
/// factors yields the arity-0 property {()}.
inline Property cartesian_product(const std::vector<Property>& factors) {
    int arity = 0;
    for (const auto& p : factors) arity += p.arity;
    Property out(arity, {});
    std::vector<TupleSet::const_iterator> its;
    for (const auto& p : factors) {
        if (p.empty()) return out; // empty factor, empty product
        its.push_back(p.tuples.begin());
    }
    while (true) {
        Tuple t;
        t.reserve(static_cast<std::size_t>(arity));
        for (auto it : its) t.insert(t.end(), it->begin(), it->end());
        out.tuples.insert(std::move(t));
        int i = static_cast<int>(factors.size()) - 1;
        while (i >= 0) {
            auto& it = its[static_cast<std::size_t>(i)];
            if (++it != factors[static_cast<std::size_t>(i)].tuples.end()) break;
            it = factors[static_cast<std::size_t>(i)].tuples.begin();
            --i;
        }
        if (i < 0) break;
    }
    return out;
}

/// Pairwise-disjoint nonempty arity-1 blocks covering the universe.
struct NamedPartition {
    std::vector<Property> blocks;

    void validate(int universe) const {
        std::vector<bool> seen(static_cast<std::size_t>(universe), false);
        for (const auto& b : blocks) {
            if (b.arity != 1) throw ValidationError("partition block must have arity 1");
            if (b.empty()) throw ValidationError("partition block must be nonempty");
            b.validate(universe);
            for (const auto& t : b.tuples) {
                if (seen[static_cast<std::size_t>(t[0])])
                    throw ValidationError("partition blocks overlap at element " + std::to_string(t[0]));
                seen[static_cast<std::size_t>(t[0])] = true;
            }
        }
        for (int v = 0; v < universe; ++v)
            if (!seen[static_cast<std::size_t>(v)])
                throw ValidationError("partition does not cover element " + std::to_string(v));
    }

    /// Index of the block containing v, -1 if none.
    int block_of(int v) const {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            if (blocks[i].contains(Tuple{v})) return static_cast<int>(i);
        return -1;
    }
};

} // namespace preskit
