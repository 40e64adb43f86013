#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <vector>

#include "preskit/errors.hpp"
#include "preskit/eval.hpp"
#include "preskit/preserve.hpp"
#include "preskit/structure.hpp"

namespace preskit {

/// Expensive cross-checks (trace soundness re-verification and friends)
/// run only when this flag is on; test binaries enable it.
inline bool& self_check_enabled() {
    static bool flag = false;
    return flag;
}

using Permutation = std::vector<int>;

inline Tuple apply_permutation(const Permutation& g, const Tuple& t) {
    Tuple out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        out[i] = g[static_cast<std::size_t>(t[i])];
    return out;
}

/// Checks that the permutation preserves every function table, relation set
/// and constant. Positive-direction checks suffice for bijections.
inline bool is_automorphism(const FiniteStructure& m, const Permutation& g) {
    if (static_cast<int>(g.size()) != m.size) return false;
    for (const auto& [name, arity] : m.signature.functions) {
        bool ok = true;
        for_each_tuple(m.size, arity, [&](const Tuple& args) {
            if (!ok) return;
            int lhs = g[static_cast<std::size_t>(m.fn_value(name, args))];
            int rhs = m.fn_value(name, apply_permutation(g, args));
            if (lhs != rhs) ok = false;
        });
        if (!ok) return false;
    }
    for (const auto& [name, tuples] : m.relation_sets) {
        for (const auto& t : tuples)
            if (!tuples.count(apply_permutation(g, t))) return false;
    }
    return true;
}

/// Generators plus the exact order of the automorphism group, computed by a
/// stabilizer chain: level i collects coset representatives that fix 0..i-1
/// pointwise, and the order is the product of the chain orbit sizes.
struct AutomorphismGroup {
    int degree = 0;
    std::vector<Permutation> generators; // identity omitted
    std::uint64_t order = 1;
    std::vector<int> chain_orbit_sizes;
};

namespace detail {

/// Backtracking search for one automorphism extending a partial point map.
class AutoSearch {
  public:
    AutoSearch(const FiniteStructure& m, long long node_budget)
        : m_(m), n_(m.size), nodes_(node_budget) {
        build_invariants();
        for (const auto& [name, tuples] : m_.relation_sets) {
            rel_tuples_.emplace_back(name, std::vector<Tuple>(tuples.begin(), tuples.end()));
        }
        by_vertex_.assign(static_cast<std::size_t>(n_), {});
        for (std::size_t r = 0; r < rel_tuples_.size(); ++r)
            for (std::size_t ti = 0; ti < rel_tuples_[r].second.size(); ++ti)
                for (int v : rel_tuples_[r].second[ti])
                    by_vertex_[static_cast<std::size_t>(v)].emplace_back(r, ti);
    }

    /// Finds an automorphism with g(j)=j for j<fixed and g(fixed)=image.
    std::optional<Permutation> find(int fixed, int image) {
        img_.assign(static_cast<std::size_t>(n_), -1);
        pre_.assign(static_cast<std::size_t>(n_), -1);
        std::vector<int> trail;
        for (int j = 0; j < fixed; ++j)
            if (!assign(j, j, trail)) return std::nullopt;
        if (!assign(fixed, image, trail)) return std::nullopt;
        if (!search()) return std::nullopt;
        Permutation g(img_.begin(), img_.end());
        if (!is_automorphism(m_, g)) throw InternalError("automorphism search produced a non-automorphism");
        return g;
    }

  private:
    const FiniteStructure& m_;
    int n_;
    long long nodes_;
    std::vector<std::vector<int>> inv_;
    std::vector<std::pair<std::string, std::vector<Tuple>>> rel_tuples_;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> by_vertex_;
    std::vector<int> img_, pre_;

    void tick() {
        if (--nodes_ < 0) throw BudgetError("automorphism search budget exceeded");
    }

    void build_invariants() {
        inv_.assign(static_cast<std::size_t>(n_), {});
        for (int v = 0; v < n_; ++v) {
            auto& iv = inv_[static_cast<std::size_t>(v)];
            for (const auto& [name, tuples] : m_.relation_sets) {
                int arity = m_.signature.relation_arity(name);
                for (int p = 0; p < arity; ++p) {
                    int cnt = 0;
                    for (const auto& t : tuples)
                        if (t[static_cast<std::size_t>(p)] == v) ++cnt;
                    iv.push_back(cnt);
                }
                iv.push_back(tuples.count(Tuple(static_cast<std::size_t>(arity), v)) ? 1 : 0);
            }
            for (const auto& [name, arity] : m_.signature.functions) {
                const auto& table = m_.function_tables.at(name);
                int outputs = 0;
                for (int w : table)
                    if (w == v) ++outputs;
                iv.push_back(outputs);
                iv.push_back(m_.fn_value(name, Tuple(static_cast<std::size_t>(arity), v)) == v ? 1 : 0);
            }
        }
    }

    bool assign(int u, int w, std::vector<int>& trail) {
        if (img_[static_cast<std::size_t>(u)] != -1) return img_[static_cast<std::size_t>(u)] == w;
        if (pre_[static_cast<std::size_t>(w)] != -1) return false;
        if (inv_[static_cast<std::size_t>(u)] != inv_[static_cast<std::size_t>(w)]) return false;
        img_[static_cast<std::size_t>(u)] = w;
        pre_[static_cast<std::size_t>(w)] = u;
        trail.push_back(u);
        // Relation tuples through u that are now fully mapped must land in
        // the relation.
        for (auto [r, ti] : by_vertex_[static_cast<std::size_t>(u)]) {
            const Tuple& t = rel_tuples_[r].second[ti];
            Tuple mapped(t.size());
            bool complete = true;
            for (std::size_t i = 0; i < t.size(); ++i) {
                int mi = img_[static_cast<std::size_t>(t[i])];
                if (mi == -1) {
                    complete = false;
                    break;
                }
                mapped[i] = mi;
            }
            if (complete && !m_.relation_sets.at(rel_tuples_[r].first).count(mapped)) return false;
        }
        // Function congruence: fully mapped argument tuples force the image
        // of the value.
        for (const auto& [name, arity] : m_.signature.functions) {
            if (arity == 0) continue;
            bool failed = false;
            for_each_tuple(n_, arity, [&](const Tuple& args) {
                if (failed) return;
                bool involves = false, complete = true;
                Tuple mapped(args.size());
                for (std::size_t i = 0; i < args.size(); ++i) {
                    if (args[i] == u) involves = true;
                    int mi = img_[static_cast<std::size_t>(args[i])];
                    if (mi == -1) complete = false;
                    else mapped[i] = mi;
                }
                if (!involves || !complete) return;
                int src = m_.fn_value(name, args);
                int dst = m_.fn_value(name, mapped);
                if (!assign(src, dst, trail)) failed = true;
            });
            if (failed) return false;
        }
        return true;
    }

    void undo(std::vector<int>& trail, std::size_t mark) {
        while (trail.size() > mark) {
            int u = trail.back();
            trail.pop_back();
            pre_[static_cast<std::size_t>(img_[static_cast<std::size_t>(u)])] = -1;
            img_[static_cast<std::size_t>(u)] = -1;
        }
    }

    bool search() {
        tick();
        int u = -1;
        for (int v = 0; v < n_; ++v)
            if (img_[static_cast<std::size_t>(v)] == -1) {
                u = v;
                break;
            }
        if (u == -1) return true;
        std::vector<int> trail;
        for (int w = 0; w < n_; ++w) {
            if (pre_[static_cast<std::size_t>(w)] != -1) continue;
            std::size_t mark = trail.size();
            if (assign(u, w, trail) && search()) return true;
            undo(trail, mark);
        }
        return false;
    }
};

} // namespace detail

inline AutomorphismGroup automorphisms(const FiniteStructure& m, const EvalOptions& opts = {}) {
    // Constants pin elements; start the chain from the natural base.
    detail::AutoSearch search(m, opts.budget);
    AutomorphismGroup group;
    group.degree = m.size;
    for (int i = 0; i < m.size; ++i) {
        // Orbit of i under the stabilizer of 0..i-1, grown by BFS over the
        // representatives found so far at this level.
        std::vector<Permutation> level_gens;
        std::set<int> orbit{i};
        std::deque<int> frontier{i};
        auto expand = [&](const Permutation& g) {
            for (int v : std::set<int>(orbit)) {
                int w = g[static_cast<std::size_t>(v)];
                if (orbit.insert(w).second) frontier.push_back(w);
            }
        };
        for (int v = i + 1; v < m.size; ++v) {
            if (orbit.count(v)) continue;
            auto g = search.find(i, v);
            if (g) {
                group.generators.push_back(*g);
                level_gens.push_back(*g);
                expand(*g);
                while (!frontier.empty()) {
                    int x = frontier.front();
                    frontier.pop_front();
                    for (const auto& h : level_gens) {
                        int w = h[static_cast<std::size_t>(x)];
                        if (orbit.insert(w).second) frontier.push_back(w);
                    }
                }
            }
        }
        group.chain_orbit_sizes.push_back(static_cast<int>(orbit.size()));
        std::uint64_t next = group.order * static_cast<std::uint64_t>(orbit.size());
        if (orbit.size() > 1 && next / orbit.size() != group.order)
            throw BudgetError("automorphism group order exceeds the representable range");
        group.order = next;
    }
    return group;
}

/// An automorphism orbit of k-tuples, tagged with its lexicographically
/// least member as representative. In a finite structure these are exactly
/// the realization sets of complete empty-parameter types.
struct Orbit {
    int arity = 0;
    Tuple representative;
    Property members;

    auto operator<=>(const Orbit&) const = default;
};

inline Orbit orbit_of_tuple(const FiniteStructure& m, const AutomorphismGroup& group,
                            const Tuple& tuple) {
    for (int v : tuple)
        if (v < 0 || v >= m.size) throw ValidationError("tuple entry outside universe");
    Orbit o;
    o.arity = static_cast<int>(tuple.size());
    o.members.arity = o.arity;
    o.members.tuples.insert(tuple);
    std::deque<Tuple> frontier{tuple};
    while (!frontier.empty()) {
        Tuple t = frontier.front();
        frontier.pop_front();
        for (const auto& g : group.generators) {
            Tuple u = apply_permutation(g, t);
            if (o.members.tuples.insert(u).second) frontier.push_back(u);
        }
    }
    o.representative = *o.members.tuples.begin();
    return o;
}

inline Orbit orbit_of_tuple(const FiniteStructure& m, const Tuple& tuple,
                            const EvalOptions& opts = {}) {
    return orbit_of_tuple(m, automorphisms(m, opts), tuple);
}

/// All arity-k orbits in order of their representatives; they partition M^k.
inline std::vector<Orbit> all_orbits(const FiniteStructure& m, const AutomorphismGroup& group,
                                     int arity) {
    std::vector<Orbit> out;
    TupleSet seen;
    for_each_tuple(m.size, arity, [&](const Tuple& t) {
        if (seen.count(t)) return;
        Orbit o = orbit_of_tuple(m, group, t);
        seen.insert(o.members.tuples.begin(), o.members.tuples.end());
        out.push_back(std::move(o));
    });
    return out;
}

/// A family of pairwise-disjoint tuple sets, each tagged with an orbit
/// representative.
struct Trace {
    int arity = 0;
    std::vector<Orbit> family; // ordered by representative
    bool disjoint_flag = true;

    bool operator==(const Trace& o) const { return arity == o.arity && family == o.family; }

    Property union_of_members() const {
        Property u(arity, {});
        for (const auto& o : family) u.tuples.insert(o.members.tuples.begin(), o.members.tuples.end());
        return u;
    }
};

/// The canonical trace [Psi]: all orbits of result arity meeting the
/// solution set of the type at the given parameters.
inline Trace canonical_trace(const FiniteStructure& m, const BlockType& phi,
                             const std::vector<Tuple>& params, const AutomorphismGroup& group,
                             const EvalOptions& opts = {}) {
    Property sol = solution_set(m, phi, params, opts);
    Trace tr;
    tr.arity = phi.result_arity();
    TupleSet covered;
    for (const auto& t : sol.tuples) {
        if (covered.count(t)) continue;
        Orbit o = orbit_of_tuple(m, group, t);
        covered.insert(o.members.tuples.begin(), o.members.tuples.end());
        tr.family.push_back(std::move(o));
    }
    std::sort(tr.family.begin(), tr.family.end(),
              [](const Orbit& a, const Orbit& b) { return a.representative < b.representative; });
    if (self_check_enabled()) {
        // Coverage, pairwise disjointness, and existential partial
        // preservation into each member.
        TupleSet seen;
        for (const auto& o : tr.family) {
            for (const auto& t : o.members.tuples)
                if (!seen.insert(t).second) throw InternalError("trace members overlap");
        }
        for (const auto& t : sol.tuples)
            if (!seen.count(t)) throw InternalError("trace does not cover the solution set");
        std::vector<Property> singles;
        for (std::size_t i = 0; i < params.size(); ++i)
            singles.emplace_back(phi.block_arity(static_cast<int>(i)), TupleSet{params[i]});
        for (const auto& o : tr.family)
            if (!check_preservation(m, phi, singles, o.members, Mode::ExistsPartiallyPreserved, opts))
                throw InternalError("trace member fails existential partial preservation");
    }
    return tr;
}

inline Trace canonical_trace(const FiniteStructure& m, const BlockType& phi,
                             const std::vector<Tuple>& params, const EvalOptions& opts = {}) {
    return canonical_trace(m, phi, params, automorphisms(m, opts), opts);
}

/// [Phi]_(P1..Pn): the union of the canonical trace families over every
/// parameter choice from the product of the properties.
inline Trace trace_over_properties(const FiniteStructure& m, const BlockType& phi,
                                   const std::vector<Property>& ps, const AutomorphismGroup& group,
                                   const EvalOptions& opts = {}) {
    Trace tr;
    tr.arity = phi.result_arity();
    std::set<Tuple> reps;
    detail::for_each_param_choice(phi, ps, [&](const ParamTuple& choice) {
        Trace one = canonical_trace(m, phi, choice, group, opts);
        for (auto& o : one.family)
            if (reps.insert(o.representative).second) tr.family.push_back(std::move(o));
        return true;
    });
    std::sort(tr.family.begin(), tr.family.end(),
              [](const Orbit& a, const Orbit& b) { return a.representative < b.representative; });
    return tr;
}

inline Trace trace_over_properties(const FiniteStructure& m, const BlockType& phi,
                                   const std::vector<Property>& ps, const EvalOptions& opts = {}) {
    return trace_over_properties(m, phi, ps, automorphisms(m, opts), opts);
}

inline void require_orbit(const FiniteStructure& m, const AutomorphismGroup& group,
                          const Property& candidate, const std::string& what) {
    if (candidate.empty()) throw ValidationError(what + " is not an orbit: empty set");
    Orbit o = orbit_of_tuple(m, group, *candidate.tuples.begin());
    if (o.members != candidate) throw ValidationError(what + " is not an orbit");
}

/// Weak orthogonality of arity-1 orbits: their product is a single tuple
/// orbit. The orbit of any product tuple is always contained in the
/// product, so equality of cardinalities decides it.
inline bool is_weakly_orthogonal(const FiniteStructure& m, const std::vector<Property>& orbits,
                                 const AutomorphismGroup& group) {
    if (orbits.empty()) throw ValidationError("weak orthogonality needs at least one orbit");
    std::uint64_t product_size = 1;
    Tuple first;
    for (const auto& o : orbits) {
        if (o.arity != 1) throw ValidationError("weak orthogonality expects arity-1 orbits");
        require_orbit(m, group, o, "input");
        product_size *= o.tuples.size();
        first.push_back((*o.tuples.begin())[0]);
    }
    Orbit big = orbit_of_tuple(m, group, first);
    return big.members.tuples.size() == product_size;
}

inline bool is_weakly_orthogonal(const FiniteStructure& m, const std::vector<Property>& orbits,
                                 const EvalOptions& opts = {}) {
    return is_weakly_orthogonal(m, orbits, automorphisms(m, opts));
}

/// (p,q)-preservation over orbit inputs: existentially (some realization of
/// p has a nonempty solution set inside the q-orbit) and totally (all do).
/// For genuine orbits the two coincide whenever a solution exists.
struct PqVerdict {
    bool existential = false;
    bool total = false;
};

inline PqVerdict pq_preservation_check(const FiniteStructure& m, const BlockType& phi,
                                       const Property& p_orbit, const Property& q_orbit,
                                       const AutomorphismGroup& group, const EvalOptions& opts = {}) {
    if (phi.block_count() != 1)
        throw ValidationError("(p,q)-preservation expects a single parameter block");
    if (p_orbit.arity != phi.block_arity(0) || q_orbit.arity != phi.result_arity())
        throw ValidationError("orbit arities do not match the type blocks");
    require_orbit(m, group, p_orbit, "parameter property");
    require_orbit(m, group, q_orbit, "target property");
    PqVerdict v;
    v.total = true;
    for (const auto& a : p_orbit.tuples) {
        Property sol = solution_set(m, phi, {a}, opts);
        bool good = !sol.empty();
        for (const auto& t : sol.tuples)
            if (!q_orbit.contains(t)) {
                good = false;
                break;
            }
        if (good) v.existential = true;
        else v.total = false;
    }
    return v;
}

inline PqVerdict pq_preservation_check(const FiniteStructure& m, const BlockType& phi,
                                       const Property& p_orbit, const Property& q_orbit,
                                       const EvalOptions& opts = {}) {
    return pq_preservation_check(m, phi, p_orbit, q_orbit, automorphisms(m, opts), opts);
}

/// Both sides of the superposition-trace theorem: the canonical trace of
/// S(Phi_1..Phi_m, Psi) against the orbits of outer solutions reached
/// through inner witnesses. Inequality indicates an implementation bug.
struct SuperpositionTraceResult {
    Trace lhs;
    Trace rhs;
    bool equal = false;
};

inline SuperpositionTraceResult superposition_trace_check(
    const FiniteStructure& m, const std::vector<BlockType>& phis, const BlockType& psi,
    const std::vector<Tuple>& params, const AutomorphismGroup& group, const EvalOptions& opts = {}) {
    SuperpositionTraceResult res;
    BlockType sup = build_superposition_type(phis, psi);
    res.lhs = canonical_trace(m, sup, params, group, opts);

    res.rhs.arity = psi.result_arity();
    std::vector<Property> inner_sols;
    for (const auto& p : phis) inner_sols.push_back(solution_set(m, p, params, opts));
    std::set<Tuple> reps;
    bool any_empty = false;
    for (const auto& s : inner_sols)
        if (s.empty()) any_empty = true;
    if (!any_empty) {
        std::vector<TupleSet::const_iterator> its;
        for (const auto& s : inner_sols) its.push_back(s.tuples.begin());
        while (true) {
            std::vector<Tuple> mid;
            for (auto it : its) mid.push_back(*it);
            Property outer = solution_set(m, psi, mid, opts);
            for (const auto& c : outer.tuples) {
                Orbit o = orbit_of_tuple(m, group, c);
                if (reps.insert(o.representative).second) res.rhs.family.push_back(std::move(o));
            }
            int i = static_cast<int>(inner_sols.size()) - 1;
            while (i >= 0) {
                auto& it = its[static_cast<std::size_t>(i)];
                if (++it != inner_sols[static_cast<std::size_t>(i)].tuples.end()) break;
                it = inner_sols[static_cast<std::size_t>(i)].tuples.begin();
                --i;
            }
            if (i < 0) break;
        }
    }
    std::sort(res.rhs.family.begin(), res.rhs.family.end(),
              [](const Orbit& a, const Orbit& b) { return a.representative < b.representative; });
    res.equal = res.lhs == res.rhs;
    return res;
}

inline SuperpositionTraceResult superposition_trace_check(const FiniteStructure& m,
                                                          const std::vector<BlockType>& phis,
                                                          const BlockType& psi,
                                                          const std::vector<Tuple>& params,
                                                          const EvalOptions& opts = {}) {
    return superposition_trace_check(m, phis, psi, params, automorphisms(m, opts), opts);
}

struct TraceCardinality {
    std::size_t count = 0;
    bool is_singleton = false;
};

inline TraceCardinality trace_cardinality(const FiniteStructure& m, const BlockType& phi,
                                          const std::vector<Tuple>& params,
                                          const AutomorphismGroup& group,
                                          const EvalOptions& opts = {}) {
    Trace tr = canonical_trace(m, phi, params, group, opts);
    return {tr.family.size(), tr.family.size() == 1};
}

inline TraceCardinality trace_cardinality(const FiniteStructure& m, const BlockType& phi,
                                          const std::vector<Tuple>& params,
                                          const EvalOptions& opts = {}) {
    return trace_cardinality(m, phi, params, automorphisms(m, opts), opts);
}

/// A first-order formula whose solution set is exactly the orbit: an
/// existentially quantified enumeration of the universe realizing the full
/// atomic diagram, with the result variables pinned to the representative's
/// positions. Exponential to evaluate; gated to universes of size <= 6.
inline Formula orbit_defining_formula(const FiniteStructure& m, const Orbit& orbit,
                                      const std::vector<std::string>& result_vars) {
    if (m.size > 6) throw BudgetError("orbit defining formula gated to universes of size <= 6");
    if (static_cast<int>(result_vars.size()) != orbit.arity)
        throw ValidationError("result variable count must match the orbit arity");
    auto zvar = [](int i) { return "u" + std::to_string(i); };
    std::vector<Formula> conj;
    // Result variables pinned to the representative's enumeration slots.
    for (int i = 0; i < orbit.arity; ++i)
        conj.push_back(Formula::equal(Term::var(result_vars[static_cast<std::size_t>(i)]),
                                      Term::var(zvar(orbit.representative[static_cast<std::size_t>(i)]))));
    {
        std::vector<Formula> membership;
        for (int i = 0; i < m.size; ++i)
            membership.push_back(Formula::equal(Term::var("w"), Term::var(zvar(i))));
        conj.push_back(Formula::forall("w", Formula::disjoin(membership)));
    }
    // Full atomic diagram over the enumeration.
    for (const auto& [name, arity] : m.signature.relations) {
        for_each_tuple(m.size, arity, [&](const Tuple& t) {
            std::vector<Term> args;
            for (int v : t) args.push_back(Term::var(zvar(v)));
            Formula atom = Formula::atom(name, std::move(args));
            conj.push_back(m.rel_contains(name, t) ? atom : Formula::negation(atom));
        });
    }
    for (const auto& [name, arity] : m.signature.functions) {
        for_each_tuple(m.size, arity, [&](const Tuple& t) {
            std::vector<Term> args;
            for (int v : t) args.push_back(Term::var(zvar(v)));
            conj.push_back(Formula::equal(Term::app(name, std::move(args)),
                                          Term::var(zvar(m.fn_value(name, t)))));
        });
    }
    // Distinctness conjuncts sit at their quantifier level so evaluation
    // explores permutations, not arbitrary assignments.
    Formula body = Formula::conjoin(conj);
    for (int i = m.size - 1; i >= 0; --i) {
        std::vector<Formula> level;
        for (int j = 0; j < i; ++j)
            level.push_back(Formula::negation(Formula::equal(Term::var(zvar(i)), Term::var(zvar(j)))));
        level.push_back(std::move(body));
        body = Formula::exists(zvar(i), Formula::conjoin(level));
    }
    return body;
}

} // namespace preskit
