#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "preskit/blocktype.hpp"
#include "preskit/errors.hpp"
#include "preskit/eval.hpp"
#include "preskit/structure.hpp"

namespace preskit {

/// The eight preservation/disjointness modes. TotallyNonPreserved is the
/// documented alias of ForallPartiallyNonPreserved.
enum class Mode {
    TotallyPreserved = 0,
    ExistentiallyPreserved,
    ForallPartiallyPreserved,
    ExistsPartiallyPreserved,
    ExistsPartiallyNonPreserved,
    ForallPartiallyNonPreserved,
    ExistentiallyDisjoint,
    TotallyDisjoint,
};

inline constexpr std::array<Mode, 8> all_modes = {
    Mode::TotallyPreserved,          Mode::ExistentiallyPreserved,
    Mode::ForallPartiallyPreserved,  Mode::ExistsPartiallyPreserved,
    Mode::ExistsPartiallyNonPreserved, Mode::ForallPartiallyNonPreserved,
    Mode::ExistentiallyDisjoint,     Mode::TotallyDisjoint,
};

inline std::string mode_name(Mode m) {
    switch (m) {
        case Mode::TotallyPreserved: return "totally-preserved";
        case Mode::ExistentiallyPreserved: return "existentially-preserved";
        case Mode::ForallPartiallyPreserved: return "forall-partially-preserved";
        case Mode::ExistsPartiallyPreserved: return "exists-partially-preserved";
        case Mode::ExistsPartiallyNonPreserved: return "exists-partially-non-preserved";
        case Mode::ForallPartiallyNonPreserved: return "forall-partially-non-preserved";
        case Mode::ExistentiallyDisjoint: return "existentially-disjoint";
        case Mode::TotallyDisjoint: return "totally-disjoint";
    }
    throw InternalError("unreachable mode");
}

inline Mode parse_mode(const std::string& name) {
    for (Mode m : all_modes)
        if (mode_name(m) == name) return m;
    if (name == "totally-non-preserved") return Mode::ForallPartiallyNonPreserved;
    throw ValidationError("unknown preservation mode '" + name + "'");
}

/// Whether the mode quantifies universally over the parameter product.
inline bool mode_is_universal(Mode m) {
    return m == Mode::TotallyPreserved || m == Mode::ForallPartiallyPreserved ||
           m == Mode::ForallPartiallyNonPreserved || m == Mode::TotallyDisjoint;
}

/// A choice of one tuple per parameter block.
using ParamTuple = std::vector<Tuple>;

namespace detail {

inline void check_shapes(const FiniteStructure& m, const BlockType& phi,
                         const std::vector<Property>& ps, const Property& q) {
    phi.validate(m.signature);
    bool zero_block_shortcut = phi.block_count() == 0 && ps.size() == 1 && ps[0].arity == 0;
    if (!zero_block_shortcut && static_cast<int>(ps.size()) != phi.block_count())
        throw ValidationError("expected " + std::to_string(phi.block_count()) +
                              " parameter properties, got " + std::to_string(ps.size()));
    if (!zero_block_shortcut)
        for (int i = 0; i < phi.block_count(); ++i) {
            const auto& p = ps[static_cast<std::size_t>(i)];
            if (p.arity != phi.block_arity(i))
                throw ValidationError("property " + std::to_string(i + 1) + " has arity " +
                                      std::to_string(p.arity) + ", block expects " +
                                      std::to_string(phi.block_arity(i)));
            p.validate(m.size);
        }
    if (q.arity != phi.result_arity())
        throw ValidationError("target property has arity " + std::to_string(q.arity) +
                              ", result block expects " + std::to_string(phi.result_arity()));
    q.validate(m.size);
}

/// Iterates the product P1 x ... x Pn in lexicographic order; n = 0 yields
/// the single empty choice. Stops early when fn returns false.
template <typename Fn>
void for_each_param_choice(const BlockType& phi, const std::vector<Property>& ps, Fn&& fn) {
    // Arity-0 stand-in for the empty block list: {()} is the nonempty empty
    // product, the empty arity-0 property is the empty product.
    if (phi.block_count() == 0 && ps.size() == 1 && ps[0].arity == 0) {
        if (!ps[0].empty()) fn(ParamTuple{});
        return;
    }
    std::vector<TupleSet::const_iterator> its;
    for (const auto& p : ps) {
        if (p.empty()) return;
        its.push_back(p.tuples.begin());
    }
    while (true) {
        ParamTuple choice;
        choice.reserve(its.size());
        for (auto it : its) choice.push_back(*it);
        if (!fn(choice)) return;
        int i = static_cast<int>(ps.size()) - 1;
        while (i >= 0) {
            auto& it = its[static_cast<std::size_t>(i)];
            if (++it != ps[static_cast<std::size_t>(i)].tuples.end()) break;
            it = ps[static_cast<std::size_t>(i)].tuples.begin();
            --i;
        }
        if (i < 0) return;
    }
}

inline bool product_is_empty(const BlockType& phi, const std::vector<Property>& ps) {
    if (phi.block_count() == 0 && ps.size() == 1 && ps[0].arity == 0) return ps[0].empty();
    for (const auto& p : ps)
        if (p.empty()) return true;
    return false;
}

struct TupleFlags {
    bool meets_q;     // sol intersects Q
    bool meets_qbar;  // sol intersects the complement of Q
    bool empty_sol;
};

inline TupleFlags sweep_tuple(const FiniteStructure& m, const BlockType& phi, const Property& q,
                              const ParamTuple& choice, const EvalOptions& opts) {
    Property sol = solution_set(m, phi, choice, opts);
    TupleFlags f{false, false, sol.empty()};
    for (const auto& t : sol.tuples) {
        if (q.contains(t)) f.meets_q = true;
        else f.meets_qbar = true;
        if (f.meets_q && f.meets_qbar) break;
    }
    return f;
}

inline bool mode_condition(Mode mode, const TupleFlags& f) {
    switch (mode) {
        case Mode::TotallyPreserved:
        case Mode::ExistentiallyPreserved: return !f.meets_qbar; // sol subset of Q
        case Mode::ForallPartiallyPreserved:
        case Mode::ExistsPartiallyPreserved: return f.meets_q;
        case Mode::ExistsPartiallyNonPreserved:
        case Mode::ForallPartiallyNonPreserved: return f.meets_qbar;
        case Mode::ExistentiallyDisjoint:
        case Mode::TotallyDisjoint: return !f.meets_q; // sol subset of the complement
    }
    throw InternalError("unreachable mode");
}

} // namespace detail

/// The literal per-mode quantification over P1 x ... x Pn. Universal modes
/// over an empty product hold vacuously; existential ones fail.
inline bool check_preservation(const FiniteStructure& m, const BlockType& phi,
                               const std::vector<Property>& ps, const Property& q, Mode mode,
                               const EvalOptions& opts = {}) {
    detail::check_shapes(m, phi, ps, q);
    bool universal = mode_is_universal(mode);
    bool verdict = universal;
    detail::for_each_param_choice(phi, ps, [&](const ParamTuple& choice) {
        bool c = detail::mode_condition(mode, detail::sweep_tuple(m, phi, q, choice, opts));
        if (universal && !c) {
            verdict = false;
            return false;
        }
        if (!universal && c) {
            verdict = true;
            return false;
        }
        return true;
    });
    return verdict;
}

/// Verdicts for all eight modes from one product sweep, with witnesses for
/// true existential modes and counterexamples for false universal modes.
struct PreservationReport {
    std::map<Mode, bool> verdicts;
    std::map<Mode, ParamTuple> witnesses;
    bool empty_product_flag = false;
    std::set<Tuple> empty_solution_flags; // concatenated parameter tuples

    bool verdict(Mode m) const { return verdicts.at(m); }
    std::optional<ParamTuple> witness(Mode m) const {
        auto it = witnesses.find(m);
        if (it == witnesses.end()) return std::nullopt;
        return it->second;
    }
};

inline PreservationReport full_report(const FiniteStructure& m, const BlockType& phi,
                                      const std::vector<Property>& ps, const Property& q,
                                      const EvalOptions& opts = {}) {
    detail::check_shapes(m, phi, ps, q);
    PreservationReport rep;
    rep.empty_product_flag = detail::product_is_empty(phi, ps);
    for (Mode mode : all_modes) rep.verdicts[mode] = mode_is_universal(mode);
    detail::for_each_param_choice(phi, ps, [&](const ParamTuple& choice) {
        auto flags = detail::sweep_tuple(m, phi, q, choice, opts);
        if (flags.empty_sol) {
            Tuple flat;
            for (const auto& t : choice) flat.insert(flat.end(), t.begin(), t.end());
            rep.empty_solution_flags.insert(flat);
        }
        for (Mode mode : all_modes) {
            bool c = detail::mode_condition(mode, flags);
            if (mode_is_universal(mode)) {
                if (!c && rep.verdicts[mode]) {
                    rep.verdicts[mode] = false;
                    rep.witnesses[mode] = choice; // counterexample
                }
            } else {
                if (c && !rep.verdicts[mode]) {
                    rep.verdicts[mode] = true;
                    rep.witnesses[mode] = choice;
                }
            }
        }
        return true;
    });
    return rep;
}

/// Merges the parameter blocks into one and the parameter properties into
/// their cartesian product; every mode verdict is invariant under this
/// transformation. With no blocks the type is returned unchanged and the
/// product is the arity-0 property {()}.
inline std::pair<BlockType, Property> reduce_to_product(const BlockType& phi,
                                                        const std::vector<Property>& ps) {
    if (phi.block_count() == 0) {
        Property unit(0, {Tuple{}});
        if (ps.size() == 1 && ps[0].arity == 0) unit = ps[0];
        return {phi, unit};
    }
    std::vector<std::string> merged;
    for (const auto& b : phi.parameter_blocks) merged.insert(merged.end(), b.begin(), b.end());
    BlockType out{{merged}, phi.result_block, phi.formulas};
    return {out, cartesian_product(ps)};
}

/// The solution set together with its preservation characterization: the
/// type totally preserves the singletons into Q, does not partially reach
/// the complement, and the singleton-target representation reproduces Q
/// elementwise.
struct TypeDefinedSet {
    Property q;
    bool checks = false;
};

inline TypeDefinedSet type_defined_set_characterization(const FiniteStructure& m,
                                                        const BlockType& phi,
                                                        const std::vector<Tuple>& params,
                                                        const EvalOptions& opts = {}) {
    TypeDefinedSet out;
    out.q = solution_set(m, phi, params, opts);
    std::vector<Property> singles;
    for (std::size_t i = 0; i < params.size(); ++i)
        singles.emplace_back(phi.block_arity(static_cast<int>(i)), TupleSet{params[i]});
    bool a = check_preservation(m, phi, singles, out.q, Mode::TotallyPreserved, opts);
    bool b = !check_preservation(m, phi, singles, complement_property(m, out.q),
                                 Mode::ExistsPartiallyPreserved, opts);
    bool c = true;
    for_each_tuple(m.size, phi.result_arity(), [&](const Tuple& t) {
        bool member = check_preservation(m, phi, singles, Property(phi.result_arity(), {t}),
                                         Mode::ExistsPartiallyPreserved, opts);
        if (member != out.q.contains(t)) c = false;
    });
    out.checks = a && b && c;
    return out;
}

/// The family of solution-set unions of the preserving sub-lists of Phi,
/// with lattice diagnostics. The union reading aggregates each sub-list's
/// solution sets over all parameter tuples.
struct SublatticeReport {
    std::vector<Property> family;
    bool closed_under_union = false;
    bool closed_under_intersection = false;
    bool least_is_phi_set = false;
    Property phi_set;
    std::vector<Property> maximal_elements;
};

inline SublatticeReport preserving_sublattice(const FiniteStructure& m, const BlockType& phi,
                                              const std::vector<Property>& ps, const Property& q,
                                              const EvalOptions& opts = {}) {
    if (!check_preservation(m, phi, ps, q, Mode::TotallyPreserved, opts))
        throw ValidationError("type is not totally preserving for the given tuple");
    if (phi.formulas.size() > 16)
        throw BudgetError("sub-list enumeration over " + std::to_string(phi.formulas.size()) +
                          " formulas exceeds the 2^16 bound");

    auto union_over_params = [&](const BlockType& sub) {
        Property u(sub.result_arity(), {});
        detail::for_each_param_choice(sub, ps, [&](const ParamTuple& choice) {
            Property sol = solution_set(m, sub, choice, opts);
            u.tuples.insert(sol.tuples.begin(), sol.tuples.end());
            return true;
        });
        return u;
    };

    SublatticeReport rep;
    std::set<Property> fam;
    std::size_t k = phi.formulas.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (std::size_t{1} << i)) idx.push_back(i);
        BlockType sub{phi.parameter_blocks, phi.result_block, {}};
        for (auto i : idx) sub.formulas.push_back(phi.formulas[i]);
        if (!check_preservation(m, sub, ps, q, Mode::TotallyPreserved, opts)) continue;
        Property u = union_over_params(sub);
        if (mask == (std::size_t{1} << k) - 1) rep.phi_set = u;
        fam.insert(std::move(u));
    }
    rep.family.assign(fam.begin(), fam.end());

    auto member = [&](const Property& p) { return fam.count(p) != 0; };
    rep.closed_under_union = rep.closed_under_intersection = true;
    for (const auto& a : rep.family)
        for (const auto& b : rep.family) {
            Property uni(a.arity, a.tuples);
            uni.tuples.insert(b.tuples.begin(), b.tuples.end());
            Property inter(a.arity, {});
            for (const auto& t : a.tuples)
                if (b.contains(t)) inter.tuples.insert(t);
            if (!member(uni)) rep.closed_under_union = false;
            if (!member(inter)) rep.closed_under_intersection = false;
        }

    rep.least_is_phi_set = true;
    for (const auto& p : rep.family) {
        bool contains_phi_set = true;
        for (const auto& t : rep.phi_set.tuples)
            if (!p.contains(t)) {
                contains_phi_set = false;
                break;
            }
        if (!contains_phi_set) rep.least_is_phi_set = false;
        bool is_maximal = true;
        for (const auto& other : rep.family) {
            if (other == p) continue;
            bool p_subset = true;
            for (const auto& t : p.tuples)
                if (!other.contains(t)) {
                    p_subset = false;
                    break;
                }
            if (p_subset) {
                is_maximal = false;
                break;
            }
        }
        if (is_maximal) rep.maximal_elements.push_back(p);
    }
    return rep;
}

} // namespace preskit
