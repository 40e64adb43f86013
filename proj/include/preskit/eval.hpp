#pragma once

#include <map>
#include <string>
#include <vector>

#include "preskit/blocktype.hpp"
#include "preskit/errors.hpp"
#include "preskit/formula.hpp"
#include "preskit/structure.hpp"

namespace preskit {

/// Work budget for the brute-force engines. All evaluation is exponential
/// by design; a distinct BudgetError fires instead of runaway scans.
struct EvalOptions {
    long long budget = 200'000'000;
};

/// Maps variable names to universe elements; must cover the free variables
/// of the formula under evaluation.
struct Assignment {
    std::map<std::string, int> values;
};

namespace detail {

struct Env {
    const FiniteStructure& m;
    std::vector<std::pair<std::string, int>> stack;
    long long remaining;

    void tick() {
        if (--remaining < 0) throw BudgetError("evaluation budget exceeded");
    }

    int lookup(const std::string& v) const {
        for (auto it = stack.rbegin(); it != stack.rend(); ++it)
            if (it->first == v) return it->second;
        throw ValidationError("missing assignment for free variable '" + v + "'");
    }
};

inline int eval_term(Env& env, const Term& t) {
    env.tick();
    if (t.is_element()) {
        if (t.element_value() >= env.m.size)
            throw ValidationError("element literal " + t.name() + " outside universe");
        return t.element_value();
    }
    if (t.is_variable()) return env.lookup(t.name());
    Tuple args;
    args.reserve(t.args().size());
    for (const auto& a : t.args()) args.push_back(eval_term(env, a));
    return env.m.fn_value(t.name(), args);
}

inline bool eval_node(Env& env, const Formula& f) {
    env.tick();
    switch (f.kind()) {
        case FormulaKind::Truth: return true;
        case FormulaKind::Falsity: return false;
        case FormulaKind::Atom: {
            Tuple args;
            args.reserve(f.terms().size());
            for (const auto& t : f.terms()) args.push_back(eval_term(env, t));
            return env.m.rel_contains(f.relation(), args);
        }
        case FormulaKind::Equal:
            return eval_term(env, f.terms()[0]) == eval_term(env, f.terms()[1]);
        case FormulaKind::Not: return !eval_node(env, f.child());
        case FormulaKind::And: return eval_node(env, f.child(0)) && eval_node(env, f.child(1));
        case FormulaKind::Or: return eval_node(env, f.child(0)) || eval_node(env, f.child(1));
        case FormulaKind::Implies: return !eval_node(env, f.child(0)) || eval_node(env, f.child(1));
        case FormulaKind::Iff: return eval_node(env, f.child(0)) == eval_node(env, f.child(1));
        case FormulaKind::Exists: {
            env.stack.emplace_back(f.bound_var(), 0);
            for (int v = 0; v < env.m.size; ++v) {
                env.stack.back().second = v;
                if (eval_node(env, f.child())) {
                    env.stack.pop_back();
                    return true;
                }
            }
            env.stack.pop_back();
            return false;
        }
        case FormulaKind::Forall: {
            env.stack.emplace_back(f.bound_var(), 0);
            for (int v = 0; v < env.m.size; ++v) {
                env.stack.back().second = v;
                if (!eval_node(env, f.child())) {
                    env.stack.pop_back();
                    return false;
                }
            }
            env.stack.pop_back();
            return true;
        }
    }
    throw InternalError("unreachable formula kind");
}

inline void refuse_if_hopeless(const FiniteStructure& m, int scanned_vars, int quantifier_depth,
                               const EvalOptions& opts) {
    std::uint64_t est = checked_pow(static_cast<std::uint64_t>(m.size),
                                    static_cast<std::uint64_t>(scanned_vars + quantifier_depth));
    if (est > static_cast<std::uint64_t>(opts.budget))
        throw BudgetError("estimated work " + std::to_string(est) + " exceeds budget " +
                          std::to_string(opts.budget));
}

} // namespace detail

/// Tarski semantics over the full universe; the assignment must cover the
/// free variables of the formula.
inline bool eval_formula(const FiniteStructure& m, const Formula& f, const Assignment& a,
                         const EvalOptions& opts = {}) {
    for (const auto& v : f.free_vars())
        if (!a.values.count(v))
            throw ValidationError("missing assignment for free variable '" + v + "'");
    detail::refuse_if_hopeless(m, 0, f.quantifier_depth(), opts);
    detail::Env env{m, {}, opts.budget};
    for (const auto& [k, v] : a.values) {
        if (v < 0 || v >= m.size)
            throw ValidationError("assignment value for '" + k + "' outside universe");
        env.stack.emplace_back(k, v);
    }
    return detail::eval_node(env, f);
}

/// Solution set Phi(a_1..a_n, M): all result tuples satisfying every
/// formula of the type at the given parameter tuples.
inline Property solution_set(const FiniteStructure& m, const BlockType& phi,
                             const std::vector<Tuple>& params, const EvalOptions& opts = {}) {
    if (static_cast<int>(params.size()) != phi.block_count())
        throw ValidationError("expected " + std::to_string(phi.block_count()) +
                              " parameter tuples, got " + std::to_string(params.size()));
    for (int i = 0; i < phi.block_count(); ++i) {
        if (static_cast<int>(params[static_cast<std::size_t>(i)].size()) != phi.block_arity(i))
            throw ValidationError("parameter tuple " + std::to_string(i + 1) + " has length " +
                                  std::to_string(params[static_cast<std::size_t>(i)].size()) +
                                  ", block expects " + std::to_string(phi.block_arity(i)));
        for (int v : params[static_cast<std::size_t>(i)])
            if (v < 0 || v >= m.size)
                throw ValidationError("parameter element " + std::to_string(v) + " outside universe");
    }
    int qd = 0;
    for (const auto& f : phi.formulas) qd = std::max(qd, f.quantifier_depth());
    detail::refuse_if_hopeless(m, phi.result_arity(), qd, opts);

    detail::Env env{m, {}, opts.budget};
    for (int i = 0; i < phi.block_count(); ++i) {
        const auto& blk = phi.parameter_blocks[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < blk.size(); ++j)
            env.stack.emplace_back(blk[j], params[static_cast<std::size_t>(i)][j]);
    }
    std::size_t base = env.stack.size();
    for (const auto& v : phi.result_block) env.stack.emplace_back(v, 0);

    Property out(phi.result_arity(), {});
    for_each_tuple(m.size, phi.result_arity(), [&](const Tuple& t) {
        for (std::size_t j = 0; j < t.size(); ++j) env.stack[base + j].second = t[j];
        for (const auto& f : phi.formulas)
            if (!detail::eval_node(env, f)) return;
        out.tuples.insert(t);
    });
    return out;
}

} // namespace preskit
