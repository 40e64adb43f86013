#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "preskit/eval.hpp"
#include "preskit/io.hpp"
#include "preskit/parser.hpp"
#include "support.hpp"

using namespace preskit;

namespace {

// Truth-table oracle for quantifier-free formulas: explicit recursion over
// the propositional skeleton, independent of the engine's environment
// machinery.
int oracle_term(const FiniteStructure& m, const Term& t, const std::map<std::string, int>& env) {
    if (t.is_variable()) return env.at(t.name());
    Tuple args;
    for (const auto& a : t.args()) args.push_back(oracle_term(m, a, env));
    return m.fn_value(t.name(), args);
}

bool oracle_eval(const FiniteStructure& m, const Formula& f, const std::map<std::string, int>& env) {
    switch (f.kind()) {
        case FormulaKind::Truth: return true;
        case FormulaKind::Falsity: return false;
        case FormulaKind::Atom: {
            Tuple args;
            for (const auto& t : f.terms()) args.push_back(oracle_term(m, t, env));
            return m.rel_contains(f.relation(), args);
        }
        case FormulaKind::Equal:
            return oracle_term(m, f.terms()[0], env) == oracle_term(m, f.terms()[1], env);
        case FormulaKind::Not: return !oracle_eval(m, f.child(), env);
        case FormulaKind::And: return oracle_eval(m, f.child(0), env) && oracle_eval(m, f.child(1), env);
        case FormulaKind::Or: return oracle_eval(m, f.child(0), env) || oracle_eval(m, f.child(1), env);
        case FormulaKind::Implies:
            return !oracle_eval(m, f.child(0), env) || oracle_eval(m, f.child(1), env);
        case FormulaKind::Iff:
            return oracle_eval(m, f.child(0), env) == oracle_eval(m, f.child(1), env);
        default: throw std::logic_error("oracle covers quantifier-free formulas only");
    }
}

} // namespace

TEST_CASE("evalFormula basics on FIX2") {
    FiniteStructure m = testutil::load_fixture("fix2_c4.json");
    Formula r = parse_formula("R(x,y)", m.signature);
    REQUIRE(eval_formula(m, r, {{{"x", 0}, {"y", 1}}}));
    REQUIRE_FALSE(eval_formula(m, r, {{{"x", 0}, {"y", 2}}}));

    Formula total = parse_formula("forall x. exists y. R(x,y)", m.signature);
    REQUIRE(eval_formula(m, total, {}));

    REQUIRE(eval_formula(m, Formula::truth(), {}));
}

TEST_CASE("evalFormula reports missing assignments") {
    FiniteStructure m = testutil::load_fixture("fix2_c4.json");
    Formula r = parse_formula("R(x,y)", m.signature);
    REQUIRE_THROWS_MATCHES(eval_formula(m, r, {{{"x", 0}}}), ValidationError,
                           Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("y")));
}

TEST_CASE("solutionSet on the fixtures") {
    FiniteStructure fix1 = testutil::load_fixture("fix1_split_map.json");
    BlockType f_graph{{{"x"}}, {"y"}, {parse_formula("f(x) = y", fix1.signature)}};
    REQUIRE(solution_set(fix1, f_graph, {Tuple{0}}).tuples == TupleSet{{1}});

    FiniteStructure c4 = testutil::load_fixture("fix2_c4.json");
    BlockType edge{{{"x"}}, {"y"}, {parse_formula("R(x,y)", c4.signature)}};
    REQUIRE(solution_set(c4, edge, {Tuple{0}}).tuples == TupleSet{{1}, {3}});

    BlockType contradiction{{{"x"}}, {"y"}, {Formula::falsity()}};
    REQUIRE(solution_set(c4, contradiction, {Tuple{2}}).empty());
}

TEST_CASE("solutionSet validates parameter shapes") {
    FiniteStructure c4 = testutil::load_fixture("fix2_c4.json");
    BlockType edge{{{"x"}}, {"y"}, {parse_formula("R(x,y)", c4.signature)}};
    REQUIRE_THROWS_AS(solution_set(c4, edge, {}), ValidationError);
    REQUIRE_THROWS_AS(solution_set(c4, edge, {Tuple{0, 1}}), ValidationError);
    REQUIRE_THROWS_AS(solution_set(c4, edge, {Tuple{9}}), ValidationError);
}

TEST_CASE("solutionSet of a one-formula type equals the satisfying assignments") {
    FiniteStructure m = testutil::load_fixture("fix3_p3.json");
    std::mt19937_64 rng(17);
    std::vector<std::string> texts = {
        "R(x,y) & !R(y,y)", "R(x,y) | x = y", "R(y,x) -> R(x,y)",
        "(R(x,y) <-> R(y,x)) & !(x = y)", "!R(x,x) & (R(x,y) | R(y,x))",
    };
    for (const auto& text : texts) {
        Formula f = parse_formula(text, m.signature);
        BlockType t{{{"x"}}, {"y"}, {f}};
        for (int a = 0; a < m.size; ++a) {
            Property sol = solution_set(m, t, {Tuple{a}});
            for (int b = 0; b < m.size; ++b) {
                bool oracle = oracle_eval(m, f, {{"x", a}, {"y", b}});
                REQUIRE(sol.contains({b}) == oracle);
            }
        }
    }
    (void)rng;
}

TEST_CASE("adding formulas never enlarges the solution set") {
    FiniteStructure m = testutil::load_fixture("fix2_c4.json");
    std::vector<Formula> pool = {
        parse_formula("R(x,y)", m.signature),
        parse_formula("R(y,x)", m.signature),
        parse_formula("!R(y,y)", m.signature),
        parse_formula("exists z. (R(x,z) & R(z,y))", m.signature),
        parse_formula("x = y | R(x,y)", m.signature),
    };
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Formula> fs{pool[rng() % pool.size()]};
        BlockType smaller{{{"x"}}, {"y"}, fs};
        fs.push_back(pool[rng() % pool.size()]);
        BlockType larger{{{"x"}}, {"y"}, fs};
        int a = static_cast<int>(rng() % 4);
        Property s1 = solution_set(m, smaller, {Tuple{a}});
        Property s2 = solution_set(m, larger, {Tuple{a}});
        for (const auto& t : s2.tuples) REQUIRE(s1.contains(t));
    }
}

TEST_CASE("existential quantifier equals the explicit expansion") {
    // exists y. phi  ==  phi[y:=0] | ... | phi[y:=n-1], for n <= 6.
    for (const char* name : {"fix2_c4.json", "fix3_p3.json", "fix5_2comp.json"}) {
        FiniteStructure m = testutil::load_fixture(name);
        Formula body = parse_formula("R(x,w) & !R(w,x) | R(w,w) | w = x", m.signature);
        Formula quantified = Formula::exists("w", body);
        for (int a = 0; a < m.size; ++a) {
            bool expansion = false;
            for (int v = 0; v < m.size; ++v)
                expansion = expansion || eval_formula(m, body, {{{"x", a}, {"w", v}}});
            REQUIRE(eval_formula(m, quantified, {{{"x", a}}}) == expansion);
        }
    }
}

TEST_CASE("budget guard refuses hopeless scans with a distinct error") {
    FiniteStructure m = testutil::load_fixture("fix2_c4.json");
    // Quantifier tower: estimated work 4^12 over budget 1000.
    Formula f = parse_formula(
        "forall a. forall b. forall c. forall d. forall e. forall g. forall h. forall i. "
        "forall j. forall k. forall l. exists w. R(w,w) | a = b | c = d | e = g | h = i | "
        "j = k | l = w",
        m.signature);
    EvalOptions tight{1000};
    REQUIRE_THROWS_AS(eval_formula(m, f, {}, tight), BudgetError);

    // Tick guard fires even when the estimate squeaks through.
    Formula small = parse_formula("forall a. exists b. R(a,b)", m.signature);
    EvalOptions tiny{3};
    REQUIRE_THROWS_AS(eval_formula(m, small, {}, tiny), BudgetError);
}
