#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "preskit/blocktype.hpp"
#include "preskit/eval.hpp"
#include "preskit/io.hpp"
#include "preskit/parser.hpp"
#include "support.hpp"

using namespace preskit;

namespace {

Signature graph_sig() {
    Signature s;
    s.relations["R"] = 2;
    return s;
}

Signature fix1_sig() {
    Signature s;
    s.functions["f"] = 1;
    return s;
}

} // namespace

TEST_CASE("parser reads conjunction with negation") {
    Formula f = parse_formula("R(x,y) & !R(y,x)", graph_sig());
    REQUIRE(f.kind() == FormulaKind::And);
    REQUIRE(f.child(0).kind() == FormulaKind::Atom);
    REQUIRE(f.child(1).kind() == FormulaKind::Not);
    REQUIRE(f.child(1).child().kind() == FormulaKind::Atom);
    REQUIRE(f.free_vars() == std::set<std::string>{"x", "y"});
}

TEST_CASE("parser reads quantifiers with bound variables") {
    Formula f = parse_formula("exists z. (R(x,z) & R(z,y))", graph_sig());
    REQUIRE(f.kind() == FormulaKind::Exists);
    REQUIRE(f.bound_var() == "z");
    REQUIRE(f.free_vars() == std::set<std::string>{"x", "y"});
    REQUIRE(f.quantifier_depth() == 1);
}

TEST_CASE("parser reads function equalities") {
    Formula f = parse_formula("f(x) = y", fix1_sig());
    REQUIRE(f.kind() == FormulaKind::Equal);
    REQUIRE_FALSE(f.terms()[0].is_variable());
    REQUIRE(f.terms()[0].name() == "f");
    REQUIRE(f.terms()[1].is_variable());
}

TEST_CASE("parser precedence and associativity") {
    Signature s = graph_sig();
    Formula f = parse_formula("R(x,y) -> R(y,x) -> R(x,x)", s);
    REQUIRE(f.kind() == FormulaKind::Implies);
    REQUIRE(f.child(1).kind() == FormulaKind::Implies); // right-assoc

    Formula g = parse_formula("R(x,y) | R(y,x) & R(x,x)", s);
    REQUIRE(g.kind() == FormulaKind::Or); // & binds tighter
    REQUIRE(g.child(1).kind() == FormulaKind::And);

    Formula h = parse_formula("x != y", s);
    REQUIRE(h.kind() == FormulaKind::Not);
    REQUIRE(h.child().kind() == FormulaKind::Equal);

    REQUIRE(parse_formula("true", s).kind() == FormulaKind::Truth);
    REQUIRE(parse_formula("false", s).kind() == FormulaKind::Falsity);
}

TEST_CASE("parser reports positions and symbol errors") {
    Signature s = graph_sig();
    REQUIRE_THROWS_AS(parse_formula("R(x,y", s), ParseError);
    REQUIRE_THROWS_AS(parse_formula("R(x)", s), ParseError);          // arity
    REQUIRE_THROWS_AS(parse_formula("R(x,y) &", s), ParseError);
    REQUIRE_THROWS_AS(parse_formula("Q(x)", s), ParseError);          // undeclared => variable, no '='
    REQUIRE_THROWS_MATCHES(parse_formula("R(x,y) y", s), ParseError,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring("position")));
}

TEST_CASE("unparse then parse is the identity on random formulas") {
    Signature s;
    s.relations["R"] = 2;
    s.functions["f"] = 1;
    s.functions["c"] = 0;
    std::mt19937_64 rng(42);
    auto rand_term = [&](auto&& self, int depth) -> Term {
        switch (rng() % (depth > 0 ? 3 : 2)) {
            case 0: return Term::var(rng() % 2 ? "x" : "y");
            case 1: return Term::app("c");
            default: return Term::app("f", {self(self, depth - 1)});
        }
    };
    auto rand_formula = [&](auto&& self, int depth) -> Formula {
        if (depth == 0) {
            switch (rng() % 3) {
                case 0: return Formula::atom("R", {rand_term(rand_term, 1), rand_term(rand_term, 1)});
                case 1: return Formula::equal(rand_term(rand_term, 1), rand_term(rand_term, 1));
                default: return rng() % 2 ? Formula::truth() : Formula::falsity();
            }
        }
        switch (rng() % 7) {
            case 0: return Formula::negation(self(self, depth - 1));
            case 1: return Formula::conjunction(self(self, depth - 1), self(self, depth - 1));
            case 2: return Formula::disjunction(self(self, depth - 1), self(self, depth - 1));
            case 3: return Formula::implication(self(self, depth - 1), self(self, depth - 1));
            case 4: return Formula::biconditional(self(self, depth - 1), self(self, depth - 1));
            case 5: return Formula::exists("z", self(self, depth - 1));
            default: return Formula::forall("w", self(self, depth - 1));
        }
    };
    for (int trial = 0; trial < 300; ++trial) {
        Formula f = rand_formula(rand_formula, 3);
        Formula back = parse_formula(f.unparse(), s);
        INFO(f.unparse());
        REQUIRE(back == f);
    }
}

TEST_CASE("typeDisjunction forms pairwise disjunctions") {
    Signature s = graph_sig();
    BlockType phi{{{"x"}}, {"y"}, {parse_formula("R(x,y)", s)}};
    BlockType psi{{{"x"}}, {"y"}, {parse_formula("R(y,x)", s)}};
    BlockType out = type_disjunction(phi, psi);
    REQUIRE(out.formulas.size() == 1);
    REQUIRE(out.formulas[0].unparse() == "R(x, y) | R(y, x)");

    BlockType two{{{"x"}}, {"y"},
                  {parse_formula("R(x,y)", s), parse_formula("R(x,x)", s)}};
    REQUIRE(type_disjunction(two, psi).formulas.size() == 2);

    BlockType other{{{"u"}}, {"y"}, {parse_formula("R(u,y)", s)}};
    REQUIRE_THROWS_AS(type_disjunction(phi, other), ValidationError);
}

TEST_CASE("typeConjunction concatenates as a set") {
    Signature s = graph_sig();
    BlockType phi{{{"x"}}, {"y"}, {parse_formula("R(x,y)", s)}};
    REQUIRE(type_conjunction(phi, phi).formulas.size() == 1); // idempotent
    BlockType psi{{{"x"}}, {"y"}, {parse_formula("!R(y,x)", s)}};
    REQUIRE(type_conjunction(phi, psi).formulas.size() == 2);
}

TEST_CASE("type combinators match union/intersection of solution sets") {
    FiniteStructure c4 = testutil::load_fixture("fix2_c4.json");
    FiniteStructure comp = testutil::load_fixture("fix5_2comp.json");
    Signature s = graph_sig();
    std::vector<Formula> pool = {
        parse_formula("R(x,y)", s),         parse_formula("R(y,x)", s),
        parse_formula("R(y,y)", s),         parse_formula("x = y", s),
        parse_formula("exists z. R(y,z)", s), parse_formula("!R(x,y)", s),
    };
    std::mt19937_64 rng(5);
    for (const auto& m : {c4, comp}) {
        for (int trial = 0; trial < 40; ++trial) {
            BlockType phi{{{"x"}}, {"y"}, {pool[rng() % pool.size()], pool[rng() % pool.size()]}};
            BlockType psi{{{"x"}}, {"y"}, {pool[rng() % pool.size()]}};
            BlockType disj = type_disjunction(phi, psi);
            BlockType conj = type_conjunction(phi, psi);
            for (int a = 0; a < m.size; ++a) {
                Property sp = solution_set(m, phi, {Tuple{a}});
                Property sq = solution_set(m, psi, {Tuple{a}});
                Property sd = solution_set(m, disj, {Tuple{a}});
                Property sc = solution_set(m, conj, {Tuple{a}});
                Property uni(1, sp.tuples);
                uni.tuples.insert(sq.tuples.begin(), sq.tuples.end());
                Property inter(1, {});
                for (const auto& t : sp.tuples)
                    if (sq.contains(t)) inter.tuples.insert(t);
                REQUIRE(sd == uni);
                REQUIRE(sc == inter);
            }
        }
    }
}

TEST_CASE("buildSuperpositionType composes chains") {
    Signature s = graph_sig();
    BlockType phi{{{"x"}}, {"y"}, {parse_formula("R(x,y)", s)}};
    BlockType psi{{{"y"}}, {"z"}, {parse_formula("R(y,z)", s)}};
    BlockType sup = build_superposition_type({phi}, psi);
    REQUIRE(sup.parameter_blocks == std::vector<std::vector<std::string>>{{"x"}});
    REQUIRE(sup.result_block == std::vector<std::string>{"z"});
    REQUIRE(sup.formulas.size() == 1);
    REQUIRE(sup.formulas[0].unparse() == "exists y. R(x, y) & R(y, z)");
    REQUIRE(parse_formula(sup.formulas[0].unparse(), s) == sup.formulas[0]);
}

TEST_CASE("buildSuperpositionType counts formula combinations") {
    Signature s = graph_sig();
    BlockType phi{{{"x"}}, {"y"},
                  {parse_formula("R(x,y)", s), parse_formula("R(y,x)", s)}};
    BlockType psi{{{"y"}}, {"z"},
                  {parse_formula("R(y,z)", s), parse_formula("R(z,y)", s),
                   parse_formula("y = z", s)}};
    REQUIRE(build_superposition_type({phi}, psi).formulas.size() == 6);
}

TEST_CASE("buildSuperpositionType rejects colliding blocks") {
    Signature s = graph_sig();
    BlockType phi{{{"x"}}, {"y"}, {parse_formula("R(x,y)", s)}};
    BlockType bad_outer{{{"y"}}, {"x"}, {parse_formula("R(y,x)", s)}}; // reuses x
    REQUIRE_THROWS_AS(build_superposition_type({phi}, bad_outer), ValidationError);

    BlockType mismatched{{{"w"}}, {"z"}, {parse_formula("R(w,z)", s)}};
    REQUIRE_THROWS_AS(build_superposition_type({phi}, mismatched), ValidationError);
}

TEST_CASE("superposition of function graphs composes the tables") {
    FiniteStructure z4 = testutil::load_fixture("fix4_z4.json");
    const Signature& s = z4.signature;
    // y1 = x1 + x2, then z = y1 + y1.
    BlockType phi{{{"x1"}, {"x2"}}, {"y1"}, {parse_formula("add(x1,x2) = y1", s)}};
    BlockType psi{{{"y1"}}, {"z"}, {parse_formula("add(y1,y1) = z", s)}};
    BlockType sup = build_superposition_type({phi}, psi);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            Property sol = solution_set(z4, sup, {Tuple{a}, Tuple{b}});
            int expect = (2 * (a + b)) % 4;
            REQUIRE(sol.tuples == TupleSet{{expect}});
        }
}

TEST_CASE("superposition never captures variables: renamed-apart oracle") {
    FiniteStructure c4 = testutil::load_fixture("fix2_c4.json");
    Signature s = graph_sig();
    // Inner formulas mention an existential of their own.
    BlockType phi{{{"x"}}, {"y"}, {parse_formula("exists w. (R(x,w) & R(w,y))", s)}};
    BlockType psi{{{"y"}}, {"z"}, {parse_formula("exists v. (R(y,v) & R(v,z))", s)}};
    BlockType sup = build_superposition_type({phi}, psi);
    // Renamed-apart oracle: fresh middle variable name everywhere.
    BlockType phi2{{{"x"}}, {"mid"}, {parse_formula("exists w. (R(x,w) & R(w,mid))", s)}};
    BlockType psi2{{{"mid"}}, {"z"}, {parse_formula("exists v. (R(mid,v) & R(v,z))", s)}};
    BlockType sup2 = build_superposition_type({phi2}, psi2);
    for (int a = 0; a < 4; ++a)
        REQUIRE(solution_set(c4, sup, {Tuple{a}}) == solution_set(c4, sup2, {Tuple{a}}));
}

TEST_CASE("block type validation catches shadowing and coverage errors") {
    Signature s = graph_sig();
    BlockType shadow{{{"x"}}, {"y"}, {parse_formula("exists x. R(x,y)", s)}};
    REQUIRE_THROWS_AS(shadow.validate(s), ValidationError);

    BlockType uncovered{{{"x"}}, {"y"}, {parse_formula("R(x,w)", s)}};
    REQUIRE_THROWS_AS(uncovered.validate(s), ValidationError);

    BlockType dup{{{"x"}, {"x"}}, {"y"}, {parse_formula("R(x,y)", s)}};
    REQUIRE_THROWS_AS(dup.validate(s), ValidationError);

    BlockType empty_result{{{"x"}}, {}, {parse_formula("R(x,x)", s)}};
    REQUIRE_THROWS_AS(empty_result.validate(s), ValidationError);

    BlockType no_params{{}, {"y"}, {parse_formula("R(y,y)", s)}};
    REQUIRE_NOTHROW(no_params.validate(s)); // n = 0 is allowed
}

TEST_CASE("type files round-trip through JSON") {
    Signature s = graph_sig();
    BlockType t{{{"x"}}, {"y"},
                {parse_formula("R(x,y)", s), parse_formula("exists z. (R(x,z) & R(z,y))", s)}};
    std::string text = block_type_to_json(t).dump();
    BlockType back = load_block_type(text, s);
    REQUIRE(back.parameter_blocks == t.parameter_blocks);
    REQUIRE(back.result_block == t.result_block);
    REQUIRE(back.formulas.size() == t.formulas.size());
    for (std::size_t i = 0; i < t.formulas.size(); ++i) REQUIRE(back.formulas[i] == t.formulas[i]);
}
