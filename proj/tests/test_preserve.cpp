#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "preskit/io.hpp"
#include "preskit/parser.hpp"
#include "preskit/preserve.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace preskit;

namespace {

struct Fix1 {
    FiniteStructure m = testutil::load_fixture("fix1_split_map.json");
    BlockType phi{{{"x"}}, {"y"}, {parse_formula("f(x) = y", m.signature)}};
    Property p1 = testutil::load_fixture_property("fix1_p1.json");
    Property p2 = testutil::load_fixture_property("fix1_p2.json");
    Property q = testutil::load_fixture_property("fix1_q.json");
};

BlockType random_type(testutil::Rng& rng, const FiniteStructure& m, int blocks, int max_formulas) {
    std::vector<std::string> vars;
    std::vector<std::vector<std::string>> pblocks;
    for (int i = 0; i < blocks; ++i) {
        std::string v = "x" + std::to_string(i + 1);
        vars.push_back(v);
        pblocks.push_back({v});
    }
    vars.push_back("y");
    BlockType t{pblocks, {"y"}, {}};
    int count = testutil::rand_int(rng, 1, max_formulas);
    for (int i = 0; i < count; ++i) t.formulas.push_back(testutil::random_formula(rng, m, vars));
    return t;
}

} // namespace

TEST_CASE("FIX1 instantiates the split-map separation") {
    Fix1 f;
    // f(x)=y is totally (P1,Q)-preserving.
    REQUIRE(check_preservation(f.m, f.phi, {f.p1}, f.q, Mode::TotallyPreserved));
    // Existential but not total preservation on P1 u P2.
    Property both = Property::unary({0, 2});
    REQUIRE(check_preservation(f.m, f.phi, {both}, f.q, Mode::ExistentiallyPreserved));
    REQUIRE_FALSE(check_preservation(f.m, f.phi, {both}, f.q, Mode::TotallyPreserved));
    // Total disjointness on P2.
    REQUIRE(check_preservation(f.m, f.phi, {f.p2}, f.q, Mode::TotallyDisjoint));
}

TEST_CASE("fullReport on FIX1 singleton parameters") {
    Fix1 f;
    PreservationReport rep = full_report(f.m, f.phi, {f.p1}, f.q);
    REQUIRE(rep.verdict(Mode::TotallyPreserved));
    REQUIRE(rep.verdict(Mode::ExistentiallyPreserved));
    REQUIRE(rep.verdict(Mode::ForallPartiallyPreserved));
    REQUIRE(rep.verdict(Mode::ExistsPartiallyPreserved));
    REQUIRE_FALSE(rep.verdict(Mode::ExistsPartiallyNonPreserved));
    REQUIRE_FALSE(rep.verdict(Mode::ForallPartiallyNonPreserved));
    REQUIRE_FALSE(rep.verdict(Mode::ExistentiallyDisjoint));
    REQUIRE_FALSE(rep.verdict(Mode::TotallyDisjoint));
    REQUIRE_FALSE(rep.empty_product_flag);
    REQUIRE(rep.empty_solution_flags.empty());
    REQUIRE(rep.witness(Mode::ExistentiallyPreserved).value() == ParamTuple{{0}});
}

TEST_CASE("fullReport flags an empty parameter product") {
    Fix1 f;
    PreservationReport rep = full_report(f.m, f.phi, {Property(1, {})}, f.q);
    REQUIRE(rep.empty_product_flag);
    for (Mode m : all_modes) REQUIRE(rep.verdict(m) == mode_is_universal(m));
    REQUIRE(rep.witnesses.empty());
}

TEST_CASE("fullReport on FIX2 carries witnesses") {
    FiniteStructure m = testutil::load_fixture("fix2_c4.json");
    BlockType phi{{{"x"}}, {"y"}, {parse_formula("R(x,y)", m.signature)}};
    PreservationReport rep = full_report(m, phi, {Property::unary({0, 1})}, Property::unary({1}));
    REQUIRE_FALSE(rep.verdict(Mode::ForallPartiallyPreserved));
    REQUIRE(rep.witness(Mode::ForallPartiallyPreserved).value() == ParamTuple{{1}});
    REQUIRE(rep.verdict(Mode::ExistsPartiallyPreserved));
    REQUIRE(rep.witness(Mode::ExistsPartiallyPreserved).value() == ParamTuple{{0}});
}

TEST_CASE("empty solution sets count as preserved and disjoint, flagged") {
    FiniteStructure m = testutil::load_fixture("fix2_c4.json");
    BlockType phi{{{"x"}}, {"y"}, {Formula::falsity()}};
    Property q = Property::unary({1});
    PreservationReport rep = full_report(m, phi, {Property::unary({0, 2})}, q);
    REQUIRE(rep.verdict(Mode::TotallyPreserved));
    REQUIRE(rep.verdict(Mode::TotallyDisjoint));
    REQUIRE_FALSE(rep.verdict(Mode::ExistsPartiallyPreserved));
    REQUIRE(rep.empty_solution_flags == std::set<Tuple>{{0}, {2}});
}

TEST_CASE("mode laws on seeded random instances") {
    testutil::Rng rng(2024);
    int nonempty_products = 0;
    for (int trial = 0; trial < 200; ++trial) {
        FiniteStructure m = testutil::random_structure(rng, 5);
        int blocks = testutil::rand_int(rng, 0, 2);
        BlockType phi = random_type(rng, m, blocks, 3);
        std::vector<Property> ps;
        for (int i = 0; i < blocks; ++i) ps.push_back(testutil::random_property(rng, m.size, 1));
        Property q = testutil::random_property(rng, m.size, 1);
        PreservationReport rep = full_report(m, phi, ps, q);

        // Implication lattice under a nonempty product.
        if (!rep.empty_product_flag) {
            ++nonempty_products;
            REQUIRE((!rep.verdict(Mode::TotallyPreserved) ||
                     rep.verdict(Mode::ExistentiallyPreserved)));
            REQUIRE((!rep.verdict(Mode::ForallPartiallyPreserved) ||
                     rep.verdict(Mode::ExistsPartiallyPreserved)));
            REQUIRE((!rep.verdict(Mode::ForallPartiallyNonPreserved) ||
                     rep.verdict(Mode::ExistsPartiallyNonPreserved)));
            REQUIRE((!rep.verdict(Mode::TotallyDisjoint) ||
                     rep.verdict(Mode::ExistentiallyDisjoint)));
        }

        // Duality against the complemented target.
        Property qbar = complement_property(m, q);
        REQUIRE(rep.verdict(Mode::TotallyPreserved) ==
                check_preservation(m, phi, ps, qbar, Mode::TotallyDisjoint));
        REQUIRE(rep.verdict(Mode::ExistentiallyPreserved) ==
                check_preservation(m, phi, ps, qbar, Mode::ExistentiallyDisjoint));

        // Product reduction is invariant for every mode.
        auto [phi2, product] = reduce_to_product(phi, ps);
        for (Mode mode : all_modes)
            REQUIRE(rep.verdict(mode) ==
                    check_preservation(m, phi2, {product}, q, mode));
    }
    REQUIRE(nonempty_products > 50);
}

TEST_CASE("the lattice converses fail on FIX1") {
    Fix1 f;
    Property both = Property::unary({0, 2});
    PreservationReport rep = full_report(f.m, f.phi, {both}, f.q);
    REQUIRE(rep.verdict(Mode::ExistentiallyPreserved));
    REQUIRE_FALSE(rep.verdict(Mode::TotallyPreserved));
    REQUIRE(rep.verdict(Mode::ExistsPartiallyPreserved));
    REQUIRE_FALSE(rep.verdict(Mode::ForallPartiallyPreserved));
    REQUIRE(rep.verdict(Mode::ExistsPartiallyNonPreserved));
    REQUIRE_FALSE(rep.verdict(Mode::ForallPartiallyNonPreserved));
    REQUIRE(rep.verdict(Mode::ExistentiallyDisjoint));
    REQUIRE_FALSE(rep.verdict(Mode::TotallyDisjoint));
}

TEST_CASE("reduceToProduct merges blocks over FIX4") {
    FiniteStructure m = testutil::load_fixture("fix4_z4.json");
    BlockType phi{{{"x1"}, {"x2"}}, {"y"}, {parse_formula("add(x1,x2) = y", m.signature)}};
    Property evens = Property::unary({0, 2});
    auto [merged, product] = reduce_to_product(phi, {evens, evens});
    REQUIRE(merged.parameter_blocks == std::vector<std::vector<std::string>>{{"x1", "x2"}});
    REQUIRE(product.arity == 2);
    REQUIRE(product.tuples == TupleSet{{0, 0}, {0, 2}, {2, 0}, {2, 2}});

    // n = 1 and n = 0 degenerate cases.
    BlockType single{{{"x1"}}, {"y"}, {parse_formula("add(x1,x1) = y", m.signature)}};
    auto [same, sp] = reduce_to_product(single, {evens});
    REQUIRE(same.parameter_blocks == single.parameter_blocks);
    REQUIRE(sp == evens);

    BlockType closed{{}, {"y"}, {parse_formula("add(y,y) = y", m.signature)}};
    auto [unchanged, unit] = reduce_to_product(closed, {});
    REQUIRE(unchanged.parameter_blocks.empty());
    REQUIRE(unit.arity == 0);
    REQUIRE(unit.tuples == TupleSet{{}});
}

TEST_CASE("monotony of total preservation") {
    testutil::Rng rng(7);
    int onto = 0;
    for (int trial = 0; trial < 200; ++trial) {
        FiniteStructure m = testutil::random_structure(rng, 5);
        BlockType phi = random_type(rng, m, 1, 2);
        Property p = testutil::random_property(rng, m.size, 1);
        Property q = testutil::random_property(rng, m.size, 1);
        if (!check_preservation(m, phi, {p}, q, Mode::TotallyPreserved)) continue;
        ++onto;
        // Shrink P, grow Q, grow Phi.
        Property p2(1, {});
        for (const auto& t : p.tuples)
            if (rng() % 2) p2.tuples.insert(t);
        Property q2 = q;
        testutil::Rng extra(trial);
        for (int v = 0; v < m.size; ++v)
            if (extra() % 2) q2.tuples.insert(Tuple{v});
        BlockType phi2 = phi;
        phi2.formulas.push_back(
            testutil::random_formula(rng, m, {"x1", "y"}));
        REQUIRE(check_preservation(m, phi2, {p2}, q2, Mode::TotallyPreserved));
    }
    REQUIRE(onto > 20);
}

TEST_CASE("union law for disjunction and conjunction of types") {
    testutil::Rng rng(13);
    int used = 0, skipped = 0;
    for (int trial = 0; trial < 300; ++trial) {
        FiniteStructure m = testutil::random_structure(rng, 5);
        BlockType phi = random_type(rng, m, 1, 2);
        BlockType psi = random_type(rng, m, 1, 2);
        psi.parameter_blocks = phi.parameter_blocks;
        psi.result_block = phi.result_block;
        Property p = testutil::random_property(rng, m.size, 1);
        Property q = testutil::random_property(rng, m.size, 1);
        Property q2 = testutil::random_property(rng, m.size, 1);
        if (!check_preservation(m, phi, {p}, q, Mode::TotallyPreserved)) continue;
        if (!check_preservation(m, psi, {p}, q2, Mode::TotallyPreserved)) continue;
        ++used;
        Property quni(1, q.tuples);
        quni.tuples.insert(q2.tuples.begin(), q2.tuples.end());
        REQUIRE(check_preservation(m, type_disjunction(phi, psi), {p}, quni,
                                   Mode::TotallyPreserved));

        // Conjunction instances are skipped when every parameter tuple has
        // an empty conjunct solution set.
        BlockType conj = type_conjunction(phi, psi);
        bool any_solution = false;
        for (const auto& a : p.tuples)
            if (!solution_set(m, conj, {a}).empty()) any_solution = true;
        if (!any_solution) {
            ++skipped;
            continue;
        }
        Property qint(1, {});
        for (const auto& t : q.tuples)
            if (q2.contains(t)) qint.tuples.insert(t);
        REQUIRE(check_preservation(m, conj, {p}, qint, Mode::TotallyPreserved));
    }
    REQUIRE(used > 20);
    // The skip path itself is exercised.
    REQUIRE(skipped > 0);
}

TEST_CASE("conjunction reduction both ways") {
    testutil::Rng rng(19);
    for (int trial = 0; trial < 150; ++trial) {
        FiniteStructure m = testutil::random_structure(rng, 5);
        BlockType phi = random_type(rng, m, 1, 3);
        Property p = testutil::random_property(rng, m.size, 1);
        Property q = testutil::random_property(rng, m.size, 1);

        // Some sub-list conjunction preserving => the whole type preserves.
        std::size_t k = phi.formulas.size();
        for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < k; ++i)
                if (mask & (std::size_t{1} << i)) idx.push_back(i);
            BlockType sub = phi.conjunction_of(idx);
            for (Mode mode : {Mode::TotallyPreserved, Mode::ExistentiallyPreserved,
                              Mode::TotallyDisjoint, Mode::ExistentiallyDisjoint})
                if (check_preservation(m, sub, {p}, q, mode))
                    REQUIRE(check_preservation(m, phi, {p}, q, mode));
        }

        // Partial modes push down to every sub-list conjunction.
        for (Mode mode : {Mode::ForallPartiallyPreserved, Mode::ExistsPartiallyPreserved,
                          Mode::ExistsPartiallyNonPreserved, Mode::ForallPartiallyNonPreserved}) {
            if (!check_preservation(m, phi, {p}, q, mode)) continue;
            for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
                std::vector<std::size_t> idx;
                for (std::size_t i = 0; i < k; ++i)
                    if (mask & (std::size_t{1} << i)) idx.push_back(i);
                REQUIRE(check_preservation(m, phi.conjunction_of(idx), {p}, q, mode));
            }
        }
    }
}

TEST_CASE("typeDefinedSetCharacterization on the fixtures") {
    FiniteStructure c4 = testutil::load_fixture("fix2_c4.json");
    BlockType edge{{{"x"}}, {"y"}, {parse_formula("R(x,y)", c4.signature)}};
    auto td = type_defined_set_characterization(c4, edge, {Tuple{0}});
    REQUIRE(td.q == Property::unary({1, 3}));
    REQUIRE(td.checks);

    BlockType contradiction{{{"x"}}, {"y"}, {Formula::falsity()}};
    auto empty = type_defined_set_characterization(c4, contradiction, {Tuple{0}});
    REQUIRE(empty.q.empty());
    REQUIRE(empty.checks);

    Fix1 f;
    auto fx = type_defined_set_characterization(f.m, f.phi, {Tuple{0}});
    REQUIRE(fx.q == Property::unary({1}));
    REQUIRE(fx.checks);
}

TEST_CASE("preservingSublattice collects preserving sub-lists") {
    FiniteStructure c4 = testutil::load_fixture("fix2_c4.json");
    // Single tautology: family {M}.
    BlockType taut{{}, {"y"}, {Formula::truth()}};
    auto rep = preserving_sublattice(c4, taut, {}, Property::full(4, 1));
    REQUIRE(rep.family == std::vector<Property>{Property::full(4, 1)});
    REQUIRE(rep.closed_under_union);
    REQUIRE(rep.closed_under_intersection);
    REQUIRE(rep.least_is_phi_set);

    // Two formulas whose proper sub-lists escape Q: only the full list is
    // preserving.
    BlockType pair{{}, {"y"},
                   {parse_formula("!(y = 1)", c4.signature), parse_formula("!(y = 2)", c4.signature)}};
    Property q = Property::unary({0, 3});
    auto rep2 = preserving_sublattice(c4, pair, {}, q);
    REQUIRE(rep2.family == std::vector<Property>{Property::unary({0, 3})});
    REQUIRE(rep2.least_is_phi_set);

    // Nested solutions: a chain of three sets closed under both operations.
    BlockType nested{{}, {"y"},
                     {parse_formula("y = 0", c4.signature),
                      parse_formula("y = 0 | y = 1", c4.signature),
                      parse_formula("y = 0 | y = 1 | y = 2", c4.signature)}};
    auto rep3 = preserving_sublattice(c4, nested, {}, Property::full(4, 1));
    REQUIRE(rep3.family.size() == 3);
    REQUIRE(rep3.closed_under_union);
    REQUIRE(rep3.closed_under_intersection);
    REQUIRE(rep3.least_is_phi_set);
    REQUIRE(rep3.phi_set == Property::unary({0}));
    REQUIRE(rep3.maximal_elements == std::vector<Property>{Property::unary({0, 1, 2})});

    // Incomparable solutions: the sub-list family is intersection-closed
    // but not union-closed; the diagnostics report it.
    BlockType incomparable{{}, {"y"},
                           {parse_formula("y = 0 | y = 1", c4.signature),
                            parse_formula("y = 1 | y = 2", c4.signature)}};
    auto rep4 = preserving_sublattice(c4, incomparable, {}, Property::full(4, 1));
    REQUIRE(rep4.family.size() == 3);
    REQUIRE(rep4.closed_under_intersection);
    REQUIRE_FALSE(rep4.closed_under_union);
    REQUIRE(rep4.maximal_elements.size() == 2);

    // Non-preserving input is an error; oversized types hit the budget.
    BlockType bad{{}, {"y"}, {parse_formula("y = 1", c4.signature)}};
    REQUIRE_THROWS_AS(preserving_sublattice(c4, bad, {}, Property::unary({0})), ValidationError);
    BlockType big{{}, {"y"}, std::vector<Formula>(17, Formula::truth())};
    REQUIRE_THROWS_AS(preserving_sublattice(c4, big, {}, Property::full(4, 1)), BudgetError);
}

TEST_CASE("check_preservation validates arities") {
    Fix1 f;
    REQUIRE_THROWS_AS(check_preservation(f.m, f.phi, {}, f.q, Mode::TotallyPreserved),
                      ValidationError);
    REQUIRE_THROWS_AS(
        check_preservation(f.m, f.phi, {Property(2, {})}, f.q, Mode::TotallyPreserved),
        ValidationError);
    REQUIRE_THROWS_AS(
        check_preservation(f.m, f.phi, {f.p1}, Property(2, {}), Mode::TotallyPreserved),
        ValidationError);
}

TEST_CASE("mode names round-trip and the alias resolves") {
    for (Mode m : all_modes) REQUIRE(parse_mode(mode_name(m)) == m);
    REQUIRE(parse_mode("totally-non-preserved") == Mode::ForallPartiallyNonPreserved);
    REQUIRE_THROWS_AS(parse_mode("sideways-preserved"), ValidationError);
}
