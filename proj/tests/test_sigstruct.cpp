#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "preskit/io.hpp"
#include "preskit/structure.hpp"
#include "support.hpp"

using namespace preskit;

TEST_CASE("loadStructure reads the Z4 fixture") {
    FiniteStructure m = testutil::load_fixture("fix4_z4.json");
    REQUIRE(m.size == 4);
    REQUIRE(m.signature.functions.at("add") == 2);
    // Recompute the table by modular arithmetic.
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) REQUIRE(m.fn_value("add", {x, y}) == (x + y) % 4);
    REQUIRE(m.fn_value("add", {3, 2}) == 1);
}

TEST_CASE("loadStructure handles the one-point structure") {
    FiniteStructure m = load_structure(R"({"universe": 1})");
    REQUIRE(m.size == 1);
    REQUIRE(m.signature.functions.empty());
    REQUIRE(m.signature.relations.empty());
}

TEST_CASE("loadStructure rejects out-of-range relation entries naming the symbol") {
    std::string text = R"({"universe": 4, "relations": {"R": {"arity": 2, "tuples": [[0, 4]]}}})";
    try {
        load_structure(text);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        REQUIRE(std::string(e.what()).find("R") != std::string::npos);
    }
}

TEST_CASE("loadStructure rejects non-total function tables naming the symbol") {
    std::string text = R"({"universe": 3, "functions": {"g": {"arity": 1, "table": [0, 1]}}})";
    REQUIRE_THROWS_MATCHES(load_structure(text), ValidationError,
                           Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("g")));
}

TEST_CASE("loadStructure enforces the universe cap") {
    REQUIRE_THROWS_AS(load_structure(R"({"universe": 65})"), ValidationError);
    REQUIRE_NOTHROW(load_structure(R"({"universe": 65})", 128));
}

TEST_CASE("complementProperty on FIX2") {
    FiniteStructure m = testutil::load_fixture("fix2_c4.json");
    Property p = Property::unary({0, 2});
    Property c = complement_property(m, p);
    REQUIRE(c == Property::unary({1, 3}));
    REQUIRE(complement_property(m, c) == p); // involution

    Property empty2(2, {});
    REQUIRE(complement_property(m, empty2).size() == 16);
}

TEST_CASE("complementProperty on FIX5 pairs") {
    FiniteStructure m = testutil::load_fixture("fix5_2comp.json");
    Property p(2, {Tuple{0, 1}});
    Property c = complement_property(m, p);
    REQUIRE(c.size() == 8);
    REQUIRE(!c.contains({0, 1}));
}

TEST_CASE("cartesianProduct basics") {
    Property p1 = Property::unary({0});
    Property p2 = Property::unary({2});
    Property prod = cartesian_product({p1, p2});
    REQUIRE(prod.arity == 2);
    REQUIRE(prod.tuples == TupleSet{{0, 2}});

    REQUIRE(cartesian_product({Property::unary({0, 1}), Property(1, {})}).empty());

    Property q = cartesian_product({Property::unary({0, 1}), Property::unary({1, 2})});
    REQUIRE(q.tuples == TupleSet{{0, 1}, {0, 2}, {1, 1}, {1, 2}});

    // Empty factor list: the arity-0 unit.
    Property unit = cartesian_product({});
    REQUIRE(unit.arity == 0);
    REQUIRE(unit.tuples == TupleSet{{}});
}

TEST_CASE("complement cardinality identity over random properties") {
    FiniteStructure m = testutil::load_fixture("fix2_c4.json");
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        int arity = static_cast<int>(rng() % 3);
        Property p(arity, {});
        for_each_tuple(m.size, arity, [&](const Tuple& t) {
            if (rng() % 2) p.tuples.insert(t);
        });
        Property c = complement_property(m, p);
        REQUIRE(p.size() + c.size() ==
                checked_pow(static_cast<std::uint64_t>(m.size), static_cast<std::uint64_t>(arity)));
    }
}

TEST_CASE("cartesianProduct cardinality is the product of factor cardinalities") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Property> factors;
        std::uint64_t expect = 1;
        int count = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < count; ++i) {
            int arity = 1 + static_cast<int>(rng() % 2);
            Property p(arity, {});
            for_each_tuple(4, arity, [&](const Tuple& t) {
                if (rng() % 3) p.tuples.insert(t);
            });
            expect *= p.size();
            factors.push_back(std::move(p));
        }
        REQUIRE(cartesian_product(factors).size() == expect);
    }
}

TEST_CASE("serializer round-trip reaches a byte-normal form") {
    for (const char* name : {"fix1_split_map.json", "fix2_c4.json", "fix3_p3.json", "fix4_z4.json",
                             "fix5_2comp.json"}) {
        std::string text = read_file(testutil::fixture_path(name));
        std::string normal = serialize_structure(load_structure(text));
        REQUIRE(serialize_structure(load_structure(normal)) == normal);
    }
}

TEST_CASE("constants load as arity-0 functions and serialize back to constants") {
    std::string text = R"({"universe": 3, "constants": {"c": 2}})";
    FiniteStructure m = load_structure(text);
    REQUIRE(m.signature.functions.at("c") == 0);
    REQUIRE(m.fn_value("c", {}) == 2);
    std::string normal = serialize_structure(m);
    REQUIRE(normal.find("constants") != std::string::npos);
    REQUIRE(serialize_structure(load_structure(normal)) == normal);
}

TEST_CASE("partition validation") {
    NamedPartition part;
    part.blocks = {Property::unary({0, 2}), Property::unary({1, 3})};
    REQUIRE_NOTHROW(part.validate(4));
    REQUIRE(part.block_of(2) == 0);
    REQUIRE(part.block_of(3) == 1);

    NamedPartition overlap;
    overlap.blocks = {Property::unary({0, 1}), Property::unary({1, 2})};
    REQUIRE_THROWS_AS(overlap.validate(3), ValidationError);

    NamedPartition gap;
    gap.blocks = {Property::unary({0})};
    REQUIRE_THROWS_AS(gap.validate(2), ValidationError);
}

TEST_CASE("property files round-trip") {
    Property p = testutil::load_fixture_property("fix1_p1.json");
    REQUIRE(p == Property::unary({0}));
    REQUIRE(load_property(serialize_property(p)) == p);
}
