#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "cycad/ci.hpp"

using namespace cycad;

namespace {

// health fixture: a three node loop feeding two sinks
DirectedGraph health_graph() {
    return DirectedGraph({"SE", "LS", "HI", "X", "Y"},
                         {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {1, 3}, {2, 3},
                          {0, 4}, {1, 4}, {2, 4}, {3, 4}},
                         {0, 1, 2, 3, 4});
}

Dataset chain_data(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset d;
    d.columns = {"A", "B", "C"};
    d.values.resize(n, 3);
    d.seed = seed;
    for (int i = 0; i < n; ++i) {
        const double a = noise(rng);
        const double b = 0.8 * a + noise(rng);
        const double c = 0.8 * b + noise(rng);
        d.values(i, 0) = a;
        d.values(i, 1) = b;
        d.values(i, 2) = c;
    }
    return d;
}

}  // namespace

TEST_CASE("oracle verdicts mirror graph separation") {
    DirectedGraph g = health_graph();
    GraphOracle oracle(g);
    for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b) {
            CHECK(oracle.independent(a, b, {}) ==
                  is_separated(g, SeparationKind::SigmaSeparation, a, b, {}));
        }
    // conditioning inside the loop keeps the walk open
    CHECK(!oracle.independent(0, 2, NodeSet{1}));
    CHECK(oracle.variables() == g.observed());
    CHECK(oracle.graph() == g);
}

TEST_CASE("oracle restricts queries to observed nodes") {
    DirectedGraph g({"A", "B", "H"}, {{2, 0}, {2, 1}}, {0, 1});
    GraphOracle oracle(g);
    CHECK(!oracle.independent(0, 1, {}));
    CHECK_THROWS_AS(oracle.independent(0, 2, {}), std::invalid_argument);
    CHECK_THROWS_AS(oracle.independent(0, 1, NodeSet{2}),
                    std::invalid_argument);
}

TEST_CASE("query validation rejects degenerate arguments") {
    GraphOracle oracle(health_graph());
    CHECK_THROWS_AS(oracle.independent(0, 0, {}), std::invalid_argument);
    CHECK_THROWS_AS(oracle.independent(0, 1, NodeSet{0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(GraphOracle(health_graph(), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GraphOracle(health_graph(), 1.0), std::invalid_argument);
}

TEST_CASE("the counter counts distinct queries only") {
    GraphOracle oracle(health_graph());
    CHECK(oracle.tests_used() == 0);
    oracle.independent(0, 4, NodeSet{1, 2});
    CHECK(oracle.tests_used() == 1);
    oracle.independent(0, 4, NodeSet{1, 2});  // cache hit
    oracle.independent(4, 0, NodeSet{1, 2});  // symmetric key
    CHECK(oracle.tests_used() == 1);
    oracle.independent(0, 4, NodeSet{1});
    CHECK(oracle.tests_used() == 2);
}

TEST_CASE("rejudging at another level reuses the stored statistic") {
    Dataset d = chain_data(2000, 42);
    FisherZ test(d, 0.01);
    const bool at_default = test.independent(0, 2, NodeSet{1});
    CHECK(test.tests_used() == 1);
    // near-certain acceptance and rejection levels
    CHECK(test.independent_at(0, 2, NodeSet{1}, 1e-12) == true);
    CHECK(test.tests_used() == 1);
    CHECK(at_default == test.independent_at(0, 2, NodeSet{1}, 0.01));
}

TEST_CASE("association strength is data-backed only") {
    GraphOracle oracle(health_graph());
    CHECK(!oracle.association(0, 1, {}).has_value());
    CHECK(oracle.data() == nullptr);

    Dataset d = chain_data(2000, 7);
    FisherZ test(d);
    auto direct = test.association(0, 1, {});
    auto shielded = test.association(0, 2, NodeSet{1});
    REQUIRE(direct.has_value());
    REQUIRE(shielded.has_value());
    CHECK(*direct > *shielded);
    CHECK(test.data() != nullptr);
    CHECK(test.sample_count() == 2000);
}

TEST_CASE("partial correlation recovers the chain structure") {
    Dataset d = chain_data(15000, 3);
    FisherZ test(d, 0.01);
    CHECK(!test.independent(0, 1, {}));
    CHECK(!test.independent(1, 2, {}));
    CHECK(!test.independent(0, 2, {}));
    CHECK(test.independent(0, 2, NodeSet{1}));
    CHECK(test.variables() == NodeSet({0, 1, 2}));
}

TEST_CASE("too large a conditioning set raises") {
    // z needs n - |s| - 3 > 0; four rows leave no freedom once s = {B}
    Dataset d = chain_data(4, 9);
    FisherZ test(d);
    CHECK_THROWS_AS(test.independent(0, 2, NodeSet{1}),
                    std::invalid_argument);
    CHECK_NOTHROW(test.independent(0, 2, {}));
}

TEST_CASE("data columns out of range raise") {
    Dataset d = chain_data(100, 11);
    FisherZ test(d);
    CHECK_THROWS_AS(test.independent(0, 3, {}), std::invalid_argument);
    CHECK_THROWS_AS(test.independent(0, 2, NodeSet{5}),
                    std::invalid_argument);
}

TEST_CASE("independent pairs are rarely rejected") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, 1.0);
    int rejections = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        Dataset d;
        d.columns = {"A", "B"};
        d.values.resize(500, 2);
        for (int i = 0; i < 500; ++i) {
            d.values(i, 0) = noise(rng);
            d.values(i, 1) = noise(rng);
        }
        FisherZ test(d, 0.01);
        if (!test.independent(0, 1, {})) ++rejections;
    }
    // loose bound; the calibration run pins the rate tightly
    CHECK(rejections <= 10);
}
