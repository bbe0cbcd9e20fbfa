#include <doctest.h>

#include <random>
#include <stdexcept>

#include "cycad/acyclify.hpp"
#include "cycad/lsas.hpp"
#include "support/corpus.hpp"
#include "support/naive.hpp"

using namespace cycad;
using namespace cycad::testsupport;

namespace {

LsasOutcome run_on_graph(const DirectedGraph& g, int x, int y,
                         MbAlgorithm alg = MbAlgorithm::Tc,
                         std::optional<int> max_z = std::nullopt) {
    GraphOracle oracle(g);
    return run_lsas(oracle, x, y, alg, max_z);
}

}  // namespace

TEST_CASE("an instrument identifies the mediated effect") {
    DirectedGraph g({"W", "X", "Y"}, {{0, 1}, {1, 2}}, {0, 1, 2});
    LsasOutcome out = run_on_graph(g, 1, 2);
    REQUIRE(out.status == LsasOutcome::Status::Identified);
    REQUIRE(out.identified.has_value());
    CHECK(out.identified->witness == 0);
    CHECK(out.identified->z.empty());
    CHECK(out.tests_used > 0);
    CHECK(!out.effect.has_value());  // no data backend attached
}

TEST_CASE("an observed confounder joins the adjustment set") {
    DirectedGraph g({"W", "U", "X", "Y"},
                    {{0, 2}, {1, 2}, {1, 3}, {2, 3}}, {0, 1, 2, 3});
    LsasOutcome out = run_on_graph(g, 2, 3);
    REQUIRE(out.status == LsasOutcome::Status::Identified);
    REQUIRE(out.identified.has_value());
    CHECK(out.identified->witness == 0);
    CHECK(out.identified->z == NodeSet{1});
    // the certified set really satisfies the adjustment criterion
    CHECK(naive_backdoor(g, 2, 3, out.identified->z));
}

TEST_CASE("a separating set proves the edge absent") {
    DirectedGraph g({"U", "X", "Y"}, {{0, 1}, {0, 2}}, {0, 1, 2});
    LsasOutcome out = run_on_graph(g, 1, 2);
    REQUIRE(out.status == LsasOutcome::Status::NoEffect);
    REQUIRE(out.no_effect.has_value());
    CHECK(out.no_effect->separating);
    CHECK(out.no_effect->z == NodeSet{0});
    CHECK(out.effect == 0.0);
}

TEST_CASE("a witness proves the edge absent under latent confounding") {
    // H confounds X and Y but is hidden; W is bound to X yet clear of Y
    DirectedGraph g({"W", "X", "Y", "H"},
                    {{0, 1}, {3, 1}, {3, 2}}, {0, 1, 2});
    LsasOutcome out = run_on_graph(g, 1, 2);
    REQUIRE(out.status == LsasOutcome::Status::NoEffect);
    REQUIRE(out.no_effect.has_value());
    CHECK(!out.no_effect->separating);
    CHECK(out.no_effect->witness == 0);
    CHECK(!g.has_edge(1, 2));
}

TEST_CASE("edge absence evidence beats identification evidence") {
    // the mediator chain would satisfy the identification rule for the
    // pair (X, Z) if scanned first, but X and Z are separable by {Y}
    DirectedGraph g({"W", "X", "Y", "Z"}, {{0, 1}, {1, 2}, {2, 3}},
                    {0, 1, 2, 3});
    LsasOutcome out = run_on_graph(g, 1, 3);
    REQUIRE(out.status == LsasOutcome::Status::NoEffect);
    CHECK(out.no_effect->separating);
    CHECK(out.no_effect->z == NodeSet{2});
}

TEST_CASE("hidden confounding with a real edge stays undecidable") {
    DirectedGraph g({"X", "Y", "H"}, {{0, 1}, {2, 0}, {2, 1}}, {0, 1});
    LsasOutcome out = run_on_graph(g, 0, 1);
    CHECK(out.status == LsasOutcome::Status::Undecidable);
    CHECK(!out.effect.has_value());
    CHECK(!out.identified.has_value());
    CHECK(!out.no_effect.has_value());
}

TEST_CASE("the subset cap can hide the separating set") {
    DirectedGraph g({"U1", "U2", "X", "Y"},
                    {{0, 2}, {0, 3}, {1, 2}, {1, 3}}, {0, 1, 2, 3});
    LsasOutcome capped = run_on_graph(g, 2, 3, MbAlgorithm::Tc, 1);
    CHECK(capped.status == LsasOutcome::Status::Undecidable);
    LsasOutcome open = run_on_graph(g, 2, 3);
    REQUIRE(open.status == LsasOutcome::Status::NoEffect);
    CHECK(open.no_effect->z == NodeSet({0, 1}));
}

TEST_CASE("conclusions are sound on oracle graphs") {
    std::mt19937_64 rng(905);
    PreTreatmentOptions opt;
    opt.max_nodes = 8;
    opt.max_latents = 2;
    int decided = 0;
    for (int i = 0; i < 60; ++i) {
        PreTreatment fixture = random_pretreatment(rng, opt);
        const DirectedGraph& g = fixture.g;
        LsasOutcome out = run_on_graph(g, fixture.x, fixture.y);
        if (out.status == LsasOutcome::Status::Identified) {
            ++decided;
            CHECK(g.has_edge(fixture.x, fixture.y));
            CHECK(naive_backdoor(g, fixture.x, fixture.y,
                                 out.identified->z));
        } else if (out.status == LsasOutcome::Status::NoEffect) {
            ++decided;
            CHECK(!g.has_edge(fixture.x, fixture.y));
        }
    }
    CHECK(decided > 0);
}

TEST_CASE("rewriting the cycles away leaves the verdict unchanged") {
    std::mt19937_64 rng(333);
    PreTreatmentOptions opt;
    opt.max_nodes = 7;
    opt.cyclic_prob = 1.0;
    for (int i = 0; i < 25; ++i) {
        PreTreatment fixture = random_pretreatment(rng, opt);
        LsasOutcome direct = run_on_graph(fixture.g, fixture.x, fixture.y);
        LsasOutcome rewritten =
            run_on_graph(acyclify(fixture.g), fixture.x, fixture.y);
        CHECK(direct.status == rewritten.status);
    }
}

TEST_CASE("every blanket algorithm reaches the same verdict") {
    DirectedGraph g({"W", "U", "X", "Y"},
                    {{0, 2}, {1, 2}, {1, 3}, {2, 3}}, {0, 1, 2, 3});
    for (MbAlgorithm alg : {MbAlgorithm::Tc, MbAlgorithm::FastIamb,
                            MbAlgorithm::Iamb, MbAlgorithm::HitonMb}) {
        LsasOutcome out = run_on_graph(g, 2, 3, alg);
        CHECK(out.status == LsasOutcome::Status::Identified);
    }
}

TEST_CASE("treatment and outcome must be valid provider variables") {
    DirectedGraph g({"X", "Y", "H"}, {{0, 1}, {2, 1}}, {0, 1});
    GraphOracle oracle(g);
    CHECK_THROWS_AS(run_lsas(oracle, 0, 0, MbAlgorithm::Tc),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_lsas(oracle, 0, 2, MbAlgorithm::Tc),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_lsas(oracle, 0, 1, MbAlgorithm::Tc, -1),
                    std::invalid_argument);
}

TEST_CASE("regression recovers a known coefficient") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise(0.0, 1.0);
    const int n = 20000;
    Dataset d;
    d.columns = {"X", "Y", "Z"};
    d.values.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        const double z = noise(rng);
        const double x = 0.5 * z + noise(rng);
        const double y = 2.0 + 0.7 * x + 0.9 * z + noise(rng);
        d.values(i, 0) = x;
        d.values(i, 1) = y;
        d.values(i, 2) = z;
    }
    CHECK(estimate_effect(d, 0, 1, NodeSet{2}) ==
          doctest::Approx(0.7).epsilon(0.03));
    // omitting the confounder biases the coefficient upward
    CHECK(estimate_effect(d, 0, 1, {}) > 0.8);
}

TEST_CASE("degenerate regressions are rejected") {
    Dataset d;
    d.columns = {"X", "Y", "Z"};
    d.values.resize(50, 3);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        d.values(i, 0) = noise(rng);
        d.values(i, 1) = noise(rng);
        d.values(i, 2) = d.values(i, 0);  // collinear with X
    }
    CHECK_THROWS_AS(estimate_effect(d, 0, 1, NodeSet{2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_effect(d, 0, 0, {}), std::invalid_argument);
    CHECK_THROWS_AS(estimate_effect(d, 0, 1, NodeSet{0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_effect(d, 0, 5, {}), std::invalid_argument);
}

TEST_CASE("a data backend attaches an estimate to identification") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> noise(0.0, 1.0);
    const int n = 30000;
    // W -> X -> Y with effect 0.8
    Dataset d;
    d.columns = {"W", "X", "Y"};
    d.values.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        const double w = noise(rng);
        const double x = 0.7 * w + noise(rng);
        const double y = 0.8 * x + noise(rng);
        d.values(i, 0) = w;
        d.values(i, 1) = x;
        d.values(i, 2) = y;
    }
    FisherZ test(d, 0.01);
    LsasOutcome out = run_lsas(test, 1, 2, MbAlgorithm::Iamb);
    REQUIRE(out.status == LsasOutcome::Status::Identified);
    REQUIRE(out.effect.has_value());
    CHECK(*out.effect == doctest::Approx(0.8).epsilon(0.03));
    LsasOutcome silent =
        run_lsas(test, 1, 2, MbAlgorithm::Iamb, std::nullopt, false);
    CHECK(!silent.effect.has_value());
}
