#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cycad/acyclify.hpp"
#include "cycad/mb.hpp"
#include "cycad/scm.hpp"

using namespace cycad;

namespace {

GenConfig base_config() {
    GenConfig cfg;
    cfg.node_count = 8;
    cfg.edge_count = 12;
    cfg.latent_count = 2;
    cfg.cyclic = true;
    cfg.form = Form::Linear;
    cfg.noise_mode = NoiseMode::Gaussian;
    cfg.edge_xy = true;
    cfg.seed = 2024;
    return cfg;
}

double column_mean(const Dataset& d, int col) {
    return d.values.col(col).mean();
}

}  // namespace

TEST_CASE("generated models match their configuration") {
    GenConfig cfg = base_config();
    Scm scm = generate_scm(cfg);
    CHECK(scm.graph.node_count() == 8);
    CHECK(scm.graph.edge_count() == 12);
    CHECK(scm.graph.observed().size() == 6);
    CHECK(scm.graph.has_edge(scm.treatment, scm.outcome));
    CHECK(scm.graph.is_observed(scm.treatment));
    CHECK(scm.graph.is_observed(scm.outcome));
}

TEST_CASE("edge flag controls the treatment edge") {
    GenConfig cfg = base_config();
    cfg.edge_xy = false;
    Scm scm = generate_scm(cfg);
    CHECK(scm.graph.edge_count() == 12);
    CHECK(!scm.graph.has_edge(scm.treatment, scm.outcome));
}

TEST_CASE("generated graphs have the pre-treatment shape") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        GenConfig cfg = base_config();
        cfg.seed = seed;
        cfg.cyclic = seed % 2 == 0;
        cfg.edge_xy = seed % 3 == 0;
        Scm scm = generate_scm(cfg);
        CHECK(descendants(scm.graph, scm.outcome).empty());
        CHECK(children(scm.graph, scm.treatment)
                  .subset_of(NodeSet{scm.outcome}));
        // something observed feeds each end of the query
        CHECK(!parents(scm.graph, scm.treatment).empty());
        CHECK(!parents(scm.graph, scm.outcome).empty());
    }
}

TEST_CASE("cyclic configs contain a covariate loop") {
    GenConfig cfg = base_config();
    Scm scm = generate_scm(cfg);
    bool found = false;
    for (const auto& comp : strongly_connected_components(scm.graph)) {
        if (comp.size() < 2) continue;
        found = true;
        CHECK(!comp.contains(scm.treatment));
        CHECK(!comp.contains(scm.outcome));
    }
    CHECK(found);
}

TEST_CASE("acyclic configs stay acyclic") {
    GenConfig cfg = base_config();
    cfg.cyclic = false;
    Scm scm = generate_scm(cfg);
    CHECK(is_acyclic(scm.graph));
    CHECK(acyclify(scm.graph) == scm.graph);
}

TEST_CASE("generation is deterministic in the seed") {
    GenConfig cfg = base_config();
    Scm a = generate_scm(cfg);
    Scm b = generate_scm(cfg);
    CHECK(a.graph == b.graph);
    CHECK((a.weights.array() == b.weights.array()).all());
    cfg.seed = 2025;
    Scm c = generate_scm(cfg);
    const bool same_graph = a.graph == c.graph;
    const bool same_weights = a.weights.rows() == c.weights.rows() &&
                              (a.weights.array() == c.weights.array()).all();
    CHECK(!(same_graph && same_weights));
}

TEST_CASE("weights sit on edges with bounded magnitude") {
    GenConfig cfg = base_config();
    Scm scm = generate_scm(cfg);
    const int n = scm.graph.node_count();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double w = scm.weights(j, i);
            if (scm.graph.has_edge(i, j)) {
                CHECK(std::abs(w) >= 0.3 * 0.9);  // one rescale allowed
                CHECK(std::abs(w) <= 0.9);
            } else {
                CHECK(w == 0.0);
            }
        }
    for (const auto& spec : scm.noise) {
        CHECK(spec.scale >= 0.5);
        CHECK(spec.scale <= 1.0);
    }
}

TEST_CASE("infeasible configurations are rejected") {
    GenConfig cfg = base_config();
    cfg.latent_count = 7;
    CHECK_THROWS_AS(generate_scm(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.edge_count = 2;  // cannot hold the loop plus the guaranteed arrivals
    CHECK_THROWS_AS(generate_scm(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.node_count = 3;
    cfg.cyclic = true;  // a loop needs two covariates
    CHECK_THROWS_AS(generate_scm(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.edge_count = 100;
    CHECK_THROWS_AS(generate_scm(cfg), std::invalid_argument);
}

TEST_CASE("model validation guards invariants") {
    GenConfig cfg = base_config();
    Scm scm = generate_scm(cfg);
    validate_scm(scm);
    Scm broken = scm;
    broken.weights(0, 0) = 0.5;  // a weight off the sparsity pattern
    CHECK_THROWS_AS(validate_scm(broken), std::invalid_argument);
    Scm tanh_bad = scm;
    tanh_bad.form = Form::Tanh;
    tanh_bad.weights *= 10.0;
    CHECK_THROWS_AS(validate_scm(tanh_bad), std::invalid_argument);
}

TEST_CASE("edgeless samples center on zero") {
    DirectedGraph g({"X", "Y"}, {}, {0, 1});
    Scm scm{g, 0, 1, Form::Linear, Eigen::MatrixXd::Zero(2, 2),
            {NoiseSpec{NoiseFamily::Gaussian, 1.0},
             NoiseSpec{NoiseFamily::Gaussian, 1.0}}};
    const int n = 40000;
    Dataset d = sample(scm, n, 7);
    CHECK(std::abs(column_mean(d, 0)) < 3.0 / std::sqrt(double(n)));
    CHECK(std::abs(column_mean(d, 1)) < 3.0 / std::sqrt(double(n)));
}

TEST_CASE("regression slope recovers the structural weight") {
    DirectedGraph g({"X", "Y"}, {{0, 1}}, {0, 1});
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(1, 0) = 0.7;
    Scm scm{g, 0, 1, Form::Linear, w,
            {NoiseSpec{NoiseFamily::Gaussian, 1.0},
             NoiseSpec{NoiseFamily::Uniform, 0.8}}};
    Dataset d = sample(scm, 30000, 11);
    const auto x = d.values.col(0).array() - d.values.col(0).mean();
    const auto y = d.values.col(1).array() - d.values.col(1).mean();
    const double slope = (x * y).sum() / (x * x).sum();
    CHECK(slope == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("fixed point solutions satisfy the equations") {
    GenConfig cfg = base_config();
    cfg.form = Form::Tanh;
    cfg.latent_count = 0;
    Scm scm = generate_scm(cfg);
    const int n = 200;
    Dataset d = sample(scm, n, 13);
    // all nodes observed, so the dataset is the full solution matrix
    REQUIRE(d.values.cols() == scm.graph.node_count());
    const Eigen::MatrixXd u = noise_matrix(scm, n, 13);
    const Eigen::MatrixXd& v = d.values;
    Eigen::MatrixXd rhs = (v * scm.weights.transpose()).array().tanh().matrix();
    rhs += u;
    CHECK((v - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("interventions clamp the treated column") {
    DirectedGraph g({"X", "Y"}, {{0, 1}}, {0, 1});
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(1, 0) = 0.6;
    Scm scm{g, 0, 1, Form::Linear, w,
            {NoiseSpec{NoiseFamily::Gaussian, 1.0},
             NoiseSpec{NoiseFamily::Gaussian, 1.0}}};
    Dataset at0 = sample_interventional(scm, 0, 0.0, 20000, 3);
    Dataset at1 = sample_interventional(scm, 0, 1.0, 20000, 3);
    CHECK(at0.values.col(0).minCoeff() == 0.0);
    CHECK(at0.values.col(0).maxCoeff() == 0.0);
    CHECK(std::abs(column_mean(at0, 1)) < 0.03);
    CHECK(column_mean(at1, 1) == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("closed form effect matches the direct weight on acyclic graphs") {
    DirectedGraph g({"X", "Y"}, {{0, 1}}, {0, 1});
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(1, 0) = 0.7;
    Scm scm{g, 0, 1, Form::Linear, w,
            {NoiseSpec{NoiseFamily::Gaussian, 1.0},
             NoiseSpec{NoiseFamily::Gaussian, 1.0}}};
    CHECK(true_causal_effect(scm, 0, 1) == doctest::Approx(0.7));
}

TEST_CASE("no directed route means zero effect") {
    DirectedGraph g({"X", "Y", "C1"}, {{2, 0}, {2, 1}}, {0, 1, 2});
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
    w(0, 2) = 0.5;
    w(1, 2) = 0.4;
    Scm scm{g, 0, 1, Form::Linear, w,
            {NoiseSpec{NoiseFamily::Gaussian, 1.0},
             NoiseSpec{NoiseFamily::Gaussian, 1.0},
             NoiseSpec{NoiseFamily::Gaussian, 1.0}}};
    CHECK(true_causal_effect(scm, 0, 1) == 0.0);
}

TEST_CASE("closed form effect matches interventional contrasts through a loop") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        GenConfig cfg;
        cfg.node_count = 5;
        cfg.edge_count = 8;
        cfg.cyclic = true;
        cfg.edge_xy = true;
        cfg.seed = seed;
        Scm scm = generate_scm(cfg);
        const double truth = true_causal_effect(scm, scm.treatment, scm.outcome);
        const double h = 0.5;
        Dataset lo = sample_interventional(scm, scm.treatment, 0.0, 20000, 99);
        Dataset hi = sample_interventional(scm, scm.treatment, h, 20000, 99);
        const int ycol = lo.column_index("Y");
        const double fd = (column_mean(hi, ycol) - column_mean(lo, ycol)) / h;
        // shared noise across arms makes the contrast exact for linear models
        CHECK(fd == doctest::Approx(truth).epsilon(1e-9));
        Dataset hi2 = sample_interventional(scm, scm.treatment, h, 100000, 1234);
        Dataset lo2 = sample_interventional(scm, scm.treatment, 0.0, 100000, 77);
        const double fd2 =
            (column_mean(hi2, ycol) - column_mean(lo2, ycol)) / h;
        if (std::abs(truth) > 0.05)
            CHECK(fd2 == doctest::Approx(truth).epsilon(0.15));
    }
}

TEST_CASE("nonlinear models have no scalar effect") {
    GenConfig cfg = base_config();
    cfg.form = Form::Tanh;
    Scm scm = generate_scm(cfg);
    CHECK_THROWS_AS(true_causal_effect(scm, scm.treatment, scm.outcome),
                    std::invalid_argument);
}

TEST_CASE("sampled covariance approaches its closed form") {
    GenConfig cfg;
    cfg.node_count = 5;
    cfg.edge_count = 7;
    cfg.cyclic = true;
    cfg.edge_xy = true;
    cfg.seed = 8;
    Scm scm = generate_scm(cfg);
    const int n = 100000;
    Dataset d = sample(scm, n, 21);
    REQUIRE(d.values.cols() == 5);
    Eigen::MatrixXd centered = d.values.rowwise() - d.values.colwise().mean();
    Eigen::MatrixXd emp = (centered.transpose() * centered) / double(n - 1);
    Eigen::MatrixXd sigma_u = Eigen::MatrixXd::Zero(5, 5);
    for (int v = 0; v < 5; ++v) sigma_u(v, v) = scm.noise[v].scale * scm.noise[v].scale;
    Eigen::MatrixXd inv =
        (Eigen::MatrixXd::Identity(5, 5) - scm.weights).inverse();
    Eigen::MatrixXd theory = inv * sigma_u * inv.transpose();
    CHECK((emp - theory).norm() / theory.norm() < 0.05);
}

TEST_CASE("sampling is deterministic and seed-sensitive") {
    GenConfig cfg = base_config();
    Scm scm = generate_scm(cfg);
    Dataset a = sample(scm, 50, 5);
    Dataset b = sample(scm, 50, 5);
    Dataset c = sample(scm, 50, 6);
    CHECK((a.values.array() == b.values.array()).all());
    CHECK(!(a.values.array() == c.values.array()).all());
    CHECK(a.seed == 5);
}

TEST_CASE("sample size must be positive") {
    GenConfig cfg = base_config();
    Scm scm = generate_scm(cfg);
    CHECK_THROWS_AS(sample(scm, 0, 1), std::invalid_argument);
}

TEST_CASE("enum names round trip") {
    CHECK(form_from_string(to_string(Form::Linear)) == Form::Linear);
    CHECK(form_from_string(to_string(Form::Tanh)) == Form::Tanh);
    CHECK(noise_mode_from_string(to_string(NoiseMode::Mixed)) == NoiseMode::Mixed);
    CHECK(noise_family_from_string(to_string(NoiseFamily::Uniform)) ==
          NoiseFamily::Uniform);
    CHECK_THROWS_AS(form_from_string("cubic"), std::invalid_argument);
    CHECK_THROWS_AS(noise_mode_from_string("loud"), std::invalid_argument);
    CHECK_THROWS_AS(mb_algorithm_from_string("magic"), std::invalid_argument);
}
