#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cycad/graph.hpp"

namespace cycad {

enum class Form { Linear, Tanh };
enum class NoiseFamily { Gaussian, Uniform };
enum class NoiseMode { Gaussian, NonGaussian, Mixed };

struct NoiseSpec {
    NoiseFamily family;
    double scale;  // standard deviation

    bool operator==(const NoiseSpec&) const = default;
};

// Structural model V := f(W V) + U over the nodes of graph. weights(j, i) is
// the coefficient on node i in the equation of node j and is nonzero exactly
// when the edge i -> j exists.
struct Scm {
    DirectedGraph graph;
    int treatment;
    int outcome;
    Form form;
    Eigen::MatrixXd weights;
    std::vector<NoiseSpec> noise;
};

// Checks the sparsity pattern and the solvability invariant for the form:
// linear needs |det(I - W)| > 1e-8, tanh needs spectral norm below one.
void validate_scm(const Scm& scm);

struct Dataset {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // rows are samples
    std::uint64_t seed = 0;

    int column_index(std::string_view name) const;
};

struct GenConfig {
    int node_count = 0;
    int edge_count = 0;
    int latent_count = 0;
    bool cyclic = false;
    Form form = Form::Linear;
    NoiseMode noise_mode = NoiseMode::Gaussian;
    bool edge_xy = true;
    std::vector<int> sample_sizes;  // carried for benchmark plans
    std::uint64_t seed = 0;
};

// Random pre-treatment model: treatment X, outcome Y, covariates C1..Ck.
// Y is a sink, X points only at Y (when edge_xy), at least one covariate
// feeds X and one feeds Y, latents are covariates. Cyclic configs wire a
// covariate ring of size 2-4. Deterministic in (config, seed).
Scm generate_scm(const GenConfig& cfg);

// Observational draws; returns the observed columns in node order.
Dataset sample(const Scm& scm, int n, std::uint64_t seed);

// Draws with the treatment column clamped to value.
Dataset sample_interventional(const Scm& scm, int x, double value, int n,
                              std::uint64_t seed);

// Closed-form total effect of x on y for linear models.
double true_causal_effect(const Scm& scm, int x, int y);

// The exogenous draw behind sample()/sample_interventional() for this seed;
// rows are samples, one column per node. Lets callers verify the structural
// equations on sampled solutions.
Eigen::MatrixXd noise_matrix(const Scm& scm, int n, std::uint64_t seed);

std::string scm_to_json(const Scm& scm);
Scm scm_from_json(const std::string& text);
void save_scm(const Scm& scm, const std::string& path);
Scm load_scm(const std::string& path);

void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::string& path);
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);

const char* to_string(Form f);
const char* to_string(NoiseFamily f);
const char* to_string(NoiseMode m);
Form form_from_string(const std::string& s);
NoiseFamily noise_family_from_string(const std::string& s);
NoiseMode noise_mode_from_string(const std::string& s);

}  // namespace cycad
