#include "cycad/scm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cycad {

namespace {

constexpr double kMinAbsDet = 1e-8;
constexpr double kTanhSpectralTarget = 0.95;
constexpr double kFixedPointTol = 1e-10;
constexpr int kFixedPointCap = 10000;
constexpr int kResampleCap = 100;

double log_abs_det(const Eigen::MatrixXd& m) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    const Eigen::MatrixXd& packed = lu.matrixLU();
    double acc = 0.0;
    for (int i = 0; i < packed.rows(); ++i) {
        double d = std::abs(packed(i, i));
        if (d == 0.0) return -std::numeric_limits<double>::infinity();
        acc += std::log(d);
    }
    return acc;
}

double spectral_norm(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

double draw_weight(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.3, 0.9);
    double w = mag(rng);
    std::uniform_int_distribution<int> coin(0, 1);
    return coin(rng) ? w : -w;
}

double draw_noise(std::mt19937_64& rng, const NoiseSpec& spec) {
    if (spec.family == NoiseFamily::Gaussian) {
        std::normal_distribution<double> d(0.0, spec.scale);
        return d(rng);
    }
    const double half = spec.scale * std::sqrt(3.0);  // matches the std dev
    std::uniform_real_distribution<double> d(-half, half);
    return d(rng);
}

// noise draws in row-major order; every node draws even under intervention
// so interventional arms with equal seeds share their noise
Eigen::MatrixXd draw_noise_matrix(const Scm& scm, int n, std::uint64_t seed) {
    const int d = scm.graph.node_count();
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd u(n, d);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) u(r, c) = draw_noise(rng, scm.noise[c]);
    return u;
}

Eigen::MatrixXd solve_tanh(const Scm& scm, const Eigen::MatrixXd& u,
                           int clamp_col, double clamp_value) {
    Eigen::MatrixXd v = u;
    if (clamp_col >= 0) v.col(clamp_col).setConstant(clamp_value);
    const Eigen::MatrixXd wt = scm.weights.transpose();
    for (int iter = 0; iter < kFixedPointCap; ++iter) {
        Eigen::MatrixXd next = ((v * wt).array().tanh()).matrix() + u;
        if (clamp_col >= 0) next.col(clamp_col).setConstant(clamp_value);
        // next - v is the defect of v in the structural equations, so
        // returning v keeps the advertised residual bound exact
        if ((next - v).cwiseAbs().maxCoeff() < kFixedPointTol) return v;
        v = std::move(next);
    }
    throw std::runtime_error("fixed point iteration did not converge");
}

Dataset observed_columns(const Scm& scm, const Eigen::MatrixXd& v,
                         std::uint64_t seed) {
    const NodeSet& obs = scm.graph.observed();
    Dataset data;
    data.seed = seed;
    data.columns.reserve(obs.size());
    data.values.resize(v.rows(), obs.size());
    int c = 0;
    for (int node : obs) {
        data.columns.push_back(scm.graph.label(node));
        data.values.col(c++) = v.col(node);
    }
    if (!data.values.allFinite())
        throw std::runtime_error("sampling produced non-finite values");
    return data;
}

std::vector<int> others(int node_count, int x) {
    std::vector<int> k;
    k.reserve(node_count - 1);
    for (int v = 0; v < node_count; ++v)
        if (v != x) k.push_back(v);
    return k;
}

void check_sample_args(const Scm& scm, int n) {
    validate_scm(scm);
    if (n <= 0) throw std::invalid_argument("sample count must be positive");
}

}  // namespace

int Dataset::column_index(std::string_view name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

void validate_scm(const Scm& scm) {
    const int d = scm.graph.node_count();
    if (scm.weights.rows() != d || scm.weights.cols() != d)
        throw std::invalid_argument("weight matrix shape does not match the graph");
    if (static_cast<int>(scm.noise.size()) != d)
        throw std::invalid_argument("noise spec count does not match the graph");
    for (const auto& spec : scm.noise)
        if (!(spec.scale > 0.0))
            throw std::invalid_argument("noise scale must be positive");
    if (scm.treatment < 0 || scm.treatment >= d || scm.outcome < 0 ||
        scm.outcome >= d || scm.treatment == scm.outcome)
        throw std::invalid_argument("bad treatment/outcome indices");
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) {
            bool edge = scm.graph.has_edge(i, j);
            bool nonzero = scm.weights(j, i) != 0.0;
            if (edge != nonzero)
                throw std::invalid_argument(
                    "weight sparsity does not match the edge set");
        }
    if (scm.form == Form::Linear) {
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
        if (log_abs_det(id - scm.weights) <= std::log(kMinAbsDet))
            throw std::invalid_argument("linear system is too close to singular");
    } else {
        if (spectral_norm(scm.weights) >= 1.0)
            throw std::invalid_argument("tanh weights must have spectral norm below one");
    }
}

Scm generate_scm(const GenConfig& cfg) {
    const int n = cfg.node_count;
    const int ncov = n - 2;
    if (n < 2) throw std::invalid_argument("need at least treatment and outcome");
    if (cfg.latent_count < 0 || cfg.latent_count > n - 2)
        throw std::invalid_argument("latent count must leave treatment and outcome observed");
    if (cfg.cyclic && ncov < 2)
        throw std::invalid_argument("cyclic configs need at least two covariates");
    if (cfg.edge_count < 0) throw std::invalid_argument("edge count must be nonnegative");

    std::mt19937_64 rng(cfg.seed);

    // node layout: 0 = X, 1 = Y, 2.. = covariates
    const int x = 0, y = 1;
    std::vector<std::string> labels(n);
    labels[x] = "X";
    labels[y] = "Y";
    for (int c = 0; c < ncov; ++c) labels[2 + c] = "C" + std::to_string(c + 1);

    std::vector<int> covs(ncov);
    for (int c = 0; c < ncov; ++c) covs[c] = 2 + c;

    std::vector<std::pair<int, int>> mandatory;
    std::vector<std::pair<int, int>> slots;
    auto in_mandatory = [&](int from, int to) {
        return std::find(mandatory.begin(), mandatory.end(),
                         std::make_pair(from, to)) != mandatory.end();
    };

    if (cfg.cyclic) {
        std::vector<int> ring = covs;
        std::shuffle(ring.begin(), ring.end(), rng);
        std::uniform_int_distribution<int> size_dist(2, std::min(4, ncov));
        int ring_size = size_dist(rng);
        for (int i = 0; i < ring_size; ++i)
            mandatory.emplace_back(ring[i], ring[(i + 1) % ring_size]);
    }
    if (ncov > 0) {
        std::uniform_int_distribution<int> pick(0, ncov - 1);
        mandatory.emplace_back(covs[pick(rng)], x);
        mandatory.emplace_back(covs[pick(rng)], y);
    }
    if (cfg.edge_xy) mandatory.emplace_back(x, y);

    if (cfg.cyclic) {
        for (int a : covs)
            for (int b : covs)
                if (a != b && !in_mandatory(a, b)) slots.emplace_back(a, b);
    } else {
        // forward edges along a random covariate order keep the graph acyclic
        std::vector<int> order = covs;
        std::shuffle(order.begin(), order.end(), rng);
        for (int i = 0; i < ncov; ++i)
            for (int j = i + 1; j < ncov; ++j)
                if (!in_mandatory(order[i], order[j]))
                    slots.emplace_back(order[i], order[j]);
    }
    for (int c : covs) {
        if (!in_mandatory(c, x)) slots.emplace_back(c, x);
        if (!in_mandatory(c, y)) slots.emplace_back(c, y);
    }

    const int need = cfg.edge_count - static_cast<int>(mandatory.size());
    if (need < 0)
        throw std::invalid_argument(
            "edge count too small for the required structure");
    if (need > static_cast<int>(slots.size()))
        throw std::invalid_argument("edge count exceeds the available positions");
    std::shuffle(slots.begin(), slots.end(), rng);
    std::vector<std::pair<int, int>> edges = mandatory;
    edges.insert(edges.end(), slots.begin(), slots.begin() + need);

    std::vector<int> latent_pool = covs;
    std::shuffle(latent_pool.begin(), latent_pool.end(), rng);
    NodeSet observed{};
    {
        std::vector<int> obs = {x, y};
        NodeSet latents(std::vector<int>(latent_pool.begin(),
                                         latent_pool.begin() + cfg.latent_count));
        for (int c : covs)
            if (!latents.contains(c)) obs.push_back(c);
        observed = NodeSet(std::move(obs));
    }

    DirectedGraph graph(labels, edges, observed);

    Scm scm{graph, x, y, cfg.form, Eigen::MatrixXd::Zero(n, n), {}};

    auto fill_weights = [&]() {
        scm.weights.setZero();
        for (auto [from, to] : graph.edges()) scm.weights(to, from) = draw_weight(rng);
    };
    fill_weights();

    if (cfg.form == Form::Linear) {
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        int attempts = 0;
        while (log_abs_det(id - scm.weights) <= std::log(kMinAbsDet)) {
            if (attempts++ < kResampleCap) {
                fill_weights();
            } else {
                scm.weights *= 0.9;
            }
        }
    } else {
        double norm = spectral_norm(scm.weights);
        if (norm >= 1.0) scm.weights *= kTanhSpectralTarget / norm;
    }

    scm.noise.resize(n);
    std::uniform_real_distribution<double> scale_dist(0.5, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int v = 0; v < n; ++v) {
        NoiseFamily family = NoiseFamily::Gaussian;
        if (cfg.noise_mode == NoiseMode::NonGaussian)
            family = NoiseFamily::Uniform;
        else if (cfg.noise_mode == NoiseMode::Mixed)
            family = coin(rng) ? NoiseFamily::Uniform : NoiseFamily::Gaussian;
        scm.noise[v] = NoiseSpec{family, scale_dist(rng)};
    }

    validate_scm(scm);
    return scm;
}

Dataset sample(const Scm& scm, int n, std::uint64_t seed) {
    check_sample_args(scm, n);
    const int d = scm.graph.node_count();
    Eigen::MatrixXd u = draw_noise_matrix(scm, n, seed);
    Eigen::MatrixXd v;
    if (scm.form == Form::Linear) {
        Eigen::MatrixXd system = Eigen::MatrixXd::Identity(d, d) - scm.weights;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
        v = lu.solve(u.transpose()).transpose();
    } else {
        v = solve_tanh(scm, u, -1, 0.0);
    }
    return observed_columns(scm, v, seed);
}

Dataset sample_interventional(const Scm& scm, int x, double value, int n,
                              std::uint64_t seed) {
    check_sample_args(scm, n);
    const int d = scm.graph.node_count();
    if (x < 0 || x >= d) throw std::invalid_argument("treatment index out of range");
    Eigen::MatrixXd u = draw_noise_matrix(scm, n, seed);
    Eigen::MatrixXd v(n, d);
    if (scm.form == Form::Linear) {
        const std::vector<int> k = others(d, x);
        const int m = static_cast<int>(k.size());
        Eigen::MatrixXd wkk(m, m);
        Eigen::VectorXd wkx(m);
        for (int r = 0; r < m; ++r) {
            wkx(r) = scm.weights(k[r], x);
            for (int c = 0; c < m; ++c) wkk(r, c) = scm.weights(k[r], k[c]);
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(m, m) - wkk);
        Eigen::MatrixXd rhs(m, n);
        for (int r = 0; r < m; ++r)
            rhs.row(r) = u.col(k[r]).transpose().array() + value * wkx(r);
        Eigen::MatrixXd vk = lu.solve(rhs);
        v.col(x).setConstant(value);
        for (int r = 0; r < m; ++r) v.col(k[r]) = vk.row(r).transpose();
    } else {
        v = solve_tanh(scm, u, x, value);
    }
    return observed_columns(scm, v, seed);
}

double true_causal_effect(const Scm& scm, int x, int y) {
    validate_scm(scm);
    if (scm.form != Form::Linear)
        throw std::invalid_argument("closed-form effect exists only for linear models");
    const int d = scm.graph.node_count();
    if (x < 0 || x >= d || y < 0 || y >= d || x == y)
        throw std::invalid_argument("bad effect query");
    const std::vector<int> k = others(d, x);
    const int m = static_cast<int>(k.size());
    Eigen::MatrixXd wkk(m, m);
    Eigen::VectorXd wkx(m);
    int ypos = -1;
    for (int r = 0; r < m; ++r) {
        if (k[r] == y) ypos = r;
        wkx(r) = scm.weights(k[r], x);
        for (int c = 0; c < m; ++c) wkk(r, c) = scm.weights(k[r], k[c]);
    }
    Eigen::VectorXd total =
        (Eigen::MatrixXd::Identity(m, m) - wkk).partialPivLu().solve(wkx);
    if (!total.allFinite())
        throw std::runtime_error("effect system is numerically singular");
    return total(ypos);
}

Eigen::MatrixXd noise_matrix(const Scm& scm, int n, std::uint64_t seed) {
    check_sample_args(scm, n);
    return draw_noise_matrix(scm, n, seed);
}

std::string scm_to_json(const Scm& scm) {
    validate_scm(scm);
    const DirectedGraph& g = scm.graph;
    nlohmann::ordered_json doc;
    doc["nodes"] = g.labels();
    auto& edges = doc["edges"] = nlohmann::ordered_json::array();
    for (auto [from, to] : g.edges())
        edges.push_back({g.label(from), g.label(to)});
    auto& observed = doc["observed"] = nlohmann::ordered_json::array();
    for (int v : g.observed()) observed.push_back(g.label(v));
    doc["treatment"] = g.label(scm.treatment);
    doc["outcome"] = g.label(scm.outcome);
    doc["form"] = to_string(scm.form);
    auto& weights = doc["weights"] = nlohmann::ordered_json::array();
    for (int r = 0; r < scm.weights.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int c = 0; c < scm.weights.cols(); ++c) row.push_back(scm.weights(r, c));
        weights.push_back(std::move(row));
    }
    auto& noise = doc["noise"] = nlohmann::ordered_json::array();
    for (const auto& spec : scm.noise)
        noise.push_back({{"family", to_string(spec.family)}, {"scale", spec.scale}});
    return doc.dump(2) + "\n";
}

Scm scm_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad model document: ") + e.what());
    }
    for (const char* field :
         {"nodes", "edges", "observed", "treatment", "outcome", "form", "weights", "noise"})
        if (!doc.contains(field))
            throw std::invalid_argument(std::string("model document missing field: ") + field);

    std::vector<std::string> labels = doc["nodes"].get<std::vector<std::string>>();
    auto index_of = [&](const std::string& name) {
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == name) return static_cast<int>(i);
        throw std::invalid_argument("unknown node label: " + name);
    };
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : doc["edges"]) {
        if (!e.is_array() || e.size() != 2)
            throw std::invalid_argument("edge entries must be [from, to] label pairs");
        edges.emplace_back(index_of(e[0].get<std::string>()),
                           index_of(e[1].get<std::string>()));
    }
    std::vector<int> observed;
    for (const auto& name : doc["observed"])
        observed.push_back(index_of(name.get<std::string>()));

    const int n = static_cast<int>(labels.size());
    Scm scm{DirectedGraph(labels, edges, NodeSet(std::move(observed))),
            index_of(doc["treatment"].get<std::string>()),
            index_of(doc["outcome"].get<std::string>()),
            form_from_string(doc["form"].get<std::string>()),
            Eigen::MatrixXd::Zero(n, n),
            {}};
    const auto& weights = doc["weights"];
    if (static_cast<int>(weights.size()) != n)
        throw std::invalid_argument("weight matrix has wrong shape");
    for (int r = 0; r < n; ++r) {
        if (static_cast<int>(weights[r].size()) != n)
            throw std::invalid_argument("weight matrix has wrong shape");
        for (int c = 0; c < n; ++c) scm.weights(r, c) = weights[r][c].get<double>();
    }
    for (const auto& spec : doc["noise"])
        scm.noise.push_back(NoiseSpec{
            noise_family_from_string(spec.at("family").get<std::string>()),
            spec.at("scale").get<double>()});
    validate_scm(scm);
    return scm;
}

void save_scm(const Scm& scm, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << scm_to_json(scm);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Scm load_scm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return scm_from_json(text);
}

namespace {

// 17 significant digits round-trip doubles exactly
std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_csv(const Dataset& data, std::ostream& out) {
    for (size_t c = 0; c < data.columns.size(); ++c) {
        if (c) out << ',';
        out << data.columns[c];
    }
    out << '\n';
    for (int r = 0; r < data.values.rows(); ++r) {
        for (int c = 0; c < data.values.cols(); ++c) {
            if (c) out << ',';
            out << format_value(data.values(r, c));
        }
        out << '\n';
    }
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(data, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("empty table");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Dataset data;
    {
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) data.columns.push_back(cell);
    }
    if (data.columns.empty()) throw std::invalid_argument("table has no columns");
    std::vector<double> cells;
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        size_t got = 0;
        while (std::getline(row, cell, ',')) {
            size_t used = 0;
            double v;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw std::invalid_argument("bad numeric cell: " + cell);
            }
            if (used != cell.size())
                throw std::invalid_argument("bad numeric cell: " + cell);
            cells.push_back(v);
            ++got;
        }
        if (got != data.columns.size())
            throw std::invalid_argument("row width does not match the header");
        ++rows;
    }
    if (rows == 0) throw std::invalid_argument("table has no rows");
    data.values.resize(rows, static_cast<int>(data.columns.size()));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < data.values.cols(); ++c)
            data.values(r, c) = cells[r * data.columns.size() + c];
    return data;
}

Dataset read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_csv(in);
}

const char* to_string(Form f) {
    return f == Form::Linear ? "linear" : "tanh";
}

const char* to_string(NoiseFamily f) {
    return f == NoiseFamily::Gaussian ? "gaussian" : "uniform";
}

const char* to_string(NoiseMode m) {
    switch (m) {
        case NoiseMode::Gaussian: return "gaussian";
        case NoiseMode::NonGaussian: return "nongaussian";
        default: return "mixed";
    }
}

Form form_from_string(const std::string& s) {
    if (s == "linear") return Form::Linear;
    if (s == "tanh") return Form::Tanh;
    throw std::invalid_argument("unknown form: " + s);
}

NoiseFamily noise_family_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseFamily::Gaussian;
    if (s == "uniform") return NoiseFamily::Uniform;
    throw std::invalid_argument("unknown noise family: " + s);
}

NoiseMode noise_mode_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseMode::Gaussian;
    if (s == "nongaussian") return NoiseMode::NonGaussian;
    if (s == "mixed") return NoiseMode::Mixed;
    throw std::invalid_argument("unknown noise mode: " + s);
}

}  // namespace cycad
