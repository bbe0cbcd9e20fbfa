// Command-line front end: generate models, draw samples, discover blankets,
// run the edge decision procedure, query a graph oracle, run benchmark grids.
// stdout carries machine-readable results, stderr carries diagnostics.
// Exit codes: 0 success, 2 bad configuration or input, 3 runtime failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cycad/adjustment.hpp"
#include "cycad/bench.hpp"
#include "cycad/ci.hpp"
#include "cycad/graph_io.hpp"
#include "cycad/lsas.hpp"
#include "cycad/mb.hpp"
#include "cycad/scm.hpp"
#include "cycad/separation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Input and configuration problems map to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Loading an input is part of configuration; failures map to exit code 2.
template <typename F>
auto load_input(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

int node_by_label(const cycad::DirectedGraph& g, const std::string& label) {
    int v = g.label_index(label);
    if (v < 0) throw ConfigError("unknown node label: " + label);
    return v;
}

cycad::NodeSet nodes_by_labels(const cycad::DirectedGraph& g,
                               const std::vector<std::string>& labels) {
    std::vector<int> nodes;
    for (const auto& l : labels) nodes.push_back(node_by_label(g, l));
    return cycad::NodeSet(std::move(nodes));
}

int column_by_label(const cycad::Dataset& data, const std::string& label) {
    int c = data.column_index(label);
    if (c < 0) throw ConfigError("unknown data column: " + label);
    return c;
}

cycad::GenConfig parse_gen_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad generator config: ") + e.what());
    }
    cycad::GenConfig cfg;
    try {
        cfg.node_count = doc.at("nodes").get<int>();
        cfg.edge_count = doc.at("edges").get<int>();
        cfg.latent_count = doc.value("latents", 0);
        cfg.cyclic = doc.value("cyclic", false);
        if (doc.contains("form"))
            cfg.form = cycad::form_from_string(doc["form"].get<std::string>());
        if (doc.contains("noise"))
            cfg.noise_mode =
                cycad::noise_mode_from_string(doc["noise"].get<std::string>());
        cfg.edge_xy = doc.value("edge_xy", true);
        if (doc.contains("sample_sizes"))
            cfg.sample_sizes = doc["sample_sizes"].get<std::vector<int>>();
        cfg.seed = doc.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad generator config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad generator config: ") + e.what());
    }
    return cfg;
}

struct ProviderArgs {
    std::string ci;  // "", "oracle", "fisherz"
    std::string graph_path;
    std::string data_path;
    double alpha = 0.01;
};

// Provider plus the index mapping the caller needs to translate labels.
struct ProviderBundle {
    std::unique_ptr<cycad::CiProvider> provider;
    std::optional<cycad::GraphFile> graph;   // oracle backend
    const cycad::Dataset* data = nullptr;    // fisherz backend
};

ProviderBundle make_provider(const ProviderArgs& args) {
    std::string ci = args.ci;
    if (ci.empty()) ci = args.data_path.empty() ? "oracle" : "fisherz";
    ProviderBundle bundle;
    if (ci == "oracle") {
        if (args.graph_path.empty())
            throw ConfigError("--ci oracle needs --graph");
        bundle.graph = load_input([&] { return cycad::load_graph(args.graph_path); });
        bundle.provider =
            std::make_unique<cycad::GraphOracle>(bundle.graph->graph, args.alpha);
    } else if (ci == "fisherz") {
        if (args.data_path.empty())
            throw ConfigError("--ci fisherz needs --data");
        auto fisher = std::make_unique<cycad::FisherZ>(
            load_input([&] { return cycad::read_csv_file(args.data_path); }),
            args.alpha);
        bundle.data = fisher->data();
        bundle.provider = std::move(fisher);
    } else {
        throw ConfigError("unknown ci backend: " + ci);
    }
    return bundle;
}

std::optional<cycad::MbAlgorithm> parse_mb_flag(const std::string& mb) {
    if (mb.empty() || mb == "auto") return std::nullopt;
    try {
        return cycad::mb_algorithm_from_string(mb);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

cycad::MbAlgorithm resolve_mb(const std::optional<cycad::MbAlgorithm>& mb,
                              int variable_count) {
    if (mb) return *mb;
    return variable_count <= 50 ? cycad::MbAlgorithm::Tc
                                : cycad::MbAlgorithm::FastIamb;
}

int run_generate(const std::string& config_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed) {
    cycad::GenConfig cfg = parse_gen_config(read_file(config_path));
    if (seed) cfg.seed = *seed;
    const cycad::Scm scm = [&] {
        try {
            return cycad::generate_scm(cfg);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }();
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    cycad::save_graph(cycad::GraphFile{scm.graph, scm.treatment, scm.outcome},
                      (dir / "graph.json").string());
    cycad::save_scm(scm, (dir / "scm.json").string());
    std::cout << (dir / "graph.json").string() << "\n"
              << (dir / "scm.json").string() << "\n";
    return kExitOk;
}

int run_sample(const std::string& scm_path, int n, std::uint64_t seed,
               const std::string& out_path, const std::string& do_spec) {
    cycad::Scm scm = load_input([&] { return cycad::load_scm(scm_path); });
    if (n < 1) throw ConfigError("--n must be at least 1");
    cycad::Dataset data;
    if (do_spec.empty()) {
        data = cycad::sample(scm, n, seed);
    } else {
        auto eq = do_spec.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--do expects LABEL=VALUE");
        int node = node_by_label(scm.graph, do_spec.substr(0, eq));
        double value = 0.0;
        try {
            value = std::stod(do_spec.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("--do expects a numeric value");
        }
        data = cycad::sample_interventional(scm, node, value, n, seed);
    }
    cycad::write_csv(data, out_path);
    std::cout << out_path << "\n";
    return kExitOk;
}

int run_mb(const ProviderArgs& pargs, const std::string& target_label,
           const std::string& mb_flag) {
    ProviderBundle b = make_provider(pargs);
    const cycad::NodeSet vars = b.provider->variables();
    int target;
    std::vector<std::string> labels;
    if (b.graph) {
        target = node_by_label(b.graph->graph, target_label);
        for (int v : vars) labels.push_back(b.graph->graph.label(v));
    } else {
        target = column_by_label(*b.data, target_label);
        labels = b.data->columns;
    }
    cycad::MbAlgorithm alg = resolve_mb(parse_mb_flag(mb_flag), vars.size());
    cycad::NodeSet blanket =
        cycad::discover_mb(alg, *b.provider, target, vars);
    nlohmann::ordered_json out;
    out["target"] = target_label;
    out["algorithm"] = cycad::to_string(alg);
    auto& arr = out["blanket"] = nlohmann::ordered_json::array();
    for (int v : blanket) {
        auto it = std::find(vars.begin(), vars.end(), v);
        arr.push_back(labels[it - vars.begin()]);
    }
    out["tests_used"] = b.provider->tests_used();
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int run_estimate(const ProviderArgs& pargs, std::string treatment,
                 std::string outcome, const std::string& mb_flag,
                 const std::optional<int>& max_z, bool no_estimate,
                 const std::string& out_path) {
    ProviderBundle b = make_provider(pargs);
    int x, y;
    std::vector<std::string> labels;  // by provider variable index
    if (b.graph) {
        if (treatment.empty()) treatment = b.graph->graph.label(b.graph->treatment);
        if (outcome.empty()) outcome = b.graph->graph.label(b.graph->outcome);
        x = node_by_label(b.graph->graph, treatment);
        y = node_by_label(b.graph->graph, outcome);
        labels.resize(b.graph->graph.node_count());
        for (int v = 0; v < b.graph->graph.node_count(); ++v)
            labels[v] = b.graph->graph.label(v);
    } else {
        if (treatment.empty()) treatment = "X";
        if (outcome.empty()) outcome = "Y";
        x = column_by_label(*b.data, treatment);
        y = column_by_label(*b.data, outcome);
        labels = b.data->columns;
    }
    cycad::MbAlgorithm alg =
        resolve_mb(parse_mb_flag(mb_flag), b.provider->variables().size());
    cycad::LsasOutcome res =
        cycad::run_lsas(*b.provider, x, y, alg, max_z, !no_estimate);

    nlohmann::ordered_json out;
    switch (res.status) {
        case cycad::LsasOutcome::Status::Identified: out["status"] = "identified"; break;
        case cycad::LsasOutcome::Status::NoEffect: out["status"] = "no_effect"; break;
        case cycad::LsasOutcome::Status::Undecidable: out["status"] = "undecidable"; break;
    }
    if (res.effect) out["effect"] = *res.effect;
    if (res.identified) {
        auto& arr = out["adjustment_set"] = nlohmann::ordered_json::array();
        for (int v : res.identified->z) arr.push_back(labels[v]);
        out["witness"] = labels[res.identified->witness];
    }
    if (res.no_effect) {
        auto& arr = out["separating_set"] = nlohmann::ordered_json::array();
        for (int v : res.no_effect->z) arr.push_back(labels[v]);
        if (!res.no_effect->separating)
            out["witness"] = labels[res.no_effect->witness];
    }
    out["tests_used"] = res.tests_used;
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + out_path);
        f << text;
    }
    return kExitOk;
}

int run_oracle(const std::string& graph_path, const std::string& kind_flag,
               const std::string& a, const std::string& b,
               const std::vector<std::string>& given, bool backdoor,
               const std::vector<std::string>& z_labels, std::string treatment,
               std::string outcome) {
    cycad::GraphFile gf = load_input([&] { return cycad::load_graph(graph_path); });
    nlohmann::ordered_json out;
    try {
        if (backdoor) {
            if (treatment.empty()) treatment = gf.graph.label(gf.treatment);
            if (outcome.empty()) outcome = gf.graph.label(gf.outcome);
            int x = node_by_label(gf.graph, treatment);
            int y = node_by_label(gf.graph, outcome);
            cycad::NodeSet z = nodes_by_labels(gf.graph, z_labels);
            out["backdoor"] = cycad::is_backdoor_adjustment_set(gf.graph, x, y, z);
            out["intervention_node"] =
                cycad::intervention_node_check(gf.graph, x, y, z);
        } else {
            if (a.empty() || b.empty())
                throw ConfigError("separation query needs --a and --b");
            cycad::SeparationKind kind = cycad::SeparationKind::SigmaSeparation;
            if (kind_flag == "d")
                kind = cycad::SeparationKind::DSeparation;
            else if (kind_flag != "sigma")
                throw ConfigError("--kind must be sigma or d");
            out["separated"] = cycad::is_separated(
                gf.graph, kind, node_by_label(gf.graph, a),
                node_by_label(gf.graph, b), nodes_by_labels(gf.graph, given));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int run_bench(const std::string& config_path, const std::string& out_dir,
              const std::optional<std::uint64_t>& seed,
              const std::optional<int>& jobs) {
    cycad::BenchConfig cfg;
    try {
        cfg = cycad::bench_config_from_json(read_file(config_path));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    cycad::BenchResult result;
    try {
        result = cycad::run_benchmark(cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    cycad::write_benchmark_outputs(result, out_dir);
    std::cout << (std::filesystem::path(out_dir) / "metrics.csv").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"local covariate selection and effect estimation in possibly "
                 "cyclic structural models"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string config_path, out_path, scm_path, do_spec;
    int n = 0;

    auto* gen = app.add_subcommand("generate", "random model from a config file");
    gen->add_option("--config", config_path, "generator config (json)")->required();
    gen->add_option("--out", out_path, "output directory")->required();
    gen->add_option("--seed", seed, "override the config seed");

    auto* smp = app.add_subcommand("sample", "draw data from a saved model");
    smp->add_option("--scm", scm_path, "model file (json)")->required();
    smp->add_option("--n", n, "number of rows")->required();
    std::uint64_t sample_seed = 0;
    smp->add_option("--seed", sample_seed, "sampling seed");
    smp->add_option("--out", out_path, "output csv path")->required();
    smp->add_option("--do", do_spec, "clamp a node, LABEL=VALUE");

    ProviderArgs pargs;
    std::string target, mb_flag = "auto", treatment, outcome;
    std::optional<int> max_z;

    auto add_provider_flags = [&](CLI::App* cmd) {
        cmd->add_option("--ci", pargs.ci, "oracle or fisherz");
        cmd->add_option("--graph", pargs.graph_path, "graph file (oracle backend)");
        cmd->add_option("--data", pargs.data_path, "csv data (fisherz backend)");
        cmd->add_option("--alpha", pargs.alpha, "test level, default 0.01");
    };

    auto* mb = app.add_subcommand("mb", "Markov blanket of a variable");
    add_provider_flags(mb);
    mb->add_option("--target", target, "variable label")->required();
    mb->add_option("--mb", mb_flag, "tc, fast-iamb, iamb, hiton or auto");

    auto* est = app.add_subcommand("estimate", "edge decision and effect estimate");
    add_provider_flags(est);
    est->add_option("--treatment", treatment, "treatment label");
    est->add_option("--outcome", outcome, "outcome label");
    est->add_option("--mb", mb_flag, "tc, fast-iamb, iamb, hiton or auto");
    est->add_option("--max-z", max_z, "adjustment set size cap");
    bool no_estimate = false;
    est->add_flag("--no-estimate", no_estimate,
                  "skip the least-squares effect (nonlinear data)");
    est->add_option("--out", out_path, "also write the record here");

    std::string sep_a, sep_b, kind_flag = "sigma";
    std::vector<std::string> given, z_labels;
    bool backdoor = false;
    auto* orc = app.add_subcommand("oracle", "separation and backdoor queries");
    orc->add_option("--graph", pargs.graph_path, "graph file")->required();
    orc->add_option("--kind", kind_flag, "sigma or d");
    orc->add_option("--a", sep_a, "first node label");
    orc->add_option("--b", sep_b, "second node label");
    orc->add_option("--given", given, "conditioning labels")->delimiter(',');
    orc->add_flag("--backdoor", backdoor, "judge an adjustment set instead");
    orc->add_option("--z", z_labels, "candidate adjustment labels")->delimiter(',');
    orc->add_option("--treatment", treatment, "treatment label override");
    orc->add_option("--outcome", outcome, "outcome label override");

    auto* ben = app.add_subcommand("bench", "run a benchmark grid");
    ben->add_option("--config", config_path, "benchmark config (json)")->required();
    ben->add_option("--out", out_path, "output directory")->required();
    ben->add_option("--seed", seed, "override the config seed");
    ben->add_option("--jobs", jobs, "worker thread count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return run_generate(config_path, out_path, seed);
        if (smp->parsed()) return run_sample(scm_path, n, sample_seed, out_path, do_spec);
        if (mb->parsed()) return run_mb(pargs, target, mb_flag);
        if (est->parsed())
            return run_estimate(pargs, treatment, outcome, mb_flag, max_z,
                                no_estimate, out_path);
        if (orc->parsed())
            return run_oracle(pargs.graph_path, kind_flag, sep_a, sep_b, given,
                              backdoor, z_labels, treatment, outcome);
        if (ben->parsed()) return run_bench(config_path, out_path, seed, jobs);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
