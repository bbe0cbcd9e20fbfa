#include "cycad/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "cycad/adjustment.hpp"

namespace cycad {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string opt_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

struct Sums {
    std::vector<double> res;
    std::vector<double> precisions;
    std::vector<std::pair<bool, bool>> decisions;
    long tests = 0;
    int total = 0;
    int failed = 0;
    int decided = 0;
};

MetricRow aggregate(const CellKey& cell, int n_samples, const Sums& s) {
    MetricRow row;
    row.cell = cell;
    row.n_samples = n_samples;
    row.total = s.total;
    row.failed = s.failed;
    row.decided = s.decided;
    const int ok = s.total - s.failed;
    if (ok > 0) {
        row.empty_fraction = 1.0 - static_cast<double>(s.decided) / ok;
        row.mean_tests = static_cast<double>(s.tests) / ok;
    }
    if (!s.decisions.empty()) row.ef = edge_fraction(s.decisions);
    auto mean_sd = [](const std::vector<double>& xs)
        -> std::pair<std::optional<double>, std::optional<double>> {
        if (xs.empty()) return {std::nullopt, std::nullopt};
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= xs.size();
        if (xs.size() < 2) return {mean, std::nullopt};
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        return {mean, std::sqrt(ss / (xs.size() - 1.0))};
    };
    std::tie(row.re_mean, row.re_sd) = mean_sd(s.res);
    row.re_count = static_cast<int>(s.res.size());
    std::tie(row.precision_mean, row.precision_sd) = mean_sd(s.precisions);
    row.precision_count = static_cast<int>(s.precisions.size());
    return row;
}

const char* status_name(LsasOutcome::Status s) {
    switch (s) {
        case LsasOutcome::Status::Identified: return "identified";
        case LsasOutcome::Status::NoEffect: return "no_effect";
        default: return "undecidable";
    }
}

InstanceRecord run_instance(const BenchConfig& cfg, const CellKey& cell,
                            int rep, int n_samples, std::uint64_t graph_seed,
                            std::uint64_t data_seed) {
    InstanceRecord rec;
    rec.cell = cell;
    rec.rep = rep;
    rec.n_samples = n_samples;
    rec.graph_seed = graph_seed;
    rec.data_seed = data_seed;
    try {
        GenConfig gcfg;
        gcfg.node_count = cell.size.nodes;
        gcfg.edge_count = cell.size.edges;
        gcfg.latent_count = cell.size.latents;
        gcfg.cyclic = cell.cyclic;
        gcfg.form = cell.form;
        gcfg.noise_mode = cell.noise;
        gcfg.edge_xy = cell.edge_xy;
        gcfg.sample_sizes = cfg.sample_sizes;
        gcfg.seed = graph_seed;
        const Scm scm = generate_scm(gcfg);
        const DirectedGraph& g = scm.graph;

        rec.true_edge = g.has_edge(scm.treatment, scm.outcome);
        if (cell.form == Form::Linear)
            rec.true_effect = true_causal_effect(scm, scm.treatment, scm.outcome);

        std::unique_ptr<CiProvider> provider;
        int x, y;
        std::vector<int> col_to_node;  // provider variable -> graph node
        if (cfg.ci == CiBackend::Oracle) {
            provider = std::make_unique<GraphOracle>(g, cfg.alpha);
            x = scm.treatment;
            y = scm.outcome;
            col_to_node.resize(g.node_count());
            for (int v = 0; v < g.node_count(); ++v) col_to_node[v] = v;
        } else {
            Dataset data = sample(scm, n_samples, data_seed);
            auto fisher = std::make_unique<FisherZ>(std::move(data), cfg.alpha);
            x = fisher->data()->column_index("X");
            y = fisher->data()->column_index("Y");
            for (int node : g.observed()) col_to_node.push_back(node);
            provider = std::move(fisher);
        }

        MbAlgorithm mb = cfg.mb ? *cfg.mb
                                : (g.observed().size() <= 50 ? MbAlgorithm::Tc
                                                             : MbAlgorithm::FastIamb);
        const bool estimate =
            cell.form == Form::Linear && cfg.ci == CiBackend::FisherZ;
        LsasOutcome out = run_lsas(*provider, x, y, mb, cfg.max_z, estimate);

        rec.status = out.status;
        rec.effect = out.effect;
        rec.tests_used = out.tests_used;
        if (out.status != LsasOutcome::Status::Undecidable)
            rec.edge_correct =
                (out.status == LsasOutcome::Status::Identified) == rec.true_edge;
        if (out.identified) {
            std::vector<int> z_nodes;
            for (int col : out.identified->z) z_nodes.push_back(col_to_node[col]);
            std::vector<std::string> z_labels;
            for (int node : NodeSet(z_nodes)) z_labels.push_back(g.label(node));
            rec.adjustment = std::move(z_labels);
            rec.witness = g.label(col_to_node[out.identified->witness]);
            rec.z_valid = is_backdoor_adjustment_set(g, scm.treatment, scm.outcome,
                                                     NodeSet(std::move(z_nodes)));
            if (out.effect && rec.true_effect) {
                if (*rec.true_effect == 0.0)
                    rec.re_excluded_zero_truth = true;
                else
                    rec.re = relative_error(*out.effect, *rec.true_effect);
            }
        } else if (out.no_effect && !out.no_effect->separating) {
            rec.witness = g.label(col_to_node[out.no_effect->witness]);
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL));
}

std::vector<CellKey> plan_cells(const BenchConfig& cfg) {
    std::vector<CellKey> cells;
    for (const auto& size : cfg.sizes)
        for (bool cyclic : cfg.cyclic_options)
            for (Form form : cfg.forms)
                for (NoiseMode noise : cfg.noise_modes)
                    for (bool edge : cfg.edge_options)
                        cells.push_back(CellKey{size, cyclic, form, noise, edge});
    return cells;
}

BenchResult run_benchmark(const BenchConfig& cfg) {
    if (cfg.repetitions <= 0) throw std::invalid_argument("repetitions must be positive");
    if (cfg.sample_sizes.empty()) throw std::invalid_argument("no sample sizes given");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("alpha must lie strictly between 0 and 1");
    if (cfg.jobs < 1) throw std::invalid_argument("jobs must be positive");

    const std::vector<CellKey> cells = plan_cells(cfg);
    if (cells.empty()) throw std::invalid_argument("benchmark plan is empty");

    struct Task {
        int cell_index;
        int rep;
        int n_index;
    };
    std::vector<Task> tasks;
    for (int c = 0; c < static_cast<int>(cells.size()); ++c)
        for (int rep = 0; rep < cfg.repetitions; ++rep)
            for (int ni = 0; ni < static_cast<int>(cfg.sample_sizes.size()); ++ni)
                tasks.push_back(Task{c, rep, ni});

    std::vector<InstanceRecord> records(tasks.size());
    std::vector<double> task_seconds(tasks.size(), 0.0);

    auto work = [&](int t) {
        const Task& task = tasks[t];
        const CellKey& cell = cells[task.cell_index];
        std::uint64_t graph_seed =
            mix_seed(cfg.seed, static_cast<std::uint64_t>(task.cell_index) * 1000003ULL +
                                   static_cast<std::uint64_t>(task.rep));
        std::uint64_t data_seed =
            mix_seed(graph_seed, static_cast<std::uint64_t>(task.n_index) + 1);
        auto t0 = std::chrono::steady_clock::now();
        records[t] = run_instance(cfg, cell, task.rep, cfg.sample_sizes[task.n_index],
                                  graph_seed, data_seed);
        task_seconds[t] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    if (cfg.jobs == 1) {
        for (size_t t = 0; t < tasks.size(); ++t) work(static_cast<int>(t));
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        const int threads = std::min<int>(cfg.jobs, static_cast<int>(tasks.size()));
        for (int i = 0; i < threads; ++i)
            pool.emplace_back([&] {
                while (true) {
                    size_t t = next.fetch_add(1);
                    if (t >= tasks.size()) break;
                    work(static_cast<int>(t));
                }
            });
        for (auto& th : pool) th.join();
    }

    for (const auto& rec : records)
        if (rec.error)
            std::fprintf(stderr, "instance failed (rep %d, n %d): %s\n", rec.rep,
                         rec.n_samples, rec.error->c_str());

    BenchResult result;
    result.instances = std::move(records);

    for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
        for (int ni = 0; ni < static_cast<int>(cfg.sample_sizes.size()); ++ni) {
            Sums sums;
            double seconds = 0.0;
            for (size_t t = 0; t < tasks.size(); ++t) {
                if (tasks[t].cell_index != c || tasks[t].n_index != ni) continue;
                const InstanceRecord& rec = result.instances[t];
                seconds += task_seconds[t];
                ++sums.total;
                if (rec.error) {
                    ++sums.failed;
                    continue;
                }
                sums.tests += rec.tests_used;
                if (rec.status && *rec.status != LsasOutcome::Status::Undecidable) {
                    ++sums.decided;
                    sums.decisions.emplace_back(
                        *rec.status == LsasOutcome::Status::Identified, rec.true_edge);
                }
                if (rec.re) sums.res.push_back(*rec.re);
                if (rec.z_valid) sums.precisions.push_back(*rec.z_valid ? 1.0 : 0.0);
            }
            MetricRow row = aggregate(cells[c], cfg.sample_sizes[ni], sums);
            row.wall_time_s = seconds;
            result.rows.push_back(row);
        }
    }
    return result;
}

double relative_error(double est, double truth) {
    if (truth == 0.0)
        throw std::invalid_argument("relative error is undefined for a zero truth");
    return std::abs(est - truth) / std::abs(truth);
}

double precision(const std::vector<NodeSet>& returned,
                 const std::vector<NodeSet>& valid) {
    if (returned.empty())
        throw std::invalid_argument("precision needs at least one returned set");
    int hits = 0;
    for (const auto& z : returned)
        if (std::find(valid.begin(), valid.end(), z) != valid.end()) ++hits;
    return static_cast<double>(hits) / returned.size();
}

double edge_fraction(const std::vector<std::pair<bool, bool>>& decisions) {
    if (decisions.empty())
        throw std::invalid_argument("edge fraction needs at least one decision");
    int agree = 0;
    for (auto [decided, truth] : decisions)
        if (decided == truth) ++agree;
    return static_cast<double>(agree) / decisions.size();
}

namespace {

std::string row_prefix(const MetricRow& r) {
    std::string line;
    line += std::to_string(r.cell.size.nodes) + ",";
    line += std::to_string(r.cell.size.edges) + ",";
    line += std::to_string(r.cell.size.latents) + ",";
    line += std::string(r.cell.cyclic ? "true" : "false") + ",";
    line += std::string(to_string(r.cell.form)) + ",";
    line += std::string(to_string(r.cell.noise)) + ",";
    line += std::string(r.cell.edge_xy ? "true" : "false") + ",";
    line += std::to_string(r.n_samples);
    return line;
}

}  // namespace

std::string metrics_to_csv(const std::vector<MetricRow>& rows) {
    std::string out =
        "nodes,edges,latents,cyclic,form,noise,edge_xy,n_samples,total,failed,"
        "decided,empty_fraction,ef,re_mean,re_sd,re_count,precision_mean,"
        "precision_sd,precision_count,mean_tests\n";
    for (const auto& r : rows) {
        out += row_prefix(r) + ",";
        out += std::to_string(r.total) + ",";
        out += std::to_string(r.failed) + ",";
        out += std::to_string(r.decided) + ",";
        out += opt_cell(r.empty_fraction) + ",";
        out += opt_cell(r.ef) + ",";
        out += opt_cell(r.re_mean) + ",";
        out += opt_cell(r.re_sd) + ",";
        out += std::to_string(r.re_count) + ",";
        out += opt_cell(r.precision_mean) + ",";
        out += opt_cell(r.precision_sd) + ",";
        out += std::to_string(r.precision_count) + ",";
        out += opt_cell(r.mean_tests) + "\n";
    }
    return out;
}

std::string timings_to_csv(const std::vector<MetricRow>& rows) {
    std::string out =
        "nodes,edges,latents,cyclic,form,noise,edge_xy,n_samples,wall_time_s\n";
    for (const auto& r : rows)
        out += row_prefix(r) + "," + format_double(r.wall_time_s) + "\n";
    return out;
}

std::string instances_to_jsonl(const std::vector<InstanceRecord>& instances) {
    std::string out;
    for (const auto& rec : instances) {
        nlohmann::ordered_json j;
        j["nodes"] = rec.cell.size.nodes;
        j["edges"] = rec.cell.size.edges;
        j["latents"] = rec.cell.size.latents;
        j["cyclic"] = rec.cell.cyclic;
        j["form"] = to_string(rec.cell.form);
        j["noise"] = to_string(rec.cell.noise);
        j["edge_xy"] = rec.cell.edge_xy;
        j["rep"] = rec.rep;
        j["n_samples"] = rec.n_samples;
        j["graph_seed"] = rec.graph_seed;
        j["data_seed"] = rec.data_seed;
        if (rec.error) {
            j["error"] = *rec.error;
        } else {
            j["status"] = status_name(*rec.status);
            j["true_edge"] = rec.true_edge;
            if (rec.true_effect) j["true_effect"] = *rec.true_effect;
            if (rec.effect) j["effect"] = *rec.effect;
            if (rec.witness) j["witness"] = *rec.witness;
            if (rec.adjustment) j["adjustment"] = *rec.adjustment;
            if (rec.edge_correct) j["edge_correct"] = *rec.edge_correct;
            if (rec.z_valid) j["z_valid"] = *rec.z_valid;
            if (rec.re) j["re"] = *rec.re;
            if (rec.re_excluded_zero_truth) j["re_excluded_zero_truth"] = true;
            j["tests_used"] = rec.tests_used;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_benchmark_outputs(const BenchResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + name);
        out << text;
        if (!out) throw std::runtime_error("write failed: " + name);
    };
    write("metrics.csv", metrics_to_csv(result.rows));
    write("timings.csv", timings_to_csv(result.rows));
    write("instances.jsonl", instances_to_jsonl(result.instances));
}

BenchConfig bench_config_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad benchmark config: ") + e.what());
    }
    BenchConfig cfg;
    try {
        for (const auto& s : doc.at("sizes"))
            cfg.sizes.push_back(SizeSpec{s.at("nodes").get<int>(),
                                         s.at("edges").get<int>(),
                                         s.at("latents").get<int>()});
        cfg.cyclic_options = doc.at("cyclic").get<std::vector<bool>>();
        for (const auto& f : doc.at("forms"))
            cfg.forms.push_back(form_from_string(f.get<std::string>()));
        for (const auto& m : doc.at("noise"))
            cfg.noise_modes.push_back(noise_mode_from_string(m.get<std::string>()));
        cfg.edge_options = doc.at("edge_xy").get<std::vector<bool>>();
        cfg.sample_sizes = doc.at("sample_sizes").get<std::vector<int>>();
        cfg.repetitions = doc.at("repetitions").get<int>();
        if (doc.contains("mb") && !doc["mb"].is_null()) {
            std::string mb = doc["mb"].get<std::string>();
            if (mb != "auto") cfg.mb = mb_algorithm_from_string(mb);
        }
        if (doc.contains("alpha")) cfg.alpha = doc["alpha"].get<double>();
        if (doc.contains("max_z") && !doc["max_z"].is_null())
            cfg.max_z = doc["max_z"].get<int>();
        if (doc.contains("ci")) {
            std::string ci = doc["ci"].get<std::string>();
            if (ci == "fisherz")
                cfg.ci = CiBackend::FisherZ;
            else if (ci == "oracle")
                cfg.ci = CiBackend::Oracle;
            else
                throw std::invalid_argument("unknown ci backend: " + ci);
        }
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("jobs")) cfg.jobs = doc["jobs"].get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad benchmark config: ") + e.what());
    }
    return cfg;
}

std::string bench_config_to_json(const BenchConfig& cfg) {
    nlohmann::ordered_json doc;
    auto& sizes = doc["sizes"] = nlohmann::ordered_json::array();
    for (const auto& s : cfg.sizes)
        sizes.push_back({{"nodes", s.nodes}, {"edges", s.edges}, {"latents", s.latents}});
    doc["cyclic"] = cfg.cyclic_options;
    auto& forms = doc["forms"] = nlohmann::ordered_json::array();
    for (Form f : cfg.forms) forms.push_back(to_string(f));
    auto& noise = doc["noise"] = nlohmann::ordered_json::array();
    for (NoiseMode m : cfg.noise_modes) noise.push_back(to_string(m));
    doc["edge_xy"] = cfg.edge_options;
    doc["sample_sizes"] = cfg.sample_sizes;
    doc["repetitions"] = cfg.repetitions;
    doc["mb"] = cfg.mb ? to_string(*cfg.mb) : "auto";
    doc["alpha"] = cfg.alpha;
    if (cfg.max_z)
        doc["max_z"] = *cfg.max_z;
    else
        doc["max_z"] = nullptr;
    doc["ci"] = cfg.ci == CiBackend::FisherZ ? "fisherz" : "oracle";
    doc["seed"] = cfg.seed;
    doc["jobs"] = cfg.jobs;
    return doc.dump(2) + "\n";
}

BenchConfig default_grid_config() {
    BenchConfig cfg;
    cfg.sizes = {{8, 12, 2},    {15, 19, 3},   {25, 40, 4},
                 {50, 78, 10},  {100, 150, 10}, {250, 360, 30}};
    cfg.cyclic_options = {false, true};
    cfg.forms = {Form::Linear, Form::Tanh};
    cfg.noise_modes = {NoiseMode::Gaussian, NoiseMode::NonGaussian, NoiseMode::Mixed};
    cfg.edge_options = {true, false};
    cfg.sample_sizes = {1000, 5000, 10000, 15000};
    cfg.repetitions = 25;
    cfg.alpha = 0.01;
    cfg.ci = CiBackend::FisherZ;
    cfg.seed = 1;
    return cfg;
}

}  // namespace cycad
