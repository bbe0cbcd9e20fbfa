#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cycad/lsas.hpp"
#include "cycad/scm.hpp"

namespace cycad {

struct SizeSpec {
    int nodes;
    int edges;
    int latents;
};

enum class CiBackend { FisherZ, Oracle };

struct BenchConfig {
    std::vector<SizeSpec> sizes;
    std::vector<bool> cyclic_options;
    std::vector<Form> forms;
    std::vector<NoiseMode> noise_modes;
    std::vector<bool> edge_options;
    std::vector<int> sample_sizes;
    int repetitions = 25;
    std::optional<MbAlgorithm> mb;  // empty: tc up to 50 nodes, fast-iamb above
    double alpha = 0.01;
    std::optional<int> max_z;
    CiBackend ci = CiBackend::FisherZ;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct CellKey {
    SizeSpec size;
    bool cyclic;
    Form form;
    NoiseMode noise;
    bool edge_xy;
};

struct InstanceRecord {
    CellKey cell;
    int rep = 0;
    int n_samples = 0;
    std::uint64_t graph_seed = 0;
    std::uint64_t data_seed = 0;
    std::optional<LsasOutcome::Status> status;  // empty on failure
    std::optional<double> effect;
    std::optional<std::vector<std::string>> adjustment;
    std::optional<std::string> witness;
    bool true_edge = false;
    std::optional<double> true_effect;
    std::optional<bool> edge_correct;  // only when decided
    std::optional<bool> z_valid;       // only when identified
    std::optional<double> re;          // only for estimated nonzero truths
    bool re_excluded_zero_truth = false;
    std::int64_t tests_used = 0;
    std::optional<std::string> error;
};

struct MetricRow {
    CellKey cell;
    int n_samples = 0;
    int total = 0;
    int failed = 0;
    int decided = 0;
    std::optional<double> empty_fraction;
    std::optional<double> ef;
    std::optional<double> re_mean;
    std::optional<double> re_sd;
    int re_count = 0;
    std::optional<double> precision_mean;
    std::optional<double> precision_sd;
    int precision_count = 0;
    std::optional<double> mean_tests;
    double wall_time_s = 0.0;
};

struct BenchResult {
    std::vector<MetricRow> rows;
    std::vector<InstanceRecord> instances;
};

// deterministic instance seeding: same config and seed, same bytes out
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

std::vector<CellKey> plan_cells(const BenchConfig& cfg);

BenchResult run_benchmark(const BenchConfig& cfg);

// |est - truth| / |truth|; zero truths are the caller's job to exclude
double relative_error(double est, double truth);

// fraction of returned sets present in valid
double precision(const std::vector<NodeSet>& returned,
                 const std::vector<NodeSet>& valid);

// fraction of (decided, truth) pairs that agree
double edge_fraction(const std::vector<std::pair<bool, bool>>& decisions);

// metrics.csv carries no timing column so equal seeds give equal bytes;
// wall times land in timings.csv instead
std::string metrics_to_csv(const std::vector<MetricRow>& rows);
std::string timings_to_csv(const std::vector<MetricRow>& rows);
std::string instances_to_jsonl(const std::vector<InstanceRecord>& instances);
void write_benchmark_outputs(const BenchResult& result, const std::string& dir);

BenchConfig bench_config_from_json(const std::string& text);
std::string bench_config_to_json(const BenchConfig& cfg);

// the published evaluation grid: six graph sizes, both structures, both
// forms, three noise modes, both edge settings, four sample sizes, 25
// repetitions per cell (600 graphs per size)
BenchConfig default_grid_config();

}  // namespace cycad
