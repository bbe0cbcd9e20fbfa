#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>

#include <Eigen/Dense>

#include "cycad/scm.hpp"
#include "cycad/separation.hpp"

namespace cycad {

// Answers conditional independence queries. Verdicts are cached under the
// symmetric (a, b, s) key; the counter counts distinct evaluated queries, so
// cache hits do not inflate it. Safe to share across threads.
class CiProvider {
public:
    virtual ~CiProvider() = default;

    bool independent(int a, int b, const NodeSet& s);
    // same cached statistic judged at another level
    bool independent_at(int a, int b, const NodeSet& s, double alpha);
    // strength used for candidate ordering; absent for graph-backed providers
    std::optional<double> association(int a, int b, const NodeSet& s);

    std::int64_t tests_used() const { return tests_.load(); }
    double alpha() const { return alpha_; }
    virtual NodeSet variables() const = 0;
    virtual const Dataset* data() const { return nullptr; }

protected:
    explicit CiProvider(double alpha);

    struct TestResult {
        double p_value;
        double strength;
        bool has_strength;
    };
    virtual TestResult run_test(int a, int b, const NodeSet& s) = 0;
    virtual void check_query(int a, int b, const NodeSet& s) const;

private:
    TestResult evaluate(int a, int b, const NodeSet& s);

    double alpha_;
    std::atomic<std::int64_t> tests_{0};
    std::mutex mu_;
    std::unordered_map<std::string, TestResult> cache_;
};

// Separation queries against a known graph; only observed nodes may appear.
class GraphOracle final : public CiProvider {
public:
    explicit GraphOracle(DirectedGraph g, double alpha = 0.01);

    NodeSet variables() const override { return g_.observed(); }
    const DirectedGraph& graph() const { return g_; }

protected:
    TestResult run_test(int a, int b, const NodeSet& s) override;
    void check_query(int a, int b, const NodeSet& s) const override;

private:
    DirectedGraph g_;
};

// Partial-correlation test on a dataset. The correlation matrix is built
// once; per query the submatrix over {a, b} union s is inverted (with a
// pseudo-inverse fallback past condition number 1e12) and the z statistic
// sqrt(n - |s| - 3) * atanh(r) is judged against the two-sided normal level.
class FisherZ final : public CiProvider {
public:
    explicit FisherZ(Dataset data, double alpha = 0.01);

    NodeSet variables() const override;
    const Dataset* data() const override { return &data_; }
    int sample_count() const { return static_cast<int>(data_.values.rows()); }

protected:
    TestResult run_test(int a, int b, const NodeSet& s) override;
    void check_query(int a, int b, const NodeSet& s) const override;

private:
    Dataset data_;
    Eigen::MatrixXd corr_;
    std::atomic<std::int64_t> degenerate_queries_{0};
};

}  // namespace cycad
