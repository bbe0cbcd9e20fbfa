#include "cycad/ci.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace cycad {

namespace {

constexpr double kMaxCondition = 1e12;

std::string cache_key(int a, int b, const NodeSet& s) {
    if (a > b) std::swap(a, b);
    std::string key = std::to_string(a) + "|" + std::to_string(b) + "|";
    for (int v : s) {
        key += std::to_string(v);
        key += ',';
    }
    return key;
}

}  // namespace

CiProvider::CiProvider(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie strictly between 0 and 1");
}

void CiProvider::check_query(int a, int b, const NodeSet& s) const {
    if (a == b) throw std::invalid_argument("independence query needs distinct variables");
    if (s.contains(a) || s.contains(b))
        throw std::invalid_argument("query variables must not appear in the conditioning set");
}

CiProvider::TestResult CiProvider::evaluate(int a, int b, const NodeSet& s) {
    check_query(a, b, s);
    const std::string key = cache_key(a, b, s);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    TestResult result = run_test(a, b, s);
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = cache_.emplace(key, result);
    if (inserted) tests_.fetch_add(1);
    return it->second;
}

bool CiProvider::independent(int a, int b, const NodeSet& s) {
    return independent_at(a, b, s, alpha_);
}

bool CiProvider::independent_at(int a, int b, const NodeSet& s, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie strictly between 0 and 1");
    return evaluate(a, b, s).p_value > alpha;
}

std::optional<double> CiProvider::association(int a, int b, const NodeSet& s) {
    TestResult r = evaluate(a, b, s);
    if (!r.has_strength) return std::nullopt;
    return r.strength;
}

GraphOracle::GraphOracle(DirectedGraph g, double alpha)
    : CiProvider(alpha), g_(std::move(g)) {}

void GraphOracle::check_query(int a, int b, const NodeSet& s) const {
    CiProvider::check_query(a, b, s);
    if (!g_.is_observed(a) || !g_.is_observed(b))
        throw std::invalid_argument("oracle queries must use observed nodes");
    for (int v : s)
        if (!g_.is_observed(v))
            throw std::invalid_argument("oracle queries must condition on observed nodes");
}

CiProvider::TestResult GraphOracle::run_test(int a, int b, const NodeSet& s) {
    bool sep = is_separated(g_, SeparationKind::SigmaSeparation, a, b, s);
    return TestResult{sep ? 1.0 : 0.0, 0.0, false};
}

FisherZ::FisherZ(Dataset data, double alpha)
    : CiProvider(alpha), data_(std::move(data)) {
    const int n = static_cast<int>(data_.values.rows());
    const int d = static_cast<int>(data_.values.cols());
    if (n < 2) throw std::invalid_argument("need at least two samples");
    Eigen::MatrixXd centered =
        data_.values.rowwise() - data_.values.colwise().mean();
    Eigen::VectorXd sd = (centered.colwise().squaredNorm() / (n - 1.0))
                             .cwiseSqrt()
                             .transpose();
    for (int c = 0; c < d; ++c)
        if (sd(c) > 0.0) centered.col(c) /= sd(c);
    corr_ = centered.transpose() * centered / (n - 1.0);
    for (int c = 0; c < d; ++c)
        if (sd(c) == 0.0) {
            corr_.row(c).setZero();
            corr_.col(c).setZero();
            corr_(c, c) = 1.0;
        }
}

NodeSet FisherZ::variables() const {
    std::vector<int> all(data_.columns.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return NodeSet(std::move(all));
}

void FisherZ::check_query(int a, int b, const NodeSet& s) const {
    CiProvider::check_query(a, b, s);
    const int d = static_cast<int>(data_.columns.size());
    if (a < 0 || a >= d || b < 0 || b >= d)
        throw std::invalid_argument("column index out of range");
    for (int v : s)
        if (v < 0 || v >= d)
            throw std::invalid_argument("conditioning column out of range");
}

CiProvider::TestResult FisherZ::run_test(int a, int b, const NodeSet& s) {
    const int n = sample_count();
    const int k = s.size();
    const double dof = n - k - 3.0;
    if (dof <= 0.0)
        throw std::invalid_argument("too few samples for the conditioning set size");

    std::vector<int> idx = {a, b};
    for (int v : s) idx.push_back(v);
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) sub(r, c) = corr_(idx[r], idx[c]);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv(0), smin = sv(m - 1);
    Eigen::MatrixXd precision;
    if (smin <= 0.0 || smax / smin > kMaxCondition) {
        // near-singular conditioning: fall back to the pseudo-inverse
        if (degenerate_queries_.fetch_add(1) == 0)
            std::fprintf(stderr,
                         "warning: near-singular correlation submatrix, using "
                         "pseudo-inverse\n");
        Eigen::VectorXd inv = sv;
        for (int i = 0; i < m; ++i)
            inv(i) = sv(i) > smax * 1e-14 ? 1.0 / sv(i) : 0.0;
        precision = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    } else {
        precision = svd.solve(Eigen::MatrixXd::Identity(m, m));
    }

    const double paa = precision(0, 0), pbb = precision(1, 1), pab = precision(0, 1);
    if (!(paa > 0.0) || !(pbb > 0.0) || !std::isfinite(pab)) {
        // degenerate variance structure: treat the pair as dependent
        if (degenerate_queries_.fetch_add(1) == 0)
            std::fprintf(stderr,
                         "warning: degenerate conditioning covariance, "
                         "reporting dependence\n");
        return TestResult{0.0, std::numeric_limits<double>::infinity(), true};
    }
    double r = -pab / std::sqrt(paa * pbb);
    r = std::clamp(r, -(1.0 - 1e-15), 1.0 - 1e-15);
    const double z = std::sqrt(dof) * std::atanh(r);
    const double p = std::erfc(std::abs(z) / std::sqrt(2.0));
    return TestResult{p, std::abs(z), true};
}

}  // namespace cycad
