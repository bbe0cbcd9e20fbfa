#include "cycad/lsas.hpp"

#include <limits>
#include <stdexcept>

#include "cycad/adjustment.hpp"

namespace cycad {

namespace {

int subset_cap(const NodeSet& pool, std::optional<int> max_z) {
    if (max_z) {
        if (*max_z < 0) throw std::invalid_argument("max_z must be nonnegative");
        return *max_z;
    }
    return pool.size() <= 12 ? pool.size() : 10;
}

void check_pair(int x, int y) {
    if (x == y) throw std::invalid_argument("treatment and outcome must differ");
}

}  // namespace

std::optional<R1Hit> check_r1(CiProvider& p, int x, int y, const NodeSet& mb_x,
                              const NodeSet& mb_y, std::optional<int> max_z) {
    check_pair(x, y);
    std::optional<R1Hit> hit;
    for (int w : mb_x.without(y)) {
        if (w == x) continue;
        const NodeSet pool = mb_y.without(x).without(w);
        const int cap = subset_cap(pool, max_z);
        for_each_subset(pool.values(), cap, [&](const NodeSet& z) {
            if (!p.independent(w, y, z) && p.independent(w, y, z.with(x))) {
                hit = R1Hit{w, z};
                return true;
            }
            return false;
        });
        if (hit) break;
    }
    return hit;
}

std::optional<R2Evidence> check_r2(CiProvider& p, int x, int y,
                                   const NodeSet& mb_x, const NodeSet& mb_y,
                                   std::optional<int> max_z) {
    check_pair(x, y);
    const NodeSet sep_pool = mb_y.without(x);
    std::vector<int> witnesses;
    for (int w : mb_x.without(y))
        if (w != x) witnesses.push_back(w);

    int cap = subset_cap(sep_pool, max_z);
    for (int size = 0; size <= cap; ++size) {
        // separating-set form first at every size
        std::optional<R2Evidence> found;
        for_each_subset(sep_pool.values(), size, [&](const NodeSet& z) {
            if (z.size() != size) return false;
            if (p.independent(x, y, z)) {
                found = R2Evidence{true, z, -1};
                return true;
            }
            return false;
        });
        if (found) return found;

        for (int w : witnesses) {
            const NodeSet pool = sep_pool.without(w);
            for_each_subset(pool.values(), std::min(size, pool.size()), [&](const NodeSet& z) {
                if (z.size() != size) return false;
                if (!p.independent(w, x, z) && p.independent(w, y, z)) {
                    found = R2Evidence{false, z, w};
                    return true;
                }
                return false;
            });
            if (found) return found;
        }
    }
    return std::nullopt;
}

LsasOutcome run_lsas(CiProvider& p, int x, int y, MbAlgorithm mb_alg,
                     std::optional<int> max_z, bool estimate) {
    check_pair(x, y);
    const std::int64_t before = p.tests_used();
    const NodeSet vars = p.variables();
    if (!vars.contains(x) || !vars.contains(y))
        throw std::invalid_argument("treatment and outcome must be provider variables");

    LsasOutcome out;
    const NodeSet mb_x = discover_mb(mb_alg, p, x, vars);
    const NodeSet mb_y = discover_mb(mb_alg, p, y, vars);

    if (auto r2 = check_r2(p, x, y, mb_x, mb_y, max_z)) {
        out.status = LsasOutcome::Status::NoEffect;
        out.no_effect = r2;
        out.effect = 0.0;  // the rule's conclusion, not an estimate
    } else if (auto r1 = check_r1(p, x, y, mb_x, mb_y, max_z)) {
        out.status = LsasOutcome::Status::Identified;
        out.identified = r1;
        if (estimate && p.data())
            out.effect = estimate_effect(*p.data(), x, y, r1->z);
    }
    out.tests_used = p.tests_used() - before;
    return out;
}

double estimate_effect(const Dataset& data, int x, int y, const NodeSet& z) {
    const int n = static_cast<int>(data.values.rows());
    const int d = static_cast<int>(data.values.cols());
    if (x < 0 || x >= d || y < 0 || y >= d || x == y)
        throw std::invalid_argument("bad effect columns");
    if (z.contains(x) || z.contains(y))
        throw std::invalid_argument("adjustment columns must exclude x and y");
    for (int v : z)
        if (v < 0 || v >= d) throw std::invalid_argument("adjustment column out of range");
    if ((data.values.col(x).array() == data.values.col(y).array()).all())
        throw std::invalid_argument("outcome column is identical to the treatment column");

    const int cols = 2 + z.size();
    if (n < cols) throw std::invalid_argument("too few rows for the regression");
    Eigen::MatrixXd design(n, cols);
    design.col(0).setOnes();
    design.col(1) = data.values.col(x);
    int c = 2;
    for (int v : z) design.col(c++) = data.values.col(v);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < cols)
        throw std::invalid_argument("regression design is rank deficient");
    Eigen::VectorXd beta = qr.solve(data.values.col(y));
    if (!beta.allFinite()) throw std::runtime_error("regression failed");
    return beta(1);
}

}  // namespace cycad
