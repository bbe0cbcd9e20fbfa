#include "cycad/mb.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "cycad/adjustment.hpp"

namespace cycad {

namespace {

// total conditioning: one test per candidate against all the others
NodeSet tc_blanket(CiProvider& p, int target, const NodeSet& vars) {
    double level = p.alpha();
    if (const Dataset* data = p.data()) {
        int q = static_cast<int>(data->values.rows()) / 10;
        if (q > 0) level = p.alpha() / (10.0 * q);
    }
    std::vector<int> mb;
    for (int y : vars) {
        if (y == target) continue;
        NodeSet rest = vars.without(target).without(y);
        if (!p.independent_at(target, y, rest, level)) mb.push_back(y);
    }
    return NodeSet(std::move(mb));
}

// candidates ordered by strength when available, ascending index otherwise
std::vector<int> ordered_candidates(CiProvider& p, int target,
                                    const std::vector<int>& cands,
                                    const NodeSet& given) {
    std::vector<std::pair<double, int>> scored;
    scored.reserve(cands.size());
    bool have_strength = true;
    for (int y : cands) {
        auto s = p.association(target, y, given);
        if (!s) {
            have_strength = false;
            break;
        }
        scored.emplace_back(*s, y);
    }
    std::vector<int> out;
    out.reserve(cands.size());
    if (have_strength) {
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (const auto& [_, y] : scored) out.push_back(y);
    } else {
        out = cands;
    }
    return out;
}

void shrink(CiProvider& p, int target, NodeSet& mb) {
    const std::vector<int> snapshot = mb.values();
    for (int y : snapshot) {
        if (!mb.contains(y)) continue;
        if (p.independent(target, y, mb.without(y))) mb = mb.without(y);
    }
}

NodeSet iamb_blanket(CiProvider& p, int target, const NodeSet& vars) {
    NodeSet mb;
    while (true) {
        std::vector<int> cands;
        for (int y : vars)
            if (y != target && !mb.contains(y)) cands.push_back(y);
        if (cands.empty()) break;
        int added = -1;
        for (int y : ordered_candidates(p, target, cands, mb)) {
            if (!p.independent(target, y, mb)) {
                added = y;
                break;
            }
        }
        if (added < 0) break;
        mb = mb.with(added);
    }
    shrink(p, target, mb);
    return mb;
}

NodeSet fast_iamb_blanket(CiProvider& p, int target, const NodeSet& vars) {
    // without a strength ordering speculative batches lose their rationale,
    // so graph-backed providers take the one-at-a-time path
    if (!p.data()) return iamb_blanket(p, target, vars);

    NodeSet mb;
    std::vector<int> active;
    for (int y : vars)
        if (y != target && !p.independent(target, y, NodeSet{})) active.push_back(y);

    while (!active.empty()) {
        NodeSet before = mb;
        for (int y : ordered_candidates(p, target, active, mb))
            if (!mb.contains(y) && !p.independent(target, y, mb)) mb = mb.with(y);
        shrink(p, target, mb);
        active.clear();
        for (int y : vars)
            if (y != target && !mb.contains(y) && !p.independent(target, y, mb))
                active.push_back(y);
        if (mb == before) break;
    }
    return mb;
}

struct PcResult {
    NodeSet pc;
    std::map<int, NodeSet> sepset;  // for every screened-out candidate
};

// interleaved inclusion with subset elimination capped at size three
PcResult hiton_pc(CiProvider& p, int target, const NodeSet& vars) {
    constexpr int kSubsetCap = 3;
    PcResult result;
    std::vector<int> open;
    for (int y : vars) {
        if (y == target) continue;
        if (p.independent(target, y, NodeSet{}))
            result.sepset[y] = NodeSet{};
        else
            open.push_back(y);
    }
    open = ordered_candidates(p, target, open, NodeSet{});

    std::vector<int> tpc;
    for (int c : open) {
        tpc.push_back(c);
        for (size_t i = 0; i < tpc.size();) {
            int z = tpc[i];
            std::vector<int> rest;
            for (int w : tpc)
                if (w != z) rest.push_back(w);
            std::sort(rest.begin(), rest.end());
            bool removed = for_each_subset(rest, kSubsetCap, [&](const NodeSet& s) {
                if (p.independent(target, z, s)) {
                    result.sepset[z] = s;
                    return true;
                }
                return false;
            });
            if (removed)
                tpc.erase(tpc.begin() + i);
            else
                ++i;
        }
    }
    result.pc = NodeSet(std::move(tpc));
    return result;
}

NodeSet hiton_mb_blanket(CiProvider& p, int target, const NodeSet& vars) {
    PcResult pc = hiton_pc(p, target, vars);

    // spouse candidates: neighbors of neighbors kept when conditioning on the
    // shared neighbor revives the dependence
    std::map<int, std::vector<int>> via;
    for (int v : pc.pc) {
        PcResult around = hiton_pc(p, v, vars);
        for (int s : around.pc)
            if (s != target && !pc.pc.contains(s)) via[s].push_back(v);
    }
    NodeSet blanket = pc.pc;
    for (const auto& [cand, links] : via) {
        const NodeSet& sep = pc.sepset.at(cand);
        for (int v : links) {
            if (sep.contains(v)) continue;
            if (!p.independent(target, cand, sep.with(v))) {
                blanket = blanket.with(cand);
                break;
            }
        }
    }

    // backward pass against the whole candidate blanket
    const std::vector<int> snapshot = blanket.values();
    for (int y : snapshot) {
        if (!blanket.contains(y)) continue;
        if (p.independent(target, y, blanket.without(y))) blanket = blanket.without(y);
    }
    return blanket;
}

}  // namespace

NodeSet discover_mb(MbAlgorithm alg, CiProvider& provider, int target,
                    const NodeSet& vars) {
    if (!vars.contains(target))
        throw std::invalid_argument("target must be among the variables");
    NodeSet mb;
    switch (alg) {
        case MbAlgorithm::Tc: mb = tc_blanket(provider, target, vars); break;
        case MbAlgorithm::FastIamb: mb = fast_iamb_blanket(provider, target, vars); break;
        case MbAlgorithm::Iamb: mb = iamb_blanket(provider, target, vars); break;
        case MbAlgorithm::HitonMb: mb = hiton_mb_blanket(provider, target, vars); break;
    }
    return mb;
}

const char* to_string(MbAlgorithm alg) {
    switch (alg) {
        case MbAlgorithm::Tc: return "tc";
        case MbAlgorithm::FastIamb: return "fast-iamb";
        case MbAlgorithm::Iamb: return "iamb";
        default: return "hiton";
    }
}

MbAlgorithm mb_algorithm_from_string(const std::string& s) {
    if (s == "tc") return MbAlgorithm::Tc;
    if (s == "fast-iamb") return MbAlgorithm::FastIamb;
    if (s == "iamb") return MbAlgorithm::Iamb;
    if (s == "hiton") return MbAlgorithm::HitonMb;
    throw std::invalid_argument("unknown blanket algorithm: " + s);
}

}  // namespace cycad
