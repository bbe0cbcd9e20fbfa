#pragma once

#include <cstdint>
#include <optional>

#include "cycad/ci.hpp"
#include "cycad/mb.hpp"

namespace cycad {

// Witness/set pair certifying that the direct effect is identifiable: w is
// dependent on y given z but becomes independent once x joins the
// conditioning set, so z is a valid adjustment set.
struct R1Hit {
    int witness;
    NodeSet z;

    bool operator==(const R1Hit&) const = default;
};

// Evidence that the x -> y edge is absent: either a separating set for the
// pair, or a witness w bound to x but separated from y.
struct R2Evidence {
    bool separating;  // true: z separates x from y; false: witness form
    NodeSet z;
    int witness = -1;  // meaningful only in the witness form

    bool operator==(const R2Evidence&) const = default;
};

struct LsasOutcome {
    enum class Status { Identified, NoEffect, Undecidable };
    Status status = Status::Undecidable;
    std::optional<double> effect;  // present only with a linear data backend
    std::optional<R1Hit> identified;
    std::optional<R2Evidence> no_effect;
    std::int64_t tests_used = 0;
};

// First witness/subset pair satisfying the identification rule; witnesses in
// ascending order, subsets by size then lexicographic, capped at max_z.
std::optional<R1Hit> check_r1(CiProvider& p, int x, int y, const NodeSet& mb_x,
                              const NodeSet& mb_y, std::optional<int> max_z);

// First evidence of edge absence; at each subset size the separating-set
// form is tried before the witness form.
std::optional<R2Evidence> check_r2(CiProvider& p, int x, int y,
                                   const NodeSet& mb_x, const NodeSet& mb_y,
                                   std::optional<int> max_z);

// Blanket discovery for x and y followed by the rule search. Edge-absence
// evidence anywhere wins; otherwise the first identification hit is
// returned, with an effect estimate when requested and a dataset is present.
// Defaults: max_z unbounded while the y blanket has at most 12 members,
// otherwise 10.
LsasOutcome run_lsas(CiProvider& p, int x, int y, MbAlgorithm mb_alg,
                     std::optional<int> max_z = std::nullopt,
                     bool estimate = true);

// Least-squares coefficient on column x when regressing column y on an
// intercept, x and the z columns. Degenerate designs (collinear columns or
// y identical to x) raise.
double estimate_effect(const Dataset& data, int x, int y, const NodeSet& z);

}  // namespace cycad
