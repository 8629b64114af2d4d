#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "beop/instance.hpp"

namespace beop {

struct BnbLimits {
    std::int64_t node_budget = std::numeric_limits<std::int64_t>::max();
    double time_budget_s = std::numeric_limits<double>::infinity();
    int subtour_cap = 0;  // 0 = unlimited intermediate returns per vehicle
};

struct ExactResult {
    Solution best;
    int best_prize = 0;
    int upper_bound = 0;
    bool proven_optimal = false;
    std::int64_t nodes_explored = 0;
};

/// Depth-first branch and bound over the sequential routing process. Prunes
/// with an admissible per-node reachability bound and breaks vehicle symmetry
/// (fresh vehicles must open with increasing node ids). Exhausting a budget
/// returns the incumbent with proven_optimal=false and a valid upper bound.
ExactResult exact_solve(const BeopInstance& inst, const BnbLimits& limits = {});

/// Writes the mixed-integer program in LP text format: binary edge/visit
/// variables per vehicle subtour, MTZ ordering, per-vehicle time budget over
/// its ordered subtours, and (only when windows exist) arrival-time variables
/// with big-M linking and subtour start-time chaining.
std::string emit_milp_lp(const BeopInstance& inst, int subtours_per_vehicle = 3);

/// Maps a feasible solution onto the subtour-indexed variables and emits a
/// complete MST-style start (x, y, order and arrival values). Throws
/// TooManySubtours when a vehicle uses more segments than the cap.
std::string emit_warm_start_mst(const BeopInstance& inst, const Solution& sol,
                                int subtours_per_vehicle = 3);

}  // namespace beop
