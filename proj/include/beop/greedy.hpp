#pragma once

#include <cstdint>
#include <vector>

#include "beop/instance.hpp"

namespace beop {

/// Precomputed tables for the greedy heuristic: travel times normalized by the
/// route budget, return costs through the depot, normalized deadlines.
struct GreedyContext {
    const BeopInstance* inst = nullptr;
    std::vector<double> dist_norm;     // travel / T
    std::vector<double> return_cost;   // dist_norm[i][j] + dist_norm[j][0]
    std::vector<double> deadline_norm; // deadline / T

    double d(int i, int j) const { return dist_norm[static_cast<std::size_t>(i) * (inst->n + 1) + j]; }
    double r(int i, int j) const { return return_cost[static_cast<std::size_t>(i) * (inst->n + 1) + j]; }
};

GreedyContext make_greedy_context(const BeopInstance& inst);

/// Unvisited nodes j with L + R[current][j] <= 1, arrival before the
/// normalized deadline and q + d_j <= C. The comparisons are evaluated in
/// exact integer milliseconds so the set matches the MDP mask bit for bit.
std::vector<int> possible_moves(const GreedyContext& ctx, double elapsed_norm, int current,
                                const std::vector<std::uint8_t>& visited, int load);

/// Ratio-driven tour construction: per vehicle, repeatedly visit the feasible
/// node maximizing prize / normalized distance; on an empty move set return to
/// the depot, reset the load and retry; the vehicle ends when nothing is
/// feasible from the depot.
Solution greedy_solve(const BeopInstance& inst);

}  // namespace beop
