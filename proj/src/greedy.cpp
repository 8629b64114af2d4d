#include "beop/greedy.hpp"

#include <cmath>
#include <limits>

namespace beop {

namespace {

Ms unnormalize(const BeopInstance& inst, double elapsed_norm) {
    return static_cast<Ms>(std::llround(elapsed_norm * static_cast<double>(inst.max_time)));
}

// Highest prize / distance ratio; zero-distance candidates outrank every
// finite ratio and are ordered by prize, then index. Finite ties break to the
// lowest node id.
int pick_best_ratio(const GreedyContext& ctx, int current, const std::vector<int>& moves) {
    const BeopInstance& inst = *ctx.inst;
    int best = -1;
    bool best_free = false;
    double best_ratio = -std::numeric_limits<double>::infinity();
    int best_prize = -1;
    for (int j : moves) {
        const double d = ctx.d(current, j);
        if (d == 0.0) {
            if (!best_free || inst.prize[j] > best_prize) {
                best = j;
                best_free = true;
                best_prize = inst.prize[j];
            }
            continue;
        }
        if (best_free) continue;
        const double ratio = static_cast<double>(inst.prize[j]) / d;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = j;
        }
    }
    return best;
}

}  // namespace

GreedyContext make_greedy_context(const BeopInstance& inst) {
    GreedyContext ctx;
    ctx.inst = &inst;
    const std::size_t nn = static_cast<std::size_t>(inst.n) + 1;
    const double t_max = static_cast<double>(inst.max_time);
    ctx.dist_norm.resize(nn * nn);
    ctx.return_cost.resize(nn * nn);
    ctx.deadline_norm.resize(nn);
    for (std::size_t idx = 0; idx < inst.travel.size(); ++idx) {
        ctx.dist_norm[idx] = static_cast<double>(inst.travel[idx]) / t_max;
    }
    for (int i = 0; i <= inst.n; ++i) {
        for (int j = 0; j <= inst.n; ++j) {
            ctx.return_cost[static_cast<std::size_t>(i) * nn + j] = ctx.d(i, j) + ctx.d(j, 0);
        }
        ctx.deadline_norm[i] = static_cast<double>(inst.deadline[i]) / t_max;
    }
    return ctx;
}

std::vector<int> possible_moves(const GreedyContext& ctx, double elapsed_norm, int current,
                                const std::vector<std::uint8_t>& visited, int load) {
    const BeopInstance& inst = *ctx.inst;
    // The normalized budget L came from an integer elapsed; recover it so the
    // three predicates stay exact.
    const Ms elapsed = unnormalize(inst, elapsed_norm);
    std::vector<int> moves;
    for (int j = 1; j <= inst.n; ++j) {
        if (visited[j]) continue;
        if (load + inst.demand[j] > inst.capacity) continue;
        if (elapsed + inst.t(current, j) + inst.t(j, 0) > inst.max_time) continue;
        if (elapsed + inst.t(current, j) > inst.deadline[j]) continue;
        moves.push_back(j);
    }
    return moves;
}

Solution greedy_solve(const BeopInstance& inst) {
    const GreedyContext ctx = make_greedy_context(inst);
    const double t_max = static_cast<double>(inst.max_time);
    Solution sol;
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(inst.n) + 1, 0);

    for (int k = 0; k < inst.num_vehicles; ++k) {
        Tour tour;
        tour.vehicle = k;
        tour.nodes.push_back(0);
        Ms elapsed = 0;
        int load = 0;
        int last = 0;

        std::vector<int> moves =
            possible_moves(ctx, static_cast<double>(elapsed) / t_max, last, visited, load);
        while (!moves.empty()) {
            const int m = pick_best_ratio(ctx, last, moves);
            elapsed += inst.t(last, m);
            load += inst.demand[m];
            visited[m] = 1;
            tour.nodes.push_back(m);
            last = m;
            if (m == 0) load = 0;  // unreachable: the move set never offers the depot

            moves = possible_moves(ctx, static_cast<double>(elapsed) / t_max, last, visited, load);
            if (moves.empty()) {
                // Drop off and retry from the depot before giving up.
                elapsed += inst.t(last, 0);
                load = 0;
                tour.nodes.push_back(0);
                last = 0;
                moves = possible_moves(ctx, static_cast<double>(elapsed) / t_max, last, visited, load);
            }
        }
        if (tour.nodes.size() == 1 || tour.nodes.back() != 0) tour.nodes.push_back(0);
        sol.tours.push_back(std::move(tour));
    }

    int collected = 0;
    for (int v = 1; v <= inst.n; ++v) {
        if (visited[v]) collected += inst.prize[v];
    }
    sol.collected_prize = collected;
    const int total = inst.total_prize();
    sol.quota = total > 0 ? static_cast<double>(collected) / total : 0.0;
    return sol;
}

}  // namespace beop
