#include "beop/mdp.hpp"

#include <algorithm>
#include <cmath>

#include "beop/errors.hpp"

namespace beop {

namespace {

constexpr int kMaxRolloutSteps = 100000;

bool node_action_feasible(const BeopInstance& inst, const MdpState& s, int v) {
    if (v < 1 || v > inst.n || s.visited[v]) return false;
    if (s.load + inst.demand[v] > inst.capacity) return false;
    if (s.elapsed + inst.t(s.current, v) + inst.t(v, 0) > inst.max_time) return false;
    if (s.elapsed + inst.t(s.current, v) > inst.deadline[v]) return false;
    return true;
}

// Case 2 vs Case 3 discriminator: can any unvisited node still be served by
// the current vehicle after dropping off at the depot?
bool reachable_after_return(const BeopInstance& inst, const MdpState& s) {
    const Ms at_depot = s.elapsed + inst.t(s.current, 0);
    for (int v = 1; v <= inst.n; ++v) {
        if (s.visited[v]) continue;
        if (at_depot + inst.t(0, v) + inst.t(v, 0) > inst.max_time) continue;
        if (at_depot + inst.t(0, v) > inst.deadline[v]) continue;
        return true;
    }
    return false;
}

int argmax_action(const std::vector<ActionProb>& dist, bool nodes_only) {
    int best = -1;
    double best_prob = -1.0;
    for (const auto& ap : dist) {
        if (nodes_only && ap.action == 0) continue;
        if (ap.prob > best_prob || (ap.prob == best_prob && ap.action < best)) {
            best_prob = ap.prob;
            best = ap.action;
        }
    }
    return best;
}

}  // namespace

MdpState initial_state(const BeopInstance& inst) {
    MdpState s;
    s.visited.assign(static_cast<std::size_t>(inst.n) + 1, 0);
    s.served.assign(static_cast<std::size_t>(inst.n) + 1, 0);
    s.vehicles_left = inst.num_vehicles;
    return s;
}

std::vector<int> feasible_actions(const BeopInstance& inst, const MdpState& state) {
    std::vector<int> actions;
    if (state.vehicles_left <= 0) return actions;
    for (int v = 1; v <= inst.n; ++v) {
        if (node_action_feasible(inst, state, v)) actions.push_back(v);
    }
    actions.push_back(0);
    return actions;
}

StepOutcome step(const BeopInstance& inst, const MdpState& state, int action) {
    if (state.vehicles_left <= 0) throw IllegalAction("step on a terminal state");
    StepOutcome out;
    out.next = state;
    if (action != 0) {
        if (!node_action_feasible(inst, state, action)) {
            throw IllegalAction("action " + std::to_string(action) + " is not feasible");
        }
        out.transition_case = 1;
        out.next.visited[action] = 1;
        out.next.visited_count += 1;
        out.next.served[action] = 1;
        out.next.served_prize += inst.prize[action];
        out.next.current = action;
        out.next.load += inst.demand[action];
        out.next.elapsed += inst.t(state.current, action);
        return out;
    }
    if (reachable_after_return(inst, state)) {
        out.transition_case = 3;
        out.next.elapsed += inst.t(state.current, 0);
        out.next.current = 0;
        out.next.load = 0;
        return out;
    }
    out.transition_case = 2;
    out.next.current = 0;
    out.next.load = 0;
    out.next.elapsed = 0;
    out.next.vehicles_left -= 1;
    if (out.next.vehicles_left == 0 || out.next.visited_count == inst.n) {
        out.terminal = true;
        out.reward = out.next.served_prize;
    }
    return out;
}

StepOutcome step_stochastic(const BeopInstance& inst, const Realization& realization,
                            const MdpState& state, int action) {
    if (inst.num_vehicles != 1) {
        throw RequiresSingleVehicle("the stochastic process routes a single vehicle");
    }
    if (state.vehicles_left <= 0) throw IllegalAction("step on a terminal state");
    const auto realized = [&](int i, int j) {
        return realization.realized_travel[static_cast<std::size_t>(i) * (inst.n + 1) + j];
    };
    StepOutcome out;
    out.next = state;
    if (action != 0) {
        // Masking uses expected travel times; the realized leg may differ.
        if (!node_action_feasible(inst, state, action)) {
            throw IllegalAction("action " + std::to_string(action) + " is not feasible");
        }
        out.transition_case = 1;
        out.next.visited[action] = 1;
        out.next.visited_count += 1;
        out.next.current = action;
        out.next.elapsed += realized(state.current, action);
        const bool on_time = out.next.elapsed <= inst.deadline[action];
        const bool waiting = realization.realized_demand[action] > 0;
        if (on_time && waiting) {
            out.next.load += realization.realized_demand[action];
            out.next.served[action] = 1;
            out.next.served_prize += inst.prize[action];
        }
        return out;
    }
    if (reachable_after_return(inst, state)) {
        out.transition_case = 3;
        out.next.elapsed += realized(state.current, 0);
        out.next.current = 0;
        out.next.load = 0;
        return out;
    }
    out.transition_case = 2;
    const Ms final_elapsed = state.elapsed + realized(state.current, 0);
    out.next.current = 0;
    out.next.load = 0;
    out.next.elapsed = 0;
    out.next.vehicles_left -= 1;
    out.terminal = true;
    if (final_elapsed > inst.max_time) {
        out.invalid = true;
        out.reward = 0;
    } else {
        out.reward = out.next.served_prize;
    }
    return out;
}

RolloutResult rollout(const BeopInstance& inst, const RolloutPolicy& policy, Rng& rng,
                      std::optional<int> first_action, Decode decode,
                      std::vector<TraceRecord>* trace) {
    RolloutResult result;
    MdpState state = initial_state(inst);
    std::vector<Tour> tours;
    std::vector<int> current(1, 0);  // growing tour of the active vehicle
    int steps = 0;

    while (true) {
        if (++steps > kMaxRolloutSteps) {
            throw IllegalAction("rollout exceeded the step budget; policy does not terminate");
        }
        const std::vector<ActionProb> dist = policy.action_probabilities(inst, state);
        if (dist.empty()) throw IllegalAction("policy returned an empty distribution");

        // Holding at the depot repeats this exact state (Case 3 with a zero
        // leg), so whenever a node action exists the hold is collapsed away;
        // it adds no reward and no progress.
        const bool collapse_hold =
            state.current == 0 && std::any_of(dist.begin(), dist.end(),
                                              [](const ActionProb& ap) { return ap.action != 0; });

        int action;
        if (steps == 1 && first_action) {
            action = *first_action;
            if (std::none_of(dist.begin(), dist.end(),
                             [&](const ActionProb& ap) { return ap.action == action; })) {
                throw IllegalAction("forced first action is not feasible");
            }
        } else if (decode == Decode::Argmax) {
            action = argmax_action(dist, collapse_hold);
        } else {
            double total = 1.0;
            if (collapse_hold) {
                total = 0.0;
                for (const auto& ap : dist) {
                    if (ap.action != 0) total += ap.prob;
                }
            }
            const double u = rng.uniform01() * total;
            double cum = 0.0;
            action = -1;
            for (const auto& ap : dist) {
                if (collapse_hold && ap.action == 0) continue;
                cum += ap.prob;
                if (u < cum) {
                    action = ap.action;
                    break;
                }
            }
            if (action == -1) {
                for (auto it = dist.rbegin(); it != dist.rend(); ++it) {
                    if (!(collapse_hold && it->action == 0)) {
                        action = it->action;
                        break;
                    }
                }
            }
        }

        double prob = 0.0;
        for (const auto& ap : dist) {
            if (ap.action == action) {
                prob = ap.prob;
                break;
            }
        }
        result.log_prob_sum += std::log(std::max(prob, 1e-300));
        result.actions.push_back(action);

        const StepOutcome outcome = step(inst, state, action);
        if (trace) {
            trace->push_back(TraceRecord{state, action, outcome.transition_case,
                                         outcome.transition_case == 2
                                             ? state.elapsed + inst.t(state.current, 0)
                                             : outcome.next.elapsed});
        }
        if (outcome.transition_case == 1) {
            current.push_back(action);
        } else {
            current.push_back(0);
            if (outcome.transition_case == 2) {
                Tour tour;
                tour.vehicle = static_cast<int>(tours.size());
                if (current.size() == 1) current.push_back(0);
                tour.nodes = std::move(current);
                tours.push_back(std::move(tour));
                current.assign(1, 0);
            }
        }
        state = outcome.next;
        if (outcome.terminal) {
            result.reward = outcome.reward;
            break;
        }
    }
    while (static_cast<int>(tours.size()) < inst.num_vehicles) {
        Tour tour;
        tour.vehicle = static_cast<int>(tours.size());
        tour.nodes = {0, 0};
        tours.push_back(std::move(tour));
    }
    result.solution.tours = std::move(tours);
    result.solution.collected_prize = result.reward;
    const int total = inst.total_prize();
    result.solution.quota = total > 0 ? static_cast<double>(result.reward) / total : 0.0;
    return result;
}

ReplayResult replay_actions_stochastic(const BeopInstance& inst, const Realization& realization,
                                       const std::vector<int>& actions) {
    if (inst.num_vehicles != 1) {
        throw RequiresSingleVehicle("replay is defined for single-vehicle plans");
    }
    const auto realized = [&](int i, int j) {
        return realization.realized_travel[static_cast<std::size_t>(i) * (inst.n + 1) + j];
    };
    ReplayResult result;
    int cur = 0;
    Ms elapsed = 0;
    for (int a : actions) {
        elapsed += realized(cur, a);
        if (a != 0) {
            if (elapsed > inst.deadline[a]) {
                result.deadline_violations += 1;
            } else if (realization.realized_demand[a] > 0) {
                result.reward += inst.prize[a];
            }
        }
        cur = a;
    }
    if (elapsed > inst.max_time) {
        result.invalid = true;
        result.reward = 0;
        result.quota = 0.0;
        return result;
    }
    const int total = inst.total_prize();
    result.quota = total > 0 ? static_cast<double>(result.reward) / total : 0.0;
    return result;
}

std::vector<int> actions_from_solution(const Solution& sol) {
    std::vector<int> actions;
    for (const auto& tour : sol.tours) {
        for (std::size_t p = 1; p < tour.nodes.size(); ++p) actions.push_back(tour.nodes[p]);
        if (tour.nodes.size() <= 1) actions.push_back(0);
    }
    return actions;
}

}  // namespace beop
