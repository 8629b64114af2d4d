#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "beop/instance.hpp"
#include "beop/roadnet.hpp"
#include "beop/rng.hpp"

namespace beop {

/// Decision state while routing the fleet sequentially: visited set, current
/// node, vehicle load, elapsed time of the current vehicle and the number of
/// vehicles (current one included) still to be routed.
struct MdpState {
    std::vector<std::uint8_t> visited;  // index 1..n
    int visited_count = 0;
    int current = 0;
    int load = 0;
    Ms elapsed = 0;
    int vehicles_left = 0;

    // Nodes whose evacuees were actually picked up. Identical to `visited` in
    // the deterministic process; diverges under stochastic deadlines/drops.
    std::vector<std::uint8_t> served;
    int served_prize = 0;

    bool operator==(const MdpState&) const = default;
};

struct StepOutcome {
    MdpState next;
    bool terminal = false;
    bool invalid = false;  // stochastic time-budget violation
    int reward = 0;        // defined only at terminal states
    int transition_case = 0;  // 1 = visit, 2 = end route, 3 = drop-off
};

MdpState initial_state(const BeopInstance& inst);

/// Nodes that are unvisited, fit the remaining capacity, allow a return to the
/// depot within T and can be reached before their deadline; plus the depot
/// while vehicles remain. Empty once the process has terminated.
std::vector<int> feasible_actions(const BeopInstance& inst, const MdpState& state);

/// Deterministic transition. Case 1 visits a node; action 0 either finishes
/// the current vehicle (Case 2, when nothing is reachable after the return) or
/// performs an intermediate drop-off (Case 3). Throws IllegalAction when the
/// action is not feasible.
StepOutcome step(const BeopInstance& inst, const MdpState& state, int action);

/// Single-vehicle stochastic transition: masking uses expected times, movement
/// uses realized times; late or emptied nodes are visited without prize or
/// load; a final return past T is an invalid terminal with reward 0.
StepOutcome step_stochastic(const BeopInstance& inst, const Realization& realization,
                            const MdpState& state, int action);

struct ActionProb {
    int action = 0;
    double prob = 0.0;
};

/// Anything that maps a state to a probability distribution over the feasible
/// actions. Implementations must put zero mass outside feasible_actions.
class RolloutPolicy {
public:
    virtual ~RolloutPolicy() = default;
    virtual std::vector<ActionProb> action_probabilities(const BeopInstance& inst,
                                                         const MdpState& state) const = 0;
};

enum class Decode {
    Sample,  // draw from the distribution
    Argmax,  // highest probability, ties to the lowest action id
};

struct TraceRecord {
    MdpState state_before;
    int action = 0;
    int transition_case = 0;
    Ms elapsed_after = 0;
};

struct RolloutResult {
    Solution solution;
    int reward = 0;
    double log_prob_sum = 0.0;
    std::vector<int> actions;  // the executed action sequence
};

/// Runs the deterministic MDP to termination under `policy`. A forced first
/// action (POMO start) must be feasible. Records one tour per fleet vehicle.
RolloutResult rollout(const BeopInstance& inst, const RolloutPolicy& policy, Rng& rng,
                      std::optional<int> first_action = std::nullopt,
                      Decode decode = Decode::Sample,
                      std::vector<TraceRecord>* trace = nullptr);

/// Executes a fixed action sequence under a realization, without masking: the
/// plan was made against expected values, reality may break it.
struct ReplayResult {
    int reward = 0;
    double quota = 0.0;
    bool invalid = false;
    int deadline_violations = 0;
};
ReplayResult replay_actions_stochastic(const BeopInstance& inst, const Realization& realization,
                                       const std::vector<int>& actions);

/// Flattens a solution back into the action sequence that produces it.
std::vector<int> actions_from_solution(const Solution& sol);

}  // namespace beop
