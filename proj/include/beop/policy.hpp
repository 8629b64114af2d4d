#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "beop/instance.hpp"
#include "beop/mdp.hpp"
#include "beop/rng.hpp"

namespace beop {

constexpr int kEdgeFeatureCount = 10;
constexpr int kStateFeatureCount = 7;
constexpr int kPolicyWeightCount = kEdgeFeatureCount + kStateFeatureCount;

/// Per directed edge (i, j): raw time, budget-normalized times, competitive
/// ratios against the best/average way in and out, target demand, return
/// time and the normalized deadline of the target.
using EdgeFeatures = std::array<double, kEdgeFeatureCount>;

/// Feature table over all ordered pairs; the diagonal rows are zero-filled.
struct EdgeFeatureTable {
    int size = 0;  // n + 1
    std::vector<EdgeFeatures> features;

    const EdgeFeatures& at(int i, int j) const {
        return features[static_cast<std::size_t>(i) * size + j];
    }
};

/// Ratio denominators of zero (duplicate coordinates) fall back to 1 for the
/// affected pairs.
EdgeFeatureTable edge_features(const BeopInstance& inst);

/// Scalar summaries of the decision state: load, elapsed and fleet fractions,
/// prize progress, return time, feasible-set size and its mean distance.
std::array<double, kStateFeatureCount> state_features(const BeopInstance& inst,
                                                      const MdpState& state);

struct PolicyParams {
    std::array<double, kPolicyWeightCount> weights{};  // edge then state features
    double depot_bias = 0.0;
    double temperature = 1.0;
};

/// Softmax over the feasible actions: node logits are linear in the edge and
/// state features, the depot carries its own bias; infeasible actions get no
/// mass at all.
std::vector<ActionProb> action_distribution(const PolicyParams& params, const BeopInstance& inst,
                                            const EdgeFeatureTable& features,
                                            const MdpState& state);

/// RolloutPolicy adapter for the linear policy.
class LinearPolicy : public RolloutPolicy {
public:
    LinearPolicy(const PolicyParams& params, const EdgeFeatureTable& features)
        : params_(&params), features_(&features) {}

    std::vector<ActionProb> action_probabilities(const BeopInstance& inst,
                                                 const MdpState& state) const override {
        return action_distribution(*params_, inst, *features_, state);
    }

private:
    const PolicyParams* params_;
    const EdgeFeatureTable* features_;
};

struct PomoOptions {
    int starts = 8;
    std::vector<double> augmentation_scales;  // extra rollout rounds on scaled copies
    bool parallel = true;
};

/// Greedy-decoded rollout per distinct feasible first node (ranked by logit,
/// capped at `starts`), plus the plain argmax rollout; under augmentation the
/// rollouts run on scaled copies and solutions are kept only when feasible for
/// the original instance. Returns the best-prize solution.
Solution pomo_evaluate(const BeopInstance& inst, const PolicyParams& params,
                       const PomoOptions& options = {});

struct TrainConfig {
    int epochs = 10;
    int batch_size = 50;
    double learning_rate = 1e-4;
    int pomo_starts = 8;
    double scale_min = 0.5;  // travel-time augmentation during training
    double scale_max = 1.5;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    bool stochastic = false;  // route training rollouts through the stochastic process
    double noise_sigma = 0.10 / 1.96;
    double drop_prob = 0.2;
};

struct TrainResult {
    PolicyParams params;                              // best validation epoch
    std::vector<std::pair<int, double>> curve;        // (epoch, mean validation quota)
};

/// REINFORCE with the POMO shared mean baseline: per instance, pomo_starts
/// sampled rollouts; advantage = reward - mean; analytic gradient of the
/// summed log-probabilities; one ascent step per batch.
TrainResult reinforce_train(const std::vector<BeopInstance>& train_instances,
                            const std::vector<BeopInstance>& val_instances,
                            const TrainConfig& config);

/// Log-probability of a fixed action sequence and its gradient with respect to
/// (weights..., depot_bias). Shared by training and the finite-difference
/// checks.
struct LogProbGrad {
    double log_prob = 0.0;
    std::array<double, kPolicyWeightCount + 1> grad{};
};
LogProbGrad log_prob_of_actions(const BeopInstance& inst, const EdgeFeatureTable& features,
                                const PolicyParams& params, const std::vector<int>& actions);

/// Same replay through the stochastic process: transitions follow the
/// realization the trajectory was produced against.
LogProbGrad log_prob_of_actions_stochastic(const BeopInstance& inst,
                                           const Realization& realization,
                                           const EdgeFeatureTable& features,
                                           const PolicyParams& params,
                                           const std::vector<int>& actions);

enum class EvalMode { Deterministic, Stochastic };

struct EvalOptions {
    EvalMode mode = EvalMode::Deterministic;
    int pomo_starts = 8;
    std::vector<double> augmentation_scales;
    double noise_sigma = 0.10 / 1.96;
    double drop_prob = 0.2;
    double time_guard = 0.0;  // relative safety margin on expected legs (stochastic)
    std::uint64_t seed = 0;
};

struct QuotaStats {
    int count = 0;
    double mean_quota = 0.0;
    double median_quota = 0.0;
    double min_quota = 0.0;
    int invalid_count = 0;
    int deadline_violations = 0;
    std::vector<double> quotas;
};

/// Deterministic mode scores pomo_evaluate per instance; stochastic mode runs
/// exactly one masked trajectory per sampled realization.
QuotaStats evaluate_policy(const std::vector<BeopInstance>& instances, const PolicyParams& params,
                           const EvalOptions& options);

struct StochasticRunResult {
    Solution solution;
    int reward = 0;
    double quota = 0.0;
    bool invalid = false;
    int deadline_violations = 0;
    std::vector<int> actions;
    std::vector<TraceRecord> trace;
};

/// One argmax trajectory through the stochastic process. `time_guard` shrinks
/// the accepted node set: a node is taken only when the expected leg plus
/// return fits (1 + guard) times tighter than the raw mask.
StochasticRunResult run_stochastic(const BeopInstance& inst, const Realization& realization,
                                   const PolicyParams& params, const EdgeFeatureTable& features,
                                   double time_guard = 0.0, bool keep_trace = false);

}  // namespace beop
