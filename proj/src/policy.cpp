#include "beop/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>

#include "beop/errors.hpp"

namespace beop {

namespace {

constexpr int kMaxSteps = 100000;

double safe_ratio(double numer, double denom) { return denom == 0.0 ? 1.0 : numer / denom; }

std::array<double, kPolicyWeightCount> node_feature_vector(const EdgeFeatureTable& features,
                                                           const std::array<double, kStateFeatureCount>& sf,
                                                           int current, int v) {
    std::array<double, kPolicyWeightCount> phi{};
    const EdgeFeatures& ef = features.at(current, v);
    for (int c = 0; c < kEdgeFeatureCount; ++c) phi[c] = ef[c];
    for (int c = 0; c < kStateFeatureCount; ++c) phi[kEdgeFeatureCount + c] = sf[c];
    return phi;
}

struct Distribution {
    std::vector<int> actions;
    std::vector<double> probs;
    std::array<double, kStateFeatureCount> sf{};
};

Distribution distribution_impl(const PolicyParams& params, const BeopInstance& inst,
                               const EdgeFeatureTable& features, const MdpState& state) {
    Distribution d;
    d.actions = feasible_actions(inst, state);
    if (d.actions.empty()) return d;
    d.sf = state_features(inst, state);
    std::vector<double> logits(d.actions.size());
    for (std::size_t idx = 0; idx < d.actions.size(); ++idx) {
        const int a = d.actions[idx];
        if (a == 0) {
            logits[idx] = params.depot_bias;
            continue;
        }
        const auto phi = node_feature_vector(features, d.sf, state.current, a);
        double dot = 0.0;
        for (int c = 0; c < kPolicyWeightCount; ++c) dot += params.weights[c] * phi[c];
        logits[idx] = dot;
    }
    const double tau = params.temperature;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (double l : logits) max_logit = std::max(max_logit, l / tau);
    double total = 0.0;
    d.probs.resize(logits.size());
    for (std::size_t idx = 0; idx < logits.size(); ++idx) {
        d.probs[idx] = std::exp(logits[idx] / tau - max_logit);
        total += d.probs[idx];
    }
    for (double& p : d.probs) p /= total;
    return d;
}

}  // namespace

EdgeFeatureTable edge_features(const BeopInstance& inst) {
    const int n = inst.n;
    const int size = n + 1;
    EdgeFeatureTable table;
    table.size = size;
    table.features.assign(static_cast<std::size_t>(size) * size, EdgeFeatures{});

    std::vector<double> col_min(size, 0.0), col_mean(size, 0.0);
    std::vector<double> row_min(size, 0.0), row_mean(size, 0.0);
    for (int j = 0; j < size; ++j) {
        Ms mn = std::numeric_limits<Ms>::max();
        double sum = 0.0;
        for (int k = 0; k < size; ++k) {
            if (k == j) continue;
            mn = std::min(mn, inst.t(k, j));
            sum += static_cast<double>(inst.t(k, j));
        }
        col_min[j] = static_cast<double>(mn);
        col_mean[j] = sum / n;
    }
    for (int i = 0; i < size; ++i) {
        Ms mn = std::numeric_limits<Ms>::max();
        double sum = 0.0;
        for (int k = 0; k < size; ++k) {
            if (k == i) continue;
            mn = std::min(mn, inst.t(i, k));
            sum += static_cast<double>(inst.t(i, k));
        }
        row_min[i] = static_cast<double>(mn);
        row_mean[i] = sum / n;
    }

    const double t_max = static_cast<double>(inst.max_time);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            if (i == j) continue;
            const double t = static_cast<double>(inst.t(i, j));
            EdgeFeatures& f = table.features[static_cast<std::size_t>(i) * size + j];
            f[0] = t / 1000.0;
            f[1] = t / t_max;
            f[2] = t / (t_max * inst.num_vehicles);
            f[3] = safe_ratio(t, col_min[j]);
            f[4] = safe_ratio(t, col_mean[j]);
            f[5] = safe_ratio(t, row_min[i]);
            f[6] = safe_ratio(t, row_mean[i]);
            f[7] = static_cast<double>(inst.demand[j]) / inst.capacity;
            f[8] = static_cast<double>(inst.t(j, 0)) / 1000.0;
            f[9] = static_cast<double>(inst.deadline[j]) / t_max;
        }
    }
    return table;
}

std::array<double, kStateFeatureCount> state_features(const BeopInstance& inst,
                                                      const MdpState& state) {
    std::array<double, kStateFeatureCount> sf{};
    const double t_max = static_cast<double>(inst.max_time);
    sf[0] = static_cast<double>(state.load) / inst.capacity;
    sf[1] = static_cast<double>(state.elapsed) / t_max;
    sf[2] = static_cast<double>(state.vehicles_left) / inst.num_vehicles;
    int visited_prize = 0;
    for (int v = 1; v <= inst.n; ++v) {
        if (state.visited[v]) visited_prize += inst.prize[v];
    }
    const int total = inst.total_prize();
    sf[3] = total > 0 ? static_cast<double>(visited_prize) / total : 0.0;
    sf[4] = static_cast<double>(inst.t(state.current, 0)) / t_max;
    int feasible_nodes = 0;
    double time_sum = 0.0;
    for (int v = 1; v <= inst.n; ++v) {
        if (state.visited[v] || state.load + inst.demand[v] > inst.capacity) continue;
        if (state.elapsed + inst.t(state.current, v) + inst.t(v, 0) > inst.max_time) continue;
        if (state.elapsed + inst.t(state.current, v) > inst.deadline[v]) continue;
        ++feasible_nodes;
        time_sum += static_cast<double>(inst.t(state.current, v)) / t_max;
    }
    sf[5] = static_cast<double>(feasible_nodes) / inst.n;
    sf[6] = feasible_nodes > 0 ? time_sum / feasible_nodes : 0.0;
    return sf;
}

std::vector<ActionProb> action_distribution(const PolicyParams& params, const BeopInstance& inst,
                                            const EdgeFeatureTable& features,
                                            const MdpState& state) {
    const Distribution d = distribution_impl(params, inst, features, state);
    std::vector<ActionProb> out(d.actions.size());
    for (std::size_t idx = 0; idx < d.actions.size(); ++idx) {
        out[idx] = ActionProb{d.actions[idx], d.probs[idx]};
    }
    return out;
}

namespace {

// First-move candidates for POMO, best logit first.
std::vector<int> ranked_first_nodes(const PolicyParams& params, const BeopInstance& inst,
                                    const EdgeFeatureTable& features, int cap) {
    const MdpState start = initial_state(inst);
    const Distribution d = distribution_impl(params, inst, features, start);
    std::vector<std::pair<double, int>> ranked;
    for (std::size_t idx = 0; idx < d.actions.size(); ++idx) {
        if (d.actions[idx] != 0) ranked.emplace_back(-d.probs[idx], d.actions[idx]);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<int> nodes;
    for (const auto& [negp, v] : ranked) {
        if (static_cast<int>(nodes.size()) >= cap) break;
        nodes.push_back(v);
    }
    return nodes;
}

}  // namespace

Solution pomo_evaluate(const BeopInstance& inst, const PolicyParams& params,
                       const PomoOptions& options) {
    struct Job {
        const BeopInstance* instance;
        const EdgeFeatureTable* features;
        std::optional<int> first_action;
        bool scaled;
    };

    // Rollout rounds: the original instance plus one copy per augmentation
    // scale, each with the plain argmax rollout and the ranked POMO starts.
    std::vector<std::unique_ptr<BeopInstance>> scaled_instances;
    std::vector<std::unique_ptr<EdgeFeatureTable>> feature_tables;
    feature_tables.push_back(std::make_unique<EdgeFeatureTable>(edge_features(inst)));

    std::vector<Job> jobs;
    jobs.push_back(Job{&inst, feature_tables.front().get(), std::nullopt, false});
    for (int v : ranked_first_nodes(params, inst, *feature_tables.front(), options.starts)) {
        jobs.push_back(Job{&inst, feature_tables.front().get(), v, false});
    }
    for (double scale : options.augmentation_scales) {
        scaled_instances.push_back(std::make_unique<BeopInstance>(scale_travel_times(inst, scale)));
        const BeopInstance* si = scaled_instances.back().get();
        feature_tables.push_back(std::make_unique<EdgeFeatureTable>(edge_features(*si)));
        const EdgeFeatureTable* ft = feature_tables.back().get();
        jobs.push_back(Job{si, ft, std::nullopt, true});
        for (int v : ranked_first_nodes(params, *si, *ft, options.starts)) {
            jobs.push_back(Job{si, ft, v, true});
        }
    }

    std::vector<Solution> results(jobs.size());
    std::vector<std::uint8_t> usable(jobs.size(), 0);
#pragma omp parallel for schedule(dynamic) if (options.parallel)
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
        const Job& job = jobs[idx];
        LinearPolicy policy(params, *job.features);
        Rng rng(0);  // argmax decoding draws nothing
        RolloutResult r =
            rollout(*job.instance, policy, rng, job.first_action, Decode::Argmax);
        if (job.scaled) {
            // A plan made against scaled times must still hold on the real ones.
            if (!check_feasible(inst, r.solution).feasible) continue;
            const auto [prize, quota] = solution_prize(inst, r.solution);
            r.solution.collected_prize = prize;
            r.solution.quota = quota;
        }
        results[idx] = std::move(r.solution);
        usable[idx] = 1;
    }

    Solution best;
    best.collected_prize = -1;
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
        if (usable[idx] && results[idx].collected_prize > best.collected_prize) {
            best = results[idx];
        }
    }
    if (best.collected_prize < 0) {
        for (int k = 0; k < inst.num_vehicles; ++k) best.tours.push_back(Tour{k, {0, 0}});
        best.collected_prize = 0;
        best.quota = 0.0;
    }
    return best;
}

namespace {

LogProbGrad log_prob_core(const BeopInstance& inst, const EdgeFeatureTable& features,
                          const PolicyParams& params, const std::vector<int>& actions,
                          const Realization* realization) {
    LogProbGrad out;
    MdpState state = initial_state(inst);
    const double tau = params.temperature;
    for (int action : actions) {
        const Distribution d = distribution_impl(params, inst, features, state);
        double chosen_prob = -1.0;
        // E[phi] under the current distribution, extended with the depot bias
        // coordinate.
        std::array<double, kPolicyWeightCount + 1> mean_phi{};
        std::array<double, kPolicyWeightCount + 1> chosen_phi{};
        for (std::size_t idx = 0; idx < d.actions.size(); ++idx) {
            const int a = d.actions[idx];
            const double p = d.probs[idx];
            std::array<double, kPolicyWeightCount + 1> phi{};
            if (a == 0) {
                phi[kPolicyWeightCount] = 1.0;
            } else {
                const auto base = node_feature_vector(features, d.sf, state.current, a);
                for (int c = 0; c < kPolicyWeightCount; ++c) phi[c] = base[c];
            }
            for (int c = 0; c <= kPolicyWeightCount; ++c) mean_phi[c] += p * phi[c];
            if (a == action) {
                chosen_prob = p;
                chosen_phi = phi;
            }
        }
        if (chosen_prob < 0.0) throw IllegalAction("replayed action is not feasible");
        out.log_prob += std::log(std::max(chosen_prob, 1e-300));
        for (int c = 0; c <= kPolicyWeightCount; ++c) {
            out.grad[c] += (chosen_phi[c] - mean_phi[c]) / tau;
        }
        state = realization ? step_stochastic(inst, *realization, state, action).next
                            : step(inst, state, action).next;
    }
    return out;
}

}  // namespace

LogProbGrad log_prob_of_actions(const BeopInstance& inst, const EdgeFeatureTable& features,
                                const PolicyParams& params, const std::vector<int>& actions) {
    return log_prob_core(inst, features, params, actions, nullptr);
}

LogProbGrad log_prob_of_actions_stochastic(const BeopInstance& inst,
                                           const Realization& realization,
                                           const EdgeFeatureTable& features,
                                           const PolicyParams& params,
                                           const std::vector<int>& actions) {
    return log_prob_core(inst, features, params, actions, &realization);
}

namespace {

struct SampledRollouts {
    std::vector<std::vector<int>> actions;
    std::vector<double> rewards;
    std::vector<Realization> realizations;  // stochastic training only
};

// POMO training rollouts: sampled decoding from forced distinct first nodes.
SampledRollouts sample_pomo_rollouts(const BeopInstance& inst, const EdgeFeatureTable& features,
                                     const PolicyParams& params, int starts, Rng& rng) {
    SampledRollouts out;
    const MdpState start_state = initial_state(inst);
    std::vector<int> first_nodes = feasible_actions(inst, start_state);
    first_nodes.erase(std::remove(first_nodes.begin(), first_nodes.end(), 0), first_nodes.end());
    // Random distinct starts when more exist than requested.
    for (int i = static_cast<int>(first_nodes.size()) - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, i));
        std::swap(first_nodes[static_cast<std::size_t>(i)], first_nodes[j]);
    }
    if (static_cast<int>(first_nodes.size()) > starts) {
        first_nodes.resize(static_cast<std::size_t>(starts));
    }

    LinearPolicy policy(params, features);
    if (first_nodes.empty()) {
        Rng stream = rng.fork(0);
        RolloutResult r = rollout(inst, policy, stream);
        out.actions.push_back(std::move(r.actions));
        out.rewards.push_back(static_cast<double>(r.reward));
        return out;
    }
    for (std::size_t i = 0; i < first_nodes.size(); ++i) {
        Rng stream = rng.fork(i + 1);
        RolloutResult r = rollout(inst, policy, stream, first_nodes[i]);
        out.actions.push_back(std::move(r.actions));
        out.rewards.push_back(static_cast<double>(r.reward));
    }
    return out;
}

// Stochastic-training variant: trajectories run through the stochastic
// process against a sampled realization; invalid plans earn reward 0.
SampledRollouts sample_stochastic_rollouts(const BeopInstance& inst,
                                           const EdgeFeatureTable& features,
                                           const PolicyParams& params, int starts,
                                           double noise_sigma, double drop_prob, Rng& rng) {
    SampledRollouts out;
    const MdpState start_state = initial_state(inst);
    std::vector<int> first_nodes = feasible_actions(inst, start_state);
    first_nodes.erase(std::remove(first_nodes.begin(), first_nodes.end(), 0), first_nodes.end());
    for (int i = static_cast<int>(first_nodes.size()) - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, i));
        std::swap(first_nodes[static_cast<std::size_t>(i)], first_nodes[j]);
    }
    if (static_cast<int>(first_nodes.size()) > starts) {
        first_nodes.resize(static_cast<std::size_t>(starts));
    }
    const int rounds = std::max<int>(1, static_cast<int>(first_nodes.size()));
    for (int i = 0; i < rounds; ++i) {
        Rng stream = rng.fork(static_cast<std::uint64_t>(i) + 101);
        const Realization real =
            sample_stochastic_realization(inst, NoiseParams{noise_sigma}, drop_prob, stream);
        std::optional<int> first;
        if (!first_nodes.empty()) first = first_nodes[static_cast<std::size_t>(i)];

        MdpState state = initial_state(inst);
        std::vector<int> actions;
        double reward = 0.0;
        int steps = 0;
        while (true) {
            if (++steps > kMaxSteps) throw IllegalAction("stochastic rollout did not terminate");
            const Distribution d = distribution_impl(params, inst, features, state);
            // Collapse the depot hold exactly like the deterministic rollout.
            const bool collapse_hold =
                state.current == 0 &&
                std::any_of(d.actions.begin(), d.actions.end(), [](int a) { return a != 0; });
            int action;
            if (steps == 1 && first) {
                action = *first;
            } else {
                double total = 1.0;
                if (collapse_hold) {
                    total = 0.0;
                    for (std::size_t idx = 0; idx < d.actions.size(); ++idx) {
                        if (d.actions[idx] != 0) total += d.probs[idx];
                    }
                }
                const double u = stream.uniform01() * total;
                double cum = 0.0;
                action = -1;
                for (std::size_t idx = 0; idx < d.actions.size(); ++idx) {
                    if (collapse_hold && d.actions[idx] == 0) continue;
                    cum += d.probs[idx];
                    if (u < cum) {
                        action = d.actions[idx];
                        break;
                    }
                }
                if (action == -1) action = collapse_hold ? d.actions.front() : d.actions.back();
            }
            actions.push_back(action);
            const StepOutcome outcome = step_stochastic(inst, real, state, action);
            state = outcome.next;
            if (outcome.terminal) {
                reward = static_cast<double>(outcome.reward);
                break;
            }
        }
        out.actions.push_back(std::move(actions));
        out.rewards.push_back(reward);
        out.realizations.push_back(real);
    }
    return out;
}

double mean_validation_quota(const std::vector<BeopInstance>& val, const PolicyParams& params,
                             int pomo_starts) {
    if (val.empty()) return 0.0;
    std::vector<double> quotas(val.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < val.size(); ++i) {
        PomoOptions options;
        options.starts = pomo_starts;
        options.parallel = false;
        quotas[i] = pomo_evaluate(val[i], params, options).quota;
    }
    return std::accumulate(quotas.begin(), quotas.end(), 0.0) / static_cast<double>(val.size());
}

}  // namespace

TrainResult reinforce_train(const std::vector<BeopInstance>& train_instances,
                            const std::vector<BeopInstance>& val_instances,
                            const TrainConfig& config) {
    if (train_instances.empty()) throw InvalidInput("training needs at least one instance");
    TrainResult result;
    result.params.temperature = config.temperature;

    PolicyParams params = result.params;
    double best_quota = -1.0;
    Rng root(config.seed);

    // Adam state over (weights..., depot_bias).
    std::array<double, kPolicyWeightCount + 1> adam_m{};
    std::array<double, kPolicyWeightCount + 1> adam_v{};
    std::int64_t adam_t = 0;
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kAdamEps = 1e-8;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng epoch_rng = root.fork(static_cast<std::uint64_t>(epoch));
        std::vector<std::size_t> order(train_instances.size());
        std::iota(order.begin(), order.end(), 0);
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(epoch_rng.uniform_int(0, i));
            std::swap(order[static_cast<std::size_t>(i)], order[j]);
        }

        for (std::size_t batch_start = 0; batch_start < order.size();
             batch_start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t batch_end =
                std::min(order.size(), batch_start + static_cast<std::size_t>(config.batch_size));
            const std::size_t batch_count = batch_end - batch_start;

            std::vector<std::array<double, kPolicyWeightCount + 1>> instance_grads(
                batch_count, std::array<double, kPolicyWeightCount + 1>{});

#pragma omp parallel for schedule(dynamic)
            for (std::size_t b = 0; b < batch_count; ++b) {
                const std::size_t inst_idx = order[batch_start + b];
                Rng inst_rng = epoch_rng.fork(inst_idx * 2654435761u + b);
                const double scale =
                    inst_rng.uniform_real(config.scale_min, config.scale_max);
                const BeopInstance scaled = scale_travel_times(train_instances[inst_idx], scale);
                const EdgeFeatureTable features = edge_features(scaled);

                const SampledRollouts rollouts =
                    config.stochastic
                        ? sample_stochastic_rollouts(scaled, features, params, config.pomo_starts,
                                                     config.noise_sigma, config.drop_prob,
                                                     inst_rng)
                        : sample_pomo_rollouts(scaled, features, params, config.pomo_starts,
                                               inst_rng);

                const double baseline =
                    std::accumulate(rollouts.rewards.begin(), rollouts.rewards.end(), 0.0) /
                    static_cast<double>(rollouts.rewards.size());
                auto& grad = instance_grads[b];
                for (std::size_t r = 0; r < rollouts.actions.size(); ++r) {
                    const double advantage = rollouts.rewards[r] - baseline;
                    if (advantage == 0.0) continue;
                    const LogProbGrad lg =
                        config.stochastic
                            ? log_prob_of_actions_stochastic(scaled, rollouts.realizations[r],
                                                             features, params, rollouts.actions[r])
                            : log_prob_of_actions(scaled, features, params, rollouts.actions[r]);
                    for (int c = 0; c <= kPolicyWeightCount; ++c) {
                        grad[c] += advantage * lg.grad[c];
                    }
                }
                const double norm = 1.0 / static_cast<double>(rollouts.actions.size());
                for (int c = 0; c <= kPolicyWeightCount; ++c) grad[c] *= norm;
            }

            std::array<double, kPolicyWeightCount + 1> batch_grad{};
            for (const auto& g : instance_grads) {
                for (int c = 0; c <= kPolicyWeightCount; ++c) batch_grad[c] += g[c];
            }
            for (int c = 0; c <= kPolicyWeightCount; ++c) {
                batch_grad[c] /= static_cast<double>(batch_count);
                if (!std::isfinite(batch_grad[c])) {
                    throw NonFiniteGradient("non-finite gradient in epoch " +
                                            std::to_string(epoch) + ", component " +
                                            std::to_string(c));
                }
            }
            // Adam ascent; the per-coordinate scaling matters because raw-time
            // features dwarf the dimensionless ones.
            ++adam_t;
            for (int c = 0; c <= kPolicyWeightCount; ++c) {
                adam_m[c] = kBeta1 * adam_m[c] + (1.0 - kBeta1) * batch_grad[c];
                adam_v[c] = kBeta2 * adam_v[c] + (1.0 - kBeta2) * batch_grad[c] * batch_grad[c];
                const double m_hat = adam_m[c] / (1.0 - std::pow(kBeta1, adam_t));
                const double v_hat = adam_v[c] / (1.0 - std::pow(kBeta2, adam_t));
                const double step = config.learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEps);
                if (c < kPolicyWeightCount) {
                    params.weights[c] += step;
                } else {
                    params.depot_bias += step;
                }
            }
        }

        const double quota = mean_validation_quota(val_instances, params, config.pomo_starts);
        result.curve.emplace_back(epoch, quota);
        if (quota > best_quota) {
            best_quota = quota;
            result.params = params;
        }
    }
    if (config.epochs == 0) result.params = params;
    return result;
}

StochasticRunResult run_stochastic(const BeopInstance& inst, const Realization& realization,
                                   const PolicyParams& params, const EdgeFeatureTable& features,
                                   double time_guard, bool keep_trace) {
    if (inst.num_vehicles != 1) {
        throw RequiresSingleVehicle("stochastic execution routes a single vehicle");
    }
    StochasticRunResult result;
    MdpState state = initial_state(inst);
    std::vector<int> tour_nodes{0};
    int steps = 0;

    const auto guarded_ok = [&](const MdpState& s, int v) {
        if (time_guard <= 0.0) return true;
        const double margin = 1.0 + time_guard;
        const double leg = static_cast<double>(inst.t(s.current, v));
        const double back = static_cast<double>(inst.t(v, 0));
        if (static_cast<double>(s.elapsed) + (leg + back) * margin >
            static_cast<double>(inst.max_time)) {
            return false;
        }
        if (static_cast<double>(s.elapsed) + leg * margin >
            static_cast<double>(inst.deadline[v])) {
            return false;
        }
        return true;
    };

    while (true) {
        if (++steps > kMaxSteps) throw IllegalAction("stochastic run did not terminate");
        const Distribution d = distribution_impl(params, inst, features, state);

        int best_action = 0;
        double best_prob = -1.0;
        int best_node = -1;
        double best_node_prob = -1.0;
        for (std::size_t idx = 0; idx < d.actions.size(); ++idx) {
            const int a = d.actions[idx];
            if (a != 0 && !guarded_ok(state, a)) continue;
            if (d.probs[idx] > best_prob || (d.probs[idx] == best_prob && a < best_action)) {
                best_prob = d.probs[idx];
                best_action = a;
            }
            if (a != 0 && (d.probs[idx] > best_node_prob)) {
                best_node_prob = d.probs[idx];
                best_node = a;
            }
        }
        int action = best_action;
        if (action == 0 && state.current == 0) {
            // The depot hold would repeat this state. Move to the best guarded
            // node; when the guard blocked everything, fall back to the widest
            // slack so the process can finish.
            if (best_node >= 0) {
                action = best_node;
            } else {
                Ms best_slack = std::numeric_limits<Ms>::min();
                int fallback = -1;
                for (int a : d.actions) {
                    if (a == 0) continue;
                    const Ms slack =
                        inst.max_time - (state.elapsed + inst.t(state.current, a) + inst.t(a, 0));
                    if (slack > best_slack) {
                        best_slack = slack;
                        fallback = a;
                    }
                }
                if (fallback >= 0) action = fallback;
            }
        }

        result.actions.push_back(action);
        const StepOutcome outcome = step_stochastic(inst, realization, state, action);
        if (keep_trace) {
            result.trace.push_back(TraceRecord{state, action, outcome.transition_case,
                                               outcome.transition_case == 2
                                                   ? state.elapsed +
                                                         realization.realized_travel
                                                             [static_cast<std::size_t>(
                                                                  state.current) *
                                                              (inst.n + 1)]
                                                   : outcome.next.elapsed});
        }
        if (outcome.transition_case == 1) {
            tour_nodes.push_back(action);
            if (outcome.next.elapsed > inst.deadline[action]) result.deadline_violations += 1;
        } else {
            tour_nodes.push_back(0);
        }
        state = outcome.next;
        if (outcome.terminal) {
            result.invalid = outcome.invalid;
            result.reward = outcome.reward;
            break;
        }
    }
    if (tour_nodes.size() == 1) tour_nodes.push_back(0);
    result.solution.tours.push_back(Tour{0, std::move(tour_nodes)});
    result.solution.collected_prize = result.reward;
    const int total = inst.total_prize();
    result.quota = total > 0 ? static_cast<double>(result.reward) / total : 0.0;
    result.solution.quota = result.quota;
    return result;
}

QuotaStats evaluate_policy(const std::vector<BeopInstance>& instances, const PolicyParams& params,
                           const EvalOptions& options) {
    QuotaStats stats;
    stats.count = static_cast<int>(instances.size());
    stats.quotas.assign(instances.size(), 0.0);
    std::vector<int> invalids(instances.size(), 0);
    std::vector<int> deadline_misses(instances.size(), 0);

    if (options.mode == EvalMode::Stochastic) {
        for (const auto& inst : instances) {
            if (inst.num_vehicles != 1) {
                throw RequiresSingleVehicle("stochastic evaluation needs single-vehicle instances");
            }
        }
    }

#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const BeopInstance& inst = instances[i];
        if (options.mode == EvalMode::Deterministic) {
            PomoOptions pomo;
            pomo.starts = options.pomo_starts;
            pomo.augmentation_scales = options.augmentation_scales;
            pomo.parallel = false;
            stats.quotas[i] = pomo_evaluate(inst, params, pomo).quota;
        } else {
            Rng rng = Rng(options.seed).fork(i);
            const Realization real = sample_stochastic_realization(
                inst, NoiseParams{options.noise_sigma}, options.drop_prob, rng);
            const EdgeFeatureTable features = edge_features(inst);
            const StochasticRunResult run =
                run_stochastic(inst, real, params, features, options.time_guard);
            stats.quotas[i] = run.quota;
            invalids[i] = run.invalid ? 1 : 0;
            deadline_misses[i] = run.deadline_violations;
        }
    }

    stats.invalid_count = std::accumulate(invalids.begin(), invalids.end(), 0);
    stats.deadline_violations = std::accumulate(deadline_misses.begin(), deadline_misses.end(), 0);
    if (!stats.quotas.empty()) {
        std::vector<double> sorted = stats.quotas;
        std::sort(sorted.begin(), sorted.end());
        stats.mean_quota = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                           static_cast<double>(sorted.size());
        const std::size_t mid = sorted.size() / 2;
        stats.median_quota = sorted.size() % 2 == 1 ? sorted[mid]
                                                    : 0.5 * (sorted[mid - 1] + sorted[mid]);
        stats.min_quota = sorted.front();
    }
    return stats;
}

}  // namespace beop
