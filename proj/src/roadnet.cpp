#include "beop/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>

#include "beop/errors.hpp"

namespace beop {

namespace {

constexpr Ms kUnreached = std::numeric_limits<Ms>::max();

struct Csr {
    std::vector<int> offsets;
    std::vector<int> targets;
    std::vector<Ms> weights;
};

Csr build_csr(const RoadGraph& graph) {
    const int n = static_cast<int>(graph.nodes.size());
    Csr csr;
    csr.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& e : graph.edges) csr.offsets[static_cast<std::size_t>(e.from) + 1]++;
    for (int i = 0; i < n; ++i) csr.offsets[static_cast<std::size_t>(i) + 1] += csr.offsets[i];
    csr.targets.resize(graph.edges.size());
    csr.weights.resize(graph.edges.size());
    std::vector<int> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
    for (const auto& e : graph.edges) {
        const int slot = cursor[e.from]++;
        csr.targets[slot] = e.to;
        csr.weights[slot] = e.travel_time;
    }
    return csr;
}

void dijkstra(const Csr& csr, int num_nodes, int source, std::vector<Ms>& dist) {
    dist.assign(static_cast<std::size_t>(num_nodes), kUnreached);
    dist[source] = 0;
    using Item = std::pair<Ms, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    queue.emplace(0, source);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        for (int e = csr.offsets[u]; e < csr.offsets[static_cast<std::size_t>(u) + 1]; ++e) {
            const int v = csr.targets[e];
            const Ms nd = d + csr.weights[e];
            if (nd < dist[v]) {
                dist[v] = nd;
                queue.emplace(nd, v);
            }
        }
    }
}

template <bool Parallel>
TravelMatrix apsp_impl(const RoadGraph& graph, const std::vector<int>& subset) {
    const int num_nodes = static_cast<int>(graph.nodes.size());
    const int m = static_cast<int>(subset.size());
    for (int id : subset) {
        if (id < 0 || id >= num_nodes) throw InvalidInput("subset node id out of range");
    }
    const Csr csr = build_csr(graph);
    TravelMatrix out;
    out.size = m;
    out.times.assign(static_cast<std::size_t>(m) * m, 0);
    std::vector<std::pair<int, int>> unreachable;  // (source row, target row)

#pragma omp parallel if (Parallel)
    {
        std::vector<Ms> dist;
#pragma omp for schedule(dynamic)
        for (int row = 0; row < m; ++row) {
            dijkstra(csr, num_nodes, subset[row], dist);
            for (int col = 0; col < m; ++col) {
                const Ms d = dist[subset[col]];
                if (d == kUnreached) {
#pragma omp critical
                    unreachable.emplace_back(row, col);
                } else {
                    out.at(row, col) = d;
                }
            }
        }
    }
    if (!unreachable.empty()) {
        std::sort(unreachable.begin(), unreachable.end());
        const auto [row, col] = unreachable.front();
        throw Disconnected("no path from node " + std::to_string(subset[row]) + " to node " +
                           std::to_string(subset[col]));
    }
    return out;
}

Ms draw_window_deadline(Ms max_time, Rng& rng) {
    const Ms lo = static_cast<Ms>(std::llround(0.3 * static_cast<double>(max_time)));
    const Ms hi = static_cast<Ms>(std::llround(0.8 * static_cast<double>(max_time)));
    return rng.uniform_int(lo, hi);
}

BeopInstance build_instance(const RoadGraph& graph, const TravelMatrix& subset_times,
                            const std::vector<int>& selected, const SamplingParams& params,
                            Rng& rng) {
    if (params.demand_min < 1 || params.demand_min > params.demand_max ||
        params.demand_max > params.capacity) {
        throw InvalidInput("demand range must lie within [1, capacity]");
    }
    const int n = static_cast<int>(selected.size()) - 1;
    BeopInstance inst;
    inst.n = n;
    inst.travel = subset_times.times;
    inst.demand.assign(static_cast<std::size_t>(n) + 1, 0);
    inst.prize.assign(static_cast<std::size_t>(n) + 1, 0);
    inst.deadline.assign(static_cast<std::size_t>(n) + 1, params.max_time);
    inst.num_vehicles = params.num_vehicles;
    inst.capacity = params.capacity;
    inst.max_time = params.max_time;
    inst.metric = true;  // shortest-path matrices honor the triangle inequality
    inst.coords.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        inst.coords[i] = {graph.nodes[selected[i]].lon, graph.nodes[selected[i]].lat};
    }
    for (int v = 1; v <= n; ++v) {
        inst.demand[v] = static_cast<int>(rng.uniform_int(params.demand_min, params.demand_max));
        inst.prize[v] = inst.demand[v];
    }
    // "up to tw_fraction" of the nodes carry windows: the realized share is
    // itself uniform.
    const double share = rng.uniform01() * params.tw_fraction;
    const int windowed = static_cast<int>(share * n);
    std::vector<int> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 1);
    for (int i = 0; i < windowed; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(i, n - 1));
        std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
        inst.deadline[ids[static_cast<std::size_t>(i)]] = draw_window_deadline(params.max_time, rng);
    }
    return inst;
}

}  // namespace

TravelMatrix all_pairs_shortest_times(const RoadGraph& graph, const std::vector<int>& subset) {
    return apsp_impl<true>(graph, subset);
}

TravelMatrix all_pairs_shortest_times_serial(const RoadGraph& graph, const std::vector<int>& subset) {
    return apsp_impl<false>(graph, subset);
}

std::vector<int> select_weighted_nodes(const RoadGraph& graph, int count, Rng& rng) {
    const int n = static_cast<int>(graph.nodes.size());
    if (count > n) throw InsufficientNodes("graph has fewer nodes than requested");
    std::vector<int> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<std::int64_t> weight(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) weight[i] = graph.nodes[i].frequency;

    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(count));
    int live = n;
    std::int64_t total = std::accumulate(weight.begin(), weight.end(), std::int64_t{0});
    for (int k = 0; k < count; ++k) {
        std::int64_t target = rng.uniform_int(0, total - 1);
        int chosen = live - 1;
        for (int i = 0; i < live; ++i) {
            target -= weight[i];
            if (target < 0) {
                chosen = i;
                break;
            }
        }
        picked.push_back(ids[chosen]);
        total -= weight[chosen];
        --live;
        std::swap(ids[chosen], ids[live]);
        std::swap(weight[chosen], weight[live]);
    }
    return picked;
}

BeopInstance sample_instance(const RoadGraph& graph, const TravelMatrix& apsp,
                             const SamplingParams& params, Rng& rng) {
    if (params.num_points < 1) throw InvalidInput("num_points must be >= 1");
    if (apsp.size != static_cast<int>(graph.nodes.size())) {
        throw InvalidInput("apsp matrix does not match the graph");
    }
    const std::vector<int> selected = select_weighted_nodes(graph, params.num_points + 1, rng);
    TravelMatrix restricted;
    restricted.size = static_cast<int>(selected.size());
    restricted.times.resize(static_cast<std::size_t>(restricted.size) * restricted.size);
    for (int i = 0; i < restricted.size; ++i) {
        for (int j = 0; j < restricted.size; ++j) {
            restricted.at(i, j) = apsp.at(selected[i], selected[j]);
        }
    }
    return build_instance(graph, restricted, selected, params, rng);
}

HazardResult apply_hazard_zone(const RoadGraph& graph, const TravelMatrix& apsp_full,
                               const std::vector<int>& candidate_nodes, Rng& rng,
                               int affected, int max_retries) {
    const int num_candidates = static_cast<int>(candidate_nodes.size());
    if (affected >= num_candidates) throw InvalidInput("hazard must leave some candidates");
    if (apsp_full.size != static_cast<int>(graph.nodes.size())) {
        throw InvalidInput("apsp matrix does not match the graph");
    }
    const int depot = candidate_nodes.front();

    for (int attempt = 0; attempt < max_retries; ++attempt) {
        const int epicenter =
            candidate_nodes[rng.uniform_int(1, num_candidates - 1)];
        const auto& epi = graph.nodes[epicenter];

        std::vector<double> cand_dist(static_cast<std::size_t>(num_candidates));
        for (int i = 0; i < num_candidates; ++i) {
            const auto& node = graph.nodes[candidate_nodes[i]];
            cand_dist[i] = haversine_m(epi.lon, epi.lat, node.lon, node.lat);
        }
        std::vector<double> sorted = cand_dist;
        std::nth_element(sorted.begin(), sorted.begin() + (affected - 1), sorted.end());
        const double radius = sorted[static_cast<std::size_t>(affected - 1)];
        if (cand_dist[0] <= radius) continue;  // safe location inside the zone

        std::vector<std::uint8_t> removed(graph.nodes.size(), 0);
        for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
            const auto& node = graph.nodes[i];
            removed[i] = haversine_m(epi.lon, epi.lat, node.lon, node.lat) <= radius ? 1 : 0;
        }

        HazardResult result;
        std::vector<int> old_to_new(graph.nodes.size(), -1);
        for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
            if (removed[i]) {
                result.removed_nodes.push_back(static_cast<int>(i));
                continue;
            }
            old_to_new[i] = static_cast<int>(result.pruned.nodes.size());
            RoadNode node = graph.nodes[i];
            node.id = old_to_new[i];
            result.pruned.nodes.push_back(node);
            result.new_to_original.push_back(static_cast<int>(i));
        }
        for (const auto& e : graph.edges) {
            if (removed[e.from] || removed[e.to]) continue;
            result.pruned.edges.push_back(RoadEdge{old_to_new[e.from], old_to_new[e.to], e.travel_time});
        }

        result.kept_candidates.push_back(old_to_new[depot]);
        for (int i = 1; i < num_candidates; ++i) {
            const int id = old_to_new[candidate_nodes[i]];
            if (id >= 0) result.kept_candidates.push_back(id);
        }
        if (static_cast<int>(result.kept_candidates.size()) != num_candidates - affected) {
            continue;  // distance ties made the ball cover a different count
        }
        try {
            all_pairs_shortest_times(result.pruned, result.kept_candidates);
        } catch (const Disconnected&) {
            continue;
        }
        return result;
    }
    throw ResampleLimitExceeded("no valid hazard placement found");
}

HazardInstance sample_instance_with_hazard(const RoadGraph& graph, const TravelMatrix& apsp_full,
                                           const SamplingParams& params, Rng& rng,
                                           int affected, int max_retries) {
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        const std::vector<int> candidates =
            select_weighted_nodes(graph, params.num_points + affected + 1, rng);
        HazardResult hazard;
        try {
            hazard = apply_hazard_zone(graph, apsp_full, candidates, rng, affected, max_retries);
        } catch (const ResampleLimitExceeded&) {
            continue;  // redraw the whole candidate set
        }
        const TravelMatrix subset_times =
            all_pairs_shortest_times(hazard.pruned, hazard.kept_candidates);
        HazardInstance out;
        out.instance =
            build_instance(hazard.pruned, subset_times, hazard.kept_candidates, params, rng);
        out.removed_nodes = hazard.removed_nodes;
        return out;
    }
    throw ResampleLimitExceeded("no valid hazard instance found");
}

Realization sample_stochastic_realization(const BeopInstance& inst, const NoiseParams& noise,
                                          double drop_prob, Rng& rng) {
    Realization real;
    real.realized_travel.resize(inst.travel.size());
    const int n = inst.n;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const Ms expected = inst.t(i, j);
            if (i == j || noise.rel_sigma == 0.0) {
                real.realized_travel[static_cast<std::size_t>(i) * (n + 1) + j] = expected;
                continue;
            }
            const double factor = rng.normal(1.0, noise.rel_sigma);
            const double value = std::max(0.0, static_cast<double>(expected) * factor);
            real.realized_travel[static_cast<std::size_t>(i) * (n + 1) + j] =
                static_cast<Ms>(std::llround(value));
        }
    }
    real.realized_demand = inst.demand;
    for (int v = 1; v <= n; ++v) {
        if (rng.bernoulli(drop_prob)) real.realized_demand[v] = 0;
    }
    return real;
}

double haversine_m(double lon1, double lat1, double lon2, double lat2) {
    constexpr double kEarthRadiusM = 6371000.0;
    constexpr double kDegToRad = M_PI / 180.0;
    const double phi1 = lat1 * kDegToRad;
    const double phi2 = lat2 * kDegToRad;
    const double dphi = (lat2 - lat1) * kDegToRad;
    const double dlmb = (lon2 - lon1) * kDegToRad;
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlmb / 2) * std::sin(dlmb / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(a));
}

NodeSplit split_node_ids(int num_nodes, Rng& rng) {
    std::vector<int> ids(static_cast<std::size_t>(num_nodes));
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = num_nodes - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, i));
        std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
    }
    NodeSplit split;
    const int train_end = static_cast<int>(0.70 * num_nodes);
    const int val_end = train_end + static_cast<int>(0.15 * num_nodes);
    split.train.assign(ids.begin(), ids.begin() + train_end);
    split.validation.assign(ids.begin() + train_end, ids.begin() + val_end);
    split.test.assign(ids.begin() + val_end, ids.end());
    return split;
}

int add_frequencies_from_csv(RoadGraph& graph, std::istream& csv) {
    int consumed = 0;
    std::string line;
    while (std::getline(csv, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double lon = 0.0, lat = 0.0;
        if (!(row >> lon >> lat)) continue;
        int best = -1;
        double best_dist = std::numeric_limits<double>::max();
        for (const auto& node : graph.nodes) {
            const double d = haversine_m(lon, lat, node.lon, node.lat);
            if (d < best_dist) {
                best_dist = d;
                best = node.id;
            }
        }
        if (best >= 0) {
            graph.nodes[best].frequency += 1;
            ++consumed;
        }
    }
    return consumed;
}

}  // namespace beop
