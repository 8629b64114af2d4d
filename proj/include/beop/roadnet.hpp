#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "beop/instance.hpp"
#include "beop/rng.hpp"

namespace beop {

struct RoadNode {
    int id = 0;
    double lon = 0.0;
    double lat = 0.0;
    int frequency = 1;  // sampling weight, >= 1
};

struct RoadEdge {
    int from = 0;
    int to = 0;
    Ms travel_time = 0;  // > 0
};

/// Directed road network. Node ids are dense 0..N-1.
struct RoadGraph {
    std::vector<RoadNode> nodes;
    std::vector<RoadEdge> edges;
};

/// Dense travel-time matrix over an ordered node list, row-major.
struct TravelMatrix {
    int size = 0;
    std::vector<Ms> times;

    Ms at(int i, int j) const { return times[static_cast<std::size_t>(i) * size + j]; }
    Ms& at(int i, int j) { return times[static_cast<std::size_t>(i) * size + j]; }
};

/// Shortest directed travel times between every ordered pair of `subset`
/// nodes, Dijkstra per source fanned across OpenMP threads. Throws
/// Disconnected when some pair has no path.
TravelMatrix all_pairs_shortest_times(const RoadGraph& graph, const std::vector<int>& subset);

/// Single-threaded reference for the kernel above; kept for tests and the
/// benchmark target.
TravelMatrix all_pairs_shortest_times_serial(const RoadGraph& graph, const std::vector<int>& subset);

struct SamplingParams {
    int num_points = 20;       // evacuation nodes per instance
    int num_vehicles = 2;
    int capacity = 50;
    Ms max_time = kMsPerHour;
    double tw_fraction = 0.0;  // max share of nodes carrying deadlines
    int demand_min = 1;
    int demand_max = 5;
    std::uint64_t seed = 0;
};

/// Frequency-weighted draw of `count` distinct node ids (the first one plays
/// the depot role).
std::vector<int> select_weighted_nodes(const RoadGraph& graph, int count, Rng& rng);

/// Samples one instance: weighted node selection, uniform demands with
/// prize = demand, a uniformly drawn share u * tw_fraction of nodes windowed in
/// [0.3 T, 0.8 T], travel matrix restricted from the full-graph `apsp`.
BeopInstance sample_instance(const RoadGraph& graph, const TravelMatrix& apsp,
                             const SamplingParams& params, Rng& rng);

struct HazardResult {
    RoadGraph pruned;                 // surviving network, ids re-densified
    std::vector<int> kept_candidates; // new ids, depot first
    std::vector<int> removed_nodes;   // original graph ids inside the zone
    std::vector<int> new_to_original; // id map for the pruned graph
};

/// Removes the road-network ball around a random epicenter chosen among the
/// non-depot candidates, sized so that exactly `affected` candidates fall
/// inside. Retries with a fresh epicenter when the depot lands inside the zone
/// or the survivors become disconnected; throws ResampleLimitExceeded after
/// `max_retries` attempts.
HazardResult apply_hazard_zone(const RoadGraph& graph, const TravelMatrix& apsp_full,
                               const std::vector<int>& candidate_nodes, Rng& rng,
                               int affected = 20, int max_retries = 32);

/// Candidate draw + hazard pruning + instance assembly, redrawing the whole
/// candidate set whenever the hazard placement fails.
struct HazardInstance {
    BeopInstance instance;
    std::vector<int> removed_nodes;  // original graph ids
};
HazardInstance sample_instance_with_hazard(const RoadGraph& graph, const TravelMatrix& apsp_full,
                                           const SamplingParams& params, Rng& rng,
                                           int affected = 20, int max_retries = 32);

struct NoiseParams {
    double rel_sigma = 0.10 / 1.96;  // 95% of draws within +-10% of expectation
};

/// One concrete draw of stochastic travel times and demands.
struct Realization {
    std::vector<Ms> realized_travel;   // (n+1)^2 row-major
    std::vector<int> realized_demand;  // 0 or demand[v]
};

Realization sample_stochastic_realization(const BeopInstance& inst, const NoiseParams& noise,
                                          double drop_prob, Rng& rng);

/// Great-circle distance in meters.
double haversine_m(double lon1, double lat1, double lon2, double lat2);

/// 70/15/15 node split used when carving train/validation/test pools.
struct NodeSplit {
    std::vector<int> train, validation, test;
};
NodeSplit split_node_ids(int num_nodes, Rng& rng);

/// Increments the frequency of the node nearest to each `lon,lat` line.
/// Returns the number of points consumed.
int add_frequencies_from_csv(RoadGraph& graph, std::istream& csv);

}  // namespace beop
