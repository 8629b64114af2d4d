#pragma once

#include "beop/instance.hpp"
#include "beop/mdp.hpp"
#include "beop/rng.hpp"
#include "beop/roadnet.hpp"

namespace beop::testing {

struct InstanceSpec {
    int n = 7;
    int num_vehicles = 1;
    int capacity = 20;
    Ms max_time = kMsPerHour;
    double tw_fraction = 0.0;
    int demand_min = 1;
    int demand_max = 5;
    // Geometry: legs average around a quarter of the coordinate span.
    double span_s = 900.0;        // box side in travel-seconds
    double surcharge_s = 120.0;   // max per-target arrival surcharge (asymmetry)
};

/// Asymmetric instance that satisfies the triangle inequality by
/// construction: Euclidean leg plus a per-target surcharge.
BeopInstance random_metric_instance(Rng& rng, const InstanceSpec& spec);

/// Metric OP instance over the same geometry.
OpInstance random_metric_op(Rng& rng, int n, Ms max_time, double span_s = 900.0,
                            double surcharge_s = 120.0);

/// Strongly connected random road graph: a ring plus random chords.
RoadGraph random_connected_graph(Rng& rng, int num_nodes, int extra_edges);

/// State reached by a short uniform-random partial rollout (possibly initial).
MdpState random_reachable_state(const BeopInstance& inst, Rng& rng);

}  // namespace beop::testing
