// Benchmark of the OpenMP kernels against their serial references: all-pairs
// shortest times (Dijkstra per source) and POMO rollout fan-out.

#include <chrono>
#include <cstdio>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "beop/policy.hpp"
#include "beop/roadnet.hpp"
#include "beop/rng.hpp"

using namespace beop;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RoadGraph random_graph(Rng& rng, int num_nodes, int extra_edges) {
    RoadGraph graph;
    graph.nodes.resize(static_cast<std::size_t>(num_nodes));
    for (int i = 0; i < num_nodes; ++i) {
        graph.nodes[i] = RoadNode{i, rng.uniform_real(-122.5, -122.3),
                                  rng.uniform_real(37.6, 37.8), 1};
    }
    for (int i = 0; i < num_nodes; ++i) {
        graph.edges.push_back(RoadEdge{i, (i + 1) % num_nodes, rng.uniform_int(30000, 240000)});
    }
    for (int e = 0; e < extra_edges; ++e) {
        const int from = static_cast<int>(rng.uniform_int(0, num_nodes - 1));
        int to = static_cast<int>(rng.uniform_int(0, num_nodes - 1));
        if (to == from) to = (to + 1) % num_nodes;
        graph.edges.push_back(RoadEdge{from, to, rng.uniform_int(30000, 240000)});
    }
    return graph;
}

void bench_apsp(int num_nodes, int repeats) {
    Rng rng(7);
    const RoadGraph graph = random_graph(rng, num_nodes, 6 * num_nodes);
    std::vector<int> subset(static_cast<std::size_t>(num_nodes));
    std::iota(subset.begin(), subset.end(), 0);

    auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) all_pairs_shortest_times_serial(graph, subset);
    const double serial = seconds_since(start) / repeats;

    start = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) all_pairs_shortest_times(graph, subset);
    const double parallel = seconds_since(start) / repeats;

    const TravelMatrix a = all_pairs_shortest_times_serial(graph, subset);
    const TravelMatrix b = all_pairs_shortest_times(graph, subset);
    std::printf("apsp      n=%4d   serial %8.4fs   parallel %8.4fs   speedup %.2fx   equal=%s\n",
                num_nodes, serial, parallel, serial / parallel,
                a.times == b.times ? "yes" : "NO");
}

void bench_pomo(int n, int starts, int repeats) {
    Rng rng(11);
    const RoadGraph graph = random_graph(rng, 4 * n, 24 * n);
    std::vector<int> all(graph.nodes.size());
    std::iota(all.begin(), all.end(), 0);
    const TravelMatrix apsp = all_pairs_shortest_times(graph, all);
    SamplingParams params;
    params.num_points = n;
    params.num_vehicles = 2;
    params.capacity = 40;
    params.max_time = kMsPerHour;
    Rng stream(3);
    const BeopInstance inst = sample_instance(graph, apsp, params, stream);

    PolicyParams weights;
    PomoOptions serial_opts, parallel_opts;
    serial_opts.starts = starts;
    serial_opts.parallel = false;
    parallel_opts.starts = starts;
    parallel_opts.parallel = true;

    auto start = std::chrono::steady_clock::now();
    int serial_prize = 0;
    for (int r = 0; r < repeats; ++r) {
        serial_prize = pomo_evaluate(inst, weights, serial_opts).collected_prize;
    }
    const double serial = seconds_since(start) / repeats;

    start = std::chrono::steady_clock::now();
    int parallel_prize = 0;
    for (int r = 0; r < repeats; ++r) {
        parallel_prize = pomo_evaluate(inst, weights, parallel_opts).collected_prize;
    }
    const double parallel = seconds_since(start) / repeats;

    std::printf("pomo      n=%4d   serial %8.4fs   parallel %8.4fs   speedup %.2fx   equal=%s\n",
                n, serial, parallel, serial / parallel,
                serial_prize == parallel_prize ? "yes" : "NO");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif
    bench_apsp(200, 3);
    bench_apsp(600, 1);
    bench_pomo(60, 32, 3);
    bench_pomo(120, 64, 1);
    return 0;
}
