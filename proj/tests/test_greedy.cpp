#include "doctest.h"

#include <algorithm>
#include <set>

#include "beop/greedy.hpp"
#include "beop/instance.hpp"
#include "beop/json_io.hpp"
#include "beop/mdp.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace beop;

TEST_CASE("possible_moves enforces budget and capacity in normalized units") {
    BeopInstance inst;
    inst.n = 2;
    inst.num_vehicles = 1;
    inst.capacity = 5;
    inst.max_time = 100000;
    inst.metric = true;
    inst.travel.assign(9, 10000);
    for (int i = 0; i <= 2; ++i) inst.t(i, i) = 0;
    inst.demand = {0, 3, 3};
    inst.prize = {0, 3, 3};
    inst.deadline = {100000, 100000, 100000};
    const GreedyContext ctx = make_greedy_context(inst);
    std::vector<std::uint8_t> visited(3, 0);

    // L = 0.95 leaves no room for R = 0.2.
    CHECK(possible_moves(ctx, 0.95, 1, visited, 0).empty());
    // A full vehicle sees no customer nodes.
    CHECK(possible_moves(ctx, 0.0, 0, visited, 5).empty());
    CHECK(possible_moves(ctx, 0.0, 0, visited, 0) == std::vector<int>{1, 2});
}

TEST_CASE("possible_moves equals the MDP mask minus the depot") {
    Rng rng(61);
    for (int trial = 0; trial < 300; ++trial) {
        testing::InstanceSpec spec;
        spec.n = static_cast<int>(rng.uniform_int(3, 9));
        spec.num_vehicles = static_cast<int>(rng.uniform_int(1, 3));
        spec.capacity = static_cast<int>(rng.uniform_int(4, 12));
        spec.max_time = rng.uniform_int(20, 80) * 60 * kMsPerSecond;
        spec.tw_fraction = 0.5;
        const BeopInstance inst = testing::random_metric_instance(rng, spec);
        const MdpState state = testing::random_reachable_state(inst, rng);
        const GreedyContext ctx = make_greedy_context(inst);

        const double elapsed_norm =
            static_cast<double>(state.elapsed) / static_cast<double>(inst.max_time);
        const auto moves =
            possible_moves(ctx, elapsed_norm, state.current, state.visited, state.load);
        auto mask = feasible_actions(inst, state);
        mask.erase(std::remove(mask.begin(), mask.end(), 0), mask.end());
        REQUIRE(moves == mask);
    }
}

TEST_CASE("ratio rule picks prize per normalized distance") {
    // From the depot: node 1 (p=4, 0.2 away) beats node 2 (p=5, 0.5 away).
    BeopInstance inst;
    inst.n = 2;
    inst.num_vehicles = 1;
    inst.capacity = 20;
    inst.max_time = 100000;
    inst.metric = true;
    inst.travel = {0, 20000, 50000, 20000, 0, 30000, 50000, 30000, 0};
    inst.demand = {0, 4, 5};
    inst.prize = {0, 4, 5};
    inst.deadline = {100000, 100000, 100000};
    const Solution sol = greedy_solve(inst);
    REQUIRE(sol.tours.size() == 1);
    CHECK(sol.tours[0].nodes.front() == 0);
    CHECK(sol.tours[0].nodes[1] == 1);  // ratio 20 > 10
    CHECK(sol.collected_prize == 9);    // both fit in the budget
}

TEST_CASE("single-subtour instances never see an interior depot") {
    Rng rng(62);
    testing::InstanceSpec spec;
    spec.n = 6;
    spec.capacity = 100;  // capacity never binds
    spec.max_time = 6 * kMsPerHour;
    const BeopInstance inst = testing::random_metric_instance(rng, spec);
    const Solution sol = greedy_solve(inst);
    REQUIRE(sol.tours.size() == 1);
    const auto& nodes = sol.tours[0].nodes;
    CHECK(std::count(nodes.begin(), nodes.end(), 0) == 2);
    CHECK(sol.quota == doctest::Approx(1.0));
}

TEST_CASE("greedy output is feasible on random instances") {
    Rng rng(63);
    for (int trial = 0; trial < 500; ++trial) {
        testing::InstanceSpec spec;
        spec.n = static_cast<int>(rng.uniform_int(5, 30));
        spec.num_vehicles = static_cast<int>(rng.uniform_int(1, 4));
        spec.capacity = static_cast<int>(rng.uniform_int(5, 20));
        spec.max_time = rng.uniform_int(15, 90) * 60 * kMsPerSecond;
        spec.tw_fraction = 0.3;
        const BeopInstance inst = testing::random_metric_instance(rng, spec);
        const Solution sol = greedy_solve(inst);
        REQUIRE(check_feasible(inst, sol).feasible);
        REQUIRE(static_cast<int>(sol.tours.size()) == inst.num_vehicles);
        const auto [prize, quota] = solution_prize(inst, sol);
        REQUIRE(prize == sol.collected_prize);
    }
}

TEST_CASE("greedy is deterministic") {
    Rng rng(64);
    testing::InstanceSpec spec;
    spec.n = 15;
    spec.num_vehicles = 2;
    spec.tw_fraction = 0.3;
    const BeopInstance inst = testing::random_metric_instance(rng, spec);
    const std::string a = solution_to_json(greedy_solve(inst));
    const std::string b = solution_to_json(greedy_solve(inst));
    CHECK(a == b);
}

TEST_CASE("zero-distance duplicates rank above finite ratios, by prize") {
    BeopInstance inst;
    inst.n = 3;
    inst.num_vehicles = 1;
    inst.capacity = 20;
    inst.max_time = 100000;
    inst.metric = true;
    // Nodes 1 and 2 sit exactly at the depot; node 3 is 10s away.
    inst.travel = {0, 0,     0,     10000,  //
                   0, 0,     0,     10000,  //
                   0, 0,     0,     10000,  //
                   10000, 10000, 10000, 0};
    inst.demand = {0, 2, 5, 9};
    inst.prize = {0, 2, 5, 9};
    inst.deadline = {100000, 100000, 100000, 100000};
    const Solution sol = greedy_solve(inst);
    REQUIRE(sol.tours.size() == 1);
    // Free visits first, higher prize first among them.
    CHECK(sol.tours[0].nodes[1] == 2);
    CHECK(sol.tours[0].nodes[2] == 1);
    CHECK(sol.collected_prize == 16);
}

TEST_CASE("greedy never exceeds the exact optimum on small instances") {
    Rng rng(65);
    for (int trial = 0; trial < 50; ++trial) {
        testing::InstanceSpec spec;
        spec.n = static_cast<int>(rng.uniform_int(4, 7));
        spec.num_vehicles = static_cast<int>(rng.uniform_int(1, 2));
        spec.capacity = static_cast<int>(rng.uniform_int(4, 9));
        spec.max_time = rng.uniform_int(20, 60) * 60 * kMsPerSecond;
        spec.tw_fraction = 0.4;
        const BeopInstance inst = testing::random_metric_instance(rng, spec);
        const int greedy_prize = greedy_solve(inst).collected_prize;
        const int best = testing::exhaustive_best_prize(inst);
        REQUIRE(greedy_prize <= best);
    }
}
