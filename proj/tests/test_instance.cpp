#include "doctest.h"

#include <algorithm>

#include "beop/errors.hpp"
#include "beop/instance.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace beop;

namespace {

// Tiny hand-built instance: depot plus `n` nodes, symmetric 10s legs.
BeopInstance tiny(int n, int capacity, Ms max_time, Ms leg = 10000) {
    BeopInstance inst;
    inst.n = n;
    inst.capacity = capacity;
    inst.num_vehicles = 1;
    inst.max_time = max_time;
    inst.metric = true;
    inst.travel.assign(static_cast<std::size_t>(n + 1) * (n + 1), leg);
    for (int i = 0; i <= n; ++i) inst.t(i, i) = 0;
    inst.demand.assign(static_cast<std::size_t>(n) + 1, 3);
    inst.demand[0] = 0;
    inst.prize = inst.demand;
    inst.deadline.assign(static_cast<std::size_t>(n) + 1, max_time);
    return inst;
}

}  // namespace

TEST_CASE("validate_instance accepts a well-formed one-node instance") {
    const auto inst = tiny(1, 5, 25000);
    const auto report = validate_instance(inst);
    CHECK(report.feasible);
    CHECK(report.violations.empty());
}

TEST_CASE("validate_instance flags unservable demand") {
    auto inst = tiny(1, 50, 25000);
    inst.demand[1] = 60;
    inst.prize[1] = 60;
    const auto report = validate_instance(inst);
    REQUIRE_FALSE(report.feasible);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == ViolationKind::UnservableDemand);
    CHECK(report.violations[0].node == 1);
}

TEST_CASE("validate_instance flags deadlines outside (0, T]") {
    auto inst = tiny(2, 5, 100000);
    inst.deadline[1] = static_cast<Ms>(1.2 * 100000);
    const auto report = validate_instance(inst);
    REQUIRE_FALSE(report.feasible);
    CHECK(report.violations[0].kind == ViolationKind::Deadline);
}

TEST_CASE("check_feasible: simple out-and-back within budget") {
    const auto inst = tiny(1, 5, 25000);
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 1, 0}});
    CHECK(check_feasible(inst, sol).feasible);
}

TEST_CASE("check_feasible: one subtour over capacity") {
    auto inst = tiny(2, 5, 1000000);
    inst.demand[1] = inst.demand[2] = 5;
    inst.prize = inst.demand;
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 1, 2, 0}});
    const auto report = check_feasible(inst, sol);
    REQUIRE_FALSE(report.feasible);
    CHECK(report.violations[0].kind == ViolationKind::Capacity);
}

TEST_CASE("check_feasible: intermediate drop-off resets the load") {
    auto inst = tiny(2, 5, 1000000);
    inst.demand[1] = inst.demand[2] = 5;
    inst.prize = inst.demand;
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 1, 0, 2, 0}});
    CHECK(check_feasible(inst, sol).feasible);
}

TEST_CASE("check_feasible rejects tours that do not start and end at the depot") {
    const auto inst = tiny(2, 5, 1000000);
    Solution sol;
    sol.tours.push_back(Tour{0, {1, 2, 0}});
    const auto report = check_feasible(inst, sol);
    REQUIRE_FALSE(report.feasible);
    CHECK(report.violations[0].kind == ViolationKind::MalformedTour);
}

TEST_CASE("check_feasible flags duplicate visits across tours") {
    auto inst = tiny(2, 5, 1000000);
    inst.num_vehicles = 2;
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 1, 0}});
    sol.tours.push_back(Tour{1, {0, 1, 0}});
    const auto report = check_feasible(inst, sol);
    REQUIRE_FALSE(report.feasible);
    CHECK(std::any_of(report.violations.begin(), report.violations.end(), [](const Violation& v) {
        return v.kind == ViolationKind::DuplicateVisit;
    }));
}

TEST_CASE("check_feasible flags deadline misses") {
    auto inst = tiny(2, 20, 1000000);
    inst.deadline[2] = 15000;  // second hop arrives at 20s
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 1, 2, 0}});
    const auto report = check_feasible(inst, sol);
    REQUIRE_FALSE(report.feasible);
    CHECK(report.violations[0].kind == ViolationKind::Deadline);
    CHECK(report.violations[0].node == 2);
}

TEST_CASE("solution_prize sums distinct visited prizes") {
    auto inst = tiny(3, 20, 1000000);
    inst.prize = {0, 4, 5, 7};
    inst.demand = {0, 4, 5, 7};
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 1, 2, 0}});
    const auto [prize, quota] = solution_prize(inst, sol);
    CHECK(prize == 9);
    CHECK(quota == doctest::Approx(9.0 / 16.0));
}

TEST_CASE("solution_prize of empty tours is zero") {
    auto inst = tiny(3, 20, 1000000);
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 0}});
    const auto [prize, quota] = solution_prize(inst, sol);
    CHECK(prize == 0);
    CHECK(quota == 0.0);
}

TEST_CASE("solution_prize reaches quota 1 on full coverage") {
    auto inst = tiny(3, 20, 1000000);
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 1, 2, 3, 0}});
    const auto [prize, quota] = solution_prize(inst, sol);
    CHECK(prize == inst.total_prize());
    CHECK(quota == doctest::Approx(1.0));
}

TEST_CASE("solution_prize rejects infeasible solutions") {
    auto inst = tiny(2, 5, 1000);  // budget far too small
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 1, 0}});
    CHECK_THROWS_AS(solution_prize(inst, sol), InvalidInput);
}

TEST_CASE("strip_redundant_depot_visits removes interior depots") {
    const auto inst = tiny(2, 20, 1000000);
    const Tour stripped = strip_redundant_depot_visits(inst, Tour{0, {0, 1, 0, 2, 0}});
    CHECK(stripped.nodes == std::vector<int>{0, 1, 2, 0});

    const Tour unchanged = strip_redundant_depot_visits(inst, Tour{0, {0, 1, 2, 0}});
    CHECK(unchanged.nodes == std::vector<int>{0, 1, 2, 0});
}

TEST_CASE("strip_redundant_depot_visits requires the metric flag") {
    auto inst = tiny(2, 20, 1000000);
    inst.metric = false;
    CHECK_THROWS_AS(strip_redundant_depot_visits(inst, Tour{0, {0, 1, 0, 2, 0}}), InvalidInput);
}

TEST_CASE("stripping never lengthens a tour on metric instances") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        testing::InstanceSpec spec;
        spec.n = 6;
        spec.capacity = 100;
        spec.max_time = 4 * kMsPerHour;
        const BeopInstance inst = testing::random_metric_instance(rng, spec);

        // Random tour with interior depot stops.
        std::vector<int> nodes{0};
        std::vector<int> order{1, 2, 3, 4, 5, 6};
        for (int i = 5; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, i));
            std::swap(order[static_cast<std::size_t>(i)], order[j]);
        }
        for (int v : order) {
            nodes.push_back(v);
            if (rng.bernoulli(0.4)) nodes.push_back(0);
        }
        if (nodes.back() != 0) nodes.push_back(0);

        const auto tour_time = [&](const std::vector<int>& t) {
            Ms total = 0;
            for (std::size_t p = 1; p < t.size(); ++p) total += inst.t(t[p - 1], t[p]);
            return total;
        };
        const Tour stripped = strip_redundant_depot_visits(inst, Tour{0, nodes});
        CHECK(tour_time(stripped.nodes) <= tour_time(nodes));
        CHECK(std::count(stripped.nodes.begin(), stripped.nodes.end(), 0) == 2);
    }
}

TEST_CASE("op_to_beop sets the reduction parameters") {
    Rng rng(5);
    const OpInstance op = testing::random_metric_op(rng, 5, kMsPerHour);
    const BeopInstance inst = op_to_beop(op);
    CHECK(inst.num_vehicles == 1);
    CHECK(inst.capacity == 5);
    CHECK(inst.max_time == op.max_time);
    for (int v = 1; v <= 5; ++v) {
        CHECK(inst.demand[v] == 1);
        CHECK(inst.deadline[v] == op.max_time);
    }
    CHECK(validate_instance(inst).feasible);
}

TEST_CASE("depot_segments splits on interior depots") {
    const auto segs = depot_segments(Tour{0, {0, 1, 2, 0, 3, 0}});
    REQUIRE(segs.size() == 2);
    CHECK(segs[0] == std::vector<int>{1, 2});
    CHECK(segs[1] == std::vector<int>{3});
    CHECK(depot_segments(Tour{0, {0, 0}}).empty());
}

TEST_CASE("override_parameters rescales window deadlines with T") {
    auto inst = tiny(2, 5, 100000);
    inst.deadline[1] = 40000;
    ParamOverride ov;
    ov.max_time = 200000;
    const BeopInstance out = override_parameters(inst, ov);
    CHECK(out.max_time == 200000);
    CHECK(out.deadline[1] == 80000);
    CHECK(out.deadline[2] == 200000);
    CHECK(validate_instance(out).feasible);
}

TEST_CASE("randomized feasible constructions pass check_feasible") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        testing::InstanceSpec spec;
        spec.n = static_cast<int>(rng.uniform_int(3, 8));
        spec.num_vehicles = static_cast<int>(rng.uniform_int(1, 3));
        spec.capacity = static_cast<int>(rng.uniform_int(5, 12));
        spec.max_time = rng.uniform_int(30, 90) * 60 * kMsPerSecond;
        spec.tw_fraction = 0.3;
        const BeopInstance inst = testing::random_metric_instance(rng, spec);
        REQUIRE(validate_instance(inst).feasible);

        // Feasible by construction: per vehicle, add nodes while the three
        // constraints allow, with occasional drop-offs.
        Solution sol;
        std::vector<std::uint8_t> used(static_cast<std::size_t>(inst.n) + 1, 0);
        for (int k = 0; k < inst.num_vehicles; ++k) {
            Tour tour{k, {0}};
            Ms elapsed = 0;
            int load = 0;
            int cur = 0;
            for (int attempts = 0; attempts < 2 * inst.n; ++attempts) {
                const int v = static_cast<int>(rng.uniform_int(1, inst.n));
                if (used[v] || load + inst.demand[v] > inst.capacity) continue;
                if (elapsed + inst.t(cur, v) + inst.t(v, 0) > inst.max_time) continue;
                if (elapsed + inst.t(cur, v) > inst.deadline[v]) continue;
                elapsed += inst.t(cur, v);
                load += inst.demand[v];
                used[v] = 1;
                tour.nodes.push_back(v);
                cur = v;
                if (rng.bernoulli(0.25)) {
                    elapsed += inst.t(cur, 0);
                    if (elapsed > inst.max_time) break;
                    load = 0;
                    tour.nodes.push_back(0);
                    cur = 0;
                }
            }
            if (tour.nodes.back() != 0) tour.nodes.push_back(0);
            sol.tours.push_back(std::move(tour));
        }
        CHECK(check_feasible(inst, sol).feasible);
    }
}
