#include "doctest.h"

#include <sstream>

#include "beop/errors.hpp"
#include "beop/json_io.hpp"
#include "support/generators.hpp"

using namespace beop;

TEST_CASE("instance JSON round-trips byte-identically") {
    Rng rng(101);
    testing::InstanceSpec spec;
    spec.n = 9;
    spec.tw_fraction = 0.4;
    const BeopInstance inst = testing::random_metric_instance(rng, spec);
    InstanceExtras extras;
    extras.tw_fraction = 0.4;
    extras.config_hash = fnv1a_hash("cfg");
    const std::string text = instance_to_json(inst, extras);
    InstanceExtras back_extras;
    const BeopInstance back = instance_from_json(text, &back_extras);
    CHECK(instance_to_json(back, back_extras) == text);
    CHECK(back_extras.tw_fraction == extras.tw_fraction);
    CHECK(back_extras.config_hash == extras.config_hash);
    CHECK(back.travel == inst.travel);
    CHECK(back.coords == inst.coords);
}

TEST_CASE("malformed instance JSON is rejected") {
    CHECK_THROWS_AS(instance_from_json("{not json"), InvalidInput);
    CHECK_THROWS_AS(instance_from_json("{\"n\": 2}"), InvalidInput);
}

TEST_CASE("solution JSON round-trips") {
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 3, 1, 0}});
    sol.tours.push_back(Tour{1, {0, 0}});
    sol.collected_prize = 9;
    sol.quota = 0.5625;
    SolutionExtras extras;
    extras.method = "exact";
    extras.upper_bound = 9;
    extras.proven_optimal = true;
    const std::string text = solution_to_json(sol, extras);
    const Solution back = solution_from_json(text);
    CHECK(back.tours.size() == 2);
    CHECK(back.tours[0].nodes == sol.tours[0].nodes);
    CHECK(back.collected_prize == 9);
    CHECK(back.quota == doctest::Approx(0.5625));
}

TEST_CASE("realization JSON round-trips") {
    Rng rng(104);
    testing::InstanceSpec spec;
    spec.n = 5;
    const BeopInstance inst = testing::random_metric_instance(rng, spec);
    Rng stream(9);
    const Realization real = sample_stochastic_realization(inst, NoiseParams{0.05}, 0.2, stream);
    const Realization back = realization_from_json(realization_to_json(real));
    CHECK(back.realized_travel == real.realized_travel);
    CHECK(back.realized_demand == real.realized_demand);
}

TEST_CASE("graph text round-trips") {
    Rng rng(102);
    const RoadGraph graph = testing::random_connected_graph(rng, 12, 20);
    const std::string text = graph_to_text(graph);
    std::istringstream in(text);
    const RoadGraph back = graph_from_text(in);
    CHECK(graph_to_text(back) == text);
    REQUIRE(back.nodes.size() == graph.nodes.size());
    CHECK(back.edges.size() == graph.edges.size());
}

TEST_CASE("graph parser rejects malformed headers and values") {
    std::istringstream bad1("NODS 1 EDGES 0\n0 0 0 1\n");
    CHECK_THROWS_AS(graph_from_text(bad1), InvalidInput);
    std::istringstream bad2("NODES 2 EDGES 1\n0 0 0 1\n1 0 0 1\n0 1 -5\n");
    CHECK_THROWS_AS(graph_from_text(bad2), InvalidInput);
    std::istringstream bad3("NODES 2 EDGES 1\n0 0 0 1\n2 0 0 1\n0 1 5\n");
    CHECK_THROWS_AS(graph_from_text(bad3), InvalidInput);
}

TEST_CASE("geojson exports one linestring per vehicle") {
    Rng rng(103);
    testing::InstanceSpec spec;
    spec.n = 5;
    spec.num_vehicles = 2;
    const BeopInstance inst = testing::random_metric_instance(rng, spec);
    Solution sol;
    sol.tours.push_back(Tour{0, {0, 1, 2, 0}});
    sol.tours.push_back(Tour{1, {0, 3, 0}});
    const std::string geo = routes_to_geojson(inst, sol);
    CHECK(geo.find("FeatureCollection") != std::string::npos);
    CHECK(geo.find("LineString") != std::string::npos);

    BeopInstance no_coords = inst;
    no_coords.coords.clear();
    CHECK_THROWS_AS(routes_to_geojson(no_coords, sol), InvalidInput);
}

TEST_CASE("trace records serialize the step fields") {
    TraceRecord record;
    record.state_before.visited = {0, 1, 0};
    record.state_before.current = 1;
    record.state_before.load = 3;
    record.state_before.elapsed = 12345;
    record.state_before.vehicles_left = 2;
    record.action = 0;
    record.transition_case = 3;
    record.elapsed_after = 20000;
    const std::string line = trace_record_to_json(record);
    CHECK(line.find("\"case\":3") != std::string::npos);
    CHECK(line.find("\"action\":0") != std::string::npos);
    CHECK(line.find("\"elapsed_after\":20000") != std::string::npos);
}

TEST_CASE("manifest serialization embeds the config hash") {
    RunManifest manifest;
    manifest.command = "generate";
    manifest.config_json = "{\"count\": 3}";
    manifest.config_hash = fnv1a_hash(manifest.config_json);
    manifest.seed = 7;
    manifest.inputs = {"graph.txt"};
    manifest.outputs = {{"inst_7_0.json", 123u}};
    const std::string text = manifest_to_json(manifest);
    CHECK(text.find("\"config_hash\"") != std::string::npos);
    CHECK(text.find("\"version\"") != std::string::npos);
}

TEST_CASE("fnv1a is stable") {
    CHECK(fnv1a_hash("") == 14695981039346656037ull);
    CHECK(fnv1a_hash("a") == fnv1a_hash("a"));
    CHECK(fnv1a_hash("a") != fnv1a_hash("b"));
}
