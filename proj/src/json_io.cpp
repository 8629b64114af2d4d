#include "beop/json_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "beop/errors.hpp"

namespace beop {

using nlohmann::json;

namespace {

json instance_to_json_object(const BeopInstance& inst, const InstanceExtras& extras) {
    json j;
    j["n"] = inst.n;
    j["travel"] = inst.travel;
    j["demand"] = inst.demand;
    j["prize"] = inst.prize;
    j["deadline"] = inst.deadline;
    j["num_vehicles"] = inst.num_vehicles;
    j["capacity"] = inst.capacity;
    j["max_time"] = inst.max_time;
    j["metric"] = inst.metric;
    if (!inst.coords.empty()) {
        json coords = json::array();
        for (const auto& c : inst.coords) coords.push_back(json::array({c[0], c[1]}));
        j["coords"] = coords;
    }
    if (extras.tw_fraction) j["tw_fraction"] = *extras.tw_fraction;
    if (!extras.hazard_removed.empty()) j["hazard_removed"] = extras.hazard_removed;
    if (extras.config_hash) j["config_hash"] = *extras.config_hash;
    return j;
}

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InvalidInput(std::string("malformed JSON in ") + what);
    return j;
}

}  // namespace

std::string instance_to_json(const BeopInstance& inst, const InstanceExtras& extras) {
    return instance_to_json_object(inst, extras).dump(2) + "\n";
}

BeopInstance instance_from_json(const std::string& text, InstanceExtras* extras) {
    const json j = parse(text, "instance");
    BeopInstance inst;
    try {
        inst.n = j.at("n").get<int>();
        inst.travel = j.at("travel").get<std::vector<Ms>>();
        inst.demand = j.at("demand").get<std::vector<int>>();
        inst.prize = j.at("prize").get<std::vector<int>>();
        inst.deadline = j.at("deadline").get<std::vector<Ms>>();
        inst.num_vehicles = j.at("num_vehicles").get<int>();
        inst.capacity = j.at("capacity").get<int>();
        inst.max_time = j.at("max_time").get<Ms>();
        inst.metric = j.at("metric").get<bool>();
        if (j.contains("coords")) {
            for (const auto& c : j.at("coords")) {
                inst.coords.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
            }
        }
        if (extras) {
            if (j.contains("tw_fraction")) extras->tw_fraction = j.at("tw_fraction").get<double>();
            if (j.contains("hazard_removed")) {
                extras->hazard_removed = j.at("hazard_removed").get<std::vector<int>>();
            }
            if (j.contains("config_hash")) {
                extras->config_hash = j.at("config_hash").get<std::uint64_t>();
            }
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("instance JSON: ") + e.what());
    }
    return inst;
}

BeopInstance load_instance(const std::string& path, InstanceExtras* extras) {
    return instance_from_json(read_text_file(path), extras);
}

void save_instance(const std::string& path, const BeopInstance& inst,
                   const InstanceExtras& extras) {
    write_text_file(path, instance_to_json(inst, extras));
}

std::string solution_to_json(const Solution& sol, const SolutionExtras& extras) {
    json j;
    json tours = json::array();
    for (const auto& tour : sol.tours) tours.push_back(tour.nodes);
    j["tours"] = tours;
    j["collected_prize"] = sol.collected_prize;
    j["quota"] = sol.quota;
    if (extras.method) j["method"] = *extras.method;
    if (extras.upper_bound) j["upper_bound"] = *extras.upper_bound;
    if (extras.proven_optimal) j["proven_optimal"] = *extras.proven_optimal;
    if (extras.nodes_explored) j["nodes_explored"] = *extras.nodes_explored;
    if (extras.config_hash) j["config_hash"] = *extras.config_hash;
    return j.dump(2) + "\n";
}

Solution solution_from_json(const std::string& text) {
    const json j = parse(text, "solution");
    Solution sol;
    try {
        int vehicle = 0;
        for (const auto& nodes : j.at("tours")) {
            Tour tour;
            tour.vehicle = vehicle++;
            tour.nodes = nodes.get<std::vector<int>>();
            sol.tours.push_back(std::move(tour));
        }
        sol.collected_prize = j.at("collected_prize").get<int>();
        sol.quota = j.at("quota").get<double>();
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("solution JSON: ") + e.what());
    }
    return sol;
}

Solution load_solution(const std::string& path) { return solution_from_json(read_text_file(path)); }

std::string params_to_json(const PolicyParams& params, std::optional<std::uint64_t> config_hash) {
    json j;
    j["weights"] = std::vector<double>(params.weights.begin(), params.weights.end());
    j["depot_bias"] = params.depot_bias;
    j["temperature"] = params.temperature;
    if (config_hash) j["config_hash"] = *config_hash;
    return j.dump(2) + "\n";
}

PolicyParams params_from_json(const std::string& text) {
    const json j = parse(text, "params");
    PolicyParams params;
    try {
        const auto weights = j.at("weights").get<std::vector<double>>();
        if (weights.size() != static_cast<std::size_t>(kPolicyWeightCount)) {
            throw InvalidInput("params JSON: expected " + std::to_string(kPolicyWeightCount) +
                               " weights");
        }
        std::copy(weights.begin(), weights.end(), params.weights.begin());
        params.depot_bias = j.at("depot_bias").get<double>();
        params.temperature = j.at("temperature").get<double>();
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("params JSON: ") + e.what());
    }
    return params;
}

PolicyParams load_params(const std::string& path) { return params_from_json(read_text_file(path)); }

std::string realization_to_json(const Realization& real) {
    json j;
    j["realized_travel"] = real.realized_travel;
    j["realized_demand"] = real.realized_demand;
    return j.dump(2) + "\n";
}

Realization realization_from_json(const std::string& text) {
    const json j = parse(text, "realization");
    Realization real;
    try {
        real.realized_travel = j.at("realized_travel").get<std::vector<Ms>>();
        real.realized_demand = j.at("realized_demand").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("realization JSON: ") + e.what());
    }
    return real;
}

std::string graph_to_text(const RoadGraph& graph) {
    std::ostringstream out;
    out << "NODES " << graph.nodes.size() << " EDGES " << graph.edges.size() << "\n";
    out.precision(12);
    for (const auto& node : graph.nodes) {
        out << node.id << " " << node.lon << " " << node.lat << " " << node.frequency << "\n";
    }
    for (const auto& edge : graph.edges) {
        out << edge.from << " " << edge.to << " " << edge.travel_time << "\n";
    }
    return out.str();
}

RoadGraph graph_from_text(std::istream& in) {
    RoadGraph graph;
    std::string tag_nodes, tag_edges;
    std::size_t num_nodes = 0, num_edges = 0;
    if (!(in >> tag_nodes >> num_nodes >> tag_edges >> num_edges) || tag_nodes != "NODES" ||
        tag_edges != "EDGES") {
        throw InvalidInput("graph file: expected header 'NODES <N> EDGES <M>'");
    }
    graph.nodes.resize(num_nodes);
    for (std::size_t i = 0; i < num_nodes; ++i) {
        auto& node = graph.nodes[i];
        if (!(in >> node.id >> node.lon >> node.lat >> node.frequency)) {
            throw InvalidInput("graph file: bad node line " + std::to_string(i));
        }
        if (node.id != static_cast<int>(i)) {
            throw InvalidInput("graph file: node ids must be dense 0..N-1");
        }
        if (node.frequency < 1) throw InvalidInput("graph file: frequency must be >= 1");
    }
    graph.edges.resize(num_edges);
    for (std::size_t i = 0; i < num_edges; ++i) {
        auto& edge = graph.edges[i];
        if (!(in >> edge.from >> edge.to >> edge.travel_time)) {
            throw InvalidInput("graph file: bad edge line " + std::to_string(i));
        }
        if (edge.from < 0 || edge.from >= static_cast<int>(num_nodes) || edge.to < 0 ||
            edge.to >= static_cast<int>(num_nodes)) {
            throw InvalidInput("graph file: edge endpoint out of range");
        }
        if (edge.travel_time <= 0) throw InvalidInput("graph file: travel_time must be positive");
    }
    return graph;
}

RoadGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open graph file: " + path);
    return graph_from_text(in);
}

void save_graph(const std::string& path, const RoadGraph& graph) {
    write_text_file(path, graph_to_text(graph));
}

std::string routes_to_geojson(const BeopInstance& inst, const Solution& sol) {
    if (inst.coords.empty()) throw InvalidInput("GeoJSON export needs instance coordinates");
    json features = json::array();
    for (const auto& tour : sol.tours) {
        json coords = json::array();
        for (int v : tour.nodes) {
            coords.push_back(json::array({inst.coords[v][0], inst.coords[v][1]}));
        }
        int prize = 0;
        for (int v : tour.nodes) {
            if (v != 0) prize += inst.prize[v];
        }
        json feature;
        feature["type"] = "Feature";
        feature["geometry"] = {{"type", "LineString"}, {"coordinates", coords}};
        feature["properties"] = {{"vehicle", tour.vehicle},
                                 {"nodes", tour.nodes},
                                 {"prize", prize}};
        features.push_back(feature);
    }
    json out;
    out["type"] = "FeatureCollection";
    out["features"] = features;
    return out.dump(2) + "\n";
}

std::string trace_record_to_json(const TraceRecord& record) {
    json state;
    std::vector<int> visited;
    for (std::size_t v = 1; v < record.state_before.visited.size(); ++v) {
        if (record.state_before.visited[v]) visited.push_back(static_cast<int>(v));
    }
    state["visited"] = visited;
    state["current"] = record.state_before.current;
    state["load"] = record.state_before.load;
    state["elapsed"] = record.state_before.elapsed;
    state["vehicles_left"] = record.state_before.vehicles_left;
    json j;
    j["state"] = state;
    j["action"] = record.action;
    j["case"] = record.transition_case;
    j["elapsed_after"] = record.elapsed_after;
    return j.dump();
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string manifest_to_json(const RunManifest& manifest) {
    json j;
    j["command"] = manifest.command;
    j["config"] = json::parse(manifest.config_json);
    j["config_hash"] = manifest.config_hash;
    j["seed"] = manifest.seed;
    j["version"] = kToolkitVersion;
    j["inputs"] = manifest.inputs;
    json outputs = json::array();
    for (const auto& [path, hash] : manifest.outputs) {
        outputs.push_back({{"path", path}, {"hash", hash}});
    }
    j["outputs"] = outputs;
    j["wall_time_s"] = manifest.wall_time_s;
    return j.dump(2) + "\n";
}

void save_manifest(const std::string& path, const RunManifest& manifest) {
    write_text_file(path, manifest_to_json(manifest));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write file: " + path);
    out << content;
}

}  // namespace beop
