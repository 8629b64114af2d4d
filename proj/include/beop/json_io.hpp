#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "beop/exact.hpp"
#include "beop/instance.hpp"
#include "beop/mdp.hpp"
#include "beop/policy.hpp"
#include "beop/roadnet.hpp"

namespace beop {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Extra generation metadata kept alongside the core instance schema.
struct InstanceExtras {
    std::optional<double> tw_fraction;
    std::vector<int> hazard_removed;  // original graph ids pruned by the hazard
    std::optional<std::uint64_t> config_hash;
};

std::string instance_to_json(const BeopInstance& inst, const InstanceExtras& extras = {});
BeopInstance instance_from_json(const std::string& text, InstanceExtras* extras = nullptr);
BeopInstance load_instance(const std::string& path, InstanceExtras* extras = nullptr);
void save_instance(const std::string& path, const BeopInstance& inst,
                   const InstanceExtras& extras = {});

struct SolutionExtras {
    std::optional<std::string> method;
    std::optional<int> upper_bound;
    std::optional<bool> proven_optimal;
    std::optional<std::int64_t> nodes_explored;
    std::optional<std::uint64_t> config_hash;
};

std::string solution_to_json(const Solution& sol, const SolutionExtras& extras = {});
Solution solution_from_json(const std::string& text);
Solution load_solution(const std::string& path);

std::string params_to_json(const PolicyParams& params,
                           std::optional<std::uint64_t> config_hash = std::nullopt);
PolicyParams params_from_json(const std::string& text);
PolicyParams load_params(const std::string& path);

std::string realization_to_json(const Realization& real);
Realization realization_from_json(const std::string& text);

/// Plain-text graph format: `NODES <N> EDGES <M>`, N node lines
/// `id lon lat frequency`, M edge lines `from to travel_time_ms`.
std::string graph_to_text(const RoadGraph& graph);
RoadGraph graph_from_text(std::istream& in);
RoadGraph load_graph(const std::string& path);
void save_graph(const std::string& path, const RoadGraph& graph);

/// One LineString feature per vehicle; requires instance coordinates.
std::string routes_to_geojson(const BeopInstance& inst, const Solution& sol);

/// Step-trace line (JSON object, one per line in a .jsonl file).
std::string trace_record_to_json(const TraceRecord& record);

/// FNV-1a over a canonical string; used to tie outputs to their manifest.
std::uint64_t fnv1a_hash(const std::string& text);

struct RunManifest {
    std::string command;
    std::string config_json;  // canonical echo of the full configuration
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::pair<std::string, std::uint64_t>> outputs;  // path, content hash
    double wall_time_s = 0.0;
};

std::string manifest_to_json(const RunManifest& manifest);
void save_manifest(const std::string& path, const RunManifest& manifest);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace beop
