// Command-line surface for the BEOP toolkit: instance generation from road
// networks, solving (greedy / branch-and-bound / rollout policy), MILP export,
// quota grids, stochastic simulation and policy training.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "beop/errors.hpp"
#include "beop/exact.hpp"
#include "beop/greedy.hpp"
#include "beop/instance.hpp"
#include "beop/json_io.hpp"
#include "beop/mdp.hpp"
#include "beop/policy.hpp"
#include "beop/roadnet.hpp"
#include "beop/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace beop;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNoProof = 3;
constexpr int kExitInternal = 4;

struct RunContext {
    std::string command;
    json config = json::object();
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<std::string> inputs;
    std::vector<std::pair<std::string, std::uint64_t>> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    std::uint64_t config_hash() const { return fnv1a_hash(config.dump()); }

    void write_output(const std::string& name, const std::string& content) {
        const fs::path path = fs::path(out_dir) / name;
        write_text_file(path.string(), content);
        outputs.emplace_back(name, fnv1a_hash(content));
    }

    void finish() {
        RunManifest manifest;
        manifest.command = command;
        manifest.config_json = config.dump();
        manifest.config_hash = config_hash();
        manifest.seed = seed;
        manifest.inputs = inputs;
        manifest.outputs = outputs;
        manifest.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        save_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
    }
};

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create output directory: " + dir);
}

void set_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
}

Ms seconds_to_ms(double seconds) {
    if (!(seconds > 0.0)) throw InvalidInput("time values must be positive seconds");
    return static_cast<Ms>(std::llround(seconds * 1000.0));
}

BeopInstance load_validated_instance(const std::string& path, InstanceExtras* extras = nullptr) {
    const BeopInstance inst = load_instance(path, extras);
    const FeasibilityReport report = validate_instance(inst);
    if (!report.feasible) {
        std::string what = "invalid instance " + path + ":";
        for (const auto& v : report.violations) {
            what += std::string(" ") + to_string(v.kind);
        }
        throw InvalidInput(what);
    }
    return inst;
}

std::vector<std::string> sorted_instance_files(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw InvalidInput("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().filename().string().rfind("manifest", 0) != 0) {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string graph_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int count = 1;
    int points = 20;
    int vehicles = 2;
    int capacity = 50;
    double max_time_s = 3600.0;
    double tw_fraction = 0.0;
    int demand_min = 1;
    int demand_max = 5;
    bool hazard = false;
    int hazard_nodes = 20;
    int jobs = 0;
};

int run_generate(const GenerateArgs& args) {
    set_jobs(args.jobs);
    RunContext ctx;
    ctx.command = "generate";
    ctx.seed = args.seed;
    ctx.out_dir = args.out_dir;
    ctx.inputs = {args.graph_path};
    ctx.config = {
        {"graph", args.graph_path},          {"count", args.count},
        {"points", args.points},             {"vehicles", args.vehicles},
        {"capacity", args.capacity},         {"max_time_s", args.max_time_s},
        {"tw_fraction", args.tw_fraction},   {"demand_min", args.demand_min},
        {"demand_max", args.demand_max},     {"hazard", args.hazard},
        {"hazard_nodes", args.hazard_nodes}, {"seed", args.seed},
    };
    ensure_out_dir(args.out_dir);

    const RoadGraph graph = load_graph(args.graph_path);
    std::vector<int> all(graph.nodes.size());
    std::iota(all.begin(), all.end(), 0);
    const TravelMatrix apsp = all_pairs_shortest_times(graph, all);

    SamplingParams params;
    params.num_points = args.points;
    params.num_vehicles = args.vehicles;
    params.capacity = args.capacity;
    params.max_time = seconds_to_ms(args.max_time_s);
    params.tw_fraction = args.tw_fraction;
    params.demand_min = args.demand_min;
    params.demand_max = args.demand_max;
    params.seed = args.seed;

    const Rng root(args.seed);
    for (int i = 0; i < args.count; ++i) {
        Rng stream = root.fork(static_cast<std::uint64_t>(i));
        InstanceExtras extras;
        extras.tw_fraction = args.tw_fraction;
        extras.config_hash = ctx.config_hash();
        BeopInstance inst;
        if (args.hazard) {
            const HazardInstance hi =
                sample_instance_with_hazard(graph, apsp, params, stream, args.hazard_nodes);
            inst = hi.instance;
            extras.hazard_removed = hi.removed_nodes;
        } else {
            inst = sample_instance(graph, apsp, params, stream);
        }
        const std::string name =
            "inst_" + std::to_string(args.seed) + "_" + std::to_string(i) + ".json";
        ctx.write_output(name, instance_to_json(inst, extras));
    }
    ctx.finish();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveArgs {
    std::string instance_path;
    std::string out_dir;
    std::string method = "greedy";
    std::uint64_t seed = 0;
    // exact
    std::int64_t node_budget = 0;  // 0 = unlimited
    double time_budget_s = 0.0;    // 0 = unlimited
    int subtour_cap = 0;
    // policy
    std::string params_path;
    int pomo_starts = 8;
    std::vector<double> augment_scales;
    bool sample = false;
    int jobs = 0;
};

int run_solve(const SolveArgs& args) {
    set_jobs(args.jobs);
    RunContext ctx;
    ctx.command = "solve";
    ctx.seed = args.seed;
    ctx.out_dir = args.out_dir;
    ctx.inputs = {args.instance_path};
    ctx.config = {
        {"instance", args.instance_path},       {"method", args.method},
        {"seed", args.seed},                    {"node_budget", args.node_budget},
        {"time_budget_s", args.time_budget_s},  {"subtour_cap", args.subtour_cap},
        {"params", args.params_path},           {"pomo_starts", args.pomo_starts},
        {"augment_scales", args.augment_scales}, {"sample", args.sample},
    };
    ensure_out_dir(args.out_dir);

    const BeopInstance inst = load_validated_instance(args.instance_path);

    Solution sol;
    SolutionExtras extras;
    extras.method = args.method;
    extras.config_hash = ctx.config_hash();
    int exit_code = kExitOk;

    if (args.method == "greedy") {
        sol = greedy_solve(inst);
    } else if (args.method == "exact") {
        BnbLimits limits;
        if (args.node_budget > 0) limits.node_budget = args.node_budget;
        if (args.time_budget_s > 0) limits.time_budget_s = args.time_budget_s;
        limits.subtour_cap = args.subtour_cap;
        const ExactResult result = exact_solve(inst, limits);
        sol = result.best;
        extras.upper_bound = result.upper_bound;
        extras.proven_optimal = result.proven_optimal;
        extras.nodes_explored = result.nodes_explored;
        if (!result.proven_optimal) exit_code = kExitNoProof;
    } else if (args.method == "policy") {
        PolicyParams params;
        if (!args.params_path.empty()) {
            params = load_params(args.params_path);
            ctx.inputs.push_back(args.params_path);
        }
        if (args.sample) {
            const EdgeFeatureTable features = edge_features(inst);
            LinearPolicy policy(params, features);
            Rng rng(args.seed);
            sol = rollout(inst, policy, rng).solution;
        } else {
            PomoOptions options;
            options.starts = args.pomo_starts;
            options.augmentation_scales = args.augment_scales;
            sol = pomo_evaluate(inst, params, options);
        }
    } else {
        throw InvalidInput("unknown method: " + args.method);
    }

    ctx.write_output("solution.json", solution_to_json(sol, extras));
    if (!inst.coords.empty()) {
        ctx.write_output("routes.geojson", routes_to_geojson(inst, sol));
    }
    ctx.finish();
    return exit_code;
}

// ---------------------------------------------------------------------------
// export-milp
// ---------------------------------------------------------------------------

struct ExportArgs {
    std::string instance_path;
    std::string out_dir;
    int subtours = 3;
    std::string warm_start_path;
};

int run_export_milp(const ExportArgs& args) {
    RunContext ctx;
    ctx.command = "export-milp";
    ctx.out_dir = args.out_dir;
    ctx.inputs = {args.instance_path};
    ctx.config = {
        {"instance", args.instance_path},
        {"subtours", args.subtours},
        {"warm_start", args.warm_start_path},
    };
    ensure_out_dir(args.out_dir);

    const BeopInstance inst = load_validated_instance(args.instance_path);
    ctx.write_output("model.lp", emit_milp_lp(inst, args.subtours));
    if (!args.warm_start_path.empty()) {
        ctx.inputs.push_back(args.warm_start_path);
        const Solution sol = load_solution(args.warm_start_path);
        const FeasibilityReport report = check_feasible(inst, sol);
        if (!report.feasible) throw InvalidInput("warm-start solution is infeasible");
        ctx.write_output("start.mst", emit_warm_start_mst(inst, sol, args.subtours));
    }
    ctx.finish();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// quota-grid
// ---------------------------------------------------------------------------

struct QuotaGridArgs {
    std::string instance_dir;
    std::string out_dir;
    std::vector<std::string> methods{"greedy"};
    std::vector<int> vehicles;
    std::vector<int> capacities;
    std::vector<double> max_times_s;
    std::vector<double> tw_fractions;
    std::string params_path;
    int pomo_starts = 8;
    std::uint64_t seed = 0;
    bool stratify = false;
    double exact_time_budget_s = 0.0;
    int jobs = 0;
};

struct StratifiedQuota {
    double quota = 0.0;
    std::array<double, 5> by_distance{};  // fractions 0.2 .. 1.0
};

StratifiedQuota stratified_quota(const BeopInstance& inst, const Solution& sol) {
    StratifiedQuota out;
    out.quota = sol.quota;
    std::vector<std::uint8_t> served(static_cast<std::size_t>(inst.n) + 1, 0);
    for (const auto& tour : sol.tours) {
        for (int v : tour.nodes) {
            if (v != 0) served[v] = 1;
        }
    }
    const std::array<double, 5> fractions{0.2, 0.4, 0.6, 0.8, 1.0};
    for (std::size_t f = 0; f < fractions.size(); ++f) {
        int stratum_prize = 0;
        int served_prize = 0;
        for (int v = 1; v <= inst.n; ++v) {
            // Fraction 1 is by definition the whole instance.
            const bool in_stratum =
                fractions[f] >= 1.0 ||
                static_cast<double>(inst.t(v, 0)) <=
                    fractions[f] * static_cast<double>(inst.max_time);
            if (!in_stratum) continue;
            stratum_prize += inst.prize[v];
            if (served[v]) served_prize += inst.prize[v];
        }
        out.by_distance[f] =
            stratum_prize > 0 ? static_cast<double>(served_prize) / stratum_prize : 0.0;
    }
    return out;
}

int run_quota_grid(const QuotaGridArgs& args) {
    set_jobs(args.jobs);
    RunContext ctx;
    ctx.command = "quota-grid";
    ctx.seed = args.seed;
    ctx.out_dir = args.out_dir;
    ctx.config = {
        {"instances", args.instance_dir},  {"methods", args.methods},
        {"vehicles", args.vehicles},       {"capacities", args.capacities},
        {"max_times_s", args.max_times_s}, {"tw_fractions", args.tw_fractions},
        {"params", args.params_path},      {"pomo_starts", args.pomo_starts},
        {"seed", args.seed},               {"stratify", args.stratify},
        {"exact_time_budget_s", args.exact_time_budget_s},
    };
    ensure_out_dir(args.out_dir);

    const std::vector<std::string> files = sorted_instance_files(args.instance_dir);
    if (files.empty()) throw InvalidInput("no instances found in " + args.instance_dir);
    std::vector<BeopInstance> bases;
    for (const auto& path : files) {
        bases.push_back(load_validated_instance(path));
        ctx.inputs.push_back(path);
    }

    PolicyParams params;
    if (!args.params_path.empty()) {
        params = load_params(args.params_path);
        ctx.inputs.push_back(args.params_path);
    }

    // Omitted axes keep each instance's own value.
    std::vector<std::optional<int>> vehicle_axis{std::nullopt};
    if (!args.vehicles.empty()) {
        vehicle_axis.clear();
        for (int v : args.vehicles) vehicle_axis.emplace_back(v);
    }
    std::vector<std::optional<int>> capacity_axis{std::nullopt};
    if (!args.capacities.empty()) {
        capacity_axis.clear();
        for (int c : args.capacities) capacity_axis.emplace_back(c);
    }
    std::vector<std::optional<Ms>> time_axis{std::nullopt};
    if (!args.max_times_s.empty()) {
        time_axis.clear();
        for (double t : args.max_times_s) time_axis.emplace_back(seconds_to_ms(t));
    }
    std::vector<std::optional<double>> tw_axis{std::nullopt};
    if (!args.tw_fractions.empty()) {
        tw_axis.clear();
        for (double t : args.tw_fractions) tw_axis.emplace_back(t);
    }

    std::string csv = "method,vehicles,capacity,max_time_ms,tw_fraction,instances,mean_quota";
    if (args.stratify) csv += ",q020,q040,q060,q080,q100";
    csv += "\n";

    const auto cell_value = [](const auto& opt) {
        return opt ? std::to_string(*opt) : std::string("-");
    };

    int cell_index = 0;
    for (const auto& kv : vehicle_axis) {
        for (const auto& cv : capacity_axis) {
            for (const auto& tv : time_axis) {
                for (const auto& twv : tw_axis) {
                    ++cell_index;
                    std::vector<BeopInstance> cell_instances(bases.size());
                    for (std::size_t i = 0; i < bases.size(); ++i) {
                        ParamOverride ov;
                        ov.num_vehicles = kv;
                        ov.capacity = cv;
                        ov.max_time = tv;
                        BeopInstance inst = override_parameters(bases[i], ov);
                        if (twv) {
                            Rng tw_rng =
                                Rng(args.seed).fork(static_cast<std::uint64_t>(cell_index)).fork(i);
                            inst = redraw_time_windows(inst, *twv, tw_rng);
                        }
                        const FeasibilityReport report = validate_instance(inst);
                        if (!report.feasible) {
                            throw InvalidInput("grid override makes instance infeasible (cell " +
                                               std::to_string(cell_index) + ")");
                        }
                        cell_instances[i] = std::move(inst);
                    }

                    for (const auto& method : args.methods) {
                        if (method != "greedy" && method != "exact" && method != "policy") {
                            throw InvalidInput("unknown method: " + method);
                        }
                        std::vector<StratifiedQuota> quotas(cell_instances.size());
#pragma omp parallel for schedule(dynamic)
                        for (std::size_t i = 0; i < cell_instances.size(); ++i) {
                            const BeopInstance& inst = cell_instances[i];
                            Solution sol;
                            if (method == "greedy") {
                                sol = greedy_solve(inst);
                            } else if (method == "exact") {
                                BnbLimits limits;
                                if (args.exact_time_budget_s > 0) {
                                    limits.time_budget_s = args.exact_time_budget_s;
                                }
                                sol = exact_solve(inst, limits).best;
                            } else {
                                PomoOptions options;
                                options.starts = args.pomo_starts;
                                options.parallel = false;
                                sol = pomo_evaluate(inst, params, options);
                            }
                            quotas[i] = stratified_quota(inst, sol);
                        }
                        double mean = 0.0;
                        std::array<double, 5> strata{};
                        for (const auto& q : quotas) {
                            mean += q.quota;
                            for (std::size_t f = 0; f < strata.size(); ++f) {
                                strata[f] += q.by_distance[f];
                            }
                        }
                        mean /= static_cast<double>(quotas.size());
                        for (auto& s : strata) s /= static_cast<double>(quotas.size());

                        csv += method + "," + cell_value(kv) + "," + cell_value(cv) + "," +
                               cell_value(tv) + "," +
                               (twv ? std::to_string(*twv) : std::string("-")) + "," +
                               std::to_string(quotas.size()) + "," + std::to_string(mean);
                        if (args.stratify) {
                            for (double s : strata) csv += "," + std::to_string(s);
                        }
                        csv += "\n";
                    }
                }
            }
        }
    }
    ctx.write_output("quota_grid.csv", csv);
    ctx.finish();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string instance_path;
    std::string params_path;
    std::string out_dir;
    int realizations = 100;
    double noise_sigma = 0.10 / 1.96;
    double drop_prob = 0.2;
    double guard = 0.0;
    std::uint64_t seed = 0;
    bool trace = false;
};

int run_simulate(const SimulateArgs& args) {
    RunContext ctx;
    ctx.command = "simulate";
    ctx.seed = args.seed;
    ctx.out_dir = args.out_dir;
    ctx.inputs = {args.instance_path};
    ctx.config = {
        {"instance", args.instance_path},    {"params", args.params_path},
        {"realizations", args.realizations}, {"noise_sigma", args.noise_sigma},
        {"drop_prob", args.drop_prob},       {"guard", args.guard},
        {"seed", args.seed},                 {"trace", args.trace},
    };
    ensure_out_dir(args.out_dir);

    const BeopInstance inst = load_validated_instance(args.instance_path);
    if (inst.num_vehicles != 1) {
        throw RequiresSingleVehicle("simulate needs a single-vehicle instance");
    }
    PolicyParams params;
    if (!args.params_path.empty()) {
        params = load_params(args.params_path);
        ctx.inputs.push_back(args.params_path);
    }
    const EdgeFeatureTable features = edge_features(inst);

    std::string records = "realization,quota,invalid,deadline_violations\n";
    std::vector<double> quotas;
    int invalid_count = 0;
    int deadline_total = 0;
    std::string trace_lines;
    const Rng root(args.seed);
    for (int r = 0; r < args.realizations; ++r) {
        Rng stream = root.fork(static_cast<std::uint64_t>(r));
        const Realization real = sample_stochastic_realization(
            inst, NoiseParams{args.noise_sigma}, args.drop_prob, stream);
        const StochasticRunResult run =
            run_stochastic(inst, real, params, features, args.guard, args.trace && r == 0);
        quotas.push_back(run.quota);
        invalid_count += run.invalid ? 1 : 0;
        deadline_total += run.deadline_violations;
        records += std::to_string(r) + "," + std::to_string(run.quota) + "," +
                   (run.invalid ? "1" : "0") + "," + std::to_string(run.deadline_violations) +
                   "\n";
        if (args.trace && r == 0) {
            for (const auto& record : run.trace) {
                trace_lines += trace_record_to_json(record) + "\n";
            }
        }
    }
    ctx.write_output("records.csv", records);

    std::vector<double> sorted = quotas;
    std::sort(sorted.begin(), sorted.end());
    json summary;
    summary["realizations"] = args.realizations;
    summary["mean_quota"] = sorted.empty()
                                ? 0.0
                                : std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                                      static_cast<double>(sorted.size());
    summary["median_quota"] =
        sorted.empty()
            ? 0.0
            : (sorted.size() % 2 == 1
                   ? sorted[sorted.size() / 2]
                   : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]));
    summary["min_quota"] = sorted.empty() ? 0.0 : sorted.front();
    summary["invalid_count"] = invalid_count;
    summary["deadline_violations"] = deadline_total;
    summary["config_hash"] = ctx.config_hash();
    ctx.write_output("summary.json", summary.dump(2) + "\n");
    if (args.trace) ctx.write_output("trace.jsonl", trace_lines);
    ctx.finish();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string train_dir;
    std::string val_dir;
    std::string out_dir;
    int epochs = 10;
    int batch_size = 50;
    double learning_rate = 1e-4;
    int pomo_starts = 8;
    double scale_min = 0.5;
    double scale_max = 1.5;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    bool stochastic = false;
    double noise_sigma = 0.10 / 1.96;
    double drop_prob = 0.2;
    int jobs = 0;
};

int run_train(const TrainArgs& args) {
    set_jobs(args.jobs);
    RunContext ctx;
    ctx.command = "train";
    ctx.seed = args.seed;
    ctx.out_dir = args.out_dir;
    ctx.config = {
        {"train_dir", args.train_dir},          {"val_dir", args.val_dir},
        {"epochs", args.epochs},                {"batch_size", args.batch_size},
        {"learning_rate", args.learning_rate},  {"pomo_starts", args.pomo_starts},
        {"scale_min", args.scale_min},          {"scale_max", args.scale_max},
        {"temperature", args.temperature},      {"seed", args.seed},
        {"stochastic", args.stochastic},        {"noise_sigma", args.noise_sigma},
        {"drop_prob", args.drop_prob},
    };
    ensure_out_dir(args.out_dir);

    std::vector<BeopInstance> train_instances, val_instances;
    for (const auto& path : sorted_instance_files(args.train_dir)) {
        train_instances.push_back(load_validated_instance(path));
        ctx.inputs.push_back(path);
    }
    for (const auto& path : sorted_instance_files(args.val_dir)) {
        val_instances.push_back(load_validated_instance(path));
        ctx.inputs.push_back(path);
    }
    if (train_instances.empty()) throw InvalidInput("no training instances in " + args.train_dir);
    if (val_instances.empty()) throw InvalidInput("no validation instances in " + args.val_dir);

    TrainConfig config;
    config.epochs = args.epochs;
    config.batch_size = args.batch_size;
    config.learning_rate = args.learning_rate;
    config.pomo_starts = args.pomo_starts;
    config.scale_min = args.scale_min;
    config.scale_max = args.scale_max;
    config.temperature = args.temperature;
    config.seed = args.seed;
    config.stochastic = args.stochastic;
    config.noise_sigma = args.noise_sigma;
    config.drop_prob = args.drop_prob;

    const TrainResult result = reinforce_train(train_instances, val_instances, config);

    ctx.write_output("params.json", params_to_json(result.params, ctx.config_hash()));
    std::string curve = "epoch,mean_validation_quota\n";
    for (const auto& [epoch, quota] : result.curve) {
        curve += std::to_string(epoch) + "," + std::to_string(quota) + "\n";
    }
    ctx.write_output("curve.csv", curve);
    ctx.finish();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bus evacuation planning toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Sample instances from a road network");
    generate->add_option("--graph", gen.graph_path, "Road network file")->required();
    generate->add_option("--out", gen.out_dir, "Output directory")->required();
    generate->add_option("--seed", gen.seed, "Random seed")->required();
    generate->add_option("--count", gen.count, "Number of instances");
    generate->add_option("--points", gen.points, "Evacuation nodes per instance");
    generate->add_option("--vehicles", gen.vehicles, "Fleet size");
    generate->add_option("--capacity", gen.capacity, "Seats per vehicle");
    generate->add_option("--max-time", gen.max_time_s, "Evacuation budget, seconds");
    generate->add_option("--tw-fraction", gen.tw_fraction, "Max share of windowed nodes");
    generate->add_option("--demand-min", gen.demand_min, "Smallest node demand");
    generate->add_option("--demand-max", gen.demand_max, "Largest node demand");
    generate->add_flag("--hazard", gen.hazard, "Prune a hazard zone before sampling");
    generate->add_option("--hazard-nodes", gen.hazard_nodes, "Candidates inside the zone");
    generate->add_option("--jobs", gen.jobs, "Worker threads");

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Solve one instance");
    solve_cmd->add_option("--instance", solve.instance_path, "Instance JSON")->required();
    solve_cmd->add_option("--out", solve.out_dir, "Output directory")->required();
    solve_cmd->add_option("--method", solve.method, "greedy | exact | policy");
    solve_cmd->add_option("--seed", solve.seed, "Random seed (policy sampling)");
    solve_cmd->add_option("--node-budget", solve.node_budget, "Search-node budget (exact)");
    solve_cmd->add_option("--time-budget", solve.time_budget_s,
                          "Wall-time budget, seconds (exact)");
    solve_cmd->add_option("--subtours", solve.subtour_cap, "Subtour cap per vehicle (exact)");
    solve_cmd->add_option("--params", solve.params_path, "Policy parameters JSON");
    solve_cmd->add_option("--pomo-starts", solve.pomo_starts, "Rollouts per instance (policy)");
    solve_cmd->add_option("--augment-scale", solve.augment_scales,
                          "Extra travel-time scales for augmentation (policy)");
    solve_cmd->add_flag("--sample", solve.sample, "Single sampled rollout instead of POMO");
    solve_cmd->add_option("--jobs", solve.jobs, "Worker threads");

    ExportArgs exp;
    auto* export_cmd = app.add_subcommand("export-milp", "Emit the MILP in LP format");
    export_cmd->add_option("--instance", exp.instance_path, "Instance JSON")->required();
    export_cmd->add_option("--out", exp.out_dir, "Output directory")->required();
    export_cmd->add_option("--subtours", exp.subtours, "Subtours per vehicle");
    export_cmd->add_option("--warm-start", exp.warm_start_path, "Solution JSON to emit as MST");

    QuotaGridArgs grid;
    auto* grid_cmd = app.add_subcommand("quota-grid", "Mean quota over a parameter grid");
    grid_cmd->add_option("--instances", grid.instance_dir, "Instance directory")->required();
    grid_cmd->add_option("--out", grid.out_dir, "Output directory")->required();
    grid_cmd->add_option("--methods", grid.methods, "greedy | exact | policy");
    grid_cmd->add_option("--vehicles", grid.vehicles, "Vehicle-axis values");
    grid_cmd->add_option("--capacity", grid.capacities, "Capacity-axis values");
    grid_cmd->add_option("--max-time", grid.max_times_s, "Time-axis values, seconds");
    grid_cmd->add_option("--tw-fraction", grid.tw_fractions, "Window-axis values");
    grid_cmd->add_option("--params", grid.params_path, "Policy parameters JSON");
    grid_cmd->add_option("--pomo-starts", grid.pomo_starts, "Rollouts per instance (policy)");
    grid_cmd->add_option("--seed", grid.seed, "Random seed (window redraws)")->required();
    grid_cmd->add_flag("--stratify", grid.stratify, "Add distance-stratified quota columns");
    grid_cmd->add_option("--exact-time-budget", grid.exact_time_budget_s,
                         "Per-instance wall budget for the exact method, seconds");
    grid_cmd->add_option("--jobs", grid.jobs, "Worker threads");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Stochastic online evacuation runs");
    sim_cmd->add_option("--instance", sim.instance_path, "Instance JSON (single vehicle)")
        ->required();
    sim_cmd->add_option("--params", sim.params_path, "Policy parameters JSON");
    sim_cmd->add_option("--out", sim.out_dir, "Output directory")->required();
    sim_cmd->add_option("--realizations", sim.realizations, "Number of realizations");
    sim_cmd->add_option("--noise-sigma", sim.noise_sigma, "Relative travel-time sigma");
    sim_cmd->add_option("--drop-prob", sim.drop_prob, "Demand drop probability");
    sim_cmd->add_option("--guard", sim.guard, "Relative safety margin on expected legs");
    sim_cmd->add_option("--seed", sim.seed, "Random seed")->required();
    sim_cmd->add_flag("--trace", sim.trace, "Write a step trace for the first realization");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "REINFORCE training of the rollout policy");
    train_cmd->add_option("--train-dir", train.train_dir, "Training instances")->required();
    train_cmd->add_option("--val-dir", train.val_dir, "Validation instances")->required();
    train_cmd->add_option("--out", train.out_dir, "Output directory")->required();
    train_cmd->add_option("--epochs", train.epochs, "Training epochs");
    train_cmd->add_option("--batch-size", train.batch_size, "Instances per batch");
    train_cmd->add_option("--lr", train.learning_rate, "Learning rate");
    train_cmd->add_option("--pomo-starts", train.pomo_starts, "Rollouts per instance");
    train_cmd->add_option("--scale-min", train.scale_min, "Augmentation scale lower bound");
    train_cmd->add_option("--scale-max", train.scale_max, "Augmentation scale upper bound");
    train_cmd->add_option("--temperature", train.temperature, "Softmax temperature");
    train_cmd->add_option("--seed", train.seed, "Random seed")->required();
    train_cmd->add_flag("--stochastic", train.stochastic,
                        "Route training rollouts through the stochastic process");
    train_cmd->add_option("--noise-sigma", train.noise_sigma, "Stochastic travel sigma");
    train_cmd->add_option("--drop-prob", train.drop_prob, "Stochastic demand drop probability");
    train_cmd->add_option("--jobs", train.jobs, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInvalidInput;
    }

    try {
        if (*generate) return run_generate(gen);
        if (*solve_cmd) return run_solve(solve);
        if (*export_cmd) return run_export_milp(exp);
        if (*grid_cmd) return run_quota_grid(grid);
        if (*sim_cmd) return run_simulate(sim);
        if (*train_cmd) return run_train(train);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInvalidInput;
}
