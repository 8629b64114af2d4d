#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beop/instance.hpp"
#include "beop/json_io.hpp"
#include "beop/roadnet.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace beop;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("beop_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int value = 0;
        return value;
    }
    std::string str(const std::string& sub = "") const {
        return sub.empty() ? path.string() : (path / sub).string();
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BEOP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string make_test_graph(const TempDir& dir, int nodes = 40, std::uint64_t seed = 5) {
    Rng rng(seed);
    const RoadGraph graph = testing::random_connected_graph(rng, nodes, 4 * nodes);
    const std::string path = dir.str("graph.txt");
    save_graph(path, graph);
    return path;
}

std::vector<std::string> instance_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("inst_", 0) == 0) files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

TEST_CASE("generate is deterministic and writes a manifest") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string out1 = tmp.str("a");
    const std::string out2 = tmp.str("b");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + out1 +
                    " --seed 7 --count 3 --points 8 --tw-fraction 0.3") == 0);
    REQUIRE(run_cli("generate --graph " + graph + " --out " + out2 +
                    " --seed 7 --count 3 --points 8 --tw-fraction 0.3") == 0);

    const auto files1 = instance_files(out1);
    const auto files2 = instance_files(out2);
    REQUIRE(files1.size() == 3);
    REQUIRE(files2.size() == 3);
    for (std::size_t i = 0; i < files1.size(); ++i) {
        CHECK(read_text_file(files1[i]) == read_text_file(files2[i]));
    }
    CHECK(fs::exists(fs::path(out1) / "manifest.json"));

    // The manifest hash matches the hash embedded in each instance.
    const json manifest = json::parse(read_text_file((fs::path(out1) / "manifest.json").string()));
    for (const auto& file : files1) {
        InstanceExtras extras;
        const BeopInstance inst = load_instance(file, &extras);
        REQUIRE(extras.config_hash.has_value());
        CHECK(*extras.config_hash == manifest.at("config_hash").get<std::uint64_t>());
        CHECK(validate_instance(inst).feasible);
    }
}

TEST_CASE("generated window shares never exceed the requested fraction") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp, 30);
    const std::string out = tmp.str("tw");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + out +
                    " --seed 11 --count 200 --points 10 --tw-fraction 0.3") == 0);
    for (const auto& file : instance_files(out)) {
        const BeopInstance inst = load_instance(file);
        int windowed = 0;
        for (int v = 1; v <= inst.n; ++v) {
            if (inst.deadline[v] < inst.max_time) ++windowed;
        }
        REQUIRE(static_cast<double>(windowed) / inst.n <= 0.3 + 1e-12);
    }
}

TEST_CASE("hazard generation records the pruned node set") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp, 120, 9);
    const std::string out = tmp.str("hz");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + out +
                    " --seed 3 --count 1 --points 20 --hazard --hazard-nodes 8") == 0);
    const auto files = instance_files(out);
    REQUIRE(files.size() == 1);
    InstanceExtras extras;
    const BeopInstance inst = load_instance(files[0], &extras);
    CHECK(inst.n == 20);
    CHECK(extras.hazard_removed.size() >= 8);
}

TEST_CASE("solve greedy emits a feasible solution, routes and manifest") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string gen = tmp.str("gen");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + gen +
                    " --seed 2 --count 1 --points 10") == 0);
    const std::string inst_path = instance_files(gen)[0];
    const std::string out = tmp.str("sol");
    REQUIRE(run_cli("solve --instance " + inst_path + " --out " + out + " --method greedy") == 0);

    const BeopInstance inst = load_instance(inst_path);
    const Solution sol = load_solution((fs::path(out) / "solution.json").string());
    CHECK(check_feasible(inst, sol).feasible);
    CHECK(fs::exists(fs::path(out) / "routes.geojson"));
    CHECK(fs::exists(fs::path(out) / "manifest.json"));

    const json manifest = json::parse(read_text_file((fs::path(out) / "manifest.json").string()));
    const json solution = json::parse(read_text_file((fs::path(out) / "solution.json").string()));
    CHECK(solution.at("config_hash").get<std::uint64_t>() ==
          manifest.at("config_hash").get<std::uint64_t>());
}

TEST_CASE("solve exact with a one-node budget exits 3 without a proof") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string gen = tmp.str("gen");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + gen +
                    " --seed 4 --count 1 --points 9 --vehicles 2") == 0);
    const std::string inst_path = instance_files(gen)[0];
    const std::string out = tmp.str("sol");
    CHECK(run_cli("solve --instance " + inst_path + " --out " + out +
                  " --method exact --node-budget 1") == 3);
    const json solution = json::parse(read_text_file((fs::path(out) / "solution.json").string()));
    CHECK(solution.at("proven_optimal").get<bool>() == false);
    CHECK(solution.at("upper_bound").get<int>() >= solution.at("collected_prize").get<int>());
}

TEST_CASE("solve policy works in pomo and sampling modes") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string gen = tmp.str("gen");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + gen +
                    " --seed 5 --count 1 --points 8") == 0);
    const std::string inst_path = instance_files(gen)[0];
    REQUIRE(run_cli("solve --instance " + inst_path + " --out " + tmp.str("p1") +
                    " --method policy --pomo-starts 4 --augment-scale 0.8 --augment-scale 1.2") ==
            0);
    REQUIRE(run_cli("solve --instance " + inst_path + " --out " + tmp.str("p2") +
                    " --method policy --sample --seed 9") == 0);
    const BeopInstance inst = load_instance(inst_path);
    const Solution pomo = load_solution((fs::path(tmp.str("p1")) / "solution.json").string());
    const Solution sampled = load_solution((fs::path(tmp.str("p2")) / "solution.json").string());
    CHECK(check_feasible(inst, pomo).feasible);
    CHECK(check_feasible(inst, sampled).feasible);
}

TEST_CASE("solve rejects unreadable input with exit 2") {
    TempDir tmp;
    CHECK(run_cli("solve --instance " + tmp.str("missing.json") + " --out " + tmp.str("out")) ==
          2);
}

TEST_CASE("export-milp header counts match the closed form and honor windows") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string gen = tmp.str("gen");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + gen +
                    " --seed 6 --count 1 --points 6 --vehicles 2") == 0);
    const std::string inst_path = instance_files(gen)[0];
    const std::string out = tmp.str("milp");
    const std::string sol_dir = tmp.str("greedy");
    REQUIRE(run_cli("solve --instance " + inst_path + " --out " + sol_dir + " --method greedy") ==
            0);
    REQUIRE(run_cli("export-milp --instance " + inst_path + " --out " + out +
                    " --subtours 3 --warm-start " +
                    (fs::path(sol_dir) / "solution.json").string()) == 0);

    const std::string lp = read_text_file((fs::path(out) / "model.lp").string());
    const BeopInstance inst = load_instance(inst_path);
    const std::int64_t subtours = static_cast<std::int64_t>(inst.num_vehicles) * 3;
    const std::int64_t n = inst.n;
    std::ostringstream expected;
    expected << "\\ vars x=" << subtours * (n + 1) * n << " y=" << subtours * n
             << " u=" << subtours * (n + 1) << " s=0";
    CHECK(lp.find(expected.str()) != std::string::npos);
    CHECK(lp.find(" s_") == std::string::npos);  // no window variables

    // The warm start references only variables present in the LP.
    const testing::ParsedLp parsed = testing::parse_lp(lp);
    const auto assignment =
        testing::parse_mst(read_text_file((fs::path(out) / "start.mst").string()));
    REQUIRE_FALSE(assignment.empty());
    for (const auto& [name, value] : assignment) {
        REQUIRE(parsed.variables.count(name) == 1);
    }
}

TEST_CASE("quota-grid on one cell and one instance matches solve") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string gen = tmp.str("gen");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + gen +
                    " --seed 8 --count 1 --points 10") == 0);
    const std::string inst_path = instance_files(gen)[0];
    const std::string sol_dir = tmp.str("sol");
    REQUIRE(run_cli("solve --instance " + inst_path + " --out " + sol_dir + " --method greedy") ==
            0);
    const Solution sol = load_solution((fs::path(sol_dir) / "solution.json").string());

    const std::string grid_dir = tmp.str("grid");
    REQUIRE(run_cli("quota-grid --instances " + gen + " --out " + grid_dir +
                    " --methods greedy --seed 1") == 0);
    std::ifstream csv((fs::path(grid_dir) / "quota_grid.csv").string());
    std::string header, row;
    REQUIRE(std::getline(csv, header));
    REQUIRE(std::getline(csv, row));
    const auto last_comma = row.find_last_of(',');
    const double mean_quota = std::stod(row.substr(last_comma + 1));
    CHECK(mean_quota == doctest::Approx(sol.quota).epsilon(1e-6));
}

TEST_CASE("quota-grid exact column is monotone along the vehicles axis") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string gen = tmp.str("gen");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + gen +
                    " --seed 9 --count 2 --points 6 --capacity 8 --demand-max 5 --max-time 1200") ==
            0);
    const std::string grid_dir = tmp.str("grid");
    REQUIRE(run_cli("quota-grid --instances " + gen + " --out " + grid_dir +
                    " --methods exact --vehicles 1 2 3 --seed 1") == 0);
    std::ifstream csv((fs::path(grid_dir) / "quota_grid.csv").string());
    std::string line;
    REQUIRE(std::getline(csv, line));  // header
    std::vector<double> quotas;
    while (std::getline(csv, line)) {
        const auto last_comma = line.find_last_of(',');
        quotas.push_back(std::stod(line.substr(last_comma + 1)));
    }
    REQUIRE(quotas.size() == 3);
    CHECK(quotas[0] <= quotas[1] + 1e-12);
    CHECK(quotas[1] <= quotas[2] + 1e-12);
}

TEST_CASE("quota-grid stratified fraction 1.0 equals the total quota") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string gen = tmp.str("gen");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + gen +
                    " --seed 10 --count 2 --points 10") == 0);
    const std::string grid_dir = tmp.str("grid");
    REQUIRE(run_cli("quota-grid --instances " + gen + " --out " + grid_dir +
                    " --methods greedy --stratify --seed 1") == 0);
    std::ifstream csv((fs::path(grid_dir) / "quota_grid.csv").string());
    std::string header, row;
    REQUIRE(std::getline(csv, header));
    REQUIRE(std::getline(csv, row));
    std::vector<std::string> cells;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 12);  // 7 base columns + 5 strata
    CHECK(std::stod(cells[11]) == doctest::Approx(std::stod(cells[6])).epsilon(1e-9));
}

TEST_CASE("simulate with zero noise reproduces the deterministic single rollout") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string gen = tmp.str("gen");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + gen +
                    " --seed 12 --count 1 --points 8 --vehicles 1") == 0);
    const std::string inst_path = instance_files(gen)[0];
    const std::string sim_dir = tmp.str("sim");
    REQUIRE(run_cli("simulate --instance " + inst_path + " --out " + sim_dir +
                    " --realizations 20 --noise-sigma 0 --drop-prob 0 --seed 2 --trace") == 0);

    std::ifstream csv((fs::path(sim_dir) / "records.csv").string());
    std::string line;
    REQUIRE(std::getline(csv, line));  // header
    std::vector<double> quotas;
    while (std::getline(csv, line)) {
        std::stringstream ss(line);
        std::string idx, quota;
        std::getline(ss, idx, ',');
        std::getline(ss, quota, ',');
        quotas.push_back(std::stod(quota));
    }
    REQUIRE(quotas.size() == 20);
    for (double q : quotas) CHECK(q == doctest::Approx(quotas.front()));
    CHECK(fs::exists(fs::path(sim_dir) / "summary.json"));
    CHECK(fs::exists(fs::path(sim_dir) / "trace.jsonl"));

    const json summary =
        json::parse(read_text_file((fs::path(sim_dir) / "summary.json").string()));
    CHECK(summary.at("invalid_count").get<int>() == 0);
}

TEST_CASE("simulate refuses multi-vehicle instances") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string gen = tmp.str("gen");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + gen +
                    " --seed 13 --count 1 --points 6 --vehicles 2") == 0);
    CHECK(run_cli("simulate --instance " + instance_files(gen)[0] + " --out " + tmp.str("sim") +
                  " --seed 1") == 2);
}

TEST_CASE("train writes reproducible params and a curve row per epoch") {
    TempDir tmp;
    const std::string graph = make_test_graph(tmp);
    const std::string train_dir = tmp.str("train");
    const std::string val_dir = tmp.str("val");
    REQUIRE(run_cli("generate --graph " + graph + " --out " + train_dir +
                    " --seed 14 --count 6 --points 8 --vehicles 1 --capacity 10 --max-time 1500") ==
            0);
    REQUIRE(run_cli("generate --graph " + graph + " --out " + val_dir +
                    " --seed 15 --count 3 --points 8 --vehicles 1 --capacity 10 --max-time 1500") ==
            0);

    const std::string out1 = tmp.str("t1");
    const std::string out2 = tmp.str("t2");
    const std::string flags = " --epochs 2 --batch-size 3 --pomo-starts 4 --seed 21";
    REQUIRE(run_cli("train --train-dir " + train_dir + " --val-dir " + val_dir + " --out " + out1 +
                    flags) == 0);
    REQUIRE(run_cli("train --train-dir " + train_dir + " --val-dir " + val_dir + " --out " + out2 +
                    flags) == 0);
    CHECK(read_text_file((fs::path(out1) / "params.json").string()) ==
          read_text_file((fs::path(out2) / "params.json").string()));

    std::ifstream curve((fs::path(out1) / "curve.csv").string());
    std::string line;
    int rows = 0;
    REQUIRE(std::getline(curve, line));
    while (std::getline(curve, line)) ++rows;
    CHECK(rows == 2);

    // epochs=0 returns the initial parameters and an empty curve.
    const std::string out0 = tmp.str("t0");
    REQUIRE(run_cli("train --train-dir " + train_dir + " --val-dir " + val_dir + " --out " + out0 +
                    " --epochs 0 --seed 21") == 0);
    const PolicyParams initial;
    const PolicyParams trained0 =
        params_from_json(read_text_file((fs::path(out0) / "params.json").string()));
    CHECK(params_to_json(trained0) == params_to_json(initial));
}
