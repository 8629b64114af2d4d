#include "beop/exact.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <sstream>
#include <vector>

#include "beop/errors.hpp"

namespace beop {

namespace {

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct SearchContext {
    const BeopInstance& inst;
    BnbLimits limits;
    std::chrono::steady_clock::time_point start_time;

    std::int64_t nodes = 0;
    bool exhausted = false;
    int best_prize = -1;
    std::vector<std::vector<int>> best_tours;
    int frontier_bound = 0;

    // Mutable depth-first state.
    std::vector<std::uint8_t> visited;
    int visited_count = 0;
    int current = 0;
    int load = 0;
    Ms elapsed = 0;
    int vehicles_left = 0;
    int collected = 0;
    int cur_first = -1;   // first node visited by the active vehicle
    int prev_first = -1;  // symmetry threshold; INT_MAX once a vehicle retired empty
    int subtours_started = 0;
    std::vector<std::vector<int>> done_tours;
    std::vector<int> cur_tour;

    explicit SearchContext(const BeopInstance& instance, const BnbLimits& lim)
        : inst(instance), limits(lim), start_time(std::chrono::steady_clock::now()) {
        visited.assign(static_cast<std::size_t>(inst.n) + 1, 0);
        vehicles_left = inst.num_vehicles;
        cur_tour.push_back(0);
    }

    bool over_budget() {
        if (best_prize < 0) return false;  // always finish the first dive
        if (nodes > limits.node_budget) return true;
        if ((nodes & 1023) == 0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count() >
                limits.time_budget_s) {
            return true;
        }
        return false;
    }

    // Collected prize plus every unvisited node that some continuation could
    // still serve, interactions ignored. The per-node reachability tests rely
    // on the triangle inequality; without it the bound falls back to the plain
    // prize sum, which is always admissible.
    int bound() const {
        int b = collected;
        const bool fresh_available = vehicles_left >= 2;
        for (int v = 1; v <= inst.n; ++v) {
            if (visited[v]) continue;
            if (!inst.metric) {
                b += inst.prize[v];
                continue;
            }
            const Ms direct = elapsed + inst.t(current, v);
            if (load + inst.demand[v] <= inst.capacity && direct + inst.t(v, 0) <= inst.max_time &&
                direct <= inst.deadline[v]) {
                b += inst.prize[v];
                continue;
            }
            const Ms via_depot = elapsed + inst.t(current, 0) + inst.t(0, v);
            if (via_depot + inst.t(v, 0) <= inst.max_time && via_depot <= inst.deadline[v]) {
                b += inst.prize[v];
                continue;
            }
            if (fresh_available && inst.t(0, v) + inst.t(v, 0) <= inst.max_time &&
                inst.t(0, v) <= inst.deadline[v]) {
                b += inst.prize[v];
            }
        }
        return b;
    }

    bool node_feasible(int v) const {
        if (visited[v] || load + inst.demand[v] > inst.capacity) return false;
        if (elapsed + inst.t(current, v) + inst.t(v, 0) > inst.max_time) return false;
        if (elapsed + inst.t(current, v) > inst.deadline[v]) return false;
        return true;
    }

    bool reachable_after_return() const {
        const Ms at_depot = elapsed + inst.t(current, 0);
        for (int v = 1; v <= inst.n; ++v) {
            if (visited[v]) continue;
            if (at_depot + inst.t(0, v) + inst.t(v, 0) > inst.max_time) continue;
            if (at_depot + inst.t(0, v) > inst.deadline[v]) continue;
            return true;
        }
        return false;
    }

    void record_candidate() {
        if (collected <= best_prize) return;
        best_prize = collected;
        best_tours = done_tours;
        while (static_cast<int>(best_tours.size()) < inst.num_vehicles) {
            best_tours.push_back({0, 0});
        }
    }

    void dfs() {
        ++nodes;
        if (exhausted || over_budget()) {
            exhausted = true;
            frontier_bound = std::max(frontier_bound, bound());
            return;
        }
        if (bound() <= best_prize) return;

        const bool at_depot = current == 0;
        const bool cap_open =
            limits.subtour_cap == 0 || subtours_started < limits.subtour_cap || !at_depot;

        // Node visits, most promising first.
        if (cap_open) {
            std::vector<int> candidates;
            for (int v = 1; v <= inst.n; ++v) {
                if (!node_feasible(v)) continue;
                if (at_depot && cur_first == -1 && prev_first != -1 && v <= prev_first) {
                    continue;  // vehicles are interchangeable
                }
                candidates.push_back(v);
            }
            std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
                if (inst.prize[a] != inst.prize[b]) return inst.prize[a] > inst.prize[b];
                return a < b;
            });
            for (int v : candidates) {
                const int saved_first = cur_first;
                const int saved_subtours = subtours_started;
                const Ms saved_elapsed = elapsed;
                visited[v] = 1;
                ++visited_count;
                collected += inst.prize[v];
                load += inst.demand[v];
                elapsed += inst.t(current, v);
                if (at_depot) ++subtours_started;
                if (cur_first == -1) cur_first = v;
                const int saved_current = current;
                current = v;
                cur_tour.push_back(v);

                dfs();

                cur_tour.pop_back();
                current = saved_current;
                cur_first = saved_first;
                subtours_started = saved_subtours;
                elapsed = saved_elapsed;
                load -= inst.demand[v];
                collected -= inst.prize[v];
                --visited_count;
                visited[v] = 0;
            }
        }

        // Action 0. A drop-off (Case 3) applies while some node stays
        // reachable and the subtour cap leaves room; otherwise the return
        // finishes the vehicle (Case 2). From the depot a drop-off repeats the
        // same state, so only node visits are expanded there.
        const bool case3 = reachable_after_return() &&
                           (limits.subtour_cap == 0 || subtours_started < limits.subtour_cap);
        if (case3) {
            if (at_depot) return;
            const Ms saved_elapsed = elapsed;
            const int saved_load = load;
            const int saved_current = current;
            elapsed += inst.t(current, 0);
            load = 0;
            current = 0;
            cur_tour.push_back(0);

            dfs();

            cur_tour.pop_back();
            current = saved_current;
            load = saved_load;
            elapsed = saved_elapsed;
            return;
        }

        // Case 2: finish the active vehicle and hand over to the next one.
        {
            const auto saved_tour = cur_tour;
            const int saved_first = cur_first;
            const int saved_prev = prev_first;
            const int saved_subtours = subtours_started;
            const Ms saved_elapsed = elapsed;
            const int saved_load = load;
            const int saved_current = current;

            cur_tour.push_back(0);
            done_tours.push_back(cur_tour);
            cur_tour.assign(1, 0);
            prev_first = cur_first == -1 ? INT_MAX : cur_first;
            cur_first = -1;
            subtours_started = 0;
            elapsed = 0;
            load = 0;
            current = 0;
            vehicles_left -= 1;

            if (vehicles_left == 0 || visited_count == inst.n) {
                record_candidate();
            } else {
                dfs();
            }

            vehicles_left += 1;
            done_tours.pop_back();
            cur_tour = saved_tour;
            cur_first = saved_first;
            prev_first = saved_prev;
            subtours_started = saved_subtours;
            elapsed = saved_elapsed;
            load = saved_load;
            current = saved_current;
        }
    }
};

// ---------------------------------------------------------------------------
// LP emission
// ---------------------------------------------------------------------------

std::string sub_name(int k, int s) {
    return "k" + std::to_string(k + 1) + "s" + std::to_string(s + 1);
}

// Builds one constraint expression with line wrapping.
class LpLine {
public:
    explicit LpLine(std::string label) : text_(" " + std::move(label) + ":") {}

    void term(double coef, const std::string& var) {
        std::string piece;
        if (first_) {
            piece = " " + format(coef) + " " + var;
            first_ = false;
        } else {
            piece = coef < 0 ? " - " + format(-coef) + " " + var : " + " + format(coef) + " " + var;
        }
        if (col_ + piece.size() > 200) {
            text_ += "\n   ";
            col_ = 4;
        }
        text_ += piece;
        col_ += piece.size();
    }

    void finish(const std::string& relation, double rhs, std::string& out) {
        out += text_ + " " + relation + " " + format(rhs) + "\n";
    }

    void finish_bare(std::string& out) { out += text_ + "\n"; }

private:
    static std::string format(double v) {
        const auto r = static_cast<long long>(v);
        if (static_cast<double>(r) == v) return std::to_string(r);
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }

    std::string text_;
    std::size_t col_ = 0;
    bool first_ = true;
};

}  // namespace

ExactResult exact_solve(const BeopInstance& inst, const BnbLimits& limits) {
    SearchContext ctx(inst, limits);
    ctx.dfs();

    ExactResult result;
    result.nodes_explored = ctx.nodes;
    result.proven_optimal = !ctx.exhausted;
    result.best_prize = std::max(ctx.best_prize, 0);
    result.upper_bound =
        ctx.exhausted ? std::max(result.best_prize, ctx.frontier_bound) : result.best_prize;

    Solution sol;
    if (ctx.best_prize < 0) {
        for (int k = 0; k < inst.num_vehicles; ++k) sol.tours.push_back(Tour{k, {0, 0}});
    } else {
        for (int k = 0; k < inst.num_vehicles; ++k) {
            sol.tours.push_back(Tour{k, ctx.best_tours[static_cast<std::size_t>(k)]});
        }
    }
    sol.collected_prize = result.best_prize;
    const int total = inst.total_prize();
    sol.quota = total > 0 ? static_cast<double>(result.best_prize) / total : 0.0;
    result.best = std::move(sol);
    return result;
}

std::string emit_milp_lp(const BeopInstance& inst, int subtours_per_vehicle) {
    const int n = inst.n;
    const int num_k = inst.num_vehicles;
    const int num_s = subtours_per_vehicle;
    const bool tw = inst.has_time_windows();
    const double big_m = 10.0 * static_cast<double>(inst.max_time);

    const std::int64_t subtours = static_cast<std::int64_t>(num_k) * num_s;
    const std::int64_t x_count = subtours * (n + 1) * n;
    const std::int64_t y_count = subtours * n;
    const std::int64_t u_count = subtours * (n + 1);
    const std::int64_t s_count = tw ? subtours * (n + 1) : 0;

    std::string body;
    std::int64_t con_cap = 0, con_time = 0, con_flow = 0, con_depart = 0, con_link = 0,
                 con_visit = 0, con_mtz = 0, con_uord = 0, con_uzero = 0, con_twub = 0,
                 con_twchain = 0, con_twfirst = 0, con_twnext = 0;

    const auto x_name = [](int i, int j, int k, int s) {
        return "x_" + std::to_string(i) + "_" + std::to_string(j) + "_" + sub_name(k, s);
    };
    const auto y_name = [](int j, int k, int s) {
        return "y_" + std::to_string(j) + "_" + sub_name(k, s);
    };
    const auto u_name = [](int i, int k, int s) {
        return "u_" + std::to_string(i) + "_" + sub_name(k, s);
    };
    const auto s_name = [](int i, int k, int s) {
        return "s_" + std::to_string(i) + "_" + sub_name(k, s);
    };

    // (2) subtour capacity
    for (int k = 0; k < num_k; ++k) {
        for (int s = 0; s < num_s; ++s) {
            LpLine line("cap_" + sub_name(k, s));
            for (int i = 1; i <= n; ++i) line.term(inst.demand[i], y_name(i, k, s));
            line.finish("<=", inst.capacity, body);
            ++con_cap;
        }
    }
    // (3) vehicle time budget over all its subtours
    for (int k = 0; k < num_k; ++k) {
        LpLine line("time_k" + std::to_string(k + 1));
        for (int s = 0; s < num_s; ++s) {
            for (int i = 0; i <= n; ++i) {
                for (int j = 0; j <= n; ++j) {
                    if (i == j) continue;
                    line.term(static_cast<double>(inst.t(i, j)), x_name(i, j, k, s));
                }
            }
        }
        line.finish("<=", static_cast<double>(inst.max_time), body);
        ++con_time;
    }
    // (4) flow conservation
    for (int k = 0; k < num_k; ++k) {
        for (int s = 0; s < num_s; ++s) {
            for (int l = 0; l <= n; ++l) {
                LpLine line("flow_" + std::to_string(l) + "_" + sub_name(k, s));
                for (int i = 0; i <= n; ++i) {
                    if (i != l) line.term(1, x_name(i, l, k, s));
                }
                for (int j = 0; j <= n; ++j) {
                    if (j != l) line.term(-1, x_name(l, j, k, s));
                }
                line.finish("=", 0, body);
                ++con_flow;
            }
        }
    }
    // (5) each subtour leaves the depot at most once
    for (int k = 0; k < num_k; ++k) {
        for (int s = 0; s < num_s; ++s) {
            LpLine line("depart_" + sub_name(k, s));
            for (int i = 1; i <= n; ++i) line.term(1, x_name(0, i, k, s));
            line.finish("<=", 1, body);
            ++con_depart;
        }
    }
    // (6) edge-visit linking
    for (int k = 0; k < num_k; ++k) {
        for (int s = 0; s < num_s; ++s) {
            for (int j = 1; j <= n; ++j) {
                LpLine line("link_" + std::to_string(j) + "_" + sub_name(k, s));
                for (int i = 0; i <= n; ++i) {
                    if (i != j) line.term(1, x_name(i, j, k, s));
                }
                line.term(-1, y_name(j, k, s));
                line.finish("=", 0, body);
                ++con_link;
            }
        }
    }
    // (7) nodes visited at most once across all subtours
    for (int j = 1; j <= n; ++j) {
        LpLine line("visit_" + std::to_string(j));
        for (int k = 0; k < num_k; ++k) {
            for (int s = 0; s < num_s; ++s) line.term(1, y_name(j, k, s));
        }
        line.finish("<=", 1, body);
        ++con_visit;
    }
    // (8) MTZ ordering
    for (int k = 0; k < num_k; ++k) {
        for (int s = 0; s < num_s; ++s) {
            for (int i = 0; i <= n; ++i) {
                for (int j = 1; j <= n; ++j) {
                    if (i == j) continue;
                    LpLine line("mtz_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
                                sub_name(k, s));
                    line.term(1, u_name(j, k, s));
                    line.term(-1, u_name(i, k, s));
                    line.term(-(n + 1), x_name(i, j, k, s));
                    line.finish(">=", 1.0 - (n + 1), body);
                    ++con_mtz;
                }
            }
        }
    }
    // (9) order bounded by subtour size
    for (int k = 0; k < num_k; ++k) {
        for (int s = 0; s < num_s; ++s) {
            for (int i = 1; i <= n; ++i) {
                LpLine line("uord_" + std::to_string(i) + "_" + sub_name(k, s));
                line.term(1, u_name(i, k, s));
                for (int j = 1; j <= n; ++j) line.term(-1, y_name(j, k, s));
                line.finish("<=", 0, body);
                ++con_uord;
            }
        }
    }
    // (10) depot order anchor
    for (int k = 0; k < num_k; ++k) {
        for (int s = 0; s < num_s; ++s) {
            LpLine line("uzero_" + sub_name(k, s));
            line.term(1, u_name(0, k, s));
            line.finish("=", 0, body);
            ++con_uzero;
        }
    }
    if (tw) {
        // (11) arrivals before deadlines
        for (int k = 0; k < num_k; ++k) {
            for (int s = 0; s < num_s; ++s) {
                for (int i = 0; i <= n; ++i) {
                    LpLine line("twub_" + std::to_string(i) + "_" + sub_name(k, s));
                    line.term(1, s_name(i, k, s));
                    line.finish("<=", static_cast<double>(inst.deadline[i]), body);
                    ++con_twub;
                }
            }
        }
        // (12) arrival chaining along used edges
        for (int k = 0; k < num_k; ++k) {
            for (int s = 0; s < num_s; ++s) {
                for (int i = 0; i <= n; ++i) {
                    for (int j = 1; j <= n; ++j) {
                        if (i == j) continue;
                        LpLine line("twchain_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
                                    sub_name(k, s));
                        line.term(1, s_name(j, k, s));
                        line.term(-1, s_name(i, k, s));
                        line.term(-big_m, x_name(i, j, k, s));
                        line.finish(">=", static_cast<double>(inst.t(i, j)) - big_m, body);
                        ++con_twchain;
                    }
                }
            }
        }
        // (13) first subtour starts at time zero
        for (int k = 0; k < num_k; ++k) {
            LpLine line("twfirst_k" + std::to_string(k + 1));
            line.term(1, s_name(0, k, 0));
            line.finish("=", 0, body);
            ++con_twfirst;
        }
        // (14) later subtours start after all earlier travel
        for (int k = 0; k < num_k; ++k) {
            for (int s = 1; s < num_s; ++s) {
                LpLine line("twnext_" + sub_name(k, s));
                line.term(1, s_name(0, k, s));
                for (int m = 0; m < s; ++m) {
                    for (int i = 0; i <= n; ++i) {
                        for (int j = 0; j <= n; ++j) {
                            if (i == j) continue;
                            line.term(-static_cast<double>(inst.t(i, j)), x_name(i, j, k, m));
                        }
                    }
                }
                line.finish("=", 0, body);
                ++con_twnext;
            }
        }
    }

    std::string out;
    out += "\\ BEOP mixed-integer program\n";
    out += "\\ nodes=" + std::to_string(n) + " vehicles=" + std::to_string(num_k) +
           " subtours_per_vehicle=" + std::to_string(num_s) + " time_windows=" + (tw ? "1" : "0") +
           "\n";
    out += "\\ vars x=" + std::to_string(x_count) + " y=" + std::to_string(y_count) +
           " u=" + std::to_string(u_count) + " s=" + std::to_string(s_count) + "\n";
    out += "\\ cons cap=" + std::to_string(con_cap) + " time=" + std::to_string(con_time) +
           " flow=" + std::to_string(con_flow) + " depart=" + std::to_string(con_depart) +
           " link=" + std::to_string(con_link) + " visit=" + std::to_string(con_visit) +
           " mtz=" + std::to_string(con_mtz) + " uord=" + std::to_string(con_uord) +
           " uzero=" + std::to_string(con_uzero) + " twub=" + std::to_string(con_twub) +
           " twchain=" + std::to_string(con_twchain) + " twfirst=" + std::to_string(con_twfirst) +
           " twnext=" + std::to_string(con_twnext) + "\n";
    out += "Maximize\n";
    {
        LpLine obj("obj");
        for (int k = 0; k < num_k; ++k) {
            for (int s = 0; s < num_s; ++s) {
                for (int i = 1; i <= n; ++i) obj.term(inst.prize[i], y_name(i, k, s));
            }
        }
        obj.finish_bare(out);
    }
    out += "Subject To\n";
    out += body;

    std::vector<std::string> binaries;
    binaries.reserve(static_cast<std::size_t>(x_count + y_count));
    for (int k = 0; k < num_k; ++k) {
        for (int s = 0; s < num_s; ++s) {
            for (int i = 0; i <= n; ++i) {
                for (int j = 0; j <= n; ++j) {
                    if (i != j) binaries.push_back(x_name(i, j, k, s));
                }
            }
            for (int j = 1; j <= n; ++j) binaries.push_back(y_name(j, k, s));
        }
    }
    std::sort(binaries.begin(), binaries.end());
    out += "Binary\n";
    for (const auto& name : binaries) out += " " + name + "\n";
    out += "End\n";
    return out;
}

std::string emit_warm_start_mst(const BeopInstance& inst, const Solution& sol,
                                int subtours_per_vehicle) {
    const int n = inst.n;
    const int num_s = subtours_per_vehicle;
    const bool tw = inst.has_time_windows();

    struct SubtourAssignment {
        std::vector<int> route;  // 0, nodes..., 0
        Ms start = 0;
    };
    // vehicle -> subtour slot -> assignment (empty slots stay unused)
    std::vector<std::vector<SubtourAssignment>> plan(
        static_cast<std::size_t>(inst.num_vehicles),
        std::vector<SubtourAssignment>(static_cast<std::size_t>(num_s)));
    std::vector<Ms> vehicle_total(static_cast<std::size_t>(inst.num_vehicles), 0);

    for (std::size_t k = 0; k < sol.tours.size(); ++k) {
        const auto segments = depot_segments(sol.tours[k]);
        if (static_cast<int>(segments.size()) > num_s) {
            throw TooManySubtours("vehicle " + std::to_string(k) + " uses " +
                                  std::to_string(segments.size()) + " subtours, cap is " +
                                  std::to_string(num_s));
        }
        Ms clock = 0;
        for (std::size_t s = 0; s < segments.size(); ++s) {
            auto& slot = plan[k][s];
            slot.start = clock;
            slot.route.push_back(0);
            for (int v : segments[s]) slot.route.push_back(v);
            slot.route.push_back(0);
            for (std::size_t p = 1; p < slot.route.size(); ++p) {
                clock += inst.t(slot.route[p - 1], slot.route[p]);
            }
        }
        // Unused slots start once all travel of the vehicle is done.
        for (std::size_t s = segments.size(); s < static_cast<std::size_t>(num_s); ++s) {
            plan[k][s].start = clock;
        }
        vehicle_total[k] = clock;
    }

    std::string out = "# MIP start derived from a feasible solution\n";
    const auto emit = [&out](const std::string& name, const std::string& value) {
        out += name + " " + value + "\n";
    };

    for (int k = 0; k < inst.num_vehicles; ++k) {
        for (int s = 0; s < num_s; ++s) {
            const auto& slot = plan[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
            std::vector<std::uint8_t> on_edge(static_cast<std::size_t>(n + 1) * (n + 1), 0);
            std::vector<int> order(static_cast<std::size_t>(n) + 1, 0);
            std::vector<Ms> arrival(static_cast<std::size_t>(n) + 1, 0);
            std::vector<std::uint8_t> in_route(static_cast<std::size_t>(n) + 1, 0);
            arrival[0] = slot.start;
            if (!slot.route.empty()) {
                Ms clock = slot.start;
                for (std::size_t p = 1; p < slot.route.size(); ++p) {
                    const int a = slot.route[p - 1];
                    const int b = slot.route[p];
                    on_edge[static_cast<std::size_t>(a) * (n + 1) + b] = 1;
                    clock += inst.t(a, b);
                    if (b != 0) {
                        order[b] = static_cast<int>(p);
                        arrival[b] = clock;
                        in_route[b] = 1;
                    }
                }
            }
            for (int i = 0; i <= n; ++i) {
                for (int j = 0; j <= n; ++j) {
                    if (i == j) continue;
                    emit("x_" + std::to_string(i) + "_" + std::to_string(j) + "_" + sub_name(k, s),
                         on_edge[static_cast<std::size_t>(i) * (n + 1) + j] ? "1" : "0");
                }
            }
            for (int j = 1; j <= n; ++j) {
                emit("y_" + std::to_string(j) + "_" + sub_name(k, s), in_route[j] ? "1" : "0");
            }
            for (int i = 0; i <= n; ++i) {
                emit("u_" + std::to_string(i) + "_" + sub_name(k, s), std::to_string(order[i]));
            }
            if (tw) {
                for (int i = 0; i <= n; ++i) {
                    emit("s_" + std::to_string(i) + "_" + sub_name(k, s),
                         std::to_string(in_route[i] || i == 0 ? arrival[i] : 0));
                }
            }
        }
    }
    return out;
}

}  // namespace beop
