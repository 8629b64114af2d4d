#include "beop/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "beop/errors.hpp"

namespace beop {

bool BeopInstance::has_time_windows() const {
    for (int v = 1; v <= n; ++v) {
        if (deadline[v] < max_time) return true;
    }
    return false;
}

int BeopInstance::total_prize() const {
    return std::accumulate(prize.begin(), prize.end(), 0);
}

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::TimeBudget: return "TimeBudget";
        case ViolationKind::Capacity: return "Capacity";
        case ViolationKind::Deadline: return "Deadline";
        case ViolationKind::DuplicateVisit: return "DuplicateVisit";
        case ViolationKind::MalformedTour: return "MalformedTour";
        case ViolationKind::UnservableDemand: return "UnservableDemand";
    }
    return "Unknown";
}

void FeasibilityReport::add(ViolationKind kind, int vehicle, int node, std::string detail) {
    feasible = false;
    violations.push_back(Violation{kind, vehicle, node, std::move(detail)});
}

FeasibilityReport validate_instance(const BeopInstance& inst) {
    FeasibilityReport report;
    const int n = inst.n;
    if (n < 1) {
        report.add(ViolationKind::MalformedTour, -1, -1, "instance needs at least one evacuation node");
        return report;
    }
    const std::size_t nn = static_cast<std::size_t>(n + 1);
    if (inst.travel.size() != nn * nn || inst.demand.size() != nn || inst.prize.size() != nn ||
        inst.deadline.size() != nn) {
        report.add(ViolationKind::MalformedTour, -1, -1, "array sizes do not match n");
        return report;
    }
    if (!inst.coords.empty() && inst.coords.size() != nn) {
        report.add(ViolationKind::MalformedTour, -1, -1, "coords size does not match n");
    }
    if (inst.num_vehicles < 1) {
        report.add(ViolationKind::MalformedTour, -1, -1, "num_vehicles must be >= 1");
    }
    if (inst.capacity < 1) {
        report.add(ViolationKind::Capacity, -1, -1, "capacity must be >= 1");
    }
    if (inst.max_time <= 0) {
        report.add(ViolationKind::TimeBudget, -1, -1, "max_time must be positive");
    }
    for (int i = 0; i <= n; ++i) {
        if (inst.t(i, i) != 0) {
            report.add(ViolationKind::MalformedTour, -1, i, "nonzero diagonal travel time");
        }
        for (int j = 0; j <= n; ++j) {
            if (inst.t(i, j) < 0) {
                report.add(ViolationKind::MalformedTour, -1, i, "negative travel time");
            }
        }
    }
    if (inst.demand[0] != 0 || inst.prize[0] != 0) {
        report.add(ViolationKind::MalformedTour, -1, 0, "depot demand/prize must be 0");
    }
    if (inst.deadline[0] != inst.max_time) {
        report.add(ViolationKind::Deadline, -1, 0, "depot deadline must equal max_time");
    }
    for (int v = 1; v <= n; ++v) {
        if (inst.demand[v] < 0 || inst.prize[v] < 0) {
            report.add(ViolationKind::MalformedTour, -1, v, "negative demand or prize");
        }
        if (inst.demand[v] > inst.capacity) {
            report.add(ViolationKind::UnservableDemand, -1, v, "demand exceeds vehicle capacity");
        }
        if (inst.deadline[v] <= 0 || inst.deadline[v] > inst.max_time) {
            report.add(ViolationKind::Deadline, -1, v, "deadline outside (0, max_time]");
        }
    }
    return report;
}

FeasibilityReport check_feasible(const BeopInstance& inst, const Solution& sol) {
    FeasibilityReport report;
    const int n = inst.n;
    if (static_cast<int>(sol.tours.size()) > inst.num_vehicles) {
        report.add(ViolationKind::MalformedTour, -1, -1, "more tours than vehicles");
    }
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t k = 0; k < sol.tours.size(); ++k) {
        const int vehicle = static_cast<int>(k);
        const auto& nodes = sol.tours[k].nodes;
        if (nodes.empty() || nodes.front() != 0 || nodes.back() != 0) {
            report.add(ViolationKind::MalformedTour, vehicle, -1, "tour must start and end at the depot");
            continue;
        }
        bool bad_ids = false;
        for (int v : nodes) {
            if (v < 0 || v > n) {
                report.add(ViolationKind::MalformedTour, vehicle, v, "node id out of range");
                bad_ids = true;
            }
        }
        if (bad_ids) continue;

        Ms elapsed = 0;
        int load = 0;
        for (std::size_t p = 1; p < nodes.size(); ++p) {
            const int prev = nodes[p - 1];
            const int v = nodes[p];
            elapsed += inst.t(prev, v);
            if (v == 0) {
                load = 0;  // drop-off resets the vehicle
                continue;
            }
            if (seen[v]) {
                report.add(ViolationKind::DuplicateVisit, vehicle, v, "node visited more than once");
            }
            seen[v] = 1;
            load += inst.demand[v];
            if (load > inst.capacity) {
                report.add(ViolationKind::Capacity, vehicle, v, "subtour load exceeds capacity");
            }
            if (elapsed > inst.deadline[v]) {
                report.add(ViolationKind::Deadline, vehicle, v, "arrival after deadline");
            }
        }
        if (elapsed > inst.max_time) {
            report.add(ViolationKind::TimeBudget, vehicle, -1, "tour exceeds the evacuation time");
        }
    }
    return report;
}

std::pair<int, double> solution_prize(const BeopInstance& inst, const Solution& sol) {
    const FeasibilityReport report = check_feasible(inst, sol);
    if (!report.feasible) {
        std::string what = "infeasible solution:";
        for (const auto& v : report.violations) {
            what += ' ';
            what += to_string(v.kind);
        }
        throw InvalidInput(what);
    }
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(inst.n) + 1, 0);
    int collected = 0;
    for (const auto& tour : sol.tours) {
        for (int v : tour.nodes) {
            if (v != 0 && !seen[v]) {
                seen[v] = 1;
                collected += inst.prize[v];
            }
        }
    }
    const int total = inst.total_prize();
    const double quota = total > 0 ? static_cast<double>(collected) / total : 0.0;
    return {collected, quota};
}

Tour strip_redundant_depot_visits(const BeopInstance& inst, const Tour& tour) {
    if (!inst.metric) {
        throw InvalidInput("strip_redundant_depot_visits requires the triangle inequality");
    }
    Tour out;
    out.vehicle = tour.vehicle;
    const auto& nodes = tour.nodes;
    if (nodes.size() <= 2) {
        out.nodes = nodes;
        return out;
    }
    out.nodes.push_back(nodes.front());
    for (std::size_t p = 1; p + 1 < nodes.size(); ++p) {
        if (nodes[p] != 0) out.nodes.push_back(nodes[p]);
    }
    out.nodes.push_back(nodes.back());
    return out;
}

std::vector<std::vector<int>> depot_segments(const Tour& tour) {
    std::vector<std::vector<int>> segments;
    std::vector<int> current;
    for (int v : tour.nodes) {
        if (v == 0) {
            if (!current.empty()) segments.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(v);
        }
    }
    if (!current.empty()) segments.push_back(std::move(current));
    return segments;
}

BeopInstance op_to_beop(const OpInstance& op) {
    BeopInstance inst;
    inst.n = op.n;
    inst.travel = op.travel;
    inst.prize = op.prize;
    inst.demand.assign(static_cast<std::size_t>(op.n) + 1, 1);
    inst.demand[0] = 0;
    inst.deadline.assign(static_cast<std::size_t>(op.n) + 1, op.max_time);
    inst.num_vehicles = 1;
    inst.capacity = op.n;
    inst.max_time = op.max_time;
    inst.metric = op.metric;
    return inst;
}

BeopInstance scale_travel_times(const BeopInstance& inst, double factor) {
    BeopInstance out = inst;
    for (auto& t : out.travel) {
        t = static_cast<Ms>(std::llround(static_cast<double>(t) * factor));
    }
    return out;
}

BeopInstance override_parameters(const BeopInstance& inst, const ParamOverride& ov) {
    BeopInstance out = inst;
    if (ov.num_vehicles) out.num_vehicles = *ov.num_vehicles;
    if (ov.capacity) out.capacity = *ov.capacity;
    if (ov.max_time && *ov.max_time != inst.max_time) {
        const Ms new_t = *ov.max_time;
        const double ratio = static_cast<double>(new_t) / static_cast<double>(inst.max_time);
        for (int v = 0; v <= out.n; ++v) {
            if (inst.deadline[v] >= inst.max_time) {
                out.deadline[v] = new_t;
            } else {
                const Ms scaled = static_cast<Ms>(std::llround(static_cast<double>(inst.deadline[v]) * ratio));
                out.deadline[v] = std::clamp<Ms>(scaled, 1, new_t);
            }
        }
        out.max_time = new_t;
    }
    return out;
}

BeopInstance redraw_time_windows(const BeopInstance& inst, double tw_fraction, Rng& rng) {
    BeopInstance out = inst;
    out.deadline.assign(static_cast<std::size_t>(inst.n) + 1, inst.max_time);
    const double share = rng.uniform01() * tw_fraction;
    const int count = static_cast<int>(share * inst.n);
    std::vector<int> ids(static_cast<std::size_t>(inst.n));
    std::iota(ids.begin(), ids.end(), 1);
    for (int i = 0; i < count; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(i, inst.n - 1));
        std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
        const Ms lo = static_cast<Ms>(std::llround(0.3 * static_cast<double>(inst.max_time)));
        const Ms hi = static_cast<Ms>(std::llround(0.8 * static_cast<double>(inst.max_time)));
        out.deadline[ids[static_cast<std::size_t>(i)]] = rng.uniform_int(lo, hi);
    }
    return out;
}

}  // namespace beop
