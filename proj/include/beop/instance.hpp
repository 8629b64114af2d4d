#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beop/rng.hpp"

namespace beop {

/// Travel times, deadlines and the evacuation budget are integer milliseconds
/// so feasibility comparisons are exact and platform independent.
using Ms = std::int64_t;

constexpr Ms kMsPerSecond = 1000;
constexpr Ms kMsPerHour = 3600 * kMsPerSecond;

/// One evacuation scenario: a depot (node 0), n evacuation nodes, an
/// asymmetric travel-time matrix and a homogeneous bus fleet.
struct BeopInstance {
    int n = 0;                        // evacuation nodes; ids 1..n, depot is 0
    std::vector<Ms> travel;           // (n+1)^2 row-major
    std::vector<int> demand;          // persons, demand[0] = 0
    std::vector<int> prize;           // persons, prize[0] = 0
    std::vector<Ms> deadline;         // latest arrival; deadline = max_time when unconstrained
    int num_vehicles = 1;             // K
    int capacity = 1;                 // C, persons per vehicle
    Ms max_time = 0;                  // T
    bool metric = false;              // triangle inequality holds for `travel`
    std::vector<std::array<double, 2>> coords;  // optional lon/lat per node

    int size() const { return n + 1; }
    Ms t(int i, int j) const { return travel[static_cast<std::size_t>(i) * (n + 1) + j]; }
    Ms& t(int i, int j) { return travel[static_cast<std::size_t>(i) * (n + 1) + j]; }

    /// True when at least one node carries a deadline tighter than max_time.
    bool has_time_windows() const;
    int total_prize() const;
};

struct Tour {
    int vehicle = 0;
    std::vector<int> nodes;  // starts and ends at the depot
};

struct Solution {
    std::vector<Tour> tours;  // one per vehicle
    int collected_prize = 0;
    double quota = 0.0;
};

enum class ViolationKind {
    TimeBudget,
    Capacity,
    Deadline,
    DuplicateVisit,
    MalformedTour,
    UnservableDemand,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    int vehicle = -1;  // -1 when not tied to a vehicle
    int node = -1;     // -1 when not tied to a node
    std::string detail;
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<Violation> violations;

    void add(ViolationKind kind, int vehicle, int node, std::string detail);
};

/// Checks every structural invariant of the instance itself.
FeasibilityReport validate_instance(const BeopInstance& inst);

/// Checks a solution against the instance: per-vehicle time budget over the
/// whole sequence, per-subtour capacity, per-node deadlines and global
/// single-visit; depot drop-offs reset the load.
FeasibilityReport check_feasible(const BeopInstance& inst, const Solution& sol);

/// Collected prize over distinct visited nodes and its fraction of the total
/// prize. Throws InvalidInput on infeasible solutions.
std::pair<int, double> solution_prize(const BeopInstance& inst, const Solution& sol);

/// Removes interior depot visits (i, 0, j) -> (i, j). Only valid on instances
/// whose travel matrix satisfies the triangle inequality, where skipping the
/// depot can never lengthen the tour. Throws InvalidInput otherwise.
Tour strip_redundant_depot_visits(const BeopInstance& inst, const Tour& tour);

/// Plain orienteering instance: single uncapacitated tour under a time budget.
struct OpInstance {
    int n = 0;
    std::vector<Ms> travel;  // (n+1)^2 row-major, node 0 is the start/end
    std::vector<int> prize;  // prize[0] = 0
    Ms max_time = 0;
    bool metric = true;
};

/// OP -> BEOP reduction: one vehicle, capacity n, unit demands, no windows.
BeopInstance op_to_beop(const OpInstance& op);

/// Depot-to-depot segments of a tour, depot entries removed; empty segments
/// (consecutive depot visits) are dropped.
std::vector<std::vector<int>> depot_segments(const Tour& tour);

/// Copy with all travel times scaled by `factor` (rounded to ms).
BeopInstance scale_travel_times(const BeopInstance& inst, double factor);

struct ParamOverride {
    std::optional<int> num_vehicles;
    std::optional<int> capacity;
    std::optional<Ms> max_time;
};

/// Copy with fleet parameters replaced. Overriding max_time rescales window
/// deadlines proportionally so that windowed nodes keep the same fraction of
/// the budget and unwindowed nodes stay at the new T.
BeopInstance override_parameters(const BeopInstance& inst, const ParamOverride& ov);

/// Copy with time windows redrawn: floor(u * tw_fraction * n) nodes receive a
/// deadline uniform in [0.3 T, 0.8 T], the rest revert to T.
BeopInstance redraw_time_windows(const BeopInstance& inst, double tw_fraction, Rng& rng);

}  // namespace beop
