#pragma once

#include "ehnode/sim.hpp"

#include <vector>

namespace ehnode {

inline constexpr double kLuxResolution = 0.1;

// Long-run storage-side power of a node held at `state`: standby, the mode's
// periodic action and controller energy spread over the state's interval, and
// leak at v_max. Event-driven detections are not included.
double steady_state_power(const NodeConfig& config, QosState state);

// Smallest constant lux (to kLuxResolution, rounded up) whose boost-path
// harvest covers steady_state_power. Bisection over [0, 10 * lux_ref], the
// upper end doubling until it brackets the answer.
double min_lux_for_perpetual(const NodeConfig& config, QosState state);

// Time to fall from v_max to v_cutoff in darkness at steady_state_power.
double darkness_survival(const NodeConfig& config, QosState state);

struct ExploreGrid {
    NodeConfig base;  // everything but capacitance and mode comes from here
    ApplicationMode mode = ApplicationMode::PeriodicSensing;
    std::vector<double> capacitances;  // F
    std::vector<double> luxes;
    std::vector<int> qos_states;

    void validate() const;
};

struct FrontierRow {
    double capacitance = 0.0;
    int qos_state = 1;
    ApplicationMode mode = ApplicationMode::PeriodicSensing;
    double min_lux = 0.0;
    double darkness_survival_s = 0.0;
};

// Per-lux detail for each (capacitance, lux, state) point.
struct LuxRow {
    double capacitance = 0.0;
    double lux = 0.0;
    int qos_state = 1;
    ApplicationMode mode = ApplicationMode::PeriodicSensing;
    double net_power_w = 0.0;  // boost-path harvest minus steady-state draw
    bool sustainable = false;
    double time_to_cutoff_s = 0.0;  // from v_max; +inf when sustainable
};

struct SweepResult {
    std::vector<FrontierRow> frontier;  // capacitance-major, then state
    std::vector<LuxRow> by_lux;         // empty when the grid has no lux values
};

SweepResult sweep(const ExploreGrid& grid);

}  // namespace ehnode
