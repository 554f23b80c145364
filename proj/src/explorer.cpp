#include "ehnode/explorer.hpp"

#include <cmath>
#include <limits>

namespace ehnode {

namespace {

double periodic_energy(const NodeConfig& config) {
    double e = config.load.e_controller_step;
    switch (config.mode) {
        case ApplicationMode::PeriodicSensing: e += config.load.e_sense_tx; break;
        case ApplicationMode::Advertising: e += config.load.e_advertise; break;
        case ApplicationMode::EventDetection: break;
    }
    return e;
}

double boost_harvest(const NodeConfig& config, double lux) {
    return config.converter.eta_boost * harvest_power(config.harvester, lux);
}

}  // namespace

double steady_state_power(const NodeConfig& config, QosState state) {
    const double interval = interval_for(config.table, state, config.mode);
    return standby_power(config.load, config.converter) +
           periodic_energy(config) / interval / config.converter.eta_buck +
           config.supercap.leak_current * config.v_max;
}

double min_lux_for_perpetual(const NodeConfig& config, QosState state) {
    const double demand = steady_state_power(config, state);
    auto enough = [&](double lux) { return boost_harvest(config, lux) >= demand; };
    if (enough(0.0)) return 0.0;

    double lo = 0.0;
    double hi = 10.0 * config.harvester.lux_ref;
    for (int i = 0; !enough(hi); ++i) {
        if (i > 200) return std::numeric_limits<double>::infinity();
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > kLuxResolution) {
        const double mid = 0.5 * (lo + hi);
        (enough(mid) ? hi : lo) = mid;
    }
    return hi;
}

double darkness_survival(const NodeConfig& config, QosState state) {
    const double c = config.supercap.capacitance;
    const double usable = 0.5 * c * (config.v_max * config.v_max - config.supercap.v_cutoff * config.supercap.v_cutoff);
    return usable / steady_state_power(config, state);
}

void ExploreGrid::validate() const {
    if (capacitances.empty()) throw ContractViolation("grid.capacitances_f must not be empty");
    if (qos_states.empty()) throw ContractViolation("grid.qos_states must not be empty");
    for (double c : capacitances) {
        if (!(c > 0.0)) throw ContractViolation("grid.capacitances_f entries must be > 0");
    }
    for (double l : luxes) {
        if (!(l >= 0.0)) throw ContractViolation("grid.lux entries must be >= 0");
    }
    for (int s : qos_states) {
        if (s < kMinQos || s > kMaxQos) throw ContractViolation("grid.qos_states entries must be in 1..7");
    }
    base.validate();
}

SweepResult sweep(const ExploreGrid& grid) {
    grid.validate();
    SweepResult out;
    for (double c : grid.capacitances) {
        NodeConfig cfg = grid.base;
        cfg.mode = grid.mode;
        cfg.supercap.capacitance = c;
        for (int s : grid.qos_states) {
            const QosState state(s);
            out.frontier.push_back({c, s, grid.mode, min_lux_for_perpetual(cfg, state), darkness_survival(cfg, state)});
            const double demand = steady_state_power(cfg, state);
            for (double lux : grid.luxes) {
                LuxRow row{c, lux, s, grid.mode, boost_harvest(cfg, lux) - demand, false, 0.0};
                row.sustainable = row.net_power_w >= 0.0;
                const double usable =
                    0.5 * c * (cfg.v_max * cfg.v_max - cfg.supercap.v_cutoff * cfg.supercap.v_cutoff);
                row.time_to_cutoff_s =
                    row.sustainable ? std::numeric_limits<double>::infinity() : usable / -row.net_power_w;
                out.by_lux.push_back(row);
            }
        }
    }
    return out;
}

}  // namespace ehnode
