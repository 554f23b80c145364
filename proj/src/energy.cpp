#include "ehnode/energy.hpp"

#include <algorithm>
#include <cmath>

namespace ehnode {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

bool is_fraction(double x) { return x > 0.0 && x <= 1.0; }

}  // namespace

void SupercapState::validate() const {
    require(std::isfinite(capacitance) && capacitance > 0.0, "supercap.capacitance_f must be > 0");
    require(std::isfinite(v_rated) && v_rated > 0.0, "supercap.v_rated_v must be > 0");
    require(v_cutoff >= 0.0 && v_cutoff < v_rated, "supercap.v_cutoff_v must be in [0, v_rated_v)");
    require(std::isfinite(voltage) && voltage >= 0.0 && voltage <= v_rated,
            "supercap.initial_voltage_v must be in [0, v_rated_v]");
    require(std::isfinite(leak_current) && leak_current >= 0.0, "supercap.leak_current_a must be >= 0");
}

void HarvesterModel::validate() const {
    require(std::isfinite(i_ref) && i_ref >= 0.0, "harvester.i_ref_a must be >= 0");
    require(std::isfinite(v_ref) && v_ref >= 0.0, "harvester.v_ref_v must be >= 0");
    require(std::isfinite(lux_ref) && lux_ref > 0.0, "harvester.lux_ref must be > 0");
}

void ConverterModel::validate() const {
    require(v_boost_min >= 0.0, "converter.v_boost_min_v must be >= 0");
    require(is_fraction(eta_boost), "converter.eta_boost must be in (0, 1]");
    require(is_fraction(eta_cold), "converter.eta_cold must be in (0, 1]");
    require(is_fraction(eta_buck), "converter.eta_buck must be in (0, 1]");
    require(eta_cold < eta_boost, "converter.eta_cold must be < converter.eta_boost");
    require(i_out_max > 0.0, "converter.i_out_max_a must be > 0");
    require(v_out > 0.0, "converter.v_out_v must be > 0");
}

void LoadModel::validate() const {
    require(i_standby >= 0.0, "load.i_standby_a must be >= 0");
    require(e_sense_tx >= 0.0, "load.e_sense_tx_j must be >= 0");
    require(e_event_detect >= 0.0, "load.e_event_detect_j must be >= 0");
    require(e_advertise >= 0.0, "load.e_advertise_j must be >= 0");
    require(e_controller_step >= 0.0, "load.e_controller_step_j must be >= 0");
}

double stored_energy(const SupercapState& cap) {
    return 0.5 * cap.capacitance * cap.voltage * cap.voltage;
}

double harvest_power(const HarvesterModel& model, double lux) {
    if (!(lux >= 0.0)) throw ContractViolation("harvest_power: lux must be >= 0");
    switch (model.scaling) {
        case HarvestScaling::Linear:
            return model.i_ref * model.v_ref * (lux / model.lux_ref);
    }
    return 0.0;
}

double input_efficiency(const ConverterModel& conv, double v_storage) {
    return v_storage >= conv.v_boost_min ? conv.eta_boost : conv.eta_cold;
}

SupercapState charge(const SupercapState& cap, double p_panel, double dt, const ConverterModel& conv) {
    if (!(dt > 0.0)) throw ContractViolation("charge: dt must be > 0");
    if (!(p_panel >= 0.0)) throw ContractViolation("charge: p_panel must be >= 0");
    SupercapState out = cap;
    const double e_in = input_efficiency(conv, cap.voltage) * p_panel * dt;
    const double v2 = cap.voltage * cap.voltage + 2.0 * e_in / cap.capacitance;
    out.voltage = std::min(std::sqrt(v2), cap.v_rated);
    return out;
}

std::variant<SupercapState, Dead> discharge(const SupercapState& cap, double e_load, const ConverterModel& conv) {
    if (!(e_load >= 0.0)) throw ContractViolation("discharge: e_load must be >= 0");
    const double e_storage = e_load / conv.eta_buck;
    const double v2 = cap.voltage * cap.voltage - 2.0 * e_storage / cap.capacitance;
    const double cut2 = cap.v_cutoff * cap.v_cutoff;
    if (v2 < cut2) {
        Dead dead{cap, 0.0};
        dead.state.voltage = cap.v_cutoff;
        dead.drawn = std::max(0.0, 0.5 * cap.capacitance * (cap.voltage * cap.voltage - cut2));
        if (cap.voltage < cap.v_cutoff) dead.state.voltage = cap.voltage;
        return dead;
    }
    SupercapState out = cap;
    out.voltage = std::sqrt(v2);
    return out;
}

double standby_power(const LoadModel& load, const ConverterModel& conv) {
    return load.i_standby * conv.v_out / conv.eta_buck;
}

}  // namespace ehnode
