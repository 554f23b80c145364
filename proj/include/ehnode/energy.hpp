#pragma once

#include <stdexcept>
#include <string>
#include <variant>

namespace ehnode {

// Thrown when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Supercapacitor storage. Stored energy is always 1/2 * C * V^2.
struct SupercapState {
    double capacitance = 1.0;   // F
    double voltage = 0.0;       // V
    double v_rated = 5.5;       // V, absolute maximum
    double v_cutoff = 2.1;      // V, node dies below this
    double leak_current = 0.0;  // A, self-discharge drawn straight from storage

    // Throws ContractViolation naming the offending field.
    void validate() const;
};

enum class HarvestScaling { Linear };

// Indoor solar panel characterised by one operating point.
struct HarvesterModel {
    double i_ref = 46.5e-6;  // A
    double v_ref = 1.5;      // V
    double lux_ref = 300.0;  // lux
    HarvestScaling scaling = HarvestScaling::Linear;

    void validate() const;
};

// Energy management board: boost charger on the input side, buck regulator on
// the load side. Below v_boost_min the input path runs in the cold-start
// regime at eta_cold.
struct ConverterModel {
    double v_boost_min = 1.8;
    double eta_boost = 0.80;
    double eta_cold = 0.05;
    double eta_buck = 0.90;
    double i_out_max = 0.110;  // A
    double v_out = 3.0;        // V

    void validate() const;
};

// Load-side energy figures (measured at the regulated rail).
struct LoadModel {
    double i_standby = 1e-6;          // A at v_out
    double e_sense_tx = 50e-6;        // J per periodic sense + transmit
    double e_event_detect = 30e-6;    // J per detected event (incl. immediate notification)
    double e_advertise = 20e-6;       // J per BLE advertisement
    double e_controller_step = 0.0;   // J per controller evaluation

    void validate() const;
};

struct Dead {
    SupercapState state;  // voltage pinned to v_cutoff
    double drawn = 0.0;   // storage-side energy actually removed before brown-out
};

double stored_energy(const SupercapState& cap);

// Panel output power before converter losses. lux must be >= 0.
double harvest_power(const HarvesterModel& model, double lux);

double input_efficiency(const ConverterModel& conv, double v_storage);

// Integrates a constant panel power over dt. Efficiency is evaluated at the
// starting voltage; the result is clamped to v_rated.
SupercapState charge(const SupercapState& cap, double p_panel, double dt, const ConverterModel& conv);

// Pays e_load joules at the rail, i.e. e_load / eta_buck from storage.
std::variant<SupercapState, Dead> discharge(const SupercapState& cap, double e_load, const ConverterModel& conv);

// Storage-side standby power.
double standby_power(const LoadModel& load, const ConverterModel& conv);

}  // namespace ehnode
