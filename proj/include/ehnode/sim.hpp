#pragma once

#include "ehnode/energy.hpp"
#include "ehnode/qos.hpp"
#include "ehnode/trace.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ehnode {

inline constexpr double kMaxIntegrationStep = 1.0;  // s
inline constexpr double kCrossingResolution = 1e-6;  // s

struct Position {
    double x = 0.0;  // m
    double y = 0.0;  // m
};

double distance(const Position& a, const Position& b);

struct NodeConfig {
    std::string node_id = "node";
    ApplicationMode mode = ApplicationMode::PeriodicSensing;
    SupercapState supercap{1.0, 2.4, 5.5, 2.1, 0.0};  // boots at v_on
    HarvesterModel harvester;
    ConverterModel converter;
    LoadModel load;
    QosTable table = QosTable::standard();
    double v_on = 2.4;   // restart threshold after a brown-out
    double v_max = 3.6;  // controller ceiling
    // Bypasses the controller and holds this state (used for sustainability checks).
    std::optional<int> pinned_qos;
    Position position;

    // Throws ContractViolation naming the offending field.
    void validate() const;
};

struct SensorReadings {
    double lux = 0.0;
    double temperature_c = 0.0;
    double humidity_pct = 0.0;
};

// What a node reports to the base station.
struct Packet {
    std::string node_id;
    double timestamp = 0.0;
    SensorReadings readings;
    int qos_state = 1;
    double voltage = 0.0;
};

enum class Action {
    Sense,
    Advertise,
    ControllerStep,
    EventNotify,
    EventSuppressed,
    DeferredNotify,
    Death,
    Recovery,
    LightChange,
};

std::string to_string(Action action);

struct LogRecord {
    double time = 0.0;
    double voltage = 0.0;
    double lux = 0.0;
    int qos = 0;  // 0 while dead
    Action action = Action::ControllerStep;
    int packets = 0;
    double energy_j = 0.0;  // storage-side energy drawn by the action
};

// Running energy totals, all storage-side except `harvested` (panel output).
struct EnergyLedger {
    double initial_stored = 0.0;
    double final_stored = 0.0;
    double harvested = 0.0;
    double input_loss = 0.0;   // boost / cold-start conversion loss
    double spilled = 0.0;      // discarded at the v_rated clamp
    double consumed = 0.0;     // drawn by standby and actions
    double output_loss = 0.0;  // part of `consumed` lost in the buck stage
    double leaked = 0.0;

    double stored_delta() const { return final_stored - initial_stored; }
    // Zero when the books balance.
    double residual() const;
    double throughput() const;
    double relative_residual() const;
};

enum class EventKind : std::uint8_t { Death = 0, Recovery = 1, ExternalEvent = 2, Wakeup = 3, TraceSample = 4 };

struct SimEvent {
    double time = 0.0;
    EventKind kind = EventKind::Wakeup;
    std::string node_id;
    double payload = 0.0;
    std::uint64_t epoch = 0;  // wakeups from an older epoch are stale
    std::uint64_t seq = 0;
};

// Strict processing order: time, then kind priority, then node_id, then seq.
bool event_before(const SimEvent& a, const SimEvent& b);

// Synthesized sensor payloads; deterministic per seed.
class PayloadSynth {
public:
    explicit PayloadSynth(std::uint64_t seed) : state_(seed) {}
    SensorReadings read(double lux);

private:
    std::uint64_t next();
    std::uint64_t state_;
};

struct NodeState {
    SupercapState cap;
    bool alive = true;
    ControllerState ctrl;
    int qos = kMinQos;
    std::uint64_t epoch = 0;
    double dead_since = 0.0;
    double dead_seconds = 0.0;
    std::optional<double> last_notification;
    std::optional<double> pending_since;
    EnergyLedger ledger;
};

NodeState initial_state(const NodeConfig& config);

struct Crossing {
    EventKind kind;  // Death or Recovery
    double time;
};

struct IntervalResult {
    NodeState state;
    double reached = 0.0;  // t1, or the crossing time
    std::optional<Crossing> crossing;
};

// Continuous evolution between discrete events: harvest with sample-and-hold
// lux, standby draw while alive, leak always. Stops early at a death or
// recovery threshold crossing.
IntervalResult integrate_interval(const NodeConfig& config, NodeState node, double t0, double t1, const Trace& light);

struct WakeupOutcome {
    NodeState state;
    std::optional<Packet> packet;
    SimEvent next;  // the next Wakeup, or a Death at the current time
    LogRecord record;
    std::optional<double> latency;  // set when a deferred event notification went out
};

WakeupOutcome handle_wakeup(const NodeConfig& config, NodeState node, double time, double lux, PayloadSynth& synth);

struct ExternalOutcome {
    NodeState state;
    std::optional<Packet> packet;
    std::optional<SimEvent> death;
    std::optional<LogRecord> record;
    std::optional<double> latency;
};

ExternalOutcome handle_external_event(const NodeConfig& config, NodeState node, double time, double payload,
                                      double lux, PayloadSynth& synth);

struct LifecycleOutcome {
    NodeState state;
    std::optional<SimEvent> follow_up;
    LogRecord record;
};

// Death cancels outstanding wakeups; recovery resets the controller and
// schedules an immediate wakeup.
LifecycleOutcome handle_death_and_recovery(const NodeConfig& config, NodeState node, const SimEvent& event,
                                           double lux);

struct NodeLog {
    std::string node_id;
    ApplicationMode mode = ApplicationMode::PeriodicSensing;
    double duration = 0.0;
    std::uint64_t seed = 0;
    std::vector<LogRecord> records;
    std::vector<Packet> packets;
    EnergyLedger ledger;
    double dead_seconds = 0.0;
    int deaths = 0;
    int recoveries = 0;
    std::array<std::uint64_t, kMaxQos> qos_histogram{};
    std::uint64_t controller_steps = 0;
    std::vector<double> notification_latencies;
    double final_voltage = 0.0;
    bool alive_at_end = false;
    std::optional<double> first_death;
};

// Events at or after `duration` are not processed.
NodeLog run_node(const NodeConfig& config, const Trace& light, const Trace& events, double duration,
                 std::uint64_t seed);

}  // namespace ehnode
