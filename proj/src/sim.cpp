#include "ehnode/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace ehnode {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

double sq(double x) { return x * x; }

// Storage-side energy and voltage after removing `e_storage` joules while
// alive. Mirrors discharge() but in storage-side units.
struct Payment {
    SupercapState cap;
    double drawn = 0.0;
    bool dead = false;
};

Payment pay(const SupercapState& cap, double e_load, const ConverterModel& conv) {
    Payment p;
    auto r = discharge(cap, e_load, conv);
    if (auto* ok = std::get_if<SupercapState>(&r)) {
        p.cap = *ok;
        p.drawn = e_load / conv.eta_buck;
    } else {
        auto& d = std::get<Dead>(r);
        p.cap = d.state;
        p.drawn = d.drawn;
        p.dead = true;
    }
    return p;
}

void book(EnergyLedger& ledger, double drawn, const ConverterModel& conv) {
    ledger.consumed += drawn;
    ledger.output_loss += drawn * (1.0 - conv.eta_buck);
}

double action_energy(const NodeConfig& config) {
    switch (config.mode) {
        case ApplicationMode::PeriodicSensing: return config.load.e_sense_tx;
        case ApplicationMode::Advertising: return config.load.e_advertise;
        case ApplicationMode::EventDetection: return 0.0;
    }
    return 0.0;
}

Packet make_packet(const NodeConfig& config, double time, int qos, double voltage, double lux, PayloadSynth& synth) {
    Packet p;
    p.node_id = config.node_id;
    p.timestamp = time;
    p.readings = synth.read(lux);
    p.qos_state = qos;
    p.voltage = voltage;
    return p;
}

}  // namespace

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void NodeConfig::validate() const {
    require(!node_id.empty(), "node_id must not be empty");
    supercap.validate();
    harvester.validate();
    converter.validate();
    load.validate();
    require(load.i_standby <= converter.i_out_max, "load.i_standby_a exceeds converter.i_out_max_a");
    require(supercap.v_cutoff < v_on, "v_on_v must be > supercap.v_cutoff_v");
    require(v_on <= v_max, "v_on_v must be <= v_max_v");
    require(v_max <= supercap.v_rated, "v_max_v must be <= supercap.v_rated_v");
    require(std::abs(table.v_low() - supercap.v_cutoff) < 1e-9,
            "qos_table lowest bucket must start at supercap.v_cutoff_v");
    require(std::abs(table.v_high() - v_max) < 1e-9, "qos_table highest bucket must end at v_max_v");
    if (pinned_qos) {
        require(*pinned_qos >= kMinQos && *pinned_qos <= kMaxQos, "pinned_qos must be in 1..7");
    }
}

std::string to_string(Action action) {
    switch (action) {
        case Action::Sense: return "sense";
        case Action::Advertise: return "advertise";
        case Action::ControllerStep: return "step";
        case Action::EventNotify: return "event_notify";
        case Action::EventSuppressed: return "event_suppressed";
        case Action::DeferredNotify: return "deferred_notify";
        case Action::Death: return "death";
        case Action::Recovery: return "recovery";
        case Action::LightChange: return "light";
    }
    return "unknown";
}

double EnergyLedger::residual() const {
    return stored_delta() - (harvested - input_loss - spilled - consumed - leaked);
}

double EnergyLedger::throughput() const { return harvested + consumed + leaked + spilled; }

double EnergyLedger::relative_residual() const {
    const double scale = std::max({throughput(), initial_stored, final_stored, 1e-30});
    return std::abs(residual()) / scale;
}

bool event_before(const SimEvent& a, const SimEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.node_id != b.node_id) return a.node_id < b.node_id;
    return a.seq < b.seq;
}

std::uint64_t PayloadSynth::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SensorReadings PayloadSynth::read(double lux) {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return {lux, 22.0, 40.0 + 10.0 * u};
}

NodeState initial_state(const NodeConfig& config) {
    NodeState s;
    s.cap = config.supercap;
    s.alive = s.cap.voltage >= s.cap.v_cutoff;
    s.ctrl.v_max = config.v_max;
    if (config.pinned_qos) s.qos = *config.pinned_qos;
    s.ledger.initial_stored = stored_energy(s.cap);
    s.ledger.final_stored = s.ledger.initial_stored;
    return s;
}

IntervalResult integrate_interval(const NodeConfig& config, NodeState node, double t0, double t1, const Trace& light) {
    require(t0 < t1, "integrate_interval: t0 must be < t1");
    const double c = node.cap.capacitance;
    const double p_standby = standby_power(config.load, config.converter);
    const auto& samples = light.samples();
    std::size_t idx = light.index_at(t0);

    auto threshold = [&]() -> std::optional<Crossing> {
        if (node.alive && node.cap.voltage < node.cap.v_cutoff) return Crossing{EventKind::Death, 0.0};
        if (!node.alive && node.cap.voltage >= config.v_on) return Crossing{EventKind::Recovery, 0.0};
        return std::nullopt;
    };
    if (auto x = threshold()) {
        x->time = t0;
        return {node, t0, x};
    }

    double t = t0;
    while (t < t1) {
        while (idx + 1 < samples.size() && samples[idx + 1].time <= t) ++idx;
        double seg_end = t1;
        if (idx + 1 < samples.size() && samples[idx + 1].time < t1) seg_end = samples[idx + 1].time;
        if (!samples.empty() && samples[idx].time > t && samples[idx].time < seg_end) seg_end = samples[idx].time;
        const double lux = samples.empty() ? 0.0 : samples[idx].value;
        const double p_panel = harvest_power(config.harvester, lux);

        const double span = seg_end - t;
        const auto n = static_cast<long>(std::ceil(span / kMaxIntegrationStep));
        const double h = span / static_cast<double>(std::max(n, 1L));
        for (long k = 0; k < std::max(n, 1L); ++k) {
            const double ts = (k + 1 == std::max(n, 1L)) ? seg_end : t + h;
            const double dt = ts - t;
            const double v = node.cap.voltage;
            const double eta = input_efficiency(config.converter, v);
            const double p_in = eta * p_panel;
            const double p_load = node.alive ? p_standby : 0.0;
            const double p_leak = node.cap.leak_current * v;
            const double p_net = p_in - p_load - p_leak;
            auto v2_at = [&](double tau) { return v * v + 2.0 * p_net * tau / c; };

            double tau = dt;
            std::optional<EventKind> hit;
            const double target = node.alive ? node.cap.v_cutoff : config.v_on;
            const double end2 = v2_at(dt);
            if (node.alive ? end2 < sq(target) : end2 >= sq(target)) {
                double lo = 0.0;
                double hi = dt;
                while (hi - lo > kCrossingResolution) {
                    const double mid = 0.5 * (lo + hi);
                    const bool past = node.alive ? v2_at(mid) < sq(target) : v2_at(mid) >= sq(target);
                    (past ? hi : lo) = mid;
                }
                tau = hi;
                hit = node.alive ? EventKind::Death : EventKind::Recovery;
            }

            auto& L = node.ledger;
            L.harvested += p_panel * tau;
            L.input_loss += (1.0 - eta) * p_panel * tau;
            book(L, p_load * tau, config.converter);

            double v2 = v2_at(tau);
            double leaked = p_leak * tau;
            if (v2 < 0.0) {
                // only reachable by a dead node leaking to empty
                leaked += 0.5 * c * v2;
                v2 = 0.0;
            }
            L.leaked += leaked;
            if (v2 > sq(node.cap.v_rated)) {
                L.spilled += 0.5 * c * (v2 - sq(node.cap.v_rated));
                v2 = sq(node.cap.v_rated);
            }
            node.cap.voltage = std::sqrt(v2);
            L.final_stored = stored_energy(node.cap);

            if (hit) {
                const double when = t + tau;
                return {node, when, Crossing{*hit, when}};
            }
            t = ts;
        }
        t = seg_end;
    }
    return {node, t1, std::nullopt};
}

WakeupOutcome handle_wakeup(const NodeConfig& config, NodeState node, double time, double lux, PayloadSynth& synth) {
    require(node.alive, "handle_wakeup on a dead node");
    const double volt = node.cap.voltage;

    if (config.pinned_qos) {
        node.qos = *config.pinned_qos;
    } else {
        auto out = step(node.ctrl, volt, lux, config.table);
        node.ctrl = out.state;
        node.qos = out.qos.value();
    }
    const QosState qos(node.qos);

    WakeupOutcome result;
    double energy = config.load.e_controller_step + action_energy(config);
    Action action = config.mode == ApplicationMode::PeriodicSensing ? Action::Sense
                    : config.mode == ApplicationMode::Advertising    ? Action::Advertise
                                                                    : Action::ControllerStep;
    bool sends = config.mode != ApplicationMode::EventDetection;
    if (config.mode == ApplicationMode::EventDetection && node.pending_since) {
        const double holdoff = interval_for(config.table, qos, ApplicationMode::EventDetection);
        if (!node.last_notification || time - *node.last_notification >= holdoff) {
            energy += config.load.e_advertise;
            action = Action::DeferredNotify;
            sends = true;
        }
    }

    const Payment p = pay(node.cap, energy, config.converter);
    node.cap = p.cap;
    book(node.ledger, p.drawn, config.converter);
    node.ledger.final_stored = stored_energy(node.cap);

    result.record = LogRecord{time, volt, lux, node.qos, action, 0, p.drawn};
    if (p.dead) {
        result.next = SimEvent{time, EventKind::Death, config.node_id, 0.0, node.epoch, 0};
        result.state = node;
        return result;
    }
    if (sends) {
        result.packet = make_packet(config, time, node.qos, volt, lux, synth);
        result.record.packets = 1;
        if (action == Action::DeferredNotify) {
            result.latency = time - *node.pending_since;
            node.pending_since.reset();
            node.last_notification = time;
        }
    }
    result.next = SimEvent{time + interval_for(config.table, qos, config.mode), EventKind::Wakeup, config.node_id,
                           0.0, node.epoch, 0};
    result.state = node;
    return result;
}

ExternalOutcome handle_external_event(const NodeConfig& config, NodeState node, double time, double payload,
                                      double lux, PayloadSynth& synth) {
    (void)payload;
    ExternalOutcome result;
    if (!node.alive || config.mode != ApplicationMode::EventDetection) {
        result.state = node;
        return result;
    }
    const double volt = node.cap.voltage;
    const Payment p = pay(node.cap, config.load.e_event_detect, config.converter);
    node.cap = p.cap;
    book(node.ledger, p.drawn, config.converter);
    node.ledger.final_stored = stored_energy(node.cap);

    LogRecord rec{time, volt, lux, node.qos, Action::EventSuppressed, 0, p.drawn};
    if (p.dead) {
        result.death = SimEvent{time, EventKind::Death, config.node_id, 0.0, node.epoch, 0};
        result.record = rec;
        result.state = node;
        return result;
    }
    const double holdoff = interval_for(config.table, QosState(node.qos), ApplicationMode::EventDetection);
    if (!node.last_notification || time - *node.last_notification >= holdoff) {
        result.packet = make_packet(config, time, node.qos, volt, lux, synth);
        result.latency = time - node.pending_since.value_or(time);
        node.pending_since.reset();
        node.last_notification = time;
        rec.action = Action::EventNotify;
        rec.packets = 1;
    } else if (!node.pending_since) {
        node.pending_since = time;
    }
    result.record = rec;
    result.state = node;
    return result;
}

LifecycleOutcome handle_death_and_recovery(const NodeConfig& config, NodeState node, const SimEvent& event,
                                           double lux) {
    LifecycleOutcome result;
    if (event.kind == EventKind::Death) {
        require(node.alive, "death event for a node that is already dead");
        node.alive = false;
        node.dead_since = event.time;
        ++node.epoch;
        node.pending_since.reset();
        result.record = LogRecord{event.time, node.cap.voltage, lux, 0, Action::Death, 0, 0.0};
    } else if (event.kind == EventKind::Recovery) {
        require(!node.alive, "recovery event for a live node");
        require(node.cap.voltage >= config.v_on - 1e-9, "recovery below v_on");
        node.alive = true;
        node.dead_seconds += event.time - node.dead_since;
        node.ctrl = reset(node.ctrl);
        node.last_notification.reset();
        ++node.epoch;
        result.follow_up = SimEvent{event.time, EventKind::Wakeup, config.node_id, 0.0, node.epoch, 0};
        result.record = LogRecord{event.time, node.cap.voltage, lux, 0, Action::Recovery, 0, 0.0};
    } else {
        throw ContractViolation("handle_death_and_recovery: not a lifecycle event");
    }
    result.state = node;
    return result;
}

NodeLog run_node(const NodeConfig& config, const Trace& light, const Trace& events, double duration,
                 std::uint64_t seed) {
    config.validate();
    require(duration > 0.0, "duration must be > 0");
    if (light.empty()) throw TraceError("light trace for node '" + config.node_id + "' is empty");
    if (light.samples().front().time > 0.0) {
        throw TraceError("light trace for node '" + config.node_id + "' must start at or before t=0");
    }

    NodeLog log;
    log.node_id = config.node_id;
    log.mode = config.mode;
    log.duration = duration;
    log.seed = seed;

    PayloadSynth synth(seed);
    NodeState node = initial_state(config);

    auto later = [](const SimEvent& a, const SimEvent& b) { return event_before(b, a); };
    std::priority_queue<SimEvent, std::vector<SimEvent>, decltype(later)> queue(later);
    std::uint64_t seq = 0;
    auto push = [&](SimEvent ev) {
        ev.seq = seq++;
        queue.push(std::move(ev));
    };

    for (const auto& s : light.samples()) {
        if (s.time >= 0.0 && s.time < duration) {
            push(SimEvent{s.time, EventKind::TraceSample, config.node_id, s.value, 0, 0});
        }
    }
    for (const auto& s : events.samples()) {
        if (s.time >= 0.0 && s.time < duration) {
            push(SimEvent{s.time, EventKind::ExternalEvent, config.node_id, s.value, 0, 0});
        }
    }
    if (node.alive) push(SimEvent{0.0, EventKind::Wakeup, config.node_id, 0.0, node.epoch, 0});

    double now = 0.0;
    while (true) {
        const double target = queue.empty() ? duration : std::min(queue.top().time, duration);
        if (target > now) {
            auto r = integrate_interval(config, node, now, target, light);
            node = r.state;
            now = r.reached;
            if (r.crossing) {
                push(SimEvent{r.crossing->time, r.crossing->kind, config.node_id, 0.0, node.epoch, 0});
                continue;
            }
        }
        if (now >= duration || queue.empty()) break;

        const SimEvent ev = queue.top();
        queue.pop();
        const double lux = light.value_at(ev.time);

        switch (ev.kind) {
            case EventKind::Death:
            case EventKind::Recovery: {
                if ((ev.kind == EventKind::Death) != node.alive) break;
                auto out = handle_death_and_recovery(config, node, ev, lux);
                node = out.state;
                log.records.push_back(out.record);
                if (ev.kind == EventKind::Death) {
                    ++log.deaths;
                    if (!log.first_death) log.first_death = ev.time;
                } else {
                    ++log.recoveries;
                }
                if (out.follow_up) push(*out.follow_up);
                break;
            }
            case EventKind::Wakeup: {
                if (!node.alive || ev.epoch != node.epoch) break;
                auto out = handle_wakeup(config, node, ev.time, lux, synth);
                node = out.state;
                ++log.controller_steps;
                ++log.qos_histogram[static_cast<std::size_t>(node.qos - 1)];
                log.records.push_back(out.record);
                if (out.packet) log.packets.push_back(std::move(*out.packet));
                if (out.latency) log.notification_latencies.push_back(*out.latency);
                push(out.next);
                break;
            }
            case EventKind::ExternalEvent: {
                auto out = handle_external_event(config, node, ev.time, ev.payload, lux, synth);
                node = out.state;
                if (out.record) log.records.push_back(*out.record);
                if (out.packet) log.packets.push_back(std::move(*out.packet));
                if (out.latency) log.notification_latencies.push_back(*out.latency);
                if (out.death) push(*out.death);
                break;
            }
            case EventKind::TraceSample:
                log.records.push_back(
                    LogRecord{ev.time, node.cap.voltage, ev.payload, node.alive ? node.qos : 0, Action::LightChange, 0, 0.0});
                break;
        }
    }

    if (!node.alive) node.dead_seconds += duration - node.dead_since;
    node.ledger.final_stored = stored_energy(node.cap);
    log.ledger = node.ledger;
    log.dead_seconds = node.dead_seconds;
    log.final_voltage = node.cap.voltage;
    log.alive_at_end = node.alive;
    return log;
}

}  // namespace ehnode
