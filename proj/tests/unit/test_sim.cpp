#include <catch_amalgamated.hpp>

#include "ehnode/explorer.hpp"
#include "ehnode/sim.hpp"
#include "reference_controller.hpp"

#include <cmath>

using namespace ehnode;
using Catch::Approx;

namespace {

const Trace kDark = Trace::constant(0.0);
const Trace kNoEvents({}, TraceKind::Events);

// Only standby draws energy: no action or controller cost.
NodeConfig standby_only(double v0) {
    NodeConfig c;
    c.supercap.voltage = v0;
    c.converter.eta_buck = 1.0;
    c.load.e_sense_tx = 0.0;
    c.load.e_advertise = 0.0;
    c.load.e_event_detect = 0.0;
    return c;
}

double closed_form_lifetime(double c, double v0, double vcut, double p) { return 0.5 * c * (v0 * v0 - vcut * vcut) / p; }

void check_ledger(const NodeLog& log) {
    INFO("residual " << log.ledger.residual() << " throughput " << log.ledger.throughput());
    CHECK(log.ledger.relative_residual() <= 1e-6);
}

}  // namespace

TEST_CASE("darkness lifetime under pure standby matches the closed form", "[sim]") {
    const auto cfg = standby_only(3.6);
    const double expected = closed_form_lifetime(1.0, 3.6, 2.1, 3e-6);
    REQUIRE(expected == Approx(1'425'000.0));
    const auto log = run_node(cfg, kDark, kNoEvents, 2'000'000.0, 0);
    REQUIRE(log.first_death);
    CHECK(*log.first_death == Approx(expected).epsilon(0.01));
    CHECK(*log.first_death == Approx(expected).epsilon(1e-6));
    CHECK_FALSE(log.alive_at_end);
    CHECK(log.dead_seconds == Approx(2'000'000.0 - expected).epsilon(1e-6));
    CHECK(log.recoveries == 0);
    check_ledger(log);
}

TEST_CASE("integrate_interval follows constant-power discharge", "[sim]") {
    const auto cfg = standby_only(3.3);
    NodeState node = initial_state(cfg);
    for (double span : {1.0, 37.5, 3600.0, 86400.0}) {
        const auto r = integrate_interval(cfg, node, 100.0, 100.0 + span, kDark);
        const double v = std::sqrt(3.3 * 3.3 - 2.0 * 3e-6 * span / 1.0);
        CHECK(r.state.cap.voltage == Approx(v).epsilon(0.01));
        CHECK(r.state.cap.voltage == Approx(v).epsilon(1e-9));
        CHECK_FALSE(r.crossing);
    }
    CHECK_THROWS_AS(integrate_interval(cfg, node, 5.0, 5.0, kDark), ContractViolation);
}

TEST_CASE("balancing light holds the voltage flat for a day", "[sim]") {
    const auto cfg = standby_only(3.0);
    // Closed-form balance: eta_boost * P_ref * lux / lux_ref == standby.
    const double p_standby = standby_power(cfg.load, cfg.converter);
    const double balance = p_standby / (cfg.converter.eta_boost * 46.5e-6 * 1.5 / 300.0);
    CHECK(min_lux_for_perpetual(cfg, QosState(1)) == Approx(balance).margin(kLuxResolution));

    const auto r = integrate_interval(cfg, initial_state(cfg), 0.0, 86400.0, Trace::constant(balance));
    CHECK(std::abs(r.state.cap.voltage - 3.0) <= 1e-6);
}

TEST_CASE("dead node charges at the cold-start efficiency below the boost threshold", "[sim]") {
    auto cfg = standby_only(1.0);
    NodeState node = initial_state(cfg);
    REQUIRE_FALSE(node.alive);
    const Trace light = Trace::constant(300.0);
    const double p = 69.75e-6;

    auto r = integrate_interval(cfg, node, 0.0, 100.0, light);
    CHECK(r.state.cap.voltage == Approx(std::sqrt(1.0 + 2.0 * 0.05 * p * 100.0)).epsilon(1e-12));
    CHECK(r.state.ledger.input_loss == Approx(0.95 * p * 100.0));

    node.cap.voltage = 2.0;
    r = integrate_interval(cfg, node, 0.0, 100.0, light);
    CHECK(r.state.cap.voltage == Approx(std::sqrt(4.0 + 2.0 * 0.8 * p * 100.0)).epsilon(1e-12));
}

TEST_CASE("wakeups schedule the next one from the chosen state's interval", "[sim]") {
    NodeConfig cfg;
    cfg.supercap.voltage = 3.5;
    PayloadSynth synth(1);

    auto node = initial_state(cfg);
    auto out = handle_wakeup(cfg, node, 100.0, 500.0, synth);
    REQUIRE(out.state.qos == 7);
    CHECK(out.next.kind == EventKind::Wakeup);
    CHECK(out.next.time == 120.0);
    REQUIRE(out.packet);
    CHECK(out.packet->qos_state == 7);
    CHECK(out.packet->voltage == 3.5);
    CHECK(out.packet->readings.lux == 500.0);
    CHECK(out.record.energy_j == Approx(50e-6 / 0.9));

    cfg.mode = ApplicationMode::Advertising;
    cfg.pinned_qos = 1;
    out = handle_wakeup(cfg, initial_state(cfg), 10.0, 500.0, synth);
    CHECK(out.next.time == 15.0);
    CHECK(out.record.action == Action::Advertise);
}

TEST_CASE("a wakeup that drains the node emits nothing and schedules death", "[sim]") {
    NodeConfig cfg;
    cfg.supercap.voltage = 2.1000001;
    cfg.load.e_sense_tx = 1e-3;
    PayloadSynth synth(1);
    const auto out = handle_wakeup(cfg, initial_state(cfg), 42.0, 0.0, synth);
    CHECK_FALSE(out.packet);
    CHECK(out.next.kind == EventKind::Death);
    CHECK(out.next.time == 42.0);
    CHECK(out.state.cap.voltage == 2.1);
}

TEST_CASE("event notifications respect the hold-off", "[sim]") {
    NodeConfig cfg;
    cfg.mode = ApplicationMode::EventDetection;
    cfg.supercap.voltage = 3.5;
    PayloadSynth synth(3);

    SECTION("state 7: second event 5 s later is suppressed") {
        cfg.pinned_qos = 7;
        auto node = initial_state(cfg);
        auto first = handle_external_event(cfg, node, 100.0, 1.0, 300.0, synth);
        REQUIRE(first.packet);
        CHECK(first.latency == 0.0);
        auto second = handle_external_event(cfg, first.state, 105.0, 1.0, 300.0, synth);
        CHECK_FALSE(second.packet);
        REQUIRE(second.record);
        CHECK(second.record->action == Action::EventSuppressed);
        CHECK(second.state.pending_since == 105.0);
        // A wakeup after the hold-off flushes the pending event.
        auto wake = handle_wakeup(cfg, second.state, 110.0, 300.0, synth);
        REQUIRE(wake.packet);
        CHECK(wake.record.action == Action::DeferredNotify);
        CHECK(wake.latency == 5.0);
    }
    SECTION("state 1: a single event is notified immediately") {
        cfg.pinned_qos = 1;
        auto out = handle_external_event(cfg, initial_state(cfg), 10.0, 1.0, 300.0, synth);
        REQUIRE(out.packet);
        CHECK(out.latency == 0.0);
        CHECK(out.record->energy_j == Approx(30e-6 / 0.9));
    }
    SECTION("dead nodes ignore events") {
        auto node = initial_state(cfg);
        node.alive = false;
        auto out = handle_external_event(cfg, node, 10.0, 1.0, 300.0, synth);
        CHECK_FALSE(out.packet);
        CHECK_FALSE(out.record);
        CHECK(out.state.cap.voltage == node.cap.voltage);
        CHECK(out.state.ledger.consumed == 0.0);
    }
}

TEST_CASE("a dead node recovers at v_on under light", "[sim]") {
    NodeConfig cfg;
    cfg.supercap.voltage = 2.1;
    cfg.load.e_sense_tx = 1.0;  // the first wakeup kills it
    const double duration = 20'000.0;
    const auto log = run_node(cfg, Trace::constant(300.0), kNoEvents, duration, 0);
    REQUIRE(log.deaths >= 1);
    REQUIRE(log.recoveries >= 1);

    double death_t = -1, recovery_t = -1;
    for (const auto& r : log.records) {
        if (r.action == Action::Death && death_t < 0) death_t = r.time;
        if (r.action == Action::Recovery && recovery_t < 0) recovery_t = r.time;
    }
    CHECK(death_t == 0.0);
    const double expected = 0.5 * (2.4 * 2.4 - 2.1 * 2.1) / (0.8 * 69.75e-6);
    CHECK(recovery_t - death_t == Approx(expected).epsilon(1e-6));

    // The first step after recovery re-seeds from the table at ~2.4 V (state 2).
    const LogRecord* after = nullptr;
    for (const auto& r : log.records) {
        if (r.time >= recovery_t && r.action == Action::Sense) {
            after = &r;
            break;
        }
    }
    REQUIRE(after);
    REQUIRE(lookup_state(cfg.table, after->voltage).value() == 2);
    ref::Interpreter oracle;
    CHECK(after->qos == oracle.loop_body(after->voltage, 300.0));
    check_ledger(log);
}

TEST_CASE("a dead node in darkness never recovers", "[sim]") {
    NodeConfig cfg;
    cfg.supercap.voltage = 2.0;
    const auto log = run_node(cfg, kDark, kNoEvents, 5000.0, 0);
    CHECK(log.dead_seconds == 5000.0);
    CHECK(log.controller_steps == 0);
    CHECK(log.packets.empty());
    CHECK(log.recoveries == 0);
}

TEST_CASE("death and recovery handlers", "[sim]") {
    NodeConfig cfg;
    auto node = initial_state(cfg);
    node.cap.voltage = 2.1;
    const auto died = handle_death_and_recovery(cfg, node, SimEvent{50.0, EventKind::Death, "n", 0, 0, 0}, 0.0);
    CHECK_FALSE(died.state.alive);
    CHECK(died.state.epoch == node.epoch + 1);
    CHECK_FALSE(died.follow_up);

    auto charged = died.state;
    charged.cap.voltage = 2.4;
    const auto back = handle_death_and_recovery(cfg, charged, SimEvent{80.0, EventKind::Recovery, "n", 0, 0, 0}, 300.0);
    CHECK(back.state.alive);
    CHECK(back.state.dead_seconds == 30.0);
    CHECK(back.state.ctrl.index == 0);
    REQUIRE(back.follow_up);
    CHECK(back.follow_up->kind == EventKind::Wakeup);
    CHECK(back.follow_up->time == 80.0);
}

TEST_CASE("a very short run logs exactly one controller step", "[sim]") {
    const auto log = run_node(NodeConfig{}, Trace::constant(300.0), kNoEvents, 1.0, 0);
    CHECK(log.controller_steps == 1);
    CHECK(log.packets.size() == 1);
}

TEST_CASE("run_node invariants on a varying day", "[sim][property]") {
    // Office-like light: dark nights, bright days, a cloudy afternoon.
    std::vector<TraceSample> s;
    for (int day = 0; day < 3; ++day) {
        const double d = day * 86400.0;
        s.push_back({d + 0.0, 0.0});
        s.push_back({d + 8 * 3600.0, 450.0});
        s.push_back({d + 13 * 3600.0, 120.0});
        s.push_back({d + 18 * 3600.0, 0.0});
    }
    const Trace light(s, TraceKind::Light);
    std::vector<TraceSample> ev;
    for (double t = 1000.0; t < 3 * 86400.0; t += 997.0) ev.push_back({t, 1.0});
    const Trace events(ev, TraceKind::Events);

    for (auto mode : {ApplicationMode::PeriodicSensing, ApplicationMode::EventDetection, ApplicationMode::Advertising}) {
        NodeConfig cfg;
        cfg.mode = mode;
        cfg.supercap.voltage = 2.8;
        const auto a = run_node(cfg, light, events, 3 * 86400.0, 11);
        const auto b = run_node(cfg, light, events, 3 * 86400.0, 11);

        INFO(to_string(mode));
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            REQUIRE(a.records[i].time == b.records[i].time);
            REQUIRE(a.records[i].voltage == b.records[i].voltage);
            REQUIRE(a.records[i].qos == b.records[i].qos);
        }
        REQUIRE(a.packets.size() == b.packets.size());
        for (std::size_t i = 0; i < a.packets.size(); ++i) {
            REQUIRE(a.packets[i].readings.humidity_pct == b.packets[i].readings.humidity_pct);
        }
        check_ledger(a);

        std::uint64_t hist = 0;
        for (auto h : a.qos_histogram) hist += h;
        CHECK(hist == a.controller_steps);

        // No zombie actions, and wakeup spacing equals the chosen interval.
        bool alive = cfg.supercap.voltage >= cfg.supercap.v_cutoff;
        const LogRecord* last_wake = nullptr;
        for (const auto& r : a.records) {
            if (r.action == Action::Death) { alive = false; last_wake = nullptr; continue; }
            if (r.action == Action::Recovery) { alive = true; continue; }
            if (r.action == Action::LightChange) continue;
            REQUIRE(alive);
            REQUIRE(r.voltage >= cfg.supercap.v_cutoff);
            const bool wake = r.action == Action::Sense || r.action == Action::Advertise ||
                              r.action == Action::ControllerStep || r.action == Action::DeferredNotify;
            if (!wake) continue;
            if (last_wake) {
                const double gap = r.time - last_wake->time;
                REQUIRE(gap == Approx(interval_for(cfg.table, QosState(last_wake->qos), mode)).margin(1e-6));
            }
            last_wake = &r;
        }
    }
}

TEST_CASE("run_node rejects bad inputs before simulating", "[sim]") {
    NodeConfig cfg;
    CHECK_THROWS_AS(run_node(cfg, Trace::constant(1.0), kNoEvents, 0.0, 0), ContractViolation);
    CHECK_THROWS_AS(run_node(cfg, Trace({}, TraceKind::Light), kNoEvents, 10.0, 0), TraceError);
    CHECK_THROWS_AS(run_node(cfg, Trace({{5.0, 1.0}}, TraceKind::Light), kNoEvents, 10.0, 0), TraceError);
    cfg.v_on = 2.0;
    CHECK_THROWS_WITH(run_node(cfg, Trace::constant(1.0), kNoEvents, 10.0, 0),
                      Catch::Matchers::ContainsSubstring("v_on_v"));
}

TEST_CASE("event ordering breaks ties by kind, node, then sequence", "[sim]") {
    const SimEvent death{5.0, EventKind::Death, "b", 0, 0, 9};
    const SimEvent wake{5.0, EventKind::Wakeup, "a", 0, 0, 1};
    const SimEvent ext{5.0, EventKind::ExternalEvent, "a", 0, 0, 2};
    const SimEvent early{4.0, EventKind::Wakeup, "z", 0, 0, 3};
    CHECK(event_before(early, death));
    CHECK(event_before(death, ext));
    CHECK(event_before(ext, wake));
    CHECK(event_before(SimEvent{5.0, EventKind::Wakeup, "a", 0, 0, 0}, SimEvent{5.0, EventKind::Wakeup, "b", 0, 0, 0}));
}
