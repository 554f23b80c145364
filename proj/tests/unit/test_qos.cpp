#include <catch_amalgamated.hpp>

#include "ehnode/energy.hpp"
#include "ehnode/qos.hpp"
#include "reference_controller.hpp"

#include <random>

using namespace ehnode;

namespace {

const QosTable& table() {
    static const QosTable t = QosTable::standard();
    return t;
}

// Drives the production controller and the reference interpreter with the
// same warm history so both start from identical states.
struct Pair {
    ControllerState prod;
    ref::Interpreter oracle;

    void prime(std::initializer_list<double> lights, std::initializer_list<double> volts, int next_qos) {
        for (double l : lights) prod.light_buf.push(l);
        for (double v : volts) prod.volt_buf.push(v);
        oracle.light_vec.assign(lights.begin(), lights.end());
        oracle.volt_vec.assign(volts.begin(), volts.end());
        prod.index = oracle.index = 1;
        prod.next_qos = oracle.next_qos = next_qos;
    }
};

}  // namespace

TEST_CASE("standard table holds the published rows", "[qos]") {
    const auto& rows = table().rows();
    REQUIRE(rows.size() == 7);
    struct Expect { int state; double lo, hi, sense, pir, adv; };
    const Expect expect[] = {
        {1, 2.1, 2.4, 600, 600, 5},    {2, 2.4, 2.6, 300, 300, 2},   {3, 2.6, 2.8, 240, 120, 0.9},
        {4, 2.8, 3.0, 120, 60, 0.64},  {5, 3.0, 3.2, 60, 30, 0.4},   {6, 3.2, 3.4, 40, 20, 0.2},
        {7, 3.4, 3.6, 20, 10, 0.1},
    };
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(rows[i].state == expect[i].state);
        CHECK(rows[i].v_lo == expect[i].lo);
        CHECK(rows[i].v_hi == expect[i].hi);
        CHECK(rows[i].sense_interval == expect[i].sense);
        CHECK(rows[i].pir_interval == expect[i].pir);
        CHECK(rows[i].adv_interval == expect[i].adv);
    }
}

TEST_CASE("lookup_state uses half-open buckets with the edge going up", "[qos]") {
    CHECK(lookup_state(table(), 3.5).value() == 7);
    CHECK(lookup_state(table(), 2.2).value() == 1);
    CHECK(lookup_state(table(), 3.4).value() == 7);
    CHECK(lookup_state(table(), 3.39).value() == 6);
    CHECK(lookup_state(table(), 3.0).value() == 5);
    CHECK(lookup_state(table(), 2.4).value() == 2);
    CHECK(lookup_state(table(), 3.6).value() == 7);
    CHECK(lookup_state(table(), 2.1).value() == 1);
    CHECK_THROWS_AS(lookup_state(table(), 2.09), ContractViolation);
    CHECK_THROWS_AS(lookup_state(table(), 3.61), ContractViolation);
}

TEST_CASE("interval_for reads the mode's column", "[qos]") {
    CHECK(interval_for(table(), QosState(7), ApplicationMode::PeriodicSensing) == 20.0);
    CHECK(interval_for(table(), QosState(4), ApplicationMode::EventDetection) == 60.0);
    CHECK(interval_for(table(), QosState(1), ApplicationMode::Advertising) == 5.0);
    CHECK_THROWS_AS(QosState(0), ContractViolation);
    CHECK_THROWS_AS(QosState(8), ContractViolation);
}

TEST_CASE("trend is the least-squares slope", "[qos]") {
    CHECK(trend(std::array<double, 5>{1, 1, 1, 1, 1}) == 0.0);
    CHECK(trend(std::array<double, 5>{0, 1, 2, 3, 4}) == Catch::Approx(1.0));
    CHECK(trend(std::array<double, 5>{5, 4, 3, 2, 1}) == Catch::Approx(-1.0));
    CHECK(trend(std::array<double, 5>{0, 0, 0, 0, 10}) == Catch::Approx(2.0));
}

TEST_CASE("History5 keeps the last five samples oldest first", "[qos]") {
    History5 h;
    for (int i = 1; i <= 7; ++i) h.push(i);
    CHECK(h.ordered() == std::array<double, 5>{3, 4, 5, 6, 7});
    h.clear();
    CHECK(h.ordered() == std::array<double, 5>{});
}

TEST_CASE("step examples agree with the reference interpreter", "[qos][oracle]") {
    SECTION("fresh controller seeds from the table") {
        ref::Interpreter oracle;
        const int expected = oracle.loop_body(3.5, 500.0);
        REQUIRE(expected == 7);  // seeded 7, +1, +1, clamped
        const auto out = step(ControllerState{}, 3.5, 500.0, table());
        CHECK(out.qos.value() == expected);
        CHECK(out.state.index == 1);
    }
    SECTION("falling light and voltage both decrement") {
        Pair p;
        p.prime({600, 500, 400, 300, 200}, {3.30, 3.28, 3.26, 3.24, 3.22}, 5);
        const int expected = p.oracle.loop_body(3.20, 100.0);
        REQUIRE(expected == 3);
        CHECK(step(p.prod, 3.20, 100.0, table()).qos.value() == expected);
    }
    SECTION("darkness at the bottom clamps to 1") {
        Pair p;
        p.prime({0, 0, 0, 0, 0}, {2.30, 2.28, 2.26, 2.24, 2.22}, 1);
        const int expected = p.oracle.loop_body(2.20, 0.0);
        REQUIRE(expected == 1);
        CHECK(step(p.prod, 2.20, 0.0, table()).qos.value() == expected);
    }
}

TEST_CASE("readings above the ceiling count as max", "[qos]") {
    ControllerState c;
    auto out = step(c, 5.2, 300.0, table());
    CHECK(out.qos.value() == 7);
    CHECK(out.state.index == 1);
    out = step(out.state, 5.2, 300.0, table());
    CHECK(out.state.index == 2);  // re-seeded again at max
    CHECK_THROWS_AS(step(c, 2.0, 300.0, table()), ContractViolation);
}

TEST_CASE("reset clears history and re-enters at the seed", "[qos]") {
    ControllerState c;
    for (int i = 0; i < 9; ++i) c = step(c, 3.0 + 0.01 * i, 100.0 * i, table()).state;
    const auto r = reset(c);
    CHECK(r.index == 0);
    CHECK(r.light_buf.ordered() == std::array<double, 5>{});
    CHECK(r.volt_buf.ordered() == std::array<double, 5>{});
    const auto rr = reset(r);
    CHECK(rr.index == r.index);
    CHECK(rr.next_qos == r.next_qos);
    CHECK(rr.volt_buf.ordered() == r.volt_buf.ordered());

    // 3.0 V seeds state 5; darkness -1, rising volt window +1.
    const auto out = step(r, 3.0, 0.0, table());
    CHECK(out.qos.value() == 5);
}

TEST_CASE("controller properties over random traces", "[qos][property]") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> volts(2.1, 3.6);
    std::uniform_real_distribution<double> lux(0.0, 1000.0);
    std::bernoulli_distribution dark(0.2);

    for (int trace = 0; trace < 200; ++trace) {
        ControllerState c;
        ref::Interpreter oracle;
        int prev_next = c.next_qos;
        for (int i = 0; i < 200; ++i) {
            const double v = volts(rng);
            const double l = dark(rng) ? 0.0 : lux(rng);
            const bool reseed = c.index == 0 || c.at_max(v);
            const auto out = step(c, v, l, table());
            REQUIRE(out.qos.value() == oracle.loop_body(v, l));
            REQUIRE(out.qos.value() >= 1);
            REQUIRE(out.qos.value() <= 7);
            if (!reseed) REQUIRE(std::abs(out.qos.value() - prev_next) <= 2);
            if (c.index == 0) {
                // seed, then two +-1 rules, then clamp
                const int seed = lookup_state(table(), v).value();
                REQUIRE(std::abs(out.qos.value() - seed) <= 2);
            }
            prev_next = out.state.next_qos;
            c = out.state;
        }
    }
}

TEST_CASE("darkness with falling voltage never raises QoS after the first step", "[qos][property]") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> start(2.2, 3.6);
    std::uniform_real_distribution<double> drop(1e-5, 5e-3);
    for (int trial = 0; trial < 300; ++trial) {
        double v = start(rng);
        const auto first = step(ControllerState{}, v, 0.0, table());
        int prev = first.qos.value();
        ControllerState c = first.state;
        for (int i = 0; i < 200; ++i) {
            v -= drop(rng);
            if (v < 2.1) break;
            const auto out = step(c, v, 0.0, table());
            REQUIRE(out.qos.value() <= prev);
            prev = out.qos.value();
            c = out.state;
        }
    }
}

TEST_CASE("table validation rejects malformed tables", "[qos]") {
    auto rows = QosTable::standard().rows();
    SECTION("overlap names both rows") {
        rows[4].v_hi = 3.25;  // state 5 now runs into state 6
        CHECK_THROWS_WITH(validate_table(rows), Catch::Matchers::ContainsSubstring("overlap") &&
                                                    Catch::Matchers::ContainsSubstring("state 5") &&
                                                    Catch::Matchers::ContainsSubstring("state 6"));
    }
    SECTION("gap") {
        rows[0].v_hi = 2.35;
        CHECK_THROWS_WITH(validate_table(rows), Catch::Matchers::ContainsSubstring("gap"));
    }
    SECTION("non-decreasing interval") {
        rows[6].sense_interval = 40;
        CHECK_THROWS_AS(validate_table(rows), ContractViolation);
    }
    SECTION("wrong row count") {
        rows.pop_back();
        CHECK_THROWS_WITH(validate_table(rows), Catch::Matchers::ContainsSubstring("exactly 7"));
    }
    SECTION("duplicate state") {
        rows[0].state = 2;
        CHECK_THROWS_WITH(validate_table(rows), Catch::Matchers::ContainsSubstring("duplicate"));
    }
}

TEST_CASE("mode names round-trip", "[qos]") {
    for (auto m : {ApplicationMode::PeriodicSensing, ApplicationMode::EventDetection, ApplicationMode::Advertising}) {
        CHECK(parse_mode(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_mode("beacon"), ContractViolation);
}

TEST_CASE("steady nonzero light never lowers QoS", "[qos][property]") {
    // Flat light has zero trend, so the light rule always increments and the
    // voltage rule can at most cancel it.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> volts(2.1, 3.6);
    for (int trial = 0; trial < 100; ++trial) {
        auto out = step(ControllerState{}, volts(rng), 300.0, table());
        int prev = out.qos.value();
        for (int i = 0; i < 100; ++i) {
            out = step(out.state, volts(rng), 300.0, table());
            REQUIRE(out.qos.value() >= prev);
            prev = out.qos.value();
        }
    }
}
