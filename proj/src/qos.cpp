#include "ehnode/qos.hpp"

#include "ehnode/energy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ehnode {

namespace {

constexpr double kEdgeTolerance = 1e-9;

std::string bucket(const QosRow& r) {
    std::ostringstream os;
    os << "state " << r.state << " [" << r.v_lo << ", " << r.v_hi << ")";
    return os.str();
}

}  // namespace

QosState::QosState(int value) : value_(value) {
    if (value < kMinQos || value > kMaxQos) {
        throw ContractViolation("QoS state must be in 1..7, got " + std::to_string(value));
    }
}

std::string to_string(ApplicationMode mode) {
    switch (mode) {
        case ApplicationMode::PeriodicSensing: return "periodic_sensing";
        case ApplicationMode::EventDetection: return "event_detection";
        case ApplicationMode::Advertising: return "advertising";
    }
    return "unknown";
}

ApplicationMode parse_mode(const std::string& name) {
    if (name == "periodic_sensing") return ApplicationMode::PeriodicSensing;
    if (name == "event_detection") return ApplicationMode::EventDetection;
    if (name == "advertising") return ApplicationMode::Advertising;
    throw ContractViolation("unknown application mode '" + name +
                            "' (expected periodic_sensing, event_detection or advertising)");
}

void validate_table(std::span<const QosRow> rows) {
    if (rows.size() != static_cast<std::size_t>(kMaxQos)) {
        throw ContractViolation("qos_table must have exactly 7 rows, got " + std::to_string(rows.size()));
    }
    std::array<const QosRow*, kMaxQos> by_state{};
    for (const auto& r : rows) {
        if (r.state < kMinQos || r.state > kMaxQos) {
            throw ContractViolation("qos_table row has state " + std::to_string(r.state) + " outside 1..7");
        }
        auto& slot = by_state[static_cast<std::size_t>(r.state - 1)];
        if (slot != nullptr) {
            throw ContractViolation("qos_table has duplicate rows for state " + std::to_string(r.state));
        }
        slot = &r;
        if (!(r.v_lo < r.v_hi)) {
            throw ContractViolation("qos_table " + bucket(r) + " has v_lo >= v_hi");
        }
        if (!(r.sense_interval > 0.0 && r.pir_interval > 0.0 && r.adv_interval > 0.0)) {
            throw ContractViolation("qos_table state " + std::to_string(r.state) + " has a non-positive interval");
        }
    }
    for (std::size_t i = 0; i + 1 < by_state.size(); ++i) {
        const QosRow& lo = *by_state[i];
        const QosRow& hi = *by_state[i + 1];
        if (lo.v_hi > hi.v_lo + kEdgeTolerance) {
            throw ContractViolation("qos_table rows overlap: " + bucket(lo) + " and " + bucket(hi));
        }
        if (lo.v_hi < hi.v_lo - kEdgeTolerance) {
            throw ContractViolation("qos_table rows leave a gap: " + bucket(lo) + " and " + bucket(hi));
        }
        if (!(hi.sense_interval < lo.sense_interval && hi.pir_interval < lo.pir_interval &&
              hi.adv_interval < lo.adv_interval)) {
            throw ContractViolation("qos_table intervals must shrink from state " + std::to_string(lo.state) +
                                    " to state " + std::to_string(hi.state));
        }
    }
}

QosTable::QosTable(std::vector<QosRow> rows) : rows_(std::move(rows)) {
    validate_table(rows_);
    std::sort(rows_.begin(), rows_.end(), [](const QosRow& a, const QosRow& b) { return a.state < b.state; });
}

QosTable QosTable::standard() {
    // state, bucket [V], sensing [s], PIR hold-off [s], advertising [s]
    return QosTable({
        {7, 3.4, 3.6, 20, 10, 0.1},
        {6, 3.2, 3.4, 40, 20, 0.2},
        {5, 3.0, 3.2, 60, 30, 0.4},
        {4, 2.8, 3.0, 120, 60, 0.64},
        {3, 2.6, 2.8, 240, 120, 0.9},
        {2, 2.4, 2.6, 300, 300, 2},
        {1, 2.1, 2.4, 600, 600, 5},
    });
}

QosState lookup_state(const QosTable& table, double volt) {
    if (!(volt >= table.v_low() && volt <= table.v_high())) {
        std::ostringstream os;
        os << "lookup_state: " << volt << " V outside table range [" << table.v_low() << ", " << table.v_high() << "]";
        throw ContractViolation(os.str());
    }
    const auto& rows = table.rows();
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (volt >= it->v_lo) return QosState(it->state);
    }
    return QosState(kMinQos);
}

double interval_for(const QosTable& table, QosState state, ApplicationMode mode) {
    const QosRow& r = table.row(state);
    switch (mode) {
        case ApplicationMode::PeriodicSensing: return r.sense_interval;
        case ApplicationMode::EventDetection: return r.pir_interval;
        case ApplicationMode::Advertising: return r.adv_interval;
    }
    return r.sense_interval;
}

double trend(std::span<const double, 5> samples) {
    double num = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        num += (static_cast<double>(i) - 2.0) * samples[i];
    }
    return num / 10.0;
}

void History5::push(double value) {
    buf_[head_] = value;
    head_ = (head_ + 1) % buf_.size();
}

std::array<double, 5> History5::ordered() const {
    std::array<double, 5> out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf_[(head_ + i) % buf_.size()];
    return out;
}

void History5::clear() {
    buf_.fill(0.0);
    head_ = 0;
}

StepOutcome step(const ControllerState& ctrl, double volt, double light, const QosTable& table) {
    if (!(volt >= table.v_low())) {
        throw ContractViolation("controller step on a dead node (volt below table floor)");
    }
    ControllerState next = ctrl;
    const bool at_max = next.at_max(volt);

    if (next.index == 0 || at_max) {
        next.next_qos = lookup_state(table, std::min(volt, table.v_high())).value();
        ++next.index;
    }

    next.light_buf.push(light);
    next.volt_buf.push(volt);

    const auto lights = next.light_buf.ordered();
    if (light == 0.0 || trend(lights) < 0.0) {
        --next.next_qos;
    } else {
        ++next.next_qos;
    }

    const auto volts = next.volt_buf.ordered();
    if (trend(volts) <= 0.0 && !at_max) {
        --next.next_qos;
    } else {
        ++next.next_qos;
    }

    next.next_qos = std::clamp(next.next_qos, kMinQos, kMaxQos);
    next.qos = next.next_qos;
    return {next, QosState(next.qos)};
}

ControllerState reset(const ControllerState& ctrl) {
    ControllerState out;
    out.v_max = ctrl.v_max;
    out.qos = ctrl.qos;
    out.next_qos = ctrl.next_qos;
    return out;
}

}  // namespace ehnode
