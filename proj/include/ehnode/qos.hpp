#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ehnode {

inline constexpr int kMinQos = 1;
inline constexpr int kMaxQos = 7;

// One of the seven service levels; higher means shorter intervals.
class QosState {
public:
    constexpr QosState() = default;
    explicit QosState(int value);

    constexpr int value() const { return value_; }
    friend constexpr auto operator<=>(QosState, QosState) = default;

private:
    int value_ = kMinQos;
};

enum class ApplicationMode { PeriodicSensing, EventDetection, Advertising };

std::string to_string(ApplicationMode mode);
// Accepts "periodic_sensing", "event_detection", "advertising".
ApplicationMode parse_mode(const std::string& name);

struct QosRow {
    int state = 1;
    double v_lo = 0.0;
    double v_hi = 0.0;
    double sense_interval = 0.0;  // s
    double pir_interval = 0.0;    // s, notification hold-off
    double adv_interval = 0.0;    // s
};

// Voltage bucket -> interval lookup. Buckets are half-open [v_lo, v_hi) with
// the shared edge going to the higher state; the top bucket includes v_hi.
class QosTable {
public:
    QosTable() = default;
    // Rows in any order; throws ContractViolation when the table is malformed.
    explicit QosTable(std::vector<QosRow> rows);

    // The seven rows published for the reference node.
    static QosTable standard();

    const std::vector<QosRow>& rows() const { return rows_; }  // sorted by state, 1 first
    const QosRow& row(QosState state) const { return rows_[static_cast<std::size_t>(state.value() - 1)]; }
    double v_low() const { return rows_.front().v_lo; }
    double v_high() const { return rows_.back().v_hi; }

private:
    std::vector<QosRow> rows_;
};

// Throws ContractViolation with a message naming the rows involved.
void validate_table(std::span<const QosRow> rows);

QosState lookup_state(const QosTable& table, double volt);
double interval_for(const QosTable& table, QosState state, ApplicationMode mode);

// Least-squares slope of five samples against index 0..4 (oldest first).
double trend(std::span<const double, 5> samples);

// Fixed-size history, oldest sample first when read through ordered().
class History5 {
public:
    void push(double value);
    std::array<double, 5> ordered() const;
    void clear();

private:
    std::array<double, 5> buf_{};
    std::size_t head_ = 0;  // slot of the oldest sample
};

inline constexpr double kMaxVoltageTolerance = 0.010;  // V

struct ControllerState {
    History5 light_buf;
    History5 volt_buf;
    unsigned long index = 0;
    int qos = kMinQos;
    int next_qos = kMinQos;
    double v_max = 3.6;

    bool at_max(double volt) const { return volt >= v_max - kMaxVoltageTolerance; }
};

struct StepOutcome {
    ControllerState state;
    QosState qos;
};

// One pass of the adaptive loop body. volt must be >= the table floor; readings
// above v_max are treated as v_max for the table lookup.
StepOutcome step(const ControllerState& ctrl, double volt, double light, const QosTable& table);

ControllerState reset(const ControllerState& ctrl);

}  // namespace ehnode
