#pragma once

#include <cstddef>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehnode {

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TraceSample {
    double time = 0.0;  // s
    double value = 0.0;
};

enum class TraceKind { Light, Events };

// Time-ordered samples. Light traces are sample-and-hold in lux; event traces
// are impulses whose value is an opaque payload.
class Trace {
public:
    Trace() = default;
    Trace(std::vector<TraceSample> samples, TraceKind kind);

    static Trace constant(double value, TraceKind kind = TraceKind::Light);

    const std::vector<TraceSample>& samples() const { return samples_; }
    TraceKind kind() const { return kind_; }
    bool empty() const { return samples_.empty(); }

    // Held value at time t; the first sample is held backwards.
    double value_at(double t) const;
    // Index of the sample governing time t (0 when t precedes the first one).
    std::size_t index_at(double t) const;

private:
    std::vector<TraceSample> samples_;
    TraceKind kind_ = TraceKind::Light;
};

// Parses "time_s,value" CSV. Errors cite the 1-based line number and source.
Trace read_trace_csv(std::istream& in, TraceKind kind, const std::string& source = "<stream>");
Trace load_trace_csv(const std::string& path, TraceKind kind);

}  // namespace ehnode
