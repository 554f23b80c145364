#include "ehnode/trace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ehnode {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

void check_samples(const std::vector<TraceSample>& samples, TraceKind kind) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (kind == TraceKind::Light && samples[i].value < 0.0) {
            throw TraceError("light trace sample " + std::to_string(i) + " has negative lux");
        }
        if (i > 0 && !(samples[i].time > samples[i - 1].time)) {
            throw TraceError("trace sample " + std::to_string(i) + " does not increase in time");
        }
    }
}

}  // namespace

Trace::Trace(std::vector<TraceSample> samples, TraceKind kind) : samples_(std::move(samples)), kind_(kind) {
    check_samples(samples_, kind_);
}

Trace Trace::constant(double value, TraceKind kind) { return Trace({{0.0, value}}, kind); }

std::size_t Trace::index_at(double t) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double x, const TraceSample& s) { return x < s.time; });
    if (it == samples_.begin()) return 0;
    return static_cast<std::size_t>(std::distance(samples_.begin(), it) - 1);
}

double Trace::value_at(double t) const {
    if (samples_.empty()) return 0.0;
    return samples_[index_at(t)].value;
}

Trace read_trace_csv(std::istream& in, TraceKind kind, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<TraceSample> samples;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        const auto where = source + ":" + std::to_string(lineno) + ": ";
        if (!header_seen) {
            if (trim(line) != "time_s,value") {
                throw TraceError(where + "expected header 'time_s,value'");
            }
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw TraceError(where + "expected two comma-separated fields");
        }
        TraceSample s;
        if (!parse_double(line.substr(0, comma), s.time)) throw TraceError(where + "invalid time_s");
        if (!parse_double(line.substr(comma + 1), s.value)) throw TraceError(where + "invalid value");
        if (kind == TraceKind::Light && s.value < 0.0) throw TraceError(where + "negative lux");
        if (!samples.empty() && !(s.time > samples.back().time)) {
            throw TraceError(where + "time_s must be strictly increasing");
        }
        samples.push_back(s);
    }
    if (!header_seen) throw TraceError(source + ": empty trace file");
    return Trace(std::move(samples), kind);
}

Trace load_trace_csv(const std::string& path, TraceKind kind) {
    std::ifstream in(path);
    if (!in) throw TraceError(path + ": cannot open trace file");
    return read_trace_csv(in, kind, path);
}

}  // namespace ehnode
