#include "ehnode/report_io.hpp"

#include <charconv>
#include <cmath>

namespace ehnode {

using nlohmann::json;

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

namespace {

json histogram_json(const std::array<std::uint64_t, kMaxQos>& h) {
    json out = json::object();
    for (std::size_t i = 0; i < h.size(); ++i) out[std::to_string(i + 1)] = h[i];
    return out;
}

json latency_json(const LatencyStats& s) {
    return {{"count", s.count}, {"mean_s", s.mean}, {"max_s", s.max}};
}

}  // namespace

void write_node_log_csv(std::ostream& out, const NodeLog& log) {
    out << "time_s,node_id,voltage_v,lux,qos,action,packets\n";
    for (const auto& r : log.records) {
        out << format_number(r.time) << ',' << log.node_id << ',' << format_number(r.voltage) << ','
            << format_number(r.lux) << ',' << r.qos << ',' << to_string(r.action) << ',' << r.packets << '\n';
    }
}

json ledger_json(const NodeLog& log) {
    const auto& L = log.ledger;
    return {
        {"node_id", log.node_id},
        {"mode", to_string(log.mode)},
        {"seed", log.seed},
        {"duration_s", log.duration},
        {"ledger",
         {{"initial_stored_j", L.initial_stored},
          {"final_stored_j", L.final_stored},
          {"harvested_j", L.harvested},
          {"input_loss_j", L.input_loss},
          {"spilled_j", L.spilled},
          {"consumed_j", L.consumed},
          {"output_loss_j", L.output_loss},
          {"leaked_j", L.leaked},
          {"residual_j", L.residual()},
          {"relative_residual", L.relative_residual()}}},
        {"alive_at_end", log.alive_at_end},
        {"final_voltage_v", log.final_voltage},
        {"dead_seconds", log.dead_seconds},
        {"deaths", log.deaths},
        {"recoveries", log.recoveries},
        {"first_death_s", log.first_death ? json(*log.first_death) : json(nullptr)},
        {"controller_steps", log.controller_steps},
        {"packets_emitted", log.packets.size()},
        {"qos_histogram", histogram_json(log.qos_histogram)},
    };
}

void write_packets_csv(std::ostream& out, const std::vector<Packet>& packets) {
    out << "time_s,node_id,qos,voltage_v,lux,temperature_c,humidity_pct\n";
    for (const auto& p : packets) {
        out << format_number(p.timestamp) << ',' << p.node_id << ',' << p.qos_state << ',' << format_number(p.voltage)
            << ',' << format_number(p.readings.lux) << ',' << format_number(p.readings.temperature_c) << ','
            << format_number(p.readings.humidity_pct) << '\n';
    }
}

json metrics_json(const Metrics& m) {
    json nodes = json::array();
    for (const auto& n : m.nodes) {
        nodes.push_back({
            {"node_id", n.node_id},
            {"mode", to_string(n.mode)},
            {"uptime_fraction", n.uptime_fraction},
            {"dead_seconds", n.dead_seconds},
            {"deaths", n.deaths},
            {"packets_emitted", n.packets_emitted},
            {"packets_delivered", n.packets_delivered},
            {"mean_interval_s", n.mean_interval ? json(*n.mean_interval) : json(nullptr)},
            {"qos_histogram", histogram_json(n.qos_histogram)},
            {"controller_steps", n.controller_steps},
            {"event_notification_latency", latency_json(n.latency)},
            {"final_voltage_v", n.final_voltage},
        });
    }
    const auto& a = m.aggregate;
    json by_mode = json::object();
    for (const auto& [mode, v] : a.mean_interval_by_mode) by_mode[mode] = v;
    return {
        {"nodes", nodes},
        {"aggregate",
         {{"node_count", a.nodes},
          {"uptime_fraction", a.uptime_fraction},
          {"dead_seconds", a.dead_seconds},
          {"packets_emitted", a.packets_emitted},
          {"packets_delivered", a.packets_delivered},
          {"mean_interval_s_by_mode", by_mode},
          {"qos_histogram", histogram_json(a.qos_histogram)},
          {"controller_steps", a.controller_steps},
          {"event_notification_latency", latency_json(a.latency)}}},
    };
}

json deployment_summary_json(const DeploymentReport& report) {
    json ledgers = json::array();
    for (const auto& log : report.logs) ledgers.push_back(ledger_json(log));
    json out = metrics_json(report.metrics);
    out["duration_s"] = report.duration;
    out["seed"] = report.seed;
    out["ledgers"] = ledgers;
    return out;
}

void write_frontier_csv(std::ostream& out, const std::vector<FrontierRow>& rows) {
    out << "capacitance_f,qos_state,mode,min_lux,darkness_survival_s\n";
    for (const auto& r : rows) {
        out << format_number(r.capacitance) << ',' << r.qos_state << ',' << to_string(r.mode) << ','
            << format_number(r.min_lux) << ',' << format_number(r.darkness_survival_s) << '\n';
    }
}

void write_lux_csv(std::ostream& out, const std::vector<LuxRow>& rows) {
    out << "capacitance_f,lux,qos_state,mode,net_power_w,sustainable,time_to_cutoff_s\n";
    for (const auto& r : rows) {
        out << format_number(r.capacitance) << ',' << format_number(r.lux) << ',' << r.qos_state << ','
            << to_string(r.mode) << ',' << format_number(r.net_power_w) << ',' << (r.sustainable ? 1 : 0) << ','
            << format_number(r.time_to_cutoff_s) << '\n';
    }
}

}  // namespace ehnode
