#include "ehnode/deployment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

namespace ehnode {

void DeploymentConfig::validate() const {
    if (!(radio_range > 0.0)) throw ContractViolation("radio_range_m must be > 0");
    std::set<std::string> seen;
    for (const auto& n : nodes) {
        try {
            n.validate();
        } catch (const ContractViolation& e) {
            throw ContractViolation("node '" + n.node_id + "': " + e.what());
        }
        if (!seen.insert(n.node_id).second) throw ContractViolation("duplicate node_id '" + n.node_id + "'");
    }
}

bool link_delivery(double distance, double range) {
    if (!(distance >= 0.0)) throw ContractViolation("link_delivery: distance must be >= 0");
    return distance <= range;
}

std::uint64_t node_seed(std::uint64_t seed, const std::string& node_id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : node_id) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return seed ^ h;
}

namespace {

void fold_latency(LatencyStats& s, double x) {
    ++s.count;
    s.mean += (x - s.mean) / static_cast<double>(s.count);
    s.max = std::max(s.max, x);
}

}  // namespace

Metrics compute_metrics(const std::vector<NodeLog>& logs, const std::vector<Packet>& delivered) {
    std::map<std::string, std::uint64_t> delivered_by_node;
    for (const auto& p : delivered) ++delivered_by_node[p.node_id];

    std::vector<const NodeLog*> order;
    for (const auto& l : logs) order.push_back(&l);
    std::sort(order.begin(), order.end(), [](const NodeLog* a, const NodeLog* b) { return a->node_id < b->node_id; });

    Metrics m;
    std::map<std::string, std::pair<double, std::uint64_t>> gaps_by_mode;
    double uptime_sum = 0.0;
    for (const NodeLog* log : order) {
        NodeMetrics nm;
        nm.node_id = log->node_id;
        nm.mode = log->mode;
        nm.dead_seconds = log->dead_seconds;
        nm.uptime_fraction = log->duration > 0.0 ? std::clamp(1.0 - log->dead_seconds / log->duration, 0.0, 1.0) : 1.0;
        nm.deaths = log->deaths;
        nm.packets_emitted = log->packets.size();
        if (auto it = delivered_by_node.find(log->node_id); it != delivered_by_node.end()) {
            nm.packets_delivered = it->second;
        }
        nm.qos_histogram = log->qos_histogram;
        nm.controller_steps = log->controller_steps;
        nm.final_voltage = log->final_voltage;
        for (double x : log->notification_latencies) fold_latency(nm.latency, x);

        auto& pool = gaps_by_mode[to_string(log->mode)];
        if (log->packets.size() >= 2) {
            std::vector<double> times;
            times.reserve(log->packets.size());
            for (const auto& p : log->packets) times.push_back(p.timestamp);
            std::sort(times.begin(), times.end());
            const double span = times.back() - times.front();
            const auto gaps = static_cast<std::uint64_t>(times.size() - 1);
            nm.mean_interval = span / static_cast<double>(gaps);
            pool.first += span;
            pool.second += gaps;
        }

        auto& agg = m.aggregate;
        ++agg.nodes;
        uptime_sum += nm.uptime_fraction;
        agg.dead_seconds += nm.dead_seconds;
        agg.packets_emitted += nm.packets_emitted;
        agg.packets_delivered += nm.packets_delivered;
        agg.controller_steps += nm.controller_steps;
        for (std::size_t i = 0; i < agg.qos_histogram.size(); ++i) agg.qos_histogram[i] += nm.qos_histogram[i];
        for (double x : log->notification_latencies) fold_latency(agg.latency, x);
        m.nodes.push_back(std::move(nm));
    }
    if (m.aggregate.nodes > 0) m.aggregate.uptime_fraction = uptime_sum / static_cast<double>(m.aggregate.nodes);
    for (const auto& [mode, pool] : gaps_by_mode) {
        if (pool.second > 0) m.aggregate.mean_interval_by_mode[mode] = pool.first / static_cast<double>(pool.second);
    }
    return m;
}

DeploymentReport run_deployment(const DeploymentConfig& config, const std::map<std::string, NodeTraces>& traces,
                                double duration, std::uint64_t seed, unsigned threads) {
    config.validate();
    if (!(duration > 0.0)) throw ContractViolation("duration must be > 0");
    for (const auto& n : config.nodes) {
        if (!traces.contains(n.node_id)) {
            throw ContractViolation("no light trace configured for node '" + n.node_id + "'");
        }
    }

    DeploymentReport report;
    report.duration = duration;
    report.seed = seed;
    report.logs.resize(config.nodes.size());

    const std::size_t n = config.nodes.size();
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const auto& node = config.nodes[i];
            const auto& tr = traces.at(node.node_id);
            try {
                report.logs[i] = run_node(node, tr.light, tr.events, duration, node_seed(seed, node.node_id));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double d = distance(config.nodes[i].position, config.base_station);
        for (const auto& p : report.logs[i].packets) {
            if (link_delivery(d, config.radio_range)) report.delivered.push_back(p);
        }
    }
    std::stable_sort(report.delivered.begin(), report.delivered.end(), [](const Packet& a, const Packet& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.node_id < b.node_id;
    });
    report.metrics = compute_metrics(report.logs, report.delivered);
    return report;
}

}  // namespace ehnode
