#pragma once

#include "ehnode/sim.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ehnode {

enum class DeliveryModel { HardRange };

struct DeploymentConfig {
    std::vector<NodeConfig> nodes;
    Position base_station;
    double radio_range = 30.0;  // m
    DeliveryModel delivery_model = DeliveryModel::HardRange;

    void validate() const;
};

struct NodeTraces {
    Trace light;
    Trace events{{}, TraceKind::Events};
};

// Delivered iff distance <= range.
bool link_delivery(double distance, double range);

struct LatencyStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double max = 0.0;
};

struct NodeMetrics {
    std::string node_id;
    ApplicationMode mode = ApplicationMode::PeriodicSensing;
    double uptime_fraction = 1.0;
    double dead_seconds = 0.0;
    int deaths = 0;
    std::uint64_t packets_emitted = 0;
    std::uint64_t packets_delivered = 0;
    std::optional<double> mean_interval;  // s between consecutive emitted packets
    std::array<std::uint64_t, kMaxQos> qos_histogram{};
    std::uint64_t controller_steps = 0;
    LatencyStats latency;
    double final_voltage = 0.0;
};

struct AggregateMetrics {
    std::size_t nodes = 0;
    double uptime_fraction = 1.0;  // mean over nodes
    double dead_seconds = 0.0;
    std::uint64_t packets_emitted = 0;
    std::uint64_t packets_delivered = 0;
    std::map<std::string, double> mean_interval_by_mode;
    std::array<std::uint64_t, kMaxQos> qos_histogram{};
    std::uint64_t controller_steps = 0;
    LatencyStats latency;
};

struct Metrics {
    std::vector<NodeMetrics> nodes;
    AggregateMetrics aggregate;
};

struct DeploymentReport {
    double duration = 0.0;
    std::uint64_t seed = 0;
    std::vector<NodeLog> logs;       // same order as config.nodes
    std::vector<Packet> delivered;   // sorted by (timestamp, node_id)
    Metrics metrics;
};

// Stable across platforms and node order.
std::uint64_t node_seed(std::uint64_t seed, const std::string& node_id);

// `delivered` holds the packets that reached the base station, any order.
Metrics compute_metrics(const std::vector<NodeLog>& logs, const std::vector<Packet>& delivered);

// Every configured node needs an entry in `traces`. Nodes run in parallel
// when `threads` != 1 (0 picks the hardware concurrency).
DeploymentReport run_deployment(const DeploymentConfig& config, const std::map<std::string, NodeTraces>& traces,
                                double duration, std::uint64_t seed, unsigned threads = 0);

}  // namespace ehnode
