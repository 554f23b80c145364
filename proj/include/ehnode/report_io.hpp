#pragma once

#include "ehnode/deployment.hpp"
#include "ehnode/explorer.hpp"
#include "ehnode/sim.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace ehnode {

// Shortest round-trip decimal form; "inf" / "-inf" / "nan" for non-finite values.
std::string format_number(double x);

// time_s,node_id,voltage_v,lux,qos,action,packets
void write_node_log_csv(std::ostream& out, const NodeLog& log);
nlohmann::json ledger_json(const NodeLog& log);

// time_s,node_id,qos,voltage_v,lux,temperature_c,humidity_pct
void write_packets_csv(std::ostream& out, const std::vector<Packet>& packets);
nlohmann::json metrics_json(const Metrics& metrics);
nlohmann::json deployment_summary_json(const DeploymentReport& report);

// capacitance_f,qos_state,mode,min_lux,darkness_survival_s
void write_frontier_csv(std::ostream& out, const std::vector<FrontierRow>& rows);
// capacitance_f,lux,qos_state,mode,net_power_w,sustainable,time_to_cutoff_s
void write_lux_csv(std::ostream& out, const std::vector<LuxRow>& rows);

}  // namespace ehnode
