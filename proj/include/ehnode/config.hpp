#pragma once

#include "ehnode/deployment.hpp"
#include "ehnode/explorer.hpp"
#include "ehnode/sim.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace ehnode {

// Invalid configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ConfigKind { Node, Deployment, Grid };

// Deployment files carry "nodes", grid files carry "grid", anything else is a node.
ConfigKind detect_config_kind(const nlohmann::json& doc);

// Fields absent from `doc` keep the value from `defaults`. Unknown keys are errors.
NodeConfig node_config_from_json(const nlohmann::json& doc, const NodeConfig& defaults = {});
nlohmann::json to_json(const NodeConfig& config);

// Each entry of "nodes" is merged over "node_defaults" before parsing.
DeploymentConfig deployment_config_from_json(const nlohmann::json& doc);
ExploreGrid grid_from_json(const nlohmann::json& doc);

nlohmann::json load_json_file(const std::string& path);

}  // namespace ehnode
