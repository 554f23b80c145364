#include "cli.hpp"

#include "ehnode/config.hpp"
#include "ehnode/deployment.hpp"
#include "ehnode/explorer.hpp"
#include "ehnode/report_io.hpp"
#include "ehnode/sim.hpp"
#include "ehnode/trace.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

namespace ehnode::cli {

namespace fs = std::filesystem;

namespace {

class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunError(path.string() + ": cannot open for writing");
    return out;
}

void require_duration(double duration) {
    if (!(duration > 0.0)) throw RunError("--duration-s must be > 0");
}

int simulate_node(const std::string& config_path, const std::string& light_path,
                  const std::optional<std::string>& events_path, double duration, std::uint64_t seed,
                  const fs::path& out_dir, std::ostream& out) {
    require_duration(duration);
    const NodeConfig config = node_config_from_json(load_json_file(config_path));
    const Trace light = load_trace_csv(light_path, TraceKind::Light);
    const Trace events = events_path ? load_trace_csv(*events_path, TraceKind::Events) : Trace({}, TraceKind::Events);
    const NodeLog log = run_node(config, light, events, duration, seed);

    fs::create_directories(out_dir);
    {
        auto f = open_out(out_dir / (config.node_id + ".log.csv"));
        write_node_log_csv(f, log);
    }
    {
        auto f = open_out(out_dir / (config.node_id + ".ledger.json"));
        f << ledger_json(log).dump(2) << '\n';
    }
    out << config.node_id << ": steps=" << log.controller_steps << " packets=" << log.packets.size()
        << " dead_s=" << format_number(log.dead_seconds) << " final_v=" << format_number(log.final_voltage) << '\n';
    return 0;
}

int simulate_deployment(const std::string& config_path, const fs::path& trace_dir, double duration,
                        std::uint64_t seed, const fs::path& out_dir, std::ostream& out) {
    require_duration(duration);
    const DeploymentConfig config = deployment_config_from_json(load_json_file(config_path));
    std::map<std::string, NodeTraces> traces;
    for (const auto& node : config.nodes) {
        const fs::path light = trace_dir / (node.node_id + ".light.csv");
        if (!fs::exists(light)) {
            throw RunError("node '" + node.node_id + "': missing light trace " + light.string());
        }
        NodeTraces t;
        t.light = load_trace_csv(light.string(), TraceKind::Light);
        const fs::path events = trace_dir / (node.node_id + ".events.csv");
        if (fs::exists(events)) t.events = load_trace_csv(events.string(), TraceKind::Events);
        traces.emplace(node.node_id, std::move(t));
    }
    const DeploymentReport report = run_deployment(config, traces, duration, seed);

    fs::create_directories(out_dir / "nodes");
    for (const auto& log : report.logs) {
        auto f = open_out(out_dir / "nodes" / (log.node_id + ".log.csv"));
        write_node_log_csv(f, log);
    }
    {
        auto f = open_out(out_dir / "summary.json");
        f << deployment_summary_json(report).dump(2) << '\n';
    }
    {
        auto f = open_out(out_dir / "base_station_packets.csv");
        write_packets_csv(f, report.delivered);
    }
    const auto& a = report.metrics.aggregate;
    out << "nodes=" << a.nodes << " uptime=" << format_number(a.uptime_fraction)
        << " emitted=" << a.packets_emitted << " delivered=" << a.packets_delivered << '\n';
    return 0;
}

int explore(const std::string& config_path, const fs::path& out_csv, std::ostream& out) {
    const ExploreGrid grid = grid_from_json(load_json_file(config_path));
    const SweepResult result = sweep(grid);
    {
        auto f = open_out(out_csv);
        write_frontier_csv(f, result.frontier);
    }
    if (!result.by_lux.empty()) {
        fs::path lux_csv = out_csv;
        lux_csv.replace_filename(out_csv.stem().string() + "_lux.csv");
        auto f = open_out(lux_csv);
        write_lux_csv(f, result.by_lux);
    }
    out << "frontier rows=" << result.frontier.size() << " lux rows=" << result.by_lux.size() << '\n';
    return 0;
}

int validate_config(const std::string& path, std::ostream& out) {
    const auto doc = load_json_file(path);
    switch (detect_config_kind(doc)) {
        case ConfigKind::Node: node_config_from_json(doc); out << path << ": valid node config\n"; break;
        case ConfigKind::Deployment: {
            auto d = deployment_config_from_json(doc);
            out << path << ": valid deployment config (" << d.nodes.size() << " nodes)\n";
            break;
        }
        case ConfigKind::Grid: grid_from_json(doc); out << path << ": valid grid config\n"; break;
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Energy-harvesting BLE node simulator"};
    app.require_subcommand(1);

    std::string config;
    std::string light;
    std::string events;
    std::string trace_dir;
    std::string out_path;
    double duration = 0.0;
    std::uint64_t seed = 0;

    auto* node = app.add_subcommand("simulate-node", "Simulate one node and write its log and energy ledger");
    node->add_option("--config", config, "Node config (JSON)")->required();
    node->add_option("--light-trace", light, "Light trace CSV (time_s,value in lux)")->required();
    node->add_option("--events-trace", events, "Event trace CSV (time_s,value)");
    node->add_option("--duration-s", duration, "Simulated duration in seconds")->required();
    node->add_option("--seed", seed, "Seed for synthesized payloads");
    node->add_option("--out", out_path, "Output directory")->required();

    auto* dep = app.add_subcommand("simulate-deployment", "Simulate every node of a deployment");
    dep->add_option("--config", config, "Deployment config (JSON)")->required();
    dep->add_option("--trace-dir", trace_dir, "Directory holding <node_id>.light.csv [and .events.csv]")->required();
    dep->add_option("--duration-s", duration, "Simulated duration in seconds")->required();
    dep->add_option("--seed", seed, "Base seed");
    dep->add_option("--out", out_path, "Output directory")->required();

    auto* exp = app.add_subcommand("explore", "Sweep the lifetime / QoS / light design space");
    exp->add_option("--config", config, "Grid config (JSON)")->required();
    exp->add_option("--out", out_path, "Frontier CSV path")->required();

    auto* val = app.add_subcommand("validate-config", "Check a node, deployment or grid config");
    val->add_option("--config,config", config, "Config file (JSON)")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*node) {
            std::optional<std::string> ev;
            if (!events.empty()) ev = events;
            return simulate_node(config, light, ev, duration, seed, out_path, out);
        }
        if (*dep) return simulate_deployment(config, trace_dir, duration, seed, out_path, out);
        if (*exp) return explore(config, out_path, out);
        if (*val) return validate_config(config, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace ehnode::cli
