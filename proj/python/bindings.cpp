#include "ehnode/config.hpp"
#include "ehnode/deployment.hpp"
#include "ehnode/energy.hpp"
#include "ehnode/explorer.hpp"
#include "ehnode/qos.hpp"
#include "ehnode/report_io.hpp"
#include "ehnode/sim.hpp"
#include "ehnode/trace.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace ehnode;

namespace {

Trace make_trace(const std::vector<std::pair<double, double>>& points, TraceKind kind) {
    std::vector<TraceSample> samples;
    samples.reserve(points.size());
    for (const auto& [t, v] : points) samples.push_back({t, v});
    return Trace(std::move(samples), kind);
}

py::dict packet_dict(const Packet& p) {
    py::dict d;
    d["node_id"] = p.node_id;
    d["timestamp"] = p.timestamp;
    d["lux"] = p.readings.lux;
    d["temperature_c"] = p.readings.temperature_c;
    d["humidity_pct"] = p.readings.humidity_pct;
    d["qos_state"] = p.qos_state;
    d["voltage"] = p.voltage;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Energy-harvesting BLE node simulator: energy models, adaptive QoS controller, "
              "discrete-event simulation and design-space exploration.";

    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<TraceError>(m, "TraceError", PyExc_ValueError);

    py::class_<SupercapState>(m, "SupercapState")
        .def(py::init<>())
        .def_readwrite("capacitance", &SupercapState::capacitance)
        .def_readwrite("voltage", &SupercapState::voltage)
        .def_readwrite("v_rated", &SupercapState::v_rated)
        .def_readwrite("v_cutoff", &SupercapState::v_cutoff)
        .def_readwrite("leak_current", &SupercapState::leak_current);

    py::class_<HarvesterModel>(m, "HarvesterModel")
        .def(py::init<>())
        .def_readwrite("i_ref", &HarvesterModel::i_ref)
        .def_readwrite("v_ref", &HarvesterModel::v_ref)
        .def_readwrite("lux_ref", &HarvesterModel::lux_ref);

    py::class_<ConverterModel>(m, "ConverterModel")
        .def(py::init<>())
        .def_readwrite("v_boost_min", &ConverterModel::v_boost_min)
        .def_readwrite("eta_boost", &ConverterModel::eta_boost)
        .def_readwrite("eta_cold", &ConverterModel::eta_cold)
        .def_readwrite("eta_buck", &ConverterModel::eta_buck)
        .def_readwrite("i_out_max", &ConverterModel::i_out_max)
        .def_readwrite("v_out", &ConverterModel::v_out);

    py::class_<LoadModel>(m, "LoadModel")
        .def(py::init<>())
        .def_readwrite("i_standby", &LoadModel::i_standby)
        .def_readwrite("e_sense_tx", &LoadModel::e_sense_tx)
        .def_readwrite("e_event_detect", &LoadModel::e_event_detect)
        .def_readwrite("e_advertise", &LoadModel::e_advertise)
        .def_readwrite("e_controller_step", &LoadModel::e_controller_step);

    m.def("stored_energy", &stored_energy);
    m.def("harvest_power", &harvest_power, py::arg("model"), py::arg("lux"));
    m.def("input_efficiency", &input_efficiency, py::arg("conv"), py::arg("v_storage"));
    m.def("charge", &charge, py::arg("cap"), py::arg("p_panel"), py::arg("dt"), py::arg("conv"));
    m.def(
        "discharge",
        [](const SupercapState& cap, double e_load, const ConverterModel& conv) {
            auto r = discharge(cap, e_load, conv);
            if (auto* ok = std::get_if<SupercapState>(&r)) return py::make_tuple(*ok, false);
            return py::make_tuple(std::get<Dead>(r).state, true);
        },
        py::arg("cap"), py::arg("e_load"), py::arg("conv"), "Returns (state, dead).");
    m.def("standby_power", &standby_power);

    py::enum_<ApplicationMode>(m, "ApplicationMode")
        .value("PeriodicSensing", ApplicationMode::PeriodicSensing)
        .value("EventDetection", ApplicationMode::EventDetection)
        .value("Advertising", ApplicationMode::Advertising);

    py::class_<QosRow>(m, "QosRow")
        .def_readonly("state", &QosRow::state)
        .def_readonly("v_lo", &QosRow::v_lo)
        .def_readonly("v_hi", &QosRow::v_hi)
        .def_readonly("sense_interval", &QosRow::sense_interval)
        .def_readonly("pir_interval", &QosRow::pir_interval)
        .def_readonly("adv_interval", &QosRow::adv_interval);

    py::class_<QosTable>(m, "QosTable")
        .def_static("standard", &QosTable::standard)
        .def_property_readonly("rows", &QosTable::rows);

    m.def(
        "lookup_state", [](const QosTable& t, double volt) { return lookup_state(t, volt).value(); }, py::arg("table"),
        py::arg("volt"));
    m.def(
        "interval_for",
        [](const QosTable& t, int state, ApplicationMode mode) { return interval_for(t, QosState(state), mode); },
        py::arg("table"), py::arg("state"), py::arg("mode"));
    m.def("trend", [](const std::array<double, 5>& s) { return trend(s); });

    py::class_<ControllerState>(m, "Controller")
        .def(py::init([](double v_max) {
                 ControllerState c;
                 c.v_max = v_max;
                 return c;
             }),
             py::arg("v_max") = 3.6)
        .def_readonly("index", &ControllerState::index)
        .def_readonly("qos", &ControllerState::qos)
        .def_readonly("next_qos", &ControllerState::next_qos)
        .def_readonly("v_max", &ControllerState::v_max)
        .def(
            "step",
            [](ControllerState& c, double volt, double light, const QosTable& table) {
                auto out = step(c, volt, light, table);
                c = out.state;
                return out.qos.value();
            },
            py::arg("volt"), py::arg("light"), py::arg("table"))
        .def("reset", [](ControllerState& c) { c = reset(c); });

    py::class_<NodeConfig>(m, "NodeConfig")
        .def(py::init<>())
        .def_static(
            "from_json", [](const std::string& text) { return node_config_from_json(nlohmann::json::parse(text)); })
        .def("to_json", [](const NodeConfig& c) { return to_json(c).dump(); })
        .def("validate", &NodeConfig::validate)
        .def_readwrite("node_id", &NodeConfig::node_id)
        .def_readwrite("mode", &NodeConfig::mode)
        .def_readwrite("supercap", &NodeConfig::supercap)
        .def_readwrite("harvester", &NodeConfig::harvester)
        .def_readwrite("converter", &NodeConfig::converter)
        .def_readwrite("load", &NodeConfig::load)
        .def_readwrite("v_on", &NodeConfig::v_on)
        .def_readwrite("v_max", &NodeConfig::v_max)
        .def_readwrite("pinned_qos", &NodeConfig::pinned_qos);

    py::class_<NodeLog>(m, "NodeLog")
        .def_readonly("node_id", &NodeLog::node_id)
        .def_readonly("controller_steps", &NodeLog::controller_steps)
        .def_readonly("dead_seconds", &NodeLog::dead_seconds)
        .def_readonly("deaths", &NodeLog::deaths)
        .def_readonly("recoveries", &NodeLog::recoveries)
        .def_readonly("final_voltage", &NodeLog::final_voltage)
        .def_readonly("alive_at_end", &NodeLog::alive_at_end)
        .def_readonly("first_death", &NodeLog::first_death)
        .def_readonly("qos_histogram", &NodeLog::qos_histogram)
        .def_readonly("notification_latencies", &NodeLog::notification_latencies)
        .def_property_readonly("record_count", [](const NodeLog& l) { return l.records.size(); })
        .def_property_readonly("packets",
                               [](const NodeLog& l) {
                                   py::list out;
                                   for (const auto& p : l.packets) out.append(packet_dict(p));
                                   return out;
                               })
        .def("ledger_json", [](const NodeLog& l) { return ledger_json(l).dump(); })
        .def("to_csv", [](const NodeLog& l) {
            std::ostringstream os;
            write_node_log_csv(os, l);
            return os.str();
        });

    m.def(
        "run_node",
        [](const NodeConfig& config, const std::vector<std::pair<double, double>>& light,
           const std::vector<std::pair<double, double>>& events, double duration, std::uint64_t seed) {
            const Trace l = make_trace(light, TraceKind::Light);
            const Trace e = make_trace(events, TraceKind::Events);
            py::gil_scoped_release release;
            return run_node(config, l, e, duration, seed);
        },
        py::arg("config"), py::arg("light"), py::arg("events") = std::vector<std::pair<double, double>>{},
        py::arg("duration"), py::arg("seed") = 0,
        "light/events are sequences of (time_s, value) pairs.");

    m.def(
        "_run_deployment_json",
        [](const std::string& config_json, const std::map<std::string, std::vector<std::pair<double, double>>>& light,
           const std::map<std::string, std::vector<std::pair<double, double>>>& events, double duration,
           std::uint64_t seed) {
            const DeploymentConfig cfg = deployment_config_from_json(nlohmann::json::parse(config_json));
            std::map<std::string, NodeTraces> traces;
            for (const auto& [id, pts] : light) {
                NodeTraces t;
                t.light = make_trace(pts, TraceKind::Light);
                if (auto it = events.find(id); it != events.end()) t.events = make_trace(it->second, TraceKind::Events);
                traces.emplace(id, std::move(t));
            }
            DeploymentReport report;
            {
                py::gil_scoped_release release;
                report = run_deployment(cfg, traces, duration, seed);
            }
            return deployment_summary_json(report).dump();
        },
        py::arg("config_json"), py::arg("light"), py::arg("events"), py::arg("duration"), py::arg("seed"));

    m.def("link_delivery", &link_delivery, py::arg("distance"), py::arg("range"));

    m.def(
        "steady_state_power", [](const NodeConfig& c, int s) { return steady_state_power(c, QosState(s)); },
        py::arg("config"), py::arg("state"));
    m.def(
        "min_lux_for_perpetual", [](const NodeConfig& c, int s) { return min_lux_for_perpetual(c, QosState(s)); },
        py::arg("config"), py::arg("state"));
    m.def(
        "darkness_survival", [](const NodeConfig& c, int s) { return darkness_survival(c, QosState(s)); },
        py::arg("config"), py::arg("state"));
    m.def(
        "_sweep_frontier_csv",
        [](const std::string& grid_json) {
            const auto result = sweep(grid_from_json(nlohmann::json::parse(grid_json)));
            std::ostringstream os;
            write_frontier_csv(os, result.frontier);
            return os.str();
        },
        py::arg("grid_json"));

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
