#include "ehnode/config.hpp"

#include <fstream>
#include <set>

namespace ehnode {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

// Reads fields out of one JSON object, remembering which keys were used so
// that leftovers (usually typos) can be reported.
class Section {
public:
    Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw ConfigError(where() + "expected an object");
    }

    bool has(const std::string& key) const { return doc_.contains(key); }

    const json* get(const std::string& key) {
        used_.insert(key);
        auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) throw ConfigError(join(path_, key) + ": expected a number");
            out = v->get<double>();
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) throw ConfigError(join(path_, key) + ": expected an integer");
            out = v->get<int>();
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const json* v = get(key)) {
            if (!v->is_string()) throw ConfigError(join(path_, key) + ": expected a string");
            out = v->get<std::string>();
        }
    }

    void position(const std::string& key, Position& out) {
        if (const json* v = get(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
                throw ConfigError(join(path_, key) + ": expected [x, y] in meters");
            }
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    std::vector<double> numbers(const std::string& key) {
        std::vector<double> out;
        if (const json* v = get(key)) {
            if (!v->is_array()) throw ConfigError(join(path_, key) + ": expected an array of numbers");
            for (std::size_t i = 0; i < v->size(); ++i) {
                if (!(*v)[i].is_number()) {
                    throw ConfigError(join(path_, key) + "[" + std::to_string(i) + "]: expected a number");
                }
                out.push_back((*v)[i].get<double>());
            }
        }
        return out;
    }

    Section child(const std::string& key) {
        const json* v = get(key);
        if (v == nullptr) throw ConfigError(join(path_, key) + ": missing");
        return Section(*v, join(path_, key));
    }

    void finish() const {
        for (auto it = doc_.begin(); it != doc_.end(); ++it) {
            if (!used_.contains(it.key())) throw ConfigError(join(path_, it.key()) + ": unknown field");
        }
    }

    const std::string& path() const { return path_; }

private:
    std::string where() const { return path_.empty() ? "" : path_ + ": "; }

    const json& doc_;
    std::string path_;
    std::set<std::string> used_;
};

std::vector<QosRow> table_rows(const json& doc, const std::string& path) {
    if (!doc.is_array()) throw ConfigError(path + ": expected an array of rows");
    std::vector<QosRow> rows;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        Section r(doc[i], path + "[" + std::to_string(i) + "]");
        QosRow row;
        row.state = 0;
        for (const char* k : {"state", "v_lo_v", "v_hi_v", "sense_s", "pir_s", "adv_s"}) {
            if (!r.has(k)) throw ConfigError(r.path() + "." + k + ": missing");
        }
        r.integer("state", row.state);
        r.number("v_lo_v", row.v_lo);
        r.number("v_hi_v", row.v_hi);
        r.number("sense_s", row.sense_interval);
        r.number("pir_s", row.pir_interval);
        r.number("adv_s", row.adv_interval);
        r.finish();
        rows.push_back(row);
    }
    return rows;
}

template <typename F>
auto contract(const std::string& prefix, F&& f) {
    try {
        return f();
    } catch (const ContractViolation& e) {
        throw ConfigError(prefix + e.what());
    }
}

}  // namespace

ConfigKind detect_config_kind(const json& doc) {
    if (doc.is_object() && doc.contains("nodes")) return ConfigKind::Deployment;
    if (doc.is_object() && doc.contains("grid")) return ConfigKind::Grid;
    return ConfigKind::Node;
}

NodeConfig node_config_from_json(const json& doc, const NodeConfig& defaults) {
    NodeConfig cfg = defaults;
    Section s(doc, "");
    s.text("node_id", cfg.node_id);
    if (s.has("mode")) {
        std::string mode;
        s.text("mode", mode);
        cfg.mode = contract("mode: ", [&] { return parse_mode(mode); });
    }
    s.position("position_m", cfg.position);
    if (s.has("supercap")) {
        auto c = s.child("supercap");
        c.number("capacitance_f", cfg.supercap.capacitance);
        c.number("initial_voltage_v", cfg.supercap.voltage);
        c.number("v_rated_v", cfg.supercap.v_rated);
        c.number("v_cutoff_v", cfg.supercap.v_cutoff);
        c.number("leak_current_a", cfg.supercap.leak_current);
        c.finish();
    }
    if (s.has("harvester")) {
        auto h = s.child("harvester");
        h.number("i_ref_a", cfg.harvester.i_ref);
        h.number("v_ref_v", cfg.harvester.v_ref);
        h.number("lux_ref", cfg.harvester.lux_ref);
        std::string scaling = "linear";
        h.text("scaling", scaling);
        if (scaling != "linear") throw ConfigError("harvester.scaling: only 'linear' is supported");
        h.finish();
    }
    if (s.has("converter")) {
        auto c = s.child("converter");
        c.number("v_boost_min_v", cfg.converter.v_boost_min);
        c.number("eta_boost", cfg.converter.eta_boost);
        c.number("eta_cold", cfg.converter.eta_cold);
        c.number("eta_buck", cfg.converter.eta_buck);
        c.number("i_out_max_a", cfg.converter.i_out_max);
        c.number("v_out_v", cfg.converter.v_out);
        c.finish();
    }
    if (s.has("load")) {
        auto l = s.child("load");
        l.number("i_standby_a", cfg.load.i_standby);
        l.number("e_sense_tx_j", cfg.load.e_sense_tx);
        l.number("e_event_detect_j", cfg.load.e_event_detect);
        l.number("e_advertise_j", cfg.load.e_advertise);
        l.number("e_controller_step_j", cfg.load.e_controller_step);
        l.finish();
    }
    s.number("v_on_v", cfg.v_on);
    s.number("v_max_v", cfg.v_max);
    if (const json* p = s.get("pinned_qos")) {
        if (p->is_null()) {
            cfg.pinned_qos.reset();
        } else if (p->is_number_integer()) {
            cfg.pinned_qos = p->get<int>();
        } else {
            throw ConfigError("pinned_qos: expected an integer or null");
        }
    }
    if (const json* t = s.get("qos_table")) {
        auto rows = table_rows(*t, "qos_table");
        cfg.table = contract("", [&] { return QosTable(std::move(rows)); });
    }
    s.finish();
    contract(cfg.node_id.empty() ? "" : "node '" + cfg.node_id + "': ", [&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

json to_json(const NodeConfig& c) {
    json rows = json::array();
    for (auto it = c.table.rows().rbegin(); it != c.table.rows().rend(); ++it) {
        rows.push_back({{"state", it->state},
                        {"v_lo_v", it->v_lo},
                        {"v_hi_v", it->v_hi},
                        {"sense_s", it->sense_interval},
                        {"pir_s", it->pir_interval},
                        {"adv_s", it->adv_interval}});
    }
    return {
        {"node_id", c.node_id},
        {"mode", to_string(c.mode)},
        {"position_m", {c.position.x, c.position.y}},
        {"supercap",
         {{"capacitance_f", c.supercap.capacitance},
          {"initial_voltage_v", c.supercap.voltage},
          {"v_rated_v", c.supercap.v_rated},
          {"v_cutoff_v", c.supercap.v_cutoff},
          {"leak_current_a", c.supercap.leak_current}}},
        {"harvester",
         {{"i_ref_a", c.harvester.i_ref}, {"v_ref_v", c.harvester.v_ref}, {"lux_ref", c.harvester.lux_ref}, {"scaling", "linear"}}},
        {"converter",
         {{"v_boost_min_v", c.converter.v_boost_min},
          {"eta_boost", c.converter.eta_boost},
          {"eta_cold", c.converter.eta_cold},
          {"eta_buck", c.converter.eta_buck},
          {"i_out_max_a", c.converter.i_out_max},
          {"v_out_v", c.converter.v_out}}},
        {"load",
         {{"i_standby_a", c.load.i_standby},
          {"e_sense_tx_j", c.load.e_sense_tx},
          {"e_event_detect_j", c.load.e_event_detect},
          {"e_advertise_j", c.load.e_advertise},
          {"e_controller_step_j", c.load.e_controller_step}}},
        {"v_on_v", c.v_on},
        {"v_max_v", c.v_max},
        {"pinned_qos", c.pinned_qos ? json(*c.pinned_qos) : json(nullptr)},
        {"qos_table", rows},
    };
}

DeploymentConfig deployment_config_from_json(const json& doc) {
    Section s(doc, "");
    DeploymentConfig cfg;
    s.position("base_station_m", cfg.base_station);
    s.number("radio_range_m", cfg.radio_range);
    if (s.has("delivery_model")) {
        std::string model;
        s.text("delivery_model", model);
        if (model != "hard_range") throw ConfigError("delivery_model: only 'hard_range' is supported");
    }
    json defaults = json::object();
    if (const json* d = s.get("node_defaults")) {
        if (!d->is_object()) throw ConfigError("node_defaults: expected an object");
        defaults = *d;
    }
    const json* nodes = s.get("nodes");
    if (nodes == nullptr || !nodes->is_array()) throw ConfigError("nodes: expected an array");
    s.finish();
    for (std::size_t i = 0; i < nodes->size(); ++i) {
        const json& entry = (*nodes)[i];
        const std::string where = "nodes[" + std::to_string(i) + "]";
        if (!entry.is_object()) throw ConfigError(where + ": expected an object");
        if (!entry.contains("node_id")) throw ConfigError(where + ".node_id: missing");
        json merged = defaults;
        merged.merge_patch(entry);
        try {
            cfg.nodes.push_back(node_config_from_json(merged));
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    contract("", [&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

ExploreGrid grid_from_json(const json& doc) {
    Section s(doc, "");
    ExploreGrid grid;
    if (const json* node = s.get("node")) grid.base = node_config_from_json(*node);
    auto g = s.child("grid");
    s.finish();
    grid.capacitances = g.numbers("capacitances_f");
    grid.luxes = g.numbers("lux");
    for (double q : g.numbers("qos_states")) {
        if (q != static_cast<double>(static_cast<int>(q))) throw ConfigError("grid.qos_states: expected integers");
        grid.qos_states.push_back(static_cast<int>(q));
    }
    std::string mode = to_string(grid.base.mode);
    g.text("mode", mode);
    grid.mode = contract("grid.mode: ", [&] { return parse_mode(mode); });
    g.finish();
    contract("", [&] {
        grid.validate();
        return 0;
    });
    return grid;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace ehnode
