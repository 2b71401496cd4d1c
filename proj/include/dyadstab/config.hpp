// JSON configuration document: per-axis robot dynamics, coupling, simulation
// and experiment settings. Validation is strict -- unknown keys are rejected
// and every error carries the JSON path of the offending entry. Units are
// spelled in the key names (delay_ms, stiffness_Nm, mass_kg, ...); delays
// convert to seconds at the boundary.
#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadstab/experiment.hpp"
#include "dyadstab/types.hpp"

namespace dyadstab {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string json_path, const std::string& message)
        : std::runtime_error(json_path + ": " + message), path_(std::move(json_path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct SimulationSettings {
    double dt = 1e-3;            // s
    double t_end = 30.0;         // s
    double settle_window = 5.0;  // s
};

struct AgentSettings {
    double skilled_stiffness = 120.0;  // N/m
    double blurred_stiffness = 120.0;  // N/m
    int spots = 10;
    double velocity_std = 0.3;  // m/s
};

struct GridSettings {
    std::vector<double> stiffness;  // N/m
    std::vector<double> delays;     // s
};

struct ExperimentSettings {
    double target_amp_x = 0.05;   // m
    double target_amp_y = 0.1;    // m
    double target_omega = 2.59;   // rad/s
    AgentSettings agents;
    int trials = 20;
    std::uint64_t seed = 1;
    int periods = 8;
    std::optional<GridSettings> grid;  // custom grid; absent = published grid
};

struct OutputSettings {
    std::string directory = "out";
    std::vector<std::string> formats = {"csv", "json"};
};

struct ConfigDocument {
    AxisMap robot1;
    AxisMap robot2;
    double stiffness = 36.0;  // N/m
    double delay = 0.165;     // s
    SimulationSettings simulation;
    ExperimentSettings experiment;
    OutputSettings output;

    CouplingConfig coupling() const { return CouplingConfig(robot1, robot2, stiffness, delay); }

    TargetSpec target() const {
        return TargetSpec(experiment.target_amp_x, experiment.target_amp_y,
                          experiment.target_omega);
    }

    std::pair<AgentSpec, AgentSpec> agents() const {
        return {AgentSpec::skilled(experiment.agents.skilled_stiffness),
                AgentSpec::blurred(experiment.agents.blurred_stiffness,
                                   experiment.agents.spots,
                                   experiment.agents.velocity_std)};
    }
};

/// Bundled defaults: the identified arm dynamics and reference coupling the
/// analyses in this repository are built around.
inline ConfigDocument default_config() {
    ConfigDocument doc;
    doc.robot1.emplace("x", AxisDynamics(0.8334, 7.7257));
    doc.robot1.emplace("y", AxisDynamics(1.0649, 10.1168));
    doc.robot2.emplace("x", AxisDynamics(0.7776, 7.4208));
    doc.robot2.emplace("y", AxisDynamics(1.3407, 9.3496));
    return doc;
}

namespace detail {

using Json = nlohmann::json;

inline void require_keys(const Json& node, const std::string& path,
                         std::initializer_list<const char*> known) {
    if (!node.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [key, value] : node.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError(path + "/" + key, "unknown key");
    }
}

inline double get_number(const Json& node, const std::string& path, const char* key,
                         double fallback) {
    if (!node.contains(key)) return fallback;
    const Json& v = node.at(key);
    if (!v.is_number()) throw ConfigError(path + "/" + key, "expected a number");
    return v.get<double>();
}

inline std::int64_t get_integer(const Json& node, const std::string& path, const char* key,
                                std::int64_t fallback) {
    if (!node.contains(key)) return fallback;
    const Json& v = node.at(key);
    if (!v.is_number_integer()) throw ConfigError(path + "/" + key, "expected an integer");
    return v.get<std::int64_t>();
}

inline AxisMap parse_robot(const Json& node, const std::string& path) {
    if (!node.is_object() || node.empty())
        throw ConfigError(path, "expected an object of axes");
    AxisMap axes;
    for (const auto& [axis, body] : node.items()) {
        const std::string axis_path = path + "/" + axis;
        require_keys(body, axis_path, {"mass_kg", "damping_Nspm"});
        if (!body.contains("mass_kg")) throw ConfigError(axis_path + "/mass_kg", "missing");
        if (!body.contains("damping_Nspm"))
            throw ConfigError(axis_path + "/damping_Nspm", "missing");
        const double m = get_number(body, axis_path, "mass_kg", 0.0);
        const double b = get_number(body, axis_path, "damping_Nspm", 0.0);
        try {
            axes.emplace(axis, AxisDynamics(m, b));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(axis_path, e.what());
        }
    }
    return axes;
}

}  // namespace detail

inline ConfigDocument parse_config(const nlohmann::json& root) {
    using detail::Json;
    ConfigDocument doc = default_config();
    detail::require_keys(root, "",
                         {"robots", "coupling", "simulation", "experiment", "output"});

    if (root.contains("robots")) {
        const Json& robots = root.at("robots");
        detail::require_keys(robots, "/robots", {"robot1", "robot2"});
        if (!robots.contains("robot1") || !robots.contains("robot2"))
            throw ConfigError("/robots", "both robot1 and robot2 are required");
        doc.robot1 = detail::parse_robot(robots.at("robot1"), "/robots/robot1");
        doc.robot2 = detail::parse_robot(robots.at("robot2"), "/robots/robot2");
    }

    if (root.contains("coupling")) {
        const Json& coupling = root.at("coupling");
        detail::require_keys(coupling, "/coupling", {"stiffness_Nm", "delay_ms"});
        doc.stiffness = detail::get_number(coupling, "/coupling", "stiffness_Nm", doc.stiffness);
        doc.delay = detail::get_number(coupling, "/coupling", "delay_ms", doc.delay * 1e3) / 1e3;
        if (!(doc.stiffness > 0.0))
            throw ConfigError("/coupling/stiffness_Nm", "must be > 0");
        if (doc.delay < 0.0) throw ConfigError("/coupling/delay_ms", "must be >= 0");
    }

    if (root.contains("simulation")) {
        const Json& sim = root.at("simulation");
        detail::require_keys(sim, "/simulation", {"dt_s", "t_end_s", "settle_window_s"});
        doc.simulation.dt = detail::get_number(sim, "/simulation", "dt_s", doc.simulation.dt);
        doc.simulation.t_end =
            detail::get_number(sim, "/simulation", "t_end_s", doc.simulation.t_end);
        doc.simulation.settle_window = detail::get_number(sim, "/simulation", "settle_window_s",
                                                          doc.simulation.settle_window);
        if (!(doc.simulation.dt > 0.0)) throw ConfigError("/simulation/dt_s", "must be > 0");
        if (!(doc.simulation.t_end > 0.0))
            throw ConfigError("/simulation/t_end_s", "must be > 0");
        if (!(doc.simulation.settle_window > 0.0))
            throw ConfigError("/simulation/settle_window_s", "must be > 0");
    }

    if (root.contains("experiment")) {
        const Json& exp = root.at("experiment");
        detail::require_keys(exp, "/experiment",
                             {"target", "agents", "trials", "seed", "periods", "grid"});
        if (exp.contains("target")) {
            const Json& target = exp.at("target");
            detail::require_keys(target, "/experiment/target",
                                 {"amp_x_m", "amp_y_m", "omega_rad_s"});
            doc.experiment.target_amp_x = detail::get_number(target, "/experiment/target",
                                                             "amp_x_m",
                                                             doc.experiment.target_amp_x);
            doc.experiment.target_amp_y = detail::get_number(target, "/experiment/target",
                                                             "amp_y_m",
                                                             doc.experiment.target_amp_y);
            doc.experiment.target_omega = detail::get_number(target, "/experiment/target",
                                                             "omega_rad_s",
                                                             doc.experiment.target_omega);
        }
        if (exp.contains("agents")) {
            const Json& agents = exp.at("agents");
            detail::require_keys(agents, "/experiment/agents", {"skilled", "blurred"});
            if (agents.contains("skilled")) {
                detail::require_keys(agents.at("skilled"), "/experiment/agents/skilled",
                                     {"stiffness_Nm"});
                doc.experiment.agents.skilled_stiffness =
                    detail::get_number(agents.at("skilled"), "/experiment/agents/skilled",
                                       "stiffness_Nm", doc.experiment.agents.skilled_stiffness);
            }
            if (agents.contains("blurred")) {
                const Json& blurred = agents.at("blurred");
                detail::require_keys(blurred, "/experiment/agents/blurred",
                                     {"stiffness_Nm", "spots", "velocity_std_mps"});
                doc.experiment.agents.blurred_stiffness =
                    detail::get_number(blurred, "/experiment/agents/blurred", "stiffness_Nm",
                                       doc.experiment.agents.blurred_stiffness);
                doc.experiment.agents.spots = static_cast<int>(detail::get_integer(
                    blurred, "/experiment/agents/blurred", "spots",
                    doc.experiment.agents.spots));
                doc.experiment.agents.velocity_std =
                    detail::get_number(blurred, "/experiment/agents/blurred",
                                       "velocity_std_mps", doc.experiment.agents.velocity_std);
            }
        }
        doc.experiment.trials = static_cast<int>(
            detail::get_integer(exp, "/experiment", "trials", doc.experiment.trials));
        doc.experiment.seed = static_cast<std::uint64_t>(detail::get_integer(
            exp, "/experiment", "seed", static_cast<std::int64_t>(doc.experiment.seed)));
        doc.experiment.periods = static_cast<int>(
            detail::get_integer(exp, "/experiment", "periods", doc.experiment.periods));
        if (doc.experiment.trials < 1) throw ConfigError("/experiment/trials", "must be >= 1");
        if (doc.experiment.periods < 2)
            throw ConfigError("/experiment/periods", "must be >= 2");
        if (exp.contains("grid")) {
            const Json& grid = exp.at("grid");
            detail::require_keys(grid, "/experiment/grid", {"stiffness_Nm", "delay_ms"});
            if (!grid.contains("stiffness_Nm") || !grid.contains("delay_ms"))
                throw ConfigError("/experiment/grid",
                                  "both stiffness_Nm and delay_ms lists are required");
            GridSettings settings;
            for (const auto& v : grid.at("stiffness_Nm")) {
                if (!v.is_number() || !(v.get<double>() > 0.0))
                    throw ConfigError("/experiment/grid/stiffness_Nm",
                                      "entries must be positive numbers");
                settings.stiffness.push_back(v.get<double>());
            }
            for (const auto& v : grid.at("delay_ms")) {
                if (!v.is_number() || v.get<double>() < 0.0)
                    throw ConfigError("/experiment/grid/delay_ms",
                                      "entries must be nonnegative numbers");
                settings.delays.push_back(v.get<double>() / 1e3);
            }
            if (settings.stiffness.empty() || settings.delays.empty())
                throw ConfigError("/experiment/grid", "lists must be non-empty");
            doc.experiment.grid = std::move(settings);
        }
    }

    if (root.contains("output")) {
        const Json& output = root.at("output");
        detail::require_keys(output, "/output", {"directory", "formats"});
        if (output.contains("directory")) {
            if (!output.at("directory").is_string())
                throw ConfigError("/output/directory", "expected a string");
            doc.output.directory = output.at("directory").get<std::string>();
        }
        if (output.contains("formats")) {
            doc.output.formats.clear();
            for (const auto& v : output.at("formats")) {
                if (!v.is_string())
                    throw ConfigError("/output/formats", "expected strings");
                const std::string format = v.get<std::string>();
                if (format != "csv" && format != "json" && format != "svg")
                    throw ConfigError("/output/formats",
                                      "unknown format '" + format + "'");
                doc.output.formats.push_back(format);
            }
        }
    }

    // Cross-field checks happen in the strong types.
    try {
        (void)doc.coupling();
        (void)doc.target();
        (void)doc.agents();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("", e.what());
    }
    return doc;
}

inline ConfigDocument load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file: " + path.string());
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("", std::string("JSON parse error: ") + e.what());
    }
    return parse_config(root);
}

inline nlohmann::json to_json(const ConfigDocument& doc) {
    nlohmann::json root;
    auto robot_json = [](const AxisMap& axes) {
        nlohmann::json out;
        for (const auto& [axis, dyn] : axes)
            out[axis] = {{"mass_kg", dyn.mass}, {"damping_Nspm", dyn.damping}};
        return out;
    };
    root["robots"] = {{"robot1", robot_json(doc.robot1)}, {"robot2", robot_json(doc.robot2)}};
    root["coupling"] = {{"stiffness_Nm", doc.stiffness}, {"delay_ms", doc.delay * 1e3}};
    root["simulation"] = {{"dt_s", doc.simulation.dt},
                          {"t_end_s", doc.simulation.t_end},
                          {"settle_window_s", doc.simulation.settle_window}};
    nlohmann::json exp = {
        {"target",
         {{"amp_x_m", doc.experiment.target_amp_x},
          {"amp_y_m", doc.experiment.target_amp_y},
          {"omega_rad_s", doc.experiment.target_omega}}},
        {"agents",
         {{"skilled", {{"stiffness_Nm", doc.experiment.agents.skilled_stiffness}}},
          {"blurred",
           {{"stiffness_Nm", doc.experiment.agents.blurred_stiffness},
            {"spots", doc.experiment.agents.spots},
            {"velocity_std_mps", doc.experiment.agents.velocity_std}}}}},
        {"trials", doc.experiment.trials},
        {"seed", doc.experiment.seed},
        {"periods", doc.experiment.periods}};
    if (doc.experiment.grid) {
        nlohmann::json grid;
        grid["stiffness_Nm"] = doc.experiment.grid->stiffness;
        std::vector<double> delays_ms;
        for (double d : doc.experiment.grid->delays) delays_ms.push_back(d * 1e3);
        grid["delay_ms"] = delays_ms;
        exp["grid"] = grid;
    }
    root["experiment"] = exp;
    root["output"] = {{"directory", doc.output.directory}, {"formats", doc.output.formats}};
    return root;
}

}  // namespace dyadstab
