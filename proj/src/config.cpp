#include "reachprob/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace reachprob {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.contains(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

const json& require(const json& obj, const std::string& where, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + ": missing required key '" + key + "'");
    return *it;
}

double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field + ": expected a number");
    return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& field) {
    if (!v.is_number_integer()) throw ConfigError(field + ": expected an integer");
    return v.get<std::int64_t>();
}

bool as_bool(const json& v, const std::string& field) {
    if (!v.is_boolean()) throw ConfigError(field + ": expected a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& field) {
    if (!v.is_string()) throw ConfigError(field + ": expected a string");
    return v.get<std::string>();
}

GridSpec parse_grid(const json& grid_json) {
    if (!grid_json.is_array() || grid_json.empty())
        throw ConfigError("grid: expected a non-empty array of axis objects");
    std::vector<AxisSpec> axes;
    int d = 0;
    for (const auto& axis_json : grid_json) {
        const std::string where = "grid[" + std::to_string(d) + "]";
        if (!axis_json.is_object()) throw ConfigError(where + ": expected an object");
        reject_unknown_keys(axis_json, where, {"lower", "upper", "count", "periodic"});
        AxisSpec ax;
        ax.lower = as_number(require(axis_json, where, "lower"), where + ".lower");
        ax.upper = as_number(require(axis_json, where, "upper"), where + ".upper");
        ax.count = as_integer(require(axis_json, where, "count"), where + ".count");
        if (axis_json.contains("periodic"))
            ax.periodic = as_bool(axis_json["periodic"], where + ".periodic");
        if (!(ax.lower < ax.upper)) throw ConfigError(where + ": lower must be < upper");
        if (ax.count < 2) throw ConfigError(where + ".count: must be >= 2");
        axes.push_back(ax);
        ++d;
    }
    return GridSpec(std::move(axes));
}

ControlSet parse_controls(const json& controls_json) {
    if (controls_json.is_array()) {
        if (controls_json.empty()) throw ConfigError("controls: must be non-empty");
        std::vector<double> values;
        for (const auto& v : controls_json) values.push_back(as_number(v, "controls[]"));
        try {
            return ControlSet(std::move(values));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (controls_json.is_object()) {
        reject_unknown_keys(controls_json, "controls", {"lower", "upper", "count"});
        const double lower = as_number(require(controls_json, "controls", "lower"), "controls.lower");
        const double upper = as_number(require(controls_json, "controls", "upper"), "controls.upper");
        const std::int64_t count =
            as_integer(require(controls_json, "controls", "count"), "controls.count");
        try {
            return ControlSet::linear(lower, upper, static_cast<int>(count));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("controls: expected an array of values or {lower, upper, count}");
}

/// Time-invariant or per-step index list.
std::vector<std::set<int>> parse_index_sets(const json& v, const std::string& field,
                                            int n_states, int horizon) {
    std::vector<std::set<int>> per_k;
    auto check_index = [&](std::int64_t i) {
        if (i < 0 || i >= n_states)
            throw ConfigError(field + ": state index " + std::to_string(i) + " out of range");
        return static_cast<int>(i);
    };
    if (!v.is_array()) throw ConfigError(field + ": expected an array");
    const bool per_step = !v.empty() && v[0].is_array();
    if (per_step) {
        if (static_cast<int>(v.size()) != horizon + 1)
            throw ConfigError(field + ": per-step form needs horizon+1 entries");
        for (const auto& entry : v) {
            if (!entry.is_array()) throw ConfigError(field + ": expected arrays of indices");
            std::set<int> set;
            for (const auto& i : entry) set.insert(check_index(as_integer(i, field)));
            per_k.push_back(std::move(set));
        }
    } else {
        std::set<int> set;
        for (const auto& i : v) set.insert(check_index(as_integer(i, field)));
        per_k.assign(static_cast<std::size_t>(horizon) + 1, set);
    }
    return per_k;
}

std::shared_ptr<const oracle::FiniteChain> parse_chain(const json& scen, const GridSpec& grid,
                                                       const ControlSet& controls,
                                                       int horizon) {
    reject_unknown_keys(scen, "scenario",
                        {"name", "states", "transitions", "target_states", "obstacle_states"});

    const json& states_json = require(scen, "scenario", "states");
    if (!states_json.is_array() || states_json.empty())
        throw ConfigError("scenario.states: expected a non-empty array");
    std::vector<State> states;
    for (const auto& sv : states_json) {
        if (!sv.is_array() || static_cast<int>(sv.size()) != grid.ndims())
            throw ConfigError("scenario.states: each state needs one value per grid axis");
        State s = State::zeros(grid.ndims());
        int d = 0;
        for (const auto& x : sv) s[d++] = as_number(x, "scenario.states[][]");
        states.push_back(s);
    }
    const int n = static_cast<int>(states.size());

    // The solver evaluates at grid points, so the chain's states must
    // enumerate them exactly.
    if (static_cast<std::size_t>(n) != grid.total_points())
        throw ConfigError("scenario.states: must enumerate all " +
                          std::to_string(grid.total_points()) + " grid points");
    for (std::size_t p = 0; p < grid.total_points(); ++p) {
        const State gp = grid.point_of_flat(p);
        bool found = false;
        for (const auto& s : states)
            if (s == gp) {
                found = true;
                break;
            }
        if (!found)
            throw ConfigError("scenario.states: grid point " + std::to_string(p) +
                              " is not a chain state");
    }

    const json& trans_json = require(scen, "scenario", "transitions");
    if (!trans_json.is_array() || static_cast<int>(trans_json.size()) != n)
        throw ConfigError("scenario.transitions: need one row per state");
    std::vector<std::vector<std::vector<std::pair<int, double>>>> transitions;
    for (const auto& per_state : trans_json) {
        if (!per_state.is_array() || static_cast<int>(per_state.size()) != controls.size())
            throw ConfigError("scenario.transitions: need one list per control");
        std::vector<std::vector<std::pair<int, double>>> rows;
        for (const auto& row_json : per_state) {
            if (!row_json.is_array() || row_json.empty())
                throw ConfigError("scenario.transitions: successor lists must be non-empty");
            std::vector<std::pair<int, double>> row;
            for (const auto& pair_json : row_json) {
                if (!pair_json.is_array() || pair_json.size() != 2)
                    throw ConfigError("scenario.transitions: entries are [index, probability]");
                const auto idx = as_integer(pair_json[0], "scenario.transitions[][0]");
                const auto prob = as_number(pair_json[1], "scenario.transitions[][1]");
                row.emplace_back(static_cast<int>(idx), prob);
            }
            rows.push_back(std::move(row));
        }
        transitions.push_back(std::move(rows));
    }

    auto target_sets = parse_index_sets(require(scen, "scenario", "target_states"),
                                        "scenario.target_states", n, horizon);
    std::vector<std::set<int>> obstacle_sets(static_cast<std::size_t>(horizon) + 1);
    if (scen.contains("obstacle_states"))
        obstacle_sets = parse_index_sets(scen["obstacle_states"], "scenario.obstacle_states",
                                         n, horizon);

    auto chain = std::make_shared<oracle::FiniteChain>();
    chain->states = states;
    chain->controls = controls;
    chain->transitions = std::move(transitions);
    chain->horizon = horizon;
    chain->grid = grid;

    auto index_of = [states](const State& s) {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i] == s) return static_cast<int>(i);
        return -1;
    };
    chain->target = [index_of, sets = std::move(target_sets)](const State& s, int k) {
        if (k < 0 || k >= static_cast<int>(sets.size())) return false;
        const int i = index_of(s);
        return i >= 0 && sets[static_cast<std::size_t>(k)].contains(i);
    };
    chain->obstacle = [index_of, sets = std::move(obstacle_sets)](const State& s, int k) {
        if (k < 0 || k >= static_cast<int>(sets.size())) return false;
        const int i = index_of(s);
        return i >= 0 && sets[static_cast<std::size_t>(k)].contains(i);
    };

    try {
        chain->validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return chain;
}

void validate_policy_name(const std::string& name, const std::string& scenario_name) {
    if (name == "optimal") return;
    if (name.starts_with("constant:")) {
        try {
            std::size_t used = 0;
            const std::string text = name.substr(9);
            (void)std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError("policy: cannot parse constant control in '" + name + "'");
        }
        return;
    }
    if (name == "heading" || name == "heading_literal") {
        if (scenario_name != "vehicle")
            throw ConfigError("policy: '" + name + "' requires the vehicle scenario");
        return;
    }
    throw ConfigError("policy: unknown policy '" + name + "'");
}

RunConfig parse_config_json(const json& root, std::optional<std::uint64_t> seed_override) {
    if (!root.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown_keys(root, "config",
                        {"scenario", "grid", "horizon", "gamma", "samples", "controls",
                         "seed", "estimator", "common_random_numbers", "policy"});

    RunConfig config;

    const json& scen = require(root, "config", "scenario");
    if (!scen.is_object()) throw ConfigError("scenario: expected an object");
    config.scenario_name = as_string(require(scen, "scenario", "name"), "scenario.name");

    GridSpec grid;
    try {
        grid = parse_grid(require(root, "config", "grid"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }

    const std::int64_t horizon = as_integer(require(root, "config", "horizon"), "horizon");
    if (horizon < 0) throw ConfigError("horizon: must be >= 0");
    const double gamma = as_number(require(root, "config", "gamma"), "gamma");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma: must lie in [0, 1]");
    const std::int64_t samples = as_integer(require(root, "config", "samples"), "samples");
    if (samples < 1) throw ConfigError("samples: must be >= 1");
    ControlSet controls = parse_controls(require(root, "config", "controls"));

    const json& seed_json = require(root, "config", "seed");
    if (!seed_json.is_number_integer() ||
        (seed_json.is_number_integer() && !seed_json.is_number_unsigned() &&
         seed_json.get<std::int64_t>() < 0))
        throw ConfigError("seed: expected a non-negative 64-bit integer");
    config.seed = seed_override.value_or(seed_json.get<std::uint64_t>());

    if (root.contains("estimator")) {
        const std::string est = as_string(root["estimator"], "estimator");
        if (est == "monte_carlo")
            config.estimator_mode = ExpectationEstimator::Mode::kMonteCarlo;
        else if (est == "exact")
            config.estimator_mode = ExpectationEstimator::Mode::kExact;
        else
            throw ConfigError("estimator: expected 'monte_carlo' or 'exact'");
    }
    if (root.contains("common_random_numbers"))
        config.common_random_numbers =
            as_bool(root["common_random_numbers"], "common_random_numbers");

    config.policy_name = as_string(require(root, "config", "policy"), "policy");
    validate_policy_name(config.policy_name, config.scenario_name);

    Scenario& sc = config.scenario;
    sc.controls = std::move(controls);
    sc.horizon = static_cast<int>(horizon);
    sc.gamma = gamma;
    sc.samples = static_cast<int>(samples);
    sc.grid = grid;

    if (config.scenario_name == "vehicle") {
        reject_unknown_keys(scen, "scenario", {"name", "v", "dt", "r", "disturbance"});
        vehicle::VehicleParams params;
        if (scen.contains("v")) params.speed = as_number(scen["v"], "scenario.v");
        if (scen.contains("dt")) params.dt = as_number(scen["dt"], "scenario.dt");
        if (scen.contains("r")) params.radius = as_number(scen["r"], "scenario.r");
        auto model = vehicle::DisturbanceModel::kDisk;
        if (scen.contains("disturbance")) {
            const std::string d = as_string(scen["disturbance"], "scenario.disturbance");
            if (d == "disk")
                model = vehicle::DisturbanceModel::kDisk;
            else if (d == "eight_point")
                model = vehicle::DisturbanceModel::kEightPoint;
            else
                throw ConfigError("scenario.disturbance: expected 'disk' or 'eight_point'");
        }
        try {
            sc.kernel = std::make_shared<vehicle::VehicleKernel>(params, model);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("scenario.") + e.what());
        }
        auto [target, obstacle] = vehicle::moving_square_sets();
        sc.target = std::move(target);
        sc.obstacle = std::move(obstacle);
    } else if (config.scenario_name == "chain") {
        config.chain = parse_chain(scen, grid, sc.controls, sc.horizon);
        sc.target = config.chain->target;
        sc.obstacle = config.chain->obstacle;
        sc.kernel = std::make_shared<oracle::ChainKernel>(config.chain);
    } else {
        throw ConfigError("scenario.name: expected 'vehicle' or 'chain'");
    }

    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    if (config.estimator_mode == ExpectationEstimator::Mode::kExact &&
        !sc.kernel->has_exact_successors())
        throw ConfigError("estimator: 'exact' requires a finite-support kernel "
                          "(chain, or vehicle with eight_point disturbance)");

    // Canonical fingerprint: the whole config with the effective seed
    // substituted, dumped with sorted keys.
    json canonical = root;
    canonical["seed"] = config.seed;
    const std::string dump = canonical.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    config.fingerprint = hex;

    return config;
}

} // namespace

RunConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config_json(root, seed_override);
}

RunConfig load_config(const std::filesystem::path& path,
                      std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, seed_override);
}

Policy make_policy(const RunConfig& config, std::shared_ptr<const ValueStore> store) {
    const std::string& name = config.policy_name;
    if (name == "heading") return vehicle::make_heading_policy(true);
    if (name == "heading_literal") return vehicle::make_heading_policy(false);
    if (name.starts_with("constant:")) {
        const double u = std::stod(name.substr(9));
        return [u](const State&, int) { return u; };
    }
    if (name == "optimal") {
        if (!store)
            throw ConfigError("policy: 'optimal' needs a solved value store (--values)");
        return optimal_policy(std::move(store), config.scenario, config.estimator());
    }
    throw ConfigError("policy: unknown policy '" + name + "'");
}

} // namespace reachprob
