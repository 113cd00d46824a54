#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reachprob/config.hpp"
#include "reachprob/reachset.hpp"
#include "reachprob/simulate.hpp"
#include "reachprob/solver.hpp"

namespace {

using namespace reachprob;

constexpr int kExitBadInput = 2;
constexpr int kExitBadOutput = 3;

/// --seed flag wins, then REACHPROB_SEED, then the config's seed.
std::optional<std::uint64_t> resolve_seed_override(const std::optional<std::uint64_t>& flag) {
    if (flag) return flag;
    const char* env = std::getenv("REACHPROB_SEED");
    if (!env) return std::nullopt;
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("REACHPROB_SEED: cannot parse '" + std::string(env) +
                          "' as a 64-bit seed");
    }
}

int axis_by_name(const std::string& name, int ndims) {
    if (name == "x" && ndims >= 1) return 0;
    if (name == "y" && ndims >= 2) return 1;
    if (name == "theta" && ndims >= 3) return 2;
    try {
        std::size_t used = 0;
        const int d = std::stoi(name, &used);
        if (used == name.size() && d >= 0 && d < ndims) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("axis '" + name + "' does not exist (use x, y, theta or 0.." +
                      std::to_string(ndims - 1) + ")");
}

std::pair<std::string, double> parse_axis_assignment(const std::string& token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
        throw ConfigError("expected axis=value, got '" + token + "'");
    try {
        std::size_t used = 0;
        const std::string text = token.substr(eq + 1);
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing");
        return {token.substr(0, eq), v};
    } catch (const std::exception&) {
        throw ConfigError("cannot parse value in '" + token + "'");
    }
}

State parse_init(const std::string& text, int ndims) {
    std::vector<double> coords;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string part =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            coords.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("--init: cannot parse component '" + part + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (static_cast<int>(coords.size()) != ndims)
        throw ConfigError("--init: expected " + std::to_string(ndims) + " components, got " +
                          std::to_string(coords.size()));
    State s = State::zeros(ndims);
    for (int d = 0; d < ndims; ++d) s[d] = coords[static_cast<std::size_t>(d)];
    return s;
}

struct SolveArgs {
    std::string config_path;
    std::string mode;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

int run_solve(const SolveArgs& args) {
    const RunConfig config = load_config(args.config_path, resolve_seed_override(args.seed));
    const ExpectationEstimator est = config.estimator();

    SolveOptions options;
    options.threads = args.threads;
    options.fingerprint = config.fingerprint;
    options.progress = [](int k, double secs, double vmin, double vmax) {
        std::printf("k=%-4d wall=%.3fs min=%.6f max=%.6f\n", k, secs, vmin, vmax);
        std::fflush(stdout);
    };

    ValueStore store = [&] {
        if (args.mode == "optimal") return solve_optimal(config.scenario, est, options);
        if (config.policy_name == "optimal")
            throw ConfigError("policy: 'optimal' cannot drive a fixed-policy solve; "
                              "choose heading/heading_literal/constant");
        const Policy policy = make_policy(config);
        return solve_fixed(config.scenario, policy, est, options);
    }();

    try {
        save_store(store, args.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadOutput;
    }
    std::printf("wrote %d field files + manifest to %s\n", store.horizon() + 1,
                args.out_dir.c_str());
    return 0;
}

struct SliceArgs {
    std::string field_path;
    std::vector<std::string> fixes;
    std::string out_path;
};

int run_slice(const SliceArgs& args) {
    const ValueField field = read_field(args.field_path);
    std::map<int, double> fixed;
    for (const auto& token : args.fixes) {
        const auto [name, value] = parse_axis_assignment(token);
        const int axis = axis_by_name(name, field.spec().ndims());
        if (fixed.contains(axis))
            throw ConfigError("axis '" + name + "' fixed twice");
        fixed[axis] = value;
    }
    SliceTable table = [&] {
        try {
            return slice(field, fixed);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }();
    try {
        write_slice_csv(table, args.out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadOutput;
    }
    std::printf("wrote %zu rows to %s\n", table.rows.size(), args.out_path.c_str());
    return 0;
}

struct SimulateArgs {
    std::string config_path;
    std::string policy;
    std::string values_dir;
    std::string init;
    int n = 1000;
    std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args) {
    RunConfig config = load_config(args.config_path, resolve_seed_override(args.seed));
    if (!args.policy.empty()) {
        config.policy_name = args.policy;
        if (config.policy_name != "optimal" && config.policy_name != "heading" &&
            config.policy_name != "heading_literal" &&
            !config.policy_name.starts_with("constant:"))
            throw ConfigError("--policy: unknown policy '" + config.policy_name + "'");
    }
    const State s0 = parse_init(args.init, config.scenario.grid.ndims());

    std::shared_ptr<const ValueStore> store;
    if (!args.values_dir.empty()) {
        store = std::make_shared<const ValueStore>(load_store(args.values_dir));
        if (store->fingerprint() != config.fingerprint)
            std::cerr << "warning: value store fingerprint does not match this config\n";
    }
    if (config.policy_name == "optimal" && !store)
        throw ConfigError("--values: required when --policy is 'optimal'");

    const Policy policy = make_policy(config, store);
    const int n = args.n;
    if (n < 1) throw ConfigError("--n: must be >= 1");
    const double p = empirical_probability(config.scenario, policy, s0, n, config.seed);
    const int successes = static_cast<int>(std::lround(p * n));
    std::printf("rollouts %d\n", n);
    std::printf("successes %d\n", successes);
    std::printf("empirical_probability %.6f\n", p);
    if (store)
        std::printf("predicted_v0 %.6f\n", interpolate(store->field(0), s0));
    return 0;
}

struct ValidateArgs {
    std::string config_path;
    std::string values_dir;
    std::optional<double> gamma;
    std::string slice_spec = "theta=0";
    int points_per_axis = 15;
    int n = 1000;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    double band = 0.05;
    int threads = 0;
    std::optional<int> policy_samples;
};

int run_validate(const ValidateArgs& args) {
    RunConfig config = load_config(args.config_path, resolve_seed_override(args.seed));
    auto store = std::make_shared<const ValueStore>(load_store(args.values_dir));
    if (store->fingerprint() != config.fingerprint)
        throw ConfigError("value store fingerprint does not match this config "
                          "(stale solve?); re-run solve or fix the config");

    const auto [axis_name, axis_value] = parse_axis_assignment(args.slice_spec);
    const int fixed_axis = axis_by_name(axis_name, config.scenario.grid.ndims());
    if (args.points_per_axis < 1) throw ConfigError("--points-per-axis: must be >= 1");
    if (args.n < 1) throw ConfigError("--n: must be >= 1");
    const double gamma = args.gamma.value_or(config.scenario.gamma);
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("--gamma: must lie in [0, 1]");

    const std::vector<State> points =
        subgrid_points(config.scenario.grid, fixed_axis, axis_value, args.points_per_axis);

    Policy policy;
    if (store->mode() == SolveMode::kOptimal) {
        RunConfig policy_config = config;
        policy_config.policy_name = "optimal";
        if (args.policy_samples) policy_config.scenario.samples = *args.policy_samples;
        policy = make_policy(policy_config, store);
    } else {
        policy = make_policy(config);
    }

    const ValidationReport report = validate(config.scenario, *store, policy, points, args.n,
                                             gamma, config.seed, args.band, args.threads);
    if (!args.out_path.empty()) {
        try {
            write_validation_csv(report, config.scenario.grid.ndims(), args.out_path);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitBadOutput;
        }
    }
    std::printf("points %zu\n", report.points.size());
    std::printf("rollouts_per_point %d\n", report.n_rollouts);
    std::printf("gamma %.6f\n", report.gamma);
    std::printf("band %.6f\n", report.band);
    std::printf("mean_abs_gap %.6f\n", report.mean_abs_gap);
    std::printf("excluded_boundary_points %d\n", report.excluded);
    std::printf("agreement_rate %.6f\n", report.agreement_rate);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic reach-avoid set solver"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand(
        "solve", "Run the backward recursion and write value fields + manifest");
    solve_cmd->add_option("--config", solve_args.config_path, "Scenario config (JSON)")
        ->required();
    solve_cmd->add_option("--mode", solve_args.mode, "fixed | optimal")
        ->required()
        ->check(CLI::IsMember({"fixed", "optimal"}));
    solve_cmd->add_option("--out", solve_args.out_dir, "Output directory")->required();
    solve_cmd->add_option("--seed", solve_args.seed, "Seed override");
    solve_cmd->add_option("--threads", solve_args.threads, "Worker threads (default: all)");

    SliceArgs slice_args;
    auto* slice_cmd =
        app.add_subcommand("slice", "Export a 2D slice of a value field as CSV");
    slice_cmd->add_option("--field", slice_args.field_path, "Value-field file")->required();
    slice_cmd->add_option("--fix", slice_args.fixes, "axis=value (repeat per fixed axis)");
    slice_cmd->add_option("--out", slice_args.out_path, "Output CSV path")->required();

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Monte Carlo rollouts from one initial state");
    sim_cmd->add_option("--config", sim_args.config_path, "Scenario config (JSON)")
        ->required();
    sim_cmd->add_option("--policy", sim_args.policy,
                        "heading | heading_literal | optimal | constant:<v> "
                        "(default: config's policy)");
    sim_cmd->add_option("--values", sim_args.values_dir,
                        "Value-store directory (required for --policy optimal)");
    sim_cmd->add_option("--init", sim_args.init, "Initial state, e.g. \"1.5,0,-0.5\"")
        ->required();
    sim_cmd->add_option("--n", sim_args.n, "Number of rollouts");
    sim_cmd->add_option("--seed", sim_args.seed, "Seed override");

    ValidateArgs val_args;
    auto* val_cmd = app.add_subcommand(
        "validate", "Compare solved V_0 against rollout frequencies on a slice");
    val_cmd->add_option("--config", val_args.config_path, "Scenario config (JSON)")
        ->required();
    val_cmd->add_option("--values", val_args.values_dir, "Value-store directory")->required();
    val_cmd->add_option("--gamma", val_args.gamma, "Threshold (default: config's gamma)");
    val_cmd->add_option("--slice", val_args.slice_spec, "Fixed axis, e.g. theta=0");
    val_cmd->add_option("--points-per-axis", val_args.points_per_axis,
                        "Test points per free axis");
    val_cmd->add_option("--n", val_args.n, "Rollouts per test point");
    val_cmd->add_option("--seed", val_args.seed, "Seed override");
    val_cmd->add_option("--out", val_args.out_path, "Report CSV path");
    val_cmd->add_option("--band", val_args.band,
                        "Exclude |V0 - gamma| < band from the agreement rate");
    val_cmd->add_option("--threads", val_args.threads, "Worker threads (default: all)");
    val_cmd->add_option("--policy-samples", val_args.policy_samples,
                        "Monte Carlo samples per optimal-policy evaluation "
                        "(default: config's samples)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadInput;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(solve_args);
        if (slice_cmd->parsed()) return run_slice(slice_args);
        if (sim_cmd->parsed()) return run_simulate(sim_args);
        if (val_cmd->parsed()) return run_validate(val_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
