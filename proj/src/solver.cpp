#include "reachprob/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "reachprob/parallel.hpp"

namespace reachprob {

namespace {

constexpr std::uint64_t kNoCachedSeed = 0;

/// Per-thread buffers reused across grid points. The noise buffer is keyed
/// by its stream seed so a shared stream (common random numbers) is drawn
/// once per grid point and reused for every control.
struct Scratch {
    std::vector<State> noise;
    std::uint64_t noise_seed = kNoCachedSeed;
    bool noise_valid = false;
    std::vector<State> states;
    std::vector<Successor> successors;
};

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double expectation_impl(const ValueField& next, const StochasticKernel& kernel,
                        const State& s, double u, const ExpectationEstimator& est,
                        std::uint64_t stream_seed, Scratch& scratch) {
    if (est.mode == ExpectationEstimator::Mode::kExact) {
        if (!kernel.has_exact_successors())
            throw std::logic_error("expectation: exact mode requires a finite-support kernel");
        kernel.exact_successors(s, u, scratch.successors);
        double acc = 0.0;
        for (const Successor& succ : scratch.successors)
            acc += succ.prob * interpolate(next, succ.state);
        return clamp01(acc);
    }

    const int m = est.samples;
    if (m < 1) throw std::invalid_argument("expectation: sample count must be >= 1");
    double acc = 0.0;
    if (kernel.has_additive_noise()) {
        if (!scratch.noise_valid || scratch.noise_seed != stream_seed ||
            scratch.noise.size() != static_cast<std::size_t>(m)) {
            scratch.noise.resize(static_cast<std::size_t>(m));
            RngStream rng(stream_seed);
            kernel.draw_noise(rng, scratch.noise);
            scratch.noise_seed = stream_seed;
            scratch.noise_valid = true;
        }
        const State det = kernel.deterministic_successor(s, u);
        for (const State& n : scratch.noise) acc += interpolate(next, det + n);
    } else {
        scratch.states.resize(static_cast<std::size_t>(m));
        RngStream rng(stream_seed);
        kernel.sample_batch(s, u, rng, scratch.states);
        for (const State& t : scratch.states) acc += interpolate(next, t);
    }
    return clamp01(acc / static_cast<double>(m));
}

ValueField backstep(const Scenario& sc, const Policy* policy, const ValueField& v_next,
                    const ExpectationEstimator& est, int threads) {
    sc.validate();
    const int k_next = v_next.time_index();
    if (k_next < 1)
        throw std::invalid_argument("backstep: input field must have time_index >= 1");
    if (v_next.spec() != sc.grid)
        throw std::invalid_argument("backstep: field grid does not match scenario grid");
    const int k = k_next - 1;

    std::vector<double> values(sc.grid.total_points());
    parallel_for(sc.grid.total_points(), threads, [&](std::size_t begin, std::size_t end) {
        Scratch scratch;
        for (std::size_t p = begin; p < end; ++p) {
            const State s = sc.grid.point_of_flat(p);
            // Case shortcut: inside the obstacle or target the recursion's
            // min/max collapses and no sampling is needed.
            if (sc.obstacle(s, k)) {
                values[p] = 0.0;
                continue;
            }
            if (sc.target(s, k)) {
                values[p] = 1.0;
                continue;
            }
            if (policy) {
                const double u = (*policy)(s, k);
                values[p] = expectation_impl(v_next, *sc.kernel, s, u, est,
                                             solve_stream_seed(est.seed, k, p, 0), scratch);
            } else {
                double best = 0.0;
                for (int c = 0; c < sc.controls.size(); ++c) {
                    const double e = expectation_impl(
                        v_next, *sc.kernel, s, sc.controls[c], est,
                        solve_stream_seed(est.seed, k, p, control_slot(est, c)), scratch);
                    if (e > best) best = e;
                }
                values[p] = best;
            }
        }
    });
    return ValueField(sc.grid, k, std::move(values));
}

ValueStore solve(const Scenario& sc, const Policy* policy, const ExpectationEstimator& est,
                 const SolveOptions& options) {
    sc.validate();
    using clock = std::chrono::steady_clock;
    std::vector<ValueField> fields;
    fields.reserve(static_cast<std::size_t>(sc.horizon) + 1);

    auto report = [&](const ValueField& f, clock::time_point started) {
        if (!options.progress) return;
        const auto vals = f.values();
        const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
        const double secs = std::chrono::duration<double>(clock::now() - started).count();
        options.progress(f.time_index(), secs, *lo, *hi);
    };

    auto t0 = clock::now();
    fields.push_back(terminal_field(sc, options.threads));
    report(fields.back(), t0);
    for (int k = sc.horizon; k >= 1; --k) {
        t0 = clock::now();
        fields.push_back(backstep(sc, policy, fields.back(), est, options.threads));
        report(fields.back(), t0);
    }
    std::reverse(fields.begin(), fields.end());
    return ValueStore(policy ? SolveMode::kFixedPolicy : SolveMode::kOptimal, sc.gamma,
                      options.fingerprint, std::move(fields));
}

} // namespace

ValueStore::ValueStore(SolveMode mode, double gamma, std::string fingerprint,
                       std::vector<ValueField> fields_by_k)
    : mode_(mode), gamma_(gamma), fingerprint_(std::move(fingerprint)),
      fields_(std::move(fields_by_k)) {
    if (fields_.empty()) throw std::invalid_argument("ValueStore: needs at least one field");
    if (!(gamma_ >= 0.0 && gamma_ <= 1.0))
        throw std::invalid_argument("ValueStore: gamma must lie in [0, 1]");
    for (std::size_t k = 0; k < fields_.size(); ++k) {
        if (fields_[k].time_index() != static_cast<int>(k))
            throw std::invalid_argument("ValueStore: fields must cover k = 0..T in order");
        if (fields_[k].spec() != fields_[0].spec())
            throw std::invalid_argument("ValueStore: all fields must share one grid");
    }
}

const ValueField& ValueStore::field(int k) const {
    if (k < 0 || k > horizon())
        throw std::out_of_range("ValueStore: time index " + std::to_string(k) +
                                " outside [0, " + std::to_string(horizon()) + "]");
    return fields_[static_cast<std::size_t>(k)];
}

ValueField terminal_field(const Scenario& sc, int threads) {
    sc.validate();
    const int T = sc.horizon;
    return fill(
        sc.grid,
        [&](const State& s) {
            const int i = indicator_target(sc.target, s, T);
            const int o = indicator_obstacle_complement(sc.obstacle, s, T);
            return static_cast<double>(std::min(i, o));
        },
        T, threads);
}

double expectation(const ValueField& next, const StochasticKernel& kernel, const State& s,
                   double u, const ExpectationEstimator& est, std::uint64_t stream_seed) {
    Scratch scratch;
    return expectation_impl(next, kernel, s, u, est, stream_seed, scratch);
}

ValueField backstep_fixed(const Scenario& sc, const Policy& policy, const ValueField& v_next,
                          const ExpectationEstimator& est, int threads) {
    return backstep(sc, &policy, v_next, est, threads);
}

ValueField backstep_optimal(const Scenario& sc, const ValueField& v_next,
                            const ExpectationEstimator& est, int threads) {
    return backstep(sc, nullptr, v_next, est, threads);
}

ValueStore solve_fixed(const Scenario& sc, const Policy& policy,
                       const ExpectationEstimator& est, const SolveOptions& options) {
    return solve(sc, &policy, est, options);
}

ValueStore solve_optimal(const Scenario& sc, const ExpectationEstimator& est,
                         const SolveOptions& options) {
    return solve(sc, nullptr, est, options);
}

namespace {

std::uint64_t hash_state(const State& s) {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(s.size()));
    for (int i = 0; i < s.size(); ++i) {
        std::uint64_t bits;
        static_assert(sizeof(double) == sizeof(bits));
        std::memcpy(&bits, &s.data()[i], sizeof bits);
        h = mix64(h ^ bits);
    }
    return h;
}

} // namespace

Policy optimal_policy(std::shared_ptr<const ValueStore> store, const Scenario& sc,
                      const ExpectationEstimator& est) {
    if (!store) throw std::invalid_argument("optimal_policy: store is missing");
    if (store->mode() != SolveMode::kOptimal)
        throw std::invalid_argument("optimal_policy: store was not solved in optimal mode");
    sc.validate();
    if (store->horizon() != sc.horizon)
        throw std::invalid_argument("optimal_policy: store horizon does not match scenario");

    return [store = std::move(store), kernel = sc.kernel, controls = sc.controls,
            est](const State& s, int k) {
        const int T = store->horizon();
        if (k < 0 || k > T)
            throw std::invalid_argument("optimal_policy: time index " + std::to_string(k) +
                                        " outside [0, " + std::to_string(T) + "]");
        if (k == T) return controls[0];
        const ValueField& next = store->field(k + 1);
        Scratch scratch;
        double best = 0.0;
        int best_c = 0;
        const std::uint64_t state_h = hash_state(s);
        for (int c = 0; c < controls.size(); ++c) {
            const std::uint64_t seed =
                derive_stream(est.seed, stream_tag::kPolicy, static_cast<std::uint64_t>(k),
                              state_h, control_slot(est, c));
            const double e = expectation_impl(next, *kernel, s, controls[c], est, seed, scratch);
            if (e > best) {
                best = e;
                best_c = c;
            }
        }
        return controls[best_c];
    };
}

namespace {

std::string field_filename(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "v_%04d.vfld", k);
    return buf;
}

const char* mode_name(SolveMode mode) {
    return mode == SolveMode::kFixedPolicy ? "fixed" : "optimal";
}

} // namespace

void save_store(const ValueStore& store, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["format"] = "reachprob-valuestore";
    manifest["version"] = 1;
    manifest["mode"] = mode_name(store.mode());
    manifest["horizon"] = store.horizon();
    manifest["gamma"] = store.gamma();
    manifest["fingerprint"] = store.fingerprint();
    std::vector<std::string> files;
    for (int k = 0; k <= store.horizon(); ++k) {
        const std::string name = field_filename(k);
        write_field(store.field(k), dir / name);
        files.push_back(name);
    }
    manifest["files"] = files;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("save_store: cannot write manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
    if (!out) throw std::runtime_error("save_store: manifest write failed");
}

ValueStore load_store(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw FormatError("load_store: cannot open manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("load_store: malformed manifest: ") + e.what());
    }
    try {
        if (manifest.at("format").get<std::string>() != "reachprob-valuestore")
            throw FormatError("load_store: unrecognized manifest format");
        if (manifest.at("version").get<int>() != 1)
            throw FormatError("load_store: unsupported manifest version");
        const std::string mode_str = manifest.at("mode").get<std::string>();
        if (mode_str != "fixed" && mode_str != "optimal")
            throw FormatError("load_store: unknown mode " + mode_str);
        const int horizon = manifest.at("horizon").get<int>();
        const double gamma = manifest.at("gamma").get<double>();
        const std::string fingerprint = manifest.at("fingerprint").get<std::string>();
        const auto files = manifest.at("files").get<std::vector<std::string>>();
        if (static_cast<int>(files.size()) != horizon + 1)
            throw FormatError("load_store: file list does not match horizon");
        std::vector<ValueField> fields;
        fields.reserve(files.size());
        for (const auto& name : files) fields.push_back(read_field(dir / name));
        return ValueStore(mode_str == "fixed" ? SolveMode::kFixedPolicy : SolveMode::kOptimal,
                          gamma, fingerprint, std::move(fields));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("load_store: malformed manifest: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("load_store: inconsistent store: ") + e.what());
    }
}

} // namespace reachprob
