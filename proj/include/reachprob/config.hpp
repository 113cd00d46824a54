#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "reachprob/model.hpp"
#include "reachprob/oracle.hpp"
#include "reachprob/solver.hpp"
#include "reachprob/vehicle.hpp"

namespace reachprob {

/// Configuration problem: message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parsed, validated scenario configuration. The fingerprint hashes the
/// canonical form of every field that can affect solver output (with the
/// effective seed substituted), so it changes exactly when results can.
struct RunConfig {
    Scenario scenario;
    std::string scenario_name;  ///< "vehicle" or "chain"
    std::string policy_name;    ///< "heading", "heading_literal", "optimal", "constant:<v>"
    ExpectationEstimator::Mode estimator_mode = ExpectationEstimator::Mode::kMonteCarlo;
    bool common_random_numbers = true;
    std::uint64_t seed = 0;  ///< effective seed after overrides
    std::string fingerprint;
    /// Set for chain scenarios; the oracle consumes it directly.
    std::shared_ptr<const oracle::FiniteChain> chain;

    ExpectationEstimator estimator() const {
        ExpectationEstimator est;
        est.mode = estimator_mode;
        est.samples = scenario.samples;
        est.seed = seed;
        est.common_random_numbers = common_random_numbers;
        return est;
    }
};

/// Parses and validates a config file. Unknown keys are rejected. When
/// `seed_override` is set it replaces the config's seed before the
/// fingerprint is computed.
RunConfig load_config(const std::filesystem::path& path,
                      std::optional<std::uint64_t> seed_override = std::nullopt);

/// Same, from a JSON string (used by tests).
RunConfig parse_config(const std::string& text,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

/// Builds the policy named by the config. `store` is required (optimal
/// mode) only for policy "optimal"; ConfigError otherwise.
Policy make_policy(const RunConfig& config, std::shared_ptr<const ValueStore> store = nullptr);

} // namespace reachprob
