#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aloha/game.hpp"
#include "aloha/gibbs.hpp"
#include "aloha/simulate.hpp"

namespace aloha {

inline constexpr int kSchemaVersion = 1;

/// One experiment: a game, optional simulation settings, named regions,
/// quadrature resolution and an optional initial play (default: box center).
struct ExperimentConfig {
    GameConfig game;
    std::optional<SimConfig> sim;
    std::vector<RegionSpec> regions;
    std::size_t resolution = 512;
    std::optional<PlayVector> init;
    std::optional<std::string> output_dir; ///< default output directory; --out overrides
};

/// Parses a numeric config entry: a JSON number, or a string holding either a
/// rational "a/b" or a plain decimal. Throws ConfigError naming `field`.
double parse_number(const nlohmann::json& j, const std::string& field);

/// Builds and fully validates an experiment from its JSON form (rejects on
/// the first violated invariant, naming the field).
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Resolved config back as JSON; parseable again by experiment_from_json.
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);

/// Interior equilibria + the deadlock point, classified, with drift residuals.
nlohmann::json equilibria_report(const ExperimentConfig& cfg);

/// Normalizes the stationary density, writes surface.csv under out_dir
/// (n = 2), and returns the report (logZ, per-region probabilities,
/// refinement deltas).
nlohmann::json density_report(const ExperimentConfig& cfg,
                              const std::filesystem::path& out_dir);

/// Runs the diffusion, writes trajectory.csv under out_dir, returns the
/// occupancy report. `seed_override` replaces the configured seed.
nlohmann::json simulation_report(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir,
                                 std::optional<std::uint64_t> seed_override = {});

enum class SweepParameter { Eta, SupRange };
SweepParameter sweep_parameter_from_string(const std::string& s);

/// Returns cfg with the swept parameter substituted. SupRange keeps each
/// player's lower play bound and rescales (gamma, delta) to the new sup.
ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, SweepParameter p,
                                   double value);

/// One CSV row per (value, region): analytic region probability and
/// refinement delta, plus simulated occupancy when requested. Values are
/// processed concurrently.
std::string sweep_csv(const ExperimentConfig& cfg, SweepParameter p,
                      const std::vector<double>& values, bool with_occupancy);

} // namespace aloha
