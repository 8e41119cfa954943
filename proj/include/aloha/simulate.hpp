#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aloha/game.hpp"

namespace aloha {

/// Discrete-time integration settings.
struct SimConfig {
    double epsilon = 1e-3;          ///< time step
    std::uint64_t steps = 100000;   ///< total iterations
    std::uint64_t burn_in = 0;      ///< prefix excluded from statistics
    std::uint64_t seed = 1;
    std::uint64_t record_stride = 1; ///< trajectory subsampling
    std::optional<double> u_clamp;  ///< |u_i| cap; unset = 8 * w_i per player

    void validate(const std::string& field = "sim") const;
};

/// Axis-aligned closed box in play space, for occupancy statistics.
struct RegionSpec {
    std::string name;
    std::vector<std::array<double, 2>> bounds; ///< per-player [lo, hi]

    void validate(const GameConfig& cfg, const std::string& field = "region") const;
    bool contains(std::span<const double> v) const;
};

/// Noise modulation h_i of the chosen variant; >= 0.
double modulation(std::span<const double> v, const GameConfig& cfg, std::size_t i);

/// Diffusion coefficient sigma_i = sqrt(2 h_i / f_i), where f_i is the
/// sigmoid slope at v_i. Returns 0 whenever h_i = 0; throws the play-bound
/// error when f_i vanishes with h_i > 0.
double diffusion_coefficient(std::span<const double> v, const GameConfig& cfg,
                             std::size_t i);

/// One Euler-Maruyama update in u-space:
///   u_i' = clamp(u_i + drift_i * eps + sigma_i * sqrt(eps) * noise_i),
/// with v = g(u) componentwise. `noise` holds one standard normal per player.
std::vector<double> step(std::span<const double> u, const GameConfig& cfg,
                         const SimConfig& sim, std::span<const double> noise);

struct TrajectorySample {
    std::uint64_t step = 0;
    PlayVector v;
};

struct OccupancySummary {
    std::vector<double> mean, v_min, v_max; ///< per player, post burn-in
    std::vector<std::pair<std::string, double>> occupancy; ///< region -> fraction
    std::uint64_t clamp_events = 0; ///< coordinate clamps that actually bit
    std::uint64_t tallied_steps = 0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples; ///< every record_stride steps, plus step 0
    OccupancySummary summary;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    std::uint64_t steps = 0;
    std::uint64_t burn_in = 0;
};

/// Run the play diffusion from an interior initial play. Deterministic for a
/// fixed (seed, config); occupancy fractions are over post-burn-in steps.
Trajectory simulate(const GameConfig& cfg, const SimConfig& sim, const PlayVector& init,
                    const std::vector<RegionSpec>& regions);

/// CSV export with header "step,v1,...,vn".
void write_trajectory_csv(const Trajectory& t, std::ostream& os);

} // namespace aloha
