#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>

#include "aloha/game.hpp"
#include "aloha/simulate.hpp"

namespace aloha {

/// Log of the unnormalized stationary density of the play diffusion.
///
/// ThroughputDecreasing: Lambda(v) / (eta * Y) - log prod_i (1 - v_i)^2,
/// with Y = prod_i y_i and Lambda the Lyapunov function from game.hpp.
/// IdleTime: sum_i (y_i/eta - 1) log v_i + (1/eta) prod_i (1 - v_i).
///
/// Requires eta > 0; domain errors only at the exact variant boundary
/// (some v_i = 1, respectively v_i = 0).
double exponent(std::span<const double> v, const GameConfig& cfg);

/// Domain of the stationary density: the feasible play box. The idle-time
/// variant additionally requires delta = 1 so the box is (0, 2*gamma_i)^n.
Box density_domain(const GameConfig& cfg);

/// Checks the stationarity gradient identity
///   d_i log p(v) = drift_i / h_i - d_i log h_i
/// against a central finite difference of exponent(). Returns the max over i
/// of |fd - closed| / max(1, |closed|).
double logp_gradient_identity(std::span<const double> v, const GameConfig& cfg,
                              double fd_step = 1e-6);

/// Tensor grid of exponent values with its log normalizer.
struct DensityGrid {
    GameConfig game;
    Box domain;
    std::size_t resolution = 0;            ///< midpoint nodes per axis
    std::vector<std::vector<double>> axes; ///< node coordinates per axis
    std::vector<double> exponents;         ///< row-major, last axis fastest
    double log_z = 0.0;
    double log_z_coarse = 0.0;             ///< at resolution/2
    double log_z_delta = 0.0;              ///< |log_z - log_z_coarse|
};

/// Log-space composite midpoint normalization over the density domain.
/// Open rule: no node touches the boundary, so the integrable edge
/// singularities stay finite. n <= 4, resolution >= 32.
DensityGrid normalize(const GameConfig& cfg, std::size_t resolution);

/// Probability of an axis-aligned region under the normalized density.
/// The region is clipped to the domain and integrated on its own midpoint
/// grid (same per-axis node count as the DensityGrid). Empty intersection
/// yields 0.
double region_probability(const DensityGrid& grid, const RegionSpec& region);

struct RegionProbability {
    double value = 0.0;
    double refinement_delta = 0.0; ///< |p(resolution) - p(resolution/2)|
    bool empty_intersection = false;
};
RegionProbability region_probability_detail(const DensityGrid& grid,
                                            const RegionSpec& region);

/// CSV export "v1,v2,exponent,density" over the grid nodes. n = 2 only.
void write_density_surface_csv(const DensityGrid& grid, std::ostream& os);

/// log of the integral of exp(f) over `box` by the open composite midpoint
/// rule, accumulated in log space. Exposed so tests can feed custom exponents.
double log_integral_midpoint(const Box& box, std::size_t res_per_axis,
                             const std::function<double(std::span<const double>)>& f);

} // namespace aloha
