#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aloha/errors.hpp"
#include "aloha/sigmoid.hpp"

namespace aloha {

/// A point of the feasible play space: one transmission probability per player.
using PlayVector = std::vector<double>;

/// Per-axis closed/open interval bounds, one [lo, hi] pair per player.
using Box = std::vector<std::array<double, 2>>;

/// Which noise modulation the players apply.
enum class Variant {
    ThroughputDecreasing, ///< h_i = eta * y_i * (1 - v_i)^2
    IdleTime,             ///< h_i = eta * v_i / prod_{j != i} (1 - v_j)
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Per-player demand and play-map shape.
struct PlayerParams {
    double y = 0.0; ///< demand: target throughput, in (0,1)
    double gamma = 0.4;
    double delta = 1.0;
    double w = 1.0;

    SigmoidParams sigmoid() const { return {gamma, delta, w}; }
    double v_lo() const { return gamma * (delta - 1.0); }
    double v_hi() const { return gamma * (delta + 1.0); }

    /// Throws ConfigError; `field` prefixes the message ("game.players[0]").
    void validate(const std::string& field = {}) const;
};

/// Full description of one game: players, loss-aversion level, noise variant.
struct GameConfig {
    std::vector<PlayerParams> players;
    double eta = 1.0; ///< loss-aversion meta-parameter, >= 0 (0 turns the noise off)
    Variant variant = Variant::ThroughputDecreasing;

    std::size_t size() const { return players.size(); }
    std::vector<double> demands() const;

    /// Feasible play box D (open per-player intervals from the sigmoid range).
    Box box() const;
    /// Center of D, v_i = gamma_i * delta_i.
    PlayVector center() const;
    /// True when every v_i sits strictly inside D with the given margin.
    bool interior(std::span<const double> v, double margin = 0.0) const;

    void validate() const;
};

/// theta_i = v_i * prod_{j != i} (1 - v_j).
double throughput(std::span<const double> v, std::size_t i);

/// prod_{j != i} (1 - v_j): the channel idle time seen by player i.
double idle_time(std::span<const double> v, std::size_t i);

/// Better-response drift of player i, d v_i/dt = y_i / idle_time_i - v_i.
/// Throws std::domain_error when some other player transmits with probability 1.
double drift(std::span<const double> v, const GameConfig& cfg, std::size_t i);
std::vector<double> drift_field(std::span<const double> v, const GameConfig& cfg);

/// Lyapunov function of the noise-free dynamics:
///   prod_i y_i/(1-v_i) - sum_j (v_j/(1-v_j) + log(1-v_j)) * prod_{i != j} y_i.
/// Nondecreasing along drift trajectories; requires v_i < 1.
double lyapunov(std::span<const double> v, std::span<const double> demands);

/// Analytic Jacobian of the drift field; row i holds d drift_i / d v_j.
std::vector<std::vector<double>> drift_jacobian(std::span<const double> v,
                                                const GameConfig& cfg);

enum class Stability { Stable, Saddle, Unstable };
std::string to_string(Stability s);

/// Classify an interior equilibrium by the eigenvalue signs of the drift
/// Jacobian. The Jacobian is similar to a symmetric matrix under a positive
/// diagonal scaling, so its spectrum is real.
///
/// Pre: ||drift(v)||_inf <= 1e-9. Throws IndeterminateClassification when an
/// eigenvalue lies within 1e-8 of zero.
Stability classify_equilibrium(std::span<const double> v, const GameConfig& cfg);

/// All interior Nash equilibria (zeros of the drift strictly inside D),
/// sorted lexicographically. n = 2 uses the closed-form quadratic; larger
/// games use damped Newton from a start grid.
std::vector<PlayVector> interior_equilibria(const GameConfig& cfg);

/// Closed-form path, n = 2 only: eliminating v_1 from the two fixed-point
/// equations leaves v_2^2 - (1 - y_1 + y_2) v_2 + y_2 = 0.
std::vector<PlayVector> interior_equilibria_closed_form(const GameConfig& cfg);

/// Iterative path for any n: damped Newton on the drift field from a start
/// grid over D, de-duplicating converged roots.
std::vector<PlayVector> interior_equilibria_newton(const GameConfig& cfg);

/// The all-transmit deadlock point (stable boundary equilibrium where every
/// throughput is zero). Reported separately from the interior list.
PlayVector deadlock_point(std::size_t n);

} // namespace aloha
