#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace aloha {

/// Configuration or input validation failure. `field` is a dotted path to the
/// offending entry, e.g. "game.players[0].y".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// The iteration produced a non-finite state.
class SimulationDiverged : public std::runtime_error {
public:
    SimulationDiverged(std::uint64_t step, const std::string& what)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
          step_(step) {}

    std::uint64_t step() const noexcept { return step_; }

private:
    std::uint64_t step_;
};

/// Classification refused: an eigenvalue lies inside the indeterminacy band
/// around zero, so the sign pattern cannot be trusted.
class IndeterminateClassification : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace aloha
