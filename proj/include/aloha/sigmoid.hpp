#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aloha {

/// Saturating play map v = gamma * (tanh(u/w) + delta).
///
/// Maps the unconstrained coordinate u onto the open interval
/// (gamma*(delta-1), gamma*(delta+1)), which must sit inside [0,1] so that v
/// is a transmission probability. With delta = 1 the lower bound is exactly 0.
struct SigmoidParams {
    double gamma = 0.4; ///< scale, 0 < gamma <= 1/(1+delta)
    double delta = 1.0; ///< offset, 1 <= delta < 2
    double w = 1.0;     ///< slope scale, > 0

    double lo() const { return gamma * (delta - 1.0); }
    double hi() const { return gamma * (delta + 1.0); }

    void validate() const {
        if (!(delta >= 1.0 && delta < 2.0))
            throw std::invalid_argument("sigmoid delta must lie in [1, 2)");
        if (!(gamma > 0.0 && gamma <= 1.0 / (1.0 + delta)))
            throw std::invalid_argument("sigmoid gamma must lie in (0, 1/(1+delta)]");
        if (!(w > 0.0))
            throw std::invalid_argument("sigmoid slope scale w must be positive");
    }

    double value(double u) const { return gamma * (std::tanh(u / w) + delta); }

    /// Analytic slope dv/du at u.
    double slope(double u) const {
        const double t = std::tanh(u / w);
        return gamma / w * (1.0 - t * t);
    }

    /// Slope expressed through the play value: f(v) = (gamma/w)(1 - (v/gamma - delta)^2).
    /// Strictly positive on the open range; throws at or beyond the bounds,
    /// where the slope vanishes.
    double slope_at_value(double v) const {
        guard_interior(v, "sigmoid slope vanishes at the play bounds");
        const double x = v / gamma - delta;
        return gamma / w * (1.0 - x * x);
    }

    double inverse(double v) const {
        guard_interior(v, "play value at or beyond the open sigmoid range");
        return w * std::atanh(v / gamma - delta);
    }

    /// Values this close to the interval ends carry no usable resolution in
    /// double precision; inverse() and slope_at_value() reject them.
    static constexpr double boundary_tol() {
        return 8.0 * std::numeric_limits<double>::epsilon();
    }

private:
    void guard_interior(double v, const char* what) const {
        if (!(v > lo() + boundary_tol() && v < hi() - boundary_tol()))
            throw std::domain_error(what);
    }
};

} // namespace aloha
