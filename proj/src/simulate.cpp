#include "aloha/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace aloha {

void SimConfig::validate(const std::string& field) const {
    auto fail = [&](const char* sub, const char* what) {
        throw ConfigError(field + "." + sub, what);
    };
    if (!(epsilon > 0.0)) fail("epsilon", "must be positive");
    if (steps == 0) fail("steps", "must be positive");
    if (burn_in >= steps) fail("burn_in", "must be smaller than steps");
    if (record_stride == 0) fail("record_stride", "must be >= 1");
    if (u_clamp && !(*u_clamp > 0.0)) fail("u_clamp", "must be positive");
}

void RegionSpec::validate(const GameConfig& cfg, const std::string& field) const {
    if (bounds.size() != cfg.size())
        throw ConfigError(field + ".bounds", "one [lo, hi] pair per player required");
    const Box d = cfg.box();
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        const std::string sub = field + ".bounds[" + std::to_string(i) + "]";
        if (!(bounds[i][0] < bounds[i][1]))
            throw ConfigError(sub, "lower bound must be below upper bound");
        if (bounds[i][1] <= d[i][0] || bounds[i][0] >= d[i][1])
            throw ConfigError(sub, "region does not intersect the feasible play box");
    }
}

bool RegionSpec::contains(std::span<const double> v) const {
    for (std::size_t i = 0; i < bounds.size(); ++i)
        if (v[i] < bounds[i][0] || v[i] > bounds[i][1]) return false;
    return true;
}

double modulation(std::span<const double> v, const GameConfig& cfg, std::size_t i) {
    if (i >= cfg.size()) throw std::out_of_range("modulation: player index out of range");
    switch (cfg.variant) {
    case Variant::ThroughputDecreasing: {
        const double one_m = 1.0 - v[i];
        return cfg.eta * cfg.players[i].y * one_m * one_m;
    }
    case Variant::IdleTime: {
        const double p = idle_time(v, i);
        if (p == 0.0)
            throw std::domain_error("modulation: singular configuration, another "
                                    "player transmits with probability 1");
        return cfg.eta * v[i] / p;
    }
    }
    return 0.0;
}

double diffusion_coefficient(std::span<const double> v, const GameConfig& cfg,
                             std::size_t i) {
    const double h = modulation(v, cfg, i);
    if (h == 0.0) return 0.0;
    const double f = cfg.players[i].sigmoid().slope_at_value(v[i]);
    return std::sqrt(2.0 * h / f);
}

namespace {

struct Stepper {
    const GameConfig& cfg;
    std::vector<double> caps;     // per-player |u| bound
    std::vector<SigmoidParams> g;
    double eps, sqrt_eps;

    Stepper(const GameConfig& c, const SimConfig& sim) : cfg(c), eps(sim.epsilon) {
        sqrt_eps = std::sqrt(eps);
        for (const auto& p : cfg.players) {
            caps.push_back(sim.u_clamp.value_or(8.0 * p.w));
            g.push_back(p.sigmoid());
        }
    }

    // Advances u and refreshes v = g(u). Returns the number of clamped
    // coordinates; throws std::domain_error on non-finite intermediates.
    std::size_t advance(std::vector<double>& u, std::vector<double>& v,
                        std::span<const double> noise) const {
        const std::size_t n = u.size();
        std::size_t clamped = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = drift(v, cfg, i);
            const double s = diffusion_coefficient(v, cfg, i);
            double next = u[i] + d * eps + s * sqrt_eps * noise[i];
            if (!std::isfinite(next))
                throw std::domain_error("non-finite play state");
            if (next > caps[i]) { next = caps[i]; ++clamped; }
            else if (next < -caps[i]) { next = -caps[i]; ++clamped; }
            u[i] = next;
        }
        for (std::size_t i = 0; i < n; ++i) v[i] = g[i].value(u[i]);
        return clamped;
    }
};

} // namespace

std::vector<double> step(std::span<const double> u, const GameConfig& cfg,
                         const SimConfig& sim, std::span<const double> noise) {
    if (noise.size() != cfg.size() || u.size() != cfg.size())
        throw std::invalid_argument("step: state/noise length must match player count");
    Stepper st(cfg, sim);
    std::vector<double> uu(u.begin(), u.end()), v(cfg.size());
    for (std::size_t i = 0; i < cfg.size(); ++i) v[i] = st.g[i].value(uu[i]);
    st.advance(uu, v, noise);
    return uu;
}

Trajectory simulate(const GameConfig& cfg, const SimConfig& sim, const PlayVector& init,
                    const std::vector<RegionSpec>& regions) {
    cfg.validate();
    sim.validate();
    for (const auto& r : regions) r.validate(cfg);
    if (!cfg.interior(init, SigmoidParams::boundary_tol()))
        throw std::invalid_argument("simulate: initial play must be interior to the play box");

    const std::size_t n = cfg.size();
    Stepper st(cfg, sim);

    std::vector<double> u(n), v = init;
    for (std::size_t i = 0; i < n; ++i) u[i] = st.g[i].inverse(init[i]);

    std::mt19937_64 rng(sim.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> noise(n);

    Trajectory out;
    out.seed = sim.seed;
    out.epsilon = sim.epsilon;
    out.steps = sim.steps;
    out.burn_in = sim.burn_in;
    out.samples.push_back({0, v});

    auto& sum = out.summary;
    sum.mean.assign(n, 0.0);
    sum.v_min.assign(n, std::numeric_limits<double>::infinity());
    sum.v_max.assign(n, -std::numeric_limits<double>::infinity());
    std::vector<std::uint64_t> hits(regions.size(), 0);

    for (std::uint64_t k = 1; k <= sim.steps; ++k) {
        for (std::size_t i = 0; i < n; ++i) noise[i] = normal(rng);
        try {
            sum.clamp_events += st.advance(u, v, noise);
        } catch (const std::domain_error& e) {
            throw SimulationDiverged(k, e.what());
        }
        if (k > sim.burn_in) {
            for (std::size_t i = 0; i < n; ++i) {
                sum.mean[i] += v[i];
                sum.v_min[i] = std::min(sum.v_min[i], v[i]);
                sum.v_max[i] = std::max(sum.v_max[i], v[i]);
            }
            for (std::size_t r = 0; r < regions.size(); ++r)
                if (regions[r].contains(v)) ++hits[r];
        }
        if (k % sim.record_stride == 0) out.samples.push_back({k, v});
    }

    sum.tallied_steps = sim.steps - sim.burn_in;
    for (std::size_t i = 0; i < n; ++i) sum.mean[i] /= double(sum.tallied_steps);
    for (std::size_t r = 0; r < regions.size(); ++r)
        sum.occupancy.emplace_back(regions[r].name,
                                   double(hits[r]) / double(sum.tallied_steps));
    return out;
}

void write_trajectory_csv(const Trajectory& t, std::ostream& os) {
    const std::size_t n = t.samples.empty() ? 0 : t.samples.front().v.size();
    os << "step";
    for (std::size_t i = 1; i <= n; ++i) os << ",v" << i;
    os << '\n';
    os.precision(17);
    for (const auto& s : t.samples) {
        os << s.step;
        for (double x : s.v) os << ',' << x;
        os << '\n';
    }
}

} // namespace aloha
