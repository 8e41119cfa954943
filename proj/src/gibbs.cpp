#include "aloha/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace aloha {

namespace {

void require_positive_eta(const GameConfig& cfg) {
    if (!(cfg.eta > 0.0))
        throw std::domain_error("stationary density requires eta > 0");
}

} // namespace

double exponent(std::span<const double> v, const GameConfig& cfg) {
    require_positive_eta(cfg);
    const std::size_t n = cfg.size();
    if (v.size() != n) throw std::invalid_argument("exponent: size mismatch");

    switch (cfg.variant) {
    case Variant::ThroughputDecreasing: {
        double big_y = 1.0, log_h = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(v[i] < 1.0))
                throw std::domain_error("exponent: requires v_i < 1");
            big_y *= cfg.players[i].y;
            log_h += 2.0 * std::log1p(-v[i]);
        }
        return lyapunov(v, cfg.demands()) / (cfg.eta * big_y) - log_h;
    }
    case Variant::IdleTime: {
        double acc = 0.0, prod = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(v[i] > 0.0))
                throw std::domain_error("exponent: requires v_i > 0");
            acc += (cfg.players[i].y / cfg.eta - 1.0) * std::log(v[i]);
            prod *= 1.0 - v[i];
        }
        return acc + prod / cfg.eta;
    }
    }
    throw std::logic_error("exponent: unknown variant");
}

Box density_domain(const GameConfig& cfg) {
    if (cfg.variant == Variant::IdleTime) {
        for (std::size_t i = 0; i < cfg.size(); ++i)
            if (cfg.players[i].delta != 1.0)
                throw std::domain_error(
                    "idle-time stationary density requires delta = 1 "
                    "(play box (0, 2*gamma))");
    }
    return cfg.box();
}

double logp_gradient_identity(std::span<const double> v, const GameConfig& cfg,
                              double fd_step) {
    require_positive_eta(cfg);
    const Box dom = density_domain(cfg);
    const std::size_t n = cfg.size();
    for (std::size_t i = 0; i < n; ++i)
        if (!(v[i] > dom[i][0] + fd_step && v[i] < dom[i][1] - fd_step))
            throw std::domain_error("logp_gradient_identity: point too close to "
                                    "the domain boundary for the stencil");

    std::vector<double> vp(v.begin(), v.end()), vm(v.begin(), v.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = modulation(v, cfg, i);
        if (h == 0.0)
            throw std::domain_error("logp_gradient_identity: vanishing modulation");

        double closed = 0.0;
        if (cfg.variant == Variant::ThroughputDecreasing) {
            closed = drift(v, cfg, i) / h + 2.0 / (1.0 - v[i]);
        } else {
            closed = (cfg.players[i].y / cfg.eta - 1.0) / v[i] -
                     idle_time(v, i) / cfg.eta;
        }

        vp[i] = v[i] + fd_step;
        vm[i] = v[i] - fd_step;
        const double fd = (exponent(vp, cfg) - exponent(vm, cfg)) / (2.0 * fd_step);
        vp[i] = vm[i] = v[i];

        worst = std::max(worst, std::fabs(fd - closed) / std::max(1.0, std::fabs(closed)));
    }
    return worst;
}

double log_integral_midpoint(const Box& box, std::size_t res_per_axis,
                             const std::function<double(std::span<const double>)>& f) {
    const std::size_t n = box.size();
    if (n == 0 || res_per_axis == 0)
        throw std::invalid_argument("log_integral_midpoint: empty box or resolution");

    double log_cell = 0.0;
    for (const auto& [lo, hi] : box) {
        if (!(hi > lo)) throw std::invalid_argument("log_integral_midpoint: empty axis");
        log_cell += std::log((hi - lo) / double(res_per_axis));
    }

    // Online log-sum-exp over the tensor grid, last axis fastest.
    double peak = -std::numeric_limits<double>::infinity(), acc = 0.0;
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> node(n);
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (box[i][1] - box[i][0]) / double(res_per_axis);
            node[i] = box[i][0] + (double(idx[i]) + 0.5) * d;
        }
        const double e = f(node);
        if (std::isnan(e) || e == std::numeric_limits<double>::infinity())
            throw std::domain_error("log_integral_midpoint: non-finite exponent at node (" +
                                    std::to_string(node[0]) + ", ...)");
        if (e > peak) {
            acc = acc * std::exp(peak - e) + 1.0;
            peak = e;
        } else {
            acc += std::exp(e - peak);
        }
        std::size_t k = n;
        do {
            --k;
            if (++idx[k] < res_per_axis) break;
            idx[k] = 0;
        } while (k > 0);
        if (k == 0 && idx[0] == 0) break;
    }
    return peak + std::log(acc) + log_cell;
}

DensityGrid normalize(const GameConfig& cfg, std::size_t resolution) {
    require_positive_eta(cfg);
    const std::size_t n = cfg.size();
    if (n > 4)
        throw std::invalid_argument("normalize: tensor quadrature supports n <= 4");
    if (resolution < 32)
        throw std::invalid_argument("normalize: resolution must be >= 32");
    double nodes = 1.0;
    for (std::size_t i = 0; i < n; ++i) nodes *= double(resolution);
    if (nodes > double(1u << 24))
        throw std::invalid_argument("normalize: grid would exceed the node budget");

    DensityGrid grid;
    grid.game = cfg;
    grid.domain = density_domain(cfg);
    grid.resolution = resolution;
    grid.axes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (grid.domain[i][1] - grid.domain[i][0]) / double(resolution);
        grid.axes[i].resize(resolution);
        for (std::size_t k = 0; k < resolution; ++k)
            grid.axes[i][k] = grid.domain[i][0] + (double(k) + 0.5) * d;
    }

    grid.exponents.reserve(std::size_t(nodes));
    auto eval = [&](std::span<const double> v) {
        const double e = exponent(v, cfg);
        grid.exponents.push_back(e);
        return e;
    };
    grid.log_z = log_integral_midpoint(grid.domain, resolution, eval);
    grid.log_z_coarse = log_integral_midpoint(
        grid.domain, resolution / 2,
        [&](std::span<const double> v) { return exponent(v, cfg); });
    grid.log_z_delta = std::fabs(grid.log_z - grid.log_z_coarse);
    return grid;
}

RegionProbability region_probability_detail(const DensityGrid& grid,
                                            const RegionSpec& region) {
    const std::size_t n = grid.domain.size();
    if (region.bounds.size() != n)
        throw std::invalid_argument("region_probability: dimension mismatch");

    Box clipped(n);
    for (std::size_t i = 0; i < n; ++i) {
        clipped[i][0] = std::max(region.bounds[i][0], grid.domain[i][0]);
        clipped[i][1] = std::min(region.bounds[i][1], grid.domain[i][1]);
        if (!(clipped[i][0] < clipped[i][1]))
            return {0.0, 0.0, true};
    }

    auto f = [&](std::span<const double> v) { return exponent(v, grid.game); };
    const double fine = std::exp(log_integral_midpoint(clipped, grid.resolution, f) -
                                 grid.log_z);
    const double coarse = std::exp(
        log_integral_midpoint(clipped, grid.resolution / 2, f) - grid.log_z_coarse);
    return {fine, std::fabs(fine - coarse), false};
}

double region_probability(const DensityGrid& grid, const RegionSpec& region) {
    return region_probability_detail(grid, region).value;
}

void write_density_surface_csv(const DensityGrid& grid, std::ostream& os) {
    if (grid.domain.size() != 2)
        throw std::invalid_argument("density surface export requires n = 2");
    os << "v1,v2,exponent,density\n";
    os.precision(17);
    const std::size_t res = grid.resolution;
    for (std::size_t i = 0; i < res; ++i)
        for (std::size_t j = 0; j < res; ++j) {
            const double e = grid.exponents[i * res + j];
            os << grid.axes[0][i] << ',' << grid.axes[1][j] << ',' << e << ','
               << std::exp(e - grid.log_z) << '\n';
        }
}

} // namespace aloha
