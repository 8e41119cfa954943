#include "aloha/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aloha {

std::string to_string(Variant v) {
    switch (v) {
    case Variant::ThroughputDecreasing: return "throughput-decreasing";
    case Variant::IdleTime: return "idle-time";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "throughput-decreasing") return Variant::ThroughputDecreasing;
    if (s == "idle-time") return Variant::IdleTime;
    throw ConfigError("variant", "unknown variant '" + s +
                                     "' (expected throughput-decreasing or idle-time)");
}

std::string to_string(Stability s) {
    switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Saddle: return "saddle";
    case Stability::Unstable: return "unstable";
    }
    return "?";
}

void PlayerParams::validate(const std::string& field) const {
    auto fail = [&](const char* sub, const std::string& what) {
        throw ConfigError(field.empty() ? sub : field + "." + sub, what);
    };
    if (!(y > 0.0 && y < 1.0)) fail("y", "demand must lie in (0, 1)");
    if (!(delta >= 1.0 && delta < 2.0)) fail("delta", "must lie in [1, 2)");
    if (!(gamma > 0.0 && gamma <= 1.0 / (1.0 + delta)))
        fail("gamma", "must lie in (0, 1/(1+delta)]");
    if (!(w > 0.0)) fail("w", "must be positive");
}

std::vector<double> GameConfig::demands() const {
    std::vector<double> y(players.size());
    for (std::size_t i = 0; i < players.size(); ++i) y[i] = players[i].y;
    return y;
}

Box GameConfig::box() const {
    Box b(players.size());
    for (std::size_t i = 0; i < players.size(); ++i)
        b[i] = {players[i].v_lo(), players[i].v_hi()};
    return b;
}

PlayVector GameConfig::center() const {
    PlayVector v(players.size());
    for (std::size_t i = 0; i < players.size(); ++i)
        v[i] = players[i].gamma * players[i].delta;
    return v;
}

bool GameConfig::interior(std::span<const double> v, double margin) const {
    if (v.size() != players.size()) return false;
    for (std::size_t i = 0; i < players.size(); ++i)
        if (!(v[i] > players[i].v_lo() + margin && v[i] < players[i].v_hi() - margin))
            return false;
    return true;
}

void GameConfig::validate() const {
    if (players.size() < 2)
        throw ConfigError("game.players", "at least two players required");
    if (!(eta >= 0.0))
        throw ConfigError("game.eta", "must be >= 0");
    for (std::size_t i = 0; i < players.size(); ++i)
        players[i].validate("game.players[" + std::to_string(i) + "]");
}

double throughput(std::span<const double> v, std::size_t i) {
    if (i >= v.size()) throw std::out_of_range("throughput: player index out of range");
    return v[i] * idle_time(v, i);
}

double idle_time(std::span<const double> v, std::size_t i) {
    if (i >= v.size()) throw std::out_of_range("idle_time: player index out of range");
    double p = 1.0;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (j != i) p *= 1.0 - v[j];
    return p;
}

double drift(std::span<const double> v, const GameConfig& cfg, std::size_t i) {
    if (i >= cfg.size()) throw std::out_of_range("drift: player index out of range");
    const double p = idle_time(v, i);
    if (p == 0.0)
        throw std::domain_error("drift: singular configuration, another player "
                                "transmits with probability 1");
    return cfg.players[i].y / p - v[i];
}

std::vector<double> drift_field(std::span<const double> v, const GameConfig& cfg) {
    std::vector<double> d(cfg.size());
    for (std::size_t i = 0; i < cfg.size(); ++i) d[i] = drift(v, cfg, i);
    return d;
}

double lyapunov(std::span<const double> v, std::span<const double> demands) {
    const std::size_t n = v.size();
    if (demands.size() != n) throw std::invalid_argument("lyapunov: size mismatch");
    double prod = 1.0, big_y = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(v[i] < 1.0)) throw std::domain_error("lyapunov: requires v_i < 1");
        prod *= demands[i] / (1.0 - v[i]);
        big_y *= demands[i];
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double one_m = 1.0 - v[j];
        sum += (v[j] / one_m + std::log1p(-v[j])) * (big_y / demands[j]);
    }
    return prod - sum;
}

std::vector<std::vector<double>> drift_jacobian(std::span<const double> v,
                                                const GameConfig& cfg) {
    const std::size_t n = cfg.size();
    std::vector<std::vector<double>> jac(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double p = idle_time(v, i);
        if (p == 0.0) throw std::domain_error("drift_jacobian: singular configuration");
        for (std::size_t j = 0; j < n; ++j)
            jac[i][j] = (i == j) ? -1.0 : cfg.players[i].y / (p * (1.0 - v[j]));
    }
    return jac;
}

namespace {

// Cyclic Jacobi eigenvalues of a small symmetric matrix.
std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
    return eig;
}

// Solve a (n x n) x = b by Gaussian elimination with partial pivoting.
bool lu_solve(std::vector<std::vector<double>> a, std::vector<double> b,
              std::vector<double>& x) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
            b[r] -= m * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace

Stability classify_equilibrium(std::span<const double> v, const GameConfig& cfg) {
    const std::size_t n = cfg.size();
    if (inf_norm(drift_field(v, cfg)) > 1e-9)
        throw std::invalid_argument("classify_equilibrium: point is not an equilibrium");

    // J has J_ii = -1, J_ij = r_i * s_j with r_i = y_i/P_i, s_j = 1/(1-v_j);
    // diag(sqrt(r_i/s_i)) makes it symmetric, so the spectrum is real.
    std::vector<std::vector<double>> m(n, std::vector<double>(n));
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = cfg.players[i].y / idle_time(v, i);
        const double s = 1.0 / (1.0 - v[i]);
        t[i] = std::sqrt(r * s);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = (i == j) ? -1.0 : t[i] * t[j];

    const auto eig = symmetric_eigenvalues(std::move(m));
    bool any_pos = false, any_neg = false;
    for (double lam : eig) {
        if (std::fabs(lam) < 1e-8)
            throw IndeterminateClassification(
                "classify_equilibrium: eigenvalue within 1e-8 of zero");
        (lam > 0 ? any_pos : any_neg) = true;
    }
    if (any_pos && any_neg) return Stability::Saddle;
    return any_pos ? Stability::Unstable : Stability::Stable;
}

std::vector<PlayVector> interior_equilibria_closed_form(const GameConfig& cfg) {
    if (cfg.size() != 2)
        throw std::invalid_argument("closed-form equilibria require exactly 2 players");
    const double y1 = cfg.players[0].y, y2 = cfg.players[1].y;
    const double b = 1.0 - y1 + y2;
    const double disc = b * b - 4.0 * y2;
    std::vector<PlayVector> out;
    if (disc < 0.0) return out;
    const double root = std::sqrt(disc);
    for (double v2 : {0.5 * (b - root), 0.5 * (b + root)}) {
        if (!(v2 < 1.0)) continue;
        const double v1 = y1 / (1.0 - v2);
        PlayVector v{v1, v2};
        // polish the quadratic root against rounding
        for (int it = 0; it < 2 && v[0] < 1.0 && v[1] < 1.0; ++it) {
            auto f = drift_field(v, cfg);
            std::vector<double> neg_f{-f[0], -f[1]}, step_dir;
            if (!lu_solve(drift_jacobian(v, cfg), neg_f, step_dir)) break;
            PlayVector trial{v[0] + step_dir[0], v[1] + step_dir[1]};
            if (!(trial[0] < 1.0 && trial[1] < 1.0)) break;
            v = trial;
        }
        if (cfg.interior(v)) out.push_back(std::move(v));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](const PlayVector& a, const PlayVector& b2) {
                              return std::fabs(a[0] - b2[0]) <= 1e-12 &&
                                     std::fabs(a[1] - b2[1]) <= 1e-12;
                          }),
              out.end());
    return out;
}

std::vector<PlayVector> interior_equilibria_newton(const GameConfig& cfg) {
    const std::size_t n = cfg.size();
    const Box d = cfg.box();
    // Exhaustive 16-per-axis start grid up to n = 4, sparser beyond.
    const std::size_t per_axis = n <= 4 ? 16 : 3;

    auto clamp_state = [&](PlayVector& v) {
        for (std::size_t i = 0; i < n; ++i)
            v[i] = std::clamp(v[i], -0.25, 1.0 - 1e-9);
    };

    auto norm2 = [](std::span<const double> f) {
        double s = 0.0;
        for (double x : f) s += x * x;
        return std::sqrt(s);
    };

    std::vector<PlayVector> roots;
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        PlayVector v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = d[i][0] + (idx[i] + 0.5) * (d[i][1] - d[i][0]) / per_axis;

        for (int it = 0; it < 200; ++it) {
            auto f = drift_field(v, cfg);
            const double fn = norm2(f);
            if (inf_norm(f) <= 1e-13) break;
            std::vector<double> neg_f(n), step_dir;
            for (std::size_t i = 0; i < n; ++i) neg_f[i] = -f[i];
            if (!lu_solve(drift_jacobian(v, cfg), neg_f, step_dir)) break;
            double alpha = 1.0;
            PlayVector trial(n);
            bool accepted = false;
            while (alpha >= 1e-4) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = v[i] + alpha * step_dir[i];
                clamp_state(trial);
                if (norm2(drift_field(trial, cfg)) < fn) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5; // damping on step rejection
            }
            if (!accepted) break;
            v = trial;
        }

        if (cfg.interior(v) && inf_norm(drift_field(v, cfg)) <= 1e-12) {
            bool dup = false;
            for (const auto& r : roots) {
                double dist = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    dist = std::max(dist, std::fabs(r[i] - v[i]));
                if (dist <= 1e-6) { dup = true; break; }
            }
            if (!dup) roots.push_back(v);
        }

        std::size_t k = 0;
        while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
        if (k == n) break;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

std::vector<PlayVector> interior_equilibria(const GameConfig& cfg) {
    return cfg.size() == 2 ? interior_equilibria_closed_form(cfg)
                           : interior_equilibria_newton(cfg);
}

PlayVector deadlock_point(std::size_t n) { return PlayVector(n, 1.0); }

} // namespace aloha
