#include "aloha/experiment.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

namespace aloha {

using nlohmann::json;

double parse_number(const json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        try {
            std::size_t used = 0;
            const auto slash = s.find('/');
            if (slash != std::string::npos) {
                const double num = std::stod(s.substr(0, slash), &used);
                if (used != slash) throw std::invalid_argument(s);
                const double den = std::stod(s.substr(slash + 1), &used);
                if (used != s.size() - slash - 1) throw std::invalid_argument(s);
                if (den == 0.0) throw ConfigError(field, "zero denominator");
                return num / den;
            }
            const double x = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return x;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(field, "expected a number or rational string, got '" + s + "'");
        }
    }
    throw ConfigError(field, "expected a number or rational string");
}

namespace {

const json& require(const json& j, const char* key, const std::string& field) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(field, "missing required entry");
    return j.at(key);
}

std::uint64_t parse_u64(const json& j, const std::string& field) {
    if (!j.is_number_integer() && !j.is_number_unsigned())
        throw ConfigError(field, "expected a non-negative integer");
    if (j.is_number_integer() && j.get<std::int64_t>() < 0)
        throw ConfigError(field, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

} // namespace

ExperimentConfig experiment_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("", "config root must be a JSON object");
    const auto version = require(j, "schema_version", "schema_version");
    if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
        throw ConfigError("schema_version",
                          "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");

    ExperimentConfig cfg;
    const json& game = require(j, "game", "game");
    cfg.game.variant =
        variant_from_string(require(game, "variant", "game.variant").get<std::string>());
    cfg.game.eta = parse_number(require(game, "eta", "game.eta"), "game.eta");

    const json& players = require(game, "players", "game.players");
    if (!players.is_array())
        throw ConfigError("game.players", "expected an array");
    for (std::size_t i = 0; i < players.size(); ++i) {
        const std::string field = "game.players[" + std::to_string(i) + "]";
        const json& p = players.at(i);
        PlayerParams pp;
        pp.y = parse_number(require(p, "y", field + ".y"), field + ".y");
        pp.gamma = parse_number(require(p, "gamma", field + ".gamma"), field + ".gamma");
        pp.delta = parse_number(require(p, "delta", field + ".delta"), field + ".delta");
        if (p.contains("w")) pp.w = parse_number(p.at("w"), field + ".w");
        cfg.game.players.push_back(pp);
    }
    cfg.game.validate();

    if (j.contains("resolution")) {
        cfg.resolution = parse_u64(j.at("resolution"), "resolution");
        if (cfg.resolution < 32)
            throw ConfigError("resolution", "must be >= 32");
    }

    if (j.contains("sim")) {
        const json& s = j.at("sim");
        SimConfig sim;
        if (s.contains("epsilon")) sim.epsilon = parse_number(s.at("epsilon"), "sim.epsilon");
        sim.steps = parse_u64(require(s, "steps", "sim.steps"), "sim.steps");
        // default burn-in: 10% of the run
        sim.burn_in = s.contains("burn_in") ? parse_u64(s.at("burn_in"), "sim.burn_in")
                                            : sim.steps / 10;
        if (s.contains("seed")) sim.seed = parse_u64(s.at("seed"), "sim.seed");
        if (s.contains("record_stride"))
            sim.record_stride = parse_u64(s.at("record_stride"), "sim.record_stride");
        if (s.contains("u_clamp")) sim.u_clamp = parse_number(s.at("u_clamp"), "sim.u_clamp");
        sim.validate("sim");
        cfg.sim = sim;
    }

    if (j.contains("regions")) {
        const json& regions = j.at("regions");
        if (!regions.is_array()) throw ConfigError("regions", "expected an array");
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const std::string field = "regions[" + std::to_string(r) + "]";
            const json& jr = regions.at(r);
            RegionSpec spec;
            spec.name = require(jr, "name", field + ".name").get<std::string>();
            const json& bounds = require(jr, "bounds", field + ".bounds");
            if (!bounds.is_array())
                throw ConfigError(field + ".bounds", "expected an array of [lo, hi] pairs");
            for (std::size_t i = 0; i < bounds.size(); ++i) {
                const std::string bf = field + ".bounds[" + std::to_string(i) + "]";
                const json& pair = bounds.at(i);
                if (!pair.is_array() || pair.size() != 2)
                    throw ConfigError(bf, "expected [lo, hi]");
                spec.bounds.push_back(
                    {parse_number(pair.at(0), bf), parse_number(pair.at(1), bf)});
            }
            spec.validate(cfg.game, field);
            cfg.regions.push_back(std::move(spec));
        }
    }

    if (j.contains("init")) {
        const json& init = j.at("init");
        if (!init.is_array() || init.size() != cfg.game.size())
            throw ConfigError("init", "expected one play value per player");
        PlayVector v;
        for (std::size_t i = 0; i < init.size(); ++i)
            v.push_back(parse_number(init.at(i), "init[" + std::to_string(i) + "]"));
        if (!cfg.game.interior(v, SigmoidParams::boundary_tol()))
            throw ConfigError("init", "must be strictly interior to the play box");
        cfg.init = v;
    }

    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string())
            throw ConfigError("output_dir", "expected a string");
        cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("", "invalid JSON in " + path.string() + ": " + e.what());
    }
    return experiment_from_json(j);
}

json experiment_to_json(const ExperimentConfig& cfg) {
    json players = json::array();
    for (const auto& p : cfg.game.players)
        players.push_back({{"y", p.y}, {"gamma", p.gamma}, {"delta", p.delta}, {"w", p.w}});
    json j{{"schema_version", kSchemaVersion},
           {"game",
            {{"variant", to_string(cfg.game.variant)},
             {"eta", cfg.game.eta},
             {"players", players}}},
           {"resolution", cfg.resolution}};
    if (cfg.sim) {
        j["sim"] = {{"epsilon", cfg.sim->epsilon},
                    {"steps", cfg.sim->steps},
                    {"burn_in", cfg.sim->burn_in},
                    {"seed", cfg.sim->seed},
                    {"record_stride", cfg.sim->record_stride}};
        if (cfg.sim->u_clamp) j["sim"]["u_clamp"] = *cfg.sim->u_clamp;
    }
    if (!cfg.regions.empty()) {
        json regions = json::array();
        for (const auto& r : cfg.regions) {
            json bounds = json::array();
            for (const auto& b : r.bounds) bounds.push_back({b[0], b[1]});
            regions.push_back({{"name", r.name}, {"bounds", bounds}});
        }
        j["regions"] = regions;
    }
    if (cfg.init) j["init"] = *cfg.init;
    if (cfg.output_dir) j["output_dir"] = *cfg.output_dir;
    return j;
}

json equilibria_report(const ExperimentConfig& cfg) {
    const auto points = interior_equilibria(cfg.game);
    json interior = json::array();
    for (const auto& v : points) {
        double residual = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            residual = std::max(residual, std::fabs(drift(v, cfg.game, i)));
        std::string classification;
        try {
            classification = to_string(classify_equilibrium(v, cfg.game));
        } catch (const IndeterminateClassification&) {
            classification = "indeterminate";
        }
        json thr = json::array();
        for (std::size_t i = 0; i < v.size(); ++i) thr.push_back(throughput(v, i));
        interior.push_back({{"v", v},
                            {"classification", classification},
                            {"drift_residual", residual},
                            {"throughput", thr}});
    }
    // The all-transmit deadlock is a stable boundary equilibrium of the
    // unconstrained dynamics; it is never produced by the interior solver.
    json report{{"schema_version", kSchemaVersion},
                {"interior", interior},
                {"feasible", !points.empty()},
                {"deadlock",
                 {{"v", deadlock_point(cfg.game.size())},
                  {"classification", "stable (boundary)"},
                  {"note", "all players transmit; every throughput is zero"}}},
                {"config", experiment_to_json(cfg)}};
    return report;
}

json density_report(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.game.size() != 2)
        throw ConfigError("game.players", "density command requires exactly 2 players");
    const DensityGrid grid = normalize(cfg.game, cfg.resolution);

    std::filesystem::create_directories(out_dir);
    const auto surface_path = out_dir / "surface.csv";
    {
        std::ofstream os(surface_path);
        if (!os) throw std::runtime_error("cannot write " + surface_path.string());
        write_density_surface_csv(grid, os);
    }

    json regions = json::array();
    for (const auto& r : cfg.regions) {
        const auto p = region_probability_detail(grid, r);
        regions.push_back({{"name", r.name},
                           {"probability", p.value},
                           {"log10_probability", p.value > 0.0 ? std::log10(p.value) : -INFINITY},
                           {"refinement_delta", p.refinement_delta},
                           {"empty_intersection", p.empty_intersection}});
    }
    return json{{"schema_version", kSchemaVersion},
                {"variant", to_string(cfg.game.variant)},
                {"log_z", grid.log_z},
                {"log_z_refinement_delta", grid.log_z_delta},
                {"resolution", grid.resolution},
                {"regions", regions},
                {"surface_csv", surface_path.string()},
                {"config", experiment_to_json(cfg)}};
}

json simulation_report(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                       std::optional<std::uint64_t> seed_override) {
    if (!cfg.sim) throw ConfigError("sim", "simulate requires a sim section");
    SimConfig sim = *cfg.sim;
    if (seed_override) sim.seed = *seed_override;

    const PlayVector init = cfg.init.value_or(cfg.game.center());
    const Trajectory traj = simulate(cfg.game, sim, init, cfg.regions);

    std::filesystem::create_directories(out_dir);
    const auto traj_path = out_dir / "trajectory.csv";
    {
        std::ofstream os(traj_path);
        if (!os) throw std::runtime_error("cannot write " + traj_path.string());
        write_trajectory_csv(traj, os);
    }

    json occupancy = json::object();
    for (const auto& [name, frac] : traj.summary.occupancy) occupancy[name] = frac;
    return json{{"schema_version", kSchemaVersion},
                {"seed", traj.seed},
                {"epsilon", traj.epsilon},
                {"steps", traj.steps},
                {"burn_in", traj.burn_in},
                {"init", init},
                {"occupancy", occupancy},
                {"mean", traj.summary.mean},
                {"min", traj.summary.v_min},
                {"max", traj.summary.v_max},
                {"clamp_events", traj.summary.clamp_events},
                {"trajectory_csv", traj_path.string()},
                {"config", experiment_to_json(cfg)}};
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
    if (s == "eta") return SweepParameter::Eta;
    if (s == "sup-range") return SweepParameter::SupRange;
    throw ConfigError("param", "unknown sweep parameter '" + s +
                                   "' (expected eta or sup-range)");
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, SweepParameter p,
                                   double value) {
    ExperimentConfig out = cfg;
    switch (p) {
    case SweepParameter::Eta:
        out.game.eta = value;
        break;
    case SweepParameter::SupRange:
        for (std::size_t i = 0; i < out.game.players.size(); ++i) {
            auto& pl = out.game.players[i];
            const double lo = pl.v_lo();
            if (!(value > lo))
                throw ConfigError("values", "sup-range value must exceed the lower play bound");
            pl.gamma = 0.5 * (value - lo);
            pl.delta = (value + lo) / (value - lo);
            pl.validate("game.players[" + std::to_string(i) + "]");
        }
        break;
    }
    out.game.validate();
    for (const auto& r : out.regions) r.validate(out.game);
    return out;
}

std::string sweep_csv(const ExperimentConfig& cfg, SweepParameter p,
                      const std::vector<double>& values, bool with_occupancy) {
    if (values.empty()) throw ConfigError("values", "sweep needs at least one value");
    if (cfg.regions.empty()) throw ConfigError("regions", "sweep needs at least one region");
    if (with_occupancy && !cfg.sim)
        throw ConfigError("sim", "occupancy sweep requires a sim section");

    struct Row {
        double value;
        std::string region;
        RegionProbability prob;
        std::optional<double> occupancy;
    };

    auto run_one = [&](double value) {
        const ExperimentConfig swept = apply_sweep_value(cfg, p, value);
        const DensityGrid grid = normalize(swept.game, swept.resolution);
        std::vector<Row> rows;
        std::vector<std::pair<std::string, double>> occ;
        if (with_occupancy) {
            const Trajectory t = simulate(swept.game, *swept.sim,
                                          swept.init.value_or(swept.game.center()),
                                          swept.regions);
            occ = t.summary.occupancy;
        }
        for (std::size_t r = 0; r < swept.regions.size(); ++r) {
            Row row{value, swept.regions[r].name,
                    region_probability_detail(grid, swept.regions[r]), {}};
            if (with_occupancy) row.occupancy = occ[r].second;
            rows.push_back(std::move(row));
        }
        return rows;
    };

    std::vector<std::future<std::vector<Row>>> futures;
    for (double v : values)
        futures.push_back(std::async(std::launch::async, run_one, v));

    std::ostringstream os;
    os.precision(17);
    const char* param_name = p == SweepParameter::Eta ? "eta" : "sup-range";
    os << "parameter,value,region,probability,refinement_delta";
    if (with_occupancy) os << ",occupancy";
    os << '\n';
    for (auto& fut : futures) {
        for (const auto& row : fut.get()) {
            os << param_name << ',' << row.value << ',' << row.region << ','
               << row.prob.value << ',' << row.prob.refinement_delta;
            if (with_occupancy) os << ',' << *row.occupancy;
            os << '\n';
        }
    }
    return os.str();
}

} // namespace aloha
