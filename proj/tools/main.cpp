#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aloha/experiment.hpp"

namespace {

using aloha::ConfigError;
using aloha::ExperimentConfig;

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const auto comma = csv.find(',', pos);
        const std::string token =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!token.empty()) out.push_back(aloha::parse_number(nlohmann::json(token), "values"));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("values", "no sweep values given");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary analysis and simulation of the loss-averse "
                 "slotted-ALOHA play diffusion"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> resolution;

    auto* cmd_equilibria =
        app.add_subcommand("equilibria", "locate and classify the Nash equilibria");
    auto* cmd_density =
        app.add_subcommand("density", "normalize the stationary density (n = 2)");
    auto* cmd_simulate = app.add_subcommand("simulate", "run the play diffusion");
    auto* cmd_sweep = app.add_subcommand("sweep", "region probability across a parameter");

    for (CLI::App* sub : {cmd_equilibria, cmd_density, cmd_simulate, cmd_sweep}) {
        sub->add_option("--config", config_path, "experiment config (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: current)");
        sub->add_option("--seed", seed, "override the configured RNG seed");
        sub->add_option("--resolution", resolution, "override the quadrature resolution");
    }

    std::string sweep_param;
    std::string sweep_values;
    bool sweep_with_sim = false;
    cmd_sweep->add_option("--param", sweep_param, "eta or sup-range")->required();
    cmd_sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    cmd_sweep->add_flag("--simulate", sweep_with_sim, "also simulate each value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ExperimentConfig cfg = aloha::load_experiment(config_path);
        if (resolution) {
            if (*resolution < 32) throw ConfigError("resolution", "must be >= 32");
            cfg.resolution = *resolution;
        }
        const std::filesystem::path out(
            out_dir.value_or(cfg.output_dir.value_or(".")));

        if (cmd_equilibria->parsed()) {
            const auto report = aloha::equilibria_report(cfg);
            write_json(report, out / "equilibria.json");
            for (const auto& e : report.at("interior")) {
                std::cout << "equilibrium [";
                for (const auto& x : e.at("v")) std::cout << ' ' << x.get<double>();
                std::cout << " ]  " << e.at("classification").get<std::string>()
                          << "  residual " << e.at("drift_residual").get<double>() << '\n';
            }
            std::cout << (report.at("feasible").get<bool>()
                              ? "demands feasible"
                              : "no interior equilibrium: demands infeasible")
                      << "; deadlock at all-ones (stable boundary)\n";
            std::cout << "report: " << (out / "equilibria.json").string() << '\n';
        } else if (cmd_density->parsed()) {
            const auto report = aloha::density_report(cfg, out);
            write_json(report, out / "density-report.json");
            std::cout << "logZ " << report.at("log_z").get<double>() << " (refinement delta "
                      << report.at("log_z_refinement_delta").get<double>() << ")\n";
            for (const auto& r : report.at("regions"))
                std::cout << "P[" << r.at("name").get<std::string>()
                          << "] = " << r.at("probability").get<double>()
                          << "  (refinement delta "
                          << r.at("refinement_delta").get<double>() << ")\n";
            std::cout << "report: " << (out / "density-report.json").string() << '\n';
        } else if (cmd_simulate->parsed()) {
            const auto report = aloha::simulation_report(cfg, out, seed);
            write_json(report, out / "occupancy.json");
            std::cout << "seed " << report.at("seed").get<std::uint64_t>() << ", "
                      << report.at("steps").get<std::uint64_t>() << " steps\n";
            for (const auto& [name, frac] : report.at("occupancy").items())
                std::cout << "occupancy[" << name << "] = " << frac.get<double>() << '\n';
            if (const auto clamps = report.at("clamp_events").get<std::uint64_t>(); clamps > 0)
                std::cout << "u-clamp active on " << clamps << " coordinate updates\n";
            std::cout << "report: " << (out / "occupancy.json").string() << '\n';
        } else if (cmd_sweep->parsed()) {
            const auto param = aloha::sweep_parameter_from_string(sweep_param);
            const auto values = parse_values(sweep_values);
            const std::string csv = aloha::sweep_csv(cfg, param, values, sweep_with_sim);
            std::filesystem::create_directories(out);
            const auto csv_path = out / "sweep.csv";
            std::ofstream os(csv_path);
            if (!os) throw std::runtime_error("cannot write " + csv_path.string());
            os << csv;
            std::cout << csv;
            std::cout << "csv: " << csv_path.string() << '\n';
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
