// Command-line front end: rates, kernel, evolve, sde, sn, bounds, scenario.
// Exit codes: 0 success, 1 validation failure, 2 numerical failure,
// 3 acceptance-check failure.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "gravkit/bounds.hpp"
#include "gravkit/config.hpp"
#include "gravkit/csv.hpp"
#include "gravkit/errors.hpp"
#include "gravkit/kernels.hpp"
#include "gravkit/lindblad.hpp"
#include "gravkit/rates.hpp"
#include "gravkit/scenario.hpp"
#include "gravkit/snsolver.hpp"
#include "gravkit/unravel.hpp"

namespace {

struct GlobalOpts {
    std::string out_dir = ".";
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

gravkit::ConfigFile load_config(const GlobalOpts& g) {
    if (g.config_path.empty())
        throw gravkit::validation_error("this subcommand needs --config <file>");
    return gravkit::ConfigFile::parse_file(g.config_path);
}

int finish(const gravkit::RunManifest& man) {
    for (const auto& c : man.checks)
        std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": measured "
                  << gravkit::format_double(c.measured) << " (" << c.detail << ")\n";
    std::cout << (man.all_pass() ? "all checks passed" : "CHECKS FAILED") << "\n";
    return man.all_pass() ? 0 : 3;
}

// rates: one CSV row per model for the configured superposition.
int cmd_rates(const GlobalOpts& g) {
    gravkit::ConfigFile cfg = load_config(g);
    const std::string type = cfg.get_string("density", "type");
    gravkit::MassDensity density = [&] {
        if (type == "uniform_sphere")
            return gravkit::MassDensity::uniform_sphere(cfg.get_double("density", "mass_kg"),
                                                        cfg.get_double("density", "radius_m"));
        if (type == "gaussian_ball")
            return gravkit::MassDensity::gaussian_ball(cfg.get_double("density", "mass_kg"),
                                                       cfg.get_double("density", "r0_m"));
        if (type == "point")
            return gravkit::MassDensity::point_mass(cfg.get_double("density", "mass_kg"));
        throw gravkit::validation_error("rates: unsupported density type " + type);
    }();
    const double separation = cfg.get_double("superposition", "separation_m");
    auto spec = gravkit::SuperpositionSpec::two_branch(std::move(density), separation);

    gravkit::CsvWriter csv(
        {"model", "mass_kg", "size_m", "separation_m", "rate_per_s", "time_s", "quad_error"});
    const std::string models = cfg.get_string("rates", "models", "dp,penrose,td-minimal");
    std::istringstream ss(models);
    std::string model;
    while (std::getline(ss, model, ',')) {
        if (model == "dp") {
            const auto r = gravkit::dp_decay_rate(spec);
            csv.raw_row({"dp", gravkit::format_double(spec.density.total_mass()),
                         gravkit::format_double(spec.density.characteristic_size()),
                         gravkit::format_double(separation), gravkit::format_double(r.rate),
                         gravkit::format_double(r.time_constant),
                         gravkit::format_double(r.quad_error)});
        } else if (model == "penrose") {
            const auto p = gravkit::penrose_delta_e(spec);
            csv.raw_row({"penrose", gravkit::format_double(spec.density.total_mass()),
                         gravkit::format_double(spec.density.characteristic_size()),
                         gravkit::format_double(separation),
                         gravkit::format_double(1.0 / p.tau), gravkit::format_double(p.tau),
                         gravkit::format_double(p.quad_error)});
        } else if (model == "td-minimal") {
            const auto r = gravkit::td_decay_rate(spec, gravkit::TDKernel::minimal());
            csv.raw_row({"td-minimal", gravkit::format_double(spec.density.total_mass()),
                         gravkit::format_double(spec.density.characteristic_size()),
                         gravkit::format_double(separation), gravkit::format_double(r.rate),
                         gravkit::format_double(r.time_constant),
                         gravkit::format_double(r.quad_error)});
        } else if (model == "karolyhazy") {
            const auto cell = gravkit::karolyhazy_coherence_cell(
                spec.density.total_mass(), spec.density.characteristic_size());
            csv.raw_row({"karolyhazy", gravkit::format_double(spec.density.total_mass()),
                         gravkit::format_double(spec.density.characteristic_size()),
                         gravkit::format_double(separation),
                         gravkit::format_double(1.0 / cell.tau_k),
                         gravkit::format_double(cell.tau_k), "0"});
        } else {
            throw gravkit::validation_error("rates: unknown model '" + model + "'");
        }
    }
    cfg.finalize();
    gravkit::write_file_atomic(g.out_dir, "rates.csv", csv.str());
    std::cout << "wrote rates.csv\n";
    return 0;
}

// kernel: correlator values on a grid, or one field-realization summary.
int cmd_kernel(const GlobalOpts& g) {
    gravkit::ConfigFile cfg = load_config(g);
    const std::string type = cfg.get_string("kernel", "type", "karolyhazy");
    if (type == "karolyhazy") {
        gravkit::KarolyhazyKernel kernel;
        kernel.lambda_c = cfg.get_double("kernel", "lambda_c_m", 1e-15);
        const auto rs = cfg.get_string("kernel", "r_cutoffs", "0,0.5,1,2,3");
        const auto taus = cfg.get_string("kernel", "tau_cutoffs", "0,0.5,1");
        gravkit::CsvWriter csv({"r_m", "tau_s", "correlation"});
        std::istringstream rss(rs);
        std::string rtok;
        while (std::getline(rss, rtok, ',')) {
            std::istringstream tss(taus);
            std::string ttok;
            while (std::getline(tss, ttok, ',')) {
                const double r = std::stod(rtok) * kernel.lambda_c;
                const double tau = std::stod(ttok) * kernel.lambda_c / kernel.constants.c;
                csv.row({r, tau, kernel.correlation(r, tau)});
            }
        }
        cfg.finalize();
        gravkit::write_file_atomic(g.out_dir, "kernel.csv", csv.str());
        std::cout << "wrote kernel.csv\n";
        return 0;
    }
    if (type == "td-minimal") {
        const auto kernel = gravkit::TDKernel::minimal();
        gravkit::CsvWriter csv({"r_m", "gamma", "decoherence_kernel"});
        for (const double r : {1e-9, 1e-6, 1e-3, 1.0})
            csv.row({r, kernel.gamma(r), gravkit::td_decoherence_kernel(kernel, r)});
        cfg.finalize();
        gravkit::write_file_atomic(g.out_dir, "kernel.csv", csv.str());
        std::cout << "wrote kernel.csv\n";
        return 0;
    }
    throw gravkit::validation_error("kernel: unknown type '" + type + "'");
}

// evolve: off-diagonal magnitudes over a time grid for a pointer system.
int cmd_evolve(const GlobalOpts& g) {
    gravkit::ConfigFile cfg = load_config(g);
    const std::string model = cfg.get_string("evolve", "model");
    const double t_max = cfg.get_double("evolve", "t_max_s");
    const long points = cfg.get_int("evolve", "points", 50);

    const std::string type = cfg.get_string("density", "type");
    gravkit::MassDensity density = [&]() -> gravkit::MassDensity {
        if (type == "uniform_sphere")
            return gravkit::MassDensity::uniform_sphere(cfg.get_double("density", "mass_kg"),
                                                        cfg.get_double("density", "radius_m"));
        if (type == "gaussian_ball")
            return gravkit::MassDensity::gaussian_ball(cfg.get_double("density", "mass_kg"),
                                                       cfg.get_double("density", "r0_m"));
        if (type == "point")
            return gravkit::MassDensity::point_mass(cfg.get_double("density", "mass_kg"));
        throw gravkit::validation_error("evolve: unsupported density type " + type);
    }();
    auto spec = gravkit::SuperpositionSpec::two_branch(
        std::move(density), cfg.get_double("superposition", "separation_m"));
    Eigen::VectorXcd amps(2);
    const double w1 = cfg.get_double("evolve", "weight_branch_a", 0.5);
    amps << std::sqrt(w1), std::sqrt(1.0 - w1);

    gravkit::CsvWriter csv({"time_s", "offdiag_magnitude", "relative_phase"});
    for (long i = 0; i <= points; ++i) {
        const double t = t_max * static_cast<double>(i) / static_cast<double>(points);
        std::complex<double> off;
        if (model == "dp") {
            auto sys = gravkit::PointerSystem::dp(spec, amps);
            off = gravkit::evolve_dp_pointer(sys, t).rho(0, 1);
        } else if (model == "td-minimal") {
            auto sys = gravkit::PointerSystem::dp(spec, amps);
            off = gravkit::evolve_td_pointer(sys, gravkit::TDKernel::minimal(), t).rho(0, 1);
        } else if (model == "karolyhazy") {
            gravkit::KarolyhazyKernel kernel;
            kernel.lambda_c = cfg.get_double("evolve", "lambda_c_m", 1e-15);
            auto sys = gravkit::PointerSystem::from_amplitudes(
                spec, amps, Eigen::MatrixXd::Zero(2, 2));
            off = gravkit::evolve_nonmarkovian_pointer(sys, kernel, t).rho(0, 1);
        } else {
            throw gravkit::validation_error("evolve: unknown model '" + model + "'");
        }
        csv.row({t, std::abs(off), std::arg(off)});
    }
    cfg.finalize();
    gravkit::write_file_atomic(g.out_dir, "evolve.csv", csv.str());
    std::cout << "wrote evolve.csv\n";
    return 0;
}

int cmd_sde(const GlobalOpts& g) {
    gravkit::ConfigFile cfg = load_config(g);
    const std::string model = cfg.get_string("sde", "model", "diosi");
    // Reuse the scenario runners, which emit ensemble.json and CSV series.
    std::string text = "[scenario]\nmodel = " +
                       std::string(model == "diosi" ? "diosi-sde" : "ktm") + "\n";
    gravkit::ConfigFile merged = gravkit::ConfigFile::parse_string(text);
    // Forward the user's sections verbatim.
    std::ostringstream forwarded;
    forwarded << text;
    for (const auto& [section, keys] : cfg.sections()) {
        forwarded << "[" << section << "]\n";
        for (const auto& [k, v] : keys) {
            if (section == "sde" && k == "model") continue;
            forwarded << k << " = " << v << "\n";
        }
    }
    const auto man = gravkit::run_scenario(
        gravkit::ConfigFile::parse_string(forwarded.str()), g.out_dir, g.seed, g.workers);
    return finish(man);
}

int cmd_sn(const GlobalOpts& g) {
    gravkit::ConfigFile cfg = load_config(g);
    const std::string mode = cfg.get_string("sn", "mode", "ground");
    std::string model = mode == "ground" ? "sn-ground" : mode == "free" ? "sn-free" : "epr";
    std::ostringstream forwarded;
    forwarded << "[scenario]\nmodel = " << model << "\n";
    for (const auto& [section, keys] : cfg.sections()) {
        forwarded << "[" << section << "]\n";
        for (const auto& [k, v] : keys) {
            if (section == "sn" && k == "mode") continue;
            forwarded << k << " = " << v << "\n";
        }
    }
    const auto man = gravkit::run_scenario(
        gravkit::ConfigFile::parse_string(forwarded.str()), g.out_dir, g.seed, g.workers);
    return finish(man);
}

int cmd_bounds(const GlobalOpts& g, double r0, const std::string& table_csv) {
    std::vector<gravkit::ExperimentBound> table =
        table_csv.empty() ? gravkit::builtin_bounds() : gravkit::load_bounds_csv(table_csv);
    gravkit::CsvWriter csv({"name", "r0_lower_m", "violated", "note"});
    for (const auto& b : table) {
        const bool v = r0 > 0.0 && b.r0_lower_m > r0;
        csv.raw_row({b.name, gravkit::format_double(b.r0_lower_m),
                     r0 > 0.0 ? (v ? "1" : "0") : "", b.note});
    }
    gravkit::write_file_atomic(g.out_dir, "bounds.csv", csv.str());
    std::cout << csv.str();
    if (r0 > 0.0) {
        const auto violated = gravkit::r0_excluded(r0, table);
        std::cout << "R0 = " << gravkit::format_double(r0) << " m violates " << violated.size()
                  << " bound(s)\n";
    }
    return 0;
}

int cmd_scenario(const GlobalOpts& g, const std::string& name_or_path, bool list) {
    if (list) {
        for (const auto& p : gravkit::scenario_presets()) std::cout << p << "\n";
        return 0;
    }
    gravkit::RunManifest man;
    const auto presets = gravkit::scenario_presets();
    if (std::find(presets.begin(), presets.end(), name_or_path) != presets.end())
        man = gravkit::run_scenario_preset(name_or_path, g.out_dir, g.seed, g.workers);
    else
        man = gravkit::run_scenario(gravkit::ConfigFile::parse_file(name_or_path), g.out_dir,
                                    g.seed, g.workers);
    std::cout << "scenario: " << man.preset << "\n";
    return finish(man);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gravkit: simulation toolkit for non-standard quantum-matter/gravity couplings"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--config", g.config_path, "config file (sectioned key=value)");
    std::uint64_t seed_raw = 0;
    auto* seed_opt = app.add_option("--seed", seed_raw, "master seed override");
    int workers_raw = 0;
    auto* workers_opt = app.add_option("--workers", workers_raw, "worker threads for ensembles");

    auto* rates = app.add_subcommand("rates", "decoherence rates for a superposition");
    auto* kernel = app.add_subcommand("kernel", "noise-kernel evaluations");
    auto* evolve = app.add_subcommand("evolve", "master-equation off-diagonal time series");
    auto* sde = app.add_subcommand("sde", "stochastic trajectory ensembles");
    auto* sn = app.add_subcommand("sn", "self-gravity solver (ground/free/epr)");
    auto* bounds = app.add_subcommand("bounds", "experimental bounds on R0");
    double r0 = 0.0;
    std::string bounds_table;
    bounds->add_option("r0", r0, "regularisation radius to test, metres");
    bounds->add_option("--table", bounds_table, "CSV override: name,r0_lower_m,note");
    auto* scenario = app.add_subcommand("scenario", "run a preset or config scenario");
    std::string scenario_name;
    bool scenario_list = false;
    scenario->add_option("name", scenario_name, "preset name or config path");
    scenario->add_flag("--list", scenario_list, "list presets");

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) g.seed = seed_raw;
    if (*workers_opt) g.workers = workers_raw;

    try {
        if (rates->parsed()) return cmd_rates(g);
        if (kernel->parsed()) return cmd_kernel(g);
        if (evolve->parsed()) return cmd_evolve(g);
        if (sde->parsed()) return cmd_sde(g);
        if (sn->parsed()) return cmd_sn(g);
        if (bounds->parsed()) return cmd_bounds(g, r0, bounds_table);
        if (scenario->parsed()) {
            if (!scenario_list && scenario_name.empty())
                throw gravkit::validation_error("scenario: give a preset name or --list");
            return cmd_scenario(g, scenario_name, scenario_list);
        }
    } catch (const gravkit::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const gravkit::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
