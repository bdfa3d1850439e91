#include "gravkit/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gravkit/bounds.hpp"
#include "gravkit/csv.hpp"
#include "gravkit/errors.hpp"
#include "gravkit/kernels.hpp"
#include "gravkit/lindblad.hpp"
#include "gravkit/rates.hpp"
#include "gravkit/snsolver.hpp"
#include "gravkit/unravel.hpp"

namespace gravkit {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

bool RunManifest::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["toolkit"] = kToolkitName;
    j["version"] = kToolkitVersion;
    j["preset"] = preset;
    j["reference"] = reference;
    j["model"] = model;
    j["seed"] = seed;
    j["workers"] = workers;
    j["wall_clock_ms"] = wall_clock_ms;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : config_echo) cfg[k] = v;
    j["config"] = cfg;
    j["outputs"] = outputs;
    nlohmann::json checks_json = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["measured"] = c.measured;
        cj["detail"] = c.detail;
        checks_json.push_back(cj);
    }
    j["checks"] = checks_json;
    j["all_pass"] = all_pass();
    return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& dir, const std::string& name,
                       const std::string& contents) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path target = fs::path(dir) / name;
    const fs::path tmp = fs::path(dir) / (name + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw numerical_error("cannot write " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// Config helpers
// ---------------------------------------------------------------------------

namespace {

MassDensity parse_density(ConfigFile& cfg, const std::string& section) {
    const std::string type = cfg.get_string(section, "type");
    if (type == "point") return MassDensity::point_mass(cfg.get_double(section, "mass_kg"));
    if (type == "uniform_sphere")
        return MassDensity::uniform_sphere(cfg.get_double(section, "mass_kg"),
                                           cfg.get_double(section, "radius_m"));
    if (type == "gaussian_ball")
        return MassDensity::gaussian_ball(cfg.get_double(section, "mass_kg"),
                                          cfg.get_double(section, "r0_m"));
    if (type == "cubic_lattice")
        return MassDensity::cubic_lattice(static_cast<int>(cfg.get_int(section, "n_per_axis")),
                                          cfg.get_double(section, "site_mass_kg"),
                                          cfg.get_double(section, "spacing_m"),
                                          cfg.get_double(section, "r0_m"));
    throw validation_error("config: unknown density type '" + type + "' in [" + section + "]");
}

SuperpositionSpec parse_spec(ConfigFile& cfg, const std::string& density_section,
                             const std::string& sup_section) {
    SuperpositionSpec spec = SuperpositionSpec::two_branch(
        parse_density(cfg, density_section), cfg.get_double(sup_section, "separation_m"));
    return spec;
}

std::vector<double> parse_list(const std::string& raw, const std::string& what) {
    std::vector<double> out;
    std::string token;
    std::istringstream ss(raw);
    while (std::getline(ss, token, ',')) {
        try {
            out.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw validation_error("config: bad number '" + token + "' in " + what);
        }
    }
    if (out.empty()) throw validation_error("config: empty list for " + what);
    return out;
}

CheckResult factor_check(const std::string& name, double measured, double expected,
                         double factor) {
    CheckResult c;
    c.name = name;
    c.measured = measured;
    const double ratio = measured / expected;
    c.pass = ratio >= 1.0 / factor && ratio <= factor;
    c.detail = "expected within factor " + format_double(factor) + " of " +
               format_double(expected) + "; ratio " + format_double(ratio);
    return c;
}

CheckResult range_check(const std::string& name, double measured, double lo, double hi) {
    CheckResult c;
    c.name = name;
    c.measured = measured;
    c.pass = measured >= lo && measured <= hi;
    c.detail = "expected in [" + format_double(lo) + ", " + format_double(hi) + "]";
    return c;
}

CheckResult sigma_check(const std::string& name, double measured, double expected,
                        double std_error, double n_sigma) {
    CheckResult c;
    c.name = name;
    c.measured = measured;
    const double z = std_error > 0.0 ? (measured - expected) / std_error
                                     : (measured == expected ? 0.0 : 1e9);
    c.pass = std::abs(z) <= n_sigma;
    c.detail = "expected " + format_double(expected) + " +/- " + format_double(n_sigma) +
               " sigma (se " + format_double(std_error) + "); z = " + format_double(z);
    return c;
}

CheckResult rel_check(const std::string& name, double measured, double expected, double tol) {
    CheckResult c;
    c.name = name;
    c.measured = measured;
    const double rel = expected != 0.0 ? std::abs(measured - expected) / std::abs(expected)
                                       : std::abs(measured);
    c.pass = rel <= tol;
    c.detail = "expected " + format_double(expected) + " within " + format_double(tol) +
               " relative; got " + format_double(rel);
    return c;
}

// ---------------------------------------------------------------------------
// Model runners
// ---------------------------------------------------------------------------

void run_karolyhazy_cell(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    const double m = cfg.get_double("cell", "mass_kg");
    const double r = cfg.get_double("cell", "radius_m", 0.0);
    const CoherenceCell cell = karolyhazy_coherence_cell(m, r);
    CsvWriter csv({"model", "mass_kg", "radius_m", "a_k_m", "tau_k_s"});
    csv.raw_row({"karolyhazy", format_double(m), format_double(r), format_double(cell.a_k),
                 format_double(cell.tau_k)});
    write_file_atomic(out_dir, "rates.csv", csv.str());
    man.outputs.push_back("rates.csv");
    if (cfg.has("checks", "expected_a_k_m"))
        man.checks.push_back(factor_check("a_k order of magnitude", cell.a_k,
                                          cfg.get_double("checks", "expected_a_k_m"),
                                          cfg.get_double("checks", "factor", 10.0)));
    if (cfg.has("checks", "expected_tau_k_s"))
        man.checks.push_back(factor_check("tau_k order of magnitude", cell.tau_k,
                                          cfg.get_double("checks", "expected_tau_k_s"),
                                          cfg.get_double("checks", "factor", 10.0)));
}

void run_karolyhazy_correlator(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    KarolyhazyKernel kernel;
    kernel.lambda_c = cfg.get_double("kernel", "lambda_c_m", 1e-15);
    const double box = cfg.get_double("kernel", "box_cutoffs", 32.0) * kernel.lambda_c;
    const int mode_cap = static_cast<int>(cfg.get_int("kernel", "mode_cap", 64));
    const int realizations = static_cast<int>(cfg.get_int("kernel", "realizations", 10000));
    const std::vector<double> rs = parse_list(
        cfg.get_string("kernel", "r_cutoffs", "1,2,3"), "kernel.r_cutoffs");
    const std::vector<double> taus = parse_list(
        cfg.get_string("kernel", "tau_cutoffs", "0,0.5,1"), "kernel.tau_cutoffs");
    if (rs.size() != taus.size())
        throw validation_error("config: kernel.r_cutoffs and tau_cutoffs length mismatch");

    std::vector<std::pair<SpacetimePoint, SpacetimePoint>> pairs;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        SpacetimePoint a{Eigen::Vector3d::Zero(), 0.0};
        SpacetimePoint b{Eigen::Vector3d(0.0, 0.0, rs[i] * kernel.lambda_c),
                         taus[i] * kernel.lambda_c / kernel.constants.c};
        pairs.emplace_back(a, b);
    }
    const auto estimates =
        estimate_field_correlator(kernel, box, mode_cap, pairs, realizations, man.seed);

    CsvWriter csv({"r_over_lambda", "tau_over_lambda_c", "closed_form", "mc_mean", "mc_se", "z"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double closed = kernel.correlation(rs[i] * kernel.lambda_c,
                                                 taus[i] * kernel.lambda_c / kernel.constants.c);
        const double z = (estimates[i].mean - closed) / estimates[i].std_error;
        csv.row({rs[i], taus[i], closed, estimates[i].mean, estimates[i].std_error, z});
        man.checks.push_back(sigma_check(
            "correlator point " + std::to_string(i + 1) + " (mc vs closed form)",
            estimates[i].mean, closed, estimates[i].std_error, 3.0));
    }
    write_file_atomic(out_dir, "correlator.csv", csv.str());
    man.outputs.push_back("correlator.csv");
}

void run_penrose(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    SuperpositionSpec spec = parse_spec(cfg, "density", "superposition");
    const RateResult dp = dp_decay_rate(spec);
    const PenroseResult pen = penrose_delta_e(spec);
    CsvWriter csv({"model", "rate_per_s", "time_s", "delta_e_j", "quad_error"});
    csv.raw_row({"diosi", format_double(dp.rate), format_double(dp.time_constant), "",
                 format_double(dp.quad_error)});
    csv.raw_row({"penrose", format_double(1.0 / pen.tau), format_double(pen.tau),
                 format_double(pen.delta_e), format_double(pen.quad_error)});
    write_file_atomic(out_dir, "rates.csv", csv.str());
    man.outputs.push_back("rates.csv");

    man.checks.push_back(rel_check("tau_d = 8 pi tau_penrose", dp.time_constant,
                                   8.0 * kPi * pen.tau, 1e-10));
    if (cfg.has("checks", "expected_tau_s"))
        man.checks.push_back(factor_check("penrose tau order of magnitude", pen.tau,
                                          cfg.get_double("checks", "expected_tau_s"),
                                          cfg.get_double("checks", "factor", 10.0)));
}

void run_penrose_crystal(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    CrystalPreset preset;
    preset.total_mass = cfg.get_double("crystal", "total_mass_kg");
    preset.site_mass = cfg.get_double("crystal", "site_mass_kg");
    preset.site_r0 = cfg.get_double("crystal", "site_r0_m");
    preset.spacing = cfg.get_double("crystal", "spacing_m");
    preset.crystal_radius = cfg.get_double("crystal", "crystal_radius_m");
    const double d = cfg.get_double("crystal", "displacement_m");
    const PenroseResult pen = penrose_crystal_delta_e(preset, d);
    CsvWriter csv({"model", "delta_e_j", "tau_s"});
    csv.raw_row({"penrose-crystal", format_double(pen.delta_e), format_double(pen.tau)});
    write_file_atomic(out_dir, "rates.csv", csv.str());
    man.outputs.push_back("rates.csv");
    man.checks.push_back(range_check("crystal tau decade", pen.tau,
                                     cfg.get_double("checks", "tau_lo_s", 1e-3),
                                     cfg.get_double("checks", "tau_hi_s", 1e-2)));
}

void run_diosi_sde(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    SuperpositionSpec spec = parse_spec(cfg, "density", "superposition");
    const double w1 = cfg.get_double("sde", "weight_branch_a", 0.3);
    if (w1 <= 0.0 || w1 >= 1.0)
        throw validation_error("config: sde.weight_branch_a must be in (0,1)");
    Eigen::VectorXcd amps(2);
    amps << std::sqrt(w1), std::sqrt(1.0 - w1);

    const RateResult dp = dp_decay_rate(spec);
    TrajectoryConfig tc;
    tc.ensemble_size = static_cast<int>(cfg.get_int("sde", "ensemble", 2000));
    tc.master_seed = man.seed;
    tc.workers = man.workers;
    const double rate_dt = cfg.get_double("sde", "rate_dt", 1e-3);  // Lambda * dt
    const double horizon = cfg.get_double("sde", "horizon_rates", 15.0);  // T * Lambda
    tc.dt = rate_dt / dp.rate;
    tc.steps = static_cast<long>(std::ceil(horizon / rate_dt));
    tc.checkpoints = static_cast<int>(cfg.get_int("sde", "checkpoints", 10));

    const bool per_traj = cfg.get_bool("sde", "per_trajectory_csv", false);
    std::ostringstream traj_csv;
    TrajectorySink sink;
    if (per_traj) {
        traj_csv << "trajectory,time_s,weight_a,weight_b\n";
        sink = [&](int traj, const std::vector<double>& times, const std::vector<double>& w) {
            for (std::size_t c = 0; c < times.size(); ++c)
                traj_csv << traj << ',' << format_double(times[c]) << ','
                         << format_double(w[2 * c]) << ',' << format_double(w[2 * c + 1])
                         << '\n';
        };
    }

    const CollapseStats stats = run_diosi_collapse(spec, amps, tc, Constants::si(), sink);

    // Ensemble summary with seeds and binomial confidence intervals.
    nlohmann::json j;
    j["master_seed"] = tc.master_seed;
    j["ensemble"] = tc.ensemble_size;
    j["dt_s"] = tc.dt;
    j["steps"] = tc.steps;
    j["pairwise_rate_per_s"] = dp.rate;
    j["collapsed_fraction"] = stats.collapsed_fraction;
    j["branch_frequency"] = stats.branch_frequency;
    nlohmann::json ci = nlohmann::json::array();
    for (std::size_t i = 0; i < stats.branch_frequency.size(); ++i)
        ci.push_back({{"branch", i},
                      {"frequency", stats.branch_frequency[i]},
                      {"ci3_halfwidth", 3.0 * stats.frequency_std_error[i]}});
    j["confidence_intervals_3sigma"] = ci;
    j["checkpoint_times_s"] = stats.checkpoint_times;
    j["coherence"] = stats.coherence;
    j["coherence_se"] = stats.coherence_std_error;
    write_file_atomic(out_dir, "ensemble.json", j.dump(2) + "\n");
    man.outputs.push_back("ensemble.json");

    CsvWriter csv({"time_s", "coherence_mc", "coherence_se", "coherence_lindblad"});
    const double rho01_0 = std::sqrt(w1 * (1.0 - w1));
    for (std::size_t c = 0; c < stats.checkpoint_times.size(); ++c) {
        const double expected = rho01_0 * std::exp(-dp.rate * stats.checkpoint_times[c]);
        csv.row({stats.checkpoint_times[c], stats.coherence[c], stats.coherence_std_error[c],
                 expected});
    }
    write_file_atomic(out_dir, "coherence.csv", csv.str());
    man.outputs.push_back("coherence.csv");
    if (per_traj) {
        write_file_atomic(out_dir, "trajectories.csv", traj_csv.str());
        man.outputs.push_back("trajectories.csv");
    }

    man.checks.push_back(range_check("collapsed fraction", stats.collapsed_fraction,
                                     cfg.get_double("checks", "min_collapsed", 0.99), 1.0));
    man.checks.push_back(sigma_check("born frequency branch a", stats.branch_frequency[0], w1,
                                     stats.frequency_std_error[0], 3.0));
    // Coherence vs exp(-Lambda t) at a quarter, half and end of the run.
    const std::size_t nc = stats.checkpoint_times.size();
    for (const std::size_t c : {nc / 4, nc / 2, nc - 1}) {
        const double expected = rho01_0 * std::exp(-dp.rate * stats.checkpoint_times[c]);
        man.checks.push_back(sigma_check(
            "coherence vs lindblad @t=" + format_double(stats.checkpoint_times[c]),
            stats.coherence[c], expected, stats.coherence_std_error[c], 3.0));
    }
}

void run_ktm(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    const Constants scaled = Constants::scaled();
    GaussianOscillatorState state = GaussianOscillatorState::ground_coupled(
        cfg.get_double("ktm", "m1", 1.0), cfg.get_double("ktm", "m2", 1.0),
        cfg.get_double("ktm", "omega1", 1.0), cfg.get_double("ktm", "omega2", 1.3),
        cfg.get_double("ktm", "coupling", 0.05), scaled);
    state.mean(0) = cfg.get_double("ktm", "initial_x1", 0.5);

    TrajectoryConfig tc;
    tc.dt = cfg.get_double("ktm", "dt", 1e-3);
    const double t_total = cfg.get_double("ktm", "t_total", 2.0 * kPi);
    tc.steps = static_cast<long>(std::ceil(t_total / tc.dt));
    tc.ensemble_size = static_cast<int>(cfg.get_int("ktm", "ensemble", 1000));
    tc.master_seed = man.seed;
    tc.workers = man.workers;
    tc.checkpoints = static_cast<int>(cfg.get_int("ktm", "checkpoints", 8));

    const KtmEnsembleSummary ens = run_ktm_ensemble(state, tc);

    // Master-equation moments at the checkpoints.
    CsvWriter csv({"time", "master_x1", "ens_x1", "ens_x1_se", "master_x1sq", "ens_x1sq",
                   "ens_x1sq_se", "master_p1sq", "ens_p1sq", "ens_p1sq_se", "mean_record1",
                   "record1_se"});
    std::vector<CheckResult> checks;
    for (std::size_t c = 0; c < ens.times.size(); ++c) {
        const GaussianOscillatorState master = evolve_ktm_gaussian(state, ens.times[c], tc.dt);
        const double mx1 = master.mean(0);
        const double mx1sq = master.cov(0, 0) + master.mean(0) * master.mean(0);
        const double mp1sq = master.cov(1, 1) + master.mean(1) * master.mean(1);
        csv.row({ens.times[c], mx1, ens.mean_of_means[c](0), ens.mean_std_error[c](0), mx1sq,
                 ens.second_moment[c](0), ens.second_moment_std_error[c](0), mp1sq,
                 ens.second_moment[c](1), ens.second_moment_std_error[c](1),
                 ens.mean_record1[c], ens.record1_std_error[c]});
        if (c + 1 == ens.times.size()) {
            man.checks.push_back(sigma_check("ensemble <x1> vs master", ens.mean_of_means[c](0),
                                             mx1, ens.mean_std_error[c](0), 3.0));
            man.checks.push_back(sigma_check("ensemble <x1^2> vs master",
                                             ens.second_moment[c](0), mx1sq,
                                             ens.second_moment_std_error[c](0), 3.0));
            man.checks.push_back(sigma_check("ensemble <p1^2> vs master",
                                             ens.second_moment[c](1), mp1sq,
                                             ens.second_moment_std_error[c](1), 3.0));
            man.checks.push_back(sigma_check("mean record1 vs master <x1>",
                                             ens.mean_record1[c], mx1,
                                             ens.record1_std_error[c], 3.0));
        }
    }
    write_file_atomic(out_dir, "moments.csv", csv.str());
    man.outputs.push_back("moments.csv");

    // Momentum diffusion of the dissipator alone: d<p^2>/dt at t -> 0 from a
    // diagonal start equals hbar K (the unitary part contributes nothing
    // there).
    const double h = 1e-3 / std::max(state.omega1, state.omega2);
    GaussianOscillatorState probe = state;
    probe.mean.setZero();
    const GaussianOscillatorState after = evolve_ktm_gaussian(probe, h, h / 10.0);
    const double diffusion = (after.cov(1, 1) - probe.cov(1, 1)) / h;
    man.checks.push_back(rel_check("momentum diffusion hbar K", diffusion,
                                   scaled.hbar * state.coupling, 0.05));

    nlohmann::json j;
    j["master_seed"] = tc.master_seed;
    j["ensemble"] = tc.ensemble_size;
    j["coupling"] = state.coupling;
    j["conditional_purity_final"] = [&] {
        GaussianOscillatorState s = state;
        s.cov = ens.conditional_cov.back();
        return s.purity();
    }();
    j["unconditional_purity_final"] =
        evolve_ktm_gaussian(state, ens.times.back(), tc.dt).purity();
    write_file_atomic(out_dir, "ensemble.json", j.dump(2) + "\n");
    man.outputs.push_back("ensemble.json");
}

void run_td(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    const TDKernel kernel = TDKernel::minimal();
    CsvWriter csv({"spec", "td_rate_per_s", "dp_rate_per_s", "rel_diff"});
    const double tol = cfg.get_double("checks", "rel_tol", 1e-6);
    for (int i = 1;; ++i) {
        const std::string section = "spec" + std::to_string(i);
        if (!cfg.has(section, "type")) break;
        MassDensity density = parse_density(cfg, section);
        SuperpositionSpec spec = SuperpositionSpec::two_branch(
            std::move(density), cfg.get_double(section, "separation_m"));
        const RateResult td = td_decay_rate(spec, kernel);
        const RateResult dp = dp_decay_rate(spec);
        const double rel = std::abs(td.rate - dp.rate) / dp.rate;
        csv.raw_row({section, format_double(td.rate), format_double(dp.rate),
                     format_double(rel)});
        man.checks.push_back(rel_check("td minimal reduces to dp (" + section + ")", td.rate,
                                       dp.rate, tol));
    }
    if (man.checks.empty()) throw validation_error("config: td model needs [spec1] ... sections");
    write_file_atomic(out_dir, "rates.csv", csv.str());
    man.outputs.push_back("rates.csv");
}

void run_adler_csl(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    // Scaled units: hbar = c = 1. The near-delta time profile must be much
    // shorter than the step so the per-step increment is exactly lambda dt.
    const Constants scaled = Constants::scaled();
    const double r_c = cfg.get_double("adler", "r_c", 0.5);
    const double tau_c = cfg.get_double("adler", "tau_c", 1e-6);
    const double xi = cfg.get_double("adler", "xi", 1.0);
    AdlerKernel kernel = AdlerKernel::white_gaussian(xi, r_c, tau_c);

    SuperpositionSpec spec = SuperpositionSpec::two_branch(
        MassDensity::gaussian_ball(cfg.get_double("adler", "mass", 1.0),
                                   cfg.get_double("adler", "ball_r0", 0.25)),
        cfg.get_double("adler", "separation", 1.0));

    // Markovian (CSL) rate: lambda = pref * spatial * 1/2.
    const DephasingExponent g1 = nonmarkovian_exponent(spec, 0, 1, kernel, 1.0, scaled);
    const double lambda = g1.gamma;  // Gamma(1) = lambda * (1 - O(tau_c)) with tau_c tiny

    const double t_total = cfg.get_double("adler", "t_total", 1.0);
    // Largest single-step difference between the non-Markovian multiplier
    // exp(-dGamma) and the first-order Markovian update (1 - lambda dt);
    // second order in dt, so halving dt cuts it by four.
    auto per_step_error = [&](double dt) {
        const auto steps = static_cast<long>(std::llround(t_total / dt));
        double worst = 0.0;
        double prev_gamma = 0.0;
        for (long s = 1; s <= steps; ++s) {
            const double gamma =
                nonmarkovian_exponent(spec, 0, 1, kernel, dt * double(s), scaled).gamma;
            const double nm_multiplier = std::exp(-(gamma - prev_gamma));
            prev_gamma = gamma;
            worst = std::max(worst, std::abs(nm_multiplier - (1.0 - lambda * dt)));
        }
        return worst;
    };

    const double dt = cfg.get_double("adler", "dt", 0.05);
    const double err1 = per_step_error(dt);
    const double err2 = per_step_error(0.5 * dt);
    const double ratio = err1 / err2;

    CsvWriter csv({"dt", "max_per_step_rel_diff"});
    csv.row({dt, err1});
    csv.row({0.5 * dt, err2});
    write_file_atomic(out_dir, "csl_limit.csv", csv.str());
    man.outputs.push_back("csl_limit.csv");

    // Exact reduction: the non-Markovian engine matches the Markovian decay
    // up to the tau_c transient.
    const DephasingExponent gt = nonmarkovian_exponent(spec, 0, 1, kernel, t_total, scaled);
    man.checks.push_back(rel_check("csl reduction: Gamma(T) vs lambda T", gt.gamma,
                                   lambda * t_total, 1e-4));
    man.checks.push_back(range_check("per-step error halves like dt^2 (ratio)", ratio,
                                     cfg.get_double("checks", "ratio_lo", 3.2),
                                     cfg.get_double("checks", "ratio_hi", 4.8)));
}

void run_sn_ground(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    const double coupling = cfg.get_double("sn", "coupling", 1.0);
    const int n = static_cast<int>(cfg.get_int("sn", "grid", 4096));
    const double extent = cfg.get_double("sn", "extent", 60.0);
    const SnGroundResult gs = sn_ground_state(coupling, n, extent);

    // Closed-form width estimates for the canonical masses.
    const double proton = 1.67262192369e-27;
    const double est_proton = sn_equilibrium_width_estimate(proton);
    const double est_mg = sn_equilibrium_width_estimate(1e-6);
    man.checks.push_back(factor_check("width estimate, proton", est_proton,
                                      cfg.get_double("checks", "expected_proton_m", 1e22),
                                      10.0));
    man.checks.push_back(factor_check("width estimate, 1 mg", est_mg,
                                      cfg.get_double("checks", "expected_mg_m", 1e-40), 10.0));

    // PDE ground state versus the estimator (1/coupling in scaled length).
    const double estimate = 1.0 / coupling;
    man.checks.push_back(factor_check("ground-state radial width vs estimate", gs.radial_std,
                                      estimate, 2.0));
    const double virial = 2.0 * gs.kinetic / std::abs(gs.potential);
    man.checks.push_back(rel_check("virial balance 2T = |U|", virial, 1.0, 0.01));

    nlohmann::json j;
    j["coupling"] = coupling;
    j["energy"] = gs.energy;
    j["kinetic"] = gs.kinetic;
    j["potential"] = gs.potential;
    j["iterations"] = gs.iterations;
    j["per_axis_std"] = gs.per_axis_std;
    j["radial_std"] = gs.radial_std;
    j["mean_radius"] = gs.mean_radius;
    j["width_prefactor_radial_std"] = gs.radial_std * coupling;
    j["width_prefactor_per_axis_std"] = gs.per_axis_std * coupling;
    j["estimate_proton_m"] = est_proton;
    j["estimate_mg_m"] = est_mg;
    write_file_atomic(out_dir, "ground_summary.json", j.dump(2) + "\n");
    man.outputs.push_back("ground_summary.json");

    std::ostringstream dump;
    dump << "r,re_psi,im_psi\n";
    for (int i = 0; i < gs.field.n; ++i) {
        const double r = gs.field.grid_point(i);
        const std::complex<double> psi = gs.field.amp[static_cast<std::size_t>(i)] / r;
        dump << format_double(r) << ',' << format_double(psi.real()) << ','
             << format_double(psi.imag()) << '\n';
    }
    write_file_atomic(out_dir, "ground_state.csv", dump.str());
    man.outputs.push_back("ground_state.csv");
}

void run_sn_free(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    const int n = static_cast<int>(cfg.get_int("sn", "grid", 2048));
    const double extent = cfg.get_double("sn", "extent", 80.0);
    const double sigma0 = cfg.get_double("sn", "sigma0", 1.5);
    const double t_total = cfg.get_double("sn", "t_total", 6.0);
    const double dt = cfg.get_double("sn", "dt", 2e-3);
    WaveField f = WaveField::gaussian_1d(n, extent, sigma0, 0.0, 0.0, 0.0);
    const SnEvolveResult res = sn_evolve(std::move(f), dt, t_total, 25);

    double worst = 0.0;
    CsvWriter csv({"time", "width", "analytic", "rel_error"});
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        const double t = res.times[i];
        const double analytic = sigma0 * std::sqrt(1.0 + std::pow(t / (2.0 * sigma0 * sigma0), 2));
        const double rel = std::abs(res.width[i] - analytic) / analytic;
        worst = std::max(worst, rel);
        csv.row({t, res.width[i], analytic, rel});
    }
    write_file_atomic(out_dir, "width.csv", csv.str());
    man.outputs.push_back("width.csv");

    man.checks.push_back(range_check("free-spreading width error", worst, 0.0,
                                     cfg.get_double("checks", "width_tol", 1e-4)));
    man.checks.push_back(range_check("norm conservation", res.max_norm_error, 0.0, 1e-8));
    man.checks.push_back(range_check("energy conservation", res.max_energy_drift, 0.0, 1e-6));
}

void run_epr(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    EprConfig ec;
    ec.separation = cfg.get_double("epr", "separation", 10.0);
    ec.packet_width = cfg.get_double("epr", "packet_width", 1.6);
    ec.coupling = cfg.get_double("epr", "coupling", 1.0);
    ec.t_total = cfg.get_double("epr", "t_total", 5.0);
    ec.n = static_cast<int>(cfg.get_int("epr", "grid", 4096));
    ec.extent = cfg.get_double("epr", "extent", 60.0);
    ec.dt = cfg.get_double("epr", "dt", 2.5e-3);
    const EprResult res = epr_scenario(ec);

    CsvWriter csv({"time", "separation_on", "separation_off"});
    for (std::size_t i = 0; i < res.times.size(); ++i)
        csv.row({res.times[i], res.separation_on[i], res.separation_off[i]});
    write_file_atomic(out_dir, "epr.csv", csv.str());
    man.outputs.push_back("epr.csv");

    nlohmann::json j;
    j["initial_separation"] = res.initial_separation;
    j["final_separation_on"] = res.final_separation_on;
    j["final_separation_off"] = res.final_separation_off;
    j["cell"] = res.cell;
    j["difference_in_cells"] =
        (res.final_separation_off - res.final_separation_on) / res.cell;
    j["merged"] = res.merged;
    if (res.merged) j["merge_time"] = res.merge_time;
    write_file_atomic(out_dir, "epr_summary.json", j.dump(2) + "\n");
    man.outputs.push_back("epr_summary.json");

    const double diff_cells = (res.final_separation_off - res.final_separation_on) / res.cell;
    man.checks.push_back(range_check("spot separation difference (cells)", diff_cells,
                                     cfg.get_double("checks", "min_cells", 5.0), 1e9));
    man.checks.push_back(range_check(
        "free maxima stay put (cells)",
        std::abs(res.final_separation_off - res.initial_separation) / res.cell, 0.0,
        cfg.get_double("checks", "free_drift_cells", 2.0)));
    CheckResult merged;
    merged.name = "packets stay resolved";
    merged.pass = !res.merged;
    merged.measured = res.merged ? res.merge_time : 0.0;
    merged.detail = res.merged ? "merged (scenario degenerate)" : "two maxima throughout";
    man.checks.push_back(merged);
}

void run_bounds(ConfigFile& cfg, const std::string& out_dir, RunManifest& man) {
    std::vector<ExperimentBound> table;
    if (cfg.has("bounds", "table_csv"))
        table = load_bounds_csv(cfg.get_string("bounds", "table_csv"));
    else
        table = builtin_bounds();
    const double r0 = cfg.get_double("bounds", "r0_m", 1e-13);
    const auto violated = r0_excluded(r0, table);

    CsvWriter csv({"name", "r0_lower_m", "violated", "note"});
    for (const auto& b : table) {
        const bool v = b.r0_lower_m > r0;
        csv.raw_row({b.name, format_double(b.r0_lower_m), v ? "1" : "0", b.note});
    }
    write_file_atomic(out_dir, "bounds.csv", csv.str());
    man.outputs.push_back("bounds.csv");

    if (cfg.has("checks", "expected_violations")) {
        const std::string expected = cfg.get_string("checks", "expected_violations");
        std::set<std::string> want;
        std::istringstream ss(expected);
        std::string tok;
        while (std::getline(ss, tok, ',')) want.insert(tok);
        std::set<std::string> got;
        for (const auto& b : violated) got.insert(b.name);
        CheckResult c;
        c.name = "violated set";
        c.pass = want == got;
        c.measured = static_cast<double>(got.size());
        std::string names;
        for (const auto& s : got) names += s + " ";
        c.detail = "expected {" + expected + "}, got { " + names + "}";
        man.checks.push_back(c);
    }
    if (cfg.has("checks", "strongest")) {
        const auto& strongest = strongest_bound(table);
        CheckResult c;
        c.name = "strongest bound";
        c.pass = strongest.name == cfg.get_string("checks", "strongest");
        c.measured = strongest.r0_lower_m;
        c.detail = "strongest is " + strongest.name;
        man.checks.push_back(c);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Preset catalog
// ---------------------------------------------------------------------------

namespace {

struct Preset {
    const char* name;
    const char* text;
};

const Preset kPresets[] = {
    {"proton-karolyhazy",
     R"([scenario]
model = karolyhazy-cell
reference = Karolyhazy coherence cell of a proton
seed = 1
[cell]
mass_kg = 1.67262192369e-27
radius_m = 0
[checks]
expected_a_k_m = 1e23
expected_tau_k_s = 1e53
factor = 10
)"},
    {"sphere1cm-karolyhazy",
     R"([scenario]
model = karolyhazy-cell
reference = Karolyhazy coherence cell of a 1 cm sphere (1 g/cm^3 assumed)
seed = 1
[cell]
# 4/3 pi (0.01 m)^3 * 1000 kg/m^3
mass_kg = 4.1887902047863905e-3
radius_m = 0.01
[checks]
expected_a_k_m = 1e-18
expected_tau_k_s = 1e-4
factor = 10
)"},
    {"karolyhazy-correlator-mc",
     R"([scenario]
model = karolyhazy-correlator
reference = metric correlator closed form vs sampled-field ensemble
seed = 20240817
[kernel]
lambda_c_m = 1e-15
box_cutoffs = 32
mode_cap = 64
realizations = 10000
r_cutoffs = 1,2,3
tau_cutoffs = 0,0.5,1
)"},
    {"penrose-1e-12kg",
     R"([scenario]
model = penrose
reference = Penrose microsphere, 1e-12 kg homogeneous sphere
seed = 1
[density]
type = uniform_sphere
mass_kg = 1e-12
radius_m = 5e-6
[superposition]
separation_m = 5e-5
[checks]
expected_tau_s = 1e-6
factor = 10
)"},
    {"penrose-crystal-1e-12kg",
     R"([scenario]
model = penrose-crystal
reference = Penrose estimate refined for matter concentrated in nuclei
seed = 1
[crystal]
total_mass_kg = 1e-12
# heavy-atom crystal: 197 u nuclei, 1e-14 m smearing, fcc-like spacing
site_mass_kg = 3.27e-25
site_r0_m = 1e-14
spacing_m = 2.57e-10
crystal_radius_m = 2.32e-6
displacement_m = 1e-12
[checks]
tau_lo_s = 1e-3
tau_hi_s = 1e-2
)"},
    {"diosi-collapse-born",
     R"([scenario]
model = diosi-sde
reference = collapse unraveling reproducing Born weights and the master decay
seed = 424242
[density]
type = uniform_sphere
mass_kg = 1e-12
radius_m = 5e-6
[superposition]
separation_m = 5e-5
[sde]
weight_branch_a = 0.3
ensemble = 2000
rate_dt = 1e-3
horizon_rates = 15
checkpoints = 10
per_trajectory_csv = false
[checks]
min_collapsed = 0.99
)"},
    {"ktm-two-oscillators",
     R"([scenario]
model = ktm
reference = measurement-feedback trajectories vs the KTM master equation
seed = 7070
[ktm]
m1 = 1.0
m2 = 0.8
omega1 = 1.0
omega2 = 1.3
coupling = 0.05
initial_x1 = 0.5
dt = 1e-3
t_total = 6.283185307179586
ensemble = 1000
checkpoints = 8
)"},
    {"td-minimal-reduction",
     R"([scenario]
model = td
reference = minimal feedback kernel reproducing the Diosi dissipator
seed = 1
[spec1]
type = uniform_sphere
mass_kg = 1e-12
radius_m = 5e-6
separation_m = 5e-5
[spec2]
type = gaussian_ball
mass_kg = 1e-14
r0_m = 1e-7
separation_m = 3e-7
[spec3]
type = gaussian_ball
mass_kg = 2.5e-13
r0_m = 2e-6
separation_m = 8e-6
[checks]
rel_tol = 1e-6
)"},
    {"adler-csl-limit",
     R"([scenario]
model = adler-csl
reference = complex-noise master equation in the white real Gaussian limit
seed = 1
[adler]
xi = 1.0
r_c = 0.5
tau_c = 1e-6
mass = 1.0
ball_r0 = 0.25
separation = 1.0
t_total = 1.0
dt = 0.05
[checks]
ratio_lo = 3.2
ratio_hi = 4.8
)"},
    {"sn-ground-state",
     R"([scenario]
model = sn-ground
reference = self-gravitating ground state and equilibrium-width estimates
seed = 1
[sn]
coupling = 1.0
grid = 4096
extent = 60.0
[checks]
expected_proton_m = 1e22
expected_mg_m = 1e-40
)"},
    {"sn-free-spreading",
     R"([scenario]
model = sn-free
reference = free-particle limit against the analytic spreading law
seed = 1
[sn]
grid = 2048
extent = 80.0
sigma0 = 1.5
t_total = 6.0
dt = 2e-3
[checks]
width_tol = 1e-4
)"},
    {"epr-spot-separation",
     R"([scenario]
model = epr
reference = two-packet self-attraction read out by spot separation
seed = 1
[epr]
separation = 10.0
packet_width = 1.5811388300841898
coupling = 1.0
t_total = 5.0
grid = 4096
extent = 60.0
dt = 2.5e-3
[checks]
min_cells = 5
free_drift_cells = 2
)"},
    {"bounds-r0-survey",
     R"([scenario]
model = bounds
reference = experimental lower bounds on the regularisation radius
seed = 1
[bounds]
r0_m = 1e-13
[checks]
expected_violations = cryostat,germanium,neptune
strongest = germanium
)"},
};

}  // namespace

std::vector<std::string> scenario_presets() {
    std::vector<std::string> names;
    for (const auto& p : kPresets) names.emplace_back(p.name);
    return names;
}

std::string preset_config_text(const std::string& name) {
    for (const auto& p : kPresets)
        if (name == p.name) return p.text;
    throw validation_error("unknown preset '" + name + "'");
}

namespace {

RunManifest run_scenario_impl(ConfigFile cfg, const std::string& out_dir,
                              std::optional<std::uint64_t> seed_override,
                              std::optional<int> workers_override,
                              const std::string& preset_name) {
    const auto t0 = std::chrono::steady_clock::now();
    RunManifest man;
    man.model = cfg.get_string("scenario", "model");
    man.preset = preset_name.empty() ? cfg.get_string("scenario", "title", man.model)
                                     : preset_name;
    man.reference = cfg.get_string("scenario", "reference", "");
    man.seed = cfg.get_seed("scenario", "seed", 1);
    man.workers = static_cast<int>(cfg.get_int("scenario", "workers", 1));
    if (seed_override) man.seed = *seed_override;
    if (workers_override) man.workers = *workers_override;
    if (man.workers < 1) throw validation_error("scenario: workers must be >= 1");

    for (const auto& [section, keys] : cfg.sections())
        for (const auto& [key, value] : keys)
            man.config_echo.emplace_back(section + "." + key, value);

    if (man.model == "karolyhazy-cell")
        run_karolyhazy_cell(cfg, out_dir, man);
    else if (man.model == "karolyhazy-correlator")
        run_karolyhazy_correlator(cfg, out_dir, man);
    else if (man.model == "penrose")
        run_penrose(cfg, out_dir, man);
    else if (man.model == "penrose-crystal")
        run_penrose_crystal(cfg, out_dir, man);
    else if (man.model == "diosi-sde")
        run_diosi_sde(cfg, out_dir, man);
    else if (man.model == "ktm")
        run_ktm(cfg, out_dir, man);
    else if (man.model == "td")
        run_td(cfg, out_dir, man);
    else if (man.model == "adler-csl")
        run_adler_csl(cfg, out_dir, man);
    else if (man.model == "sn-ground")
        run_sn_ground(cfg, out_dir, man);
    else if (man.model == "sn-free")
        run_sn_free(cfg, out_dir, man);
    else if (man.model == "epr")
        run_epr(cfg, out_dir, man);
    else if (man.model == "bounds")
        run_bounds(cfg, out_dir, man);
    else
        throw validation_error("scenario: unknown model '" + man.model + "'");

    cfg.finalize();

    const auto t1 = std::chrono::steady_clock::now();
    man.wall_clock_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    write_file_atomic(out_dir, "run_manifest.json", man.to_json());
    man.outputs.push_back("run_manifest.json");
    return man;
}

}  // namespace

RunManifest run_scenario(ConfigFile cfg, const std::string& out_dir,
                         std::optional<std::uint64_t> seed_override,
                         std::optional<int> workers_override) {
    return run_scenario_impl(std::move(cfg), out_dir, seed_override, workers_override, "");
}

RunManifest run_scenario_preset(const std::string& preset, const std::string& out_dir,
                                std::optional<std::uint64_t> seed_override,
                                std::optional<int> workers_override) {
    ConfigFile cfg = ConfigFile::parse_string(preset_config_text(preset));
    return run_scenario_impl(std::move(cfg), out_dir, seed_override, workers_override, preset);
}

}  // namespace gravkit
