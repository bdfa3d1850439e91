#include "gravkit/unravel.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include <Eigen/Cholesky>

#include "gravkit/errors.hpp"
#include "gravkit/rng.hpp"

namespace gravkit {

void TrajectoryConfig::validate() const {
    if (dt <= 0.0) throw validation_error("trajectory config: dt must be positive");
    if (steps < 1) throw validation_error("trajectory config: steps must be >= 1");
    if (ensemble_size < 1) throw validation_error("trajectory config: ensemble size must be >= 1");
    if (workers < 1) throw validation_error("trajectory config: workers must be >= 1");
    if (checkpoints < 1 || checkpoints > steps)
        throw validation_error("trajectory config: checkpoints must be in [1, steps]");
    if (collapse_threshold <= 0.0 || collapse_threshold >= 0.5)
        throw validation_error("trajectory config: collapse threshold must be in (0, 0.5)");
}

namespace {

// Runs fn(i) for i in [0, n) over cfg.workers threads; fn writes only to
// slot i of preallocated buffers, so the result is worker-count independent.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

CollapseStats run_diosi_collapse(const SuperpositionSpec& spec,
                                 const Eigen::VectorXcd& amplitudes,
                                 const TrajectoryConfig& cfg, const Constants& k,
                                 const TrajectorySink& sink) {
    cfg.validate();
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.branches());
    if (amplitudes.size() != n)
        throw validation_error("run_diosi_collapse: one amplitude per branch required");
    const double anorm = amplitudes.norm();
    if (anorm <= 0.0) throw validation_error("run_diosi_collapse: zero state");

    // Branch-noise covariance B_ij = (G/hbar) S(x_i - x_j). Only centred
    // combinations (e_i - w).dxi enter the dynamics, so B is double-centred
    // before factorisation; that removes the common mode and conditions the
    // Cholesky.
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const Eigen::Vector3d d = spec.displacements[j] - spec.displacements[i];
            b(i, j) = b(j, i) = (k.G / k.hbar) * pair_overlap(spec.density, d).value;
        }
    const Eigen::MatrixXd centering =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
    Eigen::MatrixXd bc = centering * b * centering;
    bc = 0.5 * (bc + bc.transpose()).eval();

    // Largest pairwise rate fixes the stability bound on dt.
    double lambda_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            lambda_max = std::max(lambda_max, b(i, i) + b(j, j) - 2.0 * b(i, j));
    if (lambda_max * cfg.dt > 0.2)
        throw stability_error(
            "run_diosi_collapse: dt too large for the fastest pairwise rate; reduce dt below "
            "0.2 / max rate");

    Eigen::LDLT<Eigen::MatrixXd> ldlt(bc);
    if (ldlt.info() != Eigen::Success)
        throw numerical_error("run_diosi_collapse: noise covariance factorisation failed");
    const Eigen::VectorXd dvec = ldlt.vectorD().cwiseMax(0.0);
    const Eigen::MatrixXd lmat = ldlt.matrixL();
    const Eigen::MatrixXd noise_l =
        ldlt.transpositionsP().transpose() * (lmat * dvec.cwiseSqrt().asDiagonal());

    const Eigen::VectorXcd alpha0 = amplitudes / anorm;
    const int m = cfg.ensemble_size;
    const int n_check = cfg.checkpoints;
    std::vector<double> check_times(static_cast<std::size_t>(n_check));
    std::vector<long> check_steps(static_cast<std::size_t>(n_check));
    for (int c = 0; c < n_check; ++c) {
        check_steps[static_cast<std::size_t>(c)] = (cfg.steps * (c + 1)) / n_check;
        check_times[static_cast<std::size_t>(c)] =
            cfg.dt * static_cast<double>(check_steps[static_cast<std::size_t>(c)]);
    }

    // Per-trajectory results, indexed so reductions are order-deterministic.
    struct TrajResult {
        int collapsed_to = -1;
        std::vector<std::complex<double>> rho_offdiag;  // checkpoints x (n*n)
        std::vector<double> weights;                    // checkpoints x n
    };
    std::vector<TrajResult> results(static_cast<std::size_t>(m));

    const double sqdt = std::sqrt(cfg.dt);
    auto run_one = [&](int traj) {
        Rng rng(cfg.master_seed, static_cast<std::uint64_t>(traj));
        Eigen::VectorXcd alpha = alpha0;
        Eigen::VectorXd w(n), dxi(n), z(n), drift(n);
        TrajResult& out = results[static_cast<std::size_t>(traj)];
        out.rho_offdiag.resize(static_cast<std::size_t>(n_check) * static_cast<std::size_t>(n * n));
        out.weights.resize(static_cast<std::size_t>(n_check) * static_cast<std::size_t>(n));
        int next_check = 0;
        for (long s = 1; s <= cfg.steps; ++s) {
            for (Eigen::Index i = 0; i < n; ++i) w(i) = std::norm(alpha(i));
            for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
            dxi = noise_l * z * sqdt;
            const double mean_noise = w.dot(dxi);
            // drift_i = -1/2 (e_i - w)^T B (e_i - w) dt, via the centred form
            const Eigen::VectorXd bw = b * w;
            const double wbw = w.dot(bw);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double quad = b(i, i) - 2.0 * bw(i) + wbw;
                const double noise = dxi(i) - mean_noise;
                if (std::abs(noise) > 0.5)
                    throw stability_error(
                        "run_diosi_collapse: weight excursion; reduce dt");
                alpha(i) *= 1.0 + noise - 0.5 * quad * cfg.dt;
            }
            alpha /= alpha.norm();
            if (next_check < n_check && s == check_steps[static_cast<std::size_t>(next_check)]) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    out.weights[static_cast<std::size_t>(next_check * n + i)] = std::norm(alpha(i));
                    for (Eigen::Index j = 0; j < n; ++j)
                        out.rho_offdiag[static_cast<std::size_t>(next_check) *
                                            static_cast<std::size_t>(n * n) +
                                        static_cast<std::size_t>(i * n + j)] =
                            alpha(i) * std::conj(alpha(j));
                }
                ++next_check;
            }
        }
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::norm(alpha(i)) > 1.0 - cfg.collapse_threshold) out.collapsed_to = int(i);
    };

    parallel_for(m, cfg.workers, run_one);

    CollapseStats stats;
    stats.checkpoint_times = check_times;
    stats.branch_frequency.assign(static_cast<std::size_t>(n), 0.0);
    stats.frequency_std_error.assign(static_cast<std::size_t>(n), 0.0);
    int collapsed = 0;
    for (int traj = 0; traj < m; ++traj) {
        const int to = results[static_cast<std::size_t>(traj)].collapsed_to;
        if (to >= 0) {
            ++collapsed;
            stats.branch_frequency[static_cast<std::size_t>(to)] += 1.0;
        }
    }
    stats.collapsed_fraction = static_cast<double>(collapsed) / m;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = collapsed > 0
                             ? stats.branch_frequency[static_cast<std::size_t>(i)] / collapsed
                             : 0.0;
        stats.branch_frequency[static_cast<std::size_t>(i)] = p;
        stats.frequency_std_error[static_cast<std::size_t>(i)] =
            collapsed > 0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / collapsed) : 0.0;
    }

    stats.mean_rho.resize(static_cast<std::size_t>(n_check));
    stats.coherence.resize(static_cast<std::size_t>(n_check));
    stats.coherence_std_error.resize(static_cast<std::size_t>(n_check));
    for (int c = 0; c < n_check; ++c) {
        Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(n, n);
        CompensatedSum re01, im01, re01sq, im01sq;
        for (int traj = 0; traj < m; ++traj) {
            const auto& r = results[static_cast<std::size_t>(traj)];
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    mean(i, j) += r.rho_offdiag[static_cast<std::size_t>(c) *
                                                    static_cast<std::size_t>(n * n) +
                                                static_cast<std::size_t>(i * n + j)];
            const std::complex<double> r01 =
                r.rho_offdiag[static_cast<std::size_t>(c) * static_cast<std::size_t>(n * n) + 1];
            re01.add(r01.real());
            im01.add(r01.imag());
            re01sq.add(r01.real() * r01.real());
            im01sq.add(r01.imag() * r01.imag());
        }
        mean /= static_cast<double>(m);
        stats.mean_rho[static_cast<std::size_t>(c)] = mean;
        const double mr = re01.value() / m, mi = im01.value() / m;
        stats.coherence[static_cast<std::size_t>(c)] = std::abs(std::complex<double>(mr, mi));
        const double var_r = std::max(0.0, re01sq.value() / m - mr * mr);
        const double var_i = std::max(0.0, im01sq.value() / m - mi * mi);
        stats.coherence_std_error[static_cast<std::size_t>(c)] =
            std::sqrt((var_r + var_i) / m);
    }

    if (sink) {
        std::vector<double> wbuf(static_cast<std::size_t>(n_check) * static_cast<std::size_t>(n));
        for (int traj = 0; traj < m; ++traj) {
            wbuf = results[static_cast<std::size_t>(traj)].weights;
            sink(traj, check_times, wbuf);
        }
    }
    return stats;
}

// ---------------------------------------------------------------------------
// KTM trajectories
// ---------------------------------------------------------------------------

namespace {

struct KtmShared {
    // Conditional covariance and innovation gains at every step, shared by
    // the whole ensemble (the Riccati flow is deterministic).
    std::vector<Eigen::Matrix4d> cov;       // steps + 1
    std::vector<Eigen::Vector4d> theta1, theta2;
    Eigen::Matrix4d drift;
    double record_noise_scale = 0.0;        // sqrt(hbar / 2K)
    bool measured = false;
};

Eigen::Matrix4d symplectic() {
    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    s(0, 1) = 1.0;
    s(1, 0) = -1.0;
    s(2, 3) = 1.0;
    s(3, 2) = -1.0;
    return s;
}

// Innovation gains Theta_j = 2 V Re(c_j) - hbar sigma Im(c_j) for the two
// measurement/feedback channels c_1 = sqrt(K/2hbar)(e_x1 - i e_x2),
// c_2 = sqrt(K/2hbar)(e_x2 - i e_x1).
void gains(const Eigen::Matrix4d& v, double coupling, double hbar, Eigen::Vector4d& th1,
           Eigen::Vector4d& th2) {
    const double s = std::sqrt(coupling / (2.0 * hbar));
    const Eigen::Vector4d ex1(1, 0, 0, 0), ex2(0, 0, 1, 0);
    const Eigen::Matrix4d sig = symplectic();
    th1 = 2.0 * s * (v * ex1) + hbar * s * (sig * ex2);
    th2 = 2.0 * s * (v * ex2) + hbar * s * (sig * ex1);
}

KtmShared precompute_ktm(const GaussianOscillatorState& initial, const TrajectoryConfig& cfg) {
    const double w_fast =
        std::max({initial.omega1, initial.omega2,
                  std::sqrt(initial.coupling / std::sqrt(initial.m1 * initial.m2))});
    if (cfg.dt * w_fast >= 0.1)
        throw validation_error("ktm trajectory: dt must resolve the fastest frequency");

    KtmShared sh;
    sh.drift = initial.drift_matrix();
    sh.measured = initial.coupling > 0.0;
    if (sh.measured)
        sh.record_noise_scale = std::sqrt(initial.constants.hbar / (2.0 * initial.coupling));
    const Eigen::Matrix4d diff = initial.diffusion_matrix();
    const double hbar = initial.constants.hbar;

    auto rhs = [&](const Eigen::Matrix4d& v) -> Eigen::Matrix4d {
        Eigen::Matrix4d r = sh.drift * v + v * sh.drift.transpose() + diff;
        if (sh.measured) {
            Eigen::Vector4d t1, t2;
            gains(v, initial.coupling, hbar, t1, t2);
            r -= t1 * t1.transpose() + t2 * t2.transpose();
        }
        return r;
    };

    sh.cov.resize(static_cast<std::size_t>(cfg.steps) + 1);
    sh.theta1.resize(static_cast<std::size_t>(cfg.steps) + 1);
    sh.theta2.resize(static_cast<std::size_t>(cfg.steps) + 1);
    Eigen::Matrix4d v = initial.cov;
    for (long s = 0; s <= cfg.steps; ++s) {
        sh.cov[static_cast<std::size_t>(s)] = v;
        Eigen::Vector4d t1 = Eigen::Vector4d::Zero(), t2 = Eigen::Vector4d::Zero();
        if (sh.measured) gains(v, initial.coupling, hbar, t1, t2);
        sh.theta1[static_cast<std::size_t>(s)] = t1;
        sh.theta2[static_cast<std::size_t>(s)] = t2;
        if (s == cfg.steps) break;
        const Eigen::Matrix4d k1 = rhs(v);
        const Eigen::Matrix4d k2 = rhs(v + 0.5 * cfg.dt * k1);
        const Eigen::Matrix4d k3 = rhs(v + 0.5 * cfg.dt * k2);
        const Eigen::Matrix4d k4 = rhs(v + cfg.dt * k3);
        v += (cfg.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        v = 0.5 * (v + v.transpose()).eval();
    }
    return sh;
}

}  // namespace

KtmTrajectory run_ktm_trajectory(const GaussianOscillatorState& initial,
                                 const TrajectoryConfig& cfg, std::uint64_t stream) {
    cfg.validate();
    initial.validate();
    const KtmShared sh = precompute_ktm(initial, cfg);
    Rng rng(cfg.master_seed, stream);
    const double sqdt = std::sqrt(cfg.dt);

    KtmTrajectory out;
    out.times.reserve(static_cast<std::size_t>(cfg.steps) + 1);
    out.means.reserve(static_cast<std::size_t>(cfg.steps) + 1);
    Eigen::Vector4d mean = initial.mean;
    out.times.push_back(0.0);
    out.means.push_back(mean);
    for (long s = 0; s < cfg.steps; ++s) {
        double dw1 = 0.0, dw2 = 0.0;
        if (sh.measured) {
            dw1 = sqdt * rng.normal();
            dw2 = sqdt * rng.normal();
            out.record1.push_back(mean(0) + sh.record_noise_scale * dw1 / cfg.dt);
            out.record2.push_back(mean(2) + sh.record_noise_scale * dw2 / cfg.dt);
        }
        mean += cfg.dt * (sh.drift * mean);
        if (sh.measured)
            mean += sh.theta1[static_cast<std::size_t>(s)] * dw1 +
                    sh.theta2[static_cast<std::size_t>(s)] * dw2;
        out.times.push_back(cfg.dt * static_cast<double>(s + 1));
        out.means.push_back(mean);
    }
    return out;
}

KtmEnsembleSummary run_ktm_ensemble(const GaussianOscillatorState& initial,
                                    const TrajectoryConfig& cfg) {
    cfg.validate();
    initial.validate();
    const KtmShared sh = precompute_ktm(initial, cfg);
    const double sqdt = std::sqrt(cfg.dt);
    const int m = cfg.ensemble_size;
    const int n_check = cfg.checkpoints;
    std::vector<long> check_steps(static_cast<std::size_t>(n_check));
    for (int c = 0; c < n_check; ++c)
        check_steps[static_cast<std::size_t>(c)] = (cfg.steps * (c + 1)) / n_check;

    // means at checkpoints plus record averages per trajectory
    struct TrajOut {
        std::vector<Eigen::Vector4d> mean_at;  // n_check
        std::vector<double> rec1_at, rec2_at;  // record sample at checkpoint step
    };
    std::vector<TrajOut> results(static_cast<std::size_t>(m));

    auto run_one = [&](int traj) {
        Rng rng(cfg.master_seed, static_cast<std::uint64_t>(traj));
        Eigen::Vector4d mean = initial.mean;
        TrajOut& out = results[static_cast<std::size_t>(traj)];
        out.mean_at.resize(static_cast<std::size_t>(n_check));
        out.rec1_at.assign(static_cast<std::size_t>(n_check), 0.0);
        out.rec2_at.assign(static_cast<std::size_t>(n_check), 0.0);
        int next_check = 0;
        for (long s = 0; s < cfg.steps; ++s) {
            double dw1 = 0.0, dw2 = 0.0, r1 = mean(0), r2 = mean(2);
            if (sh.measured) {
                dw1 = sqdt * rng.normal();
                dw2 = sqdt * rng.normal();
                r1 += sh.record_noise_scale * dw1 / cfg.dt;
                r2 += sh.record_noise_scale * dw2 / cfg.dt;
            }
            mean += cfg.dt * (sh.drift * mean);
            if (sh.measured)
                mean += sh.theta1[static_cast<std::size_t>(s)] * dw1 +
                        sh.theta2[static_cast<std::size_t>(s)] * dw2;
            if (next_check < n_check &&
                s + 1 == check_steps[static_cast<std::size_t>(next_check)]) {
                out.mean_at[static_cast<std::size_t>(next_check)] = mean;
                out.rec1_at[static_cast<std::size_t>(next_check)] = r1;
                out.rec2_at[static_cast<std::size_t>(next_check)] = r2;
                ++next_check;
            }
        }
    };
    parallel_for(m, cfg.workers, run_one);

    KtmEnsembleSummary sum;
    sum.times.resize(static_cast<std::size_t>(n_check));
    sum.conditional_cov.resize(static_cast<std::size_t>(n_check));
    sum.mean_of_means.resize(static_cast<std::size_t>(n_check));
    sum.mean_std_error.resize(static_cast<std::size_t>(n_check));
    sum.second_moment.resize(static_cast<std::size_t>(n_check));
    sum.second_moment_std_error.resize(static_cast<std::size_t>(n_check));
    sum.mean_record1.resize(static_cast<std::size_t>(n_check));
    sum.mean_record2.resize(static_cast<std::size_t>(n_check));
    sum.record1_std_error.resize(static_cast<std::size_t>(n_check));
    sum.record2_std_error.resize(static_cast<std::size_t>(n_check));

    for (int c = 0; c < n_check; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        sum.times[ci] = cfg.dt * static_cast<double>(check_steps[ci]);
        sum.conditional_cov[ci] = sh.cov[static_cast<std::size_t>(check_steps[ci])];
        CompensatedSum s1[4], s2[4], sq1[4], sq2[4], r1, r2, r1sq, r2sq;
        for (int traj = 0; traj < m; ++traj) {
            const auto& r = results[static_cast<std::size_t>(traj)];
            for (int a = 0; a < 4; ++a) {
                const double v = r.mean_at[ci](a);
                s1[a].add(v);
                sq1[a].add(v * v);
                const double v2 = v * v;
                s2[a].add(v2);
                sq2[a].add(v2 * v2);
            }
            r1.add(r.rec1_at[ci]);
            r1sq.add(r.rec1_at[ci] * r.rec1_at[ci]);
            r2.add(r.rec2_at[ci]);
            r2sq.add(r.rec2_at[ci] * r.rec2_at[ci]);
        }
        for (int a = 0; a < 4; ++a) {
            const double mean = s1[a].value() / m;
            const double var = std::max(0.0, sq1[a].value() / m - mean * mean);
            sum.mean_of_means[ci](a) = mean;
            sum.mean_std_error[ci](a) = std::sqrt(var / m);
            const double m2 = s2[a].value() / m;
            const double var2 = std::max(0.0, sq2[a].value() / m - m2 * m2);
            sum.second_moment[ci](a) = sum.conditional_cov[ci](a, a) + m2;
            sum.second_moment_std_error[ci](a) = std::sqrt(var2 / m);
        }
        const double mr1 = r1.value() / m, mr2 = r2.value() / m;
        sum.mean_record1[ci] = mr1;
        sum.mean_record2[ci] = mr2;
        sum.record1_std_error[ci] =
            std::sqrt(std::max(0.0, r1sq.value() / m - mr1 * mr1) / m);
        sum.record2_std_error[ci] =
            std::sqrt(std::max(0.0, r2sq.value() / m - mr2 * mr2) / m);
    }
    return sum;
}

}  // namespace gravkit
