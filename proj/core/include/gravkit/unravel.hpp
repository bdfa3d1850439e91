#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gravkit/lindblad.hpp"
#include "gravkit/rates.hpp"

namespace gravkit {

struct TrajectoryConfig {
    double dt = 0.0;           // s
    long steps = 0;
    std::uint64_t master_seed = 0;
    int ensemble_size = 1;     // M
    enum class Scheme { EulerMaruyama } scheme = Scheme::EulerMaruyama;
    int workers = 1;           // trajectories are index-seeded, so results
                               // do not depend on the worker count
    int checkpoints = 8;
    double collapse_threshold = 1e-3;  // collapsed when max weight > 1 - threshold

    void validate() const;
};

/// Ensemble statistics of the Diosi collapse process on the pointer basis.
struct CollapseStats {
    std::vector<double> branch_frequency;      // sums to 1 over collapsed runs
    std::vector<double> frequency_std_error;   // binomial
    double collapsed_fraction = 0.0;
    std::vector<double> checkpoint_times;
    /// Ensemble-averaged density matrix at each checkpoint.
    std::vector<Eigen::MatrixXcd> mean_rho;
    /// Mean |rho_01| with standard error (survival of coherence).
    std::vector<double> coherence;
    std::vector<double> coherence_std_error;
};

/// Optional per-trajectory sink: (trajectory index, checkpoint times, branch
/// weights at checkpoints, row-major).
using TrajectorySink =
    std::function<void(int, const std::vector<double>&, const std::vector<double>&)>;

/// Collapse unraveling of the Diosi master equation: branch amplitudes
/// driven by correlated noise with covariance B_ij = (G/hbar) S(x_i - x_j)
/// (the scale that makes the ensemble average reproduce the master equation),
/// Euler-Maruyama steps renormalised each step. Weights are martingales, so
/// collapse frequencies reproduce the initial weights.
CollapseStats run_diosi_collapse(const SuperpositionSpec& spec,
                                 const Eigen::VectorXcd& amplitudes,
                                 const TrajectoryConfig& cfg,
                                 const Constants& k = Constants::si(),
                                 const TrajectorySink& sink = {});

/// One conditional KTM trajectory: Gaussian state with deterministic
/// covariance (Riccati flow shared by the whole ensemble) and stochastic
/// means; measurement records r_j = <x_j> + sqrt(hbar/2K) dW_j/dt.
struct KtmTrajectory {
    std::vector<double> times;
    std::vector<Eigen::Vector4d> means;
    std::vector<double> record1, record2;
};

struct KtmEnsembleSummary {
    std::vector<double> times;
    std::vector<Eigen::Matrix4d> conditional_cov;   // deterministic
    std::vector<Eigen::Vector4d> mean_of_means;
    std::vector<Eigen::Vector4d> mean_std_error;
    /// Unconditional second moments <r_a^2> = V_cond + E[mean^2], diag only.
    std::vector<Eigen::Vector4d> second_moment;
    std::vector<Eigen::Vector4d> second_moment_std_error;
    std::vector<double> mean_record1, mean_record2;
    std::vector<double> record1_std_error, record2_std_error;
};

KtmTrajectory run_ktm_trajectory(const GaussianOscillatorState& initial,
                                 const TrajectoryConfig& cfg, std::uint64_t stream);

KtmEnsembleSummary run_ktm_ensemble(const GaussianOscillatorState& initial,
                                    const TrajectoryConfig& cfg);

}  // namespace gravkit
