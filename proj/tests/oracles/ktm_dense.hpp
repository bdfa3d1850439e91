#pragma once

// Truncated-number-basis integration of the KTM master equation, used as an
// oracle for the Gaussian moment engine. Two modes with cutoff `n_c` each;
// RK4 on the dense density matrix.

#include <complex>

#include <Eigen/Dense>

#include "gravkit/lindblad.hpp"

namespace oracles {

struct DenseKtmMoments {
    double x1 = 0.0, p1 = 0.0, x2 = 0.0, p2 = 0.0;
    double x1x1 = 0.0, p1p1 = 0.0, x2x2 = 0.0, p2p2 = 0.0, x1x2 = 0.0;
    double top_occupation = 0.0;  // population on the truncation edge
    double trace_error = 0.0;
};

inline DenseKtmMoments dense_ktm_moments(const gravkit::GaussianOscillatorState& initial,
                                         double t, double dt, int n_c) {
    using Mat = Eigen::MatrixXcd;
    const std::complex<double> im(0.0, 1.0);
    const double hbar = initial.constants.hbar;

    const int dim = n_c * n_c;
    Mat a = Mat::Zero(n_c, n_c);
    for (int n = 1; n < n_c; ++n) a(n - 1, n) = std::sqrt(double(n));
    const Mat id = Mat::Identity(n_c, n_c);

    auto kron = [&](const Mat& l, const Mat& r) {
        Mat out = Mat::Zero(l.rows() * r.rows(), l.cols() * r.cols());
        for (int i = 0; i < l.rows(); ++i)
            for (int j = 0; j < l.cols(); ++j)
                out.block(i * r.rows(), j * r.cols(), r.rows(), r.cols()) = l(i, j) * r;
        return out;
    };

    const double s1 = std::sqrt(hbar / (2.0 * initial.m1 * initial.omega1));
    const double s2 = std::sqrt(hbar / (2.0 * initial.m2 * initial.omega2));
    const Mat x1m = s1 * (a + a.adjoint());
    const Mat p1m = im * std::sqrt(hbar * initial.m1 * initial.omega1 / 2.0) * (a.adjoint() - a);
    const Mat x2m = s2 * (a + a.adjoint());
    const Mat p2m = im * std::sqrt(hbar * initial.m2 * initial.omega2 / 2.0) * (a.adjoint() - a);

    const Mat X1 = kron(x1m, id), P1 = kron(p1m, id);
    const Mat X2 = kron(id, x2m), P2 = kron(id, p2m);
    Mat num = Mat::Zero(n_c, n_c);
    for (int n = 0; n < n_c; ++n) num(n, n) = double(n);
    const Mat H = hbar * initial.omega1 * kron(num + 0.5 * id, id) +
                  hbar * initial.omega2 * kron(id, num + 0.5 * id) +
                  initial.coupling * X1 * X2;

    // displaced-ground-state initial condition: coherent amplitudes from the
    // Gaussian means (covariance assumed at the uncoupled ground state)
    auto coherent = [&](double mean_x, double mean_p, double s, double mass, double omega) {
        const std::complex<double> alpha(mean_x / (2.0 * s),
                                         mean_p / (2.0 * std::sqrt(hbar * mass * omega / 2.0)));
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_c);
        double log_fact = 0.0;
        for (int n = 0; n < n_c; ++n) {
            if (n > 0) log_fact += std::log(double(n));
            v(n) = std::pow(alpha, n) * std::exp(-0.5 * std::norm(alpha) - 0.5 * log_fact);
        }
        v /= v.norm();
        return v;
    };
    const Eigen::VectorXcd v1 =
        coherent(initial.mean(0), initial.mean(1), s1, initial.m1, initial.omega1);
    const Eigen::VectorXcd v2 =
        coherent(initial.mean(2), initial.mean(3), s2, initial.m2, initial.omega2);
    Eigen::VectorXcd psi(dim);
    for (int i = 0; i < n_c; ++i)
        for (int j = 0; j < n_c; ++j) psi(i * n_c + j) = v1(i) * v2(j);
    Mat rho = psi * psi.adjoint();

    const double k_rate = initial.coupling / hbar;
    auto rhs = [&](const Mat& r) {
        Mat out = -(im / hbar) * (H * r - r * H);
        // momentum-diffusion dissipator: (K/hbar) (x r x - 1/2 {x^2, r}) per mode
        out += k_rate * (X1 * r * X1 - 0.5 * (X1 * (X1 * r) + (r * X1) * X1));
        out += k_rate * (X2 * r * X2 - 0.5 * (X2 * (X2 * r) + (r * X2) * X2));
        return out;
    };

    const auto steps = static_cast<long>(std::llround(t / dt));
    for (long s = 0; s < steps; ++s) {
        const Mat k1 = rhs(rho);
        const Mat k2 = rhs(rho + 0.5 * dt * k1);
        const Mat k3 = rhs(rho + 0.5 * dt * k2);
        const Mat k4 = rhs(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    DenseKtmMoments m;
    auto expect = [&](const Mat& op) { return (op * rho).trace().real(); };
    m.x1 = expect(X1);
    m.p1 = expect(P1);
    m.x2 = expect(X2);
    m.p2 = expect(P2);
    m.x1x1 = expect(X1 * X1);
    m.p1p1 = expect(P1 * P1);
    m.x2x2 = expect(X2 * X2);
    m.p2p2 = expect(P2 * P2);
    m.x1x2 = expect(X1 * X2);
    m.trace_error = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    for (int i = 0; i < n_c; ++i) {
        m.top_occupation += rho((n_c - 1) * n_c + i, (n_c - 1) * n_c + i).real();
        m.top_occupation += rho(i * n_c + (n_c - 1), i * n_c + (n_c - 1)).real();
    }
    return m;
}

}  // namespace oracles
