#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

namespace gravkit {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // absolute error estimate
};

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule (positive half).
// The odd-indexed nodes (incl. the centre) are the Gauss-7 nodes.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0,
};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
};

struct Panel {
    double value;     // Kronrod estimate
    double error;     // |Kronrod - Gauss|
    double abs_mass;  // integral of |f|, sets the rounding floor
};

template <typename F>
inline Panel gk15(const F& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double k = 0.0, g = 0.0, m = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double dx = half * kKronrodNodes[i];
        double fsum, fabs_sum;
        if (i == 7) {
            const double fc = f(mid);
            fsum = fc;
            fabs_sum = std::abs(fc);
        } else {
            const double fl = f(mid - dx), fr = f(mid + dx);
            fsum = fl + fr;
            fabs_sum = std::abs(fl) + std::abs(fr);
        }
        k += kKronrodWeights[i] * fsum;
        m += kKronrodWeights[i] * fabs_sum;
        if (i % 2 == 1) g += kGaussWeights[i / 2] * fsum;
    }
    return {k * half, std::abs(k - g) * half, m * half};
}

struct Accumulator {
    double value = 0.0, value_c = 0.0;
    double error = 0.0;
    void add(double v) {
        const double t = value + v;
        if (std::abs(value) >= std::abs(v))
            value_c += (value - t) + v;
        else
            value_c += (v - t) + value;
        value = t;
    }
};

// Accept a panel at its requested tolerance or at the double-precision floor
// set by the |f|-mass of the panel; splitting past that floor only churns.
template <typename F>
inline void refine(const F& f, double a, double b, double tol, int depth, int max_depth,
                   Accumulator& acc) {
    const Panel p = gk15(f, a, b);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * p.abs_mass;
    if (p.error <= tol || p.error <= floor || depth >= max_depth) {
        acc.add(p.value);
        acc.error += std::max(p.error, floor);
        return;
    }
    const double mid = 0.5 * (a + b);
    refine(f, a, mid, 0.5 * tol, depth + 1, max_depth, acc);
    refine(f, mid, b, 0.5 * tol, depth + 1, max_depth, acc);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod 15(7) on [a, b]. `initial_panels` pre-splits the
/// interval before refinement; oscillatory integrands should pass roughly one
/// panel per half period.
template <typename F>
inline QuadResult integrate(const F& f, double a, double b, double rel_tol = 1e-10,
                            double abs_tol = 0.0, std::size_t initial_panels = 1,
                            int max_depth = 20) {
    if (initial_panels < 1) initial_panels = 1;
    const double w = (b - a) / static_cast<double>(initial_panels);

    // Coarse pass anchors the relative tolerance.
    double coarse = 0.0;
    for (std::size_t i = 0; i < initial_panels; ++i) {
        const detail::Panel p =
            detail::gk15(f, a + w * static_cast<double>(i), a + w * static_cast<double>(i + 1));
        coarse += std::abs(p.value);
    }
    const double tol = std::max(abs_tol, rel_tol * std::max(coarse, 1e-300));
    const double panel_tol = tol / static_cast<double>(initial_panels);

    detail::Accumulator acc;
    for (std::size_t i = 0; i < initial_panels; ++i)
        detail::refine(f, a + w * static_cast<double>(i), a + w * static_cast<double>(i + 1),
                       panel_tol, 0, max_depth, acc);
    return {acc.value + acc.value_c, acc.error};
}

}  // namespace gravkit
