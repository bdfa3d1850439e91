#pragma once

namespace gravkit {

struct Hyp1F2Result {
    double value = 0.0;
    double rel_error = 0.0;  // estimated relative error
    int terms = 0;
};

/// Generalized hypergeometric series 1F2(a; b1, b2; z) by forward summation.
/// For z < 0 the partial sums cancel down from terms of order exp(2 sqrt|z|),
/// so the summation runs in arbitrary precision sized to |z|; the result is
/// good to ~1e-12 relative over the enforced domain |z| <= 1e4.
///
/// Throws validation_error if b1 or b2 is a nonpositive integer or |z| is
/// over the cap, convergence_error (with the partial sum) if the series
/// fails to settle.
Hyp1F2Result hyp1f2(double a, double b1, double b2, double z);

}  // namespace gravkit
