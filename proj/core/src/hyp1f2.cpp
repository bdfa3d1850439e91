#include "gravkit/hyp1f2.hpp"

#include <mpfr.h>

#include <cmath>

#include "gravkit/errors.hpp"

namespace gravkit {

namespace {

constexpr double kZCap = 1.0e4;
constexpr int kMaxTerms = 20000;

bool is_nonpositive_integer(double x) {
    return x <= 0.0 && x == std::floor(x);
}

}  // namespace

Hyp1F2Result hyp1f2(double a, double b1, double b2, double z) {
    if (is_nonpositive_integer(b1) || is_nonpositive_integer(b2))
        throw validation_error("hyp1f2: lower parameters must not be nonpositive integers");
    if (std::abs(z) > kZCap)
        throw validation_error("hyp1f2: |z| above the supported cap of 1e4");
    if (z == 0.0) return {1.0, 0.0, 0};

    // Working precision: 64 guard bits plus the cancellation budget
    // log2(max term) ~ 2 sqrt(|z|) log2(e) for z < 0.
    const mpfr_prec_t prec =
        static_cast<mpfr_prec_t>(128 + (z < 0.0 ? std::ceil(2.0 * std::sqrt(-z) * 1.4427) : 0.0));

    mpfr_t sum, term, tmp, max_term;
    mpfr_inits2(prec, sum, term, tmp, max_term, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_d(sum, 1.0, MPFR_RNDN);
    mpfr_set_d(term, 1.0, MPFR_RNDN);
    mpfr_set_d(max_term, 1.0, MPFR_RNDN);

    int n = 0;
    int settled = 0;
    bool converged = false;
    while (n < kMaxTerms) {
        // term *= (a+n) z / ((b1+n)(b2+n)(n+1))
        mpfr_mul_d(term, term, a + n, MPFR_RNDN);
        mpfr_mul_d(term, term, z, MPFR_RNDN);
        mpfr_div_d(term, term, b1 + n, MPFR_RNDN);
        mpfr_div_d(term, term, b2 + n, MPFR_RNDN);
        mpfr_div_d(term, term, static_cast<double>(n + 1), MPFR_RNDN);
        mpfr_add(sum, sum, term, MPFR_RNDN);
        ++n;

        mpfr_abs(tmp, term, MPFR_RNDN);
        if (mpfr_cmp(tmp, max_term) > 0) mpfr_set(max_term, tmp, MPFR_RNDN);

        // Converged once three consecutive terms are negligible next to the sum.
        mpfr_abs(tmp, term, MPFR_RNDN);
        mpfr_mul_2si(tmp, tmp, 60, MPFR_RNDN);  // |term| * 2^60
        mpfr_t asum;
        mpfr_init2(asum, prec);
        mpfr_abs(asum, sum, MPFR_RNDN);
        const bool small = mpfr_cmp(tmp, asum) < 0 || mpfr_zero_p(term);
        mpfr_clear(asum);
        settled = small ? settled + 1 : 0;
        if (settled >= 3) {
            converged = true;
            break;
        }
    }

    const double value = mpfr_get_d(sum, MPFR_RNDN);
    const double peak = mpfr_get_d(max_term, MPFR_RNDN);
    mpfr_clears(sum, term, tmp, max_term, static_cast<mpfr_ptr>(nullptr));

    if (!converged)
        throw convergence_error("hyp1f2: series did not converge within the term budget", value);

    // Round-off left after the high-precision summation, relative to the result.
    double rel = std::abs(value) > 0.0
                     ? (peak / std::abs(value)) * std::ldexp(1.0, -static_cast<int>(prec)) + 1e-15
                     : 1e-15;
    return {value, rel, n};
}

}  // namespace gravkit
