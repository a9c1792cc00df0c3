#pragma once

#include <complex>
#include <cstdint>

namespace jutila {

using cplx = std::complex<double>;

inline constexpr double PI = 3.14159265358979323846264338327950288;

// e(x) = exp(2 pi i x)
cplx cis2pi(double x);

// log Gamma(z), principal branch; Stirling with Bernoulli tail + upward shift,
// reflection for Re z < 0.5. Relative error ~1e-13 over the desk range.
cplx log_gamma(cplx z);
cplx complex_gamma(cplx z);

// Gamma_C(s) = 2 (2 pi)^{-s} Gamma(s)
cplx gamma_c(cplx s);

// Gamma_C(k/2 - it) / Gamma_C(k/2 + it), forced to unit modulus.
cplx gamma_ratio_unit(int k, double t);

// Upper incomplete gamma Gamma(a, x) for complex a, real x > 0.
cplx upper_incomplete_gamma(cplx a, double x);

// J_nu for integer nu in [0,64], x in [0, 1e9]; abs error <= 1e-10.
double bessel_j(int nu, double x);
double bessel_j_series(int nu, double x);      // long-double power series branch
double bessel_j_asymptotic(int nu, double x);  // Hankel P/Q branch
double bessel_j_crossover(int nu);             // series/beyond switch point (tabulated)

// Hankel asymptotic amplitude coefficients a_m(nu) (P + iQ = sum i^m a_m z^-m),
// and the smallest z at which the truncated series reaches ~1e-12.
void bessel_asymptotic_coeffs(int nu, int mmax, double* a);
double bessel_asymptotic_min_z(int nu);

// K_0(1/2), K_1(1/2) via the integral representation, and the cutoff
// normalization alpha = e^{1/2} / (K_1(1/2) - K_0(1/2)).
double bessel_k_half(int n);
double bessel_k_half_alpha();

// The compactly supported cutoff of the dyadic reduction:
//   g(x) = 1 (x < 1/2), alpha * int_{log2 x}^{1} exp(-1/(1-u^2)) du (1/2<=x<=2), 0 (x > 2).
// `power > 0` gives the scaled-argument variant g(x^power), still satisfying
// g(x) + g(1/x) = 1.
struct CutoffG {
    double alpha;
    double power = 1.0;

    explicit CutoffG(double power_ = 1.0);
    double operator()(double x) const;
};

}  // namespace jutila
