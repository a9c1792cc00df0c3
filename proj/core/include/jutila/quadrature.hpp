#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace jutila {

struct GaussLegendre {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Cached Gauss-Legendre rule of order n (n <= 64).
const GaussLegendre& gauss_legendre(int n);

// Composite fixed-panel Gauss-Legendre of a smooth real integrand.
double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    int order, int panels);

std::complex<double> gl_integrate_c(const std::function<std::complex<double>(double)>& f,
                                    double a, double b, int order, int panels);

// Adaptive (bisection, embedded-order error estimate) integration of a real
// integrand; tol is absolute.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_panels = 20000);

struct QuadratureSpec {
    double abs_tol = 1e-10;
    long panel_budget = 400000;
    double cycles_per_panel = 0.45;  // initial panel sizing ~ this / |phase'|
    int min_panels = 4;
};

struct OscResult {
    std::complex<double> value{0.0, 0.0};
    double err_est = 0.0;
    bool converged = true;
    long panels_used = 0;
};

// int_a^b amplitude(x) e(phase(x)) dx with panels sized against the phase
// derivative, Gauss-Legendre inside panels and a half-panel Richardson check.
OscResult oscillatory_integral(const std::function<double(double)>& amplitude,
                               const std::function<double(double)>& phase,
                               const std::function<double(double)>& dphase,
                               double a, double b, const QuadratureSpec& spec);

// Spherical Bessel j_n(x) for the Filon moments, n <= 40.
double spherical_jn(int n, double x);

// Filon-Legendre moments: m_n(theta) = int_{-1}^{1} P_n(tau) e^{i theta tau} dtau
// = 2 i^n j_n(theta).
void filon_moments(int nmax, double theta, std::complex<double>* out);

}  // namespace jutila
