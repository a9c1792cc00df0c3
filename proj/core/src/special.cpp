#include "jutila/special.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <vector>

#include "jutila/errors.hpp"
#include "jutila/quadrature.hpp"

namespace jutila {

cplx cis2pi(double x) {
    double th = 2.0 * PI * (x - std::floor(x));
    return {std::cos(th), std::sin(th)};
}

// ---------------------------------------------------------------------------
// complex gamma
// ---------------------------------------------------------------------------

namespace {

// B_{2n}/(2n(2n-1)) for the Stirling tail
constexpr double STIRLING_COEF[] = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

constexpr double LOG_SQRT_2PI = 0.91893853320467274178032973640562;

cplx log_gamma_stirling(cplx z) {
    cplx lz = std::log(z);
    cplx s = (z - 0.5) * lz - z + LOG_SQRT_2PI;
    cplx zi = 1.0 / z;
    cplx zpow = zi;
    cplx z2 = zi * zi;
    for (double c : STIRLING_COEF) {
        s += c * zpow;
        zpow *= z2;
    }
    return s;
}

}  // namespace

cplx log_gamma(cplx z) {
    if (z.real() < 0.5) {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        if (z.imag() == 0.0 && z.real() == std::floor(z.real()))
            throw ValidationError("log_gamma: pole at non-positive integer");
        // log sin(pi z) computed to avoid overflow for large |Im z|
        cplx iz = cplx(0, 1) * PI * z;
        cplx log_sin;
        if (z.imag() > 0) {
            log_sin = std::log((1.0 - std::exp(2.0 * iz)) / cplx(0, 2)) - iz;
        } else {
            log_sin = std::log((std::exp(-2.0 * iz) - 1.0) / cplx(0, 2)) + iz;
        }
        return std::log(cplx(PI)) - log_sin - log_gamma(1.0 - z);
    }
    int shifts = 0;
    cplx w = z;
    while (std::abs(w) < 16.0) {
        ++shifts;
        w += 1.0;
    }
    cplx s = log_gamma_stirling(w);
    for (int i = shifts - 1; i >= 0; --i) s -= std::log(z + double(i));
    return s;
}

cplx complex_gamma(cplx z) { return std::exp(log_gamma(z)); }

cplx gamma_c(cplx s) { return 2.0 * std::exp(-s * std::log(2.0 * PI) + log_gamma(s)); }

cplx gamma_ratio_unit(int k, double t) {
    cplx a(k * 0.5, -t), b(k * 0.5, t);
    cplx expo = std::log(2.0 * PI) * cplx(0, 2.0 * t) + log_gamma(a) - log_gamma(b);
    // the exponent is purely imaginary up to rounding; force unit modulus
    double th = expo.imag();
    return {std::cos(th), std::sin(th)};
}

// ---------------------------------------------------------------------------
// incomplete gamma
// ---------------------------------------------------------------------------

namespace {

cplx upper_gamma_cf(cplx a, double x) {
    // Lentz continued fraction for Gamma(a,x), x >~ |a|+1
    const double tiny = 1e-300;
    cplx b = x + 1.0 - a;
    cplx c = 1.0 / tiny;
    cplx d = 1.0 / b;
    cplx h = d;
    for (int i = 1; i <= 400; ++i) {
        cplx an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        cplx delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x)) * h;
}

cplx lower_gamma_series(cplx a, double x) {
    // gamma(a,x) = x^a e^-x sum x^n / (a (a+1) ... (a+n))
    cplx sum = 1.0 / a;
    cplx term = sum;
    cplx ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::exp(-x + a * std::log(x)) * sum;
}

}  // namespace

cplx upper_incomplete_gamma(cplx a, double x) {
    if (x <= 0) throw ValidationError("upper_incomplete_gamma: x must be positive");
    // The CF handles every a once x is not small; the series needs Gamma(a)
    // and is kept away from the poles on the non-positive real axis.
    if (a.real() <= 0.5) {
        if (x < 0.5) throw ValidationError("upper_incomplete_gamma: x too small for Re a <= 0");
        return upper_gamma_cf(a, x);
    }
    if (x > a.real() + 1.0) return upper_gamma_cf(a, x);
    return complex_gamma(a) - lower_gamma_series(a, x);
}

// ---------------------------------------------------------------------------
// Bessel J
// ---------------------------------------------------------------------------

double bessel_j_series(int nu, double x) {
    long double hx = 0.5L * (long double)x;
    long double term = 1.0L;
    for (int i = 1; i <= nu; ++i) term *= hx / i;
    long double sum = term;
    long double x2 = hx * hx;
    for (int m = 1; m <= 600; ++m) {
        term *= -x2 / ((long double)m * (m + nu));
        sum += term;
        if (std::fabs((double)term) < 1e-24 * (1.0 + std::fabs((double)sum)) && m > 4) break;
    }
    return double(sum);
}

void bessel_asymptotic_coeffs(int nu, int mmax, double* a) {
    double mu = 4.0 * double(nu) * double(nu);
    a[0] = 1.0;
    for (int m = 1; m <= mmax; ++m) {
        double f = (mu - double(2 * m - 1) * double(2 * m - 1)) / (8.0 * m);
        a[m] = a[m - 1] * f;
    }
}

double bessel_j_asymptotic(int nu, double x) {
    double a[24];
    bessel_asymptotic_coeffs(nu, 23, a);
    double P = 0, Q = 0;
    double xp = 1.0;
    double prev = 1e300;
    for (int m = 0; m <= 23; ++m) {
        double t = a[m] * xp;
        if (std::fabs(t) > prev) break;  // divergence onset
        if (m % 4 == 0) P += t;
        else if (m % 4 == 1) Q += t;
        else if (m % 4 == 2) P -= t;
        else Q -= t;
        prev = std::fabs(t);
        xp /= x;
        if (prev < 1e-18) break;
    }
    long double theta = (long double)x - (2 * nu + 1) * (long double)(PI / 4.0);
    theta = fmodl(theta, 2.0L * (long double)PI);
    double c = double(cosl(theta)), s = double(sinl(theta));
    return std::sqrt(2.0 / (PI * x)) * (c * P - s * Q);
}

double bessel_asymptotic_min_z(int nu) {
    // smallest z where the truncated (<=23-term) tail is below ~1e-12
    double a[24];
    bessel_asymptotic_coeffs(nu, 23, a);
    for (double z : {12.0, 16.0, 20.0, 26.0, 34.0, 45.0, 60.0, 80.0, 110.0, 150.0, 210.0,
                     300.0, 420.0, 600.0, 850.0, 1200.0, 1700.0, 2400.0}) {
        double minterm = 1e300, t = 1.0;
        for (int m = 0; m <= 23; ++m) {
            double v = std::fabs(a[m] * t);
            if (v > minterm) break;
            minterm = v;
            t /= z;
        }
        if (minterm < 1e-12) return z;
    }
    return 3400.0;
}

namespace {

// Miller backward recurrence normalized with J_0 + 2 sum J_{2m} = 1.
double bessel_j_miller(int nu, double x) {
    int start = int(x + 18.0 + 1.3 * std::cbrt(x + 1.0)) + nu + 22;
    start += start & 1;
    long double jp = 0.0L, jc = 1e-30L, target = 0.0L, norm = 0.0L;
    for (int m = start; m >= 1; --m) {
        long double jm = 2.0L * m / (long double)x * jc - jp;
        jp = jc;
        jc = jm;
        if (std::fabs((double)jc) > 1e250) {
            jc *= 1e-250L;
            jp *= 1e-250L;
            target *= 1e-250L;
            norm *= 1e-250L;
        }
        if (m - 1 == nu) target = jc;
        if ((m - 1) % 2 == 0) norm += (m - 1 == 0) ? jc : 2.0L * jc;
    }
    return double(target / norm);
}

struct CrossoverTable {
    std::array<double, 65> x;
    CrossoverTable() {
        // branch-agreement minimization: within the window where the
        // long-double series is still sound (alternating-sum cancellation
        // ~ exp(sqrt(x^2 - nu^2)) below the precision budget), pick the x
        // minimizing |series - asymptotic|.
        for (int nu = 0; nu <= 64; ++nu) {
            double cancel_cap = std::sqrt(441.0 + double(nu) * double(nu));
            double best_x = std::min(18.0, cancel_cap), best_d = 1e300;
            for (double t = 10.0; t <= cancel_cap; t += 0.5) {
                double d = std::fabs(bessel_j_series(nu, t) - bessel_j_asymptotic(nu, t));
                if (d <= best_d) {
                    best_d = d;
                    best_x = t;
                }
            }
            x[size_t(nu)] = best_x;
        }
    }
};

const CrossoverTable& crossover_table() {
    static CrossoverTable tab;
    return tab;
}

}  // namespace

double bessel_j_crossover(int nu) { return crossover_table().x[size_t(nu)]; }

double bessel_j(int nu, double x) {
    if (nu < 0 || nu > 64) throw ValidationError("bessel_j: order out of range");
    if (x < 0 || x > 1e9) throw ValidationError("bessel_j: argument out of range");
    if (x == 0.0) return nu == 0 ? 1.0 : 0.0;
    if (x <= bessel_j_crossover(nu)) return bessel_j_series(nu, x);
    if (x >= bessel_asymptotic_min_z(nu)) return bessel_j_asymptotic(nu, x);
    return bessel_j_miller(nu, x);
}

// ---------------------------------------------------------------------------
// K-Bessel constants and the cutoff g
// ---------------------------------------------------------------------------

double bessel_k_half(int n) {
    if (n != 0 && n != 1) throw ValidationError("bessel_k_half: only K_0, K_1 needed");
    // K_n(1/2) = int_0^inf exp(-cosh(u)/2) cosh(n u) du
    auto f = [n](double u) {
        return std::exp(-0.5 * std::cosh(u)) * (n == 0 ? 1.0 : std::cosh(u));
    };
    return gl_integrate(f, 0.0, 12.0, 24, 40);
}

double bessel_k_half_alpha() {
    static const double alpha = std::exp(0.5) / (bessel_k_half(1) - bessel_k_half(0));
    return alpha;
}

namespace {

// int_a^1 exp(-1/(1-u^2)) du on a fixed panel grid refined geometrically
// toward the endpoints, where the integrand flattens to zero.
double bump_integral(double a) {
    if (a >= 1.0) return 0.0;
    a = std::max(a, -1.0);
    auto f = [](double u) {
        double w = 1.0 - u * u;
        return w <= 1e-12 ? 0.0 : std::exp(-1.0 / w);
    };
    static const std::vector<double> grid = [] {
        std::vector<double> g;
        for (double w = 5e-3; w < 0.1; w *= 2) g.push_back(-1.0 + w);
        for (double v = -0.9; v < 0.9 - 1e-9; v += 0.15) g.push_back(v);
        g.push_back(0.9);
        for (double w = 0.1; w > 5e-3; w /= 2) g.push_back(1.0 - w / 2);
        g.push_back(1.0);
        std::sort(g.begin(), g.end());
        return g;
    }();
    double total = 0.0;
    double lo = a;
    for (double b : grid) {
        if (b <= lo + 1e-15) continue;
        total += gl_integrate(f, lo, b, 20, 1);
        lo = b;
    }
    return total;
}

}  // namespace

CutoffG::CutoffG(double power_) : alpha(bessel_k_half_alpha()), power(power_) {
    if (power <= 0) throw ValidationError("CutoffG: power must be positive");
}

double CutoffG::operator()(double x) const {
    if (x <= 0) throw ValidationError("cutoff_g: x must be positive");
    double y = power == 1.0 ? x : std::pow(x, power);
    if (y < 0.5) return 1.0;
    if (y > 2.0) return 0.0;
    double a = std::log2(y);
    return alpha * bump_integral(a);
}

}  // namespace jutila
