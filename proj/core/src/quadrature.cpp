#include "jutila/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stack>

#include "jutila/errors.hpp"
#include "jutila/special.hpp"

namespace jutila {

namespace {

GaussLegendre compute_gl(int n) {
    GaussLegendre gl;
    gl.nodes.resize(size_t(n));
    gl.weights.resize(size_t(n));
    for (int i = 0; i < n; ++i) {
        // Newton from Chebyshev initial guess
        double x = std::cos(PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        gl.nodes[size_t(i)] = x;
        gl.weights[size_t(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return gl;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
    return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int order,
                    int panels) {
    const auto& gl = gauss_legendre(order);
    double total = 0.0;
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        double mid = lo + 0.5 * h, half = 0.5 * h;
        double s = 0.0;
        for (size_t i = 0; i < gl.nodes.size(); ++i)
            s += gl.weights[i] * f(mid + half * gl.nodes[i]);
        total += s * half;
    }
    return total;
}

std::complex<double> gl_integrate_c(const std::function<std::complex<double>(double)>& f,
                                    double a, double b, int order, int panels) {
    const auto& gl = gauss_legendre(order);
    std::complex<double> total = 0.0;
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        double mid = lo + 0.5 * h, half = 0.5 * h;
        std::complex<double> s = 0.0;
        for (size_t i = 0; i < gl.nodes.size(); ++i)
            s += gl.weights[i] * f(mid + half * gl.nodes[i]);
        total += s * half;
    }
    return total;
}

double adaptive_integrate(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_panels) {
    struct Panel {
        double a, b, coarse;
    };
    auto gl15 = [&](double lo, double hi) {
        const auto& gl = gauss_legendre(15);
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double s = 0.0;
        for (size_t i = 0; i < gl.nodes.size(); ++i)
            s += gl.weights[i] * f(mid + half * gl.nodes[i]);
        return s * half;
    };
    std::stack<Panel> st;
    st.push({a, b, gl15(a, b)});
    double total = 0.0;
    int used = 0;
    while (!st.empty()) {
        Panel p = st.top();
        st.pop();
        double mid = 0.5 * (p.a + p.b);
        double l = gl15(p.a, mid), r = gl15(mid, p.b);
        double err = std::fabs(l + r - p.coarse);
        if (err < 0.5 * tol * std::max(0.02, (p.b - p.a) / (b - a)) || ++used > max_panels ||
            p.b - p.a < 1e-14 * (b - a)) {
            total += l + r;
        } else {
            st.push({p.a, mid, l});
            st.push({mid, p.b, r});
        }
    }
    return total;
}

OscResult oscillatory_integral(const std::function<double(double)>& amplitude,
                               const std::function<double(double)>& phase,
                               const std::function<double(double)>& dphase, double a, double b,
                               const QuadratureSpec& spec) {
    OscResult res;
    if (!(a < b)) return res;
    auto panel_val = [&](double lo, double hi, int order) {
        const auto& gl = gauss_legendre(order);
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        std::complex<double> s = 0.0;
        for (size_t i = 0; i < gl.nodes.size(); ++i) {
            double x = mid + half * gl.nodes[i];
            s += gl.weights[i] * amplitude(x) * cis2pi(phase(x));
        }
        return s * half;
    };

    // initial panels: march with step ~ cycles_per_panel / |phase'|
    std::vector<double> cuts{a};
    double x = a;
    long guard = 0;
    while (x < b && guard++ < spec.panel_budget) {
        double dp = std::fabs(dphase(x)) + std::fabs(dphase(std::min(b, x + 1e-3 * (b - a))));
        double step = spec.cycles_per_panel / (0.5 * dp + 1.0 / (b - a));
        step = std::min(step, (b - a) / spec.min_panels);
        x = std::min(b, x + step);
        cuts.push_back(x);
    }
    if (cuts.back() < b) cuts.push_back(b);

    struct Panel {
        double a, b;
        std::complex<double> coarse;
        int depth;
    };
    std::stack<Panel> st;
    for (size_t i = cuts.size() - 1; i > 0; --i)
        st.push({cuts[i - 1], cuts[i], panel_val(cuts[i - 1], cuts[i], 15), 0});

    std::complex<double> total = 0.0;
    double err_total = 0.0;
    long used = long(cuts.size());
    bool converged = true;
    while (!st.empty()) {
        Panel p = st.top();
        st.pop();
        double mid = 0.5 * (p.a + p.b);
        std::complex<double> l = panel_val(p.a, mid, 15), r = panel_val(mid, p.b, 15);
        double err = std::abs(l + r - p.coarse);
        used += 2;
        double share = spec.abs_tol * std::max(0.05, (p.b - p.a) / (b - a));
        if (err < share || p.depth > 48 || p.b - p.a < 1e-13 * (b - a)) {
            total += l + r;
            err_total += err;
        } else if (used > spec.panel_budget) {
            total += l + r;
            err_total += err;
            converged = false;
        } else {
            st.push({p.a, mid, l, p.depth + 1});
            st.push({mid, p.b, r, p.depth + 1});
        }
    }
    res.value = total;
    res.err_est = err_total;
    res.converged = converged && err_total <= spec.abs_tol * 4;
    res.panels_used = used;
    return res;
}

double spherical_jn(int n, double x) {
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    double ax = std::fabs(x);
    double j0 = std::sin(x) / x;
    if (n == 0) return j0;
    double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
    if (n == 1) return j1;
    if (ax > double(n) + 0.5) {
        // upward recurrence is stable when x > n
        double jm = j0, jc = j1;
        for (int m = 1; m < n; ++m) {
            double jn = (2.0 * m + 1.0) / x * jc - jm;
            jm = jc;
            jc = jn;
        }
        return jc;
    }
    // downward Miller recurrence
    int start = n + 12 + int(1.5 * std::sqrt(double(n)));
    double jp = 0.0, jc = 1e-280, out = 0.0;
    for (int m = start; m >= 1; --m) {
        double jm2 = (2.0 * m + 1.0) / x * jc - jp;
        jp = jc;
        jc = jm2;
        if (std::fabs(jc) > 1e250) {
            jc *= 1e-250;
            jp *= 1e-250;
            out *= 1e-250;
        }
        if (m - 1 == n) out = jc;
    }
    // normalize against j0
    return out * (j0 / jc);
}

void filon_moments(int nmax, double theta, std::complex<double>* out) {
    // m_n = 2 i^n j_n(theta)
    for (int n = 0; n <= nmax; ++n) {
        double j = spherical_jn(n, theta);
        switch (n & 3) {
            case 0: out[n] = {2.0 * j, 0.0}; break;
            case 1: out[n] = {0.0, 2.0 * j}; break;
            case 2: out[n] = {-2.0 * j, 0.0}; break;
            default: out[n] = {0.0, -2.0 * j}; break;
        }
    }
}

}  // namespace jutila
