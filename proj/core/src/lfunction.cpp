#include "jutila/lfunction.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "jutila/errors.hpp"
#include "jutila/parallel.hpp"
#include "jutila/quadrature.hpp"

namespace jutila {

double analytic_conductor(const NewformSpec& f, double t) {
    double a = std::hypot((f.weight + 1) * 0.5, t);
    double b = std::hypot((f.weight + 3) * 0.5, t);
    return double(f.level) / (PI * PI) * a * b;
}

cplx dirichlet_series(const CoeffTable& table, cplx s, int64_t X, double* tail_bound) {
    if (X > table.limit) throw ValidationError("dirichlet_series: X beyond table");
    if (tail_bound && s.real() < 1.5)
        throw ValidationError("dirichlet_series: Re s too small for the tail bound");
    cplx sum = 0;
    for (int64_t n = 1; n <= X; ++n) {
        if (table.lam(n) == 0.0) continue;
        sum += table.lam(n) * std::exp(-s * std::log(double(n)));
    }
    if (tail_bound) {
        // sum_{n>X} d(n) n^{-sigma} <= int_X^inf 2 sqrt(u) u^{-sigma} du
        double sig = s.real();
        *tail_bound = 2.0 * std::pow(double(X), 1.5 - sig) / (sig - 1.5);
    }
    return sum;
}

namespace {

// truncation index for F(y) = sum a(n) e^{-2 pi n y} at absolute scale 1e-19
int64_t f_on_axis_terms(const NewformSpec& f, double y) {
    double halfk = (f.weight - 1) / 2.0;
    int64_t n = 1;
    while (true) {
        double logterm =
            std::log(2.0) + (halfk + 0.5) * std::log(double(n) + 1.0) - 2.0 * PI * double(n) * y;
        if (logterm < std::log(1e-19)) break;
        ++n;
        if (n > 2000000) throw BudgetExceeded("completed_lambda: q-expansion truncation");
    }
    return n;
}

double f_on_axis(const CoeffTable& tab, double y, int64_t nmax) {
    double acc = 0;
    for (int64_t n = nmax; n >= 1; --n) {
        if (tab.raw[size_t(n)] == 0) continue;
        acc += to_double(tab.raw[size_t(n)]) * std::exp(-2.0 * PI * double(n) * y);
    }
    return acc;
}

}  // namespace

cplx completed_lambda(const NewformSpec& f, cplx s, double tol) {
    const int k = f.weight;
    const double N = double(f.level);
    const cplx w = s + cplx((k - 1) / 2.0, 0);
    const double y0 = 1.0 / std::sqrt(N);
    const auto& reg = FormRegistry::instance();

    // upper piece: 2 sum_n a(n) (2 pi n)^{-w} Gamma(w, 2 pi n y0)
    cplx top = 0;
    auto tab = reg.coefficients(f, 256);
    int64_t quiet = 0;
    for (int64_t n = 1;; ++n) {
        if (n > tab->limit) tab = reg.coefficients(f, tab->limit * 2);
        double x = 2.0 * PI * double(n) * y0;
        if (tab->raw[size_t(n)] != 0) {
            cplx term = to_double(tab->raw[size_t(n)]) *
                        std::exp(-w * std::log(2.0 * PI * double(n))) *
                        upper_incomplete_gamma(w, x);
            top += term;
            quiet = std::abs(term) < tol * 1e-3 ? quiet + 1 : 0;
        } else if (x > std::abs(w) + 4.0) {
            ++quiet;
        }
        if (quiet >= 4 && x > std::abs(w) + 4.0) break;
        if (n > 1000000) throw BudgetExceeded("completed_lambda: truncation insufficient");
    }
    top *= 2.0;

    // lower piece: 2 int_{ymin}^{y0} F(y) y^{w-1} dy; the cut ymin comes from
    // the Fricke-modulus bound |F(1/(Nu))| = N^{k/2} u^k |F(u)| <= 2 N^{k/2} u^k e^{-2 pi u}.
    double sigw = w.real();
    double u0 = 1.5;
    for (;; u0 += 0.5) {
        double m = double(k) - sigw;
        cplx gtail = upper_incomplete_gamma(cplx(m, 0), 2.0 * PI * u0);
        double bound =
            4.0 * std::pow(N, k / 2.0 - sigw) * std::pow(2.0 * PI, -m) * std::abs(gtail);
        if (bound < tol * 0.1 || u0 > 60.0) break;
    }
    double ymin = std::min(1.0 / (N * u0), y0 * 0.999);
    int64_t nmax = f_on_axis_terms(f, ymin);
    tab = reg.coefficients(f, std::max<int64_t>(nmax, 16));

    std::vector<double> cuts{ymin};
    double yc = ymin;
    while (yc < y0) {
        yc = std::min(y0, yc * 1.8);
        cuts.push_back(yc);
    }
    cplx bottom = 0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        bottom += gl_integrate_c(
            [&](double y) {
                int64_t nm = std::min(f_on_axis_terms(f, y), tab->limit);
                return f_on_axis(*tab, y, nm) * std::exp((w - 1.0) * std::log(y));
            },
            cuts[i], cuts[i + 1], 24, 2);
    }
    bottom *= 2.0;
    return top + bottom;
}

namespace {

std::mutex root_mutex;
std::map<std::string, double> root_cache;

}  // namespace

cplx determine_root_number(const NewformSpec& f) {
    const double trials[] = {1.5, 2.0, 2.5};
    std::vector<cplx> ratios;
    for (double s : trials) {
        cplx num = completed_lambda(f, cplx(s, 0));
        cplx den = completed_lambda(f, cplx(1.0 - s, 0));
        if (std::abs(den) < 1e-12) continue;  // degenerate; try other s
        ratios.push_back(num / (std::pow(double(f.level), 0.5 - s) * den));
    }
    if (ratios.empty())
        throw ValidationError("determine_root_number: |Lambda(1-s)| below noise at all trial s");
    for (size_t i = 1; i < ratios.size(); ++i)
        if (std::abs(ratios[i] - ratios[0]) > 1e-6)
            throw ValidationError("determine_root_number: trial s values disagree");
    cplx eps = ratios[0];
    if (std::abs(eps - 1.0) < 1e-6) return 1.0;
    if (std::abs(eps + 1.0) < 1e-6) return -1.0;
    return eps / std::abs(eps);
}

double root_number_cached(const NewformSpec& f) {
    {
        std::lock_guard<std::mutex> lock(root_mutex);
        auto it = root_cache.find(f.label);
        if (it != root_cache.end()) return it->second;
    }
    cplx eps = determine_root_number(f);
    if (std::fabs(std::fabs(eps.real()) - 1.0) > 1e-6 || std::fabs(eps.imag()) > 1e-6)
        throw ValidationError("root_number_cached: root number did not snap to +-1");
    double v = eps.real() > 0 ? 1.0 : -1.0;
    std::lock_guard<std::mutex> lock(root_mutex);
    root_cache[f.label] = v;
    return v;
}

LValueRecord afe_evaluate(const NewformSpec& f, double t, const CutoffG& g, int64_t X) {
    double C = analytic_conductor(f, t);
    double sq = std::sqrt(C);
    int64_t need = int64_t(std::ceil(2.0 * sq));
    if (X < need) throw ValidationError("afe_evaluate: X below 2 sqrt(C)");
    auto tab = FormRegistry::instance().coefficients(f, X);
    if (tab->limit < need)
        throw ValidationError("afe_evaluate: coefficient table shorter than 2 sqrt(C)");
    double eps = root_number_cached(f);
    cplx ratio = gamma_ratio_unit(f.weight, t);
    cplx s1 = 0, s2 = 0;
    for (int64_t n = 1; n <= need; ++n) {
        double lam = tab->lam(n);
        if (lam == 0.0) continue;
        double gv = g(double(n) / sq);
        if (gv == 0.0) continue;
        double amp = lam / std::sqrt(double(n)) * gv;
        double th = t * std::log(double(n));
        cplx osc(std::cos(th), -std::sin(th));  // n^{-it}
        s1 += amp * osc;
        s2 += amp * std::conj(osc);
    }
    LValueRecord rec;
    rec.t = t;
    rec.L = s1 + eps * ratio * s2;
    rec.method = LValueRecord::Method::AFE;
    rec.truncation = need;
    rec.error_estimate = std::sqrt(double(f.level)) * std::pow(C, -0.25);
    return rec;
}

LValueRecord lvalue_completed(const NewformSpec& f, double t) {
    cplx s(0.5, t);
    cplx lam = completed_lambda(f, s);
    LValueRecord rec;
    rec.t = t;
    rec.L = lam / gamma_c(s + cplx((f.weight - 1) / 2.0, 0));
    rec.method = LValueRecord::Method::CompletedLambda;
    rec.truncation = 0;
    rec.error_estimate = 1e-9;
    return rec;
}

CoeffStats coeff_average_stats(const NewformSpec& f, int64_t X) {
    auto tab = FormRegistry::instance().coefficients(f, X);
    CoeffStats st;
    st.X = X;
    double s2 = 0, s1 = 0, sh = 0, t54 = 0, t74 = 0;
    for (int64_t n = 1; n <= X; ++n) {
        double l = std::fabs(tab->lam(n));
        if (l == 0.0) continue;
        s2 += l * l;
        s1 += l;
        sh += l / std::sqrt(double(n));
        t54 += l * std::pow(double(n), -1.25);
        t74 += l * std::pow(double(n), -1.75);
    }
    st.rankin_mean = s2 / double(X);
    st.abs_mean = s1 / double(X);
    st.abs_halfpower = sh / std::sqrt(double(X));
    st.tail_alpha_54 = t54;
    st.tail_alpha_74 = t74;
    return st;
}

cplx block_sum(const CoeffTable& table, int64_t M1, int64_t M2, double t) {
    if (M2 > table.limit) throw ValidationError("block_sum: M2 beyond table");
    double sr = 0, cr = 0, si = 0, ci = 0;
    for (int64_t n = M1; n <= M2; ++n) {
        double lam = table.lam(n);
        if (lam == 0.0) continue;
        double th = t * std::log(double(n));
        double xr = lam * std::cos(th), xi = -lam * std::sin(th);
        double yr = xr - cr, tr = sr + yr;
        cr = (tr - sr) - yr;
        sr = tr;
        double yi = xi - ci, ti = si + yi;
        ci = (ti - si) - yi;
        si = ti;
    }
    return {sr, si};
}

cplx block_sum_plain(const CoeffTable& table, int64_t M1, int64_t M2, double t) {
    if (M2 > table.limit) throw ValidationError("block_sum: M2 beyond table");
    cplx s = 0;
    for (int64_t n = M1; n <= M2; ++n) {
        double lam = table.lam(n);
        if (lam == 0.0) continue;
        double th = t * std::log(double(n));
        s += cplx(lam * std::cos(th), -lam * std::sin(th));
    }
    return s;
}

std::vector<ScanRow> subconvexity_scan(const NewformSpec& f, const std::vector<double>& t_grid,
                                       int threads) {
    double tmax = 0;
    for (double t : t_grid) {
        if (t < 2.0 || t > 10000.0)
            throw ValidationError("subconvexity_scan: t grid outside [2, 1e4]");
        tmax = std::max(tmax, t);
    }
    int64_t Xmax = int64_t(std::ceil(2.0 * std::sqrt(analytic_conductor(f, tmax)))) + 2;
    FormRegistry::instance().coefficients(f, Xmax);  // warm the shared cache
    root_number_cached(f);
    CutoffG g;
    std::vector<ScanRow> rows(t_grid.size());
    parallel_for(int64_t(t_grid.size()), threads, [&](int64_t i) {
        double t = t_grid[size_t(i)];
        double C = analytic_conductor(f, t);
        int64_t X = int64_t(std::ceil(2.0 * std::sqrt(C)));
        auto rec = afe_evaluate(f, t, g, X);
        ScanRow r;
        r.t = t;
        r.re_L = rec.L.real();
        r.im_L = rec.L.imag();
        r.abs_L = std::abs(rec.L);
        r.weyl_ratio = r.abs_L / (std::cbrt(t) * std::log(t));
        r.convexity_ratio = r.abs_L / std::sqrt(t);
        r.C = C;
        r.X_trunc = rec.truncation;
        rows[size_t(i)] = r;
    });
    return rows;
}

}  // namespace jutila
