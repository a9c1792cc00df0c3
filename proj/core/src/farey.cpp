#include "jutila/farey.hpp"

#include <cmath>

#include "jutila/errors.hpp"
#include "jutila/lfunction.hpp"
#include "jutila/special.hpp"

namespace jutila {

FareyParams FareyParams::make(double t, int64_t M, int64_t M0, int64_t M1, int64_t M2, int s) {
    if (t <= 0) throw ValidationError("FareyParams: t must be positive");
    if (M0 < 1 || M < M0) throw ValidationError("FareyParams: need M >= M0 >= 1");
    if (M1 < 1 || M2 < M1 || M2 > 2 * M1)
        throw ValidationError("FareyParams: need M1 <= M2 <= 2 M1");
    if (s < 6 || s % 2 != 0) throw ValidationError("FareyParams: s must be even and >= 6");
    FareyParams p;
    p.t = t;
    p.M = M;
    p.M0 = M0;
    p.R = std::sqrt(double(M) / double(M0));
    p.H = int64_t(std::ceil(double(M) * double(M0) / t));
    if (p.H < 1) p.H = 1;
    p.M1 = M1;
    p.M2 = M2;
    p.s = s;
    return p;
}

int64_t n_flat(int64_t N) {
    int64_t nf = N;
    for (auto [p, e] : factorize(N).factors) {
        (void)e;
        nf /= p;
    }
    return nf;
}

GoodBadSplit good_bad_decompose(const Rational& alpha, int64_t N) {
    // alpha = -u/v
    int64_t u = -alpha.num;
    int64_t v = alpha.den;
    GoodBadSplit gb;
    gb.source = alpha;
    gb.N = N;
    gb.Nflat = n_flat(N);
    int64_t d = 1;
    for (auto [p, e] : factorize(v).factors) {
        if (e < ord_p(N, p))
            for (int i = 0; i < e; ++i) d *= p;
    }
    int64_t q = v / d;
    int64_t c = 0;
    if (d > 1) {
        int64_t qinv = mod_inverse(q % d, d);
        c = (((-u) % d + d) % d * qinv) % d;
    }
    int64_t num = u + q * c;
    if (num % d != 0) throw ValidationError("good_bad_decompose: internal split failure");
    gb.a = num / d;
    gb.q = q;
    gb.c = c;
    gb.d = d;
    if (gcd64(std::abs(gb.a), q) != 1 || gcd64(c == 0 ? 1 : c, d) != 1 || gcd64(q, d) != 1)
        throw ValidationError("good_bad_decompose: coprimality failure");
    if (gb.Nflat % d != 0) throw ValidationError("good_bad_decompose: d does not divide N-flat");
    return gb;
}

double omega(double x, int64_t H, int s) {
    if (H < 1) throw ValidationError("omega: H must be >= 1");
    if (s < 2) throw ValidationError("omega: s must be >= 2");
    if (x >= double(H)) return 1.0;
    if (x <= -double(H)) return 0.0;
    double sp = std::sin(PI * x / (2.0 * double(H)));
    double p = 1.0;
    for (int i = 0; i < s + 1; ++i) p *= sp;
    return 0.5 * (1.0 + p);
}

std::vector<Rational> farey_in_interval(double R, double x1, double x2) {
    if (!(x1 < x2)) throw ValidationError("farey_in_interval: need x1 < x2");
    if (R < 1) throw ValidationError("farey_in_interval: need R >= 1");
    int64_t Q = int64_t(std::floor(R));

    // smallest fraction >= x1 with denominator <= Q
    bool have = false;
    int64_t bn = 0, bd = 1;
    for (int64_t v = 1; v <= Q; ++v) {
        int64_t n = int64_t(std::ceil(x1 * double(v)));
        while (double(n - 1) >= x1 * double(v)) --n;
        while (double(n) < x1 * double(v)) ++n;
        if (!have || int128(n) * bd < int128(bn) * v) {
            have = true;
            bn = n;
            bd = v;
        }
    }
    std::vector<Rational> out;
    Rational first(bn, bd);
    if (double(first.num) > x2 * double(first.den)) return out;
    out.push_back(first);

    // smallest fraction > first
    have = false;
    for (int64_t v = 1; v <= Q; ++v) {
        int64_t n = int64_t(std::floor(double(first.num) * double(v) / double(first.den))) + 1;
        while (int128(n - 1) * first.den > int128(first.num) * v) --n;
        while (int128(n) * first.den <= int128(first.num) * v) ++n;
        if (!have || int128(n) * bd < int128(bn) * v) {
            have = true;
            bn = n;
            bd = v;
        }
    }
    Rational second(bn, bd);
    if (double(second.num) > x2 * double(second.den)) return out;
    out.push_back(second);

    // next-term recurrence for consecutive Farey neighbours
    while (true) {
        const Rational& a = out[out.size() - 2];
        const Rational& b = out[out.size() - 1];
        int64_t k = (Q + a.den) / b.den;
        int64_t nn = k * b.num - a.num;
        int64_t nd = k * b.den - a.den;
        if (double(nn) > x2 * double(nd)) break;
        out.push_back(Rational(nn, nd));
    }
    return out;
}

FareySystem build_farey_system(const FareyParams& params, int64_t level) {
    const double t = params.t;
    const int64_t H = params.H;
    if (params.M2 - params.M1 < 4 * H)
        throw DegenerateInterval("build_farey_system: M2 - M1 < 4H");
    double x1 = -t / (2.0 * PI * double(params.M1 + 2 * H));
    double x2 = -t / (2.0 * PI * double(params.M2 - 2 * H));
    auto fr = farey_in_interval(params.R, x1, x2);
    if (fr.empty()) throw DegenerateInterval("build_farey_system: no Farey fraction in interval");

    FareySystem sys;
    sys.params = params;
    sys.level = level;
    for (const auto& f : fr) {
        if (f.num >= 0)
            throw ValidationError("build_farey_system: non-negative fraction in interval");
        sys.u.push_back(-f.num);
        sys.v.push_back(f.den);
        sys.splits.push_back(good_bad_decompose(f, level));
    }
    int J = sys.J();
    auto h = [&](double y) { return -t / (2.0 * PI * y); };
    sys.breakpoints.resize(size_t(J) + 1);
    sys.breakpoints[0] = params.M1 + 2 * H;
    for (int j = 1; j < J; ++j) {
        Rational m = mediant(fr[size_t(j - 1)], fr[size_t(j)]);
        sys.rho.push_back(m);
        sys.breakpoints[size_t(j)] = int64_t(std::floor(h(m.value()) + 0.5));
    }
    sys.breakpoints[size_t(J)] = params.M2 - 2 * H;
    for (int j = 1; j <= J; ++j)
        if (sys.breakpoints[size_t(j)] <= sys.breakpoints[size_t(j - 1)])
            throw DegenerateInterval("build_farey_system: breakpoints not increasing");
    return sys;
}

double FareySystem::omega_j(int j, double x) const {
    const int64_t H = params.H;
    return omega(x - double(breakpoints[size_t(j - 1)]), H, params.s) -
           omega(x - double(breakpoints[size_t(j)]), H, params.s);
}

double FareySystem::sum_omega(double x) const {
    const int64_t H = params.H;
    return omega(x - double(breakpoints.front()), H, params.s) -
           omega(x - double(breakpoints.back()), H, params.s);
}

std::pair<int64_t, int64_t> FareySystem::support(int j) const {
    return {breakpoints[size_t(j - 1)] - params.H, breakpoints[size_t(j)] + params.H};
}

namespace {

// e((u/v) x) cycles, with exact modular reduction when x is integral
double rational_phase_cycles(int64_t u, int64_t v, double x) {
    if (x == std::floor(x) && std::fabs(x) < 9e15) {
        int64_t n = int64_t(x);
        int64_t r = mulmod(((u % v) + v) % v, ((n % v) + v) % v, v);
        return double(r) / double(v);
    }
    return double(u) * x / double(v);
}

}  // namespace

std::complex<double> FareySystem::block_weight_F(int j, double x, double t) const {
    if (x <= 0) throw ValidationError("block_weight_F: x must be positive");
    double w = omega_j(j, x);
    if (w == 0.0) return {0.0, 0.0};
    // F_j(x) = x^{-it} e(-alpha_j x) omega_j(x), alpha_j = -u_j/v_j
    double cyc = rational_phase_cycles(u[size_t(j - 1)], v[size_t(j - 1)], x) -
                 t * std::log(x) / (2.0 * PI);
    return w * cis2pi(cyc);
}

BlockDecompositionReport block_decomposition_check(const CoeffTable& table,
                                                   const FareySystem& system, double t) {
    const int64_t M1 = system.params.M1, M2 = system.params.M2;
    if (M2 > table.limit) throw ValidationError("block_decomposition_check: table too short");
    std::complex<double> direct = block_sum(table, M1, M2, t);

    std::complex<double> blocks = 0;
    for (int j = 1; j <= system.J(); ++j) {
        auto [lo, hi] = system.support(j);
        std::complex<double> bj = 0;
        for (int64_t n = std::max<int64_t>(lo, 1); n <= std::min(hi, table.limit); ++n) {
            double lam = table.lam(n);
            if (lam == 0.0) continue;
            double cyc = rational_phase_cycles(-system.u[size_t(j - 1)],
                                               system.v[size_t(j - 1)], double(n));
            std::complex<double> F = system.block_weight_F(j, double(n), t);
            bj += lam * cis2pi(cyc) * F;  // e(alpha_j n) F_j(n); rational phases cancel
        }
        blocks += bj;
    }
    std::complex<double> comp = 0;
    for (int64_t n = M1; n <= M2; ++n) {
        double lam = table.lam(n);
        if (lam == 0.0) continue;
        double so = system.sum_omega(double(n));
        if (so == 1.0) continue;
        comp += lam * cis2pi(-t * std::log(double(n)) / (2.0 * PI)) * (1.0 - so);
    }
    BlockDecompositionReport rep;
    rep.difference = direct - blocks;
    rep.compensation = comp;
    rep.residual = std::abs(rep.difference - rep.compensation);
    return rep;
}

namespace {

// Fornberg weights for derivative order m on nodes xs about x0
std::vector<double> fd_weights(int m, const std::vector<double>& xs, double x0) {
    int n = int(xs.size()) - 1;
    std::vector<std::vector<double>> c(size_t(n + 1), std::vector<double>(size_t(m + 1), 0.0));
    double c1 = 1.0, c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = xs[size_t(i)] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = xs[size_t(i)] - xs[size_t(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[size_t(i)][size_t(k)] = c1 *
                                              (k * c[size_t(i - 1)][size_t(k - 1)] -
                                               c5 * c[size_t(i - 1)][size_t(k)]) /
                                              c2;
                c[size_t(i)][0] = -c1 * c5 * c[size_t(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[size_t(j)][size_t(k)] =
                    (c4 * c[size_t(j)][size_t(k)] - k * c[size_t(j)][size_t(k - 1)]) / c3;
            c[size_t(j)][0] = c4 * c[size_t(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(size_t(n + 1));
    for (int i = 0; i <= n; ++i) w[size_t(i)] = c[size_t(i)][size_t(m)];
    return w;
}

}  // namespace

std::vector<double> derivative_decay_diagnostic(const FareySystem& system, int j, int s_max,
                                                int weight) {
    if (s_max > 4)
        throw ValidationError("derivative_decay_diagnostic: finite-difference noise beyond s=4");
    const double t = system.params.t;
    const double vr = double(system.v[size_t(j - 1)]) * system.params.R;
    auto [lo, hi] = system.support(j);
    double halfk = (weight - 1) / 2.0;
    auto G = [&](double x) { return system.block_weight_F(j, x, t) * std::pow(x, -halfk); };
    double h = 0.05 * vr;
    if (!(h > 0)) throw ValidationError("derivative_decay_diagnostic: step underflow");
    std::vector<double> nodes(9);
    for (int i = 0; i < 9; ++i) nodes[size_t(i)] = (i - 4) * h;
    std::vector<double> maxima(size_t(s_max + 1), 0.0);
    const int G_pts = 33;
    for (int g = 0; g < G_pts; ++g) {
        double x = double(lo) + (g + 0.5) / G_pts * double(hi - lo);
        if (x - 4 * h <= 0) continue;
        std::complex<double> f[9];
        for (int i = 0; i < 9; ++i) f[i] = G(x + nodes[size_t(i)]);
        for (int s = 0; s <= s_max; ++s) {
            std::complex<double> d = 0;
            if (s == 0) {
                d = f[4];
            } else {
                auto w = fd_weights(s, nodes, 0.0);
                for (int i = 0; i < 9; ++i) d += w[size_t(i)] * f[i];
            }
            double ratio = std::abs(d) * std::pow(vr, double(s)) * std::pow(x, halfk);
            maxima[size_t(s)] = std::max(maxima[size_t(s)], ratio);
        }
    }
    return maxima;
}

}  // namespace jutila
