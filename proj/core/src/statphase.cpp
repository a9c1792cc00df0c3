#include "jutila/statphase.hpp"

#include <cmath>

#include "jutila/errors.hpp"

namespace jutila {

BlockPhaseData make_block_phase_data(const FareySystem& system, int j, int64_t r) {
    if (j < 1 || j > system.J()) throw ValidationError("make_block_phase_data: j out of range");
    const auto& sp = system.splits[size_t(j - 1)];
    if (gcd64(((r % sp.q) + sp.q) % sp.q == 0 ? sp.q : ((r % sp.q) + sp.q) % sp.q, sp.q) != 1 &&
        sp.q > 1)
        throw ValidationError("make_block_phase_data: (q_j, r) must be 1");
    BlockPhaseData b;
    b.system = &system;
    b.j = j;
    b.a = sp.a;
    b.q = sp.q;
    b.c = sp.c;
    b.d = sp.d;
    b.r = r;
    b.t = system.params.t;
    b.u = system.u[size_t(j - 1)];
    b.v = system.v[size_t(j - 1)];
    return b;
}

double phase_phi(const BlockPhaseData& b, double ell, Sign sign, double x) {
    if (x <= 0) throw ValidationError("phase_phi: x must be positive");
    double s = sign_value(sign);
    double core = -b.t / (2.0 * PI) * std::log(x) + double(b.u) / double(b.v) * x;
    double root = 2.0 * std::sqrt(ell * x / (double(b.r) * double(b.q) * double(b.q)));
    return core - s * root - s * 0.125;
}

double phase_phi_d1(const BlockPhaseData& b, double ell, Sign sign, double x) {
    double s = sign_value(sign);
    return -b.t / (2.0 * PI * x) + double(b.u) / double(b.v) -
           s / double(b.q) * std::sqrt(ell / (double(b.r) * x));
}

double phase_phi_d2(const BlockPhaseData& b, double ell, Sign sign, double x) {
    double s = sign_value(sign);
    return b.t / (2.0 * PI * x * x) +
           s / (2.0 * double(b.q)) * std::sqrt(ell / double(b.r)) * std::pow(x, -1.5);
}

double stationary_point(const BlockPhaseData& b, double ell, Sign sign) {
    if (ell < 0) throw ValidationError("stationary_point: ell must be >= 0");
    double T = 2.0 * b.t * double(b.u) * double(b.q) / (PI * double(b.d));
    double pref = double(b.d) / (2.0 * double(b.u));
    pref *= pref;
    if (sign == Sign::Plus) {
        double root = std::sqrt(ell + T) + std::sqrt(ell);
        return pref * root * root;
    }
    // rationalized minus branch avoids the cancellation for ell >> T
    double denom = std::sqrt(ell + T) + std::sqrt(ell);
    return pref * (T / denom) * (T / denom);
}

double phase_g(const BlockPhaseData& b, double ell, Sign sign) {
    double s = sign_value(sign);
    double x = stationary_point(b, ell, sign);
    return -b.t / (2.0 * PI) * std::log(x) + double(b.u) / double(b.v) * x -
           s * 2.0 / double(b.q) * std::sqrt(ell * x) + 0.125 - s * 0.125;
}

double amplitude_h(const BlockPhaseData& b, double ell, Sign sign) {
    if (ell <= 0) throw ValidationError("amplitude_h: ell must be positive");
    double s = sign_value(sign);
    double x = stationary_point(b, ell, sign);
    double rad = double(b.q) * b.t * std::sqrt(ell) / (PI * std::pow(x, 1.5)) + s * ell / x;
    if (rad <= 0)
        throw ValidationError("amplitude_h: non-positive radicand (outside the stationary regime)");
    return 1.0 / std::sqrt(rad);
}

double amplitude_h_jr(const BlockPhaseData& b, double ell, Sign sign) {
    return ell / double(b.r) * amplitude_h(b, ell / double(b.r), sign);
}

cplx integral_direct(const BlockPhaseData& b, int64_t ell, Sign sign,
                     const QuadratureSpec& spec) {
    auto [lo, hi] = b.system->support(b.j);
    if (hi <= lo) return 0.0;
    auto amp = [&](double x) {
        double w = b.system->omega_j(b.j, x);
        return w == 0.0 ? 0.0 : std::pow(x, -0.25) * w;
    };
    auto ph = [&](double x) { return phase_phi(b, double(ell), sign, x); };
    auto dph = [&](double x) { return phase_phi_d1(b, double(ell), sign, x); };
    auto res = oscillatory_integral(amp, ph, dph, double(lo), double(hi), spec);
    if (!res.converged)
        throw BudgetExceeded("integral_direct: quadrature budget exhausted", res.err_est);
    return res.value;
}

cplx integral_main_term(const BlockPhaseData& b, int64_t ell, Sign sign) {
    double lr = double(ell) / double(b.r);
    double xs = stationary_point(b, lr, sign);
    double w = b.system->omega_j(b.j, xs);
    double dd = phase_phi_d2(b, double(ell), sign, xs);
    if (dd <= 0) throw ValidationError("integral_main_term: phi'' <= 0 at the stationary point");
    double amp = w * std::pow(xs, -0.25) / std::sqrt(dd);
    return amp * cis2pi(phase_phi(b, double(ell), sign, xs) + 0.125);
}

cplx main_term_single(const BlockPhaseData& b, int64_t ell, Sign sign, int weight) {
    double lr = double(ell) / double(b.r);
    double xs = stationary_point(b, lr, sign);
    double w = b.system->omega_j(b.j, xs);
    if (w == 0.0) return 0.0;
    double h = amplitude_h(b, lr, sign);
    double sgnfac = sign == Sign::Plus ? (weight % 2 == 0 ? 1.0 : -1.0) : 1.0;
    return sgnfac * w * h * cis2pi(phase_g(b, lr, sign));
}

StatPhaseReport check_stationary_phase(const BlockPhaseData& b, int64_t ell, Sign sign,
                                       const QuadratureSpec& spec) {
    StatPhaseReport rep;
    rep.direct = integral_direct(b, ell, sign, spec);
    rep.main = integral_main_term(b, ell, sign);
    double scale = std::abs(rep.main);
    rep.rel_err = scale > 0 ? std::abs(rep.direct - rep.main) / scale
                            : std::abs(rep.direct - rep.main);
    return rep;
}

TransformParams make_transform_params(const FareyParams& p, double C_K) {
    TransformParams tp;
    tp.C_K = C_K;
    tp.K1 = int64_t(std::ceil(C_K * double(p.M) / (p.R * p.R)));
    if (tp.K1 < 1) tp.K1 = 1;
    return tp;
}

BlockTransformReport block_transform_check(const NewformSpec& f, const FareySystem& system,
                                           int j, const TransformParams& tp) {
    const auto& reg = FormRegistry::instance();
    const auto& p = system.params;
    const double t = p.t;
    const auto& sp = system.splits[size_t(j - 1)];

    // K = (M/(v_j R))^{2/(s-1)} M0 must dominate r K1 / d^2
    double K = std::pow(double(p.M) / (double(sp.q * sp.d) * p.R), 2.0 / double(p.s - 1)) *
               double(p.M0);

    // direct side: sum lambda(n) e(alpha_j n) F_j(n) = sum lambda(n) n^{-it} omega_j(n)
    auto [lo, hi] = system.support(j);
    auto tab = reg.coefficients(f, hi + 1);
    cplx A = 0;
    for (int64_t n = std::max<int64_t>(1, lo); n <= hi; ++n) {
        double lam = tab->lam(n);
        if (lam == 0.0) continue;
        double w = system.omega_j(j, double(n));
        if (w == 0.0) continue;
        A += lam * w * cis2pi(-t * std::log(double(n)) / (2.0 * PI));
    }

    // transformed side: truncated dual main-term sums with voronoi constants
    int64_t v = system.v[size_t(j - 1)];
    int64_t a_mod = ((-system.u[size_t(j - 1)]) % v + v) % v;
    auto duals = voronoi_dual_terms(f, a_mod, v);
    cplx B = 0;
    int64_t ell_limit_max = 0;
    for (const auto& dt : duals) {
        BlockPhaseData bd = make_block_phase_data(system, j, dt.r);
        int64_t limit = int64_t(double(tp.K1) * double(dt.r) / double(sp.d * sp.d));
        if (double(limit) > K)
            throw ValidationError("block_transform_check: r K1 / d^2 exceeds the K regime");
        ell_limit_max = std::max(ell_limit_max, limit);
        auto dual_tab = reg.coefficients(*dt.dual_form, std::max<int64_t>(limit, 16));
        cplx sum = 0;
        for (int64_t ell = 1; ell <= limit; ++ell) {
            double lam = dual_tab->lam(ell);
            if (lam == 0.0) continue;
            double cyc = dt.q1 == 1 ? 0.0
                                    : -double(mulmod(dt.inv_a1r, ell % dt.q1, dt.q1)) /
                                          double(dt.q1);
            cplx phases = cis2pi(cyc);
            cplx contrib = main_term_single(bd, ell, Sign::Plus, f.weight) +
                           main_term_single(bd, ell, Sign::Minus, f.weight);
            sum += lam * phases * contrib;
        }
        B += dt.coeff * sum;
    }

    BlockTransformReport rep;
    rep.direct_A = A;
    rep.transformed_B = B;
    rep.abs_err = std::abs(A - B);
    rep.envelope = std::sqrt(double(p.M)) *
                       std::pow(double(p.M) / (p.R * p.R), 0.5 / double(p.s - 1)) +
                   std::pow(double(p.M), 2.5) * p.R * p.R / std::pow(double(p.H), 3.0);
    rep.ell_limit = ell_limit_max;
    return rep;
}

}  // namespace jutila
