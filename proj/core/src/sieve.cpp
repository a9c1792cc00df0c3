#include "jutila/sieve.hpp"

#include <cmath>

#include "jutila/errors.hpp"

namespace jutila {

namespace {

inline double y_param(const BlockPhaseData& b, int64_t r) {
    return double(b.d) / (2.0 * double(r) * double(b.u) * double(b.q));
}

inline double dist_to_nearest_int(double x) {
    double f = x - std::floor(x);
    return std::min(f, 1.0 - f);
}

}  // namespace

int64_t inv_ra_mod_q(const BlockPhaseData& b) {
    if (b.q == 1) return 0;
    int64_t ra = mulmod(((b.a % b.q) + b.q) % b.q, ((b.r % b.q) + b.q) % b.q, b.q);
    return mod_inverse(ra, b.q);
}

double g_jr(const BlockPhaseData& b, double ell, Sign sign) {
    double rat = b.q == 1 ? 0.0 : double(inv_ra_mod_q(b)) * ell / double(b.q);
    return phase_g(b, ell / double(b.r), sign) + rat;
}

double z_ijr(const BlockPhaseData& bi, const BlockPhaseData& bj) {
    return double(inv_ra_mod_q(bi)) / double(bi.q) - double(inv_ra_mod_q(bj)) / double(bj.q);
}

PairPhaseDerivatives pair_phase_derivatives(const BlockPhaseData& bi, const BlockPhaseData& bj,
                                            int64_t r, double ell, Sign sign) {
    if (ell <= 0) throw ValidationError("pair_phase_derivatives: ell must be positive");
    double s = sign_value(sign);
    double yi = y_param(bi, r), yj = y_param(bj, r);
    double t = bi.t;
    auto S = [&](double y) { return y * (std::sqrt(1.0 + t / (PI * y * ell)) + s); };
    PairPhaseDerivatives out;
    out.first = -s * (S(yi) - S(yj)) + z_ijr(bi, bj);
    double wi = 1.0 / std::sqrt(1.0 + t / (PI * ell * yi));
    double wj = 1.0 / std::sqrt(1.0 + t / (PI * ell * yj));
    out.second = s * t / (2.0 * PI * ell * ell) * (wi - wj);
    return out;
}

double exp_sum_sigma(const BlockPhaseData& bi, const BlockPhaseData& bj, int64_t L1, int64_t L2,
                     Sign sign) {
    if (L1 > L2) throw ValidationError("exp_sum_sigma: need L1 <= L2");
    if (L2 - L1 > 1000000) throw BudgetExceeded("exp_sum_sigma: range exceeds 1e6");
    cplx suffix = 0;
    double best = 0;
    for (int64_t l = L2; l >= L1; --l) {
        double d = phase_g(bi, double(l) / double(bi.r), sign) -
                   phase_g(bj, double(l) / double(bj.r), sign);
        suffix += cis2pi(d);
        best = std::max(best, std::abs(suffix));
    }
    return best;
}

bool RegionR::contains(int64_t uu, int64_t vv) const {
    if (uu < U1 || uu > U2 || vv < V1 || vv > V2) return false;
    if (gcd64(uu, vv) != 1) return false;
    int64_t d2 = d * d;
    return ((d % d2 * 0 + (d * uu) % d2 + d2) % d2) == (((-c * vv) % d2 + d2) % d2);
}

std::vector<int> j_in_Jbr(const FareySystem& sys, int64_t c, int64_t d, int64_t r) {
    std::vector<int> idx;
    for (int j = 1; j <= sys.J(); ++j) {
        const auto& sp = sys.splits[size_t(j - 1)];
        if (sp.c != c || sp.d != d) continue;
        if (sp.q > 1 && gcd64(((r % sp.q) + sp.q) % sp.q, sp.q) != 1) continue;
        idx.push_back(j);
    }
    return idx;
}

int64_t resonance_count_B(const FareySystem& sys, int64_t r, const ResonanceQuery& query,
                          int64_t pair_budget) {
    auto js = j_in_Jbr(sys, query.region.c, query.region.d, r);
    std::vector<int> members;
    for (int j : js) {
        int64_t u = sys.u[size_t(j - 1)], v = sys.v[size_t(j - 1)];
        if (query.region.contains(u, v)) members.push_back(j);
    }
    int64_t n = int64_t(members.size());
    if (n > 10000 || n * n > pair_budget)
        throw BudgetExceeded("resonance_count_B: pair budget exceeded");
    std::vector<double> frac(members.size());
    std::vector<int64_t> uv(members.size());
    for (size_t i = 0; i < members.size(); ++i) {
        BlockPhaseData b = make_block_phase_data(sys, members[i], r);
        frac[i] = b.q == 1 ? 0.0 : double(inv_ra_mod_q(b)) / double(b.q);
        uv[i] = sys.u[size_t(members[i] - 1)] * sys.v[size_t(members[i] - 1)];
    }
    int64_t count = 0;
    for (size_t i = 0; i < members.size(); ++i) {
        for (size_t j = 0; j < members.size(); ++j) {
            if (dist_to_nearest_int(frac[i] - frac[j]) > query.delta1) continue;
            if (std::fabs(double(uv[i] - uv[j])) > query.UV * query.delta2) continue;
            ++count;
        }
    }
    return count;
}

double gk_bound(double delta1, double delta2, double A, double C) {
    if (delta1 <= 0 || delta1 > 1 || delta2 <= 0 || delta2 > 1)
        throw ValidationError("gk_bound: deltas must lie in (0, 1]");
    return delta1 * delta2 * A * A * C * C + delta1 * delta1 * A * A * C * C + A * C +
           delta2 * A * A + delta2 * C * C;
}

SieveBand make_sieve_band(const FareySystem& sys, int64_t r, int64_t c, int64_t d, int64_t L,
                          int64_t U, int64_t V) {
    auto pow2 = [](int64_t x) { return x >= 1 && (x & (x - 1)) == 0; };
    if (!pow2(L) || !pow2(U) || !pow2(V))
        throw ValidationError("make_sieve_band: L, U, V must be powers of 2");
    SieveBand b;
    b.L = L;
    b.U = U;
    b.V = V;
    b.L1 = std::max<int64_t>(1, L / 2);
    b.L2 = L;
    b.U1 = std::max<int64_t>(1, U / 2);
    b.U2 = U;
    b.V1 = std::max<int64_t>(1, V / 2);
    b.V2 = V;
    b.r = r;
    b.c = c;
    b.d = d;
    b.t = sys.params.t;
    const double R = sys.params.R, M = double(sys.params.M), t = sys.params.t;
    if (double(V) > 4.0 * R) throw ValidationError("make_sieve_band: V exceeds the R band");
    if (double(L) > 16.0 * double(r) * M / (double(d * d) * R * R))
        throw ValidationError("make_sieve_band: L exceeds the rM/(dR)^2 band");
    double u_scale = t * double(V) / M;
    if (double(U) < u_scale / 8.0 || double(U) > 8.0 * u_scale)
        throw ValidationError("make_sieve_band: U out of the tV/M band");
    b.eta = std::sqrt(double(d) * double(d) * t / (double(r) * double(L) * double(U) * double(V)));
    b.X0 = std::sqrt(double(L) * std::max(b.eta, 1.0));
    return b;
}

LargeSieveReport large_sieve_check(const FareySystem& sys, const SieveBand& band,
                                   const std::vector<cplx>& nu, const std::vector<cplx>& lambda,
                                   Sign sign) {
    auto js = j_in_Jbr(sys, band.c, band.d, band.r);
    RegionR region{band.U1, band.U2, band.V1, band.V2, band.c, band.d};
    std::vector<int> members;
    for (int j : js)
        if (region.contains(sys.u[size_t(j - 1)], sys.v[size_t(j - 1)])) members.push_back(j);
    if (nu.size() != members.size())
        throw ValidationError("large_sieve_check: nu size must match |J(beta,r) cap R|");
    if (lambda.size() != size_t(band.L2 - band.L1 + 1))
        throw ValidationError("large_sieve_check: lambda size must match [L1, L2]");

    std::vector<BlockPhaseData> bd;
    for (int j : members) bd.push_back(make_block_phase_data(sys, j, band.r));

    cplx outer = 0;
    for (int64_t l = band.L1; l <= band.L2; ++l) {
        cplx inner = 0;
        for (size_t i = 0; i < bd.size(); ++i) {
            double lr = double(l) / double(band.r);
            double xs = stationary_point(bd[i], lr, sign);
            double w = sys.omega_j(members[i], xs);
            if (w == 0.0) continue;
            double h = amplitude_h(bd[i], lr, sign);
            inner += nu[i] * h * w * cis2pi(g_jr(bd[i], double(l), sign));
        }
        outer += lambda[size_t(l - band.L1)] * inner;
    }
    double lhs = std::norm(outer);

    // RHS: (eta r V / U) { X0 (#R)^2 + int_{X0}^{L} B(Delta1(X), Delta2(X)) dX }
    auto B_of_X = [&](double X) -> double {
        ResonanceQuery qy;
        qy.delta1 = std::min(0.5, double(band.L) / (X * X));
        qy.delta2 = double(band.L) / (band.eta * X * X);
        qy.region = region;
        qy.UV = double(band.U) * double(band.V);
        return double(resonance_count_B(sys, band.r, qy));
    };
    double x_int = 0;
    if (double(band.L) > band.X0) {
        // adaptive Simpson on a decreasing step function
        struct Seg {
            double a, b, fa, fm, fb;
        };
        std::vector<Seg> stack{{band.X0, double(band.L), B_of_X(band.X0),
                                B_of_X(0.5 * (band.X0 + double(band.L))), B_of_X(double(band.L))}};
        int evals = 3;
        while (!stack.empty()) {
            Seg s = stack.back();
            stack.pop_back();
            double m = 0.5 * (s.a + s.b);
            double lm = 0.5 * (s.a + m), rm = 0.5 * (m + s.b);
            double flm = B_of_X(lm), frm = B_of_X(rm);
            evals += 2;
            double whole = (s.b - s.a) / 6.0 * (s.fa + 4.0 * s.fm + s.fb);
            double left = (m - s.a) / 6.0 * (s.fa + 4.0 * flm + s.fm);
            double right = (s.b - m) / 6.0 * (s.fm + 4.0 * frm + s.fb);
            if (std::fabs(left + right - whole) < 0.005 * (std::fabs(whole) + 1.0) ||
                s.b - s.a < 1e-3 * (double(band.L) - band.X0) || evals > 4000) {
                x_int += left + right;
            } else {
                stack.push_back({s.a, m, s.fa, flm, s.fm});
                stack.push_back({m, s.b, s.fm, frm, s.fb});
            }
        }
    }
    LargeSieveReport rep;
    rep.region_count = int64_t(members.size());
    rep.x_integral = x_int;
    rep.lhs = lhs;
    rep.rhs = band.eta * double(band.r) * double(band.V) / double(band.U) *
              (band.X0 * double(members.size()) * double(members.size()) + x_int);
    rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
    return rep;
}

}  // namespace jutila
