#include <doctest.h>

#include <random>

#include "jutila/errors.hpp"
#include "jutila/sieve.hpp"

using namespace jutila;

namespace {

FareySystem rich_system() {
    auto p = FareyParams::make(1e5, 2160, 135, 2376, 4104);  // R = 4
    return build_farey_system(p, 1);
}

// independently coded membership + double loop
int64_t resonance_oracle(const FareySystem& sys, int64_t r, const ResonanceQuery& q) {
    struct Item {
        double frac;
        int64_t uv;
    };
    std::vector<Item> items;
    for (int j = 1; j <= sys.J(); ++j) {
        const auto& sp = sys.splits[size_t(j - 1)];
        if (sp.c != q.region.c || sp.d != q.region.d) continue;
        if (sp.q > 1 && gcd64(((r % sp.q) + sp.q) % sp.q, sp.q) != 1) continue;
        int64_t u = sys.u[size_t(j - 1)], v = sys.v[size_t(j - 1)];
        if (u < q.region.U1 || u > q.region.U2 || v < q.region.V1 || v > q.region.V2) continue;
        if (gcd64(u, v) != 1) continue;
        int64_t d2 = q.region.d * q.region.d;
        int64_t lhs = ((q.region.d * u) % d2 + d2) % d2;
        int64_t rhs = (((-q.region.c * v) % d2) + d2) % d2;
        if (lhs != rhs) continue;
        // local extended-euclid inverse, separate from arith::mod_inverse
        double frac = 0;
        if (sp.q > 1) {
            int64_t ar = ((sp.a % sp.q + sp.q) % sp.q) * ((r % sp.q + sp.q) % sp.q) % sp.q;
            int64_t inv = 0;
            for (int64_t x = 1; x < sp.q; ++x)
                if (ar * x % sp.q == 1) {
                    inv = x;
                    break;
                }
            frac = double(inv) / double(sp.q);
        }
        items.push_back({frac, u * v});
    }
    int64_t count = 0;
    for (const auto& A : items) {
        for (const auto& B : items) {
            double d = std::fabs(A.frac - B.frac);
            d = std::min(d - std::floor(d), 1.0 - (d - std::floor(d)));
            if (d > q.delta1) continue;
            if (std::fabs(double(A.uv - B.uv)) > q.UV * q.delta2) continue;
            ++count;
        }
    }
    return count;
}

}  // namespace

TEST_CASE("pair phase derivatives: diagonal and finite differences") {
    auto sys = rich_system();
    auto js = j_in_Jbr(sys, 0, 1, 1);
    REQUIRE(js.size() >= 4);
    auto b0 = make_block_phase_data(sys, js[0], 1);
    auto pd = pair_phase_derivatives(b0, b0, 1, 100.0, Sign::Plus);
    CHECK(pd.first == 0.0);
    CHECK(pd.second == 0.0);

    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        int i = js[rng() % js.size()], j = js[rng() % js.size()];
        if (i == j) continue;
        auto bi = make_block_phase_data(sys, i, 1);
        auto bj = make_block_phase_data(sys, j, 1);
        double ell = 50.0 + double(rng() % 5000);
        Sign sg = (rng() & 1) ? Sign::Plus : Sign::Minus;
        auto d = pair_phase_derivatives(bi, bj, 1, ell, sg);
        auto gd = [&](double l) { return g_jr(bi, l, sg) - g_jr(bj, l, sg); };
        double h1 = ell * 1e-4;
        double fd1 = (gd(ell + h1) - gd(ell - h1)) / (2 * h1);
        CHECK(std::fabs(d.first - fd1) <= 1e-6 * std::max(1.0, std::fabs(d.first)));
        double h2 = ell * 2e-3;
        double fd2 = (gd(ell + h2) - 2 * gd(ell) + gd(ell - h2)) / (h2 * h2);
        CHECK(std::fabs(d.second - fd2) <= 1e-4 * std::max(1e-9, std::fabs(d.second)));
    }
}

TEST_CASE("second derivative of the pair difference keeps one sign") {
    auto sys = rich_system();
    auto js = j_in_Jbr(sys, 0, 1, 1);
    auto bi = make_block_phase_data(sys, js[0], 1);
    auto bj = make_block_phase_data(sys, js[2], 1);
    int sign_seen = 0;
    for (double ell = 8; ell <= 8000; ell *= 1.4) {
        auto d = pair_phase_derivatives(bi, bj, 1, ell, Sign::Plus);
        int s = d.second > 0 ? 1 : (d.second < 0 ? -1 : 0);
        if (sign_seen == 0) sign_seen = s;
        CHECK(s == sign_seen);
    }
}

TEST_CASE("exponential sum suffix maximum") {
    auto sys = rich_system();
    auto js = j_in_Jbr(sys, 0, 1, 1);
    auto bi = make_block_phase_data(sys, js[0], 1);
    auto bj = make_block_phase_data(sys, js[1], 1);
    CHECK(exp_sum_sigma(bi, bj, 57, 57, Sign::Plus) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(exp_sum_sigma(bi, bi, 10, 60, Sign::Minus) == doctest::Approx(51.0).epsilon(1e-9));
    // naive O(n^2) oracle
    double naive = 0;
    for (int64_t L1p = 200; L1p <= 360; ++L1p) {
        cplx s = 0;
        for (int64_t l = L1p; l <= 360; ++l)
            s += cis2pi(phase_g(bi, double(l), Sign::Plus) - phase_g(bj, double(l), Sign::Plus));
        naive = std::max(naive, std::abs(s));
    }
    CHECK(exp_sum_sigma(bi, bj, 200, 360, Sign::Plus) == doctest::Approx(naive).epsilon(1e-12));
    CHECK_THROWS_AS(exp_sum_sigma(bi, bj, 1, 2000000, Sign::Plus), BudgetExceeded);
}

TEST_CASE("resonance counting: exact cases, oracle, monotonicity") {
    auto sys = rich_system();
    RegionR region{1, 1000, 1, 8, 0, 1};
    std::vector<int> members;
    for (int j : j_in_Jbr(sys, 0, 1, 1))
        if (region.contains(sys.u[size_t(j - 1)], sys.v[size_t(j - 1)])) members.push_back(j);
    REQUIRE(members.size() >= 5);
    double UV = 4096;
    // delta = 0: diagonal pairs qualify
    ResonanceQuery zero{0.0, 0.0, region, UV};
    CHECK(resonance_count_B(sys, 1, zero) >= int64_t(members.size()));
    // all pairs
    double dmax = 0;
    for (int i : members)
        for (int j : members)
            dmax = std::max(dmax, std::fabs(double(sys.u[size_t(i - 1)] * sys.v[size_t(i - 1)] -
                                                   sys.u[size_t(j - 1)] * sys.v[size_t(j - 1)])));
    ResonanceQuery all{0.5, dmax / UV + 1e-9, region, UV};
    CHECK(resonance_count_B(sys, 1, all) == int64_t(members.size() * members.size()));
    // mid grid vs oracle, symmetry, monotonicity
    int64_t prev = -1;
    for (double d1 : {0.01, 0.05, 0.2, 0.5}) {
        ResonanceQuery q{d1, d1 * 2, region, UV};
        int64_t B = resonance_count_B(sys, 1, q);
        CHECK(B == resonance_oracle(sys, 1, q));
        if (prev >= 0) CHECK(B >= prev);
        prev = B;
    }
}

TEST_CASE("five-term bound expression") {
    CHECK(gk_bound(1, 1, 1, 1) == doctest::Approx(5.0));
    // doubling A multiplies terms 1, 2, 4 by 4 and term 3 by 2
    double d1 = 0.3, d2 = 0.7, A = 5, C = 3;
    double t1 = d1 * d2 * A * A * C * C, t2 = d1 * d1 * A * A * C * C, t3 = A * C,
           t4 = d2 * A * A, t5 = d2 * C * C;
    CHECK(gk_bound(d1, d2, A, C) == doctest::Approx(t1 + t2 + t3 + t4 + t5).epsilon(1e-14));
    CHECK(gk_bound(d1, d2, 2 * A, C) ==
          doctest::Approx(4 * (t1 + t2 + t4) + 2 * t3 + t5).epsilon(1e-14));
    CHECK_THROWS_AS(gk_bound(0.0, 0.5, 1, 1), ValidationError);
    CHECK_THROWS_AS(gk_bound(0.5, 1.5, 1, 1), ValidationError);
}

TEST_CASE("large sieve check: degenerate and random-weight cases") {
    auto sys = rich_system();
    auto band = make_sieve_band(sys, 1, 0, 1, 64, 32, 4);
    CHECK(band.eta > 0);
    CHECK(band.X0 == doctest::Approx(std::sqrt(double(band.L) * std::max(band.eta, 1.0))));
    RegionR region{band.U1, band.U2, band.V1, band.V2, 0, 1};
    std::vector<int> members;
    for (int j : j_in_Jbr(sys, 0, 1, 1))
        if (region.contains(sys.u[size_t(j - 1)], sys.v[size_t(j - 1)])) members.push_back(j);
    REQUIRE(!members.empty());
    // zero weights
    std::vector<cplx> nu0(members.size(), cplx(0, 0)), lam(size_t(band.L2 - band.L1 + 1), 1.0);
    auto rep0 = large_sieve_check(sys, band, nu0, lam, Sign::Plus);
    CHECK(rep0.lhs == 0.0);
    CHECK(rep0.ratio == 0.0);
    // random unimodular weights: finite bounded ratio
    std::mt19937_64 rng(47);
    std::vector<cplx> nu(members.size());
    for (auto& x : nu) x = cis2pi(double(rng() % 997) / 997.0);
    for (auto& x : lam) x = cis2pi(double(rng() % 997) / 997.0);
    auto rep = large_sieve_check(sys, band, nu, lam, Sign::Plus);
    CHECK(std::isfinite(rep.ratio));
    CHECK(rep.rhs > 0);
    CHECK(rep.region_count == int64_t(members.size()));
}

TEST_CASE("large sieve: single j, single ell") {
    auto sys = rich_system();
    // catch exactly one member: tight region around the first v=1 block
    auto js = j_in_Jbr(sys, 0, 1, 1);
    int jpick = js[0];
    int64_t u = sys.u[size_t(jpick - 1)], v = sys.v[size_t(jpick - 1)];
    SieveBand band = make_sieve_band(sys, 1, 0, 1, 64, 32, 4);
    band.U1 = u;
    band.U2 = u;
    band.V1 = v;
    band.V2 = v;
    band.L1 = band.L2 = 40;
    std::vector<cplx> nu{cplx(0.6, 0.8)}, lam{cplx(0, 1)};
    auto rep = large_sieve_check(sys, band, nu, lam, Sign::Plus);
    auto b = make_block_phase_data(sys, jpick, 1);
    double lr = 40.0;
    double h = amplitude_h(b, lr, Sign::Plus);
    double w = sys.omega_j(jpick, stationary_point(b, lr, Sign::Plus));
    CHECK(rep.lhs == doctest::Approx(h * h * w * w).epsilon(1e-10));
    CHECK(rep.rhs > 0);
}

TEST_CASE("zest chain: derivative difference scale tracked") {
    auto sys = rich_system();
    auto band = make_sieve_band(sys, 1, 0, 1, 64, 32, 4);
    auto js = j_in_Jbr(sys, 0, 1, 1);
    double lo = 1e300, hi = 0;
    for (size_t i = 0; i < js.size(); ++i) {
        for (size_t j = i + 1; j < js.size(); ++j) {
            auto bi = make_block_phase_data(sys, js[i], 1);
            auto bj = make_block_phase_data(sys, js[j], 1);
            int64_t duv = sys.u[size_t(js[i] - 1)] * sys.v[size_t(js[i] - 1)] -
                          sys.u[size_t(js[j] - 1)] * sys.v[size_t(js[j] - 1)];
            if (duv == 0) continue;
            for (double ell : {40.0, 56.0}) {
                auto d = pair_phase_derivatives(bi, bj, 1, ell, Sign::Plus);
                double scale = band.eta * std::fabs(double(duv)) / (double(band.U) * double(band.V));
                double ratio = std::fabs(d.first - z_ijr(bi, bj)) / scale;
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
    }
    CHECK(lo > 0);
    CHECK(std::isfinite(hi));
    MESSAGE("zest ratio band: [", lo, ", ", hi, "]");
}
