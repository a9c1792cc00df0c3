#include <doctest.h>

#include <random>

#include "jutila/errors.hpp"
#include "jutila/statphase.hpp"

using namespace jutila;

namespace {

FareySystem small_system() {
    auto p = FareyParams::make(1e4, 465, 465, 515, 930);
    return build_farey_system(p, 1);
}

FareySystem rich_system() {
    auto p = FareyParams::make(1e5, 2160, 135, 2376, 4104);  // R = 4
    return build_farey_system(p, 1);
}

}  // namespace

TEST_CASE("phase reductions and the plus/minus difference") {
    auto sys = small_system();
    auto b = make_block_phase_data(sys, 1, 1);
    double x = 700.0;
    // ell = 0: phi reduces to -(t/2pi) log x + (u/v) x -/+ 1/8
    double core = -b.t / (2 * PI) * std::log(x) + double(b.u) / double(b.v) * x;
    CHECK(phase_phi(b, 0.0, Sign::Plus, x) == doctest::Approx(core - 0.125).epsilon(1e-15));
    CHECK(phase_phi(b, 0.0, Sign::Minus, x) == doctest::Approx(core + 0.125).epsilon(1e-15));
    for (double ell : {1.0, 17.0, 160.0}) {
        double diff = phase_phi(b, ell, Sign::Plus, x) - phase_phi(b, ell, Sign::Minus, x);
        double expect = -4.0 * std::sqrt(ell * x / (double(b.r) * double(b.q * b.q))) - 0.25;
        CHECK(diff == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("stationary points: degeneration, roots, ordering, stability") {
    auto sys = rich_system();
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        int j = 1 + int(rng() % sys.J());
        auto b = make_block_phase_data(sys, j, 1);
        // ell = 0: both signs give h(alpha_j) = t v/(2 pi u)
        double x0 = b.t * double(b.v) / (2 * PI * double(b.u));
        CHECK(stationary_point(b, 0.0, Sign::Plus) == doctest::Approx(x0).epsilon(1e-12));
        CHECK(stationary_point(b, 0.0, Sign::Minus) == doctest::Approx(x0).epsilon(1e-12));
        double ell = 1.0 + double(rng() % 2000);
        for (Sign sg : {Sign::Plus, Sign::Minus}) {
            double xs = stationary_point(b, ell, sg);
            CHECK(xs > 0);
            // phi'(x*) = 0, scaled by the natural size t/(2 pi x)
            double rel = std::fabs(phase_phi_d1(b, ell * b.r, sg, xs)) * xs / (b.t / (2 * PI));
            CHECK(rel < 1e-8);
            // defining quadratic (u/v) x -/+ (sqrt(l)/q) sqrt(x) - t/2pi = 0
            double resid = double(b.u) / double(b.v) * xs -
                           sign_value(sg) * std::sqrt(ell) / double(b.q) * std::sqrt(xs) -
                           b.t / (2 * PI);
            CHECK(std::fabs(resid) / (b.t / (2 * PI)) < 1e-10);
        }
        CHECK(stationary_point(b, ell, Sign::Minus) <= stationary_point(b, ell, Sign::Plus));
    }
    // rationalized minus branch survives ell >> t-term
    auto b = make_block_phase_data(sys, 1, 1);
    double huge = 1e12;
    double xm = stationary_point(b, huge, Sign::Minus);
    double resid = double(b.u) / double(b.v) * xm +
                   std::sqrt(huge) / double(b.q) * std::sqrt(xm) - b.t / (2 * PI);
    CHECK(std::fabs(resid) / (b.t / (2 * PI)) < 1e-9);
}

TEST_CASE("g equals phi at the stationary point plus 1/8") {
    auto sys = small_system();
    auto b = make_block_phase_data(sys, 1, 1);
    for (double ell : {1.0, 5.0, 43.0, 260.0}) {
        for (Sign sg : {Sign::Plus, Sign::Minus}) {
            double lr = ell / double(b.r);
            double xs = stationary_point(b, lr, sg);
            double diff = phase_g(b, lr, sg) - phase_phi(b, ell, sg, xs) - 0.125;
            CHECK(std::fabs(diff) < 1e-9);
        }
    }
}

TEST_CASE("amplitude h: positivity, regime error, scaling, h_jr monotone") {
    auto sys = small_system();
    auto b = make_block_phase_data(sys, 1, 1);
    CHECK(amplitude_h(b, 3.0, Sign::Plus) > 0);
    CHECK(amplitude_h(b, 3.0, Sign::Minus) > 0);
    CHECK_THROWS_AS(amplitude_h(b, 0.0, Sign::Plus), ValidationError);
    CHECK_THROWS_AS(amplitude_h(b, 1e14, Sign::Minus), ValidationError);  // outside regime
    // leading order h ~ (q t/(pi x^{3/2}))^{-1/2} ell^{-1/4} as ell -> 0+
    double x0 = stationary_point(b, 0.0, Sign::Plus);
    double lead = std::pow(double(b.q) * b.t / (PI * std::pow(x0, 1.5)), -0.5);
    for (double ell : {1e-4, 1e-7}) {
        double ratio = amplitude_h(b, ell, Sign::Plus) * std::pow(ell, 0.25) / lead;
        CHECK(std::fabs(ratio - 1.0) < 1e-2);
    }
    // h_{jr}(l) = (l/r) h(l/r) increases in l
    double prev = 0;
    for (double ell = 1; ell <= 4000; ell *= 1.3) {
        double h = amplitude_h_jr(b, ell, Sign::Plus);
        CHECK(h > prev);
        prev = h;
    }
}

TEST_CASE("main-term normalization identity") {
    auto sys = rich_system();
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 60; ++trial) {
        int j = 1 + int(rng() % sys.J());
        auto b = make_block_phase_data(sys, j, 1);
        double lr = 0.5 + double(rng() % 3000);
        double x = 0.5 * double(sys.support(j).first) + double(rng() % 2000);
        for (Sign sg : {Sign::Plus, Sign::Minus}) {
            // sqrt(2 sqrt(l) q) x^{1/4} sqrt(phi'') = (q t sqrt(l)/(pi x^{3/2}) +- l/x)^{1/2}
            double lhs2 = 2.0 * std::sqrt(lr) * double(b.q) * std::sqrt(x) *
                          phase_phi_d2(b, lr * b.r, sg, x);
            double rhs2 = double(b.q) * b.t * std::sqrt(lr) / (PI * std::pow(x, 1.5)) +
                          sign_value(sg) * lr / x;
            if (lhs2 <= 0 || rhs2 <= 0) continue;
            CHECK(std::fabs(lhs2 - rhs2) / rhs2 < 1e-10);
        }
    }
}

TEST_CASE("main term magnitude and support cutoff") {
    auto sys = small_system();
    auto b = make_block_phase_data(sys, 1, 1);
    for (int64_t ell = 1; ell < 80; ell += 7) {
        for (Sign sg : {Sign::Plus, Sign::Minus}) {
            cplx m = main_term_single(b, ell, sg, 12);
            double xs = stationary_point(b, double(ell), sg);
            double w = sys.omega_j(1, xs);
            if (w == 0.0) {
                CHECK(std::abs(m) == 0.0);
            } else {
                CHECK(std::abs(m) <= amplitude_h(b, double(ell), sg) + 1e-14);
            }
        }
    }
}

TEST_CASE("direct integral: self-convergence and agreement with the main term") {
    auto sys = small_system();
    auto b = make_block_phase_data(sys, 1, 1);
    QuadratureSpec coarse;
    coarse.abs_tol = 1e-7;
    QuadratureSpec fine;
    fine.abs_tol = 5e-10;
    int64_t ell = 9;  // x* mid-support
    double xs = stationary_point(b, double(ell), Sign::Plus);
    REQUIRE(sys.omega_j(1, xs) > 0.9);
    cplx a = integral_direct(b, ell, Sign::Plus, coarse);
    cplx c = integral_direct(b, ell, Sign::Plus, fine);
    CHECK(std::abs(a - c) < 1e-8);
    auto rep = check_stationary_phase(b, ell, Sign::Plus, fine);
    CHECK(rep.rel_err < 0.02);
    auto repm = check_stationary_phase(b, ell, Sign::Minus, fine);
    CHECK(repm.rel_err < 0.02);
}

TEST_CASE("block transform: truncation stability and error scale") {
    const auto& reg = FormRegistry::instance();
    const auto& delta = reg.by_label("1.12.a");
    auto sys = small_system();
    auto tp = make_transform_params(sys.params);
    auto rep = block_transform_check(delta, sys, 1, tp);
    CHECK(std::isfinite(rep.abs_err));
    CHECK(rep.envelope > 0);
    // relative to the direct block value the transform reproduces it well
    CHECK(rep.abs_err < 0.05 * std::max(1.0, std::abs(rep.direct_A)));
    // doubling K1 beyond the omega support exit changes nothing
    TransformParams tp2 = tp;
    tp2.K1 *= 2;
    // guard: keep r K1 / d^2 within the K regime for this geometry
    auto rep2 = block_transform_check(delta, sys, 1, tp2);
    CHECK(std::abs(rep2.transformed_B - rep.transformed_B) < 1e-10);
}
