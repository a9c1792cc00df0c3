#pragma once

#include "jutila/farey.hpp"
#include "jutila/quadrature.hpp"
#include "jutila/voronoi.hpp"

namespace jutila {

enum class Sign { Plus, Minus };

inline int sign_value(Sign s) { return s == Sign::Plus ? +1 : -1; }

// Per-block stationary-phase package: the block j of a Farey system, its
// good/bad split, the dual modulus r with (r, q_j) = 1, and t.
struct BlockPhaseData {
    const FareySystem* system = nullptr;
    int j = 1;
    int64_t a = 0, q = 1, c = 0, d = 1;
    int64_t r = 1;
    double t = 0;
    int64_t u = 0, v = 1;
};

BlockPhaseData make_block_phase_data(const FareySystem& system, int j, int64_t r);

// phi_pm(x) = -(t/2pi) log x - alpha_j x -/+ 2 sqrt(l x / (r q^2)) -/+ 1/8
double phase_phi(const BlockPhaseData& b, double ell, Sign sign, double x);
double phase_phi_d1(const BlockPhaseData& b, double ell, Sign sign, double x);
double phase_phi_d2(const BlockPhaseData& b, double ell, Sign sign, double x);

// x^pm(l) = (d/2u)^2 (sqrt(l + 2 t u q/(pi d)) pm sqrt(l))^2, rationalized on
// the minus branch.
double stationary_point(const BlockPhaseData& b, double ell, Sign sign);

// g^pm(l) and h^pm(l) of the transformed main term (arguments NOT divided by r).
double phase_g(const BlockPhaseData& b, double ell, Sign sign);
double amplitude_h(const BlockPhaseData& b, double ell, Sign sign);

// h_{jr}(l) = (l/r) h^pm(l/r): increasing in l (used by the sieve side).
double amplitude_h_jr(const BlockPhaseData& b, double ell, Sign sign);

// I^pm_j(l) = int x^{-1/4} omega_j(x) e(phi_pm(x)) dx over supp omega_j.
cplx integral_direct(const BlockPhaseData& b, int64_t ell, Sign sign, const QuadratureSpec& spec);

// Stationary-phase main term of I^pm_j(l):
//   omega_j(x*) x*^{-1/4} e(phi(x*) + 1/8) / sqrt(phi''(x*))
cplx integral_main_term(const BlockPhaseData& b, int64_t ell, Sign sign);

// (mp 1)^k omega_j(x^pm(l/r)) h^pm(l/r) e(g^pm(l/r)) per the truncated
// transform; excludes lambda(l) and the rational phase.
cplx main_term_single(const BlockPhaseData& b, int64_t ell, Sign sign, int weight);

struct StatPhaseReport {
    cplx direct{0, 0};
    cplx main{0, 0};
    double rel_err = 0;
};
StatPhaseReport check_stationary_phase(const BlockPhaseData& b, int64_t ell, Sign sign,
                                       const QuadratureSpec& spec);

struct TransformParams {
    int64_t K1 = 0;   // ~ C_K M / R^2 = C_K M0
    double C_K = 1.0;
};
TransformParams make_transform_params(const FareyParams& p, double C_K = 1.0);

struct BlockTransformReport {
    cplx direct_A{0, 0};       // sum_n lambda(n) e(alpha_j n) F_j(n)
    cplx transformed_B{0, 0};  // truncated dual main-term sum
    double abs_err = 0;
    double envelope = 0;       // sqrt(M)(M/R^2)^{1/(2(s-1))} + M^{5/2} R^2 / H^3
    int64_t ell_limit = 0;
};

// Compares the direct block sum against the Voronoi-transformed truncated
// main-term sum, with constants from the voronoi module.
BlockTransformReport block_transform_check(const NewformSpec& f, const FareySystem& system,
                                           int j, const TransformParams& tp);

}  // namespace jutila
