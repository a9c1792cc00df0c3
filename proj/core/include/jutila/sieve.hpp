#pragma once

#include "jutila/statphase.hpp"

namespace jutila {

struct PairPhaseDerivatives {
    double first = 0;   // d/dl  [g_{ir} - g_{jr}](l)
    double second = 0;  // d2/dl2[g_{ir} - g_{jr}](l)
};

// Closed forms via y_j = d/(2 r u_j q_j).
PairPhaseDerivatives pair_phase_derivatives(const BlockPhaseData& bi, const BlockPhaseData& bj,
                                            int64_t r, double ell, Sign sign);

// g_{jr}(l) = g^pm(l/r) + \overline{r a_j} l / q_j
double g_jr(const BlockPhaseData& b, double ell, Sign sign);
int64_t inv_ra_mod_q(const BlockPhaseData& b);

// z_ijr = \overline{a_i r}/q_i - \overline{a_j r}/q_j (literal representatives)
double z_ijr(const BlockPhaseData& bi, const BlockPhaseData& bj);

// Sigma_{ijr}(L1, L2) = max_{L1 <= L1' <= L2} |sum_{l=L1'}^{L2} e(g_i^pm(l/r) - g_j^pm(l/r))|
// via one backward suffix pass.
double exp_sum_sigma(const BlockPhaseData& bi, const BlockPhaseData& bj, int64_t L1, int64_t L2,
                     Sign sign);

struct RegionR {
    int64_t U1 = 1, U2 = 1, V1 = 1, V2 = 1;
    int64_t c = 0, d = 1;

    bool contains(int64_t u, int64_t v) const;
};

struct ResonanceQuery {
    double delta1 = 0, delta2 = 0;
    RegionR region;
    double UV = 1;  // the scale in |u_i v_i - u_j v_j| <= UV delta2
};

// j with beta_j = c/d and (q_j, r) = 1 (1-based indices)
std::vector<int> j_in_Jbr(const FareySystem& sys, int64_t c, int64_t d, int64_t r);

// Ordered-pair count of near-resonant fractions, exhaustive.
int64_t resonance_count_B(const FareySystem& sys, int64_t r, const ResonanceQuery& query,
                          int64_t pair_budget = 100000000);

// Delta1 Delta2 A^2 C^2 + Delta1^2 A^2 C^2 + A C + Delta2 A^2 + Delta2 C^2
double gk_bound(double delta1, double delta2, double A, double C);

struct SieveBand {
    int64_t L = 1, U = 1, V = 1;  // dyadic size parameters
    int64_t L1 = 1, L2 = 1, U1 = 1, U2 = 1, V1 = 1, V2 = 1;
    int64_t r = 1, c = 0, d = 1;
    double t = 0;
    double eta = 0;  // sqrt(d^2 t/(r L U V))
    double X0 = 0;   // sqrt(L max(eta, 1))
};

SieveBand make_sieve_band(const FareySystem& sys, int64_t r, int64_t c, int64_t d, int64_t L,
                          int64_t U, int64_t V);

struct LargeSieveReport {
    double lhs = 0, rhs = 0, ratio = 0;
    int64_t region_count = 0;
    double x_integral = 0;
};

// LHS of the large-sieve inequality computed directly; RHS assembled from the
// envelope Delta1(X) = L/X^2, Delta2(X) = L/(eta X^2) with the X-integral of
// brute-force B by adaptive Simpson.
LargeSieveReport large_sieve_check(const FareySystem& sys, const SieveBand& band,
                                   const std::vector<cplx>& nu, const std::vector<cplx>& lambda,
                                   Sign sign);

}  // namespace jutila
