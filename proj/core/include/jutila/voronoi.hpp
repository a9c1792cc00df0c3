#pragma once

#include "jutila/characters.hpp"
#include "jutila/forms.hpp"
#include "jutila/quadrature.hpp"
#include "jutila/special.hpp"

namespace jutila {

// N1 = (N,q), N2 = N/N1, q2 = (N2^inf, q), q1 = q/q2, a/q = a1/q1 + a2/q2 (mod 1)
struct VoronoiSplit {
    int64_t N1 = 1, N2 = 1, q2 = 1, q1 = 1;
    int64_t a1 = 0, a2 = 0;
};

VoronoiSplit split_fraction(int64_t a, int64_t q, int64_t N);

// Registry-closed twisting: principal characters and the CM self-twist
// resolve; anything else throws UnsupportedTwist.
const NewformSpec& twisted_form_resolve(const NewformSpec& f, const DirichletCharacter& chi);

struct TwistTerm {
    int64_t m = 1;
    DirichletCharacter chi;       // the character labelling the twist
    cplx coeff{0, 0};             // C(f, alpha, m, chi)
    const NewformSpec* form = nullptr;
};

struct TwistDecomposition {
    const NewformSpec* form = nullptr;
    int64_t a = 0, q = 1;
    int64_t qstar = 1;            // prod_{p|q} p^{1+ord_p q}
    std::vector<TwistTerm> terms;
};

// sum lambda_f(n) e(an/q) n^{-s} = sum_terms C m^{-s} L(s, f^chi), built from
// the prime-power Gauss-sum expansion iterated over partial fractions.
TwistDecomposition additive_twist_decompose(const NewformSpec& f, int64_t a, int64_t q);

int64_t twist_q_cap();  // desk-scale cap on q (config via JUTILA_TWIST_QCAP)

struct TwistResidual {
    double residual = 0;
    double tail_bound = 0;
};

// Both sides truncated at X (the right side as partial L-sums to X each).
TwistResidual verify_twist_identity(const TwistDecomposition& dec, cplx s, int64_t X);

// C^2 bump: quintic-smoothstep edges of width `edge`, plateau in between.
struct TestFunction {
    double A = 0, B = 0, edge = 0;

    TestFunction(double A_, double B_, double edge_);
    double operator()(double x) const;
    double d1(double x) const;
    double d2(double x) const;
};

cplx voronoi_lhs(const CoeffTable& tab, int64_t a, int64_t q, const TestFunction& F);

// One dual-side summand of the generalized Voronoi identity:
//   coeff * sum_l lambda(l) e(-inv_a1r l / q1) * 2 pi i^k int F(q1 x) J_{k-1}(4 pi sqrt(lx/(q1 r)))dx
struct DualTerm {
    int64_t r = 1;
    cplx coeff{0, 0};                    // C * eta_g(D2) / (m sqrt(D2)); excludes 2 pi i^k
    const NewformSpec* dual_form = nullptr;
    int64_t q1 = 1;
    int64_t inv_a1r = 0;                 // \overline{a1 r} mod q1
};

std::vector<DualTerm> voronoi_dual_terms(const NewformSpec& f, int64_t a, int64_t q);

// Calibrated unimodular eta_g(D2); eta_g(1) = 1 identically.
cplx voronoi_eta(const NewformSpec& f, int64_t D2);

struct VoronoiRhsResult {
    cplx value{0, 0};
    int64_t ell_used = 0;
    double tail_estimate = 0;
    bool converged = true;
};

VoronoiRhsResult voronoi_rhs(const NewformSpec& f, int64_t a, int64_t q, const TestFunction& F,
                             const QuadratureSpec& spec, int threads = 1);

// Shared dual-sum engine (also used by the stationary-phase checks' full-Bessel
// route and the eta calibration).
VoronoiRhsResult voronoi_dual_sum(const std::vector<DualTerm>& terms, int weight,
                                  const TestFunction& F, const QuadratureSpec& spec,
                                  int threads);

}  // namespace jutila
