#pragma once

#include <vector>

#include "jutila/forms.hpp"
#include "jutila/special.hpp"

namespace jutila {

// C = (N/pi^2) |(k+1)/2 + it| |(k+3)/2 + it|
double analytic_conductor(const NewformSpec& f, double t);

// Partial Dirichlet series sum_{n<=X} lambda(n) n^{-s}; optional crude tail
// bound sum_{n>X} d(n) n^{-Re s}.
cplx dirichlet_series(const CoeffTable& table, cplx s, int64_t X, double* tail_bound = nullptr);

// Completed Lambda(s,f) = Gamma_C(s+(k-1)/2) L(s,f), valid for all s.
// Mellin split at y0 = 1/sqrt(N): incomplete-gamma sums above y0, direct
// quadrature of the q-expansion below, with a Fricke-modulus tail bound.
// Does not use the root number.
cplx completed_lambda(const NewformSpec& f, cplx s, double tol = 1e-10);

// eps_f = Lambda(s) / (N^{1/2-s} Lambda(1-s)) at several s, snapped to +-1.
cplx determine_root_number(const NewformSpec& f);
double root_number_cached(const NewformSpec& f);

struct LValueRecord {
    double t = 0;
    cplx L{0, 0};
    enum class Method { AFE, CompletedLambda } method = Method::AFE;
    int64_t truncation = 0;
    double error_estimate = 0;  // for AFE: the Lemma error scale sqrt(N) C^{-1/4}
};

// Approximate functional equation with the compactly supported cutoff; both
// sums truncate at 2 sqrt(C).
LValueRecord afe_evaluate(const NewformSpec& f, double t, const CutoffG& g, int64_t X);

// L(1/2+it) through the completed-Lambda route.
LValueRecord lvalue_completed(const NewformSpec& f, double t);

struct CoeffStats {
    int64_t X = 0;
    double rankin_mean = 0;       // X^{-1} sum |lambda|^2
    double abs_mean = 0;          // X^{-1} sum |lambda|
    double abs_halfpower = 0;     // x^{-1/2} sum |lambda| n^{-1/2}
    double tail_alpha_54 = 0;     // sum_{n<=X} |lambda| n^{-5/4}
    double tail_alpha_74 = 0;     // sum_{n<=X} |lambda| n^{-7/4}
    double delta = 0;             // fixed 0
};
CoeffStats coeff_average_stats(const NewformSpec& f, int64_t X);

// Kahan-compensated sum_{M1<=n<=M2} lambda(n) n^{-it}.
cplx block_sum(const CoeffTable& table, int64_t M1, int64_t M2, double t);
cplx block_sum_plain(const CoeffTable& table, int64_t M1, int64_t M2, double t);

struct ScanRow {
    double t, re_L, im_L, abs_L, weyl_ratio, convexity_ratio, C;
    int64_t X_trunc;
};
std::vector<ScanRow> subconvexity_scan(const NewformSpec& f, const std::vector<double>& t_grid,
                                       int threads);

}  // namespace jutila
