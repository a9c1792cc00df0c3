#pragma once

#include <complex>
#include <vector>

#include "jutila/arith.hpp"
#include "jutila/forms.hpp"

namespace jutila {

struct FareyParams {
    double t = 0;
    int64_t M = 0, M0 = 0;
    double R = 1;    // sqrt(M/M0)
    int64_t H = 1;   // ceil(M^2/(R^2 t)) = ceil(M*M0/t)
    int64_t M1 = 0, M2 = 0;
    int s = 6;       // partition smoothness, even, >= 6

    static FareyParams make(double t, int64_t M, int64_t M0, int64_t M1, int64_t M2, int s = 6);
};

// alpha = -u/v decomposed into good part -a/q and bad part c/d (mod N).
struct GoodBadSplit {
    Rational source;   // the fraction alpha itself
    int64_t N = 1;
    int64_t a = 0, q = 1, c = 0, d = 1;
    int64_t Nflat = 1;  // N prod_{p|N} p^{-1}
};

GoodBadSplit good_bad_decompose(const Rational& alpha, int64_t N);
int64_t n_flat(int64_t N);

// omega(x): 0 for x <= -H, (1 + sin^{s+1}(pi x / 2H))/2 for |x| <= H, 1 for x >= H.
double omega(double x, int64_t H, int s);

struct FareySystem {
    FareyParams params;
    // j = 1..J; fractions alpha_j = -u[j-1]/v[j-1], increasing
    std::vector<int64_t> u, v;
    std::vector<Rational> rho;        // mediants, size J-1
    std::vector<int64_t> breakpoints; // N_0..N_J, size J+1
    std::vector<GoodBadSplit> splits; // per j, against the level in use
    int64_t level = 1;

    int J() const { return int(u.size()); }
    Rational alpha(int j) const { return Rational(-u[size_t(j - 1)], v[size_t(j - 1)]); }
    double omega_j(int j, double x) const;
    double sum_omega(double x) const;  // telescoped
    std::complex<double> block_weight_F(int j, double x, double t) const;
    // support of omega_j: [N_{j-1} - H, N_j + H]
    std::pair<int64_t, int64_t> support(int j) const;
};

// All reduced fractions with denominator <= floor(R) in [x1, x2], ascending.
std::vector<Rational> farey_in_interval(double R, double x1, double x2);

// Throws DegenerateInterval when M2 - M1 < 4H or no fraction lies in the
// Jutila interval.
FareySystem build_farey_system(const FareyParams& params, int64_t level = 1);

struct BlockDecompositionReport {
    std::complex<double> difference;     // block_sum - sum_j sum_n lambda e(alpha_j n) F_j(n)
    std::complex<double> compensation;   // exact edge compensation
    double residual;                     // |difference - compensation|
};
BlockDecompositionReport block_decomposition_check(const CoeffTable& table,
                                                   const FareySystem& system, double t);

// max over a grid of |d^s/dx^s {F_j(x) x^{-(k-1)/2}}| (v_j R)^s x^{(k-1)/2},
// for s = 0..s_max (central finite differences).
std::vector<double> derivative_decay_diagnostic(const FareySystem& system, int j, int s_max,
                                                int weight);

}  // namespace jutila
