#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "jutila/arith.hpp"

namespace jutila {

// Exact rational angle a/b representing the root of unity e(a/b); kept reduced
// with 0 <= a < b so character identities can be tested exactly.
struct RationalAngle {
    int64_t num = 0;
    int64_t den = 1;

    static RationalAngle make(int64_t n, int64_t d);
    RationalAngle operator+(const RationalAngle& o) const;
    RationalAngle scaled(int64_t k) const;  // k * angle mod 1
    bool operator==(const RationalAngle& o) const { return num == o.num && den == o.den; }
    std::complex<double> unit() const;
};

// Discrete-log tables for one prime-power modulus, shared between all
// characters of the group.
struct CharComponentTables {
    int64_t p = 0;
    int e = 0;
    int64_t pe = 1;
    int64_t phi = 1;
    int64_t g = 0;                  // generator (odd p); 5 for p=2, e>=3
    std::vector<int32_t> dlog;      // odd p: index of n in <g>; p=2,e>=3: index of |n| in <5>
    std::vector<int8_t> sign_part;  // p=2,e>=3: 1 if n in -<5>, else 0
};

struct DirichletCharacter {
    int64_t modulus = 1;
    int64_t conductor = 1;
    bool is_principal = true;
    // exponent of the character on each component generator:
    //   odd p: chi(g) = e(m / phi(p^e))
    //   p = 2, e == 2: chi(3) = (-1)^a
    //   p = 2, e >= 3: chi(-1) = (-1)^a, chi(5) = e(m / 2^{e-2})
    struct Exponent {
        int64_t m = 0;
        int a = 0;
    };
    std::vector<Exponent> exps;
    std::shared_ptr<const std::vector<CharComponentTables>> tables;

    // exact angle of chi(n); nullopt when gcd(n, q) > 1
    std::optional<RationalAngle> angle(int64_t n) const;
    std::complex<double> operator()(int64_t n) const;
    bool same_values(const DirichletCharacter& o) const;
    int64_t order() const;
    bool is_real() const;
};

// All phi(q) characters mod q, principal first, fixed deterministic order.
std::vector<DirichletCharacter> char_group(int64_t q);

DirichletCharacter principal_character(int64_t q);

// Quadratic character attached to a fundamental discriminant in {-3, -4}
// (the CM characters needed by the built-in forms).
DirichletCharacter kronecker_character(int64_t D);

// Pointwise product. Moduli must be equal, coprime, or one a power of the
// other's prime support; result is mod lcm.
DirichletCharacter char_product(const DirichletCharacter& a, const DirichletCharacter& b);

// Primitive character inducing chi (defined mod chi.conductor).
DirichletCharacter primitive_character(const DirichletCharacter& chi);

// tau(chi) = sum_{n mod q} chi(n) e(n/q) by direct summation.
std::complex<double> gauss_sum(const DirichletCharacter& chi);

}  // namespace jutila
