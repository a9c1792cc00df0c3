#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "jutila/int128.hpp"

namespace jutila {

using std::int64_t;

struct Factorization {
    std::vector<std::pair<int64_t, int>> factors;  // primes strictly increasing

    int64_t reconstruct() const;
    int ord(int64_t p) const;  // exponent of p, 0 if absent
};

// Deterministic: trial division + Brent-Pollard rho with Miller-Rabin.
Factorization factorize(int64_t n);

bool is_prime(int64_t n);
int64_t gcd64(int64_t a, int64_t b);
int64_t mulmod(int64_t a, int64_t b, int64_t m);
int64_t powmod(int64_t a, int64_t e, int64_t m);

// Extended-Euclid inverse in [0, q). Throws NotCoprime.
int64_t mod_inverse(int64_t a, int64_t q);

int64_t euler_phi(int64_t n);
int ord_p(int64_t n, int64_t p);
std::vector<int64_t> divisors(int64_t n);          // sorted ascending
std::vector<int64_t> primes_up_to(int64_t n);      // sieve
int64_t primitive_root(int64_t pe);                // for odd prime powers and 2, 4

// Reduced fraction num/den, den >= 1, gcd(|num|,den)=1.
struct Rational {
    int64_t num = 0;
    int64_t den = 1;

    Rational() = default;
    Rational(int64_t n, int64_t d);

    double value() const { return double(num) / double(den); }
    Rational operator-() const { return Rational(-num, den); }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator<(const Rational& o) const {
        return int128(num) * o.den < int128(o.num) * den;
    }
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    // value reduced mod 1 into [0,1)
    Rational mod1() const;
};

Rational mediant(const Rational& a, const Rational& b);

}  // namespace jutila
