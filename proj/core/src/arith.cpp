#include "jutila/arith.hpp"

#include <algorithm>
#include <numeric>

#include "jutila/errors.hpp"

namespace jutila {

std::string to_string(int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? -(unsigned __int128)v : (unsigned __int128)v;
    char buf[48];
    int i = 48;
    while (u) {
        buf[--i] = char('0' + int(u % 10));
        u /= 10;
    }
    std::string s;
    if (neg) s.push_back('-');
    s.append(buf + i, 48 - i);
    return s;
}

int64_t Factorization::reconstruct() const {
    int64_t n = 1;
    for (auto [p, e] : factors)
        for (int i = 0; i < e; ++i) n *= p;
    return n;
}

int Factorization::ord(int64_t p) const {
    for (auto [q, e] : factors)
        if (q == p) return e;
    return 0;
}

int64_t gcd64(int64_t a, int64_t b) { return std::gcd(a, b); }

int64_t mulmod(int64_t a, int64_t b, int64_t m) {
    unsigned __int128 aa = (unsigned __int128)((a % m + m) % m);
    unsigned __int128 bb = (unsigned __int128)((b % m + m) % m);
    return int64_t(aa * bb % (unsigned __int128)m);
}

int64_t powmod(int64_t a, int64_t e, int64_t m) {
    if (m == 1) return 0;
    unsigned __int128 r = 1, base = (unsigned __int128)((a % m + m) % m);
    while (e > 0) {
        if (e & 1) r = r * base % m;
        base = base * base % m;
        e >>= 1;
    }
    return int64_t(r);
}

bool is_prime(int64_t n) {
    if (n < 2) return false;
    for (int64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0) return n == p;
    }
    // deterministic Miller-Rabin for 64-bit with this base set
    int64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) d >>= 1, ++r;
    for (int64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        int64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

namespace {

int64_t pollard_brent(int64_t n) {
    if (n % 2 == 0) return 2;
    // deterministic parameter sweep
    for (int64_t c = 1;; ++c) {
        int64_t x = 2, y = 2, d = 1;
        int64_t q = 1;
        int lam = 1;
        while (d == 1) {
            x = y;
            for (int i = 0; i < lam; ++i) y = (mulmod(y, y, n) + c) % n;
            int k = 0;
            while (k < lam && d == 1) {
                int64_t ys = y;
                int m = std::min(128, lam - k);
                for (int i = 0; i < m; ++i) {
                    y = (mulmod(y, y, n) + c) % n;
                    q = mulmod(q, std::abs(x - y), n);
                }
                d = std::gcd(q, n);
                if (d == n) {
                    // backtrack
                    d = 1;
                    y = ys;
                    do {
                        y = (mulmod(y, y, n) + c) % n;
                        d = std::gcd(std::abs(x - y), n);
                    } while (d == 1);
                    break;
                }
                k += m;
            }
            lam *= 2;
            if (lam > (1 << 24)) break;
        }
        if (d != n && d != 1) return d;
    }
}

void factor_rec(int64_t n, std::vector<int64_t>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    int64_t d = pollard_brent(n);
    factor_rec(d, out);
    factor_rec(n / d, out);
}

}  // namespace

Factorization factorize(int64_t n) {
    if (n < 1) throw ValidationError("factorize: n must be positive");
    Factorization f;
    if (n == 1) return f;
    std::vector<int64_t> ps;
    for (int64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47}) {
        while (n % p == 0) {
            ps.push_back(p);
            n /= p;
        }
    }
    if (n > 1) factor_rec(n, ps);
    std::sort(ps.begin(), ps.end());
    for (size_t i = 0; i < ps.size();) {
        size_t j = i;
        while (j < ps.size() && ps[j] == ps[i]) ++j;
        f.factors.emplace_back(ps[i], int(j - i));
        i = j;
    }
    return f;
}

int64_t mod_inverse(int64_t a, int64_t q) {
    if (q < 1) throw ValidationError("mod_inverse: modulus must be positive");
    if (q == 1) return 0;
    int64_t r0 = q, r1 = ((a % q) + q) % q;
    int64_t s0 = 0, s1 = 1;
    while (r1 != 0) {
        int64_t k = r0 / r1;
        int64_t r2 = r0 - k * r1;
        int64_t s2 = s0 - k * s1;
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    if (r0 != 1) throw NotCoprime("mod_inverse: arguments not coprime");
    return ((s0 % q) + q) % q;
}

int64_t euler_phi(int64_t n) {
    int64_t phi = n;
    for (auto [p, e] : factorize(n).factors) {
        (void)e;
        phi -= phi / p;
    }
    return phi;
}

int ord_p(int64_t n, int64_t p) {
    int e = 0;
    while (n % p == 0) n /= p, ++e;
    return e;
}

std::vector<int64_t> divisors(int64_t n) {
    std::vector<int64_t> ds{1};
    for (auto [p, e] : factorize(n).factors) {
        size_t sz = ds.size();
        int64_t pk = 1;
        for (int i = 1; i <= e; ++i) {
            pk *= p;
            for (size_t j = 0; j < sz; ++j) ds.push_back(ds[j] * pk);
        }
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

std::vector<int64_t> primes_up_to(int64_t n) {
    std::vector<int64_t> ps;
    if (n < 2) return ps;
    std::vector<bool> comp(size_t(n + 1), false);
    for (int64_t i = 2; i <= n; ++i) {
        if (!comp[size_t(i)]) {
            ps.push_back(i);
            for (int64_t j = i * i; j <= n; j += i) comp[size_t(j)] = true;
        }
    }
    return ps;
}

int64_t primitive_root(int64_t pe) {
    if (pe == 1 || pe == 2) return 1;
    if (pe == 4) return 3;
    auto f = factorize(pe);
    if (f.factors.size() != 1 || f.factors[0].first == 2)
        throw ValidationError("primitive_root: modulus must be an odd prime power (or 1,2,4)");
    int64_t p = f.factors[0].first;
    int64_t phi = euler_phi(pe);
    auto qs = factorize(phi);
    for (int64_t g = 2;; ++g) {
        if (g % p == 0) continue;
        bool ok = true;
        for (auto [q, e] : qs.factors) {
            (void)e;
            if (powmod(g, phi / q, pe) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
}

Rational::Rational(int64_t n, int64_t d) {
    if (d == 0) throw ValidationError("Rational: zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    num = n;
    den = d;
}

Rational Rational::operator+(const Rational& o) const {
    int128 n = int128(num) * o.den + int128(o.num) * den;
    int128 d = int128(den) * o.den;
    // reduce in 128-bit then narrow
    int128 a = n < 0 ? -n : n, b = d;
    while (b) {
        int128 t = a % b;
        a = b;
        b = t;
    }
    if (a == 0) a = 1;
    n /= a;
    d /= a;
    constexpr int128 i64max = std::numeric_limits<int64_t>::max();
    if (n > i64max || n < -i64max || d > i64max)
        throw OverflowError("Rational add overflow");
    return Rational(int64_t(n), int64_t(d));
}

Rational Rational::operator-(const Rational& o) const { return *this + Rational(-o.num, o.den); }

Rational Rational::mod1() const {
    int64_t n = ((num % den) + den) % den;
    return Rational(n, den);
}

Rational mediant(const Rational& a, const Rational& b) {
    return Rational(a.num + b.num, a.den + b.den);
}

}  // namespace jutila
