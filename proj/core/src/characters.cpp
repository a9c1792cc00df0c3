#include "jutila/characters.hpp"

#include <cmath>
#include <numeric>

#include "jutila/errors.hpp"

namespace jutila {

namespace {
constexpr double TWO_PI = 6.283185307179586476925286766559;
}

RationalAngle RationalAngle::make(int64_t n, int64_t d) {
    if (d <= 0) throw ValidationError("RationalAngle: bad denominator");
    n = ((n % d) + d) % d;
    int64_t g = std::gcd(n, d);
    return RationalAngle{n / g, d / g};
}

RationalAngle RationalAngle::operator+(const RationalAngle& o) const {
    int128 n = int128(num) * o.den + int128(o.num) * den;
    int128 d = int128(den) * o.den;
    int128 g = d;
    int128 a = n;
    while (a) {
        int128 t = g % a;
        g = a;
        a = t;
    }
    if (g == 0) g = 1;
    return RationalAngle::make(int64_t(n / g), int64_t(d / g));
}

RationalAngle RationalAngle::scaled(int64_t k) const {
    int128 n = (int128(k) % den) * num;
    return RationalAngle::make(int64_t(n % den), den);
}

std::complex<double> RationalAngle::unit() const {
    double th = TWO_PI * double(num) / double(den);
    return {std::cos(th), std::sin(th)};
}

namespace {

std::shared_ptr<const std::vector<CharComponentTables>> build_tables(int64_t q) {
    auto tabs = std::make_shared<std::vector<CharComponentTables>>();
    for (auto [p, e] : factorize(q).factors) {
        CharComponentTables ct;
        ct.p = p;
        ct.e = e;
        ct.pe = 1;
        for (int i = 0; i < e; ++i) ct.pe *= p;
        ct.phi = ct.pe / p * (p - 1);
        if (p != 2) {
            ct.g = primitive_root(ct.pe);
            ct.dlog.assign(size_t(ct.pe), -1);
            int64_t x = 1;
            for (int64_t j = 0; j < ct.phi; ++j) {
                ct.dlog[size_t(x)] = int32_t(j);
                x = mulmod(x, ct.g, ct.pe);
            }
        } else if (e >= 3) {
            ct.g = 5;
            int64_t half = ct.pe / 4;  // order of 5 mod 2^e
            ct.dlog.assign(size_t(ct.pe), -1);
            ct.sign_part.assign(size_t(ct.pe), 0);
            int64_t x = 1;
            for (int64_t j = 0; j < half; ++j) {
                ct.dlog[size_t(x)] = int32_t(j);
                ct.dlog[size_t(ct.pe - x)] = int32_t(j);
                ct.sign_part[size_t(ct.pe - x)] = 1;
                x = mulmod(x, 5, ct.pe);
            }
        }
        tabs->push_back(std::move(ct));
    }
    return tabs;
}

int64_t component_conductor(const CharComponentTables& ct, const DirichletCharacter::Exponent& ex) {
    if (ct.p != 2) {
        if (ex.m == 0) return 1;
        int64_t pf = 1;
        int64_t phif = 1;
        for (int f = 1; f <= ct.e; ++f) {
            pf *= ct.p;
            phif = pf / ct.p * (ct.p - 1);
            if ((int128(ex.m) * phif) % ct.phi == 0) return pf;
        }
        return ct.pe;
    }
    if (ct.e == 1) return 1;
    if (ct.e == 2) return ex.a == 0 ? 1 : 4;
    if (ex.a == 0 && ex.m == 0) return 1;
    if (ex.m == 0) return 4;
    int v = 0;
    int64_t m = ex.m;
    while ((m & 1) == 0) m >>= 1, ++v;
    int f = ct.e - v;  // smallest f with 2^{e-f} | m
    int64_t pf = 1;
    for (int i = 0; i < f; ++i) pf *= 2;
    return pf;
}

void finalize_character(DirichletCharacter& chi) {
    chi.conductor = 1;
    chi.is_principal = true;
    const auto& tabs = *chi.tables;
    for (size_t i = 0; i < tabs.size(); ++i) {
        chi.conductor *= component_conductor(tabs[i], chi.exps[i]);
        if (chi.exps[i].m != 0 || chi.exps[i].a != 0) chi.is_principal = false;
    }
}

}  // namespace

std::optional<RationalAngle> DirichletCharacter::angle(int64_t n) const {
    RationalAngle total{0, 1};
    for (size_t i = 0; i < tables->size(); ++i) {
        const auto& ct = (*tables)[i];
        const auto& ex = exps[i];
        int64_t r = ((n % ct.pe) + ct.pe) % ct.pe;
        if (r % ct.p == 0) return std::nullopt;
        if (ct.p != 2) {
            if (ex.m != 0)
                total = total + RationalAngle::make(int64_t((int128(ex.m) * ct.dlog[size_t(r)]) %
                                                            ct.phi),
                                                    ct.phi);
        } else if (ct.e == 2) {
            if (ex.a != 0 && r == 3) total = total + RationalAngle{1, 2};
        } else if (ct.e >= 3) {
            int64_t half = ct.pe / 4;
            if (ex.a != 0 && ct.sign_part[size_t(r)]) total = total + RationalAngle{1, 2};
            if (ex.m != 0)
                total = total +
                        RationalAngle::make(int64_t((int128(ex.m) * ct.dlog[size_t(r)]) % half),
                                            half);
        }
    }
    return total;
}

std::complex<double> DirichletCharacter::operator()(int64_t n) const {
    auto a = angle(n);
    if (!a) return {0.0, 0.0};
    return a->unit();
}

bool DirichletCharacter::same_values(const DirichletCharacter& o) const {
    if (modulus != o.modulus) return false;
    for (size_t i = 0; i < exps.size(); ++i)
        if (exps[i].m != o.exps[i].m || exps[i].a != o.exps[i].a) return false;
    return true;
}

int64_t DirichletCharacter::order() const {
    int64_t ord = 1;
    for (size_t i = 0; i < tables->size(); ++i) {
        const auto& ct = (*tables)[i];
        const auto& ex = exps[i];
        int64_t o = 1;
        if (ct.p != 2) {
            o = ct.phi / std::gcd(ex.m, ct.phi);
        } else if (ct.e == 2) {
            o = ex.a ? 2 : 1;
        } else if (ct.e >= 3) {
            int64_t half = ct.pe / 4;
            o = std::lcm<int64_t>(ex.a ? 2 : 1, half / std::gcd(ex.m, half));
        }
        ord = std::lcm(ord, o);
    }
    return ord;
}

bool DirichletCharacter::is_real() const { return order() <= 2; }

std::vector<DirichletCharacter> char_group(int64_t q) {
    if (q < 1) throw ValidationError("char_group: q must be positive");
    if (q > 1000000) throw ValidationError("char_group: modulus too large");
    auto tabs = build_tables(q);
    // per-component exponent ranges, zero (principal) first in mixed radix
    std::vector<std::vector<DirichletCharacter::Exponent>> ranges;
    for (const auto& ct : *tabs) {
        std::vector<DirichletCharacter::Exponent> r;
        if (ct.p != 2) {
            for (int64_t m = 0; m < ct.phi; ++m) r.push_back({m, 0});
        } else if (ct.e == 1) {
            r.push_back({0, 0});
        } else if (ct.e == 2) {
            r.push_back({0, 0});
            r.push_back({0, 1});
        } else {
            int64_t half = ct.pe / 4;
            for (int a = 0; a < 2; ++a)
                for (int64_t m = 0; m < half; ++m) r.push_back({m, a});
        }
        ranges.push_back(std::move(r));
    }
    std::vector<DirichletCharacter> out;
    std::vector<size_t> idx(ranges.size(), 0);
    while (true) {
        DirichletCharacter chi;
        chi.modulus = q;
        chi.tables = tabs;
        for (size_t i = 0; i < ranges.size(); ++i) chi.exps.push_back(ranges[i][idx[i]]);
        finalize_character(chi);
        out.push_back(std::move(chi));
        size_t i = 0;
        for (; i < ranges.size(); ++i) {
            if (++idx[i] < ranges[i].size()) break;
            idx[i] = 0;
        }
        if (i == ranges.size()) break;
    }
    return out;
}

DirichletCharacter principal_character(int64_t q) {
    DirichletCharacter chi;
    chi.modulus = q;
    chi.tables = build_tables(q);
    chi.exps.assign(chi.tables->size(), {0, 0});
    finalize_character(chi);
    return chi;
}

DirichletCharacter kronecker_character(int64_t D) {
    if (D == -4) {
        auto g = char_group(4);
        return g[1];  // the odd character mod 4
    }
    if (D == -3) {
        auto g = char_group(3);
        // quadratic: chi(2) = -1
        for (auto& chi : g)
            if (!chi.is_principal && chi.order() == 2) return chi;
    }
    throw ValidationError("kronecker_character: only discriminants -3, -4 are built in");
}

DirichletCharacter char_product(const DirichletCharacter& a, const DirichletCharacter& b) {
    int64_t q = std::lcm(a.modulus, b.modulus);
    auto tabs = build_tables(q);
    DirichletCharacter chi;
    chi.modulus = q;
    chi.tables = tabs;
    for (const auto& ct : *tabs) {
        DirichletCharacter::Exponent ex{0, 0};
        for (const DirichletCharacter* src : {&a, &b}) {
            for (size_t i = 0; i < src->tables->size(); ++i) {
                const auto& sct = (*src->tables)[i];
                if (sct.p != ct.p) continue;
                const auto& sex = src->exps[i];
                if (ct.p != 2) {
                    // lift exponent from level sct.e to ct.e
                    int64_t lift = ct.phi / sct.phi;
                    ex.m = (ex.m + sex.m * lift) % ct.phi;
                } else {
                    ex.a ^= sex.a;
                    if (ct.e >= 3 && sct.e >= 3) {
                        int64_t lift = (ct.pe / 4) / (sct.pe / 4);
                        ex.m = (ex.m + sex.m * lift) % (ct.pe / 4);
                    } else if (ct.e >= 3 && sct.e == 2) {
                        // character mod 4 lifted: chi(-1)=(-1)^a only
                    }
                }
            }
        }
        chi.exps.push_back(ex);
    }
    finalize_character(chi);
    return chi;
}

DirichletCharacter primitive_character(const DirichletCharacter& src) {
    int64_t f = src.conductor;
    auto tabs = build_tables(f);
    DirichletCharacter chi;
    chi.modulus = f;
    chi.tables = tabs;
    for (const auto& ct : *tabs) {
        DirichletCharacter::Exponent ex{0, 0};
        for (size_t i = 0; i < src.tables->size(); ++i) {
            const auto& sct = (*src.tables)[i];
            if (sct.p != ct.p) continue;
            const auto& sex = src.exps[i];
            if (ct.p != 2) {
                int64_t drop = sct.phi / ct.phi;
                ex.m = sex.m / drop;
            } else {
                ex.a = sex.a;
                if (sct.e >= 3 && ct.e >= 3) {
                    int64_t drop = (sct.pe / 4) / (ct.pe / 4);
                    ex.m = sex.m / drop;
                }
            }
        }
        chi.exps.push_back(ex);
    }
    finalize_character(chi);
    return chi;
}

std::complex<double> gauss_sum(const DirichletCharacter& chi) {
    int64_t q = chi.modulus;
    std::complex<double> tau = 0.0;
    for (int64_t n = 1; n <= q; ++n) {
        auto a = chi.angle(n);
        if (!a) continue;
        double th = TWO_PI * (double(a->num) / double(a->den) + double(n % q) / double(q));
        tau += std::complex<double>(std::cos(th), std::sin(th));
    }
    if (q == 1) tau = 1.0;
    return tau;
}

}  // namespace jutila
