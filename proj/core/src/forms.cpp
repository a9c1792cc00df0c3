#include "jutila/forms.hpp"

#include <cmath>
#include <mutex>

#include "jutila/arith.hpp"
#include "jutila/errors.hpp"

namespace jutila {

namespace {

struct SparseSeries {
    std::vector<std::pair<int64_t, int64_t>> terms;  // (exponent, coefficient)
};

// prod_{n>=1} (1 - q^{dn})  (Euler, pentagonal numbers)
SparseSeries pentagonal(int64_t d, int64_t X) {
    SparseSeries s;
    s.terms.push_back({0, 1});
    for (int64_t j = 1;; ++j) {
        int64_t g1 = j * (3 * j - 1) / 2, g2 = j * (3 * j + 1) / 2;
        int64_t sign = (j % 2 == 0) ? 1 : -1;
        bool any = false;
        if (g1 * d <= X) s.terms.push_back({g1 * d, sign}), any = true;
        if (g2 * d <= X) s.terms.push_back({g2 * d, sign}), any = true;
        if (!any) break;
    }
    return s;
}

// prod (1 - q^{dn})^3  (Jacobi)
SparseSeries jacobi_cube(int64_t d, int64_t X) {
    SparseSeries s;
    for (int64_t j = 0;; ++j) {
        int64_t g = j * (j + 1) / 2;
        if (g * d > X) break;
        s.terms.push_back({g * d, (j % 2 == 0 ? 1 : -1) * (2 * j + 1)});
    }
    return s;
}

void multiply_sparse(std::vector<int128>& dense, const SparseSeries& s, int64_t X) {
    std::vector<int128> out(size_t(X + 1), 0);
    for (auto [e, c] : s.terms) {
        for (int64_t n = 0; n + e <= X; ++n) {
            if (dense[size_t(n)] == 0) continue;
            out[size_t(n + e)] =
                checked_add(out[size_t(n + e)], checked_mul_small(dense[size_t(n)], c));
        }
    }
    dense.swap(out);
}

void normalize_table(CoeffTable& t, int weight) {
    t.lambda.assign(t.raw.size(), 0.0);
    double halfk = (weight - 1) / 2.0;
    for (size_t n = 1; n < t.raw.size(); ++n)
        t.lambda[n] = to_double(t.raw[n]) * std::pow(double(n), -halfk);
}

}  // namespace

CoeffTable eta_coeffs(const NewformSpec& spec, int64_t X) {
    if (X < 1) throw ValidationError("eta_coeffs: X must be positive");
    if (X > 100000000) throw ValidationError("eta_coeffs: X exceeds the memory bound");
    int64_t esum = 0, wsum = 0;
    for (auto [d, e] : spec.eta_exponents) {
        if (e <= 0) throw ValidationError("eta_coeffs: only positive eta exponents supported");
        esum += e;
        wsum += d * e;
    }
    if (esum != 2 * spec.weight)
        throw ValidationError("eta_coeffs: exponents do not sum to twice the weight");
    if (wsum % 24 != 0) throw ValidationError("eta_coeffs: eta prefactor is not integral");
    int64_t n0 = wsum / 24;

    int64_t body = X - n0;
    CoeffTable t;
    t.form = &spec;
    t.limit = X;
    if (body < 0) {
        t.raw.assign(size_t(X + 1), 0);
        normalize_table(t, spec.weight);
        return t;
    }
    std::vector<int128> dense(size_t(body + 1), 0);
    dense[0] = 1;
    for (auto [d, e] : spec.eta_exponents) {
        for (int i = 0; i < e / 3; ++i) multiply_sparse(dense, jacobi_cube(d, body), body);
        for (int i = 0; i < e % 3; ++i) multiply_sparse(dense, pentagonal(d, body), body);
    }
    t.raw.assign(size_t(X + 1), 0);
    for (int64_t n = 0; n <= body; ++n) t.raw[size_t(n + n0)] = dense[size_t(n)];
    normalize_table(t, spec.weight);
    return t;
}

CoeffTable hecke_extend(const std::map<int64_t, int128>& prime_coeffs,
                        const DirichletCharacter& xi, int weight, int64_t X) {
    if (X < 1) throw ValidationError("hecke_extend: X must be positive");
    CoeffTable t;
    t.limit = X;
    t.raw.assign(size_t(X + 1), 0);
    t.raw[1] = 1;

    // smallest-prime-factor sieve
    std::vector<int32_t> spf(size_t(X + 1), 0);
    for (int64_t i = 2; i <= X; ++i) {
        if (spf[size_t(i)] == 0)
            for (int64_t j = i; j <= X; j += i)
                if (spf[size_t(j)] == 0) spf[size_t(j)] = int32_t(i);
    }

    // prime powers by recurrence, then multiplicativity
    for (int64_t p = 2; p <= X; ++p) {
        if (spf[size_t(p)] != p) continue;
        auto it = prime_coeffs.find(p);
        if (it == prime_coeffs.end()) throw ValidationError("hecke_extend: missing prime " +
                                                            std::to_string(p));
        int128 ap = it->second;
        // xi(p) p^{k-1} as exact integer (0 if p divides the modulus)
        int128 xipk = 0;
        if (xi.angle(p)) {
            auto ang = *xi.angle(p);
            if (!(ang.num == 0))
                throw ValidationError("hecke_extend: non-principal nebentypus unsupported");
            xipk = 1;
            for (int i = 0; i < weight - 1; ++i) xipk = checked_mul_small(xipk, p);
        }
        int128 prev = 1, cur = ap;
        int64_t pk = p;
        t.raw[size_t(pk)] = cur;
        while (pk <= X / p) {
            pk *= p;
            // a(p^{r+1}) = a(p) a(p^r) - xi(p) p^{k-1} a(p^{r-1})
            int128 nxt;
            {
                // ap * cur needs a wide check: both may be large
                int128 aa = ap < 0 ? -ap : ap, cc = cur < 0 ? -cur : cur;
                if (cc != 0 && aa > INT128_MAX_VALUE / (cc == 0 ? 1 : cc))
                    throw OverflowError("hecke_extend: overflow");
                int128 prod = ap * cur;
                int128 sub = 0;
                int128 xx = xipk, pp = prev < 0 ? -prev : prev;
                if (pp != 0 && xx > INT128_MAX_VALUE / (pp == 0 ? 1 : pp))
                    throw OverflowError("hecke_extend: overflow");
                sub = xipk * prev;
                nxt = checked_add(prod, -sub);
            }
            prev = cur;
            cur = nxt;
            t.raw[size_t(pk)] = cur;
        }
    }
    for (int64_t n = 2; n <= X; ++n) {
        int64_t p = spf[size_t(n)];
        int64_t pk = 1, m = n;
        while (m % p == 0) {
            pk *= p;
            m /= p;
        }
        if (m == 1) continue;  // prime power, already set
        int128 aa = t.raw[size_t(pk)], bb = t.raw[size_t(m)];
        int128 a1 = aa < 0 ? -aa : aa, b1 = bb < 0 ? -bb : bb;
        if (b1 != 0 && a1 > INT128_MAX_VALUE / b1) throw OverflowError("hecke_extend: overflow");
        t.raw[size_t(n)] = aa * bb;
    }
    normalize_table(t, weight);
    return t;
}

FormRegistry::FormRegistry() {
    auto add = [&](const std::string& label, int64_t N, int k,
                   std::map<int64_t, int> eta, std::optional<int64_t> cm) {
        NewformSpec f;
        f.label = label;
        f.level = N;
        f.weight = k;
        f.nebentypus = principal_character(N);
        f.eta_exponents = std::move(eta);
        f.cm_discriminant = cm;
        forms_.push_back(std::move(f));
    };
    add("1.12.a", 1, 12, {{1, 24}}, std::nullopt);
    // 4.6.a has no CM: a(3), a(5), a(7) are all nonzero (asserted in tests).
    add("4.6.a", 4, 6, {{2, 12}}, std::nullopt);
    add("9.4.a", 9, 4, {{3, 8}}, -3);
    add("11.2.a", 11, 2, {{1, 2}, {11, 2}}, std::nullopt);
}

const FormRegistry& FormRegistry::instance() {
    static FormRegistry reg;
    return reg;
}

const NewformSpec& FormRegistry::by_label(const std::string& label) const {
    for (const auto& f : forms_)
        if (f.label == label) return f;
    throw ValidationError("unknown form label: " + label);
}

std::vector<std::string> FormRegistry::labels() const {
    std::vector<std::string> ls;
    for (const auto& f : forms_) ls.push_back(f.label);
    return ls;
}

std::shared_ptr<const CoeffTable> FormRegistry::coefficients(const NewformSpec& spec,
                                                             int64_t X) const {
    static std::mutex mtx;
    static std::map<std::string, std::shared_ptr<const CoeffTable>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(spec.label);
    if (it != cache.end() && it->second->limit >= X) return it->second;
    int64_t grow = std::max<int64_t>(X, it != cache.end() ? it->second->limit * 2 : 0);
    auto fresh = std::make_shared<CoeffTable>(eta_coeffs(spec, grow));
    cache[spec.label] = fresh;
    return fresh;
}

void dump_coeffs_csv(std::ostream& os, const CoeffTable& table, int64_t limit) {
    os << "n,a_n,lambda_n\n";
    char buf[64];
    for (int64_t n = 1; n <= limit && n <= table.limit; ++n) {
        std::snprintf(buf, sizeof buf, "%.17g", table.lam(n));
        os << n << ',' << to_string(table.a(n)) << ',' << buf << '\n';
    }
}

}  // namespace jutila
