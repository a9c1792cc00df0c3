#pragma once

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "jutila/characters.hpp"
#include "jutila/int128.hpp"

namespace jutila {

// A built-in primitive holomorphic newform given by an eta-quotient.
struct NewformSpec {
    std::string label;
    int64_t level = 1;
    int weight = 12;
    DirichletCharacter nebentypus;              // principal for all built-ins
    std::map<int64_t, int> eta_exponents;       // divisor -> exponent
    std::optional<int64_t> cm_discriminant;

    // Euler factor data at p (normalized): E_p(Y) = 1 - lambda(p) Y + xi0(p) Y^2,
    // with xi0(p) = 0 for p | level (trivial nebentypus).
    double euler_xi(int64_t p) const { return level % p == 0 ? 0.0 : 1.0; }
};

struct CoeffTable {
    const NewformSpec* form = nullptr;
    int64_t limit = 0;
    std::vector<int128> raw;      // raw[n] = a_f(n), n <= limit; raw[0] unused
    std::vector<double> lambda;   // lambda[n] = a_f(n) / n^{(k-1)/2}

    int128 a(int64_t n) const { return raw[size_t(n)]; }
    double lam(int64_t n) const { return lambda[size_t(n)]; }
};

// Expand prod_d eta(d tau)^{e_d} as an exact integer q-series (pentagonal and
// Jacobi sparse factors), then normalize. Throws on overflow or weight
// mismatch (sum e_d != 2k).
CoeffTable eta_coeffs(const NewformSpec& spec, int64_t X);

// Extend coefficients at primes multiplicatively via
// a(p^{r+1}) = a(p) a(p^r) - xi(p) p^{k-1} a(p^{r-1}).
CoeffTable hecke_extend(const std::map<int64_t, int128>& prime_coeffs,
                        const DirichletCharacter& xi, int weight, int64_t X);

class FormRegistry {
  public:
    static const FormRegistry& instance();

    const NewformSpec& by_label(const std::string& label) const;
    std::vector<std::string> labels() const;
    const std::vector<NewformSpec>& forms() const { return forms_; }

    // Shared coefficient table covering at least n <= X (grown on demand,
    // cached per form; safe to share across threads).
    std::shared_ptr<const CoeffTable> coefficients(const NewformSpec& spec, int64_t X) const;

  private:
    FormRegistry();
    std::vector<NewformSpec> forms_;
};

// CSV dump with columns n, a_n, lambda_n.
void dump_coeffs_csv(std::ostream& os, const CoeffTable& table, int64_t limit);

}  // namespace jutila
