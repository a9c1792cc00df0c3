#include <doctest.h>

#include <complex>

#include "jutila/characters.hpp"
#include "jutila/errors.hpp"

using namespace jutila;

TEST_CASE("char_group sizes and principal first") {
    CHECK(char_group(1).size() == 1);
    CHECK(char_group(3).size() == 2);
    CHECK(char_group(5).size() == 4);
    for (int64_t q : {2, 4, 8, 12, 24, 45, 100}) {
        auto g = char_group(q);
        CHECK(int64_t(g.size()) == euler_phi(q));
        CHECK(g[0].is_principal);
        for (size_t i = 1; i < g.size(); ++i) CHECK(!g[i].is_principal);
    }
}

TEST_CASE("q=1 character is identically 1") {
    auto g = char_group(1);
    for (int64_t n : {1, 2, 17, 100})
        CHECK(std::abs(g[0](n) - std::complex<double>(1, 0)) < 1e-15);
}

TEST_CASE("q=3 non-principal character") {
    auto g = char_group(3);
    const auto& chi = g[0].is_principal ? g[1] : g[0];
    CHECK(std::abs(chi(2) - std::complex<double>(-1, 0)) < 1e-15);
    CHECK(std::abs(chi(3)) < 1e-15);
}

TEST_CASE("q=5 values at 2 are the four 4th roots of unity") {
    auto g = char_group(5);
    std::vector<std::complex<double>> vals;
    for (const auto& chi : g) vals.push_back(chi(2));
    for (auto root : {std::complex<double>(1, 0), {0, 1}, {-1, 0}, {0, -1}}) {
        bool found = false;
        for (auto v : vals) found = found || std::abs(v - root) < 1e-12;
        CHECK(found);
    }
}

TEST_CASE("group closure under pointwise product and distinctness") {
    for (int64_t q : {8, 12, 45}) {
        auto g = char_group(q);
        for (size_t i = 0; i < g.size(); ++i)
            for (size_t j = i + 1; j < g.size(); ++j) CHECK(!g[i].same_values(g[j]));
        for (size_t i = 0; i < g.size(); ++i) {
            for (size_t j = 0; j < g.size(); ++j) {
                auto p = char_product(g[i], g[j]);
                bool found = false;
                for (const auto& chi : g) found = found || chi.same_values(p);
                CHECK(found);
            }
        }
    }
}

TEST_CASE("character multiplicativity and vanishing") {
    for (int64_t q : {12, 40}) {
        for (const auto& chi : char_group(q)) {
            for (int64_t m = 1; m <= 20; ++m) {
                for (int64_t n = 1; n <= 20; ++n) {
                    if (gcd64(m * n, q) == 1) {
                        CHECK(std::abs(chi(m * n) - chi(m) * chi(n)) < 1e-12);
                        CHECK(std::abs(std::abs(chi(n)) - 1.0) < 1e-12);
                    }
                }
                if (gcd64(m, q) > 1) CHECK(std::abs(chi(m)) < 1e-15);
            }
        }
    }
}

TEST_CASE("gauss sums: closed values") {
    CHECK(std::abs(gauss_sum(principal_character(1)) - std::complex<double>(1, 0)) < 1e-14);
    auto chi3 = kronecker_character(-3);
    CHECK(std::abs(gauss_sum(chi3) - std::complex<double>(0, std::sqrt(3.0))) < 1e-12);
    for (const auto& chi : char_group(5)) {
        if (!chi.is_principal && chi.order() == 2)
            CHECK(std::abs(gauss_sum(chi) - std::complex<double>(std::sqrt(5.0), 0)) < 1e-12);
    }
}

TEST_CASE("|tau(chi)|^2 = q for primitive chi, q <= 200") {
    for (int64_t q = 1; q <= 200; ++q) {
        for (const auto& chi : char_group(q)) {
            if (chi.conductor != q) continue;  // primitive only
            double t2 = std::norm(gauss_sum(chi));
            CHECK(std::fabs(t2 - double(q)) < 1e-9);
        }
    }
}

TEST_CASE("conductors") {
    CHECK(principal_character(12).conductor == 1);
    CHECK(kronecker_character(-4).conductor == 4);
    CHECK(kronecker_character(-3).conductor == 3);
    // chi_{-4} lifted mod 8 keeps conductor 4
    int found = 0;
    for (const auto& chi : char_group(8)) {
        if (chi.conductor == 4) {
            ++found;
            auto prim = primitive_character(chi);
            CHECK(prim.modulus == 4);
            CHECK(prim.same_values(kronecker_character(-4)));
            for (int64_t n : {1, 3, 5, 7})
                CHECK(std::abs(chi(n) - prim(n)) < 1e-13);
        }
    }
    CHECK(found == 1);
}
