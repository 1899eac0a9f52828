#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "matrix.hpp"

namespace qforge {

inline bool is_prime(const Int& n)
{
    if (n < 2)
        return false;
    return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

inline Int next_prime_after(const Int& n)
{
    Int r;
    mpz_nextprime(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

// Exponent of p in n (n != 0).
inline unsigned long valuation(const Int& n, const Int& p)
{
    if (n == 0)
        fail(ErrorCode::ZeroArgument, "valuation of zero");
    Int m = n;
    unsigned long v = 0;
    while (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t())) {
        mpz_divexact(m.get_mpz_t(), m.get_mpz_t(), p.get_mpz_t());
        ++v;
    }
    return v;
}

// n with every factor p removed.
inline Int strip(const Int& n, const Int& p)
{
    Int m = n;
    while (m != 0 && mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t()))
        mpz_divexact(m.get_mpz_t(), m.get_mpz_t(), p.get_mpz_t());
    return m;
}

namespace detail {

// Pollard steps left on this thread before factoring gives up.
inline thread_local std::uint64_t factor_allowance = std::numeric_limits<std::uint64_t>::max();

class FactorAllowance {
public:
    explicit FactorAllowance(std::uint64_t steps) : saved_(factor_allowance) { factor_allowance = steps; }
    ~FactorAllowance() { factor_allowance = saved_; }
    FactorAllowance(const FactorAllowance&) = delete;
    FactorAllowance& operator=(const FactorAllowance&) = delete;

private:
    std::uint64_t saved_;
};

inline Int pollard_brent(const Int& n)
{
    if (mpz_even_p(n.get_mpz_t()))
        return 2;
    for (unsigned long c = 1;; ++c) {
        Int y = 2, x, g = 1, q = 1, ys, t;
        unsigned long r = 1;
        const unsigned long m = 64;
        auto f = [&](const Int& v) {
            if (factor_allowance == 0)
                fail(ErrorCode::BudgetExceeded, "factorization effort exhausted");
            --factor_allowance;
            Int w = v * v + c;
            mpz_mod(w.get_mpz_t(), w.get_mpz_t(), n.get_mpz_t());
            return w;
        };
        do {
            x = y;
            for (unsigned long i = 0; i < r; ++i)
                y = f(y);
            unsigned long k = 0;
            do {
                ys = y;
                for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
                    y = f(y);
                    t = abs(x - y);
                    q = q * t;
                    mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                }
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                k += m;
            } while (k < r && g == 1);
            r *= 2;
        } while (g == 1);
        if (g == n) {
            do {
                ys = f(ys);
                t = abs(x - ys);
                mpz_gcd(g.get_mpz_t(), t.get_mpz_t(), n.get_mpz_t());
            } while (g == 1);
        }
        if (g != n)
            return g;
    }
}

inline void factor_into(const Int& n, std::map<Int, unsigned long>& out)
{
    if (n == 1)
        return;
    if (is_prime(n)) {
        ++out[n];
        return;
    }
    Int d = pollard_brent(n);
    factor_into(d, out);
    Int rest = n / d;
    factor_into(rest, out);
}

} // namespace detail

// Prime factorization of |n| (n != 0).
inline std::map<Int, unsigned long> factor(const Int& n)
{
    if (n == 0)
        fail(ErrorCode::ZeroArgument, "factorization of zero");
    std::map<Int, unsigned long> out;
    Int m = abs(n);
    for (unsigned long p = 2; p < 1000 && m > 1; p += (p == 2 ? 1 : 2)) {
        while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
            ++out[Int(p)];
        }
    }
    detail::factor_into(m, out);
    return out;
}

inline std::vector<Int> prime_divisors(const Int& n)
{
    std::vector<Int> ps;
    for (const auto& [p, e] : factor(n))
        ps.push_back(p);
    return ps;
}

// Signed squarefree representative of the square class of x in Q*/(Q*)^2.
inline Int squarefree_part(const Rat& x)
{
    if (x == 0)
        fail(ErrorCode::ZeroArgument, "square class of zero");
    Int n = x.get_num() * x.get_den();
    Int r = n < 0 ? Int(-1) : Int(1);
    for (const auto& [p, e] : factor(n))
        if (e % 2 == 1)
            r *= p;
    return r;
}

inline bool is_square(const Int& n) { return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()); }

inline Int isqrt(const Int& n)
{
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

inline Int ipow(const Int& base, unsigned long e)
{
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Int mod_positive(const Int& a, const Int& m)
{
    Int r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline Int gcd(const Int& a, const Int& b)
{
    Int g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline Int lcm(const Int& a, const Int& b)
{
    Int l;
    mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return l;
}

// Square root of a modulo an odd prime p (Tonelli-Shanks), if one exists.
inline std::optional<Int> sqrt_mod_prime(const Int& a_in, const Int& p)
{
    const Int a = mod_positive(a_in, p);
    if (a == 0)
        return Int(0);
    if (p == 2)
        return a;
    if (mpz_legendre(a.get_mpz_t(), p.get_mpz_t()) != 1)
        return std::nullopt;
    Int q = p - 1;
    unsigned long s = 0;
    while (mpz_even_p(q.get_mpz_t())) {
        q /= 2;
        ++s;
    }
    Int z = 2;
    while (mpz_legendre(z.get_mpz_t(), p.get_mpz_t()) != -1)
        ++z;
    auto powm = [&](const Int& b, const Int& e) {
        Int r;
        mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
        return r;
    };
    Int c = powm(z, q), x = powm(a, (q + 1) / 2), t = powm(a, q);
    unsigned long m = s;
    while (t != 1) {
        unsigned long i = 0;
        Int t2 = t;
        while (t2 != 1) {
            t2 = t2 * t2 % p;
            ++i;
        }
        Int b = c;
        for (unsigned long j = 0; j + i + 1 < m; ++j)
            b = b * b % p;
        x = x * b % p;
        c = b * b % p;
        t = t * c % p;
        m = i;
    }
    return x;
}

// Square root of a modulo a squarefree m > 0, combined over the prime factors.
inline std::optional<Int> sqrt_mod_squarefree(const Int& a, const Int& m)
{
    Int root = 0, modulus = 1;
    for (const auto& p : prime_divisors(m)) {
        const auto r = sqrt_mod_prime(a, p);
        if (!r)
            return std::nullopt;
        // root + modulus * k ≡ r (mod p)
        Int inv;
        mpz_invert(inv.get_mpz_t(), modulus.get_mpz_t(), p.get_mpz_t());
        const Int k = mod_positive((*r - root) * inv, p);
        root += modulus * k;
        modulus *= p;
    }
    return root;
}

} // namespace qforge
