#pragma once

#include <map>
#include <string>
#include <vector>

#include "arith.hpp"
#include "matrix.hpp"

namespace qforge {

// Integer polynomial, coefficients from the constant term up.
using Poly = std::vector<Int>;

inline void trim(Poly& f)
{
    while (!f.empty() && f.back() == 0)
        f.pop_back();
}

inline long degree(const Poly& f) { return static_cast<long>(f.size()) - 1; }

inline bool is_monic(const Poly& f) { return !f.empty() && f.back() == 1; }

inline Poly poly_mul(const Poly& a, const Poly& b)
{
    if (a.empty() || b.empty())
        return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}

// Quotient and remainder by a monic divisor.
inline std::pair<Poly, Poly> poly_divmod(Poly f, const Poly& d)
{
    if (!is_monic(d))
        fail(ErrorCode::NotMonic, "divisor is not monic");
    trim(f);
    if (f.size() < d.size())
        return {{}, f};
    Poly q(f.size() - d.size() + 1, 0);
    for (std::size_t k = q.size(); k-- > 0;) {
        const Int c = f[k + d.size() - 1];
        q[k] = c;
        if (c != 0)
            for (std::size_t j = 0; j < d.size(); ++j)
                f[k + j] -= c * d[j];
    }
    trim(f);
    trim(q);
    return {q, f};
}

inline std::string poly_str(const Poly& f)
{
    if (f.empty())
        return "0";
    std::string s;
    for (std::size_t k = f.size(); k-- > 0;) {
        if (f[k] == 0)
            continue;
        Int c = f[k];
        const bool neg = c < 0;
        if (neg)
            c = -c;
        if (s.empty())
            s += neg ? "-" : "";
        else
            s += neg ? " - " : " + ";
        if (c != 1 || k == 0)
            s += c.get_str();
        if (k >= 1)
            s += "x";
        if (k >= 2)
            s += "^" + std::to_string(k);
    }
    return s;
}

// det(xI - A) by the Faddeev-LeVerrier recurrence; all divisions are exact.
inline Poly char_poly(const IntMatrix& a)
{
    if (a.rows() != a.cols())
        fail(ErrorCode::DimensionMismatch, "characteristic polynomial of a non-square matrix");
    const std::size_t n = a.rows();
    Poly c(n + 1, 0);
    c[n] = 1;
    IntMatrix m = IntMatrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        IntMatrix am = a * m;
        Int tr = 0;
        for (std::size_t i = 0; i < n; ++i)
            tr += am(i, i);
        c[n - k] = -tr / Int(static_cast<long>(k));
        m = am;
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) += c[n - k];
    }
    return c;
}

inline unsigned long euler_phi(unsigned long m)
{
    unsigned long r = m;
    for (unsigned long p = 2; p * p <= m; ++p)
        if (m % p == 0) {
            while (m % p == 0)
                m /= p;
            r -= r / p;
        }
    if (m > 1)
        r -= r / m;
    return r;
}

inline Poly cyclotomic(unsigned long m)
{
    static std::map<unsigned long, Poly> cache;
    auto it = cache.find(m);
    if (it != cache.end())
        return it->second;
    Poly f(m + 1, 0);
    f[0] = -1;
    f[m] = 1;
    for (unsigned long d = 1; d < m; ++d)
        if (m % d == 0)
            f = poly_divmod(f, cyclotomic(d)).first;
    cache[m] = f;
    return f;
}

struct CyclotomicSplit {
    std::vector<unsigned long> orders; // m with multiplicity, one per factor Φ_m
    Poly residual;                     // cofactor free of cyclotomic factors
    bool cyclotomic() const { return residual == Poly{1}; }
};

// Divides out every Φ_m with φ(m) <= deg f, as often as it divides.
inline CyclotomicSplit cyclotomic_split(const Poly& f)
{
    Poly g = f;
    trim(g);
    if (!is_monic(g))
        fail(ErrorCode::NotMonic, "polynomial is not monic");
    CyclotomicSplit out;
    const unsigned long deg = static_cast<unsigned long>(degree(g));
    // φ(m) >= sqrt(m / 2), so m <= 2 deg^2 covers every candidate.
    const unsigned long top = std::max(2UL, 2 * deg * deg);
    for (unsigned long m = 1; m <= top && degree(g) > 0; ++m) {
        if (euler_phi(m) > static_cast<unsigned long>(degree(g)))
            continue;
        const Poly phi = cyclotomic(m);
        for (;;) {
            auto [q, r] = poly_divmod(g, phi);
            if (!r.empty())
                break;
            g = q;
            out.orders.push_back(m);
        }
    }
    out.residual = g;
    return out;
}

inline bool cyclotomic_test(const Poly& f) { return cyclotomic_split(f).cyclotomic(); }

} // namespace qforge
