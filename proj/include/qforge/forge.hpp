#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "enumerate.hpp"
#include "padic.hpp"

namespace qforge {

inline constexpr long kDefaultSearchHeight = 64;
inline constexpr std::uint64_t kDefaultSearchBudget = 20'000'000;
inline constexpr long kRank2OracleHeight = 1000;

// Every integer value of q on the rational span of diag(alpha1, alpha2) is
// divisible by p when the fields below satisfy verify_certificate.
struct SmallnessCertificate {
    Int p;
    Int alpha1, alpha2;
    Int beta1, beta2;
    unsigned long n1 = 0, n2 = 0;
};

struct CertificateCheck {
    bool valid = false;
    std::string reason;
};

inline CertificateCheck verify_certificate(const SmallnessCertificate& c, const Int& bound)
{
    auto bad = [](std::string r) { return CertificateCheck{false, std::move(r)}; };
    if (!is_prime(c.p))
        return bad("p is not prime");
    if (c.p == 2)
        return bad("no anisotropic binary form exists modulo 2");
    if (c.beta1 == 0 || c.beta2 == 0)
        return bad("beta is zero");
    if (c.alpha1 != c.beta1 * ipow(c.p, 2 * c.n1 + 1) || c.alpha2 != c.beta2 * ipow(c.p, 2 * c.n2 + 1))
        return bad("alpha differs from beta * p^(2n+1)");
    if (mpz_divisible_p(c.beta1.get_mpz_t(), c.p.get_mpz_t()) || mpz_divisible_p(c.beta2.get_mpz_t(), c.p.get_mpz_t()))
        return bad("p divides beta");
    const Int minus_ratio = -c.beta1 * c.beta2;
    const bool anisotropic = legendre(minus_ratio, c.p) == -1;
    if (c.p <= 97) {
        const long p = c.p.get_si();
        const long b1 = mod_positive(c.beta1, c.p).get_si(), b2 = mod_positive(c.beta2, c.p).get_si();
        bool trivial_only = true;
        for (long x = 0; x < p && trivial_only; ++x)
            for (long y = 0; y < p; ++y)
                if ((x != 0 || y != 0) && (b1 * x % p * x + b2 * y % p * y) % p == 0) {
                    trivial_only = false;
                    break;
                }
        if (trivial_only != anisotropic)
            fail(ErrorCode::InternalInconsistency, "Legendre test and residue enumeration disagree");
    }
    if (!anisotropic)
        return bad("beta1 x^2 + beta2 y^2 has a nontrivial zero modulo p");
    if (!(c.p > bound))
        return bad("p does not exceed the bound");
    return {true, "valid"};
}

struct IsotropicPair {
    LatticeVector v, v2;
    Int pairing;
};

namespace detail {

inline long gcd_long(const std::vector<long>& x)
{
    long g = 0;
    for (long c : x)
        g = std::gcd(g, std::labs(c));
    return g;
}

inline bool proportional(const std::vector<long>& a, const std::vector<long>& b)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (a[i] * b[j] != a[j] * b[i])
                return false;
    return true;
}

inline std::vector<long> to_longs(const LatticeVector& v)
{
    std::vector<long> r;
    for (const auto& c : v)
        r.push_back(c.get_si());
    return r;
}

inline void require_indefinite_ambient(const QuadLattice& l)
{
    if (l.degenerate())
        fail(ErrorCode::DegenerateLattice, "lattice is degenerate");
    if (!indefinite(l))
        fail(ErrorCode::PreconditionViolation, "lattice is definite; no isotropic vectors");
}

} // namespace detail

inline LatticeVector find_isotropic(const QuadLattice& l, long height = kDefaultSearchHeight,
                                    std::uint64_t budget = kDefaultSearchBudget)
{
    FormEvaluator f(l);
    std::vector<long> found;
    search_vectors(l.rank(), height, budget, [&](const std::vector<long>& x) {
        if (f.qvalue(x) == 0 && detail::gcd_long(x) == 1) {
            found = x;
            return true;
        }
        return false;
    });
    if (found.empty())
        fail(ErrorCode::NotFoundWithinBound, "no isotropic vector within height " + std::to_string(height));
    return to_int_vec(found);
}

inline IsotropicPair find_isotropic_pair(const QuadLattice& l, long height = kDefaultSearchHeight,
                                         std::uint64_t budget = kDefaultSearchBudget)
{
    FormEvaluator f(l);
    std::vector<long> first, second;
    search_vectors(l.rank(), height, budget, [&](const std::vector<long>& x) {
        if (f.qvalue(x) != 0 || detail::gcd_long(x) != 1)
            return false;
        if (first.empty()) {
            first = x;
            return false;
        }
        if (detail::proportional(first, x) || f.pairing(first, x) == 0)
            return false;
        second = x;
        return true;
    });
    if (second.empty())
        fail(ErrorCode::NotFoundWithinBound, "no isotropic pair within height " + std::to_string(height));
    return {to_int_vec(first), to_int_vec(second), f.pairing(first, second)};
}

struct OddValuationVector {
    LatticeVector w; // ambient coordinates
    Int beta;
    unsigned long n = 0;
};

// Vectors w of the saturation of `c` with q(w) = beta * p^(2n+1), p ∤ beta,
// and sign(q(w)) = sign (0 accepts either), in search order over ambient
// coordinates. Stops after `limit` hits.
inline std::vector<OddValuationVector> odd_valuation_vectors(const Sublattice& c, const Int& p, int sign,
                                                             std::size_t limit, long height = kDefaultSearchHeight,
                                                             std::uint64_t budget = kDefaultSearchBudget)
{
    if (!is_prime(p))
        fail(ErrorCode::InvalidPrime, p.get_str() + " is not prime");
    const QuadLattice& amb = c.ambient;
    // x lies in the saturation of c iff annihilator * x = 0.
    IntMatrix annihilator(0, amb.rank());
    {
        std::vector<IntVec> ann = integer_kernel(c.basis_matrix().transpose());
        annihilator = ann.empty() ? IntMatrix(0, amb.rank()) : IntMatrix::from_rows(ann);
    }
    std::vector<std::vector<long>> ann;
    for (std::size_t i = 0; i < annihilator.rows(); ++i)
        ann.push_back(detail::to_longs(annihilator.row(i)));
    FormEvaluator f(amb);
    std::vector<OddValuationVector> out;
    search_vectors(amb.rank(), height, budget, [&](const std::vector<long>& x) {
        for (const auto& r : ann) {
            Int s = 0;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i] != 0)
                    s += Int(r[i]) * x[i];
            if (s != 0)
                return false;
        }
        if (detail::gcd_long(x) != 1)
            return false;
        const Int q = f.qvalue(x);
        if (q == 0 || (sign > 0 && q < 0) || (sign < 0 && q > 0))
            return false;
        const unsigned long v = valuation(q, p);
        if (v % 2 == 0)
            return false;
        out.push_back({to_int_vec(x), q / ipow(p, v), (v - 1) / 2});
        return out.size() >= limit;
    });
    return out;
}

inline OddValuationVector find_w_odd_valuation(const Sublattice& c, const Int& p, int sign = -1,
                                               long height = kDefaultSearchHeight,
                                               std::uint64_t budget = kDefaultSearchBudget)
{
    auto found = odd_valuation_vectors(c, p, sign, 1, height, budget);
    if (found.empty())
        fail(ErrorCode::NotFoundWithinBound,
             "no vector with odd " + p.get_str() + "-valuation within height " + std::to_string(height));
    return found.front();
}

struct OracleSummary {
    long height = 0;
    std::optional<std::int64_t> min_nonzero_abs;
    bool all_divisible = false;
    bool ran = false;
};

struct Rank2Result {
    Sublattice lattice; // saturated
    LatticeVector v, v2, v1, w;
    Int a, b;
    SmallnessCertificate certificate;
    Int index_before_saturation;
    OracleSummary oracle;
};

struct ForgeOptions {
    long search_height = kDefaultSearchHeight;
    std::uint64_t budget = kDefaultSearchBudget;
    long oracle_height = kRank2OracleHeight;
    std::size_t max_primes = 200;
    std::size_t w_candidates = 8;
};

namespace detail {

struct MultiplierChoice {
    unsigned long n1;
    Int beta1, a, b;
};

// Admissible (n1, beta1) in order of n1 then |beta1|; each with its
// factorizations 2ab * pairing = beta1 p^(2n1+1) ordered by |a| + |b|.
inline std::vector<MultiplierChoice> multiplier_choices(const Int& pairing, const Int& p, const Int& beta2, int sign,
                                                        std::size_t limit)
{
    std::vector<MultiplierChoice> out;
    const unsigned long k = valuation(pairing, p);
    const Int two_c = 2 * pairing;
    for (unsigned long n1 = (k + 1) / 2; n1 <= (k + 1) / 2 + 2 && out.size() < limit; ++n1) {
        const Int pk = ipow(p, 2 * n1 + 1);
        const Int step = abs(two_c) / gcd(two_c, pk);
        for (Int m = step; out.size() < limit && m <= step * p * 8; m += step) {
            if (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t()))
                continue;
            const Int beta1 = sign > 0 ? m : Int(-m);
            if (legendre(-beta1 * beta2, p) != -1)
                continue;
            const Int ab = beta1 * pk / two_c;
            std::vector<std::pair<Int, Int>> fac;
            const Int n = abs(ab);
            for (Int d = 1; d * d <= n; ++d)
                if (mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t())) {
                    const Int e = n / d;
                    const Int sgn = ab < 0 ? Int(-1) : Int(1);
                    fac.push_back({d, sgn * e});
                    if (d != e)
                        fac.push_back({e, sgn * d});
                }
            std::sort(fac.begin(), fac.end(), [](const auto& x, const auto& y) {
                const Int sx = abs(x.first) + abs(x.second), sy = abs(y.first) + abs(y.second);
                return sx != sy ? sx < sy : x.first < y.first;
            });
            for (const auto& [a, b] : fac)
                out.push_back({n1, beta1, a, b});
        }
    }
    return out;
}

inline LatticeVector combine(const Int& a, const LatticeVector& v, const Int& b, const LatticeVector& v2)
{
    LatticeVector r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        r[i] = a * v[i] + b * v2[i];
    return r;
}

inline OracleSummary run_rank2_oracle(const Sublattice& s, const Int& p, long height)
{
    OracleSummary o;
    o.height = height;
    ValueTable t = enumerate_values(s.lattice(), height);
    o.min_nonzero_abs = t.min_nonzero_abs();
    o.all_divisible = t.all_divisible_by(p.get_si());
    o.ran = true;
    return o;
}

// One attempt at a fixed prime; nullopt when no w is found at this height.
inline std::optional<Rank2Result> attempt_prime(const QuadLattice& l, const IsotropicPair& pair, const Sublattice& comp,
                                                int w_sign, const Int& p, const ForgeOptions& opt)
{
    std::vector<OddValuationVector> ws;
    try {
        ws = odd_valuation_vectors(comp, p, w_sign, opt.w_candidates, opt.search_height, opt.budget);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::BudgetExceeded)
            throw;
    }
    if (ws.empty())
        return std::nullopt;
    std::optional<Rank2Result> fallback;
    for (const auto& w : ws) {
        for (const auto& m : multiplier_choices(pair.pairing, p, w.beta, -w_sign, 16)) {
            Rank2Result r{make_sublattice(l, {}), pair.v, pair.v2, combine(m.a, pair.v, m.b, pair.v2), w.w,
                          m.a, m.b, {}, 0, {}};
            r.certificate = {p, qvalue(l, r.v1), qvalue(l, w.w), m.beta1, w.beta, m.n1, w.n};
            Sublattice raw = make_sublattice(l, {r.v1, r.w});
            r.index_before_saturation = saturation_index(raw);
            r.lattice = r.index_before_saturation == 1 ? raw : saturate(raw);
            if (r.index_before_saturation == 1)
                return r;
            if (!fallback)
                fallback = r;
        }
    }
    return fallback;
}

} // namespace detail

// Primitive rank-2 sublattice of signature (1,1) none of whose nonzero values
// has absolute value at most `bound`, with a divisibility certificate.
inline Rank2Result find_rank2_avoiding(const QuadLattice& l, const Int& bound, const ForgeOptions& opt = {})
{
    if (l.rank() < 5)
        fail(ErrorCode::PreconditionViolation, "rank must be at least 5");
    detail::require_indefinite_ambient(l);
    if (bound < 0)
        fail(ErrorCode::PreconditionViolation, "bound must be nonnegative");

    IsotropicPair pair = find_isotropic_pair(l, opt.search_height, opt.budget);
    Sublattice comp = orthogonal_complement(make_sublattice(l, {pair.v, pair.v2}));
    // The complement has signature (r-1, s-1); w takes the sign it can.
    const Signature sc = signature(comp.lattice());
    const int w_sign = sc.neg > 0 ? -1 : 1;

    Int p = bound < 2 ? Int(2) : bound;
    for (std::size_t tried = 0; tried < opt.max_primes;) {
        p = next_prime_after(p);
        if (p == 2)
            continue;
        ++tried;
        std::optional<Rank2Result> r = detail::attempt_prime(l, pair, comp, w_sign, p, opt);
        if (!r)
            continue;
        CertificateCheck check = verify_certificate(r->certificate, bound);
        if (!check.valid)
            fail(ErrorCode::InternalInconsistency, "constructed certificate rejected: " + check.reason);
        if (signature(r->lattice.lattice()) != Signature{1, 1})
            fail(ErrorCode::InternalInconsistency, "constructed lattice is not of signature (1,1)");
        if (opt.oracle_height > 0) {
            r->oracle = detail::run_rank2_oracle(r->lattice, p, opt.oracle_height);
            if (!r->oracle.all_divisible || (r->oracle.min_nonzero_abs && *r->oracle.min_nonzero_abs <= bound))
                fail(ErrorCode::InternalInconsistency, "enumeration contradicts the certificate");
        }
        return *r;
    }
    fail(ErrorCode::PoolExhausted, "no workable prime among the first " + std::to_string(opt.max_primes));
}

inline Int select_prime(const QuadLattice& l, const Int& bound, ForgeOptions opt = {})
{
    opt.oracle_height = 0;
    return find_rank2_avoiding(l, bound, opt).certificate.p;
}

} // namespace qforge
