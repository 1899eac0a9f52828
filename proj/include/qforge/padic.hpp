#pragma once

#include <algorithm>
#include <bitset>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "arith.hpp"
#include "lattice.hpp"

namespace qforge {

// A place of Q: a prime p, or the real place (stored as prime 0).
struct Place {
    Int prime = 0;

    static Place infinity() { return Place{Int(0)}; }
    static Place finite(const Int& p)
    {
        if (!is_prime(p))
            fail(ErrorCode::InvalidPrime, p.get_str() + " is not prime");
        return Place{p};
    }

    bool is_infinite() const { return prime == 0; }
    std::string str() const { return is_infinite() ? std::string("inf") : prime.get_str(); }

    // Finite places in increasing order, the real place last.
    friend bool operator<(const Place& a, const Place& b)
    {
        if (a.is_infinite() || b.is_infinite())
            return !a.is_infinite() && b.is_infinite();
        return a.prime < b.prime;
    }
    friend bool operator==(const Place& a, const Place& b) { return a.prime == b.prime; }
};

// Prescribed signs; places that are absent carry +1.
using SignMap = std::map<Place, int>;

inline int legendre(const Int& a, const Int& p)
{
    if (p == 2 || !is_prime(p))
        fail(ErrorCode::InvalidPrime, "Legendre symbol needs an odd prime, got " + p.get_str());
    return mpz_legendre(a.get_mpz_t(), p.get_mpz_t());
}

namespace detail {

inline int hilbert_integers(const Int& a, const Int& b, const Place& place)
{
    if (place.is_infinite())
        return (a < 0 && b < 0) ? -1 : 1;
    const Int& p = place.prime;
    const unsigned long alpha = valuation(a, p);
    const unsigned long beta = valuation(b, p);
    const Int u = strip(a, p);
    const Int v = strip(b, p);
    if (p == 2) {
        auto eps = [](const Int& x) { return mod_positive(x, Int(4)) == 3 ? 1 : 0; };
        auto omega = [](const Int& x) {
            Int r = mod_positive(x, Int(8));
            return (r == 3 || r == 5) ? 1 : 0;
        };
        unsigned long e = eps(u) * eps(v) + (alpha % 2) * omega(v) + (beta % 2) * omega(u);
        return (e % 2 == 0) ? 1 : -1;
    }
    int s = 1;
    const bool epsP = mod_positive(p, Int(4)) == 3;
    if (epsP && (alpha % 2 == 1) && (beta % 2 == 1))
        s = -s;
    if (beta % 2 == 1)
        s *= legendre(u, p);
    if (alpha % 2 == 1)
        s *= legendre(v, p);
    return s;
}

inline Int square_class_integer(const Rat& x) { return x.get_num() * x.get_den(); }

} // namespace detail

// (a, b)_v: +1 iff a x^2 + b y^2 = z^2 has a nonzero solution over Q_v.
inline int hilbert_symbol(const Rat& a, const Rat& b, const Place& place)
{
    if (a == 0 || b == 0)
        fail(ErrorCode::ZeroArgument, "Hilbert symbol of zero");
    return detail::hilbert_integers(detail::square_class_integer(a), detail::square_class_integer(b), place);
}

inline bool is_local_square(const Rat& x, const Place& place)
{
    if (x == 0)
        fail(ErrorCode::ZeroArgument, "local square test of zero");
    if (place.is_infinite())
        return x > 0;
    const Int n = detail::square_class_integer(x);
    const Int& p = place.prime;
    if (valuation(n, p) % 2 == 1)
        return false;
    const Int u = strip(n, p);
    if (p == 2)
        return mod_positive(u, Int(8)) == 1;
    return legendre(u, p) == 1;
}

// Places where (a, b) can differ from +1: primes dividing 2ab, plus infinity.
inline std::set<Place> symbol_support(const std::vector<Rat>& xs)
{
    std::set<Place> s{Place{Int(2)}, Place::infinity()};
    for (const auto& x : xs) {
        if (x == 0)
            fail(ErrorCode::ZeroArgument, "support of zero");
        for (const auto& p : prime_divisors(detail::square_class_integer(x)))
            s.insert(Place{p});
    }
    return s;
}

// Complete invariant of a nondegenerate rational quadratic form.
struct InvariantTriple {
    Signature signature;
    Int disc_class = 1;      // signed squarefree
    SignMap epsilons;        // only places with epsilon = -1, including inf

    int epsilon(const Place& p) const
    {
        auto it = epsilons.find(p);
        return it == epsilons.end() ? 1 : it->second;
    }

    friend bool operator==(const InvariantTriple& a, const InvariantTriple& b)
    {
        return a.signature == b.signature && a.disc_class == b.disc_class && a.epsilons == b.epsilons;
    }

    std::string str() const
    {
        std::string s = "((" + std::to_string(signature.pos) + "," + std::to_string(signature.neg) + "), d=" +
                        disc_class.get_str() + ", eps=-1 at {";
        bool first = true;
        for (const auto& [p, e] : epsilons) {
            s += (first ? "" : ",") + p.str();
            first = false;
        }
        return s + "})";
    }
};

inline InvariantTriple invariant_triple(const RatVec& diag)
{
    InvariantTriple t;
    Rat d = 1;
    for (const auto& a : diag) {
        if (a == 0)
            fail(ErrorCode::DegenerateLattice, "zero diagonal entry");
        (a > 0 ? t.signature.pos : t.signature.neg)++;
        d *= a;
    }
    t.disc_class = squarefree_part(d);
    for (const auto& place : symbol_support(diag)) {
        int e = 1;
        for (std::size_t i = 0; i < diag.size(); ++i)
            for (std::size_t j = i + 1; j < diag.size(); ++j)
                e *= hilbert_symbol(diag[i], diag[j], place);
        if (e == -1)
            t.epsilons[place] = -1;
    }
    return t;
}

inline InvariantTriple invariant_triple(const RatMatrix& gram, const std::vector<std::size_t>& order = {})
{
    return invariant_triple(diagonalize(gram, order).entries);
}

inline InvariantTriple invariant_triple(const QuadLattice& l, const std::vector<std::size_t>& order = {})
{
    return invariant_triple(to_rational(l.gram()), order);
}

// Invariants of sum(+z_i^2) - sum(z_j^2) with the given signature.
inline InvariantTriple standard_invariants(const Signature& s)
{
    RatVec diag(s.pos, Rat(1));
    diag.insert(diag.end(), s.neg, Rat(-1));
    return invariant_triple(diag);
}

inline bool rationally_equivalent(const RatMatrix& a, const RatMatrix& b)
{
    if (a.rows() != b.rows())
        fail(ErrorCode::RankMismatch, "forms of different rank");
    return invariant_triple(a) == invariant_triple(b);
}

inline bool rationally_equivalent(const QuadLattice& a, const QuadLattice& b)
{
    return rationally_equivalent(to_rational(a.gram()), to_rational(b.gram()));
}

inline constexpr std::size_t kAuxiliaryPrimes = 25;

struct PrescribedSolverOptions {
    int required_sign = 0; // 0 any, +1 / -1 forces the sign of y
    std::size_t auxiliary_primes = kAuxiliaryPrimes;
};

// Consistency of a prescription for (x, .): finitely many -1, product +1, and
// no -1 where x is a local square.
inline void check_prescription(const Rat& x, const SignMap& targets)
{
    int prod = 1;
    for (const auto& [place, s] : targets) {
        if (s != 1 && s != -1)
            fail(ErrorCode::BadInput, "prescribed symbols must be +1 or -1");
        prod *= s;
        if (s == -1 && is_local_square(x, place))
            fail(ErrorCode::Inconsistent, "x is a square at " + place.str() + " but -1 was prescribed");
    }
    if (prod != 1)
        fail(ErrorCode::Inconsistent, "product of prescribed symbols is -1");
}

// y with (x, y)_v = targets[v] at every place (+1 where unspecified).
// Candidates are ± products of primes from S = {2} ∪ primes(x) ∪ primes(targets)
// times at most two auxiliary primes outside S; the smallest |y| wins, positive
// before negative. Each candidate's symbol vector is the XOR of per-generator
// vectors, since (x, .)_v is multiplicative.
inline Rat solve_prescribed_hilbert(const Rat& x, const SignMap& targets, const PrescribedSolverOptions& opt = {})
{
    if (x == 0)
        fail(ErrorCode::ZeroArgument, "x must be nonzero");
    check_prescription(x, targets);

    std::set<Int> base{Int(2)};
    for (const auto& p : prime_divisors(detail::square_class_integer(x)))
        base.insert(p);
    for (const auto& [place, s] : targets)
        if (!place.is_infinite())
            base.insert(place.prime);
    std::vector<Int> aux;
    for (Int q = 2; aux.size() < opt.auxiliary_primes; q = next_prime_after(q)) {
        bool inTargets = false;
        for (const auto& [place, s] : targets)
            inTargets = inTargets || place.prime == q;
        if (!inTargets && !base.count(q))
            aux.push_back(q);
    }

    std::vector<Place> places;
    for (const auto& p : base)
        places.push_back(Place{p});
    for (const auto& q : aux)
        places.push_back(Place{q});
    places.push_back(Place::infinity());
    constexpr std::size_t kMaxPlaces = 256;
    if (places.size() > kMaxPlaces || base.size() > 20)
        fail(ErrorCode::SearchExhausted, "prime support too large for the candidate search");
    using Mask = std::bitset<kMaxPlaces>;

    auto mask_of = [&](const Rat& y) {
        Mask m;
        for (std::size_t i = 0; i < places.size(); ++i)
            if (hilbert_symbol(x, y, places[i]) == -1)
                m.set(i);
        return m;
    };
    Mask target;
    for (std::size_t i = 0; i < places.size(); ++i) {
        auto it = targets.find(places[i]);
        if (it != targets.end() && it->second == -1)
            target.set(i);
    }

    const std::vector<Int> baseList(base.begin(), base.end());
    std::vector<Mask> baseMasks;
    for (const auto& p : baseList)
        baseMasks.push_back(mask_of(Rat(p)));
    const Mask minusMask = mask_of(Rat(-1));

    // Smallest auxiliary product (1, q, or q1*q2) per residual mask.
    std::unordered_map<Mask, Int> auxBest;
    auto offer = [&](const Mask& m, const Int& v) {
        auto it = auxBest.find(m);
        if (it == auxBest.end() || v < it->second)
            auxBest[m] = v;
    };
    offer(Mask{}, Int(1));
    std::vector<Mask> auxMasks;
    for (const auto& q : aux)
        auxMasks.push_back(mask_of(Rat(q)));
    for (std::size_t i = 0; i < aux.size(); ++i) {
        offer(auxMasks[i], aux[i]);
        for (std::size_t j = i + 1; j < aux.size(); ++j)
            offer(auxMasks[i] ^ auxMasks[j], aux[i] * aux[j]);
    }

    std::optional<Int> best;
    const std::size_t nb = baseList.size();
    for (unsigned long subset = 0; subset < (1UL << nb); ++subset) {
        Mask m;
        Int prod = 1;
        for (std::size_t i = 0; i < nb; ++i)
            if (subset & (1UL << i)) {
                m ^= baseMasks[i];
                prod *= baseList[i];
            }
        for (int sign : {1, -1}) {
            if (opt.required_sign != 0 && sign != opt.required_sign)
                continue;
            Mask residual = target ^ m;
            if (sign < 0)
                residual ^= minusMask;
            auto it = auxBest.find(residual);
            if (it == auxBest.end())
                continue;
            Int y = sign * prod * it->second;
            if (!best || abs(y) < abs(*best) || (abs(y) == abs(*best) && y > *best))
                best = y;
        }
    }
    if (!best)
        fail(ErrorCode::SearchExhausted, "no y found with the given prime pool; enlarge the auxiliary pool");

    // Never return an unverified y.
    const Rat y(*best);
    for (const auto& place : symbol_support({x, y})) {
        auto it = targets.find(place);
        const int want = it == targets.end() ? 1 : it->second;
        if (hilbert_symbol(x, y, place) != want)
            fail(ErrorCode::InternalInconsistency, "solver produced y failing at " + place.str());
    }
    for (const auto& [place, want] : targets)
        if (hilbert_symbol(x, y, place) != want)
            fail(ErrorCode::InternalInconsistency, "solver produced y failing at " + place.str());
    return y;
}

struct PrescribedPair {
    Rat x;
    Rat y;
};

// x, y of the requested signs with (x, y)_v = targets[v] at every place.
// x is the smallest |x| of the right sign that is a non-square at every place
// carrying -1; y then comes from solve_prescribed_hilbert.
inline PrescribedPair choose_pair_prescribed(const SignMap& targets, int sign_x, int sign_y,
                                            unsigned long max_x = 100000)
{
    if ((sign_x != 1 && sign_x != -1) || (sign_y != 1 && sign_y != -1))
        fail(ErrorCode::BadInput, "signs must be +1 or -1");
    int prod = 1;
    for (const auto& [place, s] : targets)
        prod *= s;
    if (prod != 1)
        fail(ErrorCode::Inconsistent, "product of prescribed symbols is -1");
    auto inf = targets.find(Place::infinity());
    const int deltaInf = inf == targets.end() ? 1 : inf->second;
    const int impliedInf = (sign_x < 0 && sign_y < 0) ? -1 : 1;
    if (deltaInf != impliedInf)
        fail(ErrorCode::Inconsistent, "signs of x and y contradict the symbol at infinity");

    for (unsigned long m = 1; m <= max_x; ++m) {
        const Rat x(sign_x * static_cast<long>(m));
        bool ok = true;
        for (const auto& [place, s] : targets) {
            if (s != -1 || place.is_infinite())
                continue;
            if (place.prime == 2)
                ok = ok && !is_local_square(x, place);
            else
                ok = ok && legendre(x.get_num(), place.prime) == -1;
        }
        if (!ok)
            continue;
        try {
            PrescribedSolverOptions opt;
            opt.required_sign = sign_y;
            Rat y = solve_prescribed_hilbert(x, targets, opt);
            return {x, y};
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SearchExhausted && e.code() != ErrorCode::Inconsistent)
                throw;
        }
    }
    fail(ErrorCode::SearchExhausted, "no admissible x up to " + std::to_string(max_x));
}

} // namespace qforge
