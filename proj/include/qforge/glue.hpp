#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arith.hpp"
#include "enumerate.hpp"
#include "forge.hpp"
#include "padic.hpp"

namespace qforge {

// ---------------------------------------------------------------------------
// Extension by three diagonal entries to a standard form.

struct ExtensionResult {
    Int b0, b1, b2;
    Signature target;
    InvariantTriple augmented;
    InvariantTriple standard;
    RatVec h_diagonal;
    std::string method; // "small-search" or "hilbert"
};

enum class ExtensionMethod { Auto, Hilbert };

// The four admissible signatures of the extended form, most positive first.
inline std::vector<Signature> extension_targets(const Signature& s)
{
    return {{s.pos + 3, s.neg}, {s.pos + 2, s.neg + 1}, {s.pos + 1, s.neg + 2}, {s.pos, s.neg + 3}};
}

namespace detail {

inline std::vector<Int> small_squarefree(long count)
{
    std::vector<Int> out;
    for (long n = 1; static_cast<long>(out.size()) < count; ++n)
        if (squarefree_part(Rat(n)) == n)
            out.emplace_back(n);
    return out;
}

// Sign patterns (σ0, σ1, σ2) with exactly `neg` entries equal to -1.
inline std::vector<std::array<int, 3>> sign_patterns(std::size_t neg)
{
    std::vector<std::array<int, 3>> out;
    for (int mask = 0; mask < 8; ++mask) {
        std::array<int, 3> s{};
        std::size_t n = 0;
        for (int i = 0; i < 3; ++i) {
            s[i] = (mask >> i) & 1 ? -1 : 1;
            n += s[i] < 0;
        }
        if (n == neg)
            out.push_back(s);
    }
    return out;
}

inline RatVec with_extra(const RatVec& diag, const Int& b0, const Int& b1, const Int& b2)
{
    RatVec r = diag;
    r.emplace_back(b0);
    r.emplace_back(b1);
    r.emplace_back(b2);
    return r;
}

} // namespace detail

inline ExtensionResult extend_to_standard(const QuadLattice& h, const Signature& target,
                                          ExtensionMethod method = ExtensionMethod::Auto)
{
    if (h.degenerate())
        fail(ErrorCode::DegenerateLattice, "lattice is degenerate");
    const Diagonalization dg = diagonalize(h);
    const Signature s = signature(h);
    bool admissible = false;
    for (const auto& t : extension_targets(s))
        admissible = admissible || t == target;
    if (!admissible)
        fail(ErrorCode::PreconditionViolation, "target signature is not the signature of H plus three entries");

    ExtensionResult r;
    r.target = target;
    r.h_diagonal = dg.entries;
    r.standard = standard_invariants(target);
    const InvariantTriple eh = invariant_triple(dg.entries);
    Rat prod = 1;
    for (const auto& a : dg.entries)
        prod *= a;
    const Int d = squarefree_part(prod);
    const Int c = squarefree_part(Rat(target.neg % 2 == 0 ? d : Int(-d)));
    const int sign_c = c < 0 ? -1 : 1;
    const std::size_t extra_neg = target.neg - s.neg;

    auto verified = [&](const Int& b0, const Int& b1, const Int& b2, const char* how) {
        InvariantTriple aug = invariant_triple(detail::with_extra(dg.entries, b0, b1, b2));
        if (!(aug == r.standard))
            return false;
        r.b0 = b0;
        r.b1 = b1;
        r.b2 = b2;
        r.augmented = aug;
        r.method = how;
        return true;
    };

    // Places where a symbol in the condition can be -1.
    std::set<Place> base_places{Place::infinity(), Place::finite(2)};
    for (const auto& p : prime_divisors(d))
        base_places.insert(Place::finite(p));
    for (const auto& [p, e] : eh.epsilons)
        base_places.insert(p);

    // Need ε(H) (d,c) (b0,-c) (b1,-c b0) = ε(std) at every place.
    auto condition_holds = [&](const Int& b0, const Int& b1) {
        std::set<Place> places = base_places;
        for (const auto& p : prime_divisors(b0))
            places.insert(Place::finite(p));
        for (const auto& p : prime_divisors(b1))
            places.insert(Place::finite(p));
        for (const auto& pl : places) {
            const int lhs = eh.epsilon(pl) * hilbert_symbol(Rat(d), Rat(c), pl) * hilbert_symbol(Rat(b0), Rat(-c), pl) *
                            hilbert_symbol(Rat(b1), Rat(-c * b0), pl);
            if (lhs != r.standard.epsilon(pl))
                return false;
        }
        return true;
    };

    const auto patterns = detail::sign_patterns(extra_neg);
    if (method == ExtensionMethod::Auto) {
        const auto pool = detail::small_squarefree(24);
        for (const auto& sg : patterns)
            for (std::size_t w = 0; w < 2 * pool.size() - 1; ++w)
                for (std::size_t i = 0; i <= w && i < pool.size(); ++i) {
                    const std::size_t j = w - i;
                    if (j >= pool.size())
                        continue;
                    const Int b0 = sg[0] * pool[i], b1 = sg[1] * pool[j];
                    const Int b2 = squarefree_part(Rat(c * b0 * b1));
                    if ((b2 < 0) != (sg[2] < 0))
                        continue;
                    if (condition_holds(b0, b1) && verified(b0, b1, b2, "small-search"))
                        return r;
                }
    }

    // (X, Y) = (-c b0, -c b1) with prescribed Hilbert symbols.
    SignMap targets;
    {
        std::set<Place> places = base_places;
        for (const auto& p : prime_divisors(c))
            places.insert(Place::finite(p));
        for (const auto& pl : places) {
            const int delta = r.standard.epsilon(pl) * eh.epsilon(pl) * hilbert_symbol(Rat(d), Rat(c), pl) *
                              hilbert_symbol(Rat(-c), Rat(-1), pl);
            if (delta == -1)
                targets[pl] = -1;
        }
    }
    for (const auto& sg : patterns) {
        PrescribedPair xy;
        try {
            xy = choose_pair_prescribed(targets, -sign_c * sg[0], -sign_c * sg[1]);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Inconsistent)
                continue;
            throw;
        }
        const Int b0 = squarefree_part(-xy.x / Rat(c));
        const Int b1 = squarefree_part(-xy.y / Rat(c));
        const Int b2 = squarefree_part(Rat(c * b0 * b1));
        if (verified(b0, b1, b2, "hilbert"))
            return r;
        fail(ErrorCode::InternalInconsistency, "prescribed Hilbert symbols did not give the standard invariants");
    }
    fail(ErrorCode::Inconsistent, "no sign pattern is consistent with the prescribed symbols");
}

// ---------------------------------------------------------------------------
// Explicit rational isometries.

inline constexpr long kIsometrySearchHeight = 6;
inline constexpr std::uint64_t kIsometrySearchBudget = 4'000'000;

namespace detail {

inline std::optional<Rat> rational_sqrt(const Rat& r)
{
    if (r <= 0 || !is_square(r.get_num()) || !is_square(r.get_den()))
        return std::nullopt;
    return Rat(isqrt(r.get_num()), isqrt(r.get_den()));
}

inline constexpr std::size_t kIsometryPoolSize = 20'000;

inline IntVec in_ambient(const std::vector<IntVec>& w, const IntVec& z)
{
    IntVec v(w.front().size(), 0);
    for (std::size_t k = 0; k < w.size(); ++k)
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] += z[k] * w[k][j];
    return v;
}

// Basis of the orthogonal complement of xs inside span(w), in ambient coordinates.
inline std::vector<IntVec> complement_in_span(const QuadLattice& f, const std::vector<IntVec>& w,
                                              const std::vector<IntVec>& xs)
{
    IntMatrix rows(xs.size(), w.size());
    for (std::size_t r = 0; r < xs.size(); ++r)
        for (std::size_t k = 0; k < w.size(); ++k)
            rows(r, k) = pairing(f, xs[r], w[k]);
    std::vector<IntVec> next;
    for (const auto& c : integer_kernel(rows))
        next.push_back(in_ambient(w, c));
    return hermite_basis(next);
}

inline std::vector<IntVec> complement_in_span(const QuadLattice& f, const std::vector<IntVec>& w, const IntVec& x)
{
    return complement_in_span(f, w, std::vector<IntVec>{x});
}

// Isotropic z of span(w) with a basis vector u pairing with it minimally.
struct HyperbolicPair {
    IntVec z, u;
    Int b, qu;

    // u - q(u) / (2b) z, isotropic with b(z, .) = b.
    RatVec isotropic_partner() const
    {
        RatVec out;
        const Rat t = Rat(qu) / Rat(2 * b);
        for (std::size_t j = 0; j < u.size(); ++j)
            out.push_back(Rat(u[j]) - t * Rat(z[j]));
        return out;
    }
};

inline HyperbolicPair hyperbolic_pair(const QuadLattice& f, const std::vector<IntVec>& w, const IntVec& local_z)
{
    HyperbolicPair h{in_ambient(w, local_z), {}, 0, 0};
    for (const auto& v : w) {
        const Int b = pairing(f, h.z, v);
        if (b != 0 && (h.b == 0 || abs(b) < abs(h.b))) {
            h.b = b;
            h.u = v;
        }
    }
    if (h.b == 0)
        fail(ErrorCode::InternalInconsistency, "isotropic vector in a non-degenerate span pairs trivially");
    h.qu = pairing(f, h.u, h.u);
    return h;
}

// Value with small square factors removed; equal keys are candidates for a
// rational-square ratio, confirmed exactly by the caller.
inline Int square_class_key(Int q)
{
    for (long p = 2; p < 200; ++p) {
        const long pp = p * p;
        while (mpz_divisible_ui_p(q.get_mpz_t(), pp))
            q /= pp;
    }
    return q;
}

struct VectorPool {
    std::vector<std::pair<Int, IntVec>> values; // non-isotropic, in ambient coordinates
    std::optional<IntVec> isotropic;            // in span(w) coordinates
    QuadLattice span;
};

inline VectorPool vector_pool(const QuadLattice& f, const std::vector<IntVec>& w, long height,
                              std::uint64_t budget, std::uint64_t& spent)
{
    VectorPool pool{{}, std::nullopt, Sublattice{f, w}.lattice()};
    FormEvaluator ev(pool.span);
    try {
        search_vectors(pool.span.rank(), height, budget - std::min(budget, spent), [&](const std::vector<long>& z) {
            ++spent;
            const Int q = ev.qvalue(z);
            if (q == 0) {
                if (!pool.isotropic)
                    pool.isotropic = to_int_vec(z);
            } else {
                pool.values.emplace_back(q, in_ambient(w, to_int_vec(z)));
            }
            return pool.values.size() >= kIsometryPoolSize;
        });
    } catch (const Error& e) {
        if (e.code() != ErrorCode::BudgetExceeded || pool.values.empty())
            throw;
    }
    std::stable_sort(pool.values.begin(), pool.values.end(),
                     [](const auto& x, const auto& y) { return abs(x.first) < abs(y.first); });
    return pool;
}

// u + t z in span(w) with q = a, from an isotropic z; prefers an integral t.
inline RatVec through_isotropic(const std::vector<IntVec>& w, const QuadLattice& span, const IntVec& z, const Rat& a)
{
    const IntMatrix& g = span.gram();
    std::optional<std::pair<std::size_t, Rat>> best;
    for (std::size_t k = 0; k < span.rank(); ++k) {
        Int b = 0;
        for (std::size_t l = 0; l < span.rank(); ++l)
            b += z[l] * g(l, k);
        if (b == 0)
            continue;
        Rat t = (a - Rat(g(k, k))) / Rat(2 * b);
        t.canonicalize();
        if (!best || t.get_den() < best->second.get_den())
            best = std::make_pair(k, t);
    }
    if (!best)
        fail(ErrorCode::InternalInconsistency, "isotropic vector in a non-degenerate span pairs trivially");
    RatVec local(span.rank());
    for (std::size_t l = 0; l < span.rank(); ++l)
        local[l] = best->second * Rat(z[l]);
    local[best->first] += 1;
    RatVec y(w.front().size(), Rat(0));
    for (std::size_t k = 0; k < w.size(); ++k)
        for (std::size_t j = 0; j < y.size(); ++j)
            y[j] += local[k] * Rat(w[k][j]);
    return y;
}

// Nontrivial (x, y, z) with z^2 = a x^2 + b y^2, a and b squarefree, by
// descent through t^2 ≡ b (mod a); none if the equation has no solution.
inline std::optional<std::array<Int, 3>> legendre_solve(const Int& a, const Int& b)
{
    if (a == 1)
        return std::array<Int, 3>{1, 0, 1};
    if (b == 1)
        return std::array<Int, 3>{0, 1, 1};
    if (a < 0 && b < 0)
        return std::nullopt;
    if (abs(a) < abs(b)) {
        auto r = legendre_solve(b, a);
        if (r)
            std::swap((*r)[0], (*r)[1]);
        return r;
    }
    const Int m = abs(a);
    const auto root = sqrt_mod_squarefree(b, m);
    if (!root)
        return std::nullopt;
    Int t = *root;
    if (2 * t > m)
        t -= m;
    const Int r = (t * t - b) / a;
    const Int k = squarefree_part(Rat(r));
    const Int u = isqrt(r / k);
    auto sub = legendre_solve(k, b);
    if (!sub)
        return std::nullopt;
    const auto& [x1, y1, z1] = *sub;
    std::array<Int, 3> out{k * u * x1, z1 + y1 * t, z1 * t + b * y1};
    const Int g = gcd(gcd(out[0], out[1]), out[2]);
    if (g > 1)
        for (auto& c : out)
            c /= g;
    return out;
}

// Rational (X, Y) with c1 X^2 + c2 Y^2 = m for nonzero integers c1, c2, m.
inline std::optional<std::pair<Rat, Rat>> represent_binary(const Int& c1, const Int& c2, Rat m)
{
    m.canonicalize();
    // With M = num(m) den(m): z^2 = c1 M x^2 + c2 M y^2 gives X = x M / (z den(m)).
    const Int M = m.get_num() * m.get_den();
    const Int A = c1 * M, B = c2 * M;
    const Int a0 = squarefree_part(Rat(A)), b0 = squarefree_part(Rat(B));
    const Int s = isqrt(A / a0), u = isqrt(B / b0);
    auto sol = legendre_solve(a0, b0);
    if (!sol)
        return std::nullopt;
    const auto& [x0, y0, z0] = *sol;
    const Int x = x0 * u, y = y0 * s, z = z0 * s * u;
    if (z == 0) {
        // c1 x^2 + c2 y^2 = 0: e = (x, y) and f = (x, -y) are isotropic, q(e + t f) = 2 t b(e, f).
        const Rat pair = Rat(2 * c1 * x * x);
        const Rat t = m / (2 * pair);
        return std::make_pair(Rat(x) + t * Rat(x), Rat(y) - t * Rat(y));
    }
    Rat X = Rat(x * M, z), Y = Rat(y * M, z);
    X.canonicalize();
    Y.canonicalize();
    X /= Rat(m.get_den());
    Y /= Rat(m.get_den());
    return std::make_pair(X, Y);
}

inline constexpr long kTailHeight = 2000;
inline constexpr std::uint64_t kTailAttempts = 30000;
inline constexpr std::size_t kTailRotations = 3;
inline constexpr std::uint64_t kFactorSteps = 20000;

// A rational vector of span(w) with q = a, through a diagonal basis: two
// coordinates from a binary equation, the rest from a small rational search.
inline std::optional<RatVec> represent_by_descent(const QuadLattice& f, const std::vector<IntVec>& w, const Rat& a)
{
    const QuadLattice span = Sublattice{f, w}.lattice();
    const std::size_t k = span.rank();
    const Diagonalization d = diagonalize(span);
    // Integral diagonal entries c_i after scaling basis columns by denominators.
    std::vector<Int> c(k);
    RatMatrix basis = d.basis;
    for (std::size_t i = 0; i < k; ++i) {
        Rat e = d.entries[i];
        e.canonicalize();
        const Int den = e.get_den();
        c[i] = e.get_num() * den;
        for (std::size_t r = 0; r < k; ++r)
            basis(r, i) *= Rat(den);
    }
    auto assemble = [&](const std::vector<Rat>& coords) {
        RatVec local(k, Rat(0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t r = 0; r < k; ++r)
                local[r] += basis(r, i) * coords[i];
        RatVec y(f.rank(), Rat(0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < y.size(); ++j)
                y[j] += local[i] * Rat(w[i][j]);
        return y;
    };
    if (k == 1) {
        auto r = rational_sqrt(a / Rat(c[0]));
        if (!r)
            return std::nullopt;
        return assemble({*r});
    }
    std::optional<RatVec> out;
    // Coordinates (X / v, Y / v, u / v) in rotated order (i0, i1, rest) with
    // c_i0 X^2 + c_i1 Y^2 = a v^2 - sum c_i u_i^2.
    for (std::size_t rot = 0; rot < std::min(k, kTailRotations) && !out; ++rot) {
        std::vector<std::size_t> order(k);
        for (std::size_t i = 0; i < k; ++i)
            order[i] = (i + rot) % k;
        auto attempt = [&](long v, const std::vector<long>& u) {
            Rat m = a * Rat(v * v);
            for (std::size_t i = 0; i < u.size(); ++i)
                m -= Rat(c[order[i + 2]] * u[i] * u[i]);
            if (m == 0)
                return false;
            std::optional<std::pair<Rat, Rat>> xy;
            try {
                FactorAllowance allowance(kFactorSteps);
                xy = represent_binary(c[order[0]], c[order[1]], m);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::BudgetExceeded)
                    throw;
            }
            if (!xy)
                return false;
            std::vector<Rat> coords(k);
            coords[order[0]] = xy->first / Rat(v);
            coords[order[1]] = xy->second / Rat(v);
            for (std::size_t i = 0; i < u.size(); ++i)
                coords[order[i + 2]] = Rat(u[i]) / Rat(v);
            out = assemble(coords);
            return true;
        };
        if (attempt(1, std::vector<long>(k - 2, 0)))
            return out;
        try {
            search_vectors(k - 1, kTailHeight, kTailAttempts, [&](const std::vector<long>& z) {
                // Sign patterns give the same value.
                if (z[0] <= 0 || std::any_of(z.begin() + 1, z.end(), [](long x) { return x < 0; }))
                    return false;
                return attempt(z[0], std::vector<long>(z.begin() + 1, z.end()));
            });
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BudgetExceeded)
                throw;
        }
    }
    return out;
}

// Images of a fixed diagonal basis of f1, each found by a bounded search
// for a vector of f2's current complement with q2 / a_i a rational square.
inline RatMatrix isometry_from_diagonal(const QuadLattice& f1, const QuadLattice& f2, long height,
                                        std::uint64_t budget)
{
    const std::size_t n = f1.rank();
    const Diagonalization d1 = diagonalize(f1);

    std::vector<IntVec> w;
    for (std::size_t i = 0; i < n; ++i) {
        IntVec e(n, 0);
        e[i] = 1;
        w.push_back(e);
    }
    RatMatrix y(n, n);
    std::uint64_t spent = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Sublattice sub{f2, w};
        const QuadLattice lw = sub.lattice();
        FormEvaluator f(lw);
        std::vector<long> found;
        Rat scale;
        const Rat& a = d1.entries[i];
        search_vectors(lw.rank(), height, budget - spent, [&](const std::vector<long>& z) {
            ++spent;
            const Int q = f.qvalue(z);
            if (q == 0)
                return false;
            auto s = rational_sqrt(Rat(q) / a);
            if (!s)
                return false;
            found = z;
            scale = *s;
            return true;
        });
        if (found.empty())
            fail(ErrorCode::SearchExhausted,
                 "no representation of " + a.get_str() + " within height " + std::to_string(height));
        IntVec image = in_ambient(w, to_int_vec(found));
        for (std::size_t j = 0; j < n; ++j)
            y(j, i) = Rat(image[j]) / scale;
        if (i + 1 == n)
            break;
        w = complement_in_span(f2, w, image);
    }
    return y * inverse(d1.basis);
}

// Orthogonal bases x_i of f1 and y_i of f2 with q1(x_i) = q2(y_i), one
// vector at a time inside the current complements; T = Y X^-1.
inline RatMatrix isometry_by_short_vectors(const QuadLattice& f1, const QuadLattice& f2, long height,
                                           std::uint64_t budget)
{
    const std::size_t n = f1.rank();

    std::vector<IntVec> w1, w2;
    for (std::size_t i = 0; i < n; ++i) {
        IntVec e(n, 0);
        e[i] = 1;
        w1.push_back(e);
        w2.push_back(e);
    }
    RatMatrix x(n, n), y(n, n);
    std::size_t col = 0;
    auto put = [&](const RatVec& xs, const RatVec& ys) {
        for (std::size_t j = 0; j < n; ++j) {
            x(j, col) = xs[j];
            y(j, col) = ys[j];
        }
        ++col;
    };
    auto as_rat = [](const IntVec& v) { return RatVec(v.begin(), v.end()); };
    auto scaled_to_int = [](const RatVec& v) {
        Int den = 1;
        for (const auto& c : v)
            den = lcm(den, Int(c.get_den()));
        IntVec out;
        for (const auto& c : v)
            out.push_back(Int(c * Rat(den)));
        return out;
    };

    std::uint64_t spent = 0;
    while (col < n) {
        const VectorPool p1 = vector_pool(f1, w1, height, budget, spent);
        const VectorPool p2 = vector_pool(f2, w2, height, budget, spent);

        // Both sides isotropic: map one hyperbolic plane onto the other.
        if (p1.isotropic && p2.isotropic) {
            const HyperbolicPair h1 = hyperbolic_pair(f1, w1, *p1.isotropic);
            const HyperbolicPair h2 = hyperbolic_pair(f2, w2, *p2.isotropic);
            RatVec z2 = as_rat(h2.z);
            for (auto& c : z2)
                c *= Rat(h1.b) / Rat(h2.b);
            put(as_rat(h1.z), z2);
            put(h1.isotropic_partner(), h2.isotropic_partner());
            if (col == n)
                break;
            w1 = lll_reduce(complement_in_span(f1, w1, std::vector<IntVec>{h1.z, h1.u}));
            w2 = lll_reduce(complement_in_span(f2, w2, std::vector<IntVec>{h2.z, h2.u}));
            continue;
        }

        std::optional<RatVec> image;
        IntVec source;
        std::map<Int, std::vector<std::size_t>> by_key;
        for (std::size_t k = 0; k < p2.values.size(); ++k)
            by_key[square_class_key(p2.values[k].first)].push_back(k);
        for (const auto& [q, v] : p1.values) {
            auto it = by_key.find(square_class_key(q));
            if (it == by_key.end())
                continue;
            for (std::size_t k : it->second) {
                auto r = rational_sqrt(Rat(p2.values[k].first) / Rat(q));
                if (!r)
                    continue;
                RatVec img;
                for (const auto& c : p2.values[k].second)
                    img.push_back(Rat(c) / *r);
                image = img;
                source = v;
                break;
            }
            if (image)
                break;
        }
        if (!image && p2.isotropic && !p1.values.empty()) {
            source = p1.values.front().second;
            image = through_isotropic(w2, p2.span, *p2.isotropic, Rat(p1.values.front().first));
        }
        std::vector<Int> tried;
        for (std::size_t c = 0; !image && c < p1.values.size() && tried.size() < 8; ++c) {
            if (std::find(tried.begin(), tried.end(), p1.values[c].first) != tried.end())
                continue;
            tried.push_back(p1.values[c].first);
            image = represent_by_descent(f2, w2, Rat(p1.values[c].first));
            source = p1.values[c].second;
        }
        if (!image)
            fail(ErrorCode::SearchExhausted, "no matching values within height " + std::to_string(height));
        put(as_rat(source), *image);
        if (col == n)
            break;
        w1 = lll_reduce(complement_in_span(f1, w1, source));
        w2 = lll_reduce(complement_in_span(f2, w2, scaled_to_int(*image)));
    }
    return y * inverse(x);
}

} // namespace detail

// T with T^t G2 T = G1; columns are the images of f1's basis in f2's coordinates.
inline RatMatrix explicit_rational_isometry(const QuadLattice& f1, const QuadLattice& f2,
                                            long height = kIsometrySearchHeight,
                                            std::uint64_t budget = kIsometrySearchBudget)
{
    if (f2.rank() != f1.rank())
        fail(ErrorCode::RankMismatch, "forms have different ranks");
    if (!rationally_equivalent(f1, f2))
        fail(ErrorCode::PreconditionViolation, "forms are not rationally equivalent");
    RatMatrix t;
    try {
        t = detail::isometry_from_diagonal(f1, f2, height, budget);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SearchExhausted && e.code() != ErrorCode::BudgetExceeded)
            throw;
        t = detail::isometry_by_short_vectors(f1, f2, height, budget);
    }
    if (t.transpose() * to_rational(f2.gram()) * t != to_rational(f1.gram()))
        fail(ErrorCode::InternalInconsistency, "assembled isometry fails the congruence check");
    return t;
}

// |H / (H ∩ L)| for H embedded in Q^n by the columns of e.
inline Int embedding_index(const RatMatrix& e)
{
    auto [den, m] = clear_denominators(e);
    SmithForm snf = smith_normal_form(m);
    if (snf.rank != e.cols())
        fail(ErrorCode::BadInput, "embedding is not injective");
    Int d = 1;
    for (const auto& s : snf.invariant_factors())
        d *= den / gcd(den, s);
    return d;
}

// ---------------------------------------------------------------------------
// Gluing.

inline QuadLattice build_scaled_lattice(const Int& p, const Signature& s)
{
    if (!is_prime(p))
        fail(ErrorCode::InvalidPrime, p.get_str() + " is not prime");
    std::vector<Int> entries;
    for (std::size_t i = 0; i < s.pos; ++i)
        entries.push_back(p);
    for (std::size_t i = 0; i < s.neg; ++i)
        entries.push_back(-p);
    QuadLattice l = QuadLattice::diagonal(entries);
    l.set_label(p.get_str() + "*I(" + std::to_string(s.pos) + "," + std::to_string(s.neg) + ")");
    return l;
}

inline QuadLattice standard_lattice(const Signature& s)
{
    std::vector<Int> entries(s.pos, Int(1));
    entries.insert(entries.end(), s.neg, Int(-1));
    QuadLattice l = QuadLattice::diagonal(entries);
    l.set_label("I(" + std::to_string(s.pos) + "," + std::to_string(s.neg) + ")");
    return l;
}

struct GlueCorrespondence {
    std::size_t lambda_index = 0;
    std::size_t prime_index = 0;
    Int prime;
    Int unit; // lift with q(glue vector) even
};

struct GlueData {
    QuadLattice lambda;
    QuadLattice lambda_prime;
    QuadLattice overlattice;
    IntMatrix lambda_embedding; // columns in overlattice coordinates
    IntMatrix prime_embedding;
    std::vector<GlueCorrespondence> anti_isometry;
    std::vector<RatVec> glue_generators; // in lambda ⊕ lambda' coordinates
};

namespace detail {

enum class PairKind { Opposite, SameSign };

inline Int mod_inverse(const Int& a, const Int& p)
{
    Int r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t()) == 0)
        fail(ErrorCode::InternalInconsistency, "no inverse modulo " + p.get_str());
    return r;
}

inline void verify_glue(const GlueData& g, const Signature& target)
{
    auto bad = [](const std::string& why) { fail(ErrorCode::InternalInconsistency, "gluing check failed: " + why); };
    const IntMatrix& G = g.overlattice.gram();
    if (abs(g.overlattice.determinant()) != 1)
        bad("overlattice is not unimodular");
    if (g.overlattice.even())
        bad("overlattice is even");
    if (signature(g.overlattice) != target)
        bad("overlattice signature");
    if (g.lambda_embedding.transpose() * G * g.lambda_embedding != g.lambda.gram())
        bad("lambda embedding is not isometric");
    if (g.prime_embedding.transpose() * G * g.prime_embedding != g.lambda_prime.gram())
        bad("complement embedding is not isometric");
    if (!(g.lambda_embedding.transpose() * G * g.prime_embedding).is_zero())
        bad("factors are not orthogonal");
    for (const auto& f : smith_normal_form(g.lambda_embedding).invariant_factors())
        if (f != 1)
            bad("lambda is not primitive");
    const Sublattice lam{g.overlattice, [&] {
                             std::vector<LatticeVector> v;
                             for (std::size_t j = 0; j < g.lambda_embedding.cols(); ++j)
                                 v.push_back(g.lambda_embedding.column(j));
                             return v;
                         }()};
    std::vector<LatticeVector> pv;
    for (std::size_t j = 0; j < g.prime_embedding.cols(); ++j)
        pv.push_back(g.prime_embedding.column(j));
    if (!same_lattice(orthogonal_complement(lam), Sublattice{g.overlattice, pv}))
        bad("complement of lambda differs from lambda'");
    // The glue vectors with both factors generate the whole overlattice.
    const std::size_t m = g.lambda.rank(), mp = g.lambda_prime.rank(), n = g.overlattice.rank();
    const QuadLattice sum = direct_sum(g.lambda, g.lambda_prime);
    std::vector<IntVec> gens;
    for (std::size_t j = 0; j < m; ++j)
        gens.push_back(g.lambda_embedding.column(j));
    for (std::size_t j = 0; j < mp; ++j)
        gens.push_back(g.prime_embedding.column(j));
    for (const auto& x : g.glue_generators) {
        const Rat norm = rational_pairing(to_rational(sum.gram()), x, x);
        if (norm.get_den() != 1 || mpz_odd_p(norm.get_num_mpz_t()))
            bad("glue vector is not isotropic in Q/2Z");
        RatVec img(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j)
                img[i] += x[j] * Rat(g.lambda_embedding(i, j));
            for (std::size_t j = 0; j < mp; ++j)
                img[i] += x[m + j] * Rat(g.prime_embedding(i, j));
        }
        IntVec iv(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (img[i].get_den() != 1)
                bad("glue vector is not integral in the overlattice");
            iv[i] = img[i].get_num();
        }
        gens.push_back(iv);
    }
    SmithForm snf = smith_normal_form(IntMatrix::from_columns(gens, n));
    if (snf.rank != n)
        bad("generators do not span");
    for (const auto& f : snf.invariant_factors())
        if (f != 1)
            bad("generators span a proper sublattice");
}

} // namespace detail

// Primitive embedding of a diagonal lattice with entries ±1 and ±(odd prime)
// into the odd unimodular lattice of the target signature, realized in its
// standard coordinates.
inline GlueData nikulin_glue(const QuadLattice& lambda, const Signature& target)
{
    const std::size_t m = lambda.rank(), n = target.pos + target.neg;
    const IntMatrix& g = lambda.gram();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j && g(i, j) != 0)
                fail(ErrorCode::UnsupportedLattice, "only diagonal lattices are glued");
    std::vector<Int> primes(m);
    std::vector<int> signs(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Int a = abs(g(i, i));
        if (a == 0)
            fail(ErrorCode::DegenerateLattice, "lattice is degenerate");
        signs[i] = g(i, i) > 0 ? 1 : -1;
        if (mpz_even_p(a.get_mpz_t()))
            fail(ErrorCode::PreconditionViolation, "discriminant group has 2-torsion");
        if (a != 1 && !is_prime(a))
            fail(ErrorCode::UnsupportedLattice, "diagonal entries must be ±1 or ± an odd prime");
        primes[i] = a;
    }
    if (target.pos == 0 || target.neg == 0)
        fail(ErrorCode::PreconditionViolation, "target must be indefinite");
    if (2 * m >= n)
        fail(ErrorCode::PreconditionViolation, "need 2 rank(lambda) < rank of the target");
    const Signature ls = signature(lambda);
    if (ls.pos > target.pos || ls.neg > target.neg)
        fail(ErrorCode::PreconditionViolation, "lambda does not fit into the target signature");
    const std::size_t pos_prime = target.pos - ls.pos, neg_prime = target.neg - ls.neg;

    // Partner signs: opposite by default; same sign needs -1 to be a square mod p.
    std::vector<detail::PairKind> kind(m, detail::PairKind::Opposite);
    auto partner_sign = [&](std::size_t i) { return kind[i] == detail::PairKind::Opposite ? -signs[i] : signs[i]; };
    auto count_partner = [&](int sgn) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (primes[i] != 1 && partner_sign(i) == sgn)
                ++c;
        return c;
    };
    for (int sgn : {1, -1}) {
        const std::size_t cap = sgn > 0 ? pos_prime : neg_prime;
        for (std::size_t i = 0; i < m && count_partner(sgn) > cap; ++i) {
            if (primes[i] == 1 || partner_sign(i) != sgn)
                continue;
            if (mpz_fdiv_ui(primes[i].get_mpz_t(), 4) != 1)
                continue;
            kind[i] = detail::PairKind::SameSign;
        }
        if (count_partner(sgn) > cap)
            fail(ErrorCode::AntiIsometryNotFound,
                 "discriminant form has no anti-isometric partner of the required signature");
    }

    std::deque<std::size_t> pos_pool, neg_pool;
    for (std::size_t i = 0; i < target.pos; ++i)
        pos_pool.push_back(i);
    for (std::size_t i = 0; i < target.neg; ++i)
        neg_pool.push_back(target.pos + i);
    auto take_front = [](std::deque<std::size_t>& d) {
        std::size_t c = d.front();
        d.pop_front();
        return c;
    };
    auto take_back = [](std::deque<std::size_t>& d) {
        std::size_t c = d.back();
        d.pop_back();
        return c;
    };

    GlueData out;
    out.lambda = lambda;
    out.overlattice = standard_lattice(target);
    std::vector<IntVec> lam_cols, prime_cols;
    std::vector<Int> prime_entries;
    for (std::size_t i = 0; i < m; ++i) {
        IntVec x(n, 0);
        if (primes[i] == 1) {
            x[take_front(signs[i] > 0 ? pos_pool : neg_pool)] = 1;
            lam_cols.push_back(x);
            continue;
        }
        const Int& p = primes[i];
        IntVec y(n, 0);
        Int unit;
        if (kind[i] == detail::PairKind::Opposite) {
            const std::size_t cp = take_front(pos_pool), cn = take_front(neg_pool);
            const Int big = (p + 1) / 2, small = (p - 1) / 2;
            // q((big, small)) = p and q((small, big)) = -p on a (+,-) block.
            if (signs[i] > 0) {
                x[cp] = big;
                x[cn] = small;
                y[cp] = small;
                y[cn] = big;
            } else {
                x[cp] = small;
                x[cn] = big;
                y[cp] = big;
                y[cn] = small;
            }
            unit = 1; // x + y = (p, p)
        } else {
            std::deque<std::size_t>& pool = signs[i] > 0 ? pos_pool : neg_pool;
            const std::size_t c1 = take_front(pool), c2 = take_back(pool);
            Int a = 1;
            while (!is_square(p - a * a))
                ++a;
            const Int b = isqrt(p - a * a);
            x[c1] = a;
            x[c2] = b;
            y[c1] = -b;
            y[c2] = a;
            unit = mod_positive(a * detail::mod_inverse(b, p), p);
        }
        // q((x + u y)/p) = sign (1 + u^2)/p up to the lift; pick the even lift.
        const Int norm = (1 + unit * unit) / p;
        if (mpz_odd_p(norm.get_mpz_t()))
            unit += p;
        lam_cols.push_back(x);
        out.anti_isometry.push_back({i, prime_cols.size(), p, unit});
        prime_cols.push_back(y);
        prime_entries.push_back(Int(partner_sign(i)) * p);
    }
    const std::size_t prime_glued = prime_cols.size();
    for (std::size_t c : pos_pool) {
        IntVec e(n, 0);
        e[c] = 1;
        prime_cols.push_back(e);
        prime_entries.emplace_back(1);
    }
    for (std::size_t c : neg_pool) {
        IntVec e(n, 0);
        e[c] = 1;
        prime_cols.push_back(e);
        prime_entries.emplace_back(-1);
    }
    out.lambda_prime = QuadLattice::diagonal(prime_entries);
    out.lambda_embedding = IntMatrix::from_columns(lam_cols, n);
    out.prime_embedding = IntMatrix::from_columns(prime_cols, n);
    const std::size_t mp = prime_cols.size();
    for (const auto& c : out.anti_isometry) {
        RatVec v(m + mp, 0);
        v[c.lambda_index] = Rat(1) / Rat(c.prime);
        v[m + c.prime_index] = Rat(c.unit) / Rat(c.prime);
        out.glue_generators.push_back(v);
    }
    (void)prime_glued;
    detail::verify_glue(out, target);
    return out;
}

// ---------------------------------------------------------------------------
// Embedding pipeline.

struct EmbedOptions {
    ExtensionMethod extension_method = ExtensionMethod::Auto;
    long isometry_height = kIsometrySearchHeight;
    std::uint64_t isometry_budget = kIsometrySearchBudget;
    long oracle_height = 100;
    std::uint64_t oracle_budget = kDefaultBudget;
};

struct EmbeddingReport {
    QuadLattice h;
    Int bound;
    ExtensionResult extension;
    bool explicit_embedding = false;
    std::string note;
    RatMatrix embedding;  // (rank H + 3) x rank H, columns are images of H's basis
    Int index_d = 0;
    Int prime_p = 0;
    Int d2n = 0;
    std::optional<GlueData> glue;
    std::vector<IntVec> lambda_in_l; // in lambda coordinates
    std::optional<Sublattice> lambda_in_h;
    Int saturation_index = 0;
    Signature lambda_in_h_signature;
    OracleSummary oracle;
};

namespace detail {

inline Int prime_one_mod_four_above(const Int& x)
{
    Int p = x;
    do
        p = next_prime_after(p);
    while (mpz_fdiv_ui(p.get_mpz_t(), 4) != 1);
    return p;
}

// Value oracle with the height lowered until the enumeration fits the budget.
inline OracleSummary bounded_oracle(const QuadLattice& l, long height, std::uint64_t budget, std::int64_t modulus)
{
    const auto blocks = orthogonal_blocks(l.gram());
    for (long h = height; h >= 1; h /= 2) {
        double box = 0;
        for (const auto& b : blocks)
            box += box_size(b.size(), h);
        if (box > static_cast<double>(budget))
            continue;
        try {
            ValueTable t = enumerate_values(l, h, budget);
            OracleSummary o;
            o.height = h;
            o.min_nonzero_abs = t.min_nonzero_abs();
            o.all_divisible = modulus > 0 && t.all_divisible_by(modulus);
            o.ran = true;
            return o;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BudgetExceeded && e.code() != ErrorCode::ArithmeticOverflow)
                throw;
        }
    }
    return {};
}

} // namespace detail

inline EmbeddingReport embed_pipeline(const QuadLattice& h, const Int& bound, const EmbedOptions& opt = {})
{
    if (h.degenerate())
        fail(ErrorCode::DegenerateLattice, "lattice is degenerate");
    const Signature s = signature(h);
    const std::size_t b2 = h.rank();
    if (s.pos != 3 || b2 < 6)
        fail(ErrorCode::PreconditionViolation, "need signature (3, b2 - 3) with b2 >= 6");
    if (bound < 1)
        fail(ErrorCode::PreconditionViolation, "bound must be at least 1");

    EmbeddingReport r;
    r.h = h;
    r.bound = bound;
    const Signature target{3, b2};
    r.extension = extend_to_standard(h, target, opt.extension_method);

    // Explicit embedding H -> standard coordinates, through H ⊕ <b0,b1,b2>.
    std::vector<Int> extra{r.extension.b0, r.extension.b1, r.extension.b2};
    const QuadLattice augmented = direct_sum(h, QuadLattice::diagonal(extra));
    const QuadLattice standard = standard_lattice(target);
    RatMatrix t;
    try {
        t = explicit_rational_isometry(augmented, standard, opt.isometry_height, opt.isometry_budget);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SearchExhausted && e.code() != ErrorCode::BudgetExceeded)
            throw;
        r.explicit_embedding = false;
        r.note = std::string("explicit embedding unavailable (") + e.what() +
                 "); existence rests on the invariant certificate";
        return r;
    }
    r.explicit_embedding = true;
    const std::size_t n = b2, nl = b2 + 3;
    r.embedding = t.block(0, 0, nl, n);
    r.index_d = embedding_index(r.embedding);
    r.d2n = r.index_d * r.index_d * bound;
    r.prime_p = detail::prime_one_mod_four_above(r.d2n);

    const QuadLattice lambda = build_scaled_lattice(r.prime_p, {1, b2 / 2});
    r.glue = nikulin_glue(lambda, target);
    const IntMatrix& k = r.glue->lambda_embedding;

    // Λ ∩ H_Q in Λ coordinates: kernel of (annihilator of E(H)) * K.
    auto [den, e_int] = clear_denominators(r.embedding);
    std::vector<IntVec> ann = integer_kernel(e_int.transpose());
    IntMatrix a = IntMatrix::from_rows(ann);
    r.lambda_in_l = hermite_basis(integer_kernel(a * k));
    if (r.lambda_in_l.empty())
        fail(ErrorCode::InternalInconsistency, "lambda meets H trivially");

    // Preimages in H coordinates: column j of x is the vector of H mapping to K c_j.
    const RatMatrix e = r.embedding;
    const std::size_t mc = r.lambda_in_l.size();
    const RatMatrix kc = to_rational(k * IntMatrix::from_columns(r.lambda_in_l, k.cols()));
    const RatMatrix x = inverse(e.transpose() * e) * e.transpose() * kc;
    if (e * x != kc)
        fail(ErrorCode::InternalInconsistency, "lambda vector outside the image of H");

    // H ∩ Λ_Q is {x y : x y integral} in these coordinates. With U X V = D for
    // X = delta x, that is V diag(delta / d_i) Z^mc; a Hermite basis of it keeps
    // the coefficients in [0, 1].
    auto [delta, xi] = clear_denominators(x);
    const SmithForm snf = smith_normal_form(xi);
    if (snf.rank != mc)
        fail(ErrorCode::InternalInconsistency, "intersection does not embed into H");
    RatMatrix over = to_rational(snf.v);
    for (std::size_t i = 0; i < mc; ++i)
        for (std::size_t l = 0; l < mc; ++l)
            over(l, i) *= Rat(delta) / Rat(snf.d(i, i));
    auto [over_den, over_int] = clear_denominators(over);
    std::vector<IntVec> cols;
    for (std::size_t i = 0; i < mc; ++i)
        cols.push_back(over_int.column(i));
    std::vector<IntVec> basis;
    for (const auto& y : hermite_basis(cols)) {
        RatVec yr(mc);
        for (std::size_t l = 0; l < mc; ++l)
            yr[l] = Rat(y[l]) / Rat(over_den);
        const RatVec v = x * yr;
        IntVec vi(n);
        for (std::size_t l = 0; l < n; ++l) {
            if (v[l].get_den() != 1)
                fail(ErrorCode::InternalInconsistency, "saturation basis is not integral");
            vi[l] = v[l].get_num();
        }
        basis.push_back(vi);
    }
    const Sublattice sat = make_sublattice(h, basis);
    if (!is_primitive(sat))
        fail(ErrorCode::InternalInconsistency, "intersection with H is not primitive");
    r.lambda_in_h = sat;
    r.saturation_index = embedding_index(e * to_rational(sat.basis_matrix()));
    if (r.saturation_index > r.index_d)
        fail(ErrorCode::InternalInconsistency, "saturation index exceeds d");
    r.lambda_in_h_signature = signature(sat.lattice());
    if (r.lambda_in_h_signature != Signature{1, b2 / 2 - 3})
        fail(ErrorCode::InternalInconsistency, "intersection with H has unexpected signature");

    r.oracle = detail::bounded_oracle(sat.lattice(), opt.oracle_height, opt.oracle_budget, 0);
    if (r.oracle.ran && r.oracle.min_nonzero_abs && *r.oracle.min_nonzero_abs < bound)
        fail(ErrorCode::InternalInconsistency, "enumeration found a value below the bound");
    return r;
}

} // namespace qforge
