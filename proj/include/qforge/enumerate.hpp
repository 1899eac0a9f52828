#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lattice.hpp"

namespace qforge {

inline constexpr std::uint64_t kDefaultBudget = 100'000'000;

// Rank of a digit in the search order 0, 1, -1, 2, -2, ...
inline long digit_rank(long x) { return x > 0 ? 2 * x - 1 : -2 * x; }
inline long digit_at_rank(long r) { return (r % 2 == 1) ? (r + 1) / 2 : -(r / 2); }

namespace detail {

template <typename Visit>
bool weight_recurse(std::vector<long>& x, std::size_t pos, long remaining, long height, Visit& visit)
{
    // Coordinates above pos are fixed; the last coordinate is the most
    // significant one.
    if (pos == 0) {
        if (remaining > height)
            return false;
        if (remaining == 0) {
            x[0] = 0;
            return visit(x);
        }
        x[0] = remaining;
        if (visit(x))
            return true;
        x[0] = -remaining;
        return visit(x);
    }
    const long cap = std::min(remaining, height);
    for (long r = 0; r <= 2 * cap; ++r) {
        const long d = digit_at_rank(r);
        const long left = remaining - std::labs(d);
        if (left > static_cast<long>(pos) * height)
            continue;
        x[pos] = d;
        if (weight_recurse(x, pos - 1, left, height, visit)) {
            return true;
        }
    }
    x[pos] = 0;
    return false;
}

} // namespace detail

// Visits nonzero integer vectors in the order used by every constructive
// search: increasing L1 weight, then colexicographic with digits ranked
// 0, 1, -1, 2, -2, ...; coordinates bounded by `height`. `visit` returns true
// to stop. Returns true iff the visitor stopped the walk; throws
// BudgetExceeded past `budget` visited vectors.
template <typename Visit>
bool search_vectors(std::size_t n, long height, std::uint64_t budget, Visit&& visit)
{
    if (n == 0 || height < 1)
        return false;
    std::vector<long> x(n, 0);
    std::uint64_t visited = 0;
    bool exhausted = false;
    auto counted = [&](const std::vector<long>& v) {
        if (++visited > budget) {
            exhausted = true;
            return true;
        }
        return visit(v);
    };
    const long maxWeight = static_cast<long>(n) * height;
    for (long w = 1; w <= maxWeight; ++w) {
        std::fill(x.begin(), x.end(), 0);
        if (detail::weight_recurse(x, n - 1, w, height, counted)) {
            if (exhausted)
                fail(ErrorCode::BudgetExceeded, "search budget of " + std::to_string(budget) + " vectors exhausted");
            return true;
        }
    }
    return false;
}

inline IntVec to_int_vec(const std::vector<long>& v)
{
    IntVec r;
    r.reserve(v.size());
    for (long x : v)
        r.emplace_back(x);
    return r;
}

// Values q(x) over nonzero x with max |x_i| <= height, one witness each,
// sorted by value. Witnesses are stored flat, `rank` coordinates per value.
struct ValueTable {
    std::size_t rank = 0;
    long height = 0;
    std::uint64_t work = 0;
    std::vector<std::int64_t> values;
    std::vector<std::int64_t> witnesses;

    std::size_t size() const noexcept { return values.size(); }

    std::vector<std::int64_t> witness(std::size_t i) const
    {
        return std::vector<std::int64_t>(witnesses.begin() + i * rank, witnesses.begin() + (i + 1) * rank);
    }

    bool contains(std::int64_t v) const { return std::binary_search(values.begin(), values.end(), v); }

    std::optional<std::int64_t> min_nonzero_abs() const
    {
        std::optional<std::int64_t> best;
        for (auto v : values)
            if (v != 0 && (!best || std::llabs(v) < *best))
                best = std::llabs(v);
        return best;
    }

    std::vector<std::int64_t> small_values(std::int64_t bound) const
    {
        std::vector<std::int64_t> r;
        for (auto v : values)
            if (v != 0 && std::llabs(v) < bound)
                r.push_back(v);
        return r;
    }

    bool all_divisible_by(std::int64_t p) const
    {
        return std::all_of(values.begin(), values.end(), [p](std::int64_t v) { return v % p == 0; });
    }
};

namespace detail {

// Connected components of the graph "i ~ j iff gram(i,j) != 0".
inline std::vector<std::vector<std::size_t>> orthogonal_blocks(const IntMatrix& g)
{
    const std::size_t n = g.rows();
    std::vector<std::size_t> comp(n, n);
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] != n)
            continue;
        std::vector<std::size_t> block{s};
        comp[s] = blocks.size();
        for (std::size_t k = 0; k < block.size(); ++k)
            for (std::size_t j = 0; j < n; ++j)
                if (comp[j] == n && g(block[k], j) != 0) {
                    comp[j] = blocks.size();
                    block.push_back(j);
                }
        std::sort(block.begin(), block.end());
        blocks.push_back(std::move(block));
    }
    return blocks;
}

inline void sort_table(ValueTable& t)
{
    std::vector<std::size_t> order(t.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t.values[a] < t.values[b]; });
    std::vector<std::int64_t> sv;
    std::vector<std::int64_t> sw;
    sv.reserve(t.values.size());
    sw.reserve(t.witnesses.size());
    for (auto k : order) {
        sv.push_back(t.values[k]);
        sw.insert(sw.end(), t.witnesses.begin() + k * t.rank, t.witnesses.begin() + (k + 1) * t.rank);
    }
    t.values = std::move(sv);
    t.witnesses = std::move(sw);
}

// Plain box enumeration; first witness in odometer order (first coordinate
// fastest, digit-rank order) is kept.
inline ValueTable brute_force_values(const std::vector<std::vector<std::int64_t>>& g, long height,
                                     std::uint64_t budget, std::uint64_t& work)
{
    const std::size_t n = g.size();
    ValueTable t{n, height, 0, {}, {}};
    std::unordered_map<std::int64_t, std::size_t> seen;
    std::vector<std::int64_t> x(n, 0);
    std::vector<long> ranks(n, 0);
    const long top = 2 * height;
    for (;;) {
        std::size_t i = 0;
        while (i < n && ranks[i] == top) {
            ranks[i] = 0;
            x[i] = 0;
            ++i;
        }
        if (i == n)
            break;
        ++ranks[i];
        x[i] = digit_at_rank(ranks[i]);
        if (++work > budget)
            fail(ErrorCode::BudgetExceeded, "value enumeration exceeds budget of " + std::to_string(budget));
        std::int64_t q = 0;
        for (std::size_t a = 0; a < n; ++a) {
            if (x[a] == 0)
                continue;
            std::int64_t row = 0;
            for (std::size_t b = 0; b < n; ++b)
                row += g[a][b] * x[b];
            q += x[a] * row;
        }
        if (seen.emplace(q, t.values.size()).second) {
            t.values.push_back(q);
            t.witnesses.insert(t.witnesses.end(), x.begin(), x.end());
        }
    }
    sort_table(t);
    return t;
}

// Values of an orthogonal sum from the values of its summands: nonzero
// vectors of A ⊕ B are (a,0), (0,b) and (a,b) with a, b nonzero.
inline ValueTable combine_orthogonal(const ValueTable& a, const ValueTable& b, std::uint64_t budget,
                                     std::uint64_t& work)
{
    ValueTable t{a.rank + b.rank, std::max(a.height, b.height), 0, {}, {}};
    std::unordered_map<std::int64_t, std::size_t> seen;
    auto add = [&](std::int64_t v, const std::int64_t* wa, const std::int64_t* wb) {
        if (!seen.emplace(v, t.values.size()).second)
            return;
        t.values.push_back(v);
        for (std::size_t i = 0; i < a.rank; ++i)
            t.witnesses.push_back(wa ? wa[i] : 0);
        for (std::size_t i = 0; i < b.rank; ++i)
            t.witnesses.push_back(wb ? wb[i] : 0);
    };
    for (std::size_t i = 0; i < a.size(); ++i)
        add(a.values[i], &a.witnesses[i * a.rank], nullptr);
    for (std::size_t j = 0; j < b.size(); ++j)
        add(b.values[j], nullptr, &b.witnesses[j * b.rank]);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (++work > budget)
                fail(ErrorCode::BudgetExceeded, "value enumeration exceeds budget of " + std::to_string(budget));
            add(a.values[i] + b.values[j], &a.witnesses[i * a.rank], &b.witnesses[j * b.rank]);
        }
    sort_table(t);
    return t;
}

} // namespace detail

// Brute-force oracle for representation claims. Orthogonal blocks of the Gram
// matrix are enumerated separately and merged through value sums; the result
// is the same set of values as the plain box enumeration. Machine integers
// are used throughout, so the caller's lattice must satisfy
// height^2 * sum |g_ij| < 2^62 (ArithmeticOverflow otherwise).
inline ValueTable enumerate_values(const QuadLattice& l, long height, std::uint64_t budget = kDefaultBudget)
{
    if (height < 1)
        fail(ErrorCode::BadInput, "height bound must be at least 1");
    const IntMatrix& g = l.gram();
    Int total = 0;
    for (std::size_t i = 0; i < l.rank(); ++i)
        for (std::size_t j = 0; j < l.rank(); ++j)
            total += abs(g(i, j));
    total *= Int(height) * Int(height);
    if (total >= Int(1L << 62))
        fail(ErrorCode::ArithmeticOverflow, "values would exceed 64-bit range; lower the height bound");

    std::uint64_t work = 0;
    const auto blocks = detail::orthogonal_blocks(g);
    ValueTable acc;
    std::vector<std::size_t> placed;
    bool first = true;
    for (const auto& block : blocks) {
        std::vector<std::vector<std::int64_t>> sub(block.size(), std::vector<std::int64_t>(block.size()));
        for (std::size_t i = 0; i < block.size(); ++i)
            for (std::size_t j = 0; j < block.size(); ++j)
                sub[i][j] = g(block[i], block[j]).get_si();
        ValueTable part = detail::brute_force_values(sub, height, budget, work);
        acc = first ? std::move(part) : detail::combine_orthogonal(acc, part, budget, work);
        first = false;
        placed.insert(placed.end(), block.begin(), block.end());
    }
    // Witness coordinates are in block order; map back to lattice order.
    const std::size_t n = l.rank();
    std::vector<std::int64_t> remapped(acc.witnesses.size());
    for (std::size_t k = 0; k < acc.size(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            remapped[k * n + placed[i]] = acc.witnesses[k * n + i];
    acc.witnesses = std::move(remapped);
    acc.height = height;
    acc.work = work;
    return acc;
}

// Number of box vectors a plain enumeration at this height would visit.
inline double box_size(std::size_t rank, long height)
{
    double s = 1;
    for (std::size_t i = 0; i < rank; ++i)
        s *= static_cast<double>(2 * height + 1);
    return s;
}



// Evaluates q and pairings on small coordinate vectors. Uses 128-bit
// accumulation when the Gram entries fit in 40 bits, exact integers otherwise.
class FormEvaluator {
public:
    explicit FormEvaluator(const QuadLattice& l) : lattice_(l)
    {
        const IntMatrix& g = l.gram();
        const Int limit = Int(1L << 40);
        fast_ = true;
        for (std::size_t i = 0; i < g.rows() && fast_; ++i)
            for (std::size_t j = 0; j < g.cols(); ++j)
                if (abs(g(i, j)) >= limit) {
                    fast_ = false;
                    break;
                }
        if (fast_) {
            small_.assign(g.rows(), std::vector<std::int64_t>(g.cols()));
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j)
                    small_[i][j] = g(i, j).get_si();
        }
    }

    // Requires max |x_i|, |y_i| < 2^20.
    Int pairing(const std::vector<long>& x, const std::vector<long>& y) const
    {
        if (!fast_)
            return qforge::pairing(lattice_, to_int_vec(x), to_int_vec(y));
        __int128 s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0)
                continue;
            __int128 row = 0;
            for (std::size_t j = 0; j < y.size(); ++j)
                if (y[j] != 0)
                    row += static_cast<__int128>(small_[i][j]) * y[j];
            s += row * x[i];
        }
        return from_int128(s);
    }

    Int qvalue(const std::vector<long>& x) const { return pairing(x, x); }

private:
    static Int from_int128(__int128 v)
    {
        const bool neg = v < 0;
        unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
        Int hi = static_cast<unsigned long>(u >> 64);
        Int r = (hi << 64) + Int(static_cast<unsigned long>(u));
        return neg ? Int(-r) : r;
    }

    QuadLattice lattice_;
    bool fast_ = false;
    std::vector<std::vector<std::int64_t>> small_;
};

} // namespace qforge
