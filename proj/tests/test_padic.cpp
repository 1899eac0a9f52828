#include <numeric>
#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qforge/padic.hpp"

using namespace qforge;

namespace {

const Place kInf = Place::infinity();
Place P(long p) { return Place::finite(Int(p)); }

// Removes p^2 factors so the fixed-depth residue oracle stays exact.
long drop_square_p(long a, long p)
{
    while (a % (p * p) == 0)
        a /= p * p;
    return a;
}

RatVec rv(std::initializer_list<long> xs)
{
    RatVec v;
    for (long x : xs)
        v.emplace_back(x);
    return v;
}

Rat random_rational(std::mt19937& rng, long bound)
{
    std::uniform_int_distribution<long> d(1, bound);
    std::uniform_int_distribution<int> s(0, 1);
    Rat r(Int(d(rng)) * (s(rng) ? 1 : -1), Int(d(rng)));
    r.canonicalize();
    return r;
}

int product_over_support(const Rat& a, const Rat& b)
{
    int prod = 1;
    for (const auto& place : symbol_support({a, b}))
        prod *= hilbert_symbol(a, b, place);
    return prod;
}

} // namespace

TEST(Legendre, Examples)
{
    EXPECT_EQ(legendre(Int(1), Int(5)), 1);
    EXPECT_EQ(legendre(Int(2), Int(5)), -1);
    EXPECT_EQ(legendre(Int(10), Int(5)), 0);
    EXPECT_THROW(legendre(Int(1), Int(9)), Error);
    EXPECT_THROW(legendre(Int(1), Int(2)), Error);
}

TEST(Hilbert, Examples)
{
    for (long p : {2, 3, 5, 7})
        for (long b : {-7, -1, 2, 3, 10})
            EXPECT_EQ(hilbert_symbol(Rat(1), Rat(b), P(p)), 1);
    EXPECT_EQ(hilbert_symbol(Rat(-1), Rat(-1), kInf), -1);
    EXPECT_EQ(hilbert_symbol(Rat(-1), Rat(-1), P(2)), -1);
    EXPECT_EQ(hilbert_symbol(Rat(2), Rat(2), P(2)), 1);
    EXPECT_EQ(hilbert_symbol(Rat(2), Rat(-1), P(2)), 1);
    EXPECT_THROW(hilbert_symbol(Rat(0), Rat(1), P(3)), Error);
}

TEST(Hilbert, ModEightOracleForSmallCases)
{
    oracle::LocalSolvability two(2, 5);
    EXPECT_FALSE(two.solvable(-1, -1));
    EXPECT_TRUE(two.solvable(2, 2));
}

TEST(Hilbert, AgreesWithLocalSolvability)
{
    for (long p : {2, 3, 5, 7}) {
        oracle::LocalSolvability o(p, p == 2 ? 5 : 3);
        for (long a = -20; a <= 20; ++a) {
            if (a == 0)
                continue;
            auto table = o.table(drop_square_p(a, p));
            for (long b = -20; b <= 20; ++b) {
                if (b == 0)
                    continue;
                const int expect = table.solvable(drop_square_p(b, p)) ? 1 : -1;
                ASSERT_EQ(hilbert_symbol(Rat(a), Rat(b), P(p)), expect) << "a=" << a << " b=" << b << " p=" << p;
            }
        }
    }
}

TEST(Hilbert, AlgebraicIdentities)
{
    std::mt19937 rng(31);
    for (int t = 0; t < 200; ++t) {
        Rat a = random_rational(rng, 300), b = random_rational(rng, 300), c = random_rational(rng, 300);
        for (const auto& place : symbol_support({a, b, c})) {
            EXPECT_EQ(hilbert_symbol(a, b, place), hilbert_symbol(b, a, place));
            EXPECT_EQ(hilbert_symbol(a * c, b, place), hilbert_symbol(a, b, place) * hilbert_symbol(c, b, place));
            EXPECT_EQ(hilbert_symbol(a, -a, place), 1);
            if (a != 1)
                EXPECT_EQ(hilbert_symbol(a, 1 - a, place), 1);
        }
    }
}

TEST(Hilbert, ProductFormula)
{
    std::mt19937 rng(17);
    for (int t = 0; t < 300; ++t)
        EXPECT_EQ(product_over_support(random_rational(rng, 10000), random_rational(rng, 10000)), 1);
}

TEST(LocalSquare, Basics)
{
    EXPECT_TRUE(is_local_square(Rat(17), P(2)));
    EXPECT_FALSE(is_local_square(Rat(-1), P(2)));
    EXPECT_TRUE(is_local_square(Rat(-1), P(5)));
    EXPECT_FALSE(is_local_square(Rat(-1), P(3)));
    EXPECT_FALSE(is_local_square(Rat(3), P(3)));
    EXPECT_TRUE(is_local_square(Rat(4, 9), P(3)));
    EXPECT_FALSE(is_local_square(Rat(-2), kInf));
}

TEST(Invariants, DiagonalExamples)
{
    InvariantTriple t11 = invariant_triple(rv({1, 1}));
    EXPECT_EQ(t11.signature, (Signature{2, 0}));
    EXPECT_EQ(t11.disc_class, 1);
    EXPECT_TRUE(t11.epsilons.empty());

    InvariantTriple t25 = invariant_triple(rv({2, 5}));
    EXPECT_EQ(t25.epsilon(P(5)), -1);
    // Forced by the product formula.
    EXPECT_EQ(t25.epsilon(P(2)), -1);
    EXPECT_EQ(t25.epsilons.size(), 2u);

    EXPECT_EQ(invariant_triple(rv({1, 1})), invariant_triple(rv({2, 2})));
}

TEST(Invariants, HyperbolicPlaneAndE8)
{
    QuadLattice u(IntMatrix{{0, 1}, {1, 0}});
    Diagonalization d = diagonalize(u);
    InvariantTriple t = invariant_triple(d.entries);
    EXPECT_EQ(t.signature, (Signature{1, 1}));
    EXPECT_EQ(t.disc_class, -1);
    EXPECT_TRUE(t.epsilons.empty());

    IntMatrix e8{{2, 0, -1, 0, 0, 0, 0, 0},  {0, 2, 0, -1, 0, 0, 0, 0}, {-1, 0, 2, -1, 0, 0, 0, 0},
                 {0, -1, -1, 2, -1, 0, 0, 0}, {0, 0, 0, -1, 2, -1, 0, 0}, {0, 0, 0, 0, -1, 2, -1, 0},
                 {0, 0, 0, 0, 0, -1, 2, -1}, {0, 0, 0, 0, 0, 0, -1, 2}};
    Diagonalization de = diagonalize(to_rational(e8));
    RatMatrix check = de.basis.transpose() * to_rational(e8) * de.basis;
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_GT(de.entries[i], 0);
        EXPECT_EQ(check(i, i), de.entries[i]);
    }
    EXPECT_EQ(invariant_triple(de.entries).disc_class, 1);
    // Positive definite unimodular of rank 8 is Q-equivalent to the sum of 8 squares.
    EXPECT_EQ(invariant_triple(de.entries), standard_invariants({8, 0}));
}

TEST(Invariants, IndependentOfDiagonalizationOrder)
{
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> d(-9, 9);
    int done = 0;
    while (done < 40) {
        const std::size_t n = 2 + done % 5;
        IntMatrix g(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                g(i, j) = g(j, i) = d(rng);
        if (determinant(g) == 0)
            continue;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        InvariantTriple base = invariant_triple(to_rational(g), order);
        for (int k = 0; k < 2; ++k) {
            std::shuffle(order.begin(), order.end(), rng);
            EXPECT_EQ(invariant_triple(to_rational(g), order), base);
        }
        ++done;
    }
}

TEST(Equivalence, Examples)
{
    QuadLattice f(IntMatrix{{2, 1}, {1, -3}});
    EXPECT_TRUE(rationally_equivalent(f, f));
    EXPECT_TRUE(rationally_equivalent(QuadLattice::diagonal({Int(1), Int(1)}), QuadLattice::diagonal({Int(2), Int(2)})));
    EXPECT_FALSE(rationally_equivalent(QuadLattice::diagonal({Int(1), Int(1)}), QuadLattice::diagonal({Int(1), Int(-1)})));
    EXPECT_THROW(rationally_equivalent(QuadLattice::diagonal({Int(1)}), QuadLattice::diagonal({Int(1), Int(1)})),
                 Error);
}

TEST(PrescribedHilbert, Examples)
{
    EXPECT_EQ(solve_prescribed_hilbert(Rat(7), {}), Rat(1));
    EXPECT_EQ(solve_prescribed_hilbert(Rat(-1), {{P(2), -1}, {kInf, -1}}), Rat(-1));

    SignMap t{{P(5), -1}, {P(2), -1}};
    Rat y = solve_prescribed_hilbert(Rat(5), t);
    EXPECT_EQ(hilbert_symbol(Rat(5), y, P(5)), -1);
    EXPECT_EQ(hilbert_symbol(Rat(5), y, P(2)), -1);
    EXPECT_EQ(hilbert_symbol(Rat(5), y, kInf), 1);
    for (const auto& place : symbol_support({Rat(5), y}))
        if (!(place == P(5)) && !(place == P(2)))
            EXPECT_EQ(hilbert_symbol(Rat(5), y, place), 1);
}

TEST(PrescribedHilbert, RejectsInfeasible)
{
    // Odd number of -1.
    try {
        solve_prescribed_hilbert(Rat(3), {{P(3), -1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Inconsistent);
    }
    // 4 is a square everywhere.
    try {
        solve_prescribed_hilbert(Rat(4), {{P(3), -1}, {P(5), -1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Inconsistent);
    }
}

TEST(PrescribedHilbert, RandomFeasiblePrescriptionsAreMet)
{
    // Build prescriptions as the symbol vectors of known pairs, then solve.
    std::mt19937 rng(8);
    for (int t = 0; t < 60; ++t) {
        Rat x = random_rational(rng, 200), z = random_rational(rng, 200);
        SignMap targets;
        for (const auto& place : symbol_support({x, z}))
            if (hilbert_symbol(x, z, place) == -1)
                targets[place] = -1;
        Rat y = solve_prescribed_hilbert(x, targets);
        for (const auto& place : symbol_support({x, y, z}))
            EXPECT_EQ(hilbert_symbol(x, y, place), hilbert_symbol(x, z, place));
    }
}

TEST(PrescribedPair, Examples)
{
    PrescribedPair a = choose_pair_prescribed({}, 1, 1);
    EXPECT_EQ(a.x, 1);
    EXPECT_EQ(a.y, 1);

    PrescribedPair b = choose_pair_prescribed({{P(2), -1}, {kInf, -1}}, -1, -1);
    EXPECT_EQ(b.x, -1);
    EXPECT_EQ(b.y, -1);

    SignMap t{{P(3), -1}, {kInf, -1}};
    PrescribedPair c = choose_pair_prescribed(t, -1, -1);
    EXPECT_EQ(c.x, -1);
    EXPECT_LT(c.y, 0);
    for (const auto& place : symbol_support({c.x, c.y, Rat(3)})) {
        auto it = t.find(place);
        EXPECT_EQ(hilbert_symbol(c.x, c.y, place), it == t.end() ? 1 : it->second) << place.str();
    }
    EXPECT_THROW(choose_pair_prescribed({{P(3), -1}, {kInf, -1}}, 1, -1), Error);
}
