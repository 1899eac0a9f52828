#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qforge/isom.hpp"

using namespace qforge;

namespace {

IntVec iv(std::initializer_list<long> xs)
{
    IntVec v;
    for (long x : xs)
        v.emplace_back(x);
    return v;
}

Poly pl(std::initializer_list<long> xs)
{
    Poly p;
    for (long x : xs)
        p.emplace_back(x);
    return p;
}

QuadLattice u_plus_m2()
{
    return QuadLattice(IntMatrix{{0, 1, 0}, {1, 0, 0}, {0, 0, -2}}, "U+<-2>");
}

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InternalInconsistency;
}

// Smallest u > 0 with t^2 - D u^2 = 4, by direct search.
std::pair<long, long> brute_pell(long D, long limit)
{
    for (long u = 1; u <= limit; ++u) {
        const long v = D * u * u + 4;
        long t = static_cast<long>(std::sqrt(static_cast<double>(v)));
        while (t * t > v)
            --t;
        while ((t + 1) * (t + 1) <= v)
            ++t;
        if (t * t == v)
            return {t, u};
    }
    return {0, 0};
}

} // namespace

TEST(Poly, CharPolyAndCyclotomic)
{
    EXPECT_EQ(char_poly(IntMatrix{{3, 4}, {2, 3}}), pl({1, -6, 1}));
    EXPECT_EQ(char_poly(IntMatrix::identity(3)), pl({-1, 3, -3, 1}));
    EXPECT_EQ(cyclotomic(1), pl({-1, 1}));
    EXPECT_EQ(cyclotomic(3), pl({1, 1, 1}));
    EXPECT_EQ(cyclotomic(12), pl({1, 0, -1, 0, 1}));
    EXPECT_TRUE(cyclotomic_test(pl({-1, 1})));
    EXPECT_FALSE(cyclotomic_test(pl({1, -6, 1})));
    EXPECT_TRUE(cyclotomic_test(pl({1, 1, 1})));
    EXPECT_TRUE(cyclotomic_test(poly_mul(cyclotomic(5), poly_mul(cyclotomic(2), cyclotomic(2)))));
    EXPECT_FALSE(cyclotomic_test(pl({-1, -1, 0, 1})));
    EXPECT_EQ(code_of([] { cyclotomic_test(pl({1, 2})); }), ErrorCode::NotMonic);
}

TEST(Poly, CharPolyMatchesDeterminantAtIntegers)
{
    IntMatrix a{{1, 2, 0, -1}, {3, -1, 4, 2}, {0, 5, 2, 1}, {-2, 0, 1, 3}};
    Poly f = char_poly(a);
    for (long x = -3; x <= 3; ++x) {
        IntMatrix m = IntMatrix::identity(4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                m(i, j) = (i == j ? Int(x) : Int(0)) - a(i, j);
        Int v = 0;
        for (std::size_t k = f.size(); k-- > 0;)
            v = v * x + f[k];
        EXPECT_EQ(v, determinant(m));
    }
}

TEST(IsIsometry, Examples)
{
    QuadLattice d = QuadLattice::diagonal(iv({1, -2}));
    EXPECT_TRUE(is_isometry(IntMatrix::identity(2), d));
    EXPECT_TRUE(is_isometry(IntMatrix{{3, 4}, {2, 3}}, d));
    EXPECT_FALSE(is_isometry(IntMatrix{{2, 0}, {0, 1}}, d));
    EXPECT_EQ(code_of([&] { is_isometry(IntMatrix::identity(3), d); }), ErrorCode::DimensionMismatch);
}

TEST(Classify, Examples)
{
    QuadLattice d = QuadLattice::diagonal(iv({1, -2}));
    IsomClass id = classify({IntMatrix::identity(2), d});
    EXPECT_EQ(id.tag, IsomTag::Elliptic);
    EXPECT_EQ(id.order, 1u);

    IsomClass h = classify({IntMatrix{{3, 4}, {2, 3}}, d});
    EXPECT_EQ(h.tag, IsomTag::Hyperbolic);
    EXPECT_EQ(h.char_poly, pl({1, -6, 1}));

    QuadLattice d11 = QuadLattice::diagonal(iv({1, -1}));
    IntMatrix minus = IntMatrix::identity(2);
    minus(0, 0) = -1;
    minus(1, 1) = -1;
    IsomClass e = classify({minus, d11});
    EXPECT_EQ(e.tag, IsomTag::Elliptic);
    EXPECT_EQ(e.order, 2u);
    EXPECT_FALSE(e.preserves_cone);

    EXPECT_EQ(code_of([&] { classify({IntMatrix{{2, 0}, {0, 1}}, d}); }), ErrorCode::NotIsometry);
    EXPECT_EQ(code_of([] { classify({IntMatrix::identity(2), QuadLattice::diagonal(iv({1, 1}))}); }),
              ErrorCode::WrongSignature);
}

TEST(Pell, Examples)
{
    Isometry g = pell_automorph(QuadLattice::diagonal(iv({1, -2})));
    EXPECT_EQ(g.matrix, (IntMatrix{{3, 4}, {2, 3}}));
    PellSolution s = pell_fundamental(1200);
    EXPECT_EQ(s.t, 2702);
    EXPECT_EQ(s.u, 78);

    Isometry w = pell_automorph(QuadLattice::diagonal(iv({30, -10})));
    EXPECT_TRUE(is_isometry(w.matrix, w.lattice));
    EXPECT_EQ(classify(w).tag, IsomTag::Hyperbolic);

    EXPECT_EQ(code_of([] { pell_automorph(QuadLattice::diagonal(iv({1, -1}))); }), ErrorCode::IsotropicForm);
    EXPECT_EQ(code_of([] { pell_automorph(QuadLattice::diagonal(iv({1, -1, 1}))); }), ErrorCode::NotBinary);
}

TEST(Pell, FundamentalMatchesBruteForce)
{
    for (long D = 5; D <= 400; ++D) {
        if (D % 4 == 2 || D % 4 == 3 || is_square(Int(D)))
            continue;
        auto [t, u] = brute_pell(D, 100000);
        if (u == 0)
            continue;
        PellSolution s = pell_fundamental(D);
        EXPECT_EQ(s.t, t) << "D=" << D;
        EXPECT_EQ(s.u, u) << "D=" << D;
    }
}

TEST(Pell, LargeSolutionThroughContinuedFraction)
{
    // D = 4 * 61: fundamental solution of x^2 - 61 y^2 = 1 has y = 226153980.
    PellSolution s = pell_fundamental(244);
    EXPECT_EQ(s.u, 226153980);
    EXPECT_EQ(s.t * s.t - 244 * s.u * s.u, 4);
    // D = 1 mod 4 with a long period.
    PellSolution r = pell_fundamental(1021);
    EXPECT_EQ(r.t * r.t - 1021 * r.u * r.u, 4);
}

TEST(Pell, BruteForceAutomorphsOfDiag1m2)
{
    // Every isometry with |entries| <= 5 is ±1, ±g^{±1}, or a reflection.
    QuadLattice d = QuadLattice::diagonal(iv({1, -2}));
    int hyperbolic = 0;
    for (long a = -5; a <= 5; ++a)
        for (long b = -5; b <= 5; ++b)
            for (long c = -5; c <= 5; ++c)
                for (long e = -5; e <= 5; ++e) {
                    IntMatrix m{{a, b}, {c, e}};
                    if (!is_isometry(m, d))
                        continue;
                    IsomClass k = classify({m, d});
                    if (k.tag == IsomTag::Hyperbolic) {
                        ++hyperbolic;
                        EXPECT_EQ(abs(a + e), 6);
                    }
                }
    EXPECT_GT(hyperbolic, 0);
}

TEST(Pell, AutomorphsAreHyperbolicOnRandomForms)
{
    for (long a = 1; a <= 7; ++a)
        for (long c = -9; c <= -1; ++c)
            for (long b = -3; b <= 3; ++b) {
                QuadLattice l(IntMatrix{{a, b}, {b, c}});
                const Int D = 4 * b * b - 4 * a * c;
                if (is_square(D))
                    continue;
                Isometry g = pell_automorph(l);
                Poly f = char_poly(g.matrix);
                EXPECT_EQ(f[0], 1);
                EXPECT_GT(abs(f[1]), 2);
                EXPECT_EQ(classify(g).tag, IsomTag::Hyperbolic);
            }
}

TEST(Eichler, WorkedExample)
{
    QuadLattice l = u_plus_m2();
    Isometry g = eichler_transvection(l, iv({1, 0, 0}), iv({0, 0, 1}));
    // Columns are the images of e, f, g.
    EXPECT_EQ(g.matrix, (IntMatrix{{1, 1, -2}, {0, 1, 0}, {0, -1, 1}}));
    EXPECT_EQ(qvalue(l, iv({1, 1, -1})), 0);
    IntMatrix n = g.matrix - IntMatrix::identity(3);
    EXPECT_EQ((n * n) * iv({0, 1, 0}), iv({2, 0, 0}));
    EXPECT_TRUE((n * n * n).is_zero());
    IsomClass c = classify(g);
    EXPECT_EQ(c.tag, IsomTag::Parabolic);
    EXPECT_EQ(c.fixed_isotropic, iv({1, 0, 0}));
    EXPECT_EQ(c.unipotency_power, 1u);
}

TEST(Eichler, Errors)
{
    QuadLattice l = u_plus_m2();
    EXPECT_EQ(code_of([&] { eichler_transvection(l, iv({1, 0, 0}), iv({1, 0, 0})); }), ErrorCode::BadInput);
    EXPECT_EQ(code_of([&] { eichler_transvection(l, iv({1, 0, 0}), iv({0, 1, 0})); }), ErrorCode::BadInput);
    EXPECT_EQ(code_of([] {
                  eichler_transvection(QuadLattice(IntMatrix{{0, 1}, {1, 0}}), iv({1, 0}), iv({0, 1}));
              }),
              ErrorCode::BadInput);
    QuadLattice uu(IntMatrix{{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
    EXPECT_EQ(code_of([&] { eichler_transvection(uu, iv({1, 0, 0, 0}), iv({0, 0, 1, 0})); }),
              ErrorCode::DegenerateDirection);
}

TEST(Eichler, OddDirectionIsDoubledAndPowersStayParabolic)
{
    QuadLattice l = QuadLattice::diagonal(iv({1, -1, -1, -1}));
    Isometry g = eichler_transvection(l, iv({1, 1, 0, 0}), iv({0, 0, 1, 0}));
    EXPECT_TRUE(is_isometry(g.matrix, l));
    EXPECT_EQ(g.matrix * iv({1, 1, 0, 0}), iv({1, 1, 0, 0}));
    for (unsigned long m = 1; m <= 4; ++m) {
        IntMatrix gm = matrix_power(g.matrix, m);
        IntMatrix n = gm - IntMatrix::identity(4);
        EXPECT_FALSE((n * n).is_zero());
        EXPECT_EQ(classify({gm, l}).tag, IsomTag::Parabolic);
    }
}

TEST(FindIsometries, Examples)
{
    Isometry p = find_parabolic(u_plus_m2());
    EXPECT_EQ(p.matrix, (IntMatrix{{1, 1, -2}, {0, 1, 0}, {0, -1, 1}}));
    EXPECT_EQ(code_of([] { find_parabolic(QuadLattice::diagonal(iv({5, -15})), 20); }),
              ErrorCode::NotFoundWithinBound);
    Isometry h = find_hyperbolic(QuadLattice::diagonal(iv({20, -10})));
    EXPECT_EQ(classify(h).tag, IsomTag::Hyperbolic);
}

TEST(Classify, InverseAndPowersKeepTag)
{
    QuadLattice d = QuadLattice::diagonal(iv({1, -2}));
    IntMatrix g{{3, 4}, {2, 3}};
    IntMatrix ginv{{3, -4}, {-2, 3}};
    EXPECT_EQ(classify({ginv, d}).tag, IsomTag::Hyperbolic);
    for (unsigned long m = 1; m <= 3; ++m)
        EXPECT_EQ(classify({matrix_power(g, m), d}).tag, IsomTag::Hyperbolic);
}

TEST(Classify, SmallIsometriesMatchOracle)
{
    // Entries in [-2, 2] admit only finite-order isometries of diag(1,-1,-1);
    // the wider box exercises all three tags.
    QuadLattice l = QuadLattice::diagonal(iv({1, -1, -1}));
    for (long bound : {2L, 9L}) {
        const auto all = oracle::small_isometries_diag_1_m1_m1(bound);
        ASSERT_FALSE(all.empty());
        int counts[3] = {0, 0, 0};
        for (const auto& m : all) {
            IntMatrix g(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    g(i, j) = m[i][j];
            const oracle::Kind k = oracle::classify3(m);
            ASSERT_NE(k, oracle::Kind::Unknown);
            const IsomTag expected = k == oracle::Kind::Finite      ? IsomTag::Elliptic
                                     : k == oracle::Kind::Expanding ? IsomTag::Hyperbolic
                                                                    : IsomTag::Parabolic;
            const IsomTag t = classify({g, l}).tag;
            EXPECT_EQ(t, expected);
            ++counts[static_cast<int>(t)];
        }
        if (bound == 2) {
            EXPECT_EQ(counts[0], static_cast<int>(all.size()));
        } else {
            EXPECT_GT(counts[1], 0);
            EXPECT_GT(counts[2], 0);
        }
    }
}
