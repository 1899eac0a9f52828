#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "qforge/forge.hpp"

using namespace qforge;

namespace {

IntVec iv(std::initializer_list<long> xs)
{
    IntVec v;
    for (long x : xs)
        v.emplace_back(x);
    return v;
}

QuadLattice hyperbolic_plane() { return QuadLattice(IntMatrix{{0, 1}, {1, 0}}, "U"); }

QuadLattice e8_negative()
{
    IntMatrix g{{2, 0, -1, 0, 0, 0, 0, 0},  {0, 2, 0, -1, 0, 0, 0, 0}, {-1, 0, 2, -1, 0, 0, 0, 0},
                {0, -1, -1, 2, -1, 0, 0, 0}, {0, 0, 0, -1, 2, -1, 0, 0}, {0, 0, 0, 0, -1, 2, -1, 0},
                {0, 0, 0, 0, 0, -1, 2, -1}, {0, 0, 0, 0, 0, 0, -1, 2}};
    return scaled(QuadLattice(g), Int(-1));
}

QuadLattice u2_plus_2()
{
    return direct_sum(direct_sum(hyperbolic_plane(), hyperbolic_plane()), QuadLattice::diagonal(iv({2})));
}

QuadLattice k3()
{
    QuadLattice u = hyperbolic_plane();
    return direct_sum(direct_sum(direct_sum(u, u), u), direct_sum(e8_negative(), e8_negative()));
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

// Brute-force check that beta1 x^2 + beta2 y^2 ≡ 0 (mod p) has only the zero solution.
bool anisotropic_mod_p(long b1, long b2, long p)
{
    for (long x = 0; x < p; ++x)
        for (long y = 0; y < p; ++y)
            if ((x || y) && (((b1 * x * x + b2 * y * y) % p) + p) % p == 0)
                return false;
    return true;
}

} // namespace

TEST(Isotropic, Examples)
{
    EXPECT_EQ(find_isotropic(hyperbolic_plane()), iv({1, 0}));
    EXPECT_EQ(find_isotropic(QuadLattice::diagonal(iv({1, -1}))), iv({1, 1}));
    EXPECT_EQ(find_isotropic(QuadLattice::diagonal(iv({1, 1, -1, -1, -1}))), iv({1, 0, 1, 0, 0}));
    EXPECT_EQ(code_of([] { find_isotropic(QuadLattice::diagonal(iv({1, -2})), 20); }),
              ErrorCode::NotFoundWithinBound);
}

TEST(Isotropic, Pairs)
{
    IsotropicPair u = find_isotropic_pair(hyperbolic_plane());
    EXPECT_EQ(u.v, iv({1, 0}));
    EXPECT_EQ(u.v2, iv({0, 1}));
    EXPECT_EQ(u.pairing, 1);

    QuadLattice uu = direct_sum(hyperbolic_plane(), hyperbolic_plane());
    IsotropicPair p = find_isotropic_pair(uu);
    EXPECT_EQ(p.v, iv({1, 0, 0, 0}));
    EXPECT_EQ(p.v2, iv({0, 1, 0, 0}));

    QuadLattice d = QuadLattice::diagonal(iv({1, -1, -1, 1, -1}));
    IsotropicPair q = find_isotropic_pair(d);
    EXPECT_EQ(qvalue(d, q.v), 0);
    EXPECT_EQ(qvalue(d, q.v2), 0);
    EXPECT_NE(pairing(d, q.v, q.v2), 0);
    EXPECT_EQ(gcd_of(q.v), 1);
    EXPECT_EQ(gcd_of(q.v2), 1);
}

TEST(Isotropic, RandomIndefiniteRankFive)
{
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> d(-4, 4);
    int done = 0;
    while (done < 15) {
        IntMatrix g(5, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i; j < 5; ++j)
                g(i, j) = g(j, i) = d(rng);
        QuadLattice l(g);
        if (l.degenerate() || !indefinite(l))
            continue;
        IsotropicPair p = find_isotropic_pair(l);
        EXPECT_EQ(qvalue(l, p.v), 0);
        EXPECT_EQ(qvalue(l, p.v2), 0);
        EXPECT_EQ(gcd_of(p.v), 1);
        // q(a v + b v') = 2ab (v, v').
        for (long a : {-3, 1, 2})
            for (long b : {-1, 5}) {
                LatticeVector v1(5);
                for (std::size_t i = 0; i < 5; ++i)
                    v1[i] = a * p.v[i] + b * p.v2[i];
                EXPECT_EQ(qvalue(l, v1), 2 * a * b * p.pairing);
            }
        ++done;
    }
}

TEST(OddValuation, Examples)
{
    QuadLattice amb = u2_plus_2();
    Sublattice c = make_sublattice(amb, {iv({0, 0, 1, 0, 0}), iv({0, 0, 0, 1, 0}), iv({0, 0, 0, 0, 1})});
    OddValuationVector w = find_w_odd_valuation(c, Int(5), -1);
    EXPECT_LT(qvalue(amb, w.w), 0);
    EXPECT_EQ(qvalue(amb, w.w), w.beta * ipow(Int(5), 2 * w.n + 1));
    EXPECT_NE(w.beta % 5, 0);
    EXPECT_EQ(w.w[0], 0);
    EXPECT_EQ(w.w[1], 0);
    // The (1, -5) vector of the complement is one such vector.
    EXPECT_EQ(qvalue(amb, iv({0, 0, 1, -5, 0})), -10);

    QuadLattice two = QuadLattice::diagonal(iv({2}));
    OddValuationVector t = find_w_odd_valuation(make_sublattice(two, {iv({1})}), Int(2), 0);
    EXPECT_EQ(t.w, iv({1}));
    EXPECT_EQ(t.beta, 1);
    EXPECT_EQ(t.n, 0u);
}

TEST(OddValuation, NotFoundAgreesWithEnumeration)
{
    QuadLattice l = QuadLattice::diagonal(iv({-2, -2}));
    const long h = 1;
    ValueTable t = enumerate_values(l, h);
    bool any = false;
    for (auto v : t.values)
        if (v != 0 && valuation(Int(v), Int(5)) % 2 == 1)
            any = true;
    EXPECT_FALSE(any);
    EXPECT_EQ(code_of([&] { find_w_odd_valuation(make_sublattice(l, {iv({1, 0}), iv({0, 1})}), Int(5), -1, h); }),
              ErrorCode::NotFoundWithinBound);
}

TEST(Certificate, Examples)
{
    SmallnessCertificate c{5, 30, -10, 6, -2, 0, 0};
    EXPECT_TRUE(verify_certificate(c, 4).valid);
    EXPECT_TRUE(anisotropic_mod_p(6, -2, 5));
    CertificateCheck boundary = verify_certificate(c, 5);
    EXPECT_FALSE(boundary.valid);

    SmallnessCertificate iso{5, 5, -5, 1, -1, 0, 0};
    EXPECT_FALSE(verify_certificate(iso, 1).valid);
    EXPECT_FALSE(anisotropic_mod_p(1, -1, 5));

    SmallnessCertificate wrong_alpha{5, 31, -10, 6, -2, 0, 0};
    EXPECT_FALSE(verify_certificate(wrong_alpha, 1).valid);
    SmallnessCertificate even{5, 150, -10, 6, -2, 1, 0};
    EXPECT_FALSE(verify_certificate(even, 1).valid);
    SmallnessCertificate divisible{5, 150, -10, 30, -2, 0, 0};
    EXPECT_FALSE(verify_certificate(divisible, 1).valid);
}

TEST(Certificate, AgreesWithResidueEnumeration)
{
    for (long p : {3, 5, 7, 11, 13})
        for (long b1 = 1; b1 < p; ++b1)
            for (long b2 = -p + 1; b2 < 0; ++b2) {
                SmallnessCertificate c{p, b1 * p, b2 * p, b1, b2, 0, 0};
                EXPECT_EQ(verify_certificate(c, 1).valid, anisotropic_mod_p(b1, b2, p));
            }
}

TEST(Rank2, WorkedAmbient)
{
    QuadLattice l = u2_plus_2();
    Rank2Result r = find_rank2_avoiding(l, 4);
    EXPECT_EQ(r.certificate.p, 5);
    EXPECT_TRUE(verify_certificate(r.certificate, 4).valid);
    EXPECT_EQ(r.index_before_saturation, 1);
    EXPECT_EQ(r.lattice.rank(), 2u);
    EXPECT_TRUE(is_primitive(r.lattice));
    EXPECT_EQ(signature(r.lattice.lattice()), (Signature{1, 1}));
    EXPECT_EQ(qvalue(l, r.v1), r.certificate.alpha1);
    EXPECT_EQ(qvalue(l, r.w), r.certificate.alpha2);
    EXPECT_EQ(pairing(l, r.v1, r.w), 0);
    EXPECT_GT(r.certificate.alpha1, 0);
    EXPECT_LT(r.certificate.alpha2, 0);
    EXPECT_EQ(r.v, iv({1, 0, 0, 0, 0}));
    EXPECT_EQ(r.v2, iv({0, 1, 0, 0, 0}));

    ValueTable t = enumerate_values(r.lattice.lattice(), 1000);
    ASSERT_TRUE(t.min_nonzero_abs());
    EXPECT_GE(*t.min_nonzero_abs(), 5);
    EXPECT_TRUE(t.all_divisible_by(5));
    EXPECT_EQ(*r.oracle.min_nonzero_abs, *t.min_nonzero_abs());
}

TEST(Rank2, K3)
{
    QuadLattice l = k3();
    Rank2Result r = find_rank2_avoiding(l, 2);
    EXPECT_GE(r.certificate.p, 3);
    EXPECT_TRUE(verify_certificate(r.certificate, 2).valid);
    EXPECT_TRUE(is_primitive(r.lattice));
    ValueTable t = enumerate_values(r.lattice.lattice(), 1000);
    EXPECT_GE(*t.min_nonzero_abs(), 3);
    EXPECT_TRUE(t.small_values(3).empty());
}

TEST(Rank2, Preconditions)
{
    EXPECT_EQ(code_of([] { find_rank2_avoiding(QuadLattice::diagonal(iv({1, 1})), 1); }),
              ErrorCode::PreconditionViolation);
    EXPECT_EQ(code_of([] { find_rank2_avoiding(QuadLattice::diagonal(iv({1, 1, 1, 1, 1})), 1); }),
              ErrorCode::PreconditionViolation);
    IntMatrix g(5, 5);
    g(0, 1) = g(1, 0) = 1;
    EXPECT_EQ(code_of([&] { find_rank2_avoiding(QuadLattice(g), 1); }), ErrorCode::DegenerateLattice);
}

TEST(Rank2, SelectPrime)
{
    QuadLattice l = u2_plus_2();
    EXPECT_EQ(select_prime(l, 0), 3);
    EXPECT_EQ(select_prime(l, 2), 3);
    Int p = select_prime(l, 5);
    EXPECT_GT(p, 5);
    EXPECT_TRUE(is_prime(p));
}

TEST(Rank2, CertificatesSoundOnRandomAmbients)
{
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> d(-3, 3);
    int done = 0;
    while (done < 6) {
        IntMatrix g(5, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i; j < 5; ++j)
                g(i, j) = g(j, i) = d(rng);
        QuadLattice l(g);
        if (l.degenerate() || !indefinite(l))
            continue;
        ForgeOptions opt;
        opt.oracle_height = 200;
        Rank2Result r = find_rank2_avoiding(l, 3 + done, opt);
        ValueTable t = enumerate_values(r.lattice.lattice(), 200);
        EXPECT_TRUE(t.all_divisible_by(r.certificate.p.get_si()));
        EXPECT_TRUE(t.small_values(4 + done).empty());
        ++done;
    }
}
