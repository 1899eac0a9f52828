#pragma once

#include <numeric>
#include <optional>
#include <string>

#include "enumerate.hpp"
#include "forge.hpp"
#include "poly.hpp"

namespace qforge {

struct Isometry {
    IntMatrix matrix;
    QuadLattice lattice;
};

enum class IsomTag { Elliptic, Parabolic, Hyperbolic };

inline std::string to_string(IsomTag t)
{
    switch (t) {
    case IsomTag::Elliptic:
        return "Elliptic";
    case IsomTag::Parabolic:
        return "Parabolic";
    case IsomTag::Hyperbolic:
        return "Hyperbolic";
    }
    return "?";
}

struct IsomClass {
    IsomTag tag = IsomTag::Elliptic;
    Poly char_poly;
    std::vector<unsigned long> cyclotomic_orders;
    Poly residual;                      // hyperbolic: contains the dominant eigenvalue's minimal polynomial
    unsigned long order = 0;            // elliptic: exact order
    unsigned long unipotency_power = 0; // parabolic: k with g^k unipotent
    LatticeVector fixed_isotropic;      // parabolic
    bool preserves_cone = true;
};

inline IntMatrix matrix_power(const IntMatrix& g, unsigned long k)
{
    IntMatrix r = IntMatrix::identity(g.rows());
    IntMatrix b = g;
    while (k > 0) {
        if (k & 1)
            r = r * b;
        b = b * b;
        k >>= 1;
    }
    return r;
}

inline bool is_isometry(const IntMatrix& g, const QuadLattice& l)
{
    if (g.rows() != l.rank() || g.cols() != l.rank())
        fail(ErrorCode::DimensionMismatch, "matrix size does not match lattice rank");
    if (g.transpose() * l.gram() * g != l.gram())
        return false;
    return abs(determinant(g)) == 1;
}

inline Isometry make_isometry(IntMatrix g, const QuadLattice& l)
{
    if (!is_isometry(g, l))
        fail(ErrorCode::NotIsometry, "matrix does not preserve the form");
    return {std::move(g), l};
}

namespace detail {

inline LatticeVector positive_vector(const QuadLattice& l)
{
    Diagonalization d = diagonalize(l);
    for (std::size_t i = 0; i < d.entries.size(); ++i)
        if (d.entries[i] > 0)
            return integral_direction(d.basis.column(i));
    fail(ErrorCode::WrongSignature, "no positive direction");
}

} // namespace detail

inline IsomClass classify(const Isometry& iso)
{
    const QuadLattice& l = iso.lattice;
    const IntMatrix& g = iso.matrix;
    if (!is_isometry(g, l))
        fail(ErrorCode::NotIsometry, "matrix does not preserve the form");
    const Signature sig = signature(l);
    if (sig.pos != 1 || sig.neg < 1)
        fail(ErrorCode::WrongSignature, "classification needs signature (1,n) with n >= 1");

    IsomClass c;
    c.char_poly = char_poly(g);
    CyclotomicSplit split = cyclotomic_split(c.char_poly);
    c.cyclotomic_orders = split.orders;
    c.residual = split.residual;
    {
        const LatticeVector x = detail::positive_vector(l);
        c.preserves_cone = pairing(l, x, g * x) > 0;
    }
    if (!split.cyclotomic()) {
        c.tag = IsomTag::Hyperbolic;
        return c;
    }
    unsigned long k = 1;
    for (unsigned long m : split.orders)
        k = std::lcm(k, m);
    const IntMatrix id = IntMatrix::identity(g.rows());
    const IntMatrix gk = matrix_power(g, k);
    if (gk == id) {
        c.tag = IsomTag::Elliptic;
        for (unsigned long d = 1; d <= k; ++d)
            if (k % d == 0 && matrix_power(g, d) == id) {
                c.order = d;
                break;
            }
        return c;
    }
    const IntMatrix n = gk - id;
    const IntMatrix n2 = n * n;
    if (!(n2 * n).is_zero() || n2.is_zero())
        fail(ErrorCode::InternalInconsistency, "quasi-unipotent isometry without a rank-3 Jordan cell");
    c.tag = IsomTag::Parabolic;
    c.unipotency_power = k;
    for (std::size_t j = 0; j < n2.cols(); ++j) {
        LatticeVector col = n2.column(j);
        if (gcd_of(col) != 0) {
            c.fixed_isotropic = primitive_part(col);
            break;
        }
    }
    if (qvalue(l, c.fixed_isotropic) != 0 || gk * c.fixed_isotropic != c.fixed_isotropic)
        fail(ErrorCode::InternalInconsistency, "fixed line of the unipotent part is not isotropic");
    return c;
}

struct PellSolution {
    Int t, u;
};

namespace detail {

// Fundamental solution of t^2 - D u^2 = ±4 (t, u > 0) together with the sign.
inline std::pair<PellSolution, int> pell_pm4(const Int& D)
{
    const Int four = 4;
    for (long u = 1; u <= 10000; ++u) {
        const Int du2 = D * Int(u) * Int(u);
        if (is_square(du2 + four))
            return {{isqrt(du2 + four), u}, 4};
        if (du2 >= four && is_square(du2 - four))
            return {{isqrt(du2 - four), u}, -4};
    }
    // Continued fraction of (P + sqrt(d)) / Q; the fundamental unit shows up
    // among the convergents.
    const bool even = mpz_divisible_ui_p(D.get_mpz_t(), 4) != 0;
    const Int d = even ? Int(D / 4) : D;
    const Int s = isqrt(d);
    Int P = even ? Int(0) : Int(1), Q = even ? Int(1) : Int(2);
    Int p0 = 0, p1 = 1, q0 = 1, q1 = 0;
    for (long step = 0; step < 10'000'000; ++step) {
        Int num = Q > 0 ? Int(P + s) : Int(P + s + 1);
        Int a;
        mpz_fdiv_q(a.get_mpz_t(), num.get_mpz_t(), Q.get_mpz_t());
        Int p2 = a * p1 + p0, q2 = a * q1 + q0;
        p0 = p1;
        p1 = p2;
        q0 = q1;
        q1 = q2;
        Int t = even ? Int(2 * p1) : Int(2 * p1 - q1);
        Int norm = t * t - D * q1 * q1;
        if (t > 0 && (norm == 4 || norm == -4))
            return {{t, q1}, norm == 4 ? 4 : -4};
        P = a * Q - P;
        Q = (d - P * P) / Q;
    }
    fail(ErrorCode::SearchExhausted, "Pell solver did not terminate");
}

} // namespace detail

// Fundamental solution of t^2 - D u^2 = 4 for a non-square discriminant D > 0.
inline PellSolution pell_fundamental(const Int& D)
{
    if (D <= 0 || is_square(D))
        fail(ErrorCode::IsotropicForm, "discriminant is a square or not positive");
    auto [sol, sign] = detail::pell_pm4(D);
    if (sign == 4)
        return sol;
    // ((t + u√D)/2)^2 = ((t^2 + D u^2)/2 + t u √D)/2
    return {(sol.t * sol.t + D * sol.u * sol.u) / 2, sol.t * sol.u};
}

inline Isometry pell_automorph(const QuadLattice& l)
{
    if (l.rank() != 2)
        fail(ErrorCode::NotBinary, "automorph needs a binary lattice");
    const Int a = l.gram()(0, 0), b = 2 * l.gram()(0, 1), c = l.gram()(1, 1);
    const Int D = b * b - 4 * a * c;
    if (D <= 0)
        fail(ErrorCode::WrongSignature, "binary form is definite or degenerate");
    if (is_square(D))
        fail(ErrorCode::IsotropicForm, "form represents zero (square discriminant)");
    PellSolution s = pell_fundamental(D);
    IntMatrix m(2, 2);
    m(0, 0) = (s.t - b * s.u) / 2;
    m(0, 1) = -c * s.u;
    m(1, 0) = a * s.u;
    m(1, 1) = (s.t + b * s.u) / 2;
    if (!is_isometry(m, l))
        fail(ErrorCode::InternalInconsistency, "Pell automorph does not preserve the form");
    return {m, l};
}

inline Isometry find_hyperbolic(const QuadLattice& l)
{
    if (signature(l) != Signature{1, 1})
        fail(ErrorCode::WrongSignature, "hyperbolic search needs signature (1,1)");
    Isometry g = pell_automorph(l);
    if (classify(g).tag != IsomTag::Hyperbolic)
        fail(ErrorCode::InternalInconsistency, "automorph of an anisotropic form is not hyperbolic");
    return g;
}

inline Isometry eichler_transvection(const QuadLattice& l, const LatticeVector& v, const LatticeVector& a_in)
{
    const std::size_t n = l.rank();
    if (n < 3)
        fail(ErrorCode::BadInput, "transvections need rank at least 3");
    check_dimension(l, v.size());
    check_dimension(l, a_in.size());
    if (gcd_of(v) == 0 || qvalue(l, v) != 0)
        fail(ErrorCode::BadInput, "v is not a nonzero isotropic vector");
    if (pairing(l, v, a_in) != 0)
        fail(ErrorCode::BadInput, "a is not orthogonal to v");
    if (rank_of(IntMatrix::from_rows({v, a_in})) < 2)
        fail(ErrorCode::BadInput, "a is proportional to v");
    LatticeVector a = a_in;
    Int aa = qvalue(l, a);
    if (aa == 0)
        fail(ErrorCode::DegenerateDirection, "q(a) = 0 gives (g - I)^2 = 0");
    if (mpz_odd_p(aa.get_mpz_t())) {
        for (auto& x : a)
            x *= 2;
        aa *= 4;
    }
    const Int half = aa / 2;
    IntMatrix g = IntMatrix::identity(n);
    for (std::size_t j = 0; j < n; ++j) {
        LatticeVector e(n, 0);
        e[j] = 1;
        const Int xa = pairing(l, e, a), xv = pairing(l, e, v);
        for (std::size_t i = 0; i < n; ++i)
            g(i, j) += xa * v[i] - xv * a[i] - half * xv * v[i];
    }
    if (!is_isometry(g, l))
        fail(ErrorCode::InternalInconsistency, "transvection does not preserve the form");
    const IntMatrix d = g - IntMatrix::identity(n);
    if (!(d * d * d).is_zero() || (d * d).is_zero() || g * v != v)
        fail(ErrorCode::InternalInconsistency, "transvection is not a rank-3 unipotent");
    return {g, l};
}

inline Isometry find_parabolic(const QuadLattice& l, long height = kDefaultSearchHeight,
                               std::uint64_t budget = kDefaultSearchBudget)
{
    const Signature sig = signature(l);
    if (sig.pos != 1 || sig.neg < 1)
        fail(ErrorCode::WrongSignature, "parabolic search needs signature (1,n)");
    const LatticeVector v = find_isotropic(l, height, budget);
    FormEvaluator f(l);
    const std::vector<long> vl = detail::to_longs(v);
    std::vector<long> found;
    search_vectors(l.rank(), height, budget, [&](const std::vector<long>& x) {
        if (f.pairing(x, vl) != 0 || f.qvalue(x) == 0 || detail::proportional(x, vl))
            return false;
        found = x;
        return true;
    });
    if (found.empty())
        fail(ErrorCode::NotFoundWithinBound, "no transvection direction within height " + std::to_string(height));
    Isometry g = eichler_transvection(l, v, to_int_vec(found));
    if (classify(g).tag != IsomTag::Parabolic)
        fail(ErrorCode::InternalInconsistency, "transvection is not parabolic");
    return g;
}

} // namespace qforge
