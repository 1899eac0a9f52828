#pragma once

#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "matrix.hpp"

namespace qforge {

// Coordinates of a lattice vector in the lattice basis.
using LatticeVector = IntVec;

// Free abelian group of finite rank with a symmetric integral bilinear form b,
// stored as its Gram matrix; q(x) = b(x, x). Even lattices have even diagonal.
class QuadLattice {
public:
    QuadLattice() = default;
    explicit QuadLattice(IntMatrix gram, std::string label = {}) : gram_(std::move(gram)), label_(std::move(label))
    {
        if (!gram_.square())
            fail(ErrorCode::DimensionMismatch, "Gram matrix must be square");
        if (gram_.rows() == 0)
            fail(ErrorCode::BadInput, "lattice rank must be positive");
        if (!gram_.is_symmetric())
            fail(ErrorCode::BadInput, "Gram matrix must be symmetric");
    }

    static QuadLattice diagonal(const IntVec& entries, std::string label = {})
    {
        IntMatrix g(entries.size(), entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i)
            g(i, i) = entries[i];
        return QuadLattice(std::move(g), std::move(label));
    }

    std::size_t rank() const noexcept { return gram_.rows(); }
    const IntMatrix& gram() const noexcept { return gram_; }
    const std::string& label() const noexcept { return label_; }
    void set_label(std::string l) { label_ = std::move(l); }

    Int determinant() const { return qforge::determinant(gram_); }
    bool degenerate() const { return determinant() == 0; }

    bool even() const
    {
        for (std::size_t i = 0; i < rank(); ++i)
            if (mpz_odd_p(gram_(i, i).get_mpz_t()))
                return false;
        return true;
    }

    bool diagonal_form() const
    {
        for (std::size_t i = 0; i < rank(); ++i)
            for (std::size_t j = 0; j < rank(); ++j)
                if (i != j && gram_(i, j) != 0)
                    return false;
        return true;
    }

    friend bool operator==(const QuadLattice& a, const QuadLattice& b) { return a.gram_ == b.gram_; }

private:
    IntMatrix gram_;
    std::string label_;
};

inline void check_dimension(const QuadLattice& l, std::size_t n)
{
    if (l.rank() != n)
        fail(ErrorCode::DimensionMismatch,
             "vector of length " + std::to_string(n) + " in lattice of rank " + std::to_string(l.rank()));
}

inline Int pairing(const QuadLattice& l, const LatticeVector& u, const LatticeVector& v)
{
    check_dimension(l, u.size());
    check_dimension(l, v.size());
    const IntMatrix& g = l.gram();
    Int acc = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == 0)
            continue;
        Int row = 0;
        for (std::size_t j = 0; j < v.size(); ++j)
            row += g(i, j) * v[j];
        acc += u[i] * row;
    }
    return acc;
}

inline Int qvalue(const QuadLattice& l, const LatticeVector& v) { return pairing(l, v, v); }

inline Rat rational_pairing(const RatMatrix& gram, const RatVec& u, const RatVec& v)
{
    Rat acc = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == 0)
            continue;
        Rat row = 0;
        for (std::size_t j = 0; j < v.size(); ++j)
            row += gram(i, j) * v[j];
        acc += u[i] * row;
    }
    return acc;
}

// Gram matrix of the vectors given as columns of `basis`.
inline IntMatrix gram_of(const QuadLattice& l, const IntMatrix& basis)
{
    return basis.transpose() * l.gram() * basis;
}

inline QuadLattice direct_sum(const QuadLattice& a, const QuadLattice& b)
{
    const std::size_t n = a.rank() + b.rank();
    IntMatrix g(n, n);
    for (std::size_t i = 0; i < a.rank(); ++i)
        for (std::size_t j = 0; j < a.rank(); ++j)
            g(i, j) = a.gram()(i, j);
    for (std::size_t i = 0; i < b.rank(); ++i)
        for (std::size_t j = 0; j < b.rank(); ++j)
            g(a.rank() + i, a.rank() + j) = b.gram()(i, j);
    std::string label;
    if (!a.label().empty() && !b.label().empty())
        label = a.label() + "+" + b.label();
    return QuadLattice(std::move(g), std::move(label));
}

inline QuadLattice scaled(const QuadLattice& l, const Int& factor)
{
    IntMatrix g = l.gram();
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
            g(i, j) *= factor;
    return QuadLattice(std::move(g));
}

struct Diagonalization {
    RatVec entries;
    RatMatrix basis; // columns; basis^T * G * basis = diag(entries)
};

// Lagrange diagonalization over Q. `order` fixes the sequence in which basis
// vectors are used as pivots (identity order when empty).
inline Diagonalization diagonalize(const RatMatrix& gram, const std::vector<std::size_t>& order = {})
{
    const std::size_t n = gram.rows();
    if (!gram.is_symmetric())
        fail(ErrorCode::BadInput, "Gram matrix must be symmetric");
    RatMatrix basis(n, n);
    if (order.empty()) {
        basis = RatMatrix::identity(n);
    } else {
        if (order.size() != n)
            fail(ErrorCode::DimensionMismatch, "diagonalization order length");
        for (std::size_t k = 0; k < n; ++k)
            basis(order[k], k) = 1;
    }
    RatMatrix g = basis.transpose() * gram * basis;

    // Congruence step on both g and basis: column/row dst += c * src.
    auto combine = [&](std::size_t dst, std::size_t src, const Rat& c) {
        g.add_col(dst, src, c);
        g.add_row(dst, src, c);
        basis.add_col(dst, src, c);
    };

    Diagonalization out;
    for (std::size_t k = 0; k < n; ++k) {
        if (g(k, k) == 0) {
            std::size_t j = k + 1;
            while (j < n && g(k, j) == 0)
                ++j;
            if (j == n)
                fail(ErrorCode::DegenerateLattice, "form is degenerate");
            // q(e_k + c e_j) = 2c b(e_k, e_j) + c^2 q(e_j); c = 1 or -1 is nonzero.
            Rat c = 1;
            if (2 * g(k, j) + g(j, j) == 0)
                c = -1;
            combine(k, j, c);
        }
        for (std::size_t j = k + 1; j < n; ++j) {
            if (g(k, j) == 0)
                continue;
            Rat c = -g(k, j) / g(k, k);
            combine(j, k, c);
        }
        out.entries.push_back(g(k, k));
    }
    out.basis = std::move(basis);
    return out;
}

inline Diagonalization diagonalize(const QuadLattice& l, const std::vector<std::size_t>& order = {})
{
    return diagonalize(to_rational(l.gram()), order);
}

struct Signature {
    std::size_t pos = 0;
    std::size_t neg = 0;
    friend bool operator==(const Signature&, const Signature&) = default;
    friend Signature operator+(Signature a, const Signature& b) { return {a.pos + b.pos, a.neg + b.neg}; }
};

inline Signature signature(const RatMatrix& gram)
{
    Signature s;
    for (const auto& a : diagonalize(gram).entries)
        (a > 0 ? s.pos : s.neg)++;
    return s;
}

inline Signature signature(const QuadLattice& l) { return signature(to_rational(l.gram())); }

inline bool indefinite(const QuadLattice& l)
{
    Signature s = signature(l);
    return s.pos > 0 && s.neg > 0;
}

// Sublattice of an ambient lattice given by a list of independent vectors.
struct Sublattice {
    QuadLattice ambient;
    std::vector<LatticeVector> basis;

    std::size_t rank() const noexcept { return basis.size(); }

    // Basis vectors as the columns of an ambient-rank x rank matrix.
    IntMatrix basis_matrix() const
    {
        return IntMatrix::from_columns(basis, ambient.rank());
    }

    IntMatrix gram() const { return gram_of(ambient, basis_matrix()); }

    QuadLattice lattice(std::string label = {}) const { return QuadLattice(gram(), std::move(label)); }
};

inline Sublattice make_sublattice(const QuadLattice& ambient, std::vector<LatticeVector> basis)
{
    for (const auto& v : basis)
        check_dimension(ambient, v.size());
    Sublattice s{ambient, std::move(basis)};
    if (s.rank() > 0 && rank_of(s.basis_matrix()) != s.rank())
        fail(ErrorCode::BadInput, "sublattice basis is linearly dependent");
    return s;
}

// Basis of ambient ∩ (Q-span of s). Rows of the coordinate matrix are put in
// Smith form U B V = D; the first rank rows of V^{-1} span the saturation.
inline Sublattice saturate(const Sublattice& s)
{
    if (s.rank() == 0)
        return s;
    IntMatrix rows = IntMatrix::from_rows(s.basis);
    SmithForm snf = smith_normal_form(rows);
    if (snf.rank != s.rank())
        fail(ErrorCode::BadInput, "sublattice basis is linearly dependent");
    std::vector<LatticeVector> out;
    for (std::size_t i = 0; i < s.rank(); ++i)
        out.push_back(snf.vinv.row(i));
    return Sublattice{s.ambient, std::move(out)};
}

inline Int saturation_index(const Sublattice& s)
{
    if (s.rank() == 0)
        return 1;
    SmithForm snf = smith_normal_form(IntMatrix::from_rows(s.basis));
    if (snf.rank != s.rank())
        fail(ErrorCode::BadInput, "sublattice basis is linearly dependent");
    Int idx = 1;
    for (const auto& f : snf.invariant_factors())
        idx *= f;
    return idx;
}

inline bool is_primitive(const Sublattice& s) { return saturation_index(s) == 1; }

// Integer right kernel {x : m x = 0}, saturated.
inline std::vector<IntVec> integer_kernel(const IntMatrix& m)
{
    SmithForm snf = smith_normal_form(m);
    std::vector<IntVec> ker;
    for (std::size_t j = snf.rank; j < m.cols(); ++j)
        ker.push_back(snf.v.column(j));
    return ker;
}

inline Sublattice orthogonal_complement(const Sublattice& s)
{
    const std::size_t n = s.ambient.rank();
    if (s.rank() == 0) {
        std::vector<LatticeVector> all;
        for (std::size_t i = 0; i < n; ++i) {
            LatticeVector e(n, 0);
            e[i] = 1;
            all.push_back(e);
        }
        return Sublattice{s.ambient, all};
    }
    IntMatrix constraints = IntMatrix::from_rows(s.basis) * s.ambient.gram();
    return Sublattice{s.ambient, integer_kernel(constraints)};
}

// Whether two sublattices of the same ambient span the same group.
inline bool same_lattice(const Sublattice& a, const Sublattice& b)
{
    if (a.rank() != b.rank())
        return false;
    if (a.rank() == 0)
        return true;
    // a ⊆ b and b ⊆ a via rational coordinates that must be integral.
    auto contained = [](const Sublattice& x, const Sublattice& y) {
        RatMatrix by = to_rational(y.basis_matrix());
        // Solve by * c = v using the normal equations on a full-column-rank matrix.
        RatMatrix normal = by.transpose() * by;
        RatMatrix inv = inverse(normal);
        for (const auto& v : x.basis) {
            RatVec c = inv * (by.transpose() * to_rational(v));
            for (const auto& ci : c)
                if (ci.get_den() != 1)
                    return false;
            if (by * c != to_rational(v))
                return false;
        }
        return true;
    };
    return contained(a, b) && contained(b, a);
}

// Row-style Hermite normal form of the span of `rows`: echelon, positive
// pivots, entries above each pivot reduced into [0, pivot). Zero rows dropped.
inline std::vector<IntVec> hermite_basis(std::vector<IntVec> rows)
{
    if (rows.empty())
        return rows;
    const std::size_t n = rows.front().size();
    std::size_t top = 0;
    for (std::size_t col = 0; col < n && top < rows.size(); ++col) {
        for (;;) {
            std::size_t best = rows.size();
            for (std::size_t i = top; i < rows.size(); ++i)
                if (rows[i][col] != 0 && (best == rows.size() || abs(rows[i][col]) < abs(rows[best][col])))
                    best = i;
            if (best == rows.size())
                break;
            std::swap(rows[top], rows[best]);
            bool done = true;
            for (std::size_t i = top + 1; i < rows.size(); ++i) {
                if (rows[i][col] == 0)
                    continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), rows[i][col].get_mpz_t(), rows[top][col].get_mpz_t());
                for (std::size_t j = col; j < n; ++j)
                    rows[i][j] -= q * rows[top][j];
                if (rows[i][col] != 0)
                    done = false;
            }
            if (done)
                break;
        }
        if (top < rows.size() && rows[top][col] != 0) {
            if (rows[top][col] < 0)
                for (auto& x : rows[top])
                    x = -x;
            for (std::size_t i = 0; i < top; ++i) {
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), rows[i][col].get_mpz_t(), rows[top][col].get_mpz_t());
                if (q != 0)
                    for (std::size_t j = col; j < n; ++j)
                        rows[i][j] -= q * rows[top][j];
            }
            ++top;
        }
    }
    rows.resize(top);
    return rows;
}

// LLL-reduced basis (delta = 3/4) of the span of linearly independent `rows`
// under the standard inner product of coordinates.
inline std::vector<IntVec> lll_reduce(std::vector<IntVec> rows)
{
    const std::size_t k = rows.size();
    if (k < 2)
        return rows;
    std::vector<std::vector<Rat>> mu(k, std::vector<Rat>(k, Rat(0)));
    std::vector<Rat> norm(k);
    auto gram_schmidt = [&] {
        std::vector<std::vector<Rat>> star(k);
        for (std::size_t i = 0; i < k; ++i) {
            star[i].assign(rows[i].begin(), rows[i].end());
            for (std::size_t j = 0; j < i; ++j) {
                Rat d = 0;
                for (std::size_t t = 0; t < rows[i].size(); ++t)
                    d += Rat(rows[i][t]) * star[j][t];
                mu[i][j] = d / norm[j];
                for (std::size_t t = 0; t < star[i].size(); ++t)
                    star[i][t] -= mu[i][j] * star[j][t];
            }
            norm[i] = 0;
            for (const auto& x : star[i])
                norm[i] += x * x;
        }
    };
    gram_schmidt();
    std::size_t i = 1;
    while (i < k) {
        for (std::size_t j = i; j-- > 0;) {
            const Rat& m = mu[i][j];
            Int q = m.get_num() * 2 + m.get_den();
            mpz_fdiv_q(q.get_mpz_t(), q.get_mpz_t(), Int(2 * m.get_den()).get_mpz_t());
            if (q == 0)
                continue;
            for (std::size_t t = 0; t < rows[i].size(); ++t)
                rows[i][t] -= q * rows[j][t];
            for (std::size_t l = 0; l <= j; ++l)
                mu[i][l] -= Rat(q) * (l == j ? Rat(1) : mu[j][l]);
        }
        if (norm[i] >= (Rat(3, 4) - mu[i][i - 1] * mu[i][i - 1]) * norm[i - 1]) {
            ++i;
        } else {
            std::swap(rows[i], rows[i - 1]);
            gram_schmidt();
            i = std::max<std::size_t>(i - 1, 1);
        }
    }
    return rows;
}

// Canonical representative of x modulo m in [0, m).
inline Rat reduce_mod(const Rat& x, const Int& m)
{
    Rat q = x / Rat(m);
    Int fl;
    mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    Rat r = x - Rat(fl * m);
    r.canonicalize();
    return r;
}

// Dual quotient L^∨/L with its torsion bilinear and quadratic forms.
struct DiscriminantGroup {
    IntVec orders;                // invariant factors > 1, d_1 | d_2 | ...
    std::vector<RatVec> generators; // lifts to L ⊗ Q, in lattice coordinates
    RatMatrix bilinear;           // b(g_i, g_j) mod 1, in [0, 1)
    RatVec quadratic;             // q(g_i) mod 2 (even L) or mod 1 (odd L)
    bool even_lattice = true;

    Int order() const
    {
        Int o = 1;
        for (const auto& d : orders)
            o *= d;
        return o;
    }
    bool trivial() const { return orders.empty(); }
    bool has_two_torsion() const
    {
        for (const auto& d : orders)
            if (mpz_even_p(d.get_mpz_t()))
                return true;
        return false;
    }
};

inline DiscriminantGroup discriminant_group(const QuadLattice& l)
{
    const IntMatrix& g = l.gram();
    SmithForm snf = smith_normal_form(g);
    if (snf.rank != l.rank())
        fail(ErrorCode::DegenerateLattice, "discriminant group of a degenerate lattice");
    // G^{-1} = V D^{-1} U, so L^∨ = G^{-1} Z^n = V D^{-1} Z^n.
    DiscriminantGroup dg;
    dg.even_lattice = l.even();
    const Int qmod = dg.even_lattice ? Int(2) : Int(1);
    for (std::size_t i = 0; i < l.rank(); ++i) {
        const Int& di = snf.d(i, i);
        if (di == 1)
            continue;
        dg.orders.push_back(di);
        RatVec gen;
        for (const auto& x : snf.v.column(i)) {
            Rat y(x, di);
            y.canonicalize();
            gen.push_back(y);
        }
        dg.generators.push_back(std::move(gen));
    }
    const std::size_t k = dg.generators.size();
    RatMatrix gq = to_rational(g);
    dg.bilinear = RatMatrix(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j)
            dg.bilinear(i, j) = reduce_mod(rational_pairing(gq, dg.generators[i], dg.generators[j]), Int(1));
        dg.quadratic.push_back(reduce_mod(rational_pairing(gq, dg.generators[i], dg.generators[i]), qmod));
    }
    return dg;
}

} // namespace qforge
