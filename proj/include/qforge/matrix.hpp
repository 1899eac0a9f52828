#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "error.hpp"

namespace qforge {

using Int = mpz_class;
using Rat = mpq_class;

using IntVec = std::vector<Int>;
using RatVec = std::vector<Rat>;

// Dense row-major matrix over an exact ring (Int or Rat).
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
    Matrix(std::initializer_list<std::initializer_list<long>> init)
    {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                fail(ErrorCode::DimensionMismatch, "ragged matrix literal");
            for (long x : row)
                data_.emplace_back(x);
        }
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1;
        return m;
    }

    static Matrix from_rows(const std::vector<std::vector<T>>& rows)
    {
        if (rows.empty())
            return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_)
                fail(ErrorCode::DimensionMismatch, "ragged row list");
            for (std::size_t j = 0; j < m.cols_; ++j)
                m(i, j) = rows[i][j];
        }
        return m;
    }

    static Matrix from_columns(const std::vector<std::vector<T>>& cols, std::size_t nrows)
    {
        Matrix m(nrows, cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j].size() != nrows)
                fail(ErrorCode::DimensionMismatch, "column length mismatch");
            for (std::size_t i = 0; i < nrows; ++i)
                m(i, j) = cols[j][i];
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<T> row(std::size_t i) const
    {
        return std::vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
    }
    std::vector<T> column(std::size_t j) const
    {
        std::vector<T> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            c[i] = (*this)(i, j);
        return c;
    }
    void set_column(std::size_t j, const std::vector<T>& c)
    {
        for (std::size_t i = 0; i < rows_; ++i)
            (*this)(i, j) = c[i];
    }

    Matrix transpose() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const
    {
        Matrix b(nr, nc);
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nc; ++j)
                b(i, j) = (*this)(r0 + i, c0 + j);
        return b;
    }

    bool is_zero() const
    {
        return std::all_of(data_.begin(), data_.end(), [](const T& x) { return x == 0; });
    }

    bool is_symmetric() const
    {
        if (!square())
            return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if ((*this)(i, j) != (*this)(j, i))
                    return false;
        return true;
    }

    friend bool operator==(const Matrix& a, const Matrix& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b)
    {
        if (a.cols_ != b.rows_)
            fail(ErrorCode::DimensionMismatch, "matrix product shape");
        Matrix c(a.rows_, b.cols_);
        T acc;
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (aik == 0)
                    continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& v)
    {
        if (a.cols_ != v.size())
            fail(ErrorCode::DimensionMismatch, "matrix-vector product shape");
        std::vector<T> r(a.rows_, T(0));
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j)
                r[i] += a(i, j) * v[j];
        return r;
    }

    friend Matrix operator+(Matrix a, const Matrix& b)
    {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            fail(ErrorCode::DimensionMismatch, "matrix sum shape");
        for (std::size_t i = 0; i < a.data_.size(); ++i)
            a.data_[i] += b.data_[i];
        return a;
    }

    friend Matrix operator-(Matrix a, const Matrix& b)
    {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            fail(ErrorCode::DimensionMismatch, "matrix difference shape");
        for (std::size_t i = 0; i < a.data_.size(); ++i)
            a.data_[i] -= b.data_[i];
        return a;
    }

    void swap_rows(std::size_t a, std::size_t b)
    {
        for (std::size_t j = 0; j < cols_; ++j)
            std::swap((*this)(a, j), (*this)(b, j));
    }
    void swap_cols(std::size_t a, std::size_t b)
    {
        for (std::size_t i = 0; i < rows_; ++i)
            std::swap((*this)(i, a), (*this)(i, b));
    }
    // row[dst] += c * row[src]
    void add_row(std::size_t dst, std::size_t src, const T& c)
    {
        if (c == 0)
            return;
        for (std::size_t j = 0; j < cols_; ++j)
            (*this)(dst, j) += c * (*this)(src, j);
    }
    // col[dst] += c * col[src]
    void add_col(std::size_t dst, std::size_t src, const T& c)
    {
        if (c == 0)
            return;
        for (std::size_t i = 0; i < rows_; ++i)
            (*this)(i, dst) += c * (*this)(i, src);
    }
    void negate_row(std::size_t r)
    {
        for (std::size_t j = 0; j < cols_; ++j)
            (*this)(r, j) = -(*this)(r, j);
    }
    void negate_col(std::size_t c)
    {
        for (std::size_t i = 0; i < rows_; ++i)
            (*this)(i, c) = -(*this)(i, c);
    }

    std::string str() const
    {
        std::ostringstream os;
        os << '[';
        for (std::size_t i = 0; i < rows_; ++i) {
            os << (i ? ",[" : "[");
            for (std::size_t j = 0; j < cols_; ++j)
                os << (j ? "," : "") << (*this)(i, j);
            os << ']';
        }
        os << ']';
        return os.str();
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using IntMatrix = Matrix<Int>;
using RatMatrix = Matrix<Rat>;

inline RatMatrix to_rational(const IntMatrix& m)
{
    RatMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(i, j) = Rat(m(i, j));
    return r;
}

inline RatVec to_rational(const IntVec& v)
{
    RatVec r;
    r.reserve(v.size());
    for (const auto& x : v)
        r.emplace_back(x);
    return r;
}

inline Int lcm_of_denominators(const RatMatrix& m)
{
    Int l = 1;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), m(i, j).get_den_mpz_t());
    return l;
}

// Returns (scale, integer matrix) with m = integer / scale.
inline std::pair<Int, IntMatrix> clear_denominators(const RatMatrix& m)
{
    Int l = lcm_of_denominators(m);
    IntMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            Rat x = m(i, j) * l;
            r(i, j) = x.get_num();
        }
    return {l, r};
}

inline Int gcd_of(const IntVec& v)
{
    Int g = 0;
    for (const auto& x : v)
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    return g;
}

// Divides out the content; sign untouched.
inline IntVec primitive_part(IntVec v)
{
    Int g = gcd_of(v);
    if (g > 1)
        for (auto& x : v)
            x /= g;
    return v;
}

// Integer vector on the same rational line as v.
inline IntVec integral_direction(const RatVec& v)
{
    Int l = 1;
    for (const auto& x : v)
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    IntVec r;
    r.reserve(v.size());
    for (const auto& x : v) {
        Rat y = x * l;
        r.push_back(y.get_num());
    }
    return primitive_part(std::move(r));
}

inline Int determinant(const IntMatrix& a)
{
    if (!a.square())
        fail(ErrorCode::DimensionMismatch, "determinant of non-square matrix");
    const std::size_t n = a.rows();
    if (n == 0)
        return 1;
    // Bareiss fraction-free elimination.
    IntMatrix m = a;
    Int prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && m(p, k) == 0)
                ++p;
            if (p == n)
                return 0;
            m.swap_rows(k, p);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                Int t = m(i, j) * m(k, k) - m(i, k) * m(k, j);
                mpz_divexact(m(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
        prev = m(k, k);
    }
    Int d = m(n - 1, n - 1);
    return sign > 0 ? d : Int(-d);
}

inline Rat determinant(const RatMatrix& a)
{
    auto [scale, m] = clear_denominators(a);
    Rat d(determinant(m));
    Int s = 1;
    mpz_pow_ui(s.get_mpz_t(), scale.get_mpz_t(), a.rows());
    d /= Rat(s);
    d.canonicalize();
    return d;
}

inline std::size_t rank_of(const RatMatrix& a)
{
    RatMatrix m = a;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && m(p, c) == 0)
            ++p;
        if (p == m.rows())
            continue;
        m.swap_rows(r, p);
        for (std::size_t i = r + 1; i < m.rows(); ++i) {
            if (m(i, c) == 0)
                continue;
            Rat f = m(i, c) / m(r, c);
            m.add_row(i, r, Rat(-f));
        }
        ++r;
    }
    return r;
}

inline std::size_t rank_of(const IntMatrix& a) { return rank_of(to_rational(a)); }

inline RatMatrix inverse(const RatMatrix& a)
{
    if (!a.square())
        fail(ErrorCode::DimensionMismatch, "inverse of non-square matrix");
    const std::size_t n = a.rows();
    RatMatrix m = a;
    RatMatrix inv = RatMatrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m(p, c) == 0)
            ++p;
        if (p == n)
            fail(ErrorCode::DegenerateLattice, "singular matrix");
        m.swap_rows(c, p);
        inv.swap_rows(c, p);
        Rat piv = m(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            m(c, j) /= piv;
            inv(c, j) /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || m(i, c) == 0)
                continue;
            Rat f = m(i, c);
            m.add_row(i, c, Rat(-f));
            inv.add_row(i, c, Rat(-f));
        }
    }
    return inv;
}

inline RatMatrix inverse(const IntMatrix& a) { return inverse(to_rational(a)); }

// Smith normal form U * A * V = D with U, V unimodular. vinv = V^{-1} is
// maintained alongside so saturations can read it off directly.
struct SmithForm {
    IntMatrix d;
    IntMatrix u;
    IntMatrix v;
    IntMatrix vinv;
    std::size_t rank = 0;

    // Nonzero invariant factors d_1 | d_2 | ...
    IntVec invariant_factors() const
    {
        IntVec f;
        for (std::size_t i = 0; i < rank; ++i)
            f.push_back(d(i, i));
        return f;
    }
};

inline SmithForm smith_normal_form(const IntMatrix& a)
{
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    SmithForm s{a, IntMatrix::identity(m), IntMatrix::identity(n), IntMatrix::identity(n), 0};
    IntMatrix& d = s.d;

    auto col_add = [&](std::size_t dst, std::size_t src, const Int& c) {
        d.add_col(dst, src, c);
        s.v.add_col(dst, src, c);
        s.vinv.add_row(src, dst, Int(-c));
    };
    auto col_swap = [&](std::size_t x, std::size_t y) {
        d.swap_cols(x, y);
        s.v.swap_cols(x, y);
        s.vinv.swap_rows(x, y);
    };
    auto row_add = [&](std::size_t dst, std::size_t src, const Int& c) {
        d.add_row(dst, src, c);
        s.u.add_row(dst, src, c);
    };
    auto row_swap = [&](std::size_t x, std::size_t y) {
        d.swap_rows(x, y);
        s.u.swap_rows(x, y);
    };

    std::size_t k = 0;
    for (; k < std::min(m, n); ++k) {
        // Pivot: smallest nonzero magnitude in the trailing block.
        for (;;) {
            bool found = false;
            std::size_t pi = k, pj = k;
            Int best;
            for (std::size_t i = k; i < m; ++i)
                for (std::size_t j = k; j < n; ++j) {
                    if (d(i, j) == 0)
                        continue;
                    Int mag = abs(d(i, j));
                    if (!found || mag < best) {
                        found = true;
                        best = mag;
                        pi = i;
                        pj = j;
                    }
                }
            if (!found) {
                s.rank = k;
                goto done;
            }
            row_swap(k, pi);
            col_swap(k, pj);

            bool clean = true;
            Int q;
            for (std::size_t i = k + 1; i < m; ++i) {
                if (d(i, k) == 0)
                    continue;
                mpz_fdiv_q(q.get_mpz_t(), d(i, k).get_mpz_t(), d(k, k).get_mpz_t());
                row_add(i, k, Int(-q));
                if (d(i, k) != 0)
                    clean = false;
            }
            for (std::size_t j = k + 1; j < n; ++j) {
                if (d(k, j) == 0)
                    continue;
                mpz_fdiv_q(q.get_mpz_t(), d(k, j).get_mpz_t(), d(k, k).get_mpz_t());
                col_add(j, k, Int(-q));
                if (d(k, j) != 0)
                    clean = false;
            }
            if (!clean)
                continue;

            // Divisibility of the trailing block by the pivot.
            bool divides = true;
            for (std::size_t i = k + 1; i < m && divides; ++i)
                for (std::size_t j = k + 1; j < n; ++j)
                    if (!mpz_divisible_p(d(i, j).get_mpz_t(), d(k, k).get_mpz_t())) {
                        row_add(k, i, Int(1));
                        divides = false;
                        break;
                    }
            if (divides)
                break;
        }
        if (d(k, k) < 0) {
            d.negate_row(k);
            s.u.negate_row(k);
        }
    }
    s.rank = k;
done:
    return s;
}

} // namespace qforge
