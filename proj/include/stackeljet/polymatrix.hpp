#pragma once

#include <vector>

#include "spectral.hpp"

namespace stackeljet {

// Dense matrix of RationalExpr entries.
class PolyMatrix {
public:
    PolyMatrix() = default;
    PolyMatrix(int rows, int cols) : rows_(rows), cols_(cols), e_(size_t(rows) * cols) {}

    static PolyMatrix identity(int n) {
        PolyMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = RationalExpr(1);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    RationalExpr& operator()(int i, int j) { return e_[size_t(i) * cols_ + j]; }
    const RationalExpr& operator()(int i, int j) const { return e_[size_t(i) * cols_ + j]; }

    PolyMatrix operator+(const PolyMatrix& o) const {
        check_same(o);
        PolyMatrix out(rows_, cols_);
        for (size_t k = 0; k < e_.size(); ++k) out.e_[k] = e_[k] + o.e_[k];
        return out;
    }
    PolyMatrix operator-(const PolyMatrix& o) const {
        check_same(o);
        PolyMatrix out(rows_, cols_);
        for (size_t k = 0; k < e_.size(); ++k) out.e_[k] = e_[k] - o.e_[k];
        return out;
    }
    PolyMatrix operator*(const PolyMatrix& o) const {
        if (cols_ != o.rows_) throw std::domain_error("PolyMatrix: dimension mismatch");
        PolyMatrix out(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const RationalExpr& a = (*this)(i, k);
                if (a.is_zero()) continue;
                for (int j = 0; j < o.cols_; ++j) {
                    const RationalExpr& b = o(k, j);
                    if (!b.is_zero()) out(i, j) += a * b;
                }
            }
        return out;
    }
    PolyMatrix operator*(const RationalExpr& c) const {
        PolyMatrix out(rows_, cols_);
        for (size_t k = 0; k < e_.size(); ++k) out.e_[k] = e_[k] * c;
        return out;
    }

    PolyMatrix transpose() const {
        PolyMatrix out(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    friend bool operator==(const PolyMatrix& a, const PolyMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
        for (size_t k = 0; k < a.e_.size(); ++k)
            if (a.e_[k] != b.e_[k]) return false;
        return true;
    }
    friend bool operator!=(const PolyMatrix& a, const PolyMatrix& b) { return !(a == b); }

    // Cofactor expansion; meant for small symbolic oracles, not production use.
    RationalExpr det() const {
        if (rows_ != cols_) throw std::domain_error("PolyMatrix::det: not square");
        if (rows_ == 0) return RationalExpr(1);
        if (rows_ == 1) return (*this)(0, 0);
        RationalExpr out;
        int sign = 1;
        for (int j = 0; j < cols_; ++j) {
            const RationalExpr& a = (*this)(0, j);
            if (!a.is_zero()) {
                RationalExpr m = minor_at(0, j).det() * a;
                out += sign > 0 ? m : -m;
            }
            sign = -sign;
        }
        return out;
    }

    PolyMatrix minor_at(int i0, int j0) const {
        PolyMatrix out(rows_ - 1, cols_ - 1);
        for (int i = 0, r = 0; i < rows_; ++i) {
            if (i == i0) continue;
            for (int j = 0, c = 0; j < cols_; ++j) {
                if (j == j0) continue;
                out(r, c++) = (*this)(i, j);
            }
            ++r;
        }
        return out;
    }

    RationalExpr trace() const {
        RationalExpr out;
        for (int i = 0; i < std::min(rows_, cols_); ++i) out += (*this)(i, i);
        return out;
    }

private:
    void check_same(const PolyMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::domain_error("PolyMatrix: dimension mismatch");
    }
    int rows_ = 0, cols_ = 0;
    std::vector<RationalExpr> e_;
};

// Basis coefficients (V_1..V_N) of f(M) = V_1 M^{N-1} + ... + V_N Id for a
// companion matrix with characteristic polynomial sigma (monic, degree N) and
// a rational function f = fnum/fden of the matrix. Computed in the quotient
// ring K[mu]/(sigma); fden is inverted there (never by matrix inversion).
inline std::vector<RationalExpr> mat_apply_poly(const SpectralPoly& fnum,
                                                const SpectralPoly& fden,
                                                const SpectralPoly& sigma) {
    int N = sigma.degree();
    SpectralPoly g = quotient_reduce(fnum, sigma);
    if (!(fden == SpectralPoly(RationalExpr(1)))) {
        SpectralPoly inv = quotient_invert(fden, sigma);
        g = quotient_reduce(g * inv, sigma);
    }
    std::vector<RationalExpr> V(static_cast<size_t>(N));
    for (int i = 1; i <= N; ++i) V[size_t(i) - 1] = g.coeff(N - i);
    return V;
}

inline std::vector<RationalExpr> mat_apply_poly(const SpectralPoly& f, const SpectralPoly& sigma) {
    return mat_apply_poly(f, SpectralPoly(RationalExpr(1)), sigma);
}

} // namespace stackeljet
