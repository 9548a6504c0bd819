// SPDX-License-Identifier: Apache-2.0
//
// beamsync-sim: over-the-air phase and frequency synchronization between distributed APs
// Copyright (C) 2026 The beamsync-sim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "beamsync/cmatrix.hpp"

#include <algorithm>
#include <cmath>

namespace beamsync
{
    CMat::CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    CMat::CMat(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries))
    {
        if (data_.size() != rows * cols)
            throw DimensionError("CMat: entry count " + std::to_string(data_.size()) + " does not match " +
                                 std::to_string(rows) + "x" + std::to_string(cols));
    }

    CMat::CMat(std::initializer_list<std::initializer_list<cplx>> rows)
    {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto &r : rows)
        {
            if (r.size() != cols_)
                throw DimensionError("CMat: ragged initializer list");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    CMat CMat::identity(std::size_t n)
    {
        CMat I(n, n);
        for (std::size_t i = 0; i < n; ++i)
            I(i, i) = 1.0;
        return I;
    }

    CMat CMat::diag(std::span<const cplx> d)
    {
        CMat D(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            D(i, i) = d[i];
        return D;
    }

    CMat CMat::column(std::span<const cplx> v)
    {
        return CMat(v.size(), 1, std::vector<cplx>(v.begin(), v.end()));
    }

    CMat CMat::row(std::span<const cplx> v)
    {
        return CMat(1, v.size(), std::vector<cplx>(v.begin(), v.end()));
    }

    CVec CMat::col(std::size_t c) const
    {
        CVec v(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            v[r] = (*this)(r, c);
        return v;
    }

    CMat CMat::transpose() const
    {
        CMat T(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                T(c, r) = (*this)(r, c);
        return T;
    }

    CMat CMat::conj() const
    {
        CMat C = *this;
        for (auto &z : C.data_)
            z = std::conj(z);
        return C;
    }

    CMat CMat::adjoint() const
    {
        CMat T(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                T(c, r) = std::conj((*this)(r, c));
        return T;
    }

    double CMat::frobenius_norm2() const { return norm2(data_); }
    double CMat::frobenius_norm() const { return std::sqrt(frobenius_norm2()); }

    CMat &CMat::operator+=(const CMat &other)
    {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw DimensionError("CMat +=: shapes " + shape() + " and " + other.shape() + " differ");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += other.data_[i];
        return *this;
    }

    CMat &CMat::operator-=(const CMat &other)
    {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw DimensionError("CMat -=: shapes " + shape() + " and " + other.shape() + " differ");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= other.data_[i];
        return *this;
    }

    CMat &CMat::operator*=(cplx s)
    {
        for (auto &z : data_)
            z *= s;
        return *this;
    }

    std::string CMat::shape() const
    {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    CMat operator+(CMat a, const CMat &b) { return a += b; }
    CMat operator-(CMat a, const CMat &b) { return a -= b; }
    CMat operator*(cplx s, CMat a) { return a *= s; }

    namespace
    {
        CMat apply_op(const CMat &A, Op op)
        {
            switch (op)
            {
            case Op::transpose:
                return A.transpose();
            case Op::conj:
                return A.conj();
            case Op::adjoint:
                return A.adjoint();
            default:
                return A;
            }
        }

        bool swaps(Op op) { return op == Op::transpose || op == Op::adjoint; }
    }

    CMat matmul(const CMat &A, const CMat &B, Op opA, Op opB)
    {
        const std::size_t m = swaps(opA) ? A.cols() : A.rows();
        const std::size_t ka = swaps(opA) ? A.rows() : A.cols();
        const std::size_t kb = swaps(opB) ? B.cols() : B.rows();
        const std::size_t n = swaps(opB) ? B.rows() : B.cols();
        if (ka != kb)
            throw DimensionError("matmul: inner dimensions disagree for shapes " + A.shape() + " and " + B.shape());

        const CMat Aop = opA == Op::none ? CMat() : apply_op(A, opA);
        const CMat Bop = opB == Op::none ? CMat() : apply_op(B, opB);
        const CMat &a = opA == Op::none ? A : Aop;
        const CMat &b = opB == Op::none ? B : Bop;

        CMat C(m, n);
        for (std::size_t i = 0; i < m; ++i)
        {
            auto ci = C.row_span(i);
            for (std::size_t k = 0; k < ka; ++k)
            {
                const cplx aik = a(i, k);
                auto bk = b.row_span(k);
                for (std::size_t j = 0; j < n; ++j)
                    ci[j] += aik * bk[j];
            }
        }
        return C;
    }

    CVec matvec(const CMat &A, std::span<const cplx> x, Op opA)
    {
        const std::size_t m = swaps(opA) ? A.cols() : A.rows();
        const std::size_t k = swaps(opA) ? A.rows() : A.cols();
        if (k != x.size())
            throw DimensionError("matvec: shapes " + A.shape() + " and " + std::to_string(x.size()) + "x1 disagree");

        CVec y(m);
        if (!swaps(opA))
        {
            const bool cj = opA == Op::conj;
            for (std::size_t i = 0; i < m; ++i)
            {
                cplx s = 0.0;
                auto ai = A.row_span(i);
                for (std::size_t j = 0; j < k; ++j)
                    s += (cj ? std::conj(ai[j]) : ai[j]) * x[j];
                y[i] = s;
            }
        }
        else
        {
            const bool cj = opA == Op::adjoint;
            for (std::size_t r = 0; r < k; ++r)
            {
                auto ar = A.row_span(r);
                for (std::size_t i = 0; i < m; ++i)
                    y[i] += (cj ? std::conj(ar[i]) : ar[i]) * x[r];
            }
        }
        return y;
    }

    CMat scale_rows(std::span<const cplx> d, const CMat &A)
    {
        if (d.size() != A.rows())
            throw DimensionError("scale_rows: diagonal of length " + std::to_string(d.size()) + " vs " + A.shape());
        CMat B = A;
        for (std::size_t r = 0; r < B.rows(); ++r)
            for (auto &z : B.row_span(r))
                z *= d[r];
        return B;
    }

    CMat scale_cols(const CMat &A, std::span<const cplx> d)
    {
        if (d.size() != A.cols())
            throw DimensionError("scale_cols: diagonal of length " + std::to_string(d.size()) + " vs " + A.shape());
        CMat B = A;
        for (std::size_t r = 0; r < B.rows(); ++r)
        {
            auto br = B.row_span(r);
            for (std::size_t c = 0; c < B.cols(); ++c)
                br[c] *= d[c];
        }
        return B;
    }

    double norm2(std::span<const cplx> v)
    {
        double s = 0.0;
        for (const auto &z : v)
            s += std::norm(z);
        return s;
    }

    double norm(std::span<const cplx> v) { return std::sqrt(norm2(v)); }

    cplx dotc(std::span<const cplx> a, std::span<const cplx> b)
    {
        if (a.size() != b.size())
            throw DimensionError("dotc: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
        cplx s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += std::conj(a[i]) * b[i];
        return s;
    }

    cplx dotu(std::span<const cplx> a, std::span<const cplx> b)
    {
        if (a.size() != b.size())
            throw DimensionError("dotu: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
        cplx s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += a[i] * b[i];
        return s;
    }

    CVec conj(std::span<const cplx> v)
    {
        CVec w(v.size());
        std::transform(v.begin(), v.end(), w.begin(), [](cplx z) { return std::conj(z); });
        return w;
    }

    CVec normalized(std::span<const cplx> v)
    {
        const double n = norm(v);
        if (n == 0.0)
            throw std::invalid_argument("normalized: zero vector");
        CVec w(v.begin(), v.end());
        for (auto &z : w)
            z /= n;
        return w;
    }

    NotConvergedError::NotConvergedError(double residual, CVec last)
        : std::runtime_error("power iteration did not converge, last residual " + std::to_string(residual)),
          residual_(residual), last_(std::move(last))
    {
    }

    void canonicalize_phase(std::span<cplx> v)
    {
        if (v.empty())
            return;
        std::size_t k = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (std::abs(v[i]) > std::abs(v[k]))
                k = i;
        const double mag = std::abs(v[k]);
        if (mag == 0.0)
            return;
        const cplx rot = std::conj(v[k]) / mag;
        for (auto &z : v)
            z *= rot;
        v[k] = std::abs(v[k]);
    }

    DominantDirection dominant_left_singular_vector(const CMat &A, const PowerIterationOptions &opt,
                                                    std::span<const cplx> start)
    {
        if (!(opt.tol > 0.0))
            throw std::invalid_argument("dominant_left_singular_vector: tol must be positive");
        if (A.empty() || A.frobenius_norm2() == 0.0)
            throw std::invalid_argument("dominant_left_singular_vector: zero matrix");

        const std::size_t n = A.rows();
        const CMat C = matmul(A, A, Op::none, Op::adjoint);

        CVec u;
        if (!start.empty())
        {
            if (start.size() != n)
                throw DimensionError("dominant_left_singular_vector: start vector length mismatch");
            u = normalized(start);
        }
        else
        {
            // Generic deterministic start: unlikely to be orthogonal to any eigenvector
            u.resize(n);
            for (std::size_t k = 0; k < n; ++k)
                u[k] = std::polar(1.0 + double(k) / double(n), 2.399963229728653 * double(k));
            u = normalized(matvec(C, u));
        }

        DominantDirection out;
        double residual = 0.0;
        bool converged = false;
        for (std::size_t it = 1; it <= opt.max_iter; ++it)
        {
            CVec v = matvec(C, u);
            const double nv = norm(v);
            if (nv == 0.0)
                throw std::invalid_argument("dominant_left_singular_vector: start vector in null space");
            const cplx overlap = dotc(u, v);
            const cplx align = std::abs(overlap) > 0.0 ? std::conj(overlap) / std::abs(overlap) : cplx(1.0);
            residual = 0.0;
            for (std::size_t k = 0; k < n; ++k)
            {
                v[k] *= align / nv;
                residual += std::norm(v[k] - u[k]);
            }
            residual = std::sqrt(residual);
            u = std::move(v);
            out.iterations = it;
            if (residual < opt.tol)
            {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw NotConvergedError(residual, u);

        canonicalize_phase(u);
        const double lambda1 = std::max(0.0, dotc(u, matvec(C, u)).real());
        out.sigma = std::sqrt(lambda1);

        if (opt.degeneracy_iter > 0 && n > 1)
        {
            // Power iteration on the deflated Gram matrix; its norm growth bounds the second eigenvalue from below
            CVec w(n);
            for (std::size_t k = 0; k < n; ++k)
                w[k] = std::polar(1.0, 1.1 * double(k * k) + 0.3);
            double lambda2 = 0.0;
            for (std::size_t it = 0; it < opt.degeneracy_iter; ++it)
            {
                const cplx p = dotc(u, w);
                for (std::size_t k = 0; k < n; ++k)
                    w[k] -= p * u[k];
                const double nw = norm(w);
                if (nw == 0.0)
                    break;
                for (auto &z : w)
                    z /= nw;
                w = matvec(C, w);
                const cplx q = dotc(u, w);
                for (std::size_t k = 0; k < n; ++k)
                    w[k] -= q * u[k];
                lambda2 = norm(w);
            }
            out.degenerate = lambda2 >= lambda1 * (1.0 - opt.degeneracy_tol);
        }

        out.u = std::move(u);
        return out;
    }

    NotPositiveDefiniteError::NotPositiveDefiniteError(std::size_t pivot)
        : std::runtime_error("hpd_solve: matrix is not positive definite at pivot " + std::to_string(pivot)),
          pivot_(pivot)
    {
    }

    CMat hpd_solve(const CMat &H, const CMat &B)
    {
        const std::size_t n = H.rows();
        if (H.cols() != n)
            throw DimensionError("hpd_solve: H must be square, got " + H.shape());
        if (B.rows() != n)
            throw DimensionError("hpd_solve: shapes " + H.shape() + " and " + B.shape() + " disagree");

        double scale = 0.0;
        for (const auto &z : H.data())
            scale = std::max(scale, std::abs(z));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                if (std::abs(H(i, j) - std::conj(H(j, i))) > 1e-10 * std::max(1.0, scale))
                    throw std::invalid_argument("hpd_solve: matrix is not Hermitian");

        // Lower Cholesky factor, H = L L^H
        CMat L(n, n);
        for (std::size_t j = 0; j < n; ++j)
        {
            double d = H(j, j).real();
            for (std::size_t k = 0; k < j; ++k)
                d -= std::norm(L(j, k));
            if (!(d > 1e-14))
                throw NotPositiveDefiniteError(j);
            const double ljj = std::sqrt(d);
            L(j, j) = ljj;
            for (std::size_t i = j + 1; i < n; ++i)
            {
                cplx s = H(i, j);
                for (std::size_t k = 0; k < j; ++k)
                    s -= L(i, k) * std::conj(L(j, k));
                L(i, j) = s / ljj;
            }
        }

        CMat X = B;
        for (std::size_t c = 0; c < X.cols(); ++c)
        {
            for (std::size_t i = 0; i < n; ++i)
            {
                cplx s = X(i, c);
                for (std::size_t k = 0; k < i; ++k)
                    s -= L(i, k) * X(k, c);
                X(i, c) = s / L(i, i).real();
            }
            for (std::size_t i = n; i-- > 0;)
            {
                cplx s = X(i, c);
                for (std::size_t k = i + 1; k < n; ++k)
                    s -= std::conj(L(k, i)) * X(k, c);
                X(i, c) = s / L(i, i).real();
            }
        }
        return X;
    }

    bool is_finite(const CMat &A)
    {
        return std::all_of(A.data().begin(), A.data().end(),
                           [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
    }
}
