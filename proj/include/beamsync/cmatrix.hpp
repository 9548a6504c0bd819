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

#ifndef BEAMSYNC_CMATRIX_H
#define BEAMSYNC_CMATRIX_H

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamsync
{
    using cplx = std::complex<double>;
    using CVec = std::vector<cplx>;

    // Dense complex matrix, row-major
    class CMat
    {
    public:
        CMat() = default;
        CMat(std::size_t rows, std::size_t cols);
        CMat(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
        CMat(std::initializer_list<std::initializer_list<cplx>> rows);

        static CMat identity(std::size_t n);
        static CMat diag(std::span<const cplx> d);
        static CMat column(std::span<const cplx> v);
        static CMat row(std::span<const cplx> v);

        std::size_t rows() const { return rows_; }
        std::size_t cols() const { return cols_; }
        std::size_t size() const { return data_.size(); }
        bool empty() const { return data_.empty(); }

        cplx &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
        const cplx &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

        std::span<cplx> data() { return data_; }
        std::span<const cplx> data() const { return data_; }
        std::span<cplx> row_span(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
        std::span<const cplx> row_span(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

        CVec col(std::size_t c) const;

        CMat transpose() const;
        CMat conj() const;
        CMat adjoint() const;

        double frobenius_norm() const;
        double frobenius_norm2() const;

        CMat &operator+=(const CMat &other);
        CMat &operator-=(const CMat &other);
        CMat &operator*=(cplx s);

        std::string shape() const;

    private:
        std::size_t rows_ = 0;
        std::size_t cols_ = 0;
        std::vector<cplx> data_;
    };

    CMat operator+(CMat a, const CMat &b);
    CMat operator-(CMat a, const CMat &b);
    CMat operator*(cplx s, CMat a);

    class DimensionError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // How an operand enters a product
    enum class Op
    {
        none,
        transpose,
        conj,
        adjoint
    };

    CMat matmul(const CMat &A, const CMat &B, Op opA = Op::none, Op opB = Op::none);
    CVec matvec(const CMat &A, std::span<const cplx> x, Op opA = Op::none);

    // Diagonal scalings without materializing the diagonal
    CMat scale_rows(std::span<const cplx> d, const CMat &A);
    CMat scale_cols(const CMat &A, std::span<const cplx> d);

    double norm(std::span<const cplx> v);
    double norm2(std::span<const cplx> v);
    cplx dotc(std::span<const cplx> a, std::span<const cplx> b); // a^H b
    cplx dotu(std::span<const cplx> a, std::span<const cplx> b); // a^T b
    CVec conj(std::span<const cplx> v);
    CVec normalized(std::span<const cplx> v);

    struct DominantDirection
    {
        CVec u;                  // unit left singular vector, canonical phase
        double sigma = 0.0;      // dominant singular value
        std::size_t iterations = 0;
        bool degenerate = false; // second singular value equal within tolerance
    };

    struct PowerIterationOptions
    {
        double tol = 1e-10;
        std::size_t max_iter = 10000;
        double degeneracy_tol = 1e-8;
        std::size_t degeneracy_iter = 50;
    };

    class NotConvergedError : public std::runtime_error
    {
    public:
        NotConvergedError(double residual, CVec last);
        double residual() const { return residual_; }
        const CVec &last_iterate() const { return last_; }

    private:
        double residual_;
        CVec last_;
    };

    // Power iteration on A A^H. An optional start vector replaces the default deterministic one.
    DominantDirection dominant_left_singular_vector(const CMat &A, const PowerIterationOptions &opt = {},
                                                    std::span<const cplx> start = {});

    // Rotate v so that its largest-magnitude entry is real and positive
    void canonicalize_phase(std::span<cplx> v);

    class NotPositiveDefiniteError : public std::runtime_error
    {
    public:
        explicit NotPositiveDefiniteError(std::size_t pivot);
        std::size_t pivot() const { return pivot_; }

    private:
        std::size_t pivot_;
    };

    // Solves H X = B for Hermitian positive-definite H via Cholesky
    CMat hpd_solve(const CMat &H, const CMat &B);

    bool is_finite(const CMat &A);
}

#endif
