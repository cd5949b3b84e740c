// Copyright 2026 The iALS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ials/errors.hpp"
#include "ials/parallel.hpp"

namespace ials {

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_) {
            throw DimensionMismatch("DenseMatrix: values size " + std::to_string(values_.size()) +
                                    " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Symmetric matrix in full row-major storage. Mutation goes through
/// set() or through lower-triangle writes followed by symmetrize().
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t dim) : dim_(dim), values_(dim * dim, 0.0) {}

    std::size_t dim() const { return dim_; }

    double operator()(std::size_t r, std::size_t c) const { return values_[r * dim_ + c]; }

    void set(std::size_t r, std::size_t c, double v) {
        values_[r * dim_ + c] = v;
        values_[c * dim_ + r] = v;
    }

    std::span<const double> values() const { return values_; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * dim_, dim_}; }

    /// Raw storage. Only the lower triangle is meaningful until symmetrize().
    double* data() { return values_.data(); }

    /// Copies the lower triangle onto the upper one.
    void symmetrize() {
        for (std::size_t r = 0; r < dim_; ++r) {
            for (std::size_t c = 0; c < r; ++c) values_[c * dim_ + r] = values_[r * dim_ + c];
        }
    }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) t += values_[i * dim_ + i];
        return t;
    }

    friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

namespace detail {

inline double dot_n(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

/// Accumulates the Gram matrix of a small set of rows into the lower
/// triangle of a d×d row-major buffer. Rows are gathered in tiles and
/// transposed so the inner products run over contiguous memory.
class GramAccumulator {
public:
    static constexpr std::size_t kTile = 128;

    explicit GramAccumulator(std::size_t dim) : dim_(dim), tile_(dim * kTile) {}

    std::size_t dim() const { return dim_; }

    /// Adds row·rowᵀ for the next row; flush() must follow the last add.
    void add(std::span<const double> row, double* lower) {
        assert(row.size() == dim_);
        for (std::size_t r = 0; r < dim_; ++r) tile_[r * kTile + filled_] = row[r];
        if (++filled_ == kTile) flush(lower);
    }

    void flush(double* lower) {
        if (filled_ == 0) return;
        for (std::size_t r = 0; r < dim_; ++r) {
            const double* xr = tile_.data() + r * kTile;
            double* out = lower + r * dim_;
            for (std::size_t c = 0; c <= r; ++c) {
                out[c] += detail::dot_n(xr, tile_.data() + c * kTile, filled_);
            }
        }
        filled_ = 0;
    }

private:
    std::size_t dim_;
    std::size_t filled_ = 0;
    std::vector<double> tile_;
};

/// MᵀM for an n×d matrix. Rows are reduced in fixed-size slabs whose partial
/// sums are combined in slab order, so the result does not depend on the
/// number of threads.
inline SymmetricMatrix gramian(const DenseMatrix& m) {
    const std::size_t d = m.cols();
    constexpr std::size_t kSlab = 8192;
    const std::size_t n = m.rows();
    const std::size_t slabs = (n + kSlab - 1) / kSlab;
    std::vector<std::vector<double>> partial(slabs);
    parallel_for(slabs, [&](std::size_t begin, std::size_t end) {
        GramAccumulator acc(d);
        for (std::size_t s = begin; s < end; ++s) {
            partial[s].assign(d * d, 0.0);
            const std::size_t hi = std::min(n, (s + 1) * kSlab);
            for (std::size_t r = s * kSlab; r < hi; ++r) acc.add(m.row(r), partial[s].data());
            acc.flush(partial[s].data());
        }
    });
    SymmetricMatrix g(d);
    double* out = g.data();
    for (const auto& p : partial) {
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c <= r; ++c) out[r * d + c] += p[r * d + c];
        }
    }
    g.symmetrize();
    return g;
}

namespace detail {

// In-place Cholesky on the lower triangle of a row-major d×d buffer.
inline bool cholesky_lower(double* a, std::size_t d) {
    for (std::size_t j = 0; j < d; ++j) {
        double* rj = a + j * d;
        const double pivot = rj[j] - dot_n(rj, rj, j);
        if (!(pivot > 0.0) || !std::isfinite(pivot)) return false;
        const double ljj = std::sqrt(pivot);
        rj[j] = ljj;
        for (std::size_t i = j + 1; i < d; ++i) {
            double* ri = a + i * d;
            ri[j] = (ri[j] - dot_n(ri, rj, j)) / ljj;
        }
    }
    return true;
}

inline void cholesky_substitute(const double* l, std::size_t d, double* x) {
    for (std::size_t i = 0; i < d; ++i) {
        const double* ri = l + i * d;
        x[i] = (x[i] - dot_n(ri, x, i)) / ri[i];
    }
    for (std::size_t i = d; i-- > 0;) {
        double s = x[i];
        for (std::size_t k = i + 1; k < d; ++k) s -= l[k * d + i] * x[k];
        x[i] = s / l[i * d + i];
    }
}

}  // namespace detail

/// Reusable Cholesky solver for systems given by their lower triangle.
/// Retries with diagonal jitter 1e-10·trace/d (×10 each time, three
/// retries) before giving up with NotPositiveDefinite.
class SpdSolver {
public:
    static constexpr int kMaxRetries = 3;

    explicit SpdSolver(std::size_t dim) : dim_(dim), work_(dim * dim) {}

    /// Solves A x = rhs in place; `lower` holds A's lower triangle and is
    /// left untouched.
    void solve(const double* lower, std::span<double> rhs) {
        const std::size_t d = dim_;
        assert(rhs.size() == d);
        double trace = 0.0;
        for (std::size_t i = 0; i < d; ++i) trace += lower[i * d + i];
        double jitter = 0.0;
        for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
            std::copy(lower, lower + d * d, work_.begin());
            if (attempt > 0) {
                jitter = attempt == 1 ? 1e-10 * trace / static_cast<double>(d) : jitter * 10.0;
                for (std::size_t i = 0; i < d; ++i) work_[i * d + i] += jitter;
            }
            if (detail::cholesky_lower(work_.data(), d)) {
                detail::cholesky_substitute(work_.data(), d, rhs.data());
                return;
            }
        }
        throw NotPositiveDefinite("matrix is not positive definite (dim " + std::to_string(d) +
                                  ", trace " + std::to_string(trace) + ")");
    }

private:
    std::size_t dim_;
    std::vector<double> work_;
};

inline std::vector<double> solve_spd(const SymmetricMatrix& a, std::span<const double> b) {
    if (b.size() != a.dim()) throw DimensionMismatch("solve_spd: rhs length differs from matrix dim");
    std::vector<double> x(b.begin(), b.end());
    SpdSolver solver(a.dim());
    solver.solve(a.values().data(), x);
    return x;
}

}  // namespace ials
