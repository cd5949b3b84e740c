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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ials/linalg.hpp"
#include "support/oracles.hpp"

namespace ials {
namespace {

TEST(Gramian, IdentityRows) {
    DenseMatrix m(2, 2, {1, 0, 0, 1});
    auto g = gramian(m);
    EXPECT_EQ(g(0, 0), 1.0);
    EXPECT_EQ(g(0, 1), 0.0);
    EXPECT_EQ(g(1, 0), 0.0);
    EXPECT_EQ(g(1, 1), 1.0);
}

TEST(Gramian, HandComputed) {
    DenseMatrix m(2, 2, {1, 2, 3, 4});
    auto g = gramian(m);
    EXPECT_EQ(g(0, 0), 10.0);
    EXPECT_EQ(g(0, 1), 14.0);
    EXPECT_EQ(g(1, 0), 14.0);
    EXPECT_EQ(g(1, 1), 20.0);
}

TEST(Gramian, EmptyIsZero) {
    DenseMatrix m(0, 3);
    auto g = gramian(m);
    ASSERT_EQ(g.dim(), 3u);
    for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(Gramian, MatchesTripleLoopAndIsExactlySymmetric) {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(400), d = 1 + rng.below(12);
        auto m = gen::matrix(rng, n, d);
        auto g = gramian(m);
        auto ref = oracle::gramian(oracle::to_rows(m), d);
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                EXPECT_NEAR(g(a, b), ref[a][b], 1e-10 * std::max(1.0, std::abs(ref[a][b])));
                EXPECT_EQ(g(a, b), g(b, a));
            }
        }
    }
}

TEST(Gramian, IndependentOfThreadCount) {
    Rng rng(3);
    auto m = gen::matrix(rng, 20000, 5);
    set_num_threads(1);
    auto one = gramian(m);
    set_num_threads(4);
    auto four = gramian(m);
    set_num_threads(0);
    EXPECT_EQ(one, four);
}

TEST(SolveSpd, Identity) {
    SymmetricMatrix a(2);
    a.set(0, 0, 1);
    a.set(1, 1, 1);
    auto x = solve_spd(a, std::vector<double>{3, -1});
    EXPECT_DOUBLE_EQ(x[0], 3);
    EXPECT_DOUBLE_EQ(x[1], -1);
}

TEST(SolveSpd, Diagonal) {
    SymmetricMatrix a(2);
    a.set(0, 0, 2);
    a.set(1, 1, 4);
    auto x = solve_spd(a, std::vector<double>{2, 8});
    EXPECT_DOUBLE_EQ(x[0], 1);
    EXPECT_DOUBLE_EQ(x[1], 2);
}

TEST(SolveSpd, Dense2x2) {
    SymmetricMatrix a(2);
    a.set(0, 0, 4);
    a.set(0, 1, 2);
    a.set(1, 1, 3);
    auto x = solve_spd(a, std::vector<double>{6, 5});
    EXPECT_NEAR(x[0], 1, 1e-14);
    EXPECT_NEAR(x[1], 1, 1e-14);
}

TEST(SolveSpd, ResidualOnRandomPdSystems) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng.below(40);
        auto m = gen::matrix(rng, d + rng.below(20), d);
        auto g = gramian(m);
        SymmetricMatrix a(d);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c <= r; ++c) a.set(r, c, g(r, c) + (r == c ? 1e-3 : 0.0));
        }
        std::vector<double> b(d);
        for (auto& v : b) v = 2 * rng.uniform() - 1;
        auto x = solve_spd(a, b);
        double res = 0, nb = 0;
        for (std::size_t r = 0; r < d; ++r) {
            double s = -b[r];
            for (std::size_t c = 0; c < d; ++c) s += a(r, c) * x[c];
            res += s * s;
            nb += b[r] * b[r];
        }
        EXPECT_LE(std::sqrt(res), 1e-8 * std::max(1.0, std::sqrt(nb)));
    }
}

TEST(SolveSpd, NegativeDefiniteThrows) {
    SymmetricMatrix a(2);
    a.set(0, 0, -1);
    a.set(1, 1, 1);
    EXPECT_THROW(solve_spd(a, std::vector<double>{1, 1}), NotPositiveDefinite);
}

TEST(SolveSpd, ZeroMatrixThrows) {
    SymmetricMatrix a(3);
    EXPECT_THROW(solve_spd(a, std::vector<double>{1, 1, 1}), NotPositiveDefinite);
}

TEST(SolveSpd, JitterRescuesRoundoffSingularity) {
    // Rank-1 PSD matrix; jitter makes it factorizable.
    SymmetricMatrix a(2);
    a.set(0, 0, 1);
    a.set(0, 1, 1);
    a.set(1, 1, 1);
    auto x = solve_spd(a, std::vector<double>{1, 1});
    EXPECT_TRUE(std::isfinite(x[0]) && std::isfinite(x[1]));
}

TEST(DenseMatrix, RejectsWrongSize) {
    EXPECT_THROW(DenseMatrix(2, 2, std::vector<double>{1, 2, 3}), DimensionMismatch);
}

}  // namespace
}  // namespace ials
