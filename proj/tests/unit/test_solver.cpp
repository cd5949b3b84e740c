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

#include "ials/solver.hpp"
#include "support/oracles.hpp"

namespace ials {
namespace {

Hyperparameters small_hp(std::size_t d, double alpha0, double lambda, double nu) {
    Hyperparameters hp;
    hp.dim = d;
    hp.alpha0 = alpha0;
    hp.lambda = lambda;
    hp.nu = nu;
    hp.iterations = 5;
    hp.sigma_star = 0.5;
    return hp;
}

TEST(RegularizationWeight, Examples) {
    EXPECT_EQ(regularization_weight(17, 40, 0.3, 0.0, 0.25), 0.25);
    EXPECT_DOUBLE_EQ(regularization_weight(3, 20, 0.1, 1.0, 0.01), 0.05);
    EXPECT_DOUBLE_EQ(regularization_weight(4, 100, 0.0, 0.5, 0.01), 0.02);
}

TEST(EffectiveLambda, IdentityWhenNuEqualsReference) {
    Rng rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        auto data = gen::interactions(rng, 5 + rng.below(20), 5 + rng.below(20), 0.3);
        const double nu = rng.uniform();
        EXPECT_EQ(effective_lambda(0.037, nu, nu, data, rng.uniform()), 0.037);
    }
}

TEST(EffectiveLambda, HandComputedRatios) {
    auto one = InteractionSet::from_pairs(1, 1, {{0, 0}});
    EXPECT_EQ(effective_lambda(0.2, 1.0, 0.0, one, 0.0), 0.2);
    // Users {1,3}, items {1,3}: masses 2+2 at nu*=0 and 4+4 at nu=1.
    std::vector<std::size_t> users{1, 3}, items{1, 3};
    EXPECT_EQ(effective_lambda(0.1, 1.0, 0.0, users, items, 0.0), 0.05);
}

TEST(EffectiveLambda, ResolvedFromHyperparameters) {
    Rng rng(2);
    auto data = gen::interactions(rng, 10, 12, 0.3);
    auto hp = small_hp(2, 0.1, 1.0, 1.0);
    hp.lambda.reset();
    hp.lambda_star = 0.3;
    hp.nu_star = 0.0;
    double mass0 = 0, mass1 = 0;
    for (std::size_t u = 0; u < 10; ++u) {
        mass0 += 1;
        mass1 += data.items_of(u).size() + 0.1 * 12;
    }
    for (std::size_t i = 0; i < 12; ++i) {
        mass0 += 1;
        mass1 += data.users_of(i).size() + 0.1 * 10;
    }
    EXPECT_NEAR(resolve_lambda(hp, data), 0.3 * mass0 / mass1, 1e-15);
}

TEST(SolveEntity, ScalarClosedForms) {
    DenseMatrix h(1, 1, {1.0});
    SymmetricMatrix g(1);
    g.set(0, 0, 1.0);
    std::vector<Index> hist{0};
    for (double a : {0.0, 0.1, 0.5, 3.0}) {
        // argmin (x-1)^2 + a x^2 = 1/(1+a)
        EXPECT_NEAR(solve_entity(hist, h, g, a, 0.0)[0], 1.0 / (1.0 + a), 1e-15);
    }
    EXPECT_EQ(solve_entity({}, h, g, 0.5, 0.1)[0], 0.0);
}

TEST(SolveEntity, MatchesBruteForceSystem) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(10), d = 1 + rng.below(5);
        auto fixed = gen::matrix(rng, n, d);
        std::vector<Index> hist;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.uniform() < 0.4) hist.push_back(Index(i));
        }
        const double alpha0 = std::vector<double>{0.0, 0.1, 1.0}[rng.below(3)];
        const double reg = 0.05 + rng.uniform();
        auto x = solve_entity(hist, fixed, gramian(fixed), alpha0, reg);
        auto ref = oracle::naive_entity_solution(fixed, hist, alpha0, reg);
        if (hist.empty()) ref.assign(d, 0.0);
        for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(x[k], ref[k], 1e-8);
    }
}

TEST(SolveEntity, AssembledSystemEqualsNaive) {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.below(10), d = 1 + rng.below(4);
        auto fixed = gen::matrix(rng, n, d);
        std::vector<Index> hist;
        std::vector<bool> observed(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.uniform() < 0.5) {
                hist.push_back(Index(i));
                observed[i] = true;
            }
        }
        const double alpha0 = rng.uniform(), reg = rng.uniform();
        EntitySolver solver(d);
        solver.assemble(hist, fixed, gramian(fixed), alpha0, reg);
        auto [a, b] = oracle::naive_system(fixed, observed, alpha0, reg);
        for (std::size_t r = 0; r < d; ++r) {
            EXPECT_NEAR(solver.rhs()[r], b[r], 1e-12);
            for (std::size_t c = 0; c <= r; ++c) {
                EXPECT_NEAR(solver.lower()[r * d + c], a[r][c], 1e-10 * std::max(1.0, std::abs(a[r][c])));
            }
        }
    }
}

TEST(SolveEntity, LargeDimensionAgainstBruteForce) {
    Rng rng(5);
    const std::size_t n = 300, d = 40;
    auto fixed = gen::matrix(rng, n, d, 0.3);
    std::vector<Index> hist;
    for (std::size_t i = 0; i < n; i += 3) hist.push_back(Index(i));
    auto x = solve_entity(hist, fixed, gramian(fixed), 0.2, 0.5);
    auto ref = oracle::naive_entity_solution(fixed, hist, 0.2, 0.5);
    for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(x[k], ref[k], 1e-9);
}

TEST(UpdateUsers, SolvesNormalEquationsAndMatchesNaive) {
    Rng rng(6);
    auto data = gen::interactions(rng, 8, 6, 0.3);
    auto hp = small_hp(3, 0.1, 0.05, 1.0);
    auto m = init_model(8, 6, 3, 0.5, 7);
    const double before = compute_losses(m, data, hp).total;
    update_users(m, data, hp);
    const double after = compute_losses(m, data, hp).total;
    EXPECT_LE(after, before * (1 + 1e-9));
    for (std::size_t u = 0; u < 8; ++u) {
        const double reg = oracle::lambda_of(data.items_of(u).size(), 6, 0.1, 1.0, 0.05);
        std::vector<bool> observed(6, false);
        for (auto i : data.items_of(u)) observed[i] = true;
        auto [a, b] = oracle::naive_system(m.items, observed, 0.1, reg);
        auto ref = oracle::solve(a, b);
        double res = 0, nb = 0;
        for (std::size_t r = 0; r < 3; ++r) {
            EXPECT_NEAR(m.users(u, r), ref[r], 1e-8);
            double s = -b[r];
            for (std::size_t c = 0; c < 3; ++c) s += a[r][c] * m.users(u, c);
            res += s * s;
            nb += b[r] * b[r];
        }
        EXPECT_LE(std::sqrt(res), 1e-8 * std::max(1.0, std::sqrt(nb)));
    }
}

TEST(UpdateItems, MirrorsUpdateUsers) {
    Rng rng(8);
    auto data = gen::interactions(rng, 8, 6, 0.3);
    auto hp = small_hp(3, 0.3, 0.02, 0.5);
    auto m = init_model(8, 6, 3, 0.5, 9);
    const double before = compute_losses(m, data, hp).total;
    update_items(m, data, hp);
    EXPECT_LE(compute_losses(m, data, hp).total, before * (1 + 1e-9));
    for (std::size_t i = 0; i < 6; ++i) {
        const double reg = oracle::lambda_of(data.users_of(i).size(), 8, 0.3, 0.5, 0.02);
        auto ref = oracle::naive_entity_solution(m.users, data.users_of(i), 0.3, reg);
        for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(m.items(i, r), ref[r], 1e-8);
    }
}

TEST(UpdateUsers, DegenerateUserGetsZero) {
    auto data = InteractionSet::from_pairs(3, 3, {{0, 0}, {0, 1}, {2, 2}});
    for (double alpha0 : {0.0, 0.1}) {
        auto hp = small_hp(2, alpha0, 0.1, 1.0);
        auto m = init_model(3, 3, 2, 0.5, 1);
        update_users(m, data, hp);
        EXPECT_EQ(m.users(1, 0), 0.0);
        EXPECT_EQ(m.users(1, 1), 0.0);
    }
}

TEST(UpdateUsers, NuZeroGivesUniformRegularization) {
    Rng rng(10);
    auto data = gen::interactions(rng, 6, 5, 0.4);
    auto hp = small_hp(2, 0.2, 0.3, 0.0);
    auto m = init_model(6, 5, 2, 0.5, 3);
    update_users(m, data, hp);
    for (std::size_t u = 0; u < 6; ++u) {
        auto ref = oracle::naive_entity_solution(m.items, data.items_of(u), 0.2, 0.3);
        for (std::size_t r = 0; r < 2; ++r) EXPECT_NEAR(m.users(u, r), ref[r], 1e-10);
    }
}

TEST(ComputeLosses, ZeroModel) {
    auto data = InteractionSet::from_pairs(3, 4, {{0, 0}, {1, 2}, {2, 3}, {2, 1}});
    FactorModel m{DenseMatrix(3, 2), DenseMatrix(4, 2)};
    auto r = compute_losses(m, data, small_hp(2, 0.5, 0.1, 1.0));
    EXPECT_EQ(r.observed, 4.0);
    EXPECT_EQ(r.implicit, 0.0);
    EXPECT_EQ(r.regularizer, 0.0);
    EXPECT_EQ(r.total, 4.0);
}

TEST(ComputeLosses, SinglePerfectPair) {
    auto data = InteractionSet::from_pairs(1, 1, {{0, 0}});
    FactorModel m{DenseMatrix(1, 1, {1.0}), DenseMatrix(1, 1, {1.0})};
    auto hp = small_hp(1, 0.7, 1.0, 1.0);
    auto r = compute_losses(m, data, hp, 0.0);
    EXPECT_EQ(r.observed, 0.0);
    EXPECT_DOUBLE_EQ(r.implicit, 0.7);
    EXPECT_EQ(r.regularizer, 0.0);
}

TEST(ComputeLosses, MatchesDoubleLoop) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto data = gen::interactions(rng, 5, 4, 0.4);
        const double alpha0 = rng.uniform(), lambda = rng.uniform(), nu = rng.uniform();
        auto hp = small_hp(2, alpha0, lambda, nu);
        FactorModel m{gen::matrix(rng, 5, 2), gen::matrix(rng, 4, 2)};
        auto r = compute_losses(m, data, hp);
        auto ref = oracle::full_loss(m, data, alpha0, nu, lambda);
        EXPECT_NEAR(r.implicit, ref.implicit, 1e-10 * ref.implicit);
        EXPECT_NEAR(r.observed, ref.observed, 1e-10 * ref.observed);
        EXPECT_NEAR(r.regularizer, ref.regularizer, 1e-10 * ref.regularizer);
        EXPECT_NEAR(r.total, r.observed + r.implicit + r.regularizer, 1e-12 * r.total);
    }
}

TEST(Train, ZeroIterationsReturnsInitialization) {
    Rng rng(12);
    auto data = gen::interactions(rng, 7, 5, 0.3);
    auto hp = small_hp(3, 0.1, 0.1, 1.0);
    hp.iterations = 0;
    hp.seed = 99;
    auto res = train(data, hp);
    EXPECT_EQ(res.model, init_model(7, 5, 3, 0.5, 99));
    EXPECT_TRUE(res.losses.empty());
}

TEST(Train, LossNonIncreasingAcrossHalfSteps) {
    Rng rng(13);
    auto data = gen::interactions(rng, 20, 15, 0.2);
    auto hp = small_hp(4, 0.1, 0.05, 1.0);
    const double lambda = resolve_lambda(hp, data);
    auto m = init_model(20, 15, 4, 0.5, 1);
    double prev = compute_losses(m, data, hp, lambda).total;
    for (int t = 0; t < 10; ++t) {
        update_users(m, data, hp, lambda);
        const double a = compute_losses(m, data, hp, lambda).total;
        EXPECT_LE(a, prev * (1 + 1e-9));
        update_items(m, data, hp, lambda);
        const double b = compute_losses(m, data, hp, lambda).total;
        EXPECT_LE(b, a * (1 + 1e-9));
        prev = b;
    }
}

TEST(Train, ObserverSeesEveryIteration) {
    Rng rng(14);
    auto data = gen::interactions(rng, 10, 8, 0.3);
    auto hp = small_hp(2, 0.1, 0.1, 1.0);
    hp.iterations = 3;
    std::vector<std::size_t> seen;
    auto res = train(data, hp, [&](const LossReport& r, const FactorModel&) { seen.push_back(r.iteration); });
    EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));
    ASSERT_EQ(res.losses.size(), 3u);
    EXPECT_LE(res.losses[2].total, res.losses[0].total);
}

TEST(Train, DeterministicAcrossThreadCounts) {
    Rng rng(15);
    auto data = gen::interactions(rng, 300, 200, 0.05);
    auto hp = small_hp(8, 0.1, 0.1, 1.0);
    hp.iterations = 2;
    set_num_threads(1);
    auto a = train(data, hp);
    set_num_threads(3);
    auto b = train(data, hp);
    set_num_threads(0);
    EXPECT_EQ(a.model, b.model);
}

TEST(Train, RejectsInvalidHyperparameters) {
    auto data = InteractionSet::from_pairs(1, 1, {{0, 0}});
    auto hp = small_hp(2, 0.1, 0.1, 1.0);
    hp.lambda_star = 0.1;
    EXPECT_THROW(train(data, hp), InputError);
    hp.lambda_star.reset();
    hp.nu = 2.0;
    EXPECT_THROW(train(data, hp), InputError);
}

/// Central-difference gradient of the loss with respect to one entry.
double fd_gradient(FactorModel m, const InteractionSet& data, const Hyperparameters& hp, double lambda, bool user,
                   std::size_t row, std::size_t col) {
    const double h = 1e-6;
    auto& mat = user ? m.users : m.items;
    const double orig = mat(row, col);
    mat(row, col) = orig + h;
    const double up = compute_losses(m, data, hp, lambda).total;
    mat(row, col) = orig - h;
    const double down = compute_losses(m, data, hp, lambda).total;
    return (up - down) / (2 * h);
}

TEST(Train, StationaryAfterHalfStep) {
    Rng rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        auto data = gen::interactions(rng, 2 + rng.below(9), 2 + rng.below(9), 0.3);
        auto hp = small_hp(1 + rng.below(4), 0.1, 0.1, rng.uniform());
        const double lambda = resolve_lambda(hp, data);
        auto m = init_model(data.num_users(), data.num_items(), hp.dim, 0.5, trial);
        update_users(m, data, hp, lambda);
        for (std::size_t u = 0; u < data.num_users(); ++u) {
            for (std::size_t k = 0; k < hp.dim; ++k) {
                EXPECT_LE(std::abs(fd_gradient(m, data, hp, lambda, true, u, k)), 1e-4);
            }
        }
        update_items(m, data, hp, lambda);
        for (std::size_t i = 0; i < data.num_items(); ++i) {
            for (std::size_t k = 0; k < hp.dim; ++k) {
                EXPECT_LE(std::abs(fd_gradient(m, data, hp, lambda, false, i, k)), 1e-4);
            }
        }
    }
}

TEST(ProjectUser, ReproducesTrainedUser) {
    Rng rng(17);
    auto data = gen::interactions(rng, 12, 9, 0.3);
    auto hp = small_hp(3, 0.2, 0.05, 1.0);
    const double lambda = resolve_lambda(hp, data);
    auto m = init_model(12, 9, 3, 0.5, 2);
    update_users(m, data, hp, lambda);
    const auto g = gramian(m.items);
    for (std::size_t u = 0; u < 12; ++u) {
        auto w = project_user(data.items_of(u), m.items, g, hp, lambda);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(w[k], m.users(u, k));
    }
    auto zero = project_user({}, m.items, g, hp, lambda);
    for (double v : zero) EXPECT_EQ(v, 0.0);
}

struct BlockInstance {
    DenseMatrix fixed;
    SymmetricMatrix g;
    std::vector<Index> hist;
    double alpha0, reg;
};

BlockInstance block_instance(Rng& rng, std::size_t n, std::size_t d) {
    BlockInstance b{gen::matrix(rng, n, d, 0.5), {}, {}, 0.1 + rng.uniform(), 0.1 + rng.uniform()};
    b.g = gramian(b.fixed);
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < 0.3) b.hist.push_back(Index(i));
    }
    if (b.hist.empty()) b.hist.push_back(0);
    return b;
}

double entity_objective(const BlockInstance& b, std::span<const double> x) {
    double v = 0;
    for (std::size_t i = 0; i < b.fixed.rows(); ++i) {
        const double y = dot(x, b.fixed.row(i));
        v += b.alpha0 * y * y;
    }
    for (auto i : b.hist) {
        const double y = dot(x, b.fixed.row(i));
        v += (y - 1) * (y - 1);
    }
    return v + b.reg * dot(x, x);
}

TEST(BlockSolver, SingleBlockEqualsExactSolve) {
    Rng rng(18);
    auto b = block_instance(rng, 30, 6);
    std::vector<double> start(6, 0.3);
    auto x = solve_entity_block(start, b.hist, b.fixed, b.g, b.alpha0, b.reg, 6);
    auto ref = solve_entity(b.hist, b.fixed, b.g, b.alpha0, b.reg);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(x[k], ref[k], 1e-12);
    auto y = solve_entity_block(start, b.hist, b.fixed, b.g, b.alpha0, b.reg, 100);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(y[k], ref[k], 1e-12);
}

TEST(BlockSolver, MonotoneAndConvergesToExact) {
    Rng rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        auto b = block_instance(rng, 40, 8);
        std::vector<double> x(8);
        for (auto& v : x) v = rng.uniform();
        double prev = entity_objective(b, x);
        for (int pass = 0; pass < 50; ++pass) {
            x = solve_entity_block(x, b.hist, b.fixed, b.g, b.alpha0, b.reg, 3);
            const double now = entity_objective(b, x);
            EXPECT_LE(now, prev + 1e-12 * std::abs(prev));
            prev = now;
        }
        auto ref = oracle::naive_entity_solution(b.fixed, b.hist, b.alpha0, b.reg);
        for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(x[k], ref[k], 1e-8);
    }
}

TEST(BlockSolver, ScalarBlocksAreCoordinateDescent) {
    Rng rng(20);
    auto b = block_instance(rng, 25, 4);
    std::vector<double> x(4, 0.0);
    for (int pass = 0; pass < 300; ++pass) x = solve_entity_block(x, b.hist, b.fixed, b.g, b.alpha0, b.reg, 1);
    auto ref = solve_entity(b.hist, b.fixed, b.g, b.alpha0, b.reg);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(x[k], ref[k], 1e-8);
}

TEST(BlockSolver, TrainingWithBlocksDecreasesLoss) {
    Rng rng(21);
    auto data = gen::interactions(rng, 30, 20, 0.2);
    auto hp = small_hp(7, 0.1, 0.05, 1.0);
    hp.solver = SolverKind::block;
    hp.block_size = 3;
    hp.iterations = 6;
    auto res = train(data, hp);
    for (std::size_t t = 1; t < res.losses.size(); ++t) {
        EXPECT_LE(res.losses[t].total, res.losses[t - 1].total * (1 + 1e-9));
    }
}

TEST(BlockSolver, EightRepeatProjectionCloseToExact) {
    Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 4 + rng.below(13), n = 50 + rng.below(100);
        DenseMatrix items = gen::matrix(rng, n, d, 1.0 / std::sqrt(double(d)));
        const auto g = gramian(items);
        std::vector<Index> hist;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.uniform() < 0.2) hist.push_back(Index(i));
        }
        auto hp = small_hp(d, 0.1, 0.1, 1.0);
        auto exact = project_user(hist, items, g, hp, 0.1);
        hp.solver = SolverKind::block;
        hp.block_size = std::max<std::size_t>(1, d / 2);
        hp.projection_repeats = 8;
        auto approx = project_user(hist, items, g, hp, 0.1);
        double diff = 0, norm = 0;
        for (std::size_t k = 0; k < d; ++k) {
            diff += (approx[k] - exact[k]) * (approx[k] - exact[k]);
            norm += exact[k] * exact[k];
        }
        EXPECT_LE(std::sqrt(diff), 1e-3 * std::sqrt(norm)) << "d=" << d << " n=" << n;
    }
}

}  // namespace
}  // namespace ials
