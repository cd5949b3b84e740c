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
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ials/errors.hpp"
#include "ials/interactions.hpp"
#include "ials/linalg.hpp"
#include "ials/model.hpp"
#include "ials/parallel.hpp"

namespace ials {

enum class SolverKind { exact, block };

struct Hyperparameters {
    std::size_t dim = 64;
    /// Weight of the implicit loss over all user-item pairs.
    double alpha0 = 0.1;
    /// Exactly one of lambda (direct) and lambda_star (normalized to the
    /// reference exponent nu_star) is set.
    std::optional<double> lambda;
    std::optional<double> lambda_star;
    /// Frequency exponent of the regularizer; 0 is plain L2, 1 scales with
    /// interaction count.
    double nu = 1.0;
    double nu_star = 1.0;
    std::size_t iterations = 16;
    double sigma_star = 0.1;
    std::uint64_t seed = 0;
    SolverKind solver = SolverKind::exact;
    std::size_t block_size = 128;
    std::size_t projection_repeats = 8;
    /// Block passes per entity in each training half-step.
    std::size_t block_passes = 1;

    void validate() const {
        if (dim == 0) throw InputError("dim must be >= 1");
        if (!(alpha0 >= 0.0)) throw InputError("alpha0 must be >= 0");
        if (lambda.has_value() == lambda_star.has_value()) {
            throw InputError("set exactly one of lambda and lambda_star");
        }
        if (lambda && !(*lambda > 0.0)) throw InputError("lambda must be > 0");
        if (lambda_star && !(*lambda_star > 0.0)) throw InputError("lambda_star must be > 0");
        if (!(nu >= 0.0 && nu <= 1.0)) throw InputError("nu must be in [0, 1]");
        if (!(nu_star >= 0.0 && nu_star <= 1.0)) throw InputError("nu_star must be in [0, 1]");
        if (!(sigma_star > 0.0)) throw InputError("sigma_star must be > 0");
        if (block_size == 0) throw InputError("block_size must be >= 1");
        if (projection_repeats == 0) throw InputError("projection_repeats must be >= 1");
        if (block_passes == 0) throw InputError("block_passes must be >= 1");
    }
};

/// λ·(count + α₀·other_side_size)^ν.
inline double regularization_weight(std::size_t count, std::size_t other_side_size, double alpha0, double nu,
                                    double lambda) {
    const double mass = static_cast<double>(count) + alpha0 * static_cast<double>(other_side_size);
    return lambda * std::pow(mass, nu);
}

namespace detail {
inline double frequency_mass(std::span<const std::size_t> counts, std::size_t other_side_size, double alpha0,
                             double nu) {
    double total = 0.0;
    for (auto c : counts) total += std::pow(static_cast<double>(c) + alpha0 * static_cast<double>(other_side_size), nu);
    return total;
}
}  // namespace detail

/// Converts a λ* given on the ν* reference scale into the λ used with ν,
/// so that the total regularization mass matches the reference. Takes the
/// per-user counts |I(u)| and per-item counts |U(i)|.
inline double effective_lambda(double lambda_star, double nu, double nu_star, std::span<const std::size_t> user_counts,
                               std::span<const std::size_t> item_counts, double alpha0) {
    if (nu == nu_star) return lambda_star;
    auto mass = [&](double exponent) {
        return detail::frequency_mass(item_counts, user_counts.size(), alpha0, exponent) +
               detail::frequency_mass(user_counts, item_counts.size(), alpha0, exponent);
    };
    return lambda_star * mass(nu_star) / mass(nu);
}

inline double effective_lambda(double lambda_star, double nu, double nu_star, const InteractionSet& data,
                               double alpha0) {
    std::vector<std::size_t> users(data.num_users()), items(data.num_items());
    for (std::size_t u = 0; u < users.size(); ++u) users[u] = data.items_of(u).size();
    for (std::size_t i = 0; i < items.size(); ++i) items[i] = data.users_of(i).size();
    return effective_lambda(lambda_star, nu, nu_star, users, items, alpha0);
}

/// The λ used by the solver for this training set.
inline double resolve_lambda(const Hyperparameters& hp, const InteractionSet& data) {
    if (hp.lambda) return *hp.lambda;
    return effective_lambda(hp.lambda_star.value(), hp.nu, hp.nu_star, data, hp.alpha0);
}

/// Per-entity least-squares solver. Minimizes
///   Σ_{i∈history} (⟨x, h_i⟩ − 1)² + α₀ Σ_{all i} ⟨x, h_i⟩² + λ_e ‖x‖²
/// whose normal equations are A = Σ h hᵀ + α₀ G + λ_e I, b = Σ h, with G
/// the full Gramian of the fixed side (observed pairs included).
class EntitySolver {
public:
    explicit EntitySolver(std::size_t dim)
        : dim_(dim), lower_(dim * dim), rhs_(dim), gram_(dim), spd_(dim) {}

    /// Writes the exact solution into out.
    void solve(std::span<const Index> history, const DenseMatrix& fixed, const SymmetricMatrix& gramian,
               double alpha0, double lambda_entity, std::span<double> out) {
        const std::size_t d = dim_;
        if (history.empty()) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        assemble(history, fixed, gramian, alpha0, lambda_entity);
        std::copy(rhs_.begin(), rhs_.end(), out.begin());
        spd_.solve(lower_.data(), out.subspan(0, d));
    }

    /// Assembles the lower triangle of A and the right-hand side b.
    void assemble(std::span<const Index> history, const DenseMatrix& fixed, const SymmetricMatrix& gramian,
                  double alpha0, double lambda_entity) {
        const std::size_t d = dim_;
        const double* g = gramian.values().data();
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c <= r; ++c) lower_[r * d + c] = alpha0 * g[r * d + c];
            lower_[r * d + r] += lambda_entity;
        }
        std::fill(rhs_.begin(), rhs_.end(), 0.0);
        for (auto i : history) {
            const auto h = fixed.row(i);
            gram_.add(h, lower_.data());
            for (std::size_t k = 0; k < d; ++k) rhs_[k] += h[k];
        }
        gram_.flush(lower_.data());
    }

    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& rhs() const { return rhs_; }

private:
    std::size_t dim_;
    std::vector<double> lower_;
    std::vector<double> rhs_;
    GramAccumulator gram_;
    SpdSolver spd_;
};

inline std::vector<double> solve_entity(std::span<const Index> history, const DenseMatrix& fixed,
                                        const SymmetricMatrix& gramian, double alpha0, double lambda_entity) {
    std::vector<double> x(fixed.cols());
    EntitySolver solver(fixed.cols());
    solver.solve(history, fixed, gramian, alpha0, lambda_entity, x);
    return x;
}

/// Exact cyclic block coordinate descent on the same per-entity quadratic
/// as EntitySolver. Each block solves its restricted system for the
/// residual of the current iterate.
class BlockEntitySolver {
public:
    BlockEntitySolver(std::size_t dim, std::size_t block_size)
        : dim_(dim), block_(std::min(block_size, dim)), lower_(block_ * block_), delta_(block_),
          gram_full_(block_), spd_full_(block_), gram_tail_(dim % block_), spd_tail_(dim % block_) {}

    /// One pass over all blocks, updating x in place.
    void pass(std::span<double> x, std::span<const Index> history, const DenseMatrix& fixed,
              const SymmetricMatrix& gramian, double alpha0, double lambda_entity) {
        const std::size_t d = dim_;
        if (history.empty()) {
            std::fill(x.begin(), x.end(), 0.0);
            return;
        }
        predictions_.resize(history.size());
        for (std::size_t k = 0; k < history.size(); ++k) predictions_[k] = dot(fixed.row(history[k]), x);
        const double* g = gramian.values().data();
        for (std::size_t start = 0; start < d; start += block_) {
            const std::size_t end = std::min(d, start + block_);
            const std::size_t nb = end - start;
            auto& gram = nb == block_ ? gram_full_ : gram_tail_;
            auto& spd = nb == block_ ? spd_full_ : spd_tail_;
            for (std::size_t r = 0; r < nb; ++r) {
                const double* grow = g + (start + r) * d;
                for (std::size_t c = 0; c <= r; ++c) lower_[r * nb + c] = alpha0 * grow[start + c];
                lower_[r * nb + r] += lambda_entity;
                // Residual b_B − (A x)_B, implicit and ridge parts.
                delta_[r] = -alpha0 * detail::dot_n(grow, x.data(), d) - lambda_entity * x[start + r];
            }
            for (std::size_t k = 0; k < history.size(); ++k) {
                const auto h = fixed.row(history[k]).subspan(start, nb);
                gram.add(h, lower_.data());
                const double residual = 1.0 - predictions_[k];
                for (std::size_t r = 0; r < nb; ++r) delta_[r] += residual * h[r];
            }
            gram.flush(lower_.data());
            spd.solve(lower_.data(), std::span<double>(delta_.data(), nb));
            for (std::size_t r = 0; r < nb; ++r) x[start + r] += delta_[r];
            for (std::size_t k = 0; k < history.size(); ++k) {
                predictions_[k] += detail::dot_n(fixed.row(history[k]).data() + start, delta_.data(), nb);
            }
        }
    }

private:
    std::size_t dim_;
    std::size_t block_;
    std::vector<double> lower_;
    std::vector<double> delta_;
    std::vector<double> predictions_;
    GramAccumulator gram_full_;
    SpdSolver spd_full_;
    GramAccumulator gram_tail_;
    SpdSolver spd_tail_;
};

/// One block pass starting from `current`.
inline std::vector<double> solve_entity_block(std::span<const double> current, std::span<const Index> history,
                                              const DenseMatrix& fixed, const SymmetricMatrix& gramian,
                                              double alpha0, double lambda_entity, std::size_t block_size) {
    std::vector<double> x(current.begin(), current.end());
    BlockEntitySolver solver(fixed.cols(), block_size);
    solver.pass(x, history, fixed, gramian, alpha0, lambda_entity);
    return x;
}

namespace detail {

template <typename Adjacency>
void update_side(DenseMatrix& target, const DenseMatrix& fixed, Adjacency&& adjacency, std::size_t other_side_size,
                 const Hyperparameters& hp, double lambda) {
    const SymmetricMatrix g = gramian(fixed);
    const std::size_t d = fixed.cols();
    parallel_for(target.rows(), [&](std::size_t begin, std::size_t end) {
        if (hp.solver == SolverKind::exact) {
            EntitySolver solver(d);
            for (std::size_t e = begin; e < end; ++e) {
                const auto history = adjacency(e);
                const double reg = regularization_weight(history.size(), other_side_size, hp.alpha0, hp.nu, lambda);
                solver.solve(history, fixed, g, hp.alpha0, reg, target.row(e));
            }
        } else {
            BlockEntitySolver solver(d, hp.block_size);
            for (std::size_t e = begin; e < end; ++e) {
                const auto history = adjacency(e);
                const double reg = regularization_weight(history.size(), other_side_size, hp.alpha0, hp.nu, lambda);
                for (std::size_t p = 0; p < hp.block_passes; ++p) {
                    solver.pass(target.row(e), history, fixed, g, hp.alpha0, reg);
                }
            }
        }
    });
}

}  // namespace detail

/// Re-solves every user embedding with H fixed. `lambda` is the resolved
/// regularization (see resolve_lambda).
inline void update_users(FactorModel& model, const InteractionSet& data, const Hyperparameters& hp, double lambda) {
    detail::update_side(model.users, model.items, [&](std::size_t u) { return data.items_of(u); },
                        data.num_items(), hp, lambda);
}

inline void update_users(FactorModel& model, const InteractionSet& data, const Hyperparameters& hp) {
    update_users(model, data, hp, resolve_lambda(hp, data));
}

inline void update_items(FactorModel& model, const InteractionSet& data, const Hyperparameters& hp, double lambda) {
    detail::update_side(model.items, model.users, [&](std::size_t i) { return data.users_of(i); },
                        data.num_users(), hp, lambda);
}

inline void update_items(FactorModel& model, const InteractionSet& data, const Hyperparameters& hp) {
    update_items(model, data, hp, resolve_lambda(hp, data));
}

struct LossReport {
    std::size_t iteration = 0;
    double total = 0.0;
    double observed = 0.0;     // L_S
    double implicit = 0.0;     // L_I
    double regularizer = 0.0;  // R
};

/// Loss decomposition. L_I = α₀·⟨WᵀW, HᵀH⟩_F, which equals
/// α₀ Σ_u Σ_i ⟨w_u, h_i⟩² without visiting |U|·|I| pairs.
inline LossReport compute_losses(const FactorModel& model, const InteractionSet& data, const Hyperparameters& hp,
                                 double lambda) {
    LossReport r;
    for (std::size_t u = 0; u < data.num_users(); ++u) {
        const auto w = model.users.row(u);
        for (auto i : data.items_of(u)) {
            const double e = dot(w, model.items.row(i)) - 1.0;
            r.observed += e * e;
        }
    }
    if (hp.alpha0 != 0.0) {
        const auto gw = gramian(model.users);
        const auto gh = gramian(model.items);
        r.implicit = hp.alpha0 * dot(gw.values(), gh.values());
    }
    for (std::size_t u = 0; u < data.num_users(); ++u) {
        const auto w = model.users.row(u);
        r.regularizer += regularization_weight(data.items_of(u).size(), data.num_items(), hp.alpha0, hp.nu, lambda) *
                         dot(w, w);
    }
    for (std::size_t i = 0; i < data.num_items(); ++i) {
        const auto h = model.items.row(i);
        r.regularizer += regularization_weight(data.users_of(i).size(), data.num_users(), hp.alpha0, hp.nu, lambda) *
                         dot(h, h);
    }
    r.total = r.observed + r.implicit + r.regularizer;
    return r;
}

inline LossReport compute_losses(const FactorModel& model, const InteractionSet& data, const Hyperparameters& hp) {
    return compute_losses(model, data, hp, resolve_lambda(hp, data));
}

/// Called after each iteration with the loss and the current model.
using TrainObserver = std::function<void(const LossReport&, const FactorModel&)>;

struct TrainResult {
    FactorModel model;
    std::vector<LossReport> losses;
    double lambda = 0.0;  // resolved regularization
};

/// Initializes, then runs hp.iterations of (update_users; update_items).
inline TrainResult train(const InteractionSet& data, const Hyperparameters& hp, const TrainObserver& observer = {}) {
    hp.validate();
    TrainResult result;
    result.lambda = resolve_lambda(hp, data);
    result.model = init_model(data.num_users(), data.num_items(), hp.dim, hp.sigma_star, hp.seed);
    for (std::size_t t = 1; t <= hp.iterations; ++t) {
        update_users(result.model, data, hp, result.lambda);
        update_items(result.model, data, hp, result.lambda);
        auto report = compute_losses(result.model, data, hp, result.lambda);
        report.iteration = t;
        result.losses.push_back(report);
        if (observer) observer(report, result.model);
    }
    return result;
}

/// Fold-in: the embedding of an unseen user from their items with H fixed.
/// Exact solver: the closed form. Block solver: projection_repeats block
/// passes from zero.
class UserProjector {
public:
    UserProjector(const DenseMatrix& items, const SymmetricMatrix& gramian, const Hyperparameters& hp, double lambda)
        : items_(items), gramian_(gramian), hp_(hp), lambda_(lambda), exact_(items.cols()),
          block_(items.cols(), hp.block_size) {}

    void project(std::span<const Index> history, std::span<double> out) {
        const double reg = regularization_weight(history.size(), items_.rows(), hp_.alpha0, hp_.nu, lambda_);
        if (hp_.solver == SolverKind::exact) {
            exact_.solve(history, items_, gramian_, hp_.alpha0, reg, out);
            return;
        }
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t p = 0; p < hp_.projection_repeats; ++p) {
            block_.pass(out, history, items_, gramian_, hp_.alpha0, reg);
        }
    }

private:
    const DenseMatrix& items_;
    const SymmetricMatrix& gramian_;
    Hyperparameters hp_;
    double lambda_;
    EntitySolver exact_;
    BlockEntitySolver block_;
};

inline std::vector<double> project_user(std::span<const Index> history, const DenseMatrix& items,
                                        const SymmetricMatrix& gramian, const Hyperparameters& hp, double lambda) {
    std::vector<double> x(items.cols());
    UserProjector(items, gramian, hp, lambda).project(history, x);
    return x;
}

}  // namespace ials
