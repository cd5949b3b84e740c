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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ials/errors.hpp"
#include "ials/interactions.hpp"
#include "ials/linalg.hpp"
#include "ials/model.hpp"
#include "ials/parallel.hpp"
#include "ials/solver.hpp"

namespace ials {

namespace detail {
inline std::vector<Index> sorted_copy(std::span<const Index> v) {
    std::vector<Index> out(v.begin(), v.end());
    std::sort(out.begin(), out.end());
    return out;
}
}  // namespace detail

/// |top-k ∩ relevant| / min(k, |relevant|).
inline double recall_at_k(const RankedList& ranked, std::span<const Index> relevant, std::size_t k) {
    if (relevant.empty()) throw EmptyRelevantSet();
    const auto rel = detail::sorted_copy(relevant);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
        if (std::binary_search(rel.begin(), rel.end(), ranked[r].item)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(std::min(k, rel.size()));
}

/// DCG@k with binary gains over the ideal DCG of min(k, |relevant|) hits.
inline double ndcg_at_k(const RankedList& ranked, std::span<const Index> relevant, std::size_t k) {
    if (relevant.empty()) throw EmptyRelevantSet();
    const auto rel = detail::sorted_copy(relevant);
    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
        if (std::binary_search(rel.begin(), rel.end(), ranked[r].item)) dcg += 1.0 / std::log2(r + 2.0);
    }
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, rel.size()); ++r) idcg += 1.0 / std::log2(r + 2.0);
    return dcg / idcg;
}

/// `rank` is 1-based; absent means not ranked at all.
inline double hit_rate_at_k(std::optional<std::size_t> rank, std::size_t k) {
    return rank && *rank >= 1 && *rank <= k ? 1.0 : 0.0;
}

struct MetricReport {
    /// Mean over evaluation users, keyed like "recall@20".
    std::map<std::string, double> values;
    std::map<std::string, std::vector<double>> per_user;
    std::size_t n_users = 0;

    double at(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end()) throw InputError("unknown metric " + name);
        return it->second;
    }
};

namespace detail {
inline MetricReport reduce(std::map<std::string, std::vector<double>> per_user, std::size_t n_users) {
    MetricReport report;
    report.n_users = n_users;
    for (auto& [name, v] : per_user) {
        double sum = 0.0;
        for (double x : v) sum += x;
        report.values[name] = n_users == 0 ? 0.0 : sum / static_cast<double>(n_users);
    }
    report.per_user = std::move(per_user);
    return report;
}
}  // namespace detail

struct StrongGeneralizationKs {
    std::vector<std::size_t> recall = {20, 50};
    std::vector<std::size_t> ndcg = {100};
};

/// Folds in each holdout user from their fold-in items, ranks all items
/// except the fold-in ones and scores the ranking against the targets.
inline MetricReport evaluate_strong_generalization(const FactorModel& model, const HoldoutSet& holdout,
                                                   const Hyperparameters& hp, double lambda,
                                                   const StrongGeneralizationKs& ks = {}) {
    const auto g = gramian(model.items);
    const std::size_t n = holdout.users.size();
    std::size_t max_k = 1;
    for (auto k : ks.recall) max_k = std::max(max_k, k);
    for (auto k : ks.ndcg) max_k = std::max(max_k, k);

    std::map<std::string, std::vector<double>> per_user;
    for (auto k : ks.recall) per_user["recall@" + std::to_string(k)].assign(n, 0.0);
    for (auto k : ks.ndcg) per_user["ndcg@" + std::to_string(k)].assign(n, 0.0);
    std::vector<std::vector<double>*> recall_out, ndcg_out;
    for (auto k : ks.recall) recall_out.push_back(&per_user["recall@" + std::to_string(k)]);
    for (auto k : ks.ndcg) ndcg_out.push_back(&per_user["ndcg@" + std::to_string(k)]);

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        UserProjector projector(model.items, g, hp, lambda);
        std::vector<double> w(model.dim());
        for (std::size_t u = begin; u < end; ++u) {
            const auto& user = holdout.users[u];
            projector.project(user.fold_in, w);
            const auto ranked = top_n(w, model.items, max_k, user.fold_in);
            for (std::size_t k = 0; k < ks.recall.size(); ++k) {
                (*recall_out[k])[u] = recall_at_k(ranked, user.target, ks.recall[k]);
            }
            for (std::size_t k = 0; k < ks.ndcg.size(); ++k) {
                (*ndcg_out[k])[u] = ndcg_at_k(ranked, user.target, ks.ndcg[k]);
            }
        }
    });
    return detail::reduce(std::move(per_user), n);
}

/// 1-based rank of `target` among `candidates` under the ranking tie rule.
inline std::size_t rank_among(std::span<const double> user_embedding, const DenseMatrix& items, Index target,
                              std::span<const Index> candidates) {
    const ScoredItem held{target, dot(user_embedding, items.row(target))};
    std::size_t rank = 1;
    for (auto c : candidates) {
        if (c == target) continue;
        if (ranks_before({c, dot(user_embedding, items.row(c))}, held)) ++rank;
    }
    return rank;
}

/// Sampled leave-one-out evaluation: per user, rank the withheld item
/// among its negatives using the trained user embedding. Users without a
/// holdout are skipped; per-user values follow user order.
inline MetricReport evaluate_sampled(const FactorModel& model, const LeaveOneOutSplit& split,
                                     const std::vector<std::size_t>& ks = {10}) {
    if (model.num_users() != split.holdout.size()) {
        throw DimensionMismatch("model has " + std::to_string(model.num_users()) + " users, split has " +
                                std::to_string(split.holdout.size()));
    }
    std::vector<std::size_t> evaluated;
    for (std::size_t u = 0; u < split.holdout.size(); ++u) {
        if (split.holdout[u] != kNoHoldout) evaluated.push_back(u);
    }
    const std::size_t n = evaluated.size();
    std::vector<std::size_t> ranks(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto u = evaluated[k];
            ranks[k] = rank_among(model.users.row(u), model.items, split.holdout[u], split.negatives[u]);
        }
    });
    std::map<std::string, std::vector<double>> per_user;
    for (auto k : ks) {
        auto& hr = per_user["hr@" + std::to_string(k)];
        auto& nd = per_user["ndcg@" + std::to_string(k)];
        hr.resize(n);
        nd.resize(n);
        for (std::size_t u = 0; u < n; ++u) {
            hr[u] = hit_rate_at_k(ranks[u], k);
            nd[u] = ranks[u] <= k ? 1.0 / std::log2(ranks[u] + 1.0) : 0.0;
        }
    }
    return detail::reduce(std::move(per_user), n);
}

}  // namespace ials
