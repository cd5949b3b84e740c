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
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ials/errors.hpp"

namespace ials {

using Index = std::uint32_t;

struct Interaction {
    Index user;
    Index item;
    std::int64_t timestamp = 0;
};

/// Bidirectional map between external string ids and dense indices,
/// assigned in first-appearance order.
class IdMap {
public:
    Index add(std::string_view id) {
        auto it = index_.find(std::string(id));
        if (it != index_.end()) return it->second;
        const auto next = static_cast<Index>(ids_.size());
        ids_.emplace_back(id);
        index_.emplace(ids_.back(), next);
        return next;
    }

    std::optional<Index> find(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& id(Index index) const { return ids_.at(index); }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    /// Keeps only the given indices, renumbered in the given order.
    IdMap subset(std::span<const Index> keep) const {
        IdMap out;
        for (auto k : keep) out.add(ids_.at(k));
        return out;
    }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, Index> index_;
};

/// Sparse binary user-item matrix with both row (per-user) and column
/// (per-item) adjacency. Adjacency lists are sorted.
class InteractionSet {
public:
    InteractionSet() : user_offsets_(1, 0), item_offsets_(1, 0) {}

    /// Builds the index from pairs. Duplicate pairs collapse to one,
    /// keeping the largest timestamp. Throws DimensionMismatch for
    /// out-of-range indices.
    static InteractionSet from_pairs(std::size_t num_users, std::size_t num_items,
                                     std::vector<Interaction> pairs, bool with_timestamps = false) {
        for (const auto& p : pairs) {
            if (p.user >= num_users || p.item >= num_items) {
                throw DimensionMismatch("interaction (" + std::to_string(p.user) + "," +
                                        std::to_string(p.item) + ") outside " +
                                        std::to_string(num_users) + "x" + std::to_string(num_items));
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Interaction& a, const Interaction& b) {
            if (a.user != b.user) return a.user < b.user;
            if (a.item != b.item) return a.item < b.item;
            return a.timestamp > b.timestamp;
        });
        pairs.erase(std::unique(pairs.begin(), pairs.end(),
                                [](const Interaction& a, const Interaction& b) {
                                    return a.user == b.user && a.item == b.item;
                                }),
                    pairs.end());

        InteractionSet s;
        s.num_users_ = num_users;
        s.num_items_ = num_items;
        s.user_offsets_.assign(num_users + 1, 0);
        s.item_offsets_.assign(num_items + 1, 0);
        s.user_items_.resize(pairs.size());
        s.item_users_.resize(pairs.size());
        s.timestamped_ = with_timestamps;
        if (with_timestamps) s.timestamps_.resize(pairs.size());
        for (const auto& p : pairs) {
            ++s.user_offsets_[p.user + 1];
            ++s.item_offsets_[p.item + 1];
        }
        std::partial_sum(s.user_offsets_.begin(), s.user_offsets_.end(), s.user_offsets_.begin());
        std::partial_sum(s.item_offsets_.begin(), s.item_offsets_.end(), s.item_offsets_.begin());
        std::vector<std::size_t> fill(s.item_offsets_.begin(), s.item_offsets_.end() - 1);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            s.user_items_[k] = pairs[k].item;
            if (with_timestamps) s.timestamps_[k] = pairs[k].timestamp;
            // Pairs are visited in user order, so each item's list is sorted.
            s.item_users_[fill[pairs[k].item]++] = pairs[k].user;
        }
        return s;
    }

    std::size_t num_users() const { return num_users_; }
    std::size_t num_items() const { return num_items_; }
    std::size_t num_pairs() const { return user_items_.size(); }
    bool has_timestamps() const { return timestamped_; }

    std::span<const Index> items_of(std::size_t user) const {
        return {user_items_.data() + user_offsets_[user], user_offsets_[user + 1] - user_offsets_[user]};
    }
    std::span<const Index> users_of(std::size_t item) const {
        return {item_users_.data() + item_offsets_[item], item_offsets_[item + 1] - item_offsets_[item]};
    }
    /// Timestamps aligned with items_of(user); empty without timestamps.
    std::span<const std::int64_t> timestamps_of(std::size_t user) const {
        if (!timestamped_) return {};
        return {timestamps_.data() + user_offsets_[user], user_offsets_[user + 1] - user_offsets_[user]};
    }

    bool contains(std::size_t user, Index item) const {
        auto items = items_of(user);
        return std::binary_search(items.begin(), items.end(), item);
    }

    std::vector<Interaction> pairs() const {
        std::vector<Interaction> out;
        out.reserve(num_pairs());
        for (std::size_t u = 0; u < num_users_; ++u) {
            for (std::size_t k = user_offsets_[u]; k < user_offsets_[u + 1]; ++k) {
                out.push_back({static_cast<Index>(u), user_items_[k],
                               timestamps_.empty() ? 0 : timestamps_[k]});
            }
        }
        return out;
    }

    friend bool operator==(const InteractionSet&, const InteractionSet&) = default;

private:
    std::size_t num_users_ = 0;
    std::size_t num_items_ = 0;
    std::vector<std::size_t> user_offsets_;
    std::vector<Index> user_items_;
    std::vector<std::int64_t> timestamps_;
    std::vector<std::size_t> item_offsets_;
    std::vector<Index> item_users_;
    bool timestamped_ = false;
};

/// Interactions together with the external ids they were loaded from.
struct LoadedInteractions {
    InteractionSet data;
    IdMap users;
    IdMap items;
};

/// One evaluation user of the strong-generalization protocol: the items
/// revealed to the recommender and the items it should rank highly.
struct HoldoutUser {
    std::vector<Index> fold_in;
    std::vector<Index> target;

    friend bool operator==(const HoldoutUser&, const HoldoutUser&) = default;
};

struct HoldoutSet {
    std::vector<HoldoutUser> users;
    /// Original user index for each holdout user (empty when loaded from files).
    std::vector<Index> source_users;

    friend bool operator==(const HoldoutSet&, const HoldoutSet&) = default;
};

/// Strong-generalization benchmark data: training interactions of
/// non-evaluation users plus validation and test holdout sets. Item indices
/// are compacted to the items present in train; item_vocabulary maps each
/// back to its index in the source data.
struct StrongGeneralizationSplit {
    InteractionSet train;
    std::vector<Index> item_vocabulary;
    std::vector<Index> train_user_vocabulary;
    HoldoutSet validation;
    HoldoutSet test;

    friend bool operator==(const StrongGeneralizationSplit&, const StrongGeneralizationSplit&) = default;
};

/// Marks a leave-one-out user that has nothing withheld.
inline constexpr Index kNoHoldout = ~Index{0};

struct LeaveOneOutSplit {
    InteractionSet train;
    /// Per user: the withheld item, or kNoHoldout (user is not evaluated).
    std::vector<Index> holdout;
    /// Per user: sampled negative items, sorted ascending.
    std::vector<std::vector<Index>> negatives;

    friend bool operator==(const LeaveOneOutSplit&, const LeaveOneOutSplit&) = default;
};

}  // namespace ials
