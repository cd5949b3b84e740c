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

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ials/errors.hpp"
#include "ials/interactions.hpp"
#include "ials/random.hpp"

namespace ials {

/// Reads text lines from plain or gzip-compressed files.
class LineReader {
public:
    explicit LineReader(const std::string& path) : path_(path) {
        if (!std::filesystem::exists(path)) throw InputError("no such file: " + path);
        file_ = gzopen(path.c_str(), "rb");
        if (file_ == nullptr) throw InputError("cannot open " + path);
        gzbuffer(file_, 1 << 17);
    }
    ~LineReader() {
        if (file_ != nullptr) gzclose(file_);
    }
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    /// Next line without its terminator; false at end of file.
    bool next(std::string& line) {
        line.clear();
        char buf[4096];
        while (gzgets(file_, buf, sizeof buf) != nullptr) {
            line.append(buf);
            if (!line.empty() && line.back() == '\n') {
                line.pop_back();
                if (!line.empty() && line.back() == '\r') line.pop_back();
                ++line_number_;
                return true;
            }
        }
        int err = 0;
        gzerror(file_, &err);
        if (err != Z_OK && err != Z_STREAM_END) throw InputError("read error in " + path_);
        if (line.empty()) return false;
        if (line.back() == '\r') line.pop_back();
        ++line_number_;
        return true;
    }

    std::size_t line_number() const { return line_number_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    gzFile file_ = nullptr;
    std::size_t line_number_ = 0;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, std::string_view delim) {
    std::vector<std::string_view> out;
    if (delim.empty()) {
        // Whitespace-separated.
        std::size_t k = 0;
        while (k < line.size()) {
            while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
            if (k == line.size()) break;
            std::size_t e = k;
            while (e < line.size() && line[e] != ' ' && line[e] != '\t') ++e;
            out.push_back(line.substr(k, e - k));
            k = e;
        }
        return out;
    }
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + delim.size();
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    s = trim(s);
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return value;
}

}  // namespace detail

/// Column layout of a raw interaction file. Column positions are 0-based;
/// negative means absent.
struct InteractionFormat {
    /// Field separator; empty means runs of whitespace.
    std::string delimiter = ",";
    int user_column = 0;
    int item_column = 1;
    int rating_column = -1;
    int timestamp_column = -1;
    /// Rows with rating below this are dropped (binarization).
    std::optional<double> rating_threshold;
    bool has_header = false;

    static InteractionFormat csv() { return {}; }
    static InteractionFormat tsv() {
        InteractionFormat f;
        f.delimiter = "\t";
        return f;
    }
    /// MovieLens ratings.dat: user::item::rating::timestamp.
    static InteractionFormat movielens_dat() {
        InteractionFormat f;
        f.delimiter = "::";
        f.rating_column = 2;
        f.timestamp_column = 3;
        return f;
    }
};

inline LoadedInteractions load_interactions(const std::string& path, const InteractionFormat& format) {
    LineReader reader(path);
    LoadedInteractions out;
    std::vector<Interaction> pairs;
    const int needed = std::max({format.user_column, format.item_column, format.rating_column,
                                 format.timestamp_column}) + 1;
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (first && format.has_header) {
            first = false;
            continue;
        }
        first = false;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_fields(line, format.delimiter);
        if (static_cast<int>(fields.size()) < needed) {
            throw ParseError(path, reader.line_number(),
                             "expected at least " + std::to_string(needed) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        const auto user = detail::trim(fields[format.user_column]);
        const auto item = detail::trim(fields[format.item_column]);
        if (user.empty() || item.empty()) throw ParseError(path, reader.line_number(), "empty id");
        if (format.rating_column >= 0) {
            auto rating = detail::parse_number<double>(fields[format.rating_column]);
            if (!rating) throw ParseError(path, reader.line_number(), "bad rating");
            if (format.rating_threshold && *rating < *format.rating_threshold) continue;
        }
        std::int64_t ts = 0;
        if (format.timestamp_column >= 0) {
            auto t = detail::parse_number<std::int64_t>(fields[format.timestamp_column]);
            if (!t) throw ParseError(path, reader.line_number(), "bad timestamp");
            ts = *t;
        }
        pairs.push_back({out.users.add(user), out.items.add(item), ts});
    }
    if (pairs.empty()) throw EmptyDataset("no interactions in " + path);
    out.data = InteractionSet::from_pairs(out.users.size(), out.items.size(), std::move(pairs),
                                          format.timestamp_column >= 0);
    return out;
}

// ---------------------------------------------------------------------------
// Splits

struct StrongGeneralizationOptions {
    std::size_t n_holdout_users = 10000;
    std::size_t n_validation_users = 10000;
    double fold_in_fraction = 0.8;
    std::size_t min_user_interactions = 5;
    std::uint64_t seed = 0;
};

/// Holds out whole users. Test users are drawn first, then validation
/// users, uniformly without replacement among users with at least
/// min_user_interactions. Holdout histories are restricted to items that
/// remain in train, then partitioned at random: ceil(fraction·n) items to
/// fold-in and the rest to target. Users left without targets are dropped.
inline StrongGeneralizationSplit strong_generalization_split(const InteractionSet& data,
                                                             const StrongGeneralizationOptions& opt) {
    if (!(opt.fold_in_fraction > 0.0 && opt.fold_in_fraction < 1.0)) {
        throw InputError("fold_in_fraction must be in (0, 1)");
    }
    std::vector<Index> eligible;
    for (std::size_t u = 0; u < data.num_users(); ++u) {
        if (data.items_of(u).size() >= std::max<std::size_t>(1, opt.min_user_interactions)) {
            eligible.push_back(static_cast<Index>(u));
        }
    }
    if (opt.n_holdout_users + opt.n_validation_users >= eligible.size()) {
        throw InsufficientUsers("need more than " +
                                std::to_string(opt.n_holdout_users + opt.n_validation_users) +
                                " users with >= " + std::to_string(opt.min_user_interactions) +
                                " interactions, found " + std::to_string(eligible.size()));
    }
    Rng rng(opt.seed);
    rng.shuffle(eligible);
    std::vector<Index> test_users(eligible.begin(), eligible.begin() + opt.n_holdout_users);
    std::vector<Index> validation_users(eligible.begin() + opt.n_holdout_users,
                                        eligible.begin() + opt.n_holdout_users + opt.n_validation_users);
    std::sort(test_users.begin(), test_users.end());
    std::sort(validation_users.begin(), validation_users.end());

    std::vector<char> held(data.num_users(), 0);
    for (auto u : test_users) held[u] = 1;
    for (auto u : validation_users) held[u] = 1;

    StrongGeneralizationSplit split;
    constexpr Index kAbsent = ~Index{0};
    std::vector<Index> item_map(data.num_items(), kAbsent);
    std::vector<char> seen(data.num_items(), 0);
    for (std::size_t u = 0; u < data.num_users(); ++u) {
        if (held[u]) continue;
        split.train_user_vocabulary.push_back(static_cast<Index>(u));
        for (auto i : data.items_of(u)) seen[i] = 1;
    }
    for (std::size_t i = 0; i < data.num_items(); ++i) {
        if (seen[i]) {
            item_map[i] = static_cast<Index>(split.item_vocabulary.size());
            split.item_vocabulary.push_back(static_cast<Index>(i));
        }
    }
    std::vector<Interaction> train_pairs;
    for (std::size_t k = 0; k < split.train_user_vocabulary.size(); ++k) {
        for (auto i : data.items_of(split.train_user_vocabulary[k])) {
            train_pairs.push_back({static_cast<Index>(k), item_map[i], 0});
        }
    }
    split.train = InteractionSet::from_pairs(split.train_user_vocabulary.size(),
                                             split.item_vocabulary.size(), std::move(train_pairs));

    auto make_holdout = [&](const std::vector<Index>& users) {
        HoldoutSet set;
        for (auto u : users) {
            std::vector<Index> items;
            for (auto i : data.items_of(u)) {
                if (item_map[i] != kAbsent) items.push_back(item_map[i]);
            }
            const auto n = items.size();
            const auto n_fold_in = static_cast<std::size_t>(
                std::ceil(opt.fold_in_fraction * static_cast<double>(n)));
            if (n == 0 || n_fold_in >= n) continue;
            rng.shuffle(items);
            HoldoutUser h;
            h.fold_in.assign(items.begin(), items.begin() + n_fold_in);
            h.target.assign(items.begin() + n_fold_in, items.end());
            std::sort(h.fold_in.begin(), h.fold_in.end());
            std::sort(h.target.begin(), h.target.end());
            set.users.push_back(std::move(h));
            set.source_users.push_back(u);
        }
        return set;
    };
    split.validation = make_holdout(validation_users);
    split.test = make_holdout(test_users);
    return split;
}

struct LeaveOneOutOptions {
    std::size_t n_negatives = 100;
    std::uint64_t seed = 0;
    /// When false, negatives may include the user's other training items.
    bool exclude_interacted = true;
    /// Keep users with fewer than two interactions entirely in train, with
    /// no holdout, instead of failing.
    bool skip_sparse_users = false;
};

/// Withholds one item per user: the latest by timestamp when timestamps
/// exist (ties go to the larger item index), otherwise a uniformly random
/// one. Negatives are sampled uniformly without replacement.
inline LeaveOneOutSplit leave_one_out_split(const InteractionSet& data, const LeaveOneOutOptions& opt) {
    std::vector<std::size_t> sparse;
    for (std::size_t u = 0; u < data.num_users(); ++u) {
        if (data.items_of(u).size() < 2) sparse.push_back(u);
    }
    if (!sparse.empty() && !opt.skip_sparse_users) throw UserTooSparse(std::move(sparse));

    Rng rng(opt.seed);
    LeaveOneOutSplit split;
    split.holdout.resize(data.num_users());
    split.negatives.resize(data.num_users());
    std::vector<Interaction> train_pairs;
    train_pairs.reserve(data.num_pairs());
    std::vector<char> excluded(data.num_items(), 0);
    for (std::size_t u = 0; u < data.num_users(); ++u) {
        const auto items = data.items_of(u);
        if (items.size() < 2) {
            split.holdout[u] = kNoHoldout;
            for (std::size_t k = 0; k < items.size(); ++k) {
                train_pairs.push_back({static_cast<Index>(u), items[k],
                                       data.has_timestamps() ? data.timestamps_of(u)[k] : 0});
            }
            continue;
        }
        std::size_t pick;
        if (data.has_timestamps()) {
            const auto ts = data.timestamps_of(u);
            pick = 0;
            for (std::size_t k = 1; k < items.size(); ++k) {
                if (ts[k] >= ts[pick]) pick = k;
            }
        } else {
            pick = rng.below(items.size());
        }
        const Index held = items[pick];
        split.holdout[u] = held;
        for (std::size_t k = 0; k < items.size(); ++k) {
            if (k == pick) continue;
            train_pairs.push_back({static_cast<Index>(u), items[k],
                                   data.has_timestamps() ? data.timestamps_of(u)[k] : 0});
        }

        std::size_t n_excluded = 1;
        excluded[held] = 1;
        if (opt.exclude_interacted) {
            for (auto i : items) excluded[i] = 1;
            n_excluded = items.size();
        }
        if (data.num_items() - n_excluded < opt.n_negatives) {
            throw InputError("user " + std::to_string(u) + " has only " +
                             std::to_string(data.num_items() - n_excluded) +
                             " candidate negatives, need " + std::to_string(opt.n_negatives));
        }
        auto& neg = split.negatives[u];
        neg.reserve(opt.n_negatives);
        while (neg.size() < opt.n_negatives) {
            const auto i = static_cast<Index>(rng.below(data.num_items()));
            if (excluded[i]) continue;
            excluded[i] = 1;
            neg.push_back(i);
        }
        for (auto i : neg) excluded[i] = 0;
        for (auto i : items) excluded[i] = 0;
        std::sort(neg.begin(), neg.end());
    }
    split.train = InteractionSet::from_pairs(data.num_users(), data.num_items(), std::move(train_pairs),
                                             data.has_timestamps());
    return split;
}

// ---------------------------------------------------------------------------
// Split files

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

inline void write_pairs(const std::filesystem::path& p, const InteractionSet& s) {
    auto out = open_out(p);
    out << "user,item\n";
    for (std::size_t u = 0; u < s.num_users(); ++u) {
        for (auto i : s.items_of(u)) out << u << ',' << i << '\n';
    }
}

inline void write_holdout(const std::filesystem::path& p, const HoldoutSet& set, bool fold_in) {
    auto out = open_out(p);
    out << "user,item\n";
    for (std::size_t u = 0; u < set.users.size(); ++u) {
        for (auto i : fold_in ? set.users[u].fold_in : set.users[u].target) out << u << ',' << i << '\n';
    }
}

/// Reads "a,b,..." rows of non-negative integers; a non-numeric first line
/// is treated as a header.
inline std::vector<std::vector<std::int64_t>> read_int_rows(const std::filesystem::path& p,
                                                            std::size_t min_fields) {
    LineReader reader(p.string());
    std::vector<std::vector<std::int64_t>> rows;
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        auto fields = split_fields(line, line.find(',') != std::string::npos ? "," : "");
        std::vector<std::int64_t> row;
        bool ok = fields.size() >= min_fields;
        for (auto f : fields) {
            auto v = parse_number<std::int64_t>(f);
            if (!v || *v < 0) {
                ok = false;
                break;
            }
            row.push_back(*v);
        }
        if (!ok) {
            if (first) {
                first = false;
                continue;
            }
            throw ParseError(p.string(), reader.line_number(), "expected integer fields");
        }
        first = false;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::filesystem::path first_existing(const std::filesystem::path& dir,
                                            std::initializer_list<const char*> names) {
    for (auto n : names) {
        if (std::filesystem::exists(dir / n)) return dir / n;
    }
    throw InputError("missing " + (dir / *names.begin()).string());
}

inline std::size_t count_lines(const std::filesystem::path& p) {
    LineReader reader(p.string());
    std::string line;
    std::size_t n = 0;
    while (reader.next(line)) {
        if (!trim(line).empty()) ++n;
    }
    return n;
}

/// Groups (user, item) rows by user value in ascending user order.
inline HoldoutSet group_holdout(const std::vector<std::vector<std::int64_t>>& fold_in,
                                const std::vector<std::vector<std::int64_t>>& target,
                                std::size_t num_items, const std::string& what) {
    std::map<std::int64_t, HoldoutUser> by_user;
    for (const auto& r : fold_in) by_user[r[0]].fold_in.push_back(static_cast<Index>(r[1]));
    for (const auto& r : target) by_user[r[0]].target.push_back(static_cast<Index>(r[1]));
    HoldoutSet set;
    for (auto& [u, h] : by_user) {
        for (auto* v : {&h.fold_in, &h.target}) {
            std::sort(v->begin(), v->end());
            v->erase(std::unique(v->begin(), v->end()), v->end());
            for (auto i : *v) {
                if (i >= num_items) throw DimensionMismatch(what + ": item " + std::to_string(i) + " out of range");
            }
        }
        if (h.target.empty()) continue;
        set.users.push_back(std::move(h));
    }
    return set;
}

}  // namespace detail

/// Writes an id map as "external_id,internal_index" rows.
inline void write_id_map(const std::filesystem::path& p, const IdMap& ids) {
    auto out = detail::open_out(p);
    out << "external_id,internal_index\n";
    for (std::size_t k = 0; k < ids.size(); ++k) out << ids.id(static_cast<Index>(k)) << ',' << k << '\n';
}

inline IdMap read_id_map(const std::filesystem::path& p) {
    LineReader reader(p.string());
    std::vector<std::pair<std::int64_t, std::string>> rows;
    std::string line;
    while (reader.next(line)) {
        if (detail::trim(line).empty()) continue;
        auto pos = line.rfind(',');
        if (pos == std::string::npos) throw ParseError(p.string(), reader.line_number(), "expected 2 fields");
        auto idx = detail::parse_number<std::int64_t>(std::string_view(line).substr(pos + 1));
        if (!idx) {
            if (reader.line_number() == 1) continue;
            throw ParseError(p.string(), reader.line_number(), "bad index");
        }
        rows.emplace_back(*idx, line.substr(0, pos));
    }
    std::sort(rows.begin(), rows.end());
    IdMap ids;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].first != static_cast<std::int64_t>(k)) {
            throw ParseError(p.string(), 0, "indices are not contiguous from 0");
        }
        ids.add(rows[k].second);
    }
    return ids;
}

inline void write_strong_generalization(const std::filesystem::path& dir, const StrongGeneralizationSplit& s) {
    std::filesystem::create_directories(dir);
    detail::write_pairs(dir / "train.csv", s.train);
    detail::write_holdout(dir / "validation_fold_in.csv", s.validation, true);
    detail::write_holdout(dir / "validation_target.csv", s.validation, false);
    detail::write_holdout(dir / "test_fold_in.csv", s.test, true);
    detail::write_holdout(dir / "test_target.csv", s.test, false);
}

/// Loads a strong-generalization split directory. Also accepts the
/// train/validation_tr/validation_te/test_tr/test_te naming with an
/// optional unique_sid.txt item list.
inline StrongGeneralizationSplit read_strong_generalization(const std::filesystem::path& dir) {
    auto train_rows = detail::read_int_rows(detail::first_existing(dir, {"train.csv"}), 2);
    auto vf = detail::read_int_rows(detail::first_existing(dir, {"validation_fold_in.csv", "validation_tr.csv"}), 2);
    auto vt = detail::read_int_rows(detail::first_existing(dir, {"validation_target.csv", "validation_te.csv"}), 2);
    auto tf = detail::read_int_rows(detail::first_existing(dir, {"test_fold_in.csv", "test_tr.csv"}), 2);
    auto tt = detail::read_int_rows(detail::first_existing(dir, {"test_target.csv", "test_te.csv"}), 2);

    std::size_t num_items = 0;
    if (std::filesystem::exists(dir / "item_ids.csv")) {
        num_items = read_id_map(dir / "item_ids.csv").size();
    } else if (std::filesystem::exists(dir / "unique_sid.txt")) {
        num_items = detail::count_lines(dir / "unique_sid.txt");
    } else {
        for (const auto* rows : {&train_rows, &vf, &vt, &tf, &tt}) {
            for (const auto& r : *rows) num_items = std::max<std::size_t>(num_items, r[1] + 1);
        }
    }
    std::size_t num_users = 0;
    std::vector<Interaction> pairs;
    pairs.reserve(train_rows.size());
    for (const auto& r : train_rows) {
        num_users = std::max<std::size_t>(num_users, r[0] + 1);
        pairs.push_back({static_cast<Index>(r[0]), static_cast<Index>(r[1]), 0});
    }
    if (pairs.empty()) throw EmptyDataset("empty train.csv in " + dir.string());
    StrongGeneralizationSplit s;
    s.train = InteractionSet::from_pairs(num_users, num_items, std::move(pairs));
    s.item_vocabulary.resize(num_items);
    std::iota(s.item_vocabulary.begin(), s.item_vocabulary.end(), Index{0});
    s.train_user_vocabulary.resize(num_users);
    std::iota(s.train_user_vocabulary.begin(), s.train_user_vocabulary.end(), Index{0});
    s.validation = detail::group_holdout(vf, vt, num_items, "validation");
    s.test = detail::group_holdout(tf, tt, num_items, "test");
    return s;
}

inline void write_leave_one_out(const std::filesystem::path& dir, const LeaveOneOutSplit& s) {
    std::filesystem::create_directories(dir);
    detail::write_pairs(dir / "train.csv", s.train);
    auto holdout = detail::open_out(dir / "test_holdout.csv");
    holdout << "user,item\n";
    for (std::size_t u = 0; u < s.holdout.size(); ++u) {
        if (s.holdout[u] != kNoHoldout) holdout << u << ',' << s.holdout[u] << '\n';
    }
    auto neg = detail::open_out(dir / "test_negatives.csv");
    for (std::size_t u = 0; u < s.negatives.size(); ++u) {
        if (s.holdout[u] == kNoHoldout) continue;
        neg << u;
        for (auto i : s.negatives[u]) neg << ',' << i;
        neg << '\n';
    }
}

inline LeaveOneOutSplit read_leave_one_out(const std::filesystem::path& dir) {
    auto train_rows = detail::read_int_rows(detail::first_existing(dir, {"train.csv"}), 2);
    auto holdout_rows = detail::read_int_rows(detail::first_existing(dir, {"test_holdout.csv"}), 2);
    auto neg_rows = detail::read_int_rows(detail::first_existing(dir, {"test_negatives.csv"}), 1);
    std::size_t num_users = 0, num_items = 0;
    for (const auto* rows : {&train_rows, &holdout_rows}) {
        for (const auto& r : *rows) {
            num_users = std::max<std::size_t>(num_users, r[0] + 1);
            num_items = std::max<std::size_t>(num_items, r[1] + 1);
        }
    }
    for (const auto& r : neg_rows) {
        for (std::size_t k = 1; k < r.size(); ++k) num_items = std::max<std::size_t>(num_items, r[k] + 1);
    }
    if (std::filesystem::exists(dir / "item_ids.csv")) {
        num_items = std::max(num_items, read_id_map(dir / "item_ids.csv").size());
    }
    std::vector<Interaction> pairs;
    pairs.reserve(train_rows.size());
    for (const auto& r : train_rows) pairs.push_back({static_cast<Index>(r[0]), static_cast<Index>(r[1]), 0});
    if (pairs.empty()) throw EmptyDataset("empty train.csv in " + dir.string());

    LeaveOneOutSplit s;
    s.train = InteractionSet::from_pairs(num_users, num_items, std::move(pairs));
    s.holdout.assign(num_users, kNoHoldout);
    s.negatives.resize(num_users);
    for (const auto& r : holdout_rows) s.holdout[r[0]] = static_cast<Index>(r[1]);
    for (const auto& r : neg_rows) {
        if (static_cast<std::size_t>(r[0]) >= num_users) {
            throw DimensionMismatch("negatives for unknown user " + std::to_string(r[0]));
        }
        auto& neg = s.negatives[r[0]];
        for (std::size_t k = 1; k < r.size(); ++k) neg.push_back(static_cast<Index>(r[k]));
        std::sort(neg.begin(), neg.end());
    }
    return s;
}

/// Loads the NCF benchmark layout: <prefix>.train.rating, <prefix>.test.rating
/// and <prefix>.test.negative, e.g. prefix "Data/ml-1m".
inline LeaveOneOutSplit read_ncf_leave_one_out(const std::string& prefix) {
    std::vector<Interaction> pairs;
    std::size_t num_users = 0, num_items = 0;
    auto read_ratings = [&](const std::string& path, std::vector<Interaction>& out) {
        LineReader reader(path);
        std::string line;
        while (reader.next(line)) {
            if (detail::trim(line).empty()) continue;
            auto f = detail::split_fields(line, "");
            auto u = f.size() >= 2 ? detail::parse_number<std::int64_t>(f[0]) : std::nullopt;
            auto i = f.size() >= 2 ? detail::parse_number<std::int64_t>(f[1]) : std::nullopt;
            if (!u || !i || *u < 0 || *i < 0) throw ParseError(path, reader.line_number(), "expected user item");
            out.push_back({static_cast<Index>(*u), static_cast<Index>(*i), 0});
            num_users = std::max<std::size_t>(num_users, *u + 1);
            num_items = std::max<std::size_t>(num_items, *i + 1);
        }
    };
    read_ratings(prefix + ".train.rating", pairs);
    std::vector<Interaction> test;
    read_ratings(prefix + ".test.rating", test);

    std::vector<std::vector<Index>> negatives(num_users);
    {
        const std::string path = prefix + ".test.negative";
        LineReader reader(path);
        std::string line;
        while (reader.next(line)) {
            if (detail::trim(line).empty()) continue;
            auto f = detail::split_fields(line, "");
            // First field is "(user,item)".
            auto head = f.empty() ? std::string_view{} : f[0];
            auto comma = head.find(',');
            if (head.size() < 5 || head.front() != '(' || comma == std::string_view::npos) {
                throw ParseError(path, reader.line_number(), "expected (user,item) prefix");
            }
            auto u = detail::parse_number<std::int64_t>(head.substr(1, comma - 1));
            if (!u || *u < 0 || static_cast<std::size_t>(*u) >= num_users) {
                throw ParseError(path, reader.line_number(), "bad user");
            }
            for (std::size_t k = 1; k < f.size(); ++k) {
                auto i = detail::parse_number<std::int64_t>(f[k]);
                if (!i || *i < 0) throw ParseError(path, reader.line_number(), "bad negative item");
                num_items = std::max<std::size_t>(num_items, *i + 1);
                negatives[*u].push_back(static_cast<Index>(*i));
            }
            std::sort(negatives[*u].begin(), negatives[*u].end());
        }
    }
    LeaveOneOutSplit s;
    s.train = InteractionSet::from_pairs(num_users, num_items, std::move(pairs));
    s.holdout.assign(num_users, ~Index{0});
    for (const auto& t : test) s.holdout[t.user] = t.item;
    for (std::size_t u = 0; u < num_users; ++u) {
        if (s.holdout[u] == ~Index{0}) throw InputError("user " + std::to_string(u) + " has no test item");
    }
    s.negatives = std::move(negatives);
    return s;
}

}  // namespace ials
