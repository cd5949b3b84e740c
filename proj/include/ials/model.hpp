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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ials/errors.hpp"
#include "ials/interactions.hpp"
#include "ials/linalg.hpp"
#include "ials/random.hpp"

namespace ials {

/// Matrix factorization model: scores are ⟨w_u, h_i⟩.
struct FactorModel {
    DenseMatrix users;  // |U| x d
    DenseMatrix items;  // |I| x d

    std::size_t dim() const { return users.cols(); }
    std::size_t num_users() const { return users.rows(); }
    std::size_t num_items() const { return items.rows(); }

    friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

/// Entries drawn i.i.d. from N(0, (σ*/√d)²); the 1/√d factor keeps the
/// variance of an initial score independent of d. Users are drawn first.
inline FactorModel init_model(std::size_t num_users, std::size_t num_items, std::size_t dim,
                              double sigma_star, std::uint64_t seed) {
    if (dim == 0) throw InputError("embedding dimension must be >= 1");
    const double stddev = sigma_star / std::sqrt(static_cast<double>(dim));
    Rng rng(seed);
    FactorModel m{DenseMatrix(num_users, dim), DenseMatrix(num_items, dim)};
    for (auto& v : m.users.values()) v = rng.normal(0.0, stddev);
    for (auto& v : m.items.values()) v = rng.normal(0.0, stddev);
    return m;
}

inline double score(const FactorModel& m, std::size_t user, std::size_t item) {
    return dot(m.users.row(user), m.items.row(item));
}

struct ScoredItem {
    Index item;
    double score;

    friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

/// Items in descending score order; equal scores rank the lower index first.
using RankedList = std::vector<ScoredItem>;

inline bool ranks_before(const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
}

/// Top n of precomputed scores, skipping excluded items.
inline RankedList top_n_of_scores(std::span<const double> scores, std::size_t n,
                                  std::span<const Index> exclude) {
    std::vector<char> skip(scores.size(), 0);
    for (auto i : exclude) {
        if (i < scores.size()) skip[i] = 1;
    }
    RankedList all;
    all.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!skip[i]) all.push_back({static_cast<Index>(i), scores[i]});
    }
    const std::size_t k = std::min(n, all.size());
    std::partial_sort(all.begin(), all.begin() + k, all.end(), ranks_before);
    all.resize(k);
    return all;
}

inline std::vector<double> score_all(std::span<const double> user_embedding, const DenseMatrix& items) {
    if (user_embedding.size() != items.cols()) throw DimensionMismatch("embedding length differs from model dim");
    std::vector<double> scores(items.rows());
    for (std::size_t i = 0; i < items.rows(); ++i) scores[i] = dot(user_embedding, items.row(i));
    return scores;
}

inline RankedList top_n(std::span<const double> user_embedding, const DenseMatrix& items, std::size_t n,
                        std::span<const Index> exclude = {}) {
    return top_n_of_scores(score_all(user_embedding, items), n, exclude);
}

// ---------------------------------------------------------------------------
// Persistence: "ials-model v1 <|U|> <|I|> <d>\n" then W and H as row-major
// little-endian float64.

namespace detail {

inline void write_f64(std::ostream& out, std::span<const double> values) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(double)));
    } else {
        for (double v : values) {
            auto bits = std::bit_cast<std::uint64_t>(v);
            char b[8];
            for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
            out.write(b, 8);
        }
    }
}

inline void read_f64(std::istream& in, std::span<double> values) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    } else {
        for (auto& v : values) {
            unsigned char b[8];
            in.read(reinterpret_cast<char*>(b), 8);
            std::uint64_t bits = 0;
            for (int k = 0; k < 8; ++k) bits |= std::uint64_t{b[k]} << (8 * k);
            v = std::bit_cast<double>(bits);
        }
    }
}

}  // namespace detail

inline void save_model(const std::filesystem::path& path, const FactorModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "ials-model v1 " << m.num_users() << ' ' << m.num_items() << ' ' << m.dim() << '\n';
    detail::write_f64(out, m.users.values());
    detail::write_f64(out, m.items.values());
    if (!out) throw Error("write failed: " + path.string());
}

inline FactorModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open model " + path.string());
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, version;
    std::size_t nu = 0, ni = 0, d = 0;
    hs >> magic >> version >> nu >> ni >> d;
    if (!hs || magic != "ials-model" || version != "v1" || d == 0) {
        throw InputError("not an ials-model v1 file: " + path.string());
    }
    FactorModel m{DenseMatrix(nu, d), DenseMatrix(ni, d)};
    detail::read_f64(in, m.users.values());
    detail::read_f64(in, m.items.values());
    if (!in) throw InputError("truncated model file: " + path.string());
    if (in.peek() != std::char_traits<char>::eof()) throw InputError("trailing bytes in model file: " + path.string());
    return m;
}

}  // namespace ials
