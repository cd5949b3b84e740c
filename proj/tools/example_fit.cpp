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

// Minimal library use: load interactions, hold out one item per user,
// train, and report HR@10 / NDCG@10.
//
//   ials_example ratings.csv [dim]
//
// ratings.csv has a header row and user,item[,...] columns.

#include <cstdlib>
#include <iostream>

#include "ials/ials.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: " << argv[0] << " ratings.csv [dim]\n";
        return 2;
    }
    try {
        auto format = ials::InteractionFormat::csv();
        format.has_header = true;
        auto loaded = ials::load_interactions(argv[1], format);
        auto split = ials::leave_one_out_split(loaded.data, {});

        ials::Hyperparameters hp;
        hp.dim = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 32;
        hp.alpha0 = 0.3;
        hp.lambda = 0.007;
        hp.iterations = 12;

        auto result = ials::train(split.train, hp, [](const ials::LossReport& r, const ials::FactorModel&) {
            std::cout << "iteration " << r.iteration << " loss " << r.total << '\n';
        });
        auto report = ials::evaluate_sampled(result.model, split);
        std::cout << "HR@10 " << report.at("hr@10") << "  NDCG@10 " << report.at("ndcg@10") << '\n';
    } catch (const ials::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
