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

// Command-line harness: split, train, evaluate and sweep subcommands.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ials/dataset.hpp"
#include "ials/errors.hpp"
#include "ials/metrics.hpp"
#include "ials/model.hpp"
#include "ials/parallel.hpp"
#include "ials/solver.hpp"

namespace ials::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Protocol { strong_gen, loo };

inline Protocol parse_protocol(const std::string& s) {
    if (s == "strong-gen") return Protocol::strong_gen;
    if (s == "loo") return Protocol::loo;
    throw InputError("unknown protocol " + s);
}

inline std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    if (s.empty()) return out;
    for (auto f : detail::split_fields(s, ",")) {
        auto v = detail::parse_number<std::size_t>(f);
        if (!v || *v == 0) throw InputError("bad positive integer list: " + s);
        out.push_back(*v);
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (auto f : detail::split_fields(s, ",")) {
        auto t = std::string(detail::trim(f));
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size() || t.empty()) throw InputError("bad number list: " + s);
        out.push_back(v);
    }
    return out;
}

inline json metrics_json(const MetricReport& m) {
    json j = json::object();
    for (const auto& [name, value] : m.values) j[name] = value;
    j["n_users"] = m.n_users;
    return j;
}

inline json losses_json(const LossReport& r) {
    return json{{"iteration", r.iteration}, {"L", r.total}, {"L_S", r.observed}, {"L_I", r.implicit},
                {"R", r.regularizer}};
}

inline json hparams_json(const Hyperparameters& hp) {
    json j{{"dim", hp.dim},
           {"alpha0", hp.alpha0},
           {"nu", hp.nu},
           {"nu_star", hp.nu_star},
           {"iterations", hp.iterations},
           {"sigma_star", hp.sigma_star},
           {"seed", hp.seed},
           {"solver", hp.solver == SolverKind::exact ? "exact" : "block"},
           {"block_size", hp.block_size},
           {"projection_repeats", hp.projection_repeats},
           {"block_passes", hp.block_passes}};
    if (hp.lambda) j["lambda"] = *hp.lambda;
    if (hp.lambda_star) j["lambda_star"] = *hp.lambda_star;
    return j;
}

inline Hyperparameters hparams_from_json(const json& j) {
    Hyperparameters hp;
    hp.dim = j.at("dim").get<std::size_t>();
    hp.alpha0 = j.at("alpha0").get<double>();
    hp.nu = j.at("nu").get<double>();
    hp.nu_star = j.at("nu_star").get<double>();
    hp.iterations = j.at("iterations").get<std::size_t>();
    hp.sigma_star = j.at("sigma_star").get<double>();
    hp.seed = j.at("seed").get<std::uint64_t>();
    hp.solver = j.at("solver").get<std::string>() == "block" ? SolverKind::block : SolverKind::exact;
    hp.block_size = j.at("block_size").get<std::size_t>();
    hp.projection_repeats = j.at("projection_repeats").get<std::size_t>();
    hp.block_passes = j.value("block_passes", std::size_t{1});
    if (j.contains("lambda")) hp.lambda = j["lambda"].get<double>();
    if (j.contains("lambda_star")) hp.lambda_star = j["lambda_star"].get<double>();
    return hp;
}

/// Hyperparameter flags; only flags actually given override a base config.
struct HparamFlags {
    std::size_t dim = 0;
    double alpha0 = 0, lambda = 0, lambda_star = 0, nu = 0, nu_star = 0, sigma_star = 0;
    std::size_t iterations = 0, block_size = 0, projection_repeats = 0, block_passes = 0;
    std::uint64_t seed = 0;
    std::string solver;
    std::vector<CLI::Option*> opts;
    CLI::Option *o_dim, *o_alpha0, *o_lambda, *o_lambda_star, *o_nu, *o_nu_star, *o_iterations, *o_sigma_star,
        *o_seed, *o_solver, *o_block_size, *o_projection_repeats, *o_block_passes;

    void add(CLI::App* app, bool grids = false) {
        o_dim = app->add_option("--dim", dim, "embedding dimension d");
        if (!grids) {
            o_alpha0 = app->add_option("--alpha0", alpha0, "unobserved weight");
            o_lambda = app->add_option("--lambda", lambda, "regularization (direct)");
            o_lambda_star = app->add_option("--lambda-star", lambda_star, "regularization on the nu-star scale");
        } else {
            o_alpha0 = o_lambda = o_lambda_star = nullptr;
        }
        o_nu = app->add_option("--nu", nu, "frequency regularization exponent");
        o_nu_star = app->add_option("--nu-star", nu_star, "reference exponent for --lambda-star");
        o_iterations = app->add_option("--iterations", iterations, "training iterations T");
        o_sigma_star = app->add_option("--sigma-star", sigma_star, "init scale; stddev is sigma*/sqrt(d)");
        o_seed = app->add_option("--seed", seed, "random seed");
        o_solver = app->add_option("--solver", solver, "exact or block")->check(CLI::IsMember({"exact", "block"}));
        o_block_size = app->add_option("--block-size", block_size, "block solver block size");
        o_projection_repeats = app->add_option("--projection-repeats", projection_repeats,
                                               "block passes when folding in a user");
        o_block_passes = app->add_option("--block-passes", block_passes,
                                         "block passes per entity per training half-step");
    }

    static bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

    void apply(Hyperparameters& hp) const {
        if (given(o_dim)) hp.dim = dim;
        if (given(o_alpha0)) hp.alpha0 = alpha0;
        if (given(o_lambda)) {
            hp.lambda = lambda;
            hp.lambda_star.reset();
        }
        if (given(o_lambda_star)) {
            hp.lambda_star = lambda_star;
            if (!given(o_lambda)) hp.lambda.reset();
        }
        if (given(o_nu)) hp.nu = nu;
        if (given(o_nu_star)) hp.nu_star = nu_star;
        if (given(o_iterations)) hp.iterations = iterations;
        if (given(o_sigma_star)) hp.sigma_star = sigma_star;
        if (given(o_seed)) hp.seed = seed;
        if (given(o_solver)) hp.solver = solver == "block" ? SolverKind::block : SolverKind::exact;
        if (given(o_block_size)) hp.block_size = block_size;
        if (given(o_projection_repeats)) hp.projection_repeats = projection_repeats;
        if (given(o_block_passes)) hp.block_passes = block_passes;
    }
};

/// Evaluation data of one protocol, loaded from a split directory.
struct EvalData {
    Protocol protocol;
    StrongGeneralizationSplit strong;
    LeaveOneOutSplit loo;

    const InteractionSet& train() const { return protocol == Protocol::strong_gen ? strong.train : loo.train; }
};

inline EvalData load_split(const fs::path& dir, Protocol protocol) {
    if (!fs::is_directory(dir)) throw InputError("no such split directory: " + dir.string());
    EvalData d{protocol, {}, {}};
    if (protocol == Protocol::strong_gen) {
        d.strong = read_strong_generalization(dir);
    } else {
        d.loo = read_leave_one_out(dir);
    }
    return d;
}

enum class EvalSet { validation, test, none };

inline EvalSet parse_eval_set(const std::string& s, Protocol p) {
    if (s.empty()) return p == Protocol::strong_gen ? EvalSet::validation : EvalSet::test;
    if (s == "validation") return EvalSet::validation;
    if (s == "test") return EvalSet::test;
    if (s == "none") return EvalSet::none;
    throw InputError("unknown eval set " + s);
}

struct Ks {
    std::vector<std::size_t> recall;
    std::vector<std::size_t> ndcg;
};

inline Ks resolve_ks(Protocol p, const std::string& recall, const std::string& ndcg) {
    Ks ks;
    if (p == Protocol::strong_gen) {
        ks.recall = recall.empty() ? std::vector<std::size_t>{20, 50} : parse_size_list(recall);
        ks.ndcg = ndcg.empty() ? std::vector<std::size_t>{100} : parse_size_list(ndcg);
    } else {
        // Under leave-one-out the recall cut-offs double as HR cut-offs.
        ks.recall = recall.empty() ? std::vector<std::size_t>{10} : parse_size_list(recall);
        ks.ndcg = ndcg.empty() ? ks.recall : parse_size_list(ndcg);
    }
    return ks;
}

inline void check_dimensions(const FactorModel& m, const EvalData& d) {
    const auto& train = d.train();
    if (m.num_items() != train.num_items()) {
        throw DimensionMismatch("model has " + std::to_string(m.num_items()) + " items, split vocabulary has " +
                                std::to_string(train.num_items()));
    }
    if (d.protocol == Protocol::loo && m.num_users() != train.num_users()) {
        throw DimensionMismatch("model has " + std::to_string(m.num_users()) + " users, split has " +
                                std::to_string(train.num_users()));
    }
}

inline MetricReport evaluate(const FactorModel& m, const EvalData& d, const Hyperparameters& hp, double lambda,
                             EvalSet set, const Ks& ks) {
    check_dimensions(m, d);
    if (d.protocol == Protocol::strong_gen) {
        const auto& holdout = set == EvalSet::validation ? d.strong.validation : d.strong.test;
        return evaluate_strong_generalization(m, holdout, hp, lambda, {ks.recall, ks.ndcg});
    }
    if (set == EvalSet::validation) throw InputError("leave-one-out split directories have no validation set");
    MetricReport hr = evaluate_sampled(m, d.loo, ks.recall);
    MetricReport out;
    out.n_users = hr.n_users;
    for (auto k : ks.recall) out.values["hr@" + std::to_string(k)] = hr.values["hr@" + std::to_string(k)];
    if (ks.ndcg != ks.recall) {
        MetricReport nd = evaluate_sampled(m, d.loo, ks.ndcg);
        for (auto k : ks.ndcg) out.values["ndcg@" + std::to_string(k)] = nd.values["ndcg@" + std::to_string(k)];
    } else {
        for (auto k : ks.ndcg) out.values["ndcg@" + std::to_string(k)] = hr.values["ndcg@" + std::to_string(k)];
    }
    return out;
}

/// Expands "--config FILE" (flat `key = value` lines, '#' comments) into
/// "--key=value" arguments placed before the command-line flags, which
/// therefore take precedence.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> head, rest;
    std::optional<std::string> config;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) {
            config = args[++k];
        } else if (args[k].rfind("--config=", 0) == 0) {
            config = args[k].substr(9);
        } else {
            rest.push_back(args[k]);
        }
    }
    if (!config) return rest;
    std::ifstream in(*config);
    if (!in) throw InputError("cannot open config " + *config);
    std::vector<std::string> from_file;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        auto t = detail::trim(line);
        if (t.empty() || t.front() == '[') continue;
        auto eq = t.find('=');
        if (eq == std::string_view::npos) throw ParseError(*config, n, "expected key = value");
        auto key = std::string(detail::trim(t.substr(0, eq)));
        auto value = std::string(detail::trim(t.substr(eq + 1)));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        for (auto& c : key) {
            if (c == '_') c = '-';
        }
        from_file.push_back("--" + key + "=" + value);
    }
    // Subcommand name stays first.
    if (!rest.empty()) head.push_back(rest.front());
    head.insert(head.end(), from_file.begin(), from_file.end());
    head.insert(head.end(), rest.begin() + (rest.empty() ? 0 : 1), rest.end());
    return head;
}

inline void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

/// Shortest text that parses back to exactly `v`.
inline std::string shortest(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline std::string repeat_suffix(std::size_t r, std::size_t n) { return n == 1 ? "" : "." + std::to_string(r); }

/// Entry point; returns the process exit code (0 ok, 1 runtime failure,
/// 2 usage or input error).
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"iALS matrix factorization: split, train, evaluate, sweep"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "worker threads (default: all cores)");

    // split
    auto* split = app.add_subcommand("split", "materialize an evaluation split from raw interactions");
    std::string data_path, protocol_name, out_dir, format_name = "csv", delimiter, columns, split_seed_s;
    std::optional<double> rating_threshold;
    bool header = false, allow_train_negatives = false;
    std::uint64_t split_seed = 0;
    std::size_t n_holdout = 10000, n_validation = 10000, min_inter = 5, n_negatives = 100;
    double fold_in_fraction = 0.8;
    split->add_option("--data", data_path, "raw interaction file (csv/tsv, optionally gzipped)")->required();
    split->add_option("--protocol", protocol_name, "strong-gen or loo")
        ->required()
        ->check(CLI::IsMember({"strong-gen", "loo"}));
    split->add_option("--out", out_dir, "output split directory")->required();
    split->add_option("--seed", split_seed, "random seed");
    split->add_option("--format", format_name, "csv, tsv, ml-dat or whitespace")
        ->check(CLI::IsMember({"csv", "tsv", "ml-dat", "whitespace"}));
    split->add_option("--delimiter", delimiter, "field delimiter (overrides --format)");
    split->add_option("--columns", columns, "column roles in order, e.g. user,item,rating,timestamp");
    split->add_option("--rating-threshold", rating_threshold, "drop rows with rating below this");
    split->add_flag("--header", header, "skip the first line");
    split->add_option("--n-holdout-users", n_holdout, "strong-gen: test users");
    split->add_option("--n-validation-users", n_validation, "strong-gen: validation users");
    split->add_option("--fold-in-fraction", fold_in_fraction, "strong-gen: fraction revealed for fold-in");
    split->add_option("--min-user-interactions", min_inter, "strong-gen: eligibility threshold for holdout users");
    split->add_option("--n-negatives", n_negatives, "loo: sampled negatives per user");
    split->add_flag("--allow-train-negatives", allow_train_negatives,
                    "loo: negatives may include the user's other items");

    // train / evaluate / sweep share these.
    struct Common {
        std::string split_dir, protocol, out, recall_ks, ndcg_ks, eval_set;
        std::size_t repeats = 1;
        HparamFlags hp;
    };
    auto add_common = [](CLI::App* c, Common& o, bool grids) {
        c->add_option("--split-dir", o.split_dir, "split directory")->required();
        c->add_option("--protocol", o.protocol, "strong-gen or loo")
            ->required()
            ->check(CLI::IsMember({"strong-gen", "loo"}));
        c->add_option("--recall-ks", o.recall_ks, "recall cut-offs (HR under loo), comma separated");
        c->add_option("--ndcg-ks", o.ndcg_ks, "NDCG cut-offs, comma separated");
        c->add_option("--eval-set", o.eval_set, "validation, test or none")
            ->check(CLI::IsMember({"validation", "test", "none"}));
        o.hp.add(c, grids);
    };

    auto* train_cmd = app.add_subcommand("train", "train a model, logging losses and metrics per iteration");
    Common tr;
    add_common(train_cmd, tr, false);
    train_cmd->add_option("--out", tr.out, "output directory")->required();
    train_cmd->add_option("--repeats", tr.repeats, "models trained with seeds seed..seed+repeats-1")
        ->check(CLI::PositiveNumber);

    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate saved models on a split");
    Common ev;
    std::vector<std::string> model_paths;
    add_common(eval_cmd, ev, false);
    eval_cmd->add_option("--model", model_paths, "model file(s)")->required()->multi_option_policy(
        CLI::MultiOptionPolicy::TakeAll);
    eval_cmd->add_option("--out", ev.out, "write the JSON report here as well");

    auto* sweep_cmd = app.add_subcommand("sweep", "grid search over alpha0 and lambda (or lambda-star)");
    Common sw;
    std::string alpha_grid, lambda_grid, lambda_star_grid, select;
    add_common(sweep_cmd, sw, true);
    sweep_cmd->add_option("--alpha0", alpha_grid, "comma separated alpha0 grid")->required();
    sweep_cmd->add_option("--lambda", lambda_grid, "comma separated lambda grid");
    sweep_cmd->add_option("--lambda-star", lambda_star_grid, "comma separated lambda-star grid");
    sweep_cmd->add_option("--select", select, "selection metric (default recall@20 or hr@10)");
    sweep_cmd->add_option("--out", sw.out, "output directory")->required();

    try {
        args = expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    if (threads > 0) set_num_threads(threads);

    try {
        if (split->parsed()) {
            InteractionFormat fmt;
            if (format_name == "tsv") fmt = InteractionFormat::tsv();
            if (format_name == "ml-dat") fmt = InteractionFormat::movielens_dat();
            if (format_name == "whitespace") fmt.delimiter = "";
            if (split->count("--delimiter")) fmt.delimiter = delimiter == "\\t" ? "\t" : delimiter;
            if (!columns.empty()) {
                fmt.user_column = fmt.item_column = fmt.rating_column = fmt.timestamp_column = -1;
                int k = 0;
                for (auto name : detail::split_fields(columns, ",")) {
                    auto n = detail::trim(name);
                    if (n == "user") fmt.user_column = k;
                    else if (n == "item") fmt.item_column = k;
                    else if (n == "rating") fmt.rating_column = k;
                    else if (n == "timestamp") fmt.timestamp_column = k;
                    else if (n != "_" && n != "skip") throw InputError("unknown column role " + std::string(n));
                    ++k;
                }
                if (fmt.user_column < 0 || fmt.item_column < 0) throw InputError("--columns needs user and item");
            }
            fmt.rating_threshold = rating_threshold;
            fmt.has_header = header;
            if (rating_threshold && fmt.rating_column < 0) throw InputError("--rating-threshold needs a rating column");

            auto loaded = load_interactions(data_path, fmt);
            const auto& data = loaded.data;
            out << "loaded users=" << data.num_users() << " items=" << data.num_items()
                << " interactions=" << data.num_pairs() << '\n';
            const fs::path dir(out_dir);
            if (parse_protocol(protocol_name) == Protocol::strong_gen) {
                StrongGeneralizationOptions opt{n_holdout, n_validation, fold_in_fraction, min_inter, split_seed};
                auto s = strong_generalization_split(data, opt);
                write_strong_generalization(dir, s);
                write_id_map(dir / "item_ids.csv", loaded.items.subset(s.item_vocabulary));
                write_id_map(dir / "user_ids.csv", loaded.users.subset(s.train_user_vocabulary));
                out << "train users=" << s.train.num_users() << " items=" << s.train.num_items()
                    << " interactions=" << s.train.num_pairs() << '\n'
                    << "validation users=" << s.validation.users.size() << " test users=" << s.test.users.size()
                    << '\n';
            } else {
                LeaveOneOutOptions opt{n_negatives, split_seed, !allow_train_negatives};
                auto s = leave_one_out_split(data, opt);
                write_leave_one_out(dir, s);
                write_id_map(dir / "item_ids.csv", loaded.items);
                write_id_map(dir / "user_ids.csv", loaded.users);
                out << "train interactions=" << s.train.num_pairs() << " test users=" << s.holdout.size()
                    << " candidates per user=" << n_negatives + 1 << '\n';
            }
            return 0;
        }

        if (train_cmd->parsed()) {
            const auto protocol = parse_protocol(tr.protocol);
            Hyperparameters hp;
            tr.hp.apply(hp);
            hp.validate();
            const auto data = load_split(tr.split_dir, protocol);
            const auto set = parse_eval_set(tr.eval_set, protocol);
            const auto ks = resolve_ks(protocol, tr.recall_ks, tr.ndcg_ks);
            const fs::path dir(tr.out);
            fs::create_directories(dir);
            if (fs::exists(fs::path(tr.split_dir) / "item_ids.csv")) {
                fs::copy_file(fs::path(tr.split_dir) / "item_ids.csv", dir / "item_ids.csv",
                              fs::copy_options::overwrite_existing);
            }
            for (std::size_t r = 0; r < tr.repeats; ++r) {
                Hyperparameters run_hp = hp;
                run_hp.seed = hp.seed + r;
                const auto suffix = repeat_suffix(r, tr.repeats);
                std::ofstream log(dir / ("train_log" + suffix + ".jsonl"), std::ios::binary);
                if (!log) throw Error("cannot write training log in " + dir.string());
                const double lambda = resolve_lambda(run_hp, data.train());
                auto observer = [&](const LossReport& loss, const FactorModel& model) {
                    json rec = losses_json(loss);
                    if (set != EvalSet::none) rec["metrics"] = metrics_json(evaluate(model, data, run_hp, lambda, set, ks));
                    log << rec.dump() << '\n';
                    log.flush();
                    err << rec.dump() << '\n';
                };
                auto result = train(data.train(), run_hp, observer);
                save_model(dir / ("model" + suffix + ".bin"), result.model);
                json side = hparams_json(run_hp);
                side["resolved_lambda"] = result.lambda;
                write_text(dir / ("model" + suffix + ".bin.json"), side.dump(2) + "\n");
            }
            out << "wrote " << tr.repeats << " model(s) to " << dir.string() << '\n';
            return 0;
        }

        if (eval_cmd->parsed()) {
            const auto protocol = parse_protocol(ev.protocol);
            const auto data = load_split(ev.split_dir, protocol);
            auto set = parse_eval_set(ev.eval_set, protocol);
            if (set == EvalSet::none) set = EvalSet::test;
            const auto ks = resolve_ks(protocol, ev.recall_ks, ev.ndcg_ks);
            std::vector<MetricReport> reports;
            for (const auto& path : model_paths) {
                const auto model = load_model(path);
                Hyperparameters hp;
                // Leave-one-out scoring never folds in, so it needs no regularization.
                if (protocol == Protocol::loo) hp.lambda = 1.0;
                if (fs::exists(path + ".json")) {
                    std::ifstream in(path + ".json");
                    hp = hparams_from_json(json::parse(in));
                }
                ev.hp.apply(hp);
                hp.dim = model.dim();
                hp.validate();
                reports.push_back(evaluate(model, data, hp, resolve_lambda(hp, data.train()), set, ks));
            }
            json j = json::object();
            if (reports.size() == 1) {
                j = metrics_json(reports.front());
            } else {
                for (const auto& [name, _] : reports.front().values) {
                    double mean = 0.0, sq = 0.0;
                    for (const auto& r : reports) mean += r.values.at(name);
                    mean /= static_cast<double>(reports.size());
                    for (const auto& r : reports) sq += (r.values.at(name) - mean) * (r.values.at(name) - mean);
                    j[name] = mean;
                    j[name + "_std"] = std::sqrt(sq / static_cast<double>(reports.size() - 1));
                }
                j["n_users"] = reports.front().n_users;
                j["n_models"] = reports.size();
            }
            out << j.dump() << '\n';
            if (!ev.out.empty()) write_text(ev.out, j.dump() + "\n");
            return 0;
        }

        if (sweep_cmd->parsed()) {
            const auto protocol = parse_protocol(sw.protocol);
            Hyperparameters base;
            sw.hp.apply(base);
            const auto alphas = parse_double_list(alpha_grid);
            const bool star = !lambda_star_grid.empty();
            if (star == !lambda_grid.empty()) throw InputError("give exactly one of --lambda and --lambda-star");
            const auto lambdas = parse_double_list(star ? lambda_star_grid : lambda_grid);
            for (double v : alphas) {
                if (!(v > 0)) throw InputError("grid values must be positive");
            }
            for (double v : lambdas) {
                if (!(v > 0)) throw InputError("grid values must be positive");
            }
            const auto ks = resolve_ks(protocol, sw.recall_ks, sw.ndcg_ks);
            if (select.empty()) select = protocol == Protocol::strong_gen ? "recall@20" : "hr@10";

            auto data = load_split(sw.split_dir, protocol);
            EvalSet set = EvalSet::validation;
            if (protocol == Protocol::loo) {
                // Tune on a leave-one-out split carved from train; test stays untouched.
                LeaveOneOutOptions opt;
                opt.n_negatives = data.loo.negatives.empty() ? 100 : data.loo.negatives.front().size();
                opt.seed = base.seed;
                opt.skip_sparse_users = true;
                data.loo = leave_one_out_split(data.loo.train, opt);
                set = EvalSet::test;
            }
            const fs::path dir(sw.out);
            fs::create_directories(dir);
            std::ofstream csv(dir / "sweep.csv", std::ios::binary);
            if (!csv) throw Error("cannot write sweep.csv");
            std::vector<std::string> metric_names;
            bool header_written = false;
            std::optional<std::pair<double, std::string>> best;
            std::size_t failures = 0;
            std::vector<std::string> pending_failures;
            for (double a : alphas) {
                for (double l : lambdas) {
                    Hyperparameters hp = base;
                    hp.alpha0 = a;
                    hp.lambda.reset();
                    hp.lambda_star.reset();
                    (star ? hp.lambda_star : hp.lambda) = l;
                    std::ostringstream row;
                    row << shortest(a) << ',' << shortest(l);
                    try {
                        hp.validate();
                        auto result = train(data.train(), hp);
                        auto report = evaluate(result.model, data, hp, result.lambda, set, ks);
                        if (!header_written) {
                            for (const auto& [name, _] : report.values) metric_names.push_back(name);
                            csv << "alpha0," << (star ? "lambda_star" : "lambda");
                            for (const auto& n : metric_names) csv << ',' << n;
                            csv << ",status\n";
                            header_written = true;
                        }
                        for (const auto& n : metric_names) row << ',' << shortest(report.values.at(n));
                        row << ",ok";
                        const double v = report.at(select);
                        if (!best || v > best->first) best = {v, row.str()};
                        csv << row.str() << '\n';
                    } catch (const std::exception& e) {
                        ++failures;
                        err << "grid point alpha0=" << a << " lambda=" << l << " failed: " << e.what() << '\n';
                        pending_failures.push_back(row.str());
                    }
                    out << row.str() << '\n';
                }
            }
            if (!header_written) {
                csv << "alpha0," << (star ? "lambda_star" : "lambda") << ",status\n";
            }
            for (const auto& r : pending_failures) {
                csv << r;
                for (std::size_t k = 0; k < metric_names.size(); ++k) csv << ',';
                csv << ",failed\n";
            }
            if (failures == alphas.size() * lambdas.size()) {
                err << "error: every grid point failed\n";
                return 1;
            }
            out << "best " << select << ": " << best->second << '\n';
            return 0;
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace ials::cli
