// Copyright 2026 The steerq Authors.
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


/**
 * @file cli.hpp
 * Command-line front end. Exit codes: 0 success, 2 configuration or usage
 * error, 3 insufficient data, 1 anything else.
 */

#pragma once

#include <algorithm>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steerq_tool/pipeline.hpp"

namespace steerq::tool {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInsufficient = 3;

/// L^2 / (4 (L - 1)) as a reduced fraction.
[[nodiscard]] inline std::string variance_fraction(int L) {
    long long num = static_cast<long long>(L) * L;
    long long den = 4LL * (L - 1);
    const long long g = std::gcd(num, den);
    num /= g;
    den /= g;
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

inline void add_common(CLI::App *cmd, CommonOptions &o, bool need_config) {
    auto *c = cmd->add_option("--config", o.config, "experiment configuration file");
    if (need_config) {
        c->required();
    }
    cmd->add_option("--out", o.out, "output directory (overrides the config)");
    cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
    cmd->add_option("--threads", o.threads, "worker threads (overrides the config)");
}

[[nodiscard]] inline RunContext make_context(const CommonOptions &o, std::ostream &err) {
    RunContext ctx;
    ctx.config = load_config(o.config, !o.seed.has_value());
    if (o.seed) {
        ctx.config.seed = *o.seed;
        ctx.config.has_seed = true;
    }
    if (!o.out.empty()) {
        ctx.config.output = o.out;
    }
    if (o.threads > 0) {
        ctx.config.threads = o.threads;
    }
    ctx.log = &err;
    return ctx;
}

/// Run the tool on `args` (without the program name).
inline int run_cli(std::vector<std::string> args, std::ostream &out, std::ostream &err) {
    CLI::App app{"steerq: steered measurement of charge fluctuations in monitored circuits"};
    app.set_version_flag("--version", STEERQ_VERSION);
    app.require_subcommand(1);

    CommonOptions common;
    bool force = false;
    auto *init = app.add_subcommand("init", "write a configuration template");
    add_common(init, common, false);
    init->add_flag("--force", force, "overwrite an existing file");

    auto *simulate = app.add_subcommand("simulate", "run and store target trajectories");
    add_common(simulate, common, true);
    auto *steer = app.add_subcommand("steer", "steer towards stored targets and estimate");
    add_common(steer, common, true);
    auto *analyze = app.add_subcommand("analyze", "effective curves, entropy, collapse");
    add_common(analyze, common, true);
    auto *timeevo = app.add_subcommand("timeevo", "time evolution from two initial states");
    add_common(timeevo, common, true);

    auto *oracle = app.add_subcommand("oracle", "closed-form reference values");
    oracle->require_subcommand(1);
    int L = 8;
    double eps = 0.01;
    std::optional<double> sat;
    double success = 1.0;
    std::uint64_t samples = 100000;
    std::uint64_t oseed = 0;
    double renyi = 1.0;
    std::uint64_t nsamples = 1000;
    double variance = 1.0;
    auto *o_var = oracle->add_subcommand("variance", "saturated half-chain variance");
    o_var->add_option("--L", L, "chain length")->required();
    auto *o_ent = oracle->add_subcommand("entropy", "half-chain entropy of the oracle state");
    o_ent->add_option("--L", L, "chain length")->required();
    o_ent->add_option("--n", renyi, "Renyi index (1 = von Neumann)");
    auto *o_spec = oracle->add_subcommand("spectrum", "half-chain entanglement spectrum");
    o_spec->add_option("--L", L, "chain length")->required();
    auto *o_over = oracle->add_subcommand("overhead", "shots for relative precision eps");
    o_over->add_option("--L", L, "chain length")->required();
    o_over->add_option("--eps", eps, "relative precision")->required();
    o_over->add_option("--variance", sat, "saturated variance (default: oracle value)");
    o_over->add_option("--success-constant", success, "c in the c / sqrt(L) success fraction");
    auto *o_vv = oracle->add_subcommand("varvar", "variance of a Gaussian sample variance");
    o_vv->add_option("--N", nsamples, "sample size")->required();
    o_vv->add_option("--variance", variance, "population variance")->required();
    auto *o_lem = oracle->add_subcommand("lemmas", "Monte Carlo check of the moment lemmas");
    o_lem->add_option("--samples", samples, "draws (>= 10000)");
    o_lem->add_option("--seed", oseed, "seed");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*init) {
            const std::string text = config_template();
            if (common.config.empty()) {
                out << text;
                return kExitOk;
            }
            if (fs::exists(common.config) && !force) {
                err << "error: " << common.config << " exists (use --force)\n";
                return kExitFailure;
            }
            ensure_parent(common.config);
            std::ofstream f(common.config, std::ios::binary | std::ios::trunc);
            f << text;
            if (!f) {
                throw IoError("cannot write " + common.config);
            }
            err << "wrote " << common.config << '\n';
            return kExitOk;
        }
        if (*simulate || *steer || *analyze || *timeevo) {
            RunContext ctx;
            try {
                ctx = make_context(common, err);
            } catch (const ConfigError &e) {
                err << "config error: " << common.config << ": " << e.what() << '\n';
                return kExitConfig;
            }
            if (*simulate) {
                cmd_simulate(ctx);
            } else if (*steer) {
                cmd_steer(ctx);
            } else if (*analyze) {
                const auto s = cmd_analyze(ctx);
                if (s.collapsed) {
                    out << "p_c = " << fmt(s.best_pc) << "\nnu = " << fmt(s.best_nu)
                        << "\nC = " << fmt(s.best_cost) << '\n';
                }
            } else {
                cmd_timeevo(ctx);
            }
            return kExitOk;
        }
        if (*o_var) {
            out << variance_fraction(L) << " = " << fmt(oracle_variance(L)) << '\n';
        } else if (*o_ent) {
            const auto e = oracle_entropy(L, renyi);
            out << "exact = " << fmt(e.exact) << "\nleading = " << fmt(e.leading) << '\n';
        } else if (*o_spec) {
            const auto s = oracle_spectrum(L);
            out << "charge,dimension,eigenvalue\n";
            for (const auto &b : s.blocks) {
                out << b.charge << ',' << b.dimension << ',' << b.numerator << '/'
                    << s.denominator << '\n';
            }
            out << "# trace " << (s.trace_exact ? "= 1 exactly" : "!= 1") << '\n';
        } else if (*o_over) {
            const auto o = overhead_estimate(L, eps, sat, success);
            out << "saturated_variance = " << fmt(o.saturated_variance)
                << "\nsector0_shots = " << o.sector0_shots
                << "\ntotal_shots = " << o.total_shots << '\n';
        } else if (*o_vv) {
            out << fmt(variance_of_variance(nsamples, variance)) << '\n';
        } else if (*o_lem) {
            const auto rep = lemma_checks(samples, oseed);
            out << rep.to_text();
            return rep.passed() ? kExitOk : kExitFailure;
        }
        return kExitOk;
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InsufficientData &e) {
        err << "insufficient data: " << e.what() << '\n';
        return kExitInsufficient;
    } catch (const InvalidArgument &e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace steerq::tool
