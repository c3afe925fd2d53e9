// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// semfed_cli run | ablate | gen-data

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "semfed/config.h"
#include "semfed/corpus.h"
#include "semfed/errors.h"
#include "semfed/harness.h"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "Overrides run.seed");
    cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
    cmd->add_option("--set", args.overrides, "section.key=value override (repeatable)");
}

semfed::RunConfig resolve(const CommonArgs& args) {
    semfed::RunConfig config = args.config_path.empty() ? semfed::RunConfig{} : semfed::load_config(args.config_path);
    for (const auto& o : args.overrides) semfed::apply_override(config, o);
    if (args.seed) config.seed = *args.seed;
    config.validate();
    return config;
}

void print_round(const semfed::RoundRecord& r) {
    if (r.skipped) {
        fmt::print("round {:>2}  skipped (no client available)\n", r.round);
        return;
    }
    fmt::print("round {:>2}  clients {}  ratio {:.4f}  savings {:.2f}%  server {:.3f}  client-heldout {:.3f}\n",
               r.round, r.clients.size(), r.compression_ratio, r.savings_pct, r.server_accuracy,
               r.mean_client_heldout_accuracy);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic-aware federated learning simulator"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CommonArgs ablate_args;
    CommonArgs gen_args;
    auto* run_cmd = app.add_subcommand("run", "Run one simulation and write the report files");
    add_common(run_cmd, run_args);
    auto* ablate_cmd = app.add_subcommand("ablate", "Run the selection, architecture and compression grids");
    add_common(ablate_cmd, ablate_args);
    std::vector<std::string> only;
    ablate_cmd->add_option("--only", only, "Restrict to groups: selection, architecture, compression");
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate and partition the synthetic corpus");
    add_common(gen_cmd, gen_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            const auto config = resolve(run_args);
            const auto report = semfed::run(config);
            for (const auto& r : report.rounds) print_round(r);
            semfed::emit_report(report, run_args.out);
            fmt::print("mean savings {:.2f}%  reports in {}\n", report.mean_savings_pct(), run_args.out);
        } else if (*ablate_cmd) {
            const auto config = resolve(ablate_args);
            semfed::AblationGroups groups;
            if (!only.empty()) {
                groups = {false, false, false};
                for (const auto& g : only) {
                    if (g == "selection") groups.selection = true;
                    else if (g == "architecture") groups.architecture = true;
                    else if (g == "compression") groups.compression = true;
                    else throw semfed::ConfigError(fmt::format("--only: unknown group '{}'", g));
                }
            }
            const auto rows = semfed::run_ablation_suite(config, groups);
            std::filesystem::create_directories(ablate_args.out);
            semfed::write_ablation_csv(rows, std::filesystem::path(ablate_args.out) / "ablation.csv");
            for (const auto& r : rows)
                fmt::print("{:<12} {:<26} server {:.3f}  ratio {:.4f}  energy {:.3f}\n", r.group, r.variant,
                           r.server_accuracy, r.mean_compression_ratio, r.total_energy);
        } else if (*gen_cmd) {
            const auto config = resolve(gen_args);
            semfed::GeneratorConfig gen = config.corpus;
            gen.seed = config.seed;
            const auto corpus = semfed::generate_corpus(gen);
            const auto [remaining, test] = semfed::split_test_set(corpus, gen);
            const auto clients = semfed::partition_dirichlet(remaining, gen);
            semfed::export_partition(gen_args.out, clients, test);
            for (const auto& c : clients) {
                const auto p = semfed::build_semantic_profile(c, gen.num_classes);
                fmt::print("client {}  train {}  held-out {}  vocab {}\n", c.client_id, c.documents.size(),
                           c.held_out.size(), p.vocab.size());
            }
            fmt::print("test {}  written to {}\n", test.size(), gen_args.out);
        }
    } catch (const semfed::ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
