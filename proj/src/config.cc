// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/config.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "semfed/errors.h"

namespace semfed {

std::string_view architecture_mode_name(ArchitectureMode m) {
    switch (m) {
        case ArchitectureMode::Heterogeneous: return "heterogeneous";
        case ArchitectureMode::HomogeneousSmall: return "homogeneous_small";
        case ArchitectureMode::HomogeneousLarge: return "homogeneous_large";
        case ArchitectureMode::HeterogeneousNoSemantic: return "heterogeneous_no_semantic";
    }
    return "?";
}

ArchitectureMode parse_architecture_mode(std::string_view s) {
    for (auto m : {ArchitectureMode::Heterogeneous, ArchitectureMode::HomogeneousSmall,
                   ArchitectureMode::HomogeneousLarge, ArchitectureMode::HeterogeneousNoSemantic})
        if (architecture_mode_name(m) == s) return m;
    throw ConfigError(fmt::format("model.architecture: unknown mode '{}'", s));
}

std::string_view compression_mode_name(CompressionMode m) {
    switch (m) {
        case CompressionMode::Semantic: return "semantic";
        case CompressionMode::PcaOnly: return "pca_only";
        case CompressionMode::SparseOnly: return "sparse_only";
        case CompressionMode::None: return "none";
    }
    return "?";
}

CompressionMode parse_compression_mode(std::string_view s) {
    for (auto m : {CompressionMode::Semantic, CompressionMode::PcaOnly, CompressionMode::SparseOnly,
                   CompressionMode::None})
        if (compression_mode_name(m) == s) return m;
    throw ConfigError(fmt::format("compression.mode: unknown mode '{}'", s));
}

std::string_view codec_fit_schedule_name(CodecFitSchedule s) {
    return s == CodecFitSchedule::Round1 ? "round1" : "first_participation";
}

CodecFitSchedule parse_codec_fit_schedule(std::string_view s) {
    if (s == "round1") return CodecFitSchedule::Round1;
    if (s == "first_participation") return CodecFitSchedule::FirstParticipation;
    throw ConfigError(fmt::format("compression.fit_schedule: unknown value '{}'", s));
}

CompressionConfig CompressionSettings::resolve() const {
    CompressionConfig c;
    c.ratio = ratio;
    c.bits = bits;
    c.dictionary_atoms = dictionary_atoms;
    c.sparsity_lambda = sparsity_lambda;
    c.ista_iterations = ista_iterations;
    c.dictionary_iterations = dictionary_iterations;
    switch (mode) {
        case CompressionMode::Semantic:
            c.method = CodecMethod::Pca;
            break;
        case CompressionMode::PcaOnly:
            c.method = CodecMethod::Pca;
            c.ratio = pca_only_ratio;
            c.bits = 32;
            break;
        case CompressionMode::SparseOnly:
            c.method = CodecMethod::Sparse;
            break;
        case CompressionMode::None:
            c.method = CodecMethod::Identity;
            c.ratio = 1.0;
            c.bits = 32;
            break;
    }
    return c;
}

void RunConfig::validate() const {
    corpus.validate();
    efficiency.validate();
    selection.lambda.validate();
    auto require = [](bool ok, std::string_view field, std::string_view what) {
        if (!ok) throw ConfigError(fmt::format("{}: {}", field, what));
    };
    require(rounds >= 1, "run.rounds", "must be >= 1");
    require(fleet.mobile >= 0 && fleet.laptop >= 0 && fleet.desktop >= 0, "fleet", "tier counts must be >= 0");
    require(fleet.total() == corpus.num_clients, "fleet",
            fmt::format("tier counts sum to {} but corpus.num_clients is {}", fleet.total(), corpus.num_clients));
    require(fleet.jitter >= 0.0 && fleet.jitter < 1.0, "fleet.jitter", "must be in [0, 1)");
    for (Tier t : {Tier::Mobile, Tier::Laptop, Tier::Desktop}) {
        const auto& s = fleet.spec(t);
        const auto name = tier_name(t);
        require(s.memory_mb > 0.0 && s.compute_units > 0.0, fmt::format("fleet.{}", name),
                "memory and compute must be positive");
        require(s.battery_pct >= 0.0 && s.battery_pct <= 100.0, fmt::format("fleet.{}_battery_pct", name),
                "must be in [0, 100]");
        require(s.reliability_min >= 0.0 && s.reliability_min <= s.reliability_max && s.reliability_max <= 1.0,
                fmt::format("fleet.{}_reliability", name), "need 0 <= min <= max <= 1");
    }
    require(selection.clients_per_round >= 1, "selection.clients_per_round", "must be >= 1");
    require(selection.similarity.alpha >= 0.0 && selection.similarity.alpha <= 1.0, "selection.similarity_alpha",
            "must be in [0, 1]");
    require(selection.bandwidth_budget > 0.0, "selection.bandwidth_budget", "must be positive");
    require(energy.kappa >= 0.0, "energy.kappa", "must be >= 0");
    require(energy.setup_cost_factor >= 0.0, "energy.setup_cost_factor", "must be >= 0");
    require(energy.model.energy_per_compute_second >= 0.0 && energy.model.energy_per_kilobyte >= 0.0 &&
                energy.model.battery_pct_per_energy_unit >= 0.0,
            "energy", "coefficients must be >= 0");
    require(model.feature_dim >= 1, "model.feature_dim", "must be >= 1");
    require(model.attention_dim >= 1, "model.attention_dim", "must be >= 1");
    require(model.epochs >= 0, "model.epochs", "must be >= 0");
    require(model.batch_size >= 1, "model.batch_size", "must be >= 1");
    require(model.learning_rate >= 0.0, "model.learning_rate", "must be >= 0");
    require(model.lr_decay > 0.0, "model.lr_decay", "must be positive");
    require(model.token_init_range >= 0.0 && model.embedding_init_range >= 0.0, "model", "init ranges must be >= 0");
    require(model.bigram_init_scale > 0.0, "model.bigram_init_scale", "must be > 0");
    require(compression.pca_only_ratio > 0.0 && compression.pca_only_ratio <= 1.0, "compression.pca_only_ratio",
            "must be in (0, 1]");
    compression.resolve().validate();
    require(server.num_centers >= 1, "server.num_centers", "must be >= 1");
    require(server.temperature > 0.0, "server.temperature", "must be positive");
    require(server.kmeans_iterations >= 0, "server.kmeans_iterations", "must be >= 0");
    require(server.attention_dim >= 1, "server.attention_dim", "must be >= 1");
    require(server.epochs >= 0, "server.epochs", "must be >= 0");
    require(server.batch_size >= 1, "server.batch_size", "must be >= 1");
    require(server.learning_rate >= 0.0, "server.learning_rate", "must be >= 0");
    require(server.lr_decay > 0.0, "server.lr_decay", "must be positive");
    require(server.bank_rounds >= 1, "server.bank_rounds", "must be >= 1");
    require(server.bank_capacity >= 1, "server.bank_capacity", "must be >= 1");
}

namespace {

struct Field {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, text));
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw ConfigError(fmt::format("{}: value must be finite", key));
    }
    return value;
}

using FieldTable = std::vector<std::pair<std::string, Field>>;

template <class Ref>
Field number(Ref ref) {
    using T = std::remove_reference_t<decltype(ref(std::declval<RunConfig&>()))>;
    return {[ref](const RunConfig& c) { return fmt::format("{}", ref(const_cast<RunConfig&>(c))); },
            [ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<T>("value", v); }};
}

template <class Ref, class Name, class Parse>
Field enumeration(Ref ref, Name name, Parse parse) {
    return {[ref, name](const RunConfig& c) { return std::string(name(ref(const_cast<RunConfig&>(c)))); },
            [ref, parse](RunConfig& c, const std::string& v) { ref(c) = parse(v); }};
}

const FieldTable& fields() {
    static const FieldTable table = [] {
        FieldTable t;
#define SEMFED_NUM(key, expr) t.emplace_back(key, number([](RunConfig& c) -> auto& { return expr; }))
        SEMFED_NUM("corpus.total_samples", c.corpus.total_samples);
        SEMFED_NUM("corpus.num_classes", c.corpus.num_classes);
        SEMFED_NUM("corpus.vocab_size", c.corpus.vocab_size);
        SEMFED_NUM("corpus.keywords_per_class", c.corpus.keywords_per_class);
        SEMFED_NUM("corpus.topic_skew", c.corpus.topic_skew);
        SEMFED_NUM("corpus.zipf_exponent", c.corpus.zipf_exponent);
        SEMFED_NUM("corpus.min_length", c.corpus.min_length);
        SEMFED_NUM("corpus.max_length", c.corpus.max_length);
        SEMFED_NUM("corpus.dirichlet_alpha", c.corpus.dirichlet_alpha);
        SEMFED_NUM("corpus.num_clients", c.corpus.num_clients);
        SEMFED_NUM("corpus.mask_min", c.corpus.mask_min);
        SEMFED_NUM("corpus.mask_max", c.corpus.mask_max);
        SEMFED_NUM("corpus.held_out_fraction", c.corpus.held_out_fraction);
        SEMFED_NUM("corpus.test_fraction", c.corpus.test_fraction);

        SEMFED_NUM("fleet.mobile", c.fleet.mobile);
        SEMFED_NUM("fleet.laptop", c.fleet.laptop);
        SEMFED_NUM("fleet.desktop", c.fleet.desktop);
        SEMFED_NUM("fleet.jitter", c.fleet.jitter);
#define SEMFED_TIER(name, spec)                                                \
    SEMFED_NUM("fleet." name "_memory_mb", c.fleet.spec.memory_mb);            \
    SEMFED_NUM("fleet." name "_compute_units", c.fleet.spec.compute_units);    \
    SEMFED_NUM("fleet." name "_battery_pct", c.fleet.spec.battery_pct);        \
    SEMFED_NUM("fleet." name "_reliability_min", c.fleet.spec.reliability_min); \
    SEMFED_NUM("fleet." name "_reliability_max", c.fleet.spec.reliability_max)
        SEMFED_TIER("mobile", mobile_spec);
        SEMFED_TIER("laptop", laptop_spec);
        SEMFED_TIER("desktop", desktop_spec);
#undef SEMFED_TIER

        t.emplace_back("selection.mode",
                       enumeration([](RunConfig& c) -> auto& { return c.selection.mode; }, selection_mode_name,
                                   [](const std::string& v) { return parse_selection_mode(v); }));
        SEMFED_NUM("selection.clients_per_round", c.selection.clients_per_round);
        SEMFED_NUM("selection.lambda_diversity", c.selection.lambda.diversity);
        SEMFED_NUM("selection.lambda_resource", c.selection.lambda.resource);
        SEMFED_NUM("selection.lambda_fairness", c.selection.lambda.fairness);
        SEMFED_NUM("selection.similarity_alpha", c.selection.similarity.alpha);
        SEMFED_NUM("selection.bandwidth_budget", c.selection.bandwidth_budget);

        SEMFED_NUM("efficiency.memory", c.efficiency.memory);
        SEMFED_NUM("efficiency.compute", c.efficiency.compute);
        SEMFED_NUM("efficiency.battery", c.efficiency.battery);
        SEMFED_NUM("efficiency.network", c.efficiency.network);

        SEMFED_NUM("energy.per_compute_second", c.energy.model.energy_per_compute_second);
        SEMFED_NUM("energy.per_kilobyte", c.energy.model.energy_per_kilobyte);
        SEMFED_NUM("energy.battery_pct_per_unit", c.energy.model.battery_pct_per_energy_unit);
        SEMFED_NUM("energy.kappa", c.energy.kappa);
        SEMFED_NUM("energy.setup_cost_factor", c.energy.setup_cost_factor);

        t.emplace_back("model.architecture",
                       enumeration([](RunConfig& c) -> auto& { return c.model.architecture; },
                                   architecture_mode_name,
                                   [](const std::string& v) { return parse_architecture_mode(v); }));
        SEMFED_NUM("model.feature_dim", c.model.feature_dim);
        SEMFED_NUM("model.attention_dim", c.model.attention_dim);
        SEMFED_NUM("model.epochs", c.model.epochs);
        SEMFED_NUM("model.batch_size", c.model.batch_size);
        SEMFED_NUM("model.learning_rate", c.model.learning_rate);
        SEMFED_NUM("model.lr_decay", c.model.lr_decay);
        SEMFED_NUM("model.token_init_range", c.model.token_init_range);
        SEMFED_NUM("model.bigram_init_scale", c.model.bigram_init_scale);
        SEMFED_NUM("model.embedding_init_range", c.model.embedding_init_range);

        t.emplace_back("compression.mode",
                       enumeration([](RunConfig& c) -> auto& { return c.compression.mode; }, compression_mode_name,
                                   [](const std::string& v) { return parse_compression_mode(v); }));
        t.emplace_back("compression.fit_schedule",
                       enumeration([](RunConfig& c) -> auto& { return c.compression.fit_schedule; },
                                   codec_fit_schedule_name,
                                   [](const std::string& v) { return parse_codec_fit_schedule(v); }));
        SEMFED_NUM("compression.ratio", c.compression.ratio);
        SEMFED_NUM("compression.bits", c.compression.bits);
        SEMFED_NUM("compression.pca_only_ratio", c.compression.pca_only_ratio);
        SEMFED_NUM("compression.dictionary_atoms", c.compression.dictionary_atoms);
        SEMFED_NUM("compression.sparsity_lambda", c.compression.sparsity_lambda);
        SEMFED_NUM("compression.ista_iterations", c.compression.ista_iterations);
        SEMFED_NUM("compression.dictionary_iterations", c.compression.dictionary_iterations);

        SEMFED_NUM("server.num_centers", c.server.num_centers);
        SEMFED_NUM("server.temperature", c.server.temperature);
        SEMFED_NUM("server.kmeans_iterations", c.server.kmeans_iterations);
        SEMFED_NUM("server.attention_dim", c.server.attention_dim);
        t.emplace_back("server.similarity",
                       enumeration([](RunConfig& c) -> auto& { return c.server.similarity; }, align_similarity_name,
                                   [](const std::string& v) { return parse_align_similarity(v); }));
        SEMFED_NUM("server.epochs", c.server.epochs);
        SEMFED_NUM("server.batch_size", c.server.batch_size);
        SEMFED_NUM("server.learning_rate", c.server.learning_rate);
        SEMFED_NUM("server.lr_decay", c.server.lr_decay);
        SEMFED_NUM("server.bank_rounds", c.server.bank_rounds);
        SEMFED_NUM("server.bank_capacity", c.server.bank_capacity);

        SEMFED_NUM("run.rounds", c.rounds);
        SEMFED_NUM("run.seed", c.seed);
#undef SEMFED_NUM
        return t;
    }();
    return table;
}

const Field& find_field(const std::string& key) {
    for (const auto& [name, field] : fields())
        if (name == key) return field;
    throw ConfigError(fmt::format("{}: unknown configuration key", key));
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void set_field(RunConfig& config, const std::string& key, const std::string& value) {
    const Field& f = find_field(key);
    try {
        f.set(config, trim(value));
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind("value:", 0) == 0) throw ConfigError(key + msg.substr(5));
        throw;
    }
}

void apply_override(RunConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(fmt::format("override '{}': expected section.key=value", assignment));
    set_field(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

RunConfig load_config(const std::filesystem::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw IoError(fmt::format("{}: {}", path.string(), e.what()));
    }
    RunConfig config;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError(fmt::format("{}: key '{}' outside any section", path.string(), section));
        for (const auto& [key, value] : body) set_field(config, section + "." + key, value.data());
    }
    return config;
}

std::vector<std::pair<std::string, std::string>> config_fields(const RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, field] : fields()) out.emplace_back(name, field.get(config));
    return out;
}

}  // namespace semfed
