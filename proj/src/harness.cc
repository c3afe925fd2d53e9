// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/harness.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "semfed/codec.h"
#include "semfed/corpus.h"
#include "semfed/device.h"
#include "semfed/embednet.h"
#include "semfed/errors.h"
#include "semfed/selection.h"
#include "semfed/server.h"

namespace semfed {

double RunReport::mean_savings_pct() const {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rounds) {
        if (r.skipped) continue;
        sum += r.savings_pct;
        ++n;
    }
    return n ? sum / n : 0.0;
}

double RunReport::mean_compression_ratio() const {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rounds) {
        if (r.skipped) continue;
        sum += r.compression_ratio;
        ++n;
    }
    return n ? sum / n : 0.0;
}

std::size_t RunReport::total_compressed_bytes() const {
    std::size_t s = 0;
    for (const auto& r : rounds) s += r.compressed_bytes;
    return s;
}

std::size_t RunReport::total_setup_bytes() const {
    std::size_t s = 0;
    for (const auto& r : rounds) s += r.setup_bytes;
    return s;
}

double RunReport::total_energy() const {
    double s = 0.0;
    for (const auto& r : rounds) s += r.energy;
    return s;
}

double RunReport::total_compute_seconds() const {
    double s = 0.0;
    for (const auto& r : rounds) s += r.compute_seconds;
    return s;
}

namespace {

Tier model_tier(Tier device, ArchitectureMode mode) {
    switch (mode) {
        case ArchitectureMode::HomogeneousSmall: return Tier::Mobile;
        case ArchitectureMode::HomogeneousLarge: return Tier::Desktop;
        default: return device;
    }
}

std::size_t coded_dim(const CompressionConfig& c, std::size_t f) {
    switch (c.method) {
        case CodecMethod::Pca: return pca_rank(f, c.ratio);
        case CodecMethod::Sparse: return static_cast<std::size_t>(c.dictionary_atoms);
        case CodecMethod::Identity: return f;
    }
    return f;
}

Matrix feature_matrix(const TierModel& model, std::span<const Document> docs) {
    Matrix x(docs.size(), static_cast<std::size_t>(model.config.feature_dim));
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto f = extract_features(docs[i], model);
        std::copy(f.begin(), f.end(), x.row(i).begin());
    }
    return x;
}

int head_predict(const TierModel& model, std::span<const double> f) {
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.head_w.rows(); ++c) {
        const double v = dot(model.head_w.row(c), f) + model.head_b(0, c);
        if (v > best_v) {
            best_v = v;
            best = static_cast<int>(c);
        }
    }
    return best;
}

double fraction_correct(std::span<const int> pred, std::span<const Document> docs) {
    if (docs.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) hit += pred[i] == docs[i].label;
    return static_cast<double>(hit) / static_cast<double>(docs.size());
}

/// Per-client evaluation state; valid until the client trains again.
struct ClientEval {
    bool valid = false;
    double heldout_accuracy = 0.0;
    std::vector<int> test_predictions;
    Matrix test_decoded;  ///< global test features after the client's codec
};

}  // namespace

RunReport run(const RunConfig& config) {
    config.validate();
    RunReport report;
    report.config = config;

    GeneratorConfig gen = config.corpus;
    gen.seed = config.seed;
    const Rng root(config.seed);

    const auto corpus = generate_corpus(gen);
    const auto [remaining, test_set] = split_test_set(corpus, gen);
    const auto clients = partition_dirichlet(remaining, gen);
    const std::size_t k_total = clients.size();
    const int num_classes = gen.num_classes;
    const auto f_dim = static_cast<std::size_t>(config.model.feature_dim);

    std::vector<SemanticProfile> profiles;
    for (const auto& c : clients) {
        profiles.push_back(build_semantic_profile(c, num_classes));
        report.vocab_sizes.push_back(profiles.back().vocab.size());
    }
    report.similarity = build_similarity_matrix(profiles, config.selection.similarity);

    Rng fleet_rng = root.fork("fleet");
    const auto fleet = make_fleet(config.fleet, fleet_rng);
    const FleetMax fmax = fleet_max(fleet);
    std::vector<DeviceState> states(k_total);
    for (std::size_t k = 0; k < k_total; ++k) {
        states[k].battery_pct = fleet[k].battery_pct;
        report.client_tiers.emplace_back(tier_name(fleet[k].tier));
    }

    const bool clusters = config.model.architecture != ArchitectureMode::HeterogeneousNoSemantic;
    InitOptions init;
    init.token_range = config.model.token_init_range;
    init.bigram_scale = config.model.bigram_init_scale;
    init.embedding_range = config.model.embedding_init_range;
    std::vector<TierModel> models;
    std::vector<Rng> train_rngs;
    for (std::size_t k = 0; k < k_total; ++k) {
        TierConfig tc = default_tier_config(model_tier(fleet[k].tier, config.model.architecture), gen.vocab_size,
                                            num_classes, config.model.feature_dim);
        tc.attention_dim = config.model.attention_dim;
        tc.semantic_clusters = clusters;
        Rng init_rng = root.fork("init").fork(k);
        models.push_back(make_tier_model(tc, init_rng, init));
        train_rngs.push_back(root.fork("train").fork(k));
    }

    const CompressionConfig comp = config.compression.resolve();
    Rng avail_rng = root.fork("availability");
    Rng select_rng = root.fork("selection");
    Rng server_rng = root.fork("server");

    ParticipationHistory history(k_total);
    std::vector<std::optional<Codec>> codecs(k_total);
    std::vector<ClientEval> evals(k_total);
    FeatureBank bank(config.server.bank_rounds, static_cast<std::size_t>(config.server.bank_capacity));
    std::optional<ServerModel> server;

    std::vector<int> test_labels;
    for (const auto& d : test_set) test_labels.push_back(d.label);

    for (int t = 1; t <= config.rounds; ++t) {
        RoundRecord rec;
        rec.round = t;

        std::vector<bool> available(k_total);
        std::vector<double> effs(k_total);
        for (std::size_t k = 0; k < k_total; ++k) {
            ResourceProfile now = fleet[k];
            now.battery_pct = states[k].battery_pct;
            available[k] = sample_availability(now, avail_rng);
            states[k].available_this_round = available[k];
            effs[k] = resource_efficiency(now, fmax, config.efficiency);
            rec.available += available[k];
        }
        const SelectionOutcome sel =
            select_clients(available, config.selection.clients_per_round, report.similarity, effs, history,
                           config.selection.lambda, config.selection.mode, select_rng);
        rec.skipped = sel.skipped;

        std::vector<double> estimates;
        for (int k : sel.selected) {
            const std::size_t n = clients[static_cast<std::size_t>(k)].documents.size();
            const std::size_t cd = coded_dim(comp, f_dim);
            estimates.push_back(static_cast<double>(14 + 8 * cd + n * cd * ((static_cast<std::size_t>(comp.bits) + 7) / 8)));
        }
        const auto shares = sel.selected.empty() ? std::vector<double>{}
                                                 : allocate_bandwidth(estimates, config.selection.bandwidth_budget);

        std::vector<double> round_compute(k_total, 0.0);
        std::vector<std::size_t> round_bytes(k_total, 0);
        std::vector<double> round_energy(k_total, 0.0);

        // one-time codec fit, costed as a multiple of one local epoch
        auto setup_seconds = [&](std::size_t k, const ResourceProfile& now) {
            const double docs = static_cast<double>(clients[k].documents.size()) * std::max(config.model.epochs, 1);
            return config.energy.setup_cost_factor *
                   estimate_compute_time(docs, static_cast<double>(models[k].param_count()), now, config.energy.kappa);
        };

        const double lr = config.model.learning_rate * std::pow(config.model.lr_decay, t - 1);
        for (std::size_t i = 0; i < sel.selected.size(); ++i) {
            const int k = sel.selected[i];
            const auto ku = static_cast<std::size_t>(k);
            const auto& data = clients[ku];
            ResourceProfile now = fleet[ku];
            now.battery_pct = states[ku].battery_pct;

            ClientRoundRecord cr;
            cr.client_id = k;
            cr.utility = sel.utility[ku];
            cr.documents = data.documents.size();
            cr.bandwidth_share = shares[i];

            const TrainStats stats =
                train_local(models[ku], data.documents,
                            {config.model.epochs, config.model.batch_size, lr}, train_rngs[ku], now,
                            config.energy.kappa);
            cr.train_loss = stats.final_loss;
            cr.compute_seconds = stats.compute_seconds;

            const Matrix features = feature_matrix(models[ku], data.documents);
            if (!codecs[ku]) {
                codecs[ku] = fit_codec(features, comp);
                cr.setup_bytes = codec_setup_bytes(*codecs[ku]);
                cr.compute_seconds += setup_seconds(ku, now);
            }
            const QuantizedPayload payload = compress(features, *codecs[ku], comp);
            const auto wire = serialize_payload(payload);
            cr.compressed_bytes = wire.size();
            cr.raw_bytes = data.documents.size() * f_dim * 4;
            const Matrix decoded = decompress(deserialize_payload(wire), *codecs[ku]);
            std::vector<int> labels;
            for (const auto& d : data.documents) labels.push_back(d.label);
            bank.add(t, k, decoded, labels);

            const std::size_t sent = cr.compressed_bytes + cr.setup_bytes;
            cr.transmission_seconds =
                static_cast<double>(sent) / (std::max(cr.bandwidth_share, 1e-12) * config.selection.bandwidth_budget);
            const DeviceState before = states[ku];
            states[ku] = charge_round_cost(before, cr.compute_seconds, static_cast<double>(sent), config.energy.model);
            states[ku].last_compute_time_s = cr.compute_seconds;
            cr.energy = states[ku].cumulative_energy - before.cumulative_energy;
            cr.battery_after = states[ku].battery_pct;

            round_compute[ku] = cr.compute_seconds;
            round_bytes[ku] = sent;
            round_energy[ku] = cr.energy;
            rec.raw_bytes += cr.raw_bytes;
            rec.compressed_bytes += cr.compressed_bytes;
            rec.setup_bytes += cr.setup_bytes;
            rec.compute_seconds += cr.compute_seconds;
            rec.energy += cr.energy;
            evals[ku].valid = false;
            rec.clients.push_back(cr);
        }
        if (t == 1 && config.compression.fit_schedule == CodecFitSchedule::Round1) {
            for (std::size_t k = 0; k < k_total; ++k) {
                if (codecs[k] || !available[k]) continue;
                ResourceProfile now = fleet[k];
                now.battery_pct = states[k].battery_pct;
                codecs[k] = fit_codec(feature_matrix(models[k], clients[k].documents), comp);
                const std::size_t bytes = codec_setup_bytes(*codecs[k]);
                const double seconds = setup_seconds(k, now);
                const DeviceState before = states[k];
                states[k] = charge_round_cost(before, seconds, static_cast<double>(bytes), config.energy.model);
                states[k].last_compute_time_s = seconds;
                round_compute[k] = seconds;
                round_bytes[k] = bytes;
                round_energy[k] = states[k].cumulative_energy - before.cumulative_energy;
                rec.setup_bytes += bytes;
                rec.compute_seconds += seconds;
                rec.energy += round_energy[k];
                evals[k].valid = false;
            }
        }
        if (rec.raw_bytes > 0) {
            rec.compression_ratio = static_cast<double>(rec.compressed_bytes) / static_cast<double>(rec.raw_bytes);
            rec.savings_pct = 100.0 * (1.0 - rec.compression_ratio);
        }

        if (!server && !bank.empty()) {
            Matrix x(bank.size(), bank.feature_dim());
            std::size_t row = 0;
            for (const auto& s : bank.samples()) std::copy(s.feature.begin(), s.feature.end(), x.row(row++).begin());
            const int centers = std::min<int>(config.server.num_centers, static_cast<int>(x.rows()));
            ClusterCenters cc = fit_soft_kmeans(x, centers, config.server.temperature,
                                                config.server.kmeans_iterations, server_rng);
            ServerConfig sc;
            sc.feature_dim = config.model.feature_dim;
            sc.num_classes = num_classes;
            sc.num_centers = centers;
            sc.attention_dim = config.server.attention_dim;
            sc.temperature = config.server.temperature;
            sc.kmeans_iterations = config.server.kmeans_iterations;
            sc.similarity = config.server.similarity;
            std::vector<int> ids(k_total);
            std::iota(ids.begin(), ids.end(), 0);
            server = make_server_model(sc, std::move(cc), ids, server_rng);
        }
        if (server && !sel.selected.empty()) {
            const double slr = config.server.learning_rate * std::pow(config.server.lr_decay, t - 1);
            const auto st = train_server(*server, bank,
                                         {config.server.epochs, config.server.batch_size, slr}, server_rng);
            rec.server_loss = st.final_loss;
        }

        // evaluation
        double heldout_sum = 0.0;
        int heldout_n = 0;
        double test_sum = 0.0;
        std::vector<std::vector<int>> voters;
        Matrix prob_sum(test_set.size(), static_cast<std::size_t>(num_classes));
        int views = 0;
        for (std::size_t k = 0; k < k_total; ++k) {
            ClientEval& ev = evals[k];
            if (!ev.valid) {
                const auto& held = clients[k].held_out;
                std::vector<int> hp;
                for (const auto& d : held) hp.push_back(head_predict(models[k], extract_features(d, models[k])));
                ev.heldout_accuracy = fraction_correct(hp, held);
                const Matrix tf = feature_matrix(models[k], test_set);
                ev.test_predictions.resize(test_set.size());
                for (std::size_t i = 0; i < test_set.size(); ++i)
                    ev.test_predictions[i] = head_predict(models[k], tf.row(i));
                ev.test_decoded = codecs[k] ? decompress(compress(tf, *codecs[k], comp), *codecs[k]) : Matrix();
                ev.valid = true;
            }
            if (!clients[k].held_out.empty()) {
                heldout_sum += ev.heldout_accuracy;
                ++heldout_n;
            }
            test_sum += fraction_correct(ev.test_predictions, test_set);
            if (history.counts[k] > 0 || std::find(sel.selected.begin(), sel.selected.end(), static_cast<int>(k)) !=
                                              sel.selected.end())
                voters.push_back(ev.test_predictions);
            if (server && codecs[k]) {
                const Matrix p = server_probabilities_batch(ev.test_decoded, static_cast<int>(k), *server);
                axpy(1.0, p.data(), prob_sum.data());
                ++views;
            }
        }
        rec.mean_client_heldout_accuracy = heldout_n ? heldout_sum / heldout_n : 0.0;
        rec.mean_client_accuracy = test_sum / static_cast<double>(k_total);
        if (views > 0 && !test_set.empty()) {
            std::vector<int> server_pred(test_set.size());
            for (std::size_t i = 0; i < test_set.size(); ++i) {
                const auto row = prob_sum.row(i);
                server_pred[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
            }
            const EvalResult er = evaluate(server_pred, voters, test_labels, num_classes);
            rec.server_accuracy = er.server_accuracy;
            rec.macro_f1 = er.macro_f1;
            rec.agreement = er.client_server_agreement;
        }

        for (std::size_t k = 0; k < k_total; ++k) {
            const bool picked =
                std::find(sel.selected.begin(), sel.selected.end(), static_cast<int>(k)) != sel.selected.end();
            report.telemetry.push_back({t, static_cast<int>(k), static_cast<bool>(available[k]), picked,
                                        sel.utility[k], round_compute[k], round_bytes[k], round_energy[k],
                                        states[k].battery_pct, evals[k].heldout_accuracy});
        }
        history.record(sel.selected);
        report.rounds.push_back(std::move(rec));
    }

    report.selection_counts = history.counts;
    for (const auto& s : states) report.final_battery.push_back(s.battery_pct);

    if (bank.size() >= 2) {
        Matrix x(bank.size(), bank.feature_dim());
        std::size_t row = 0;
        for (const auto& s : bank.samples()) std::copy(s.feature.begin(), s.feature.end(), x.row(row++).begin());
        const PcaCodec pca = fit_pca(x, std::min(1.0, 2.0 / static_cast<double>(x.cols())));
        row = 0;
        for (const auto& s : bank.samples()) {
            const auto z = pca_encode(x.row(row++), pca);
            report.projection.push_back({s.client_id, s.label, s.round, z[0], z.size() > 1 ? z[1] : 0.0});
        }
    }
    return report;
}

namespace {

AblationRow summarize(const RunReport& r, std::string group, std::string variant) {
    AblationRow row;
    row.group = std::move(group);
    row.variant = std::move(variant);
    if (!r.rounds.empty()) {
        row.server_accuracy = r.rounds.back().server_accuracy;
        row.mean_client_heldout_accuracy = r.rounds.back().mean_client_heldout_accuracy;
    }
    row.total_energy = r.total_energy();
    row.total_compute_seconds = r.total_compute_seconds();
    row.mean_compression_ratio = r.mean_compression_ratio();
    for (int c : r.selection_counts)
        row.selection_frequency.push_back(static_cast<double>(c) / static_cast<double>(r.rounds.size()));
    return row;
}

}  // namespace

std::vector<AblationRow> run_ablation_suite(const RunConfig& base, const AblationGroups& groups) {
    base.validate();
    using Key = std::tuple<SelectionMode, ArchitectureMode, CompressionMode>;
    std::map<Key, RunReport> cache;
    auto report_for = [&](const RunConfig& c) -> const RunReport& {
        const Key key{c.selection.mode, c.model.architecture, c.compression.mode};
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, run(c)).first;
        return it->second;
    };

    std::vector<AblationRow> rows;
    if (groups.selection) {
        for (auto m : {SelectionMode::Random, SelectionMode::ResourceOnly, SelectionMode::SemanticOnly,
                       SelectionMode::Greedy}) {
            RunConfig c = base;
            c.selection.mode = m;
            rows.push_back(summarize(report_for(c), "selection", std::string(selection_mode_name(m))));
        }
    }
    if (groups.architecture) {
        for (auto m : {ArchitectureMode::HomogeneousSmall, ArchitectureMode::HomogeneousLarge,
                       ArchitectureMode::HeterogeneousNoSemantic, ArchitectureMode::Heterogeneous}) {
            RunConfig c = base;
            c.model.architecture = m;
            rows.push_back(summarize(report_for(c), "architecture", std::string(architecture_mode_name(m))));
        }
    }
    if (groups.compression) {
        for (auto m : {CompressionMode::None, CompressionMode::PcaOnly, CompressionMode::SparseOnly,
                       CompressionMode::Semantic}) {
            RunConfig c = base;
            c.compression.mode = m;
            rows.push_back(summarize(report_for(c), "compression", std::string(compression_mode_name(m))));
        }
    }
    return rows;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    return out;
}

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.6f}", v) : std::string(); }

template <class T, class F>
std::string joined(const std::vector<T>& items, F f) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) s += ';';
        s += f(items[i]);
    }
    return s;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

}  // namespace

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));

    {
        const auto path = dir / "rounds.csv";
        auto out = open_out(path);
        out << "round,skipped,available,selected,utilities,raw_bytes,compressed_bytes,setup_bytes,"
               "compression_ratio,savings_pct,compute_seconds,energy,server_accuracy,mean_client_accuracy,"
               "mean_client_heldout_accuracy,macro_f1,agreement,server_loss,client_compute_seconds,"
               "client_compressed_bytes,client_energy,client_battery_after\n";
        for (const auto& r : report.rounds) {
            using C = ClientRoundRecord;
            out << fmt::format(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.round, r.skipped ? 1 : 0,
                r.available, joined(r.clients, [](const C& c) { return std::to_string(c.client_id); }),
                joined(r.clients, [](const C& c) { return num(c.utility); }), r.raw_bytes, r.compressed_bytes,
                r.setup_bytes, r.skipped ? "" : num(r.compression_ratio), r.skipped ? "" : num(r.savings_pct),
                num(r.compute_seconds), num(r.energy), num(r.server_accuracy), num(r.mean_client_accuracy),
                num(r.mean_client_heldout_accuracy), num(r.macro_f1), num(r.agreement), num(r.server_loss),
                joined(r.clients, [](const C& c) { return num(c.compute_seconds); }),
                joined(r.clients, [](const C& c) { return std::to_string(c.compressed_bytes); }),
                joined(r.clients, [](const C& c) { return num(c.energy); }),
                joined(r.clients, [](const C& c) { return num(c.battery_after); }));
        }
        finish(out, path);
    }
    {
        const auto path = dir / "selection_trace.csv";
        auto out = open_out(path);
        out << "round,client,available,utility,selected\n";
        for (const auto& d : report.telemetry)
            out << fmt::format("{},{},{},{},{}\n", d.round, d.client_id, d.available ? 1 : 0, num(d.utility),
                               d.selected ? 1 : 0);
        finish(out, path);
    }
    {
        const auto path = dir / "device_telemetry.csv";
        auto out = open_out(path);
        out << "round,client,tier,available,selected,compute_seconds,bytes_sent,energy,battery_pct,heldout_accuracy\n";
        for (const auto& d : report.telemetry)
            out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", d.round, d.client_id,
                               report.client_tiers.at(static_cast<std::size_t>(d.client_id)), d.available ? 1 : 0,
                               d.selected ? 1 : 0, num(d.compute_seconds), d.bytes_sent, num(d.energy),
                               num(d.battery_pct), num(d.heldout_accuracy));
        finish(out, path);
    }
    write_similarity_csv(dir / "similarity_matrix.csv", report.similarity);
    {
        const auto path = dir / "feature_projection.csv";
        auto out = open_out(path);
        out << "client,label,round,pc1,pc2\n";
        for (const auto& p : report.projection)
            out << fmt::format("{},{},{},{},{}\n", p.client_id, p.label, p.round, num(p.x), num(p.y));
        finish(out, path);
    }
    {
        using nlohmann::ordered_json;
        ordered_json j;
        j["seed"] = report.config.seed;
        j["rounds"] = report.rounds.size();
        j["mean_savings_pct"] = std::round(report.mean_savings_pct() * 100.0) / 100.0;
        j["mean_compression_ratio"] = report.mean_compression_ratio();
        const std::size_t raw = std::accumulate(report.rounds.begin(), report.rounds.end(), std::size_t{0},
                                                [](std::size_t s, const RoundRecord& r) { return s + r.raw_bytes; });
        j["total_raw_bytes"] = raw;
        j["total_compressed_bytes"] = report.total_compressed_bytes();
        j["total_setup_bytes"] = report.total_setup_bytes();
        j["total_bytes"] = report.total_compressed_bytes() + report.total_setup_bytes();
        j["total_energy"] = report.total_energy();
        j["total_compute_seconds"] = report.total_compute_seconds();
        if (!report.rounds.empty()) {
            const auto& last = report.rounds.back();
            j["final"] = {{"server_accuracy", last.server_accuracy},
                          {"mean_client_accuracy", last.mean_client_accuracy},
                          {"mean_client_heldout_accuracy", last.mean_client_heldout_accuracy},
                          {"macro_f1", last.macro_f1},
                          {"agreement", last.agreement}};
        }
        j["skipped_rounds"] = std::count_if(report.rounds.begin(), report.rounds.end(),
                                            [](const RoundRecord& r) { return r.skipped; });
        ordered_json clients = ordered_json::array();
        for (std::size_t k = 0; k < report.selection_counts.size(); ++k) {
            clients.push_back({{"client", k},
                               {"tier", report.client_tiers[k]},
                               {"vocab_size", report.vocab_sizes[k]},
                               {"selection_count", report.selection_counts[k]},
                               {"selection_frequency", static_cast<double>(report.selection_counts[k]) /
                                                           static_cast<double>(report.rounds.size())},
                               {"final_battery_pct", report.final_battery[k]}});
        }
        j["clients"] = clients;
        ordered_json cfg = ordered_json::object();
        for (const auto& [key, value] : config_fields(report.config)) cfg[key] = value;
        j["config"] = cfg;
        const auto path = dir / "summary.json";
        auto out = open_out(path);
        out << j.dump(2) << '\n';
        finish(out, path);
    }
}

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "group,variant,server_accuracy,mean_client_heldout_accuracy,total_energy,total_compute_seconds,"
           "mean_compression_ratio,selection_frequency\n";
    for (const auto& r : rows)
        out << fmt::format("{},{},{},{},{},{},{},{}\n", r.group, r.variant, num(r.server_accuracy),
                           num(r.mean_client_heldout_accuracy), num(r.total_energy), num(r.total_compute_seconds),
                           num(r.mean_compression_ratio), joined(r.selection_frequency, [](double v) { return num(v); }));
    finish(out, path);
}

}  // namespace semfed
