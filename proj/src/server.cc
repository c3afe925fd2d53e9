// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/server.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "semfed/errors.h"
#include "semfed/param_record.h"

namespace semfed {

Matrix soft_assignments(const Matrix& features, const Matrix& centers, double temperature) {
    Matrix a(features.rows(), centers.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto row = a.row(i);
        for (std::size_t c = 0; c < centers.rows(); ++c)
            row[c] = -squared_distance(features.row(i), centers.row(c)) / temperature;
        softmax_inplace(row);
    }
    return a;
}

namespace {

double distortion(const Matrix& x, const Matrix& centers, const Matrix& a) {
    double d = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t c = 0; c < centers.rows(); ++c)
            d += a(i, c) * squared_distance(x.row(i), centers.row(c));
    return d;
}

double free_energy(const Matrix& x, const Matrix& centers, const Matrix& a, double tau) {
    double e = distortion(x, centers, a);
    for (double v : a.data())
        if (v > 0.0) e += tau * v * std::log(v);
    return e;
}

}  // namespace

ClusterCenters fit_soft_kmeans(const Matrix& x, int num_centers, double temperature, int iterations, Rng& rng,
                               SoftKMeansTrace* trace) {
    if (num_centers < 1) throw DomainError("fit_soft_kmeans: need at least one center");
    if (!(temperature > 0.0)) throw DomainError("fit_soft_kmeans: temperature must be positive");
    const std::size_t n = x.rows();
    const auto k = static_cast<std::size_t>(num_centers);
    if (n < k) throw DomainError(fmt::format("fit_soft_kmeans: {} samples for {} centers", n, k));

    ClusterCenters out;
    out.temperature = temperature;
    out.centers = Matrix(k, x.cols());
    // k-means++ seeding
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::size_t pick = rng.below(n);
    for (std::size_t c = 0; c < k; ++c) {
        std::copy(x.row(pick).begin(), x.row(pick).end(), out.centers.row(c).begin());
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(x.row(i), out.centers.row(c)));
            total += nearest[i];
        }
        if (c + 1 == k) break;
        if (total <= 0.0) {
            pick = rng.below(n);
            continue;
        }
        double u = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            u -= nearest[i];
            if (u < 0.0) {
                pick = i;
                break;
            }
        }
    }

    for (int it = 0; it < iterations; ++it) {
        const Matrix a = soft_assignments(x, out.centers, temperature);
        if (trace) {
            trace->free_energy.push_back(free_energy(x, out.centers, a, temperature));
            trace->distortion_before_update.push_back(distortion(x, out.centers, a));
        }
        Matrix next(k, x.cols());
        std::vector<double> mass(k, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < k; ++c) {
                mass[c] += a(i, c);
                axpy(a(i, c), x.row(i), next.row(c));
            }
        for (std::size_t c = 0; c < k; ++c) {
            if (mass[c] <= 0.0) {
                std::copy(out.centers.row(c).begin(), out.centers.row(c).end(), next.row(c).begin());
                continue;
            }
            for (auto& v : next.row(c)) v /= mass[c];
        }
        out.centers = std::move(next);
        if (trace) {
            trace->distortion_after_update.push_back(distortion(x, out.centers, a));
            trace->free_energy.push_back(free_energy(x, out.centers, a, temperature));
        }
    }
    return out;
}

const char* align_similarity_name(AlignSimilarity s) {
    return s == AlignSimilarity::Cosine ? "cosine" : "scaled_dot";
}

AlignSimilarity parse_align_similarity(const std::string& s) {
    if (s == "scaled_dot") return AlignSimilarity::ScaledDot;
    if (s == "cosine") return AlignSimilarity::Cosine;
    throw ConfigError(fmt::format("server.similarity: unknown value '{}'", s));
}

void ServerConfig::validate() const {
    if (feature_dim < 1 || num_classes < 1 || num_centers < 1 || attention_dim < 1)
        throw ConfigError("server: dimensions must be positive");
    if (!(temperature > 0.0)) throw ConfigError("server.temperature: must be positive");
    if (kmeans_iterations < 0) throw ConfigError("server.kmeans_iterations: must be >= 0");
}

std::vector<ServerModel::Block> ServerModel::blocks() {
    std::vector<Block> out;
    for (auto& [id, w] : alignment) out.push_back({fmt::format("align.{}", id), &w});
    out.push_back({"attn.q", &attn_q});
    out.push_back({"attn.k", &attn_k});
    out.push_back({"attn.v", &attn_v});
    out.push_back({"head.w", &head_w});
    out.push_back({"head.b", &head_b});
    return out;
}

ServerModel make_server_model(const ServerConfig& config, ClusterCenters centers, std::span<const int> client_ids,
                              Rng& rng) {
    config.validate();
    const auto f = static_cast<std::size_t>(config.feature_dim);
    const auto a = static_cast<std::size_t>(config.attention_dim);
    const auto l = static_cast<std::size_t>(config.num_classes);
    if (centers.centers.cols() != f) throw DomainError("make_server_model: center dimension mismatch");
    ServerModel m;
    m.config = config;
    m.centers = std::move(centers);
    for (int id : client_ids) m.alignment[id] = Matrix::identity(f);
    m.attn_q = Matrix(a, f);
    m.attn_k = Matrix(a, f);
    m.attn_v = Matrix(f, f);
    m.head_w = Matrix(l, f);
    m.head_b = Matrix(1, l);
    for (Matrix* w : {&m.attn_q, &m.attn_k, &m.attn_v, &m.head_w}) {
        const double r = std::sqrt(6.0 / static_cast<double>(w->rows() + w->cols()));
        for (double& v : w->data()) v = rng.uniform(-r, r);
    }
    return m;
}

std::vector<double> alignment_weights(std::span<const double> f, const ServerModel& model) {
    const Matrix& c = model.centers.centers;
    if (f.size() != c.cols()) throw DomainError("align: feature dimension mismatch");
    std::vector<double> t(c.rows());
    if (model.config.similarity == AlignSimilarity::Cosine) {
        const double fn = std::sqrt(squared_norm(f));
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double cn = std::sqrt(squared_norm(c.row(k)));
            t[k] = (fn > 0.0 && cn > 0.0) ? dot(f, c.row(k)) / (fn * cn) : 0.0;
        }
    } else {
        const double scale = 1.0 / std::sqrt(static_cast<double>(f.size()));
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = dot(f, c.row(k)) * scale;
    }
    softmax_inplace(t);
    return t;
}

std::vector<double> align_with_weights(std::span<const double> f, int client_id, const ServerModel& model,
                                       std::span<const double> t) {
    const auto it = model.alignment.find(client_id);
    if (it == model.alignment.end()) throw ProtocolError(fmt::format("align: unknown client id {}", client_id));
    const Matrix& c = model.centers.centers;
    if (f.size() != it->second.cols()) throw DomainError("align: feature dimension mismatch");
    if (t.size() != c.rows()) throw DomainError("align: weight count does not match the centers");
    std::vector<double> g(it->second.rows());
    matvec(it->second, f, g);
    for (std::size_t k = 0; k < c.rows(); ++k) axpy(t[k], c.row(k), g);
    return g;
}

std::vector<double> align(std::span<const double> f, int client_id, const ServerModel& model) {
    if (!model.alignment.contains(client_id))
        throw ProtocolError(fmt::format("align: unknown client id {}", client_id));
    const auto t = alignment_weights(f, model);
    return align_with_weights(f, client_id, model, t);
}

namespace {

/// Keys and values depend only on parameters; computed once per batch.
struct CenterProjections {
    Matrix keys;    ///< C x a
    Matrix values;  ///< C x F
};

CenterProjections project_centers(const ServerModel& m) {
    const Matrix& c = m.centers.centers;
    CenterProjections p{Matrix(c.rows(), m.attn_k.rows()), Matrix(c.rows(), m.attn_v.rows())};
    for (std::size_t k = 0; k < c.rows(); ++k) {
        matvec(m.attn_k, c.row(k), p.keys.row(k));
        matvec(m.attn_v, c.row(k), p.values.row(k));
    }
    return p;
}

struct ServerTrace {
    std::vector<double> g, q, alpha, h, probs;
};

void forward_one(const ServerModel& m, const CenterProjections& proj, std::span<const double> f, int client,
                 ServerTrace& tr) {
    tr.g = align(f, client, m);
    const std::size_t a = m.attn_q.rows();
    const std::size_t cs = proj.keys.rows();
    tr.q.assign(a, 0.0);
    matvec(m.attn_q, tr.g, tr.q);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a));
    tr.alpha.assign(cs, 0.0);
    for (std::size_t k = 0; k < cs; ++k) tr.alpha[k] = scale * dot(tr.q, proj.keys.row(k));
    softmax_inplace(tr.alpha);
    tr.h = tr.g;
    for (std::size_t k = 0; k < cs; ++k) axpy(tr.alpha[k], proj.values.row(k), tr.h);
    tr.probs.assign(m.head_w.rows(), 0.0);
    matvec(m.head_w, tr.h, tr.probs);
    for (std::size_t i = 0; i < tr.probs.size(); ++i) tr.probs[i] += m.head_b(0, i);
    softmax_inplace(tr.probs);
}

double sample_loss(const ServerTrace& tr, int label) {
    return -std::log(std::max(tr.probs.at(static_cast<std::size_t>(label)), 1e-300));
}

void backward_one(const ServerModel& m, const CenterProjections& proj, const BankSample& s, const ServerTrace& tr,
                  double weight, ServerModel& g) {
    const Matrix& c = m.centers.centers;
    const std::size_t cs = c.rows();
    const std::size_t a = m.attn_q.rows();
    std::vector<double> dlogits = tr.probs;
    dlogits[static_cast<std::size_t>(s.label)] -= 1.0;
    for (auto& v : dlogits) v *= weight;
    add_outer(g.head_w, 1.0, dlogits, tr.h);
    axpy(1.0, dlogits, g.head_b.row(0));
    std::vector<double> dh(tr.h.size());
    matvec_transposed(m.head_w, dlogits, dh);

    // o = sum_c alpha_c Wv c_c
    std::vector<double> mix(c.cols(), 0.0);
    std::vector<double> dalpha(cs);
    for (std::size_t k = 0; k < cs; ++k) {
        axpy(tr.alpha[k], c.row(k), mix);
        dalpha[k] = dot(dh, proj.values.row(k));
    }
    add_outer(g.attn_v, 1.0, dh, mix);
    const double centre = dot(tr.alpha, dalpha);
    const double scale = 1.0 / std::sqrt(static_cast<double>(a));
    std::vector<double> dq(a, 0.0);
    std::vector<double> dk(a);
    for (std::size_t k = 0; k < cs; ++k) {
        const double ds = tr.alpha[k] * (dalpha[k] - centre) * scale;
        if (ds == 0.0) continue;
        axpy(ds, proj.keys.row(k), dq);
        for (std::size_t j = 0; j < a; ++j) dk[j] = ds * tr.q[j];
        add_outer(g.attn_k, 1.0, dk, c.row(k));
    }
    add_outer(g.attn_q, 1.0, dq, tr.g);
    std::vector<double> dg = dh;
    std::vector<double> tmp(dg.size());
    matvec_transposed(m.attn_q, dq, tmp);
    axpy(1.0, tmp, dg);
    add_outer(g.alignment.at(s.client_id), 1.0, dg, s.feature);
}

ServerModel zero_gradient(const ServerModel& model) {
    ServerModel g = model;
    g.centers.centers.fill(0.0);
    for (auto& b : g.blocks()) b.value->fill(0.0);
    return g;
}

}  // namespace

std::vector<double> server_probabilities(std::span<const double> f, int client_id, const ServerModel& model) {
    const auto proj = project_centers(model);
    ServerTrace tr;
    forward_one(model, proj, f, client_id, tr);
    return tr.probs;
}

int server_predict(std::span<const double> f, int client_id, const ServerModel& model) {
    const auto p = server_probabilities(f, client_id, model);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

Matrix server_probabilities_batch(const Matrix& features, int client_id, const ServerModel& model) {
    const auto proj = project_centers(model);
    ServerTrace tr;
    Matrix out(features.rows(), model.head_w.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        forward_one(model, proj, features.row(i), client_id, tr);
        std::copy(tr.probs.begin(), tr.probs.end(), out.row(i).begin());
    }
    return out;
}

double server_loss(const ServerModel& model, std::span<const BankSample* const> batch) {
    if (batch.empty()) return 0.0;
    const auto proj = project_centers(model);
    ServerTrace tr;
    double total = 0.0;
    for (const BankSample* s : batch) {
        forward_one(model, proj, s->feature, s->client_id, tr);
        total += sample_loss(tr, s->label);
    }
    return total / static_cast<double>(batch.size());
}

ServerModel server_backward(const ServerModel& model, std::span<const BankSample* const> batch) {
    ServerModel g = zero_gradient(model);
    if (batch.empty()) return g;
    const auto proj = project_centers(model);
    ServerTrace tr;
    const double weight = 1.0 / static_cast<double>(batch.size());
    for (const BankSample* s : batch) {
        forward_one(model, proj, s->feature, s->client_id, tr);
        backward_one(model, proj, *s, tr, weight, g);
    }
    return g;
}

ServerTrainStats train_server(ServerModel& model, const FeatureBank& bank, const ServerTrainOptions& options,
                              Rng& rng) {
    if (bank.empty()) throw DomainError("train_server: feature bank is empty");
    if (options.epochs < 0 || options.batch_size < 1)
        throw ConfigError("train_server: need epochs >= 0, batch_size >= 1");
    const auto& samples = bank.samples();
    for (const auto& s : samples)
        if (s.label < 0 || s.label >= model.config.num_classes)
            throw DomainError(fmt::format("train_server: label {} out of range", s.label));

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    ServerModel grad = zero_gradient(model);
    ServerTrace tr;
    ServerTrainStats stats;
    const auto bs = static_cast<std::size_t>(options.batch_size);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        double loss = 0.0;
        std::size_t hits = 0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t stop = std::min(order.size(), start + bs);
            const double weight = 1.0 / static_cast<double>(stop - start);
            const auto proj = project_centers(model);
            std::vector<int> touched;
            for (std::size_t i = start; i < stop; ++i) {
                const BankSample& s = samples[order[i]];
                forward_one(model, proj, s.feature, s.client_id, tr);
                loss += sample_loss(tr, s.label);
                hits += std::max_element(tr.probs.begin(), tr.probs.end()) - tr.probs.begin() == s.label;
                backward_one(model, proj, s, tr, weight, grad);
                touched.push_back(s.client_id);
            }
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            for (int id : touched) {
                axpy(-options.learning_rate, grad.alignment.at(id).data(), model.alignment.at(id).data());
                grad.alignment.at(id).fill(0.0);
            }
            for (auto [p, gm] : {std::pair{&model.attn_q, &grad.attn_q}, std::pair{&model.attn_k, &grad.attn_k},
                                 std::pair{&model.attn_v, &grad.attn_v}, std::pair{&model.head_w, &grad.head_w},
                                 std::pair{&model.head_b, &grad.head_b}}) {
                axpy(-options.learning_rate, gm->data(), p->data());
                gm->fill(0.0);
            }
        }
        stats.final_loss = loss / static_cast<double>(samples.size());
        stats.accuracy = static_cast<double>(hits) / static_cast<double>(samples.size());
    }
    return stats;
}

FeatureBank::FeatureBank(int window_rounds, std::size_t capacity) : window_(window_rounds), capacity_(capacity) {
    if (window_rounds < 1 || capacity < 1) throw ConfigError("server: bank window and capacity must be >= 1");
}

void FeatureBank::add(int round, int client_id, const Matrix& features, std::span<const int> labels) {
    if (features.rows() != labels.size()) throw DomainError("FeatureBank::add: feature/label count mismatch");
    if (features.rows() == 0) return;
    if (feature_dim_ == 0) feature_dim_ = features.cols();
    if (features.cols() != feature_dim_)
        throw DomainError(fmt::format("FeatureBank::add: expected dimension {}, got {}", feature_dim_, features.cols()));
    for (std::size_t i = 0; i < features.rows(); ++i)
        samples_.push_back({{features.row(i).begin(), features.row(i).end()}, labels[i], client_id, round});
    while (!samples_.empty() && samples_.front().round <= round - window_) samples_.pop_front();
    while (samples_.size() > capacity_) samples_.pop_front();
}

std::vector<int> majority_vote(const std::vector<std::vector<int>>& client_predictions, int num_classes) {
    if (client_predictions.empty()) return {};
    const std::size_t n = client_predictions.front().size();
    std::vector<int> out(n);
    std::vector<int> votes(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& p : client_predictions) ++votes.at(static_cast<std::size_t>(p.at(i)));
        out[i] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    return out;
}

double macro_f1(std::span<const int> pred, std::span<const int> labels, int num_classes) {
    if (pred.size() != labels.size()) throw DomainError("macro_f1: length mismatch");
    const auto l = static_cast<std::size_t>(num_classes);
    std::vector<double> tp(l), fp(l), fn(l);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const auto p = static_cast<std::size_t>(pred[i]);
        const auto y = static_cast<std::size_t>(labels[i]);
        if (p == y) {
            tp.at(p) += 1;
        } else {
            fp.at(p) += 1;
            fn.at(y) += 1;
        }
    }
    double sum = 0.0;
    int counted = 0;
    for (std::size_t c = 0; c < l; ++c) {
        const double denom = 2 * tp[c] + fp[c] + fn[c];
        if (denom == 0.0) continue;
        sum += 2 * tp[c] / denom;
        ++counted;
    }
    return counted ? sum / counted : 0.0;
}

EvalResult evaluate(std::span<const int> server_predictions, const std::vector<std::vector<int>>& client_predictions,
                    std::span<const int> labels, int num_classes) {
    const std::size_t n = labels.size();
    if (n == 0) throw DomainError("evaluate: empty test set");
    if (server_predictions.size() != n) throw DomainError("evaluate: server prediction count mismatch");
    for (const auto& p : client_predictions)
        if (p.size() != n) throw DomainError("evaluate: client prediction count mismatch");

    auto acc = [&](std::span<const int> p) {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < n; ++i) hit += p[i] == labels[i];
        return static_cast<double>(hit) / static_cast<double>(n);
    };
    EvalResult r;
    r.server_accuracy = acc(server_predictions);
    r.macro_f1 = macro_f1(server_predictions, labels, num_classes);
    if (!client_predictions.empty()) {
        for (const auto& p : client_predictions) r.mean_client_accuracy += acc(p);
        r.mean_client_accuracy /= static_cast<double>(client_predictions.size());
        const auto vote = majority_vote(client_predictions, num_classes);
        std::size_t agree = 0;
        for (std::size_t i = 0; i < n; ++i) agree += vote[i] == server_predictions[i];
        r.client_server_agreement = static_cast<double>(agree) / static_cast<double>(n);
    }
    return r;
}

void save_server(const std::filesystem::path& path, const ServerModel& model) {
    const auto& c = model.config;
    ParamRecord rec;
    rec.meta = {c.feature_dim, c.num_classes, c.num_centers, c.attention_dim, c.kmeans_iterations,
                static_cast<std::int64_t>(c.similarity)};
    for (const auto& [id, w] : model.alignment) rec.meta.push_back(id);
    Matrix scalars(1, 2);
    scalars(0, 0) = c.temperature;
    scalars(0, 1) = model.centers.temperature;
    rec.blocks.push_back(scalars);
    rec.blocks.push_back(model.centers.centers);
    for (auto& b : const_cast<ServerModel&>(model).blocks()) rec.blocks.push_back(*b.value);
    write_param_record(path, rec);
}

ServerModel load_server(const std::filesystem::path& path) {
    ParamRecord rec = read_param_record(path);
    if (rec.meta.size() < 6 || rec.blocks.size() < 2) throw IoError(fmt::format("{}: not a server record", path.string()));
    ServerModel m;
    m.config.feature_dim = static_cast<int>(rec.meta[0]);
    m.config.num_classes = static_cast<int>(rec.meta[1]);
    m.config.num_centers = static_cast<int>(rec.meta[2]);
    m.config.attention_dim = static_cast<int>(rec.meta[3]);
    m.config.kmeans_iterations = static_cast<int>(rec.meta[4]);
    m.config.similarity = static_cast<AlignSimilarity>(rec.meta[5]);
    m.config.temperature = rec.blocks[0](0, 0);
    m.centers.temperature = rec.blocks[0](0, 1);
    m.centers.centers = rec.blocks[1];
    for (std::size_t i = 6; i < rec.meta.size(); ++i) m.alignment[static_cast<int>(rec.meta[i])] = Matrix();
    auto blocks = m.blocks();
    if (blocks.size() + 2 != rec.blocks.size()) throw IoError(fmt::format("{}: block count mismatch", path.string()));
    for (std::size_t i = 0; i < blocks.size(); ++i) *blocks[i].value = std::move(rec.blocks[i + 2]);
    return m;
}

}  // namespace semfed
