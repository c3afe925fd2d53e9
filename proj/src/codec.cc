// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/codec.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "semfed/errors.h"
#include "semfed/linalg.h"

namespace semfed {

const char* codec_method_name(CodecMethod m) {
    switch (m) {
        case CodecMethod::Pca: return "pca";
        case CodecMethod::Sparse: return "sparse";
        case CodecMethod::Identity: return "identity";
    }
    return "?";
}

CodecMethod parse_codec_method(const std::string& s) {
    if (s == "pca") return CodecMethod::Pca;
    if (s == "sparse") return CodecMethod::Sparse;
    if (s == "identity") return CodecMethod::Identity;
    throw ConfigError(fmt::format("compression.method: unknown method '{}'", s));
}

namespace {

bool valid_bits(int bits) { return (bits >= 1 && bits <= 16) || bits == 32; }

std::size_t code_width(int bits) { return (static_cast<std::size_t>(bits) + 7) / 8; }

constexpr std::size_t kHeaderFixed = 1 + 12 + 1;

}  // namespace

void CompressionConfig::validate() const {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("compression.ratio: must be in (0, 1]");
    if (!valid_bits(bits)) throw ConfigError("compression.bits: must be in [1, 16] or 32");
    if (dictionary_atoms < 1) throw ConfigError("compression.dictionary_atoms: must be >= 1");
    if (sparsity_lambda < 0.0) throw ConfigError("compression.sparsity_lambda: must be >= 0");
    if (ista_iterations < 0 || dictionary_iterations < 0)
        throw ConfigError("compression: iteration counts must be >= 0");
}

std::size_t pca_rank(std::size_t feature_dim, double ratio) {
    const auto r = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(feature_dim)));
    return std::clamp<std::size_t>(r, 1, feature_dim);
}

PcaCodec fit_pca(const Matrix& features, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw DomainError("fit_pca: ratio must be in (0, 1]");
    const std::size_t n = features.rows();
    const std::size_t f = features.cols();
    if (n < 2) throw DomainError("fit_pca: need at least 2 samples");

    PcaCodec codec;
    codec.ratio = ratio;
    codec.mean.assign(f, 0.0);
    for (std::size_t i = 0; i < n; ++i) axpy(1.0, features.row(i), codec.mean);
    for (auto& v : codec.mean) v /= static_cast<double>(n);

    Matrix cov(f, f);
    std::vector<double> centred(f);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < f; ++j) centred[j] = features(i, j) - codec.mean[j];
        add_outer(cov, 1.0 / static_cast<double>(n), centred, centred);
    }
    const SymmetricEigen eig = symmetric_eigen(cov);
    const std::size_t r = pca_rank(f, ratio);
    codec.components = Matrix(f, r);
    for (std::size_t j = 0; j < f; ++j)
        for (std::size_t c = 0; c < r; ++c) codec.components(j, c) = eig.vectors(j, c);
    codec.eigenvalues = eig.values;
    return codec;
}

std::vector<double> pca_encode(std::span<const double> f, const PcaCodec& codec) {
    if (f.size() != codec.input_dim())
        throw DomainError(fmt::format("pca_encode: expected {} values, got {}", codec.input_dim(), f.size()));
    std::vector<double> centred(f.begin(), f.end());
    for (std::size_t j = 0; j < centred.size(); ++j) centred[j] -= codec.mean[j];
    std::vector<double> z(codec.coded_dim());
    matvec_transposed(codec.components, centred, z);
    return z;
}

std::vector<double> pca_decode(std::span<const double> z, const PcaCodec& codec) {
    if (z.size() != codec.coded_dim())
        throw DomainError(fmt::format("pca_decode: expected {} values, got {}", codec.coded_dim(), z.size()));
    std::vector<double> f(codec.mean);
    std::vector<double> proj(codec.input_dim());
    matvec(codec.components, z, proj);
    axpy(1.0, proj, f);
    return f;
}

double sparse_objective(std::span<const double> f, const Matrix& atoms, std::span<const double> s, double lambda) {
    std::vector<double> resid(f.begin(), f.end());
    std::vector<double> recon(atoms.rows());
    matvec(atoms, s, recon);
    double l1 = 0.0;
    for (double v : s) l1 += std::abs(v);
    for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= recon[i];
    return squared_norm(resid) + lambda * l1;
}

SparseCoder::SparseCoder(const SemanticDictionary& dict) : dict_(&dict) {
    const Matrix& d = dict.atoms;
    const std::size_t m = d.cols();
    gram_ = Matrix(m, m);
    for (std::size_t r = 0; r < d.rows(); ++r) add_outer(gram_, 1.0, d.row(r), d.row(r));
    // power iteration underestimates; pad so the step stays below 1/L_true
    lipschitz_ = 2.0 * largest_eigenvalue(gram_, 500) * 1.01;
}

std::vector<double> SparseCoder::encode(std::span<const double> f, int iterations, std::vector<double>* trace,
                                        std::span<const double> warm) const {
    const Matrix& d = dict_->atoms;
    const std::size_t m = d.cols();
    if (f.size() != d.rows())
        throw DomainError(fmt::format("sparse_encode: expected {} values, got {}", d.rows(), f.size()));
    std::vector<double> s(m, 0.0);
    if (!warm.empty()) s.assign(warm.begin(), warm.end());
    const double lambda = dict_->sparsity_lambda;
    if (trace) trace->push_back(sparse_objective(f, d, s, lambda));
    if (lipschitz_ <= 0.0) return s;  // all-zero dictionary

    std::vector<double> dtf(m);
    matvec_transposed(d, f, dtf);
    std::vector<double> gs(m);
    const double step = 2.0 / lipschitz_;
    const double thresh = lambda / lipschitz_;
    for (int it = 0; it < iterations; ++it) {
        matvec(gram_, s, gs);
        for (std::size_t j = 0; j < m; ++j) {
            const double v = s[j] - step * (gs[j] - dtf[j]);
            s[j] = v > thresh ? v - thresh : (v < -thresh ? v + thresh : 0.0);
        }
        if (trace) trace->push_back(sparse_objective(f, d, s, lambda));
    }
    return s;
}

std::vector<double> sparse_encode(std::span<const double> f, const SemanticDictionary& dict, int iterations,
                                  std::vector<double>* trace) {
    return SparseCoder(dict).encode(f, iterations, trace);
}

namespace {

double total_objective(const Matrix& x, const Matrix& atoms, const Matrix& codes, double lambda) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) total += sparse_objective(x.row(i), atoms, codes.row(i), lambda);
    return total;
}

void encode_all(const Matrix& x, const SemanticDictionary& dict, int iterations, Matrix& codes, bool warm) {
    const SparseCoder coder(dict);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto s = warm ? coder.encode(x.row(i), iterations, nullptr, codes.row(i))
                            : coder.encode(x.row(i), iterations);
        std::copy(s.begin(), s.end(), codes.row(i).begin());
    }
}

}  // namespace

DictionaryFit learn_dictionary(const Matrix& x, int atoms, double lambda, int iterations, int ista_iterations) {
    if (atoms < 1) throw DomainError("learn_dictionary: need at least one atom");
    const std::size_t n = x.rows();
    const std::size_t f = x.cols();
    const auto m = static_cast<std::size_t>(atoms);
    if (m > n) throw DomainError(fmt::format("learn_dictionary: {} atoms but only {} samples", m, n));

    DictionaryFit fit;
    SemanticDictionary& dict = fit.dictionary;
    dict.sparsity_lambda = lambda;
    dict.atoms = Matrix(f, m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto src = x.row(j * n / m);
        const double norm = std::sqrt(squared_norm(src));
        for (std::size_t r = 0; r < f; ++r)
            dict.atoms(r, j) = norm > 0.0 ? src[r] / norm : (r == j % f ? 1.0 : 0.0);
    }

    Matrix codes(n, m);
    encode_all(x, dict, ista_iterations, codes, false);
    double objective = total_objective(x, dict.atoms, codes, lambda);
    fit.objective_trace.push_back(objective);

    for (int it = 0; it < iterations; ++it) {
        // least squares D = X^T S (S^T S + eps I)^-1
        Matrix sts(m, m);
        Matrix stx(m, f);
        for (std::size_t i = 0; i < n; ++i) {
            add_outer(sts, 1.0, codes.row(i), codes.row(i));
            add_outer(stx, 1.0, codes.row(i), x.row(i));
        }
        double tr = 0.0;
        for (std::size_t j = 0; j < m; ++j) tr += sts(j, j);
        const double ridge = 1e-10 * tr / static_cast<double>(m) + 1e-12;
        for (std::size_t j = 0; j < m; ++j) sts(j, j) += ridge;
        const Matrix dt = cholesky_solve(sts, stx);

        SemanticDictionary candidate = dict;
        Matrix candidate_codes = codes;
        for (std::size_t j = 0; j < m; ++j) {
            double norm = 0.0;
            for (std::size_t r = 0; r < f; ++r) norm += dt(j, r) * dt(j, r);
            norm = std::sqrt(norm);
            if (norm < 1e-12) continue;  // unused atom: keep the previous one
            for (std::size_t r = 0; r < f; ++r) candidate.atoms(r, j) = dt(j, r) / norm;
            for (std::size_t i = 0; i < n; ++i) candidate_codes(i, j) *= norm;
        }
        const double cand_obj = total_objective(x, candidate.atoms, candidate_codes, lambda);
        if (cand_obj <= objective) {
            dict = std::move(candidate);
            codes = std::move(candidate_codes);
        }
        encode_all(x, dict, ista_iterations, codes, true);
        objective = total_objective(x, dict.atoms, codes, lambda);
        fit.objective_trace.push_back(objective);
    }
    return fit;
}

QuantizedPayload quantize(const Matrix& vectors, int bits, CodecMethod method, std::uint32_t original_dim) {
    if (!valid_bits(bits)) throw ConfigError(fmt::format("quantize: unsupported bit width {}", bits));
    const std::size_t n = vectors.rows();
    const std::size_t cd = vectors.cols();
    QuantizedPayload p;
    p.method = method;
    p.sample_count = static_cast<std::uint32_t>(n);
    p.original_dim = original_dim;
    p.coded_dim = static_cast<std::uint32_t>(cd);
    p.bits = static_cast<std::uint8_t>(bits);
    p.offset.assign(cd, 0.0f);
    p.scale.assign(cd, 0.0f);
    p.codes.resize(n * cd);

    if (bits == 32) {
        for (std::size_t i = 0; i < n * cd; ++i)
            p.codes[i] = std::bit_cast<std::uint32_t>(static_cast<float>(vectors.data()[i]));
        return p;
    }
    if (n == 0) return p;

    const double levels = std::ldexp(1.0, bits) - 1.0;
    constexpr float inf = std::numeric_limits<float>::infinity();
    for (std::size_t k = 0; k < cd; ++k) {
        double lo = vectors(0, k);
        double hi = lo;
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, vectors(i, k));
            hi = std::max(hi, vectors(i, k));
        }
        // stored as f32: widen outward so [a, a + b] still covers [lo, hi]. A
        // constant dimension gets b = 0 only when its value is representable;
        // otherwise the smallest covering scale keeps the error bound.
        float a = static_cast<float>(lo);
        if (static_cast<double>(a) > lo) a = std::nextafter(a, -inf);
        const double range = hi - static_cast<double>(a);
        float b = static_cast<float>(range);
        if (static_cast<double>(b) < range) b = std::nextafter(b, inf);
        p.offset[k] = a;
        p.scale[k] = b;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t code = 0;
            if (b > 0.0f) {
                const double t = (vectors(i, k) - a) / static_cast<double>(b) * levels;
                code = static_cast<std::uint32_t>(std::clamp(std::nearbyint(t), 0.0, levels));
            }
            p.codes[i * cd + k] = code;
        }
    }
    return p;
}

Matrix dequantize(const QuantizedPayload& p) {
    const std::size_t n = p.sample_count;
    const std::size_t cd = p.coded_dim;
    Matrix out(n, cd);
    if (p.bits == 32) {
        for (std::size_t i = 0; i < n * cd; ++i) out.data()[i] = std::bit_cast<float>(p.codes[i]);
        return out;
    }
    const double levels = std::ldexp(1.0, p.bits) - 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < cd; ++k)
            out(i, k) = static_cast<double>(p.offset[k]) +
                        static_cast<double>(p.codes[i * cd + k]) / levels * static_cast<double>(p.scale[k]);
    return out;
}

std::size_t payload_bytes(const QuantizedPayload& p) {
    const std::size_t cd = p.coded_dim;
    return kHeaderFixed + 8 * cd + static_cast<std::size_t>(p.sample_count) * cd * code_width(p.bits);
}

double compression_ratio(const QuantizedPayload& p) {
    const double raw = static_cast<double>(p.sample_count) * static_cast<double>(p.original_dim) * 4.0;
    if (raw == 0.0) return 0.0;
    return static_cast<double>(payload_bytes(p)) / raw;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
    pos += 4;
    return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_payload(const QuantizedPayload& p) {
    std::vector<std::uint8_t> out;
    out.reserve(payload_bytes(p));
    out.push_back(static_cast<std::uint8_t>(p.method));
    put_u32(out, p.sample_count);
    put_u32(out, p.original_dim);
    put_u32(out, p.coded_dim);
    out.push_back(p.bits);
    for (float v : p.offset) put_u32(out, std::bit_cast<std::uint32_t>(v));
    for (float v : p.scale) put_u32(out, std::bit_cast<std::uint32_t>(v));
    const std::size_t width = code_width(p.bits);
    for (std::uint32_t c : p.codes)
        for (std::size_t i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>(c >> (8 * i)));
    return out;
}

QuantizedPayload deserialize_payload(std::span<const std::uint8_t> in) {
    if (in.size() < kHeaderFixed) throw ProtocolError("payload: truncated header");
    QuantizedPayload p;
    std::size_t pos = 0;
    const std::uint8_t tag = in[pos++];
    if (tag > 2) throw ProtocolError(fmt::format("payload: unknown method tag {}", tag));
    p.method = static_cast<CodecMethod>(tag);
    p.sample_count = get_u32(in, pos);
    p.original_dim = get_u32(in, pos);
    p.coded_dim = get_u32(in, pos);
    p.bits = in[pos++];
    if (!valid_bits(p.bits)) throw ProtocolError(fmt::format("payload: invalid bit width {}", p.bits));
    if (payload_bytes(p) != in.size())
        throw ProtocolError(fmt::format("payload: expected {} bytes, got {}", payload_bytes(p), in.size()));
    const std::size_t cd = p.coded_dim;
    p.offset.resize(cd);
    p.scale.resize(cd);
    for (auto& v : p.offset) v = std::bit_cast<float>(get_u32(in, pos));
    for (auto& v : p.scale) v = std::bit_cast<float>(get_u32(in, pos));
    const std::size_t width = code_width(p.bits);
    const std::uint64_t limit = p.bits == 32 ? 0 : (std::uint64_t{1} << p.bits);
    p.codes.resize(static_cast<std::size_t>(p.sample_count) * cd);
    for (auto& c : p.codes) {
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint32_t>(in[pos++]) << (8 * i);
        if (limit != 0 && v >= limit) throw ProtocolError("payload: code exceeds bit width");
        c = v;
    }
    return p;
}

Codec fit_codec(const Matrix& features, const CompressionConfig& config) {
    config.validate();
    switch (config.method) {
        case CodecMethod::Pca: return fit_pca(features, config.ratio);
        case CodecMethod::Sparse:
            return learn_dictionary(features, config.dictionary_atoms, config.sparsity_lambda,
                                    config.dictionary_iterations, config.ista_iterations)
                .dictionary;
        case CodecMethod::Identity: return IdentityCodec{features.cols()};
    }
    throw ConfigError("compression.method: unknown");
}

CodecMethod codec_method(const Codec& codec) {
    if (std::holds_alternative<PcaCodec>(codec)) return CodecMethod::Pca;
    if (std::holds_alternative<SemanticDictionary>(codec)) return CodecMethod::Sparse;
    return CodecMethod::Identity;
}

std::size_t codec_setup_bytes(const Codec& codec) {
    if (const auto* pca = std::get_if<PcaCodec>(&codec)) return 4 * (pca->components.size() + pca->mean.size());
    if (const auto* dict = std::get_if<SemanticDictionary>(&codec)) return 4 * dict->atoms.size() + 4;
    return 0;
}

QuantizedPayload compress(const Matrix& features, const Codec& codec, const CompressionConfig& config) {
    const std::size_t n = features.rows();
    const auto f = static_cast<std::uint32_t>(features.cols());
    Matrix coded;
    if (const auto* pca = std::get_if<PcaCodec>(&codec)) {
        coded = Matrix(n, pca->coded_dim());
        for (std::size_t i = 0; i < n; ++i) {
            const auto z = pca_encode(features.row(i), *pca);
            std::copy(z.begin(), z.end(), coded.row(i).begin());
        }
    } else if (const auto* dict = std::get_if<SemanticDictionary>(&codec)) {
        const SparseCoder coder(*dict);
        coded = Matrix(n, dict->atoms.cols());
        for (std::size_t i = 0; i < n; ++i) {
            const auto s = coder.encode(features.row(i), config.ista_iterations);
            std::copy(s.begin(), s.end(), coded.row(i).begin());
        }
    } else {
        if (std::get<IdentityCodec>(codec).dim != features.cols()) throw DomainError("compress: dimension mismatch");
        coded = features;
    }
    return quantize(coded, config.bits, codec_method(codec), f);
}

Matrix decompress(const QuantizedPayload& payload, const Codec& codec) {
    if (payload.method != codec_method(codec))
        throw ProtocolError(fmt::format("decompress: payload method {} does not match codec {}",
                                        codec_method_name(payload.method), codec_method_name(codec_method(codec))));
    const Matrix coded = dequantize(payload);
    const std::size_t n = payload.sample_count;
    if (const auto* pca = std::get_if<PcaCodec>(&codec)) {
        if (payload.coded_dim != pca->coded_dim() || payload.original_dim != pca->input_dim())
            throw ProtocolError("decompress: payload dimensions do not match the PCA codec");
        Matrix out(n, pca->input_dim());
        for (std::size_t i = 0; i < n; ++i) {
            const auto f = pca_decode(coded.row(i), *pca);
            std::copy(f.begin(), f.end(), out.row(i).begin());
        }
        return out;
    }
    if (const auto* dict = std::get_if<SemanticDictionary>(&codec)) {
        if (payload.coded_dim != dict->atoms.cols() || payload.original_dim != dict->atoms.rows())
            throw ProtocolError("decompress: payload dimensions do not match the dictionary");
        Matrix out(n, dict->atoms.rows());
        for (std::size_t i = 0; i < n; ++i) matvec(dict->atoms, coded.row(i), out.row(i));
        return out;
    }
    const auto dim = std::get<IdentityCodec>(codec).dim;
    if (payload.coded_dim != dim || payload.original_dim != dim)
        throw ProtocolError("decompress: payload dimensions do not match the identity codec");
    return coded;
}

}  // namespace semfed
