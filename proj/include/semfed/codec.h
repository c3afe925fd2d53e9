// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Feature codecs: client-specific PCA, a learned sparse dictionary, and the
// per-dimension affine quantizer whose wire layout defines communication cost.
//
// Wire layout (little-endian):
//   u8  method tag (0 pca, 1 sparse, 2 identity)
//   u32 sample_count, u32 original_dim, u32 coded_dim
//   u8  bits
//   f32 offsets[coded_dim], f32 scales[coded_dim]
//   codes[sample_count * coded_dim], ceil(bits/8) bytes each, row-major
//
// bits == 32 is a float passthrough: codes carry IEEE-754 bit patterns and the
// offsets/scales are written as zeros.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "semfed/matrix.h"

namespace semfed {

enum class CodecMethod : std::uint8_t { Pca = 0, Sparse = 1, Identity = 2 };

const char* codec_method_name(CodecMethod m);
CodecMethod parse_codec_method(const std::string& s);

struct PcaCodec {
    Matrix components;         ///< F x r, orthonormal columns
    std::vector<double> mean;  ///< F
    std::vector<double> eigenvalues;  ///< all F eigenvalues of the 1/n covariance, descending
    double ratio = 1.0;

    std::size_t input_dim() const { return components.rows(); }
    std::size_t coded_dim() const { return components.cols(); }
};

struct SemanticDictionary {
    Matrix atoms;  ///< F x m, unit-norm columns
    double sparsity_lambda = 0.0;
};

/// Passthrough codec (no reduction).
struct IdentityCodec {
    std::size_t dim = 0;
};

using Codec = std::variant<PcaCodec, SemanticDictionary, IdentityCodec>;

struct QuantizedPayload {
    CodecMethod method = CodecMethod::Pca;
    std::uint32_t sample_count = 0;
    std::uint32_t original_dim = 0;
    std::uint32_t coded_dim = 0;
    std::uint8_t bits = 8;
    std::vector<float> offset;  ///< a_k per coded dimension
    std::vector<float> scale;   ///< b_k per coded dimension, >= 0
    std::vector<std::uint32_t> codes;  ///< sample_count x coded_dim, row-major

    friend bool operator==(const QuantizedPayload&, const QuantizedPayload&) = default;
};

struct CompressionConfig {
    CodecMethod method = CodecMethod::Pca;
    double ratio = 0.4;
    int bits = 8;  ///< 1..16, or 32 for float passthrough
    int dictionary_atoms = 64;
    double sparsity_lambda = 0.01;
    int ista_iterations = 50;
    int dictionary_iterations = 15;

    void validate() const;
};

/// r = max(1, round(ratio * F)).
std::size_t pca_rank(std::size_t feature_dim, double ratio);

/// Rows of `features` are samples. Throws DomainError for fewer than 2 samples.
PcaCodec fit_pca(const Matrix& features, double ratio);
std::vector<double> pca_encode(std::span<const double> f, const PcaCodec& codec);
std::vector<double> pca_decode(std::span<const double> z, const PcaCodec& codec);

/// ||f - D s||^2 + lambda ||s||_1
double sparse_objective(std::span<const double> f, const Matrix& atoms, std::span<const double> s, double lambda);

/// ISTA with step 1/L, L = 2 * lambda_max(D^T D) (the Lipschitz constant of the
/// gradient of the squared residual). Caches the Gram matrix across calls.
class SparseCoder {
public:
    explicit SparseCoder(const SemanticDictionary& dict);

    /// From zero unless `warm` is given. When `trace` is non-null, appends the
    /// objective before the first step and after every step.
    std::vector<double> encode(std::span<const double> f, int iterations, std::vector<double>* trace = nullptr,
                               std::span<const double> warm = {}) const;

    double lipschitz() const { return lipschitz_; }

private:
    const SemanticDictionary* dict_;
    Matrix gram_;
    double lipschitz_ = 0.0;
};

std::vector<double> sparse_encode(std::span<const double> f, const SemanticDictionary& dict, int iterations,
                                  std::vector<double>* trace = nullptr);

struct DictionaryFit {
    SemanticDictionary dictionary;
    std::vector<double> objective_trace;  ///< total objective after each alternation, index 0 = initial
};

/// Alternates ISTA coding (warm-started) with a least-squares dictionary update
/// and column renormalization. A dictionary update that would raise the total
/// objective is rejected. Throws DomainError when m > sample count.
DictionaryFit learn_dictionary(const Matrix& features, int atoms, double lambda, int iterations,
                               int ista_iterations = 50);

/// Rows are vectors. Throws ConfigError for unsupported bit widths.
QuantizedPayload quantize(const Matrix& vectors, int bits, CodecMethod method, std::uint32_t original_dim);
Matrix dequantize(const QuantizedPayload& payload);

std::size_t payload_bytes(const QuantizedPayload& payload);
/// payload_bytes / (sample_count * original_dim * 4)
double compression_ratio(const QuantizedPayload& payload);

std::vector<std::uint8_t> serialize_payload(const QuantizedPayload& payload);
/// Throws ProtocolError on a malformed buffer.
QuantizedPayload deserialize_payload(std::span<const std::uint8_t> bytes);

/// Fits the configured codec on one client's features (rows are samples).
Codec fit_codec(const Matrix& features, const CompressionConfig& config);
CodecMethod codec_method(const Codec& codec);
/// Bytes needed to ship the codec parameters once (f32 each).
std::size_t codec_setup_bytes(const Codec& codec);

/// Encodes every row and quantizes with `bits`.
QuantizedPayload compress(const Matrix& features, const Codec& codec, const CompressionConfig& config);
/// Dequantize then decode. Throws ProtocolError when the payload method or
/// dimensions do not match the codec.
Matrix decompress(const QuantizedPayload& payload, const Codec& codec);

}  // namespace semfed
