// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "semfed/codec.h"
#include "semfed/errors.h"
#include "semfed/linalg.h"
#include "support.h"

using namespace semfed;
using testing::random_matrix;
using testing::random_vector;

namespace {

// Rows with a decaying spectrum so the discarded mass is non-trivial.
Matrix spectral_fixture(std::size_t n, std::size_t f, Rng& rng) {
    Matrix basis = random_matrix(f, f, rng);
    Matrix x(n, f);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < f; ++k) {
            const double z = rng.normal() * std::pow(0.8, static_cast<double>(k));
            for (std::size_t j = 0; j < f; ++j) x(i, j) += z * basis(k, j);
        }
    for (std::size_t j = 0; j < f; ++j) {
        const double shift = rng.uniform(-2, 2);
        for (std::size_t i = 0; i < n; ++i) x(i, j) += shift;
    }
    return x;
}

Eigen::VectorXd oracle_eigenvalues(const Matrix& x) {
    Eigen::MatrixXd m(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x(i, j);
    const Eigen::MatrixXd centered = m.rowwise() - m.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    return es.eigenvalues().reverse();  // descending
}

double reconstruction_mse(const Matrix& x, const PcaCodec& c) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto back = pca_decode(pca_encode(x.row(i), c), c);
        total += squared_distance(back, x.row(i));
    }
    return total / static_cast<double>(x.rows());
}

SemanticDictionary orthonormal_dictionary(std::size_t f, std::size_t m, Rng& rng, double lambda) {
    // Gram-Schmidt on random columns
    Matrix a(f, m);
    for (std::size_t j = 0; j < m; ++j) {
        auto v = random_vector(f, rng);
        for (std::size_t p = 0; p < j; ++p) {
            double d = 0.0;
            for (std::size_t i = 0; i < f; ++i) d += v[i] * a(i, p);
            for (std::size_t i = 0; i < f; ++i) v[i] -= d * a(i, p);
        }
        const double norm = std::sqrt(squared_norm(v));
        for (std::size_t i = 0; i < f; ++i) a(i, j) = v[i] / norm;
    }
    return {a, lambda};
}

SemanticDictionary random_dictionary(std::size_t f, std::size_t m, Rng& rng, double lambda) {
    Matrix a = random_matrix(f, m, rng);
    for (std::size_t j = 0; j < m; ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < f; ++i) norm += a(i, j) * a(i, j);
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < f; ++i) a(i, j) /= norm;
    }
    return {a, lambda};
}

std::vector<double> column(const Matrix& a, std::size_t j) {
    std::vector<double> v(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) v[i] = a(i, j);
    return v;
}

}  // namespace

TEST_CASE("pca rank arithmetic") {
    CHECK(pca_rank(128, 0.4) == 51);
    CHECK(pca_rank(128, 1.0) == 128);
    CHECK(pca_rank(10, 0.01) == 1);
    CHECK(pca_rank(128, 0.35) == 45);
}

TEST_CASE("pca needs two samples") {
    CHECK_THROWS_AS(fit_pca(Matrix(1, 4, 1.0), 0.5), DomainError);
    CHECK_THROWS_AS(fit_pca(Matrix(5, 4, 1.0), 0.0), DomainError);
}

TEST_CASE("pca matches an eigendecomposition oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t f = 2 + rng.below(31);
        const std::size_t n = 3 + rng.below(60);
        const double ratio = rng.uniform(0.05, 1.0);
        const auto x = spectral_fixture(n, f, rng);
        const auto codec = fit_pca(x, ratio);
        const auto oracle = oracle_eigenvalues(x);
        const std::size_t r = codec.coded_dim();
        CHECK(r == pca_rank(f, ratio));
        REQUIRE(codec.eigenvalues.size() == f);
        double discarded = 0.0;
        for (std::size_t k = 0; k < f; ++k) {
            CHECK(codec.eigenvalues[k] == doctest::Approx(oracle(static_cast<Eigen::Index>(k))).epsilon(1e-9));
            if (k >= r) discarded += oracle(static_cast<Eigen::Index>(k));
        }
        CAPTURE(f);
        CAPTURE(n);
        CHECK(std::abs(reconstruction_mse(x, codec) - discarded) <= 1e-6);
        for (std::size_t a = 0; a < r; ++a)
            for (std::size_t b = 0; b < r; ++b) {
                double d = 0.0;
                for (std::size_t i = 0; i < f; ++i) d += codec.components(i, a) * codec.components(i, b);
                CHECK(std::abs(d - (a == b ? 1.0 : 0.0)) <= 1e-9);
            }
    }
}

TEST_CASE("full-rank pca round trips") {
    Rng rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t f = 2 + rng.below(31);
        const auto x = spectral_fixture(5 + rng.below(40), f, rng);
        const auto codec = fit_pca(x, 1.0);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const auto back = pca_decode(pca_encode(x.row(i), codec), codec);
            CHECK(std::sqrt(squared_distance(back, x.row(i))) <= 1e-5 * std::sqrt(squared_norm(x.row(i))));
        }
    }
}

TEST_CASE("pca examples") {
    Rng rng(33);
    // rank-1 data along a line through the mean
    const auto dir = random_vector(6, rng);
    const auto base = random_vector(6, rng);
    Matrix x(20, 6);
    for (std::size_t i = 0; i < 20; ++i) {
        const double t = rng.uniform(-3, 3);
        for (std::size_t j = 0; j < 6; ++j) x(i, j) = base[j] + t * dir[j];
    }
    const auto codec = fit_pca(x, 1.0 / 6.0);
    REQUIRE(codec.coded_dim() == 1);
    for (std::size_t i = 0; i < 20; ++i) {
        const auto back = pca_decode(pca_encode(x.row(i), codec), codec);
        CHECK(std::sqrt(squared_distance(back, x.row(i))) <= 1e-6);
    }
    // the mean encodes to zero and decodes to itself
    const auto z = pca_encode(codec.mean, codec);
    CHECK(std::abs(z[0]) <= 1e-12);
    const auto m = pca_decode(z, codec);
    for (std::size_t j = 0; j < 6; ++j) CHECK(m[j] == doctest::Approx(codec.mean[j]));
    CHECK_THROWS_AS(pca_encode(std::vector<double>(5, 0.0), codec), DomainError);
    CHECK_THROWS_AS(pca_decode(std::vector<double>(2, 0.0), codec), DomainError);
}

TEST_CASE("vectors in the retained subspace round trip exactly") {
    Rng rng(34);
    const auto x = spectral_fixture(40, 12, rng);
    const auto codec = fit_pca(x, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> f = codec.mean;
        for (std::size_t k = 0; k < codec.coded_dim(); ++k) {
            const double w = rng.uniform(-2, 2);
            for (std::size_t j = 0; j < 12; ++j) f[j] += w * codec.components(j, k);
        }
        const auto back = pca_decode(pca_encode(f, codec), codec);
        CHECK(std::sqrt(squared_distance(back, f)) <= 1e-6);
    }
}

TEST_CASE("reconstruction error is orthogonal to the retained subspace") {
    Rng rng(35);
    const auto x = spectral_fixture(30, 10, rng);
    const auto codec = fit_pca(x, 0.3);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto back = pca_decode(pca_encode(x.row(i), codec), codec);
        std::vector<double> resid(10);
        for (std::size_t j = 0; j < 10; ++j) resid[j] = x(i, j) - back[j];
        for (std::size_t k = 0; k < codec.coded_dim(); ++k) CHECK(std::abs(dot(resid, column(codec.components, k))) <= 1e-9);
    }
}

TEST_CASE("raising the ratio never raises the fitting error") {
    Rng rng(36);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = spectral_fixture(50, 16, rng);
        double prev = 1e300;
        for (double ratio = 0.05; ratio <= 1.0; ratio += 0.05) {
            const double err = reconstruction_mse(x, fit_pca(x, ratio));
            CHECK(err <= prev + 1e-12);
            prev = err;
        }
    }
}

TEST_CASE("symmetric eigen solver agrees with Eigen") {
    Rng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(20);
        auto a = random_matrix(n, n, rng);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);
        Eigen::MatrixXd e(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
        const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e).eigenvalues().reverse();
        const auto got = symmetric_eigen(a);
        for (std::size_t k = 0; k < n; ++k)
            CHECK(got.values[k] == doctest::Approx(ref(static_cast<Eigen::Index>(k))).epsilon(1e-10));
        // a Rayleigh quotient never overshoots; the sparse coder's 1.01 margin
        // needs the estimate within 1% from below
        const double top = std::pow(std::max(std::abs(ref(0)), std::abs(ref(static_cast<Eigen::Index>(n - 1)))), 2);
        const double est = largest_eigenvalue(matmul(a.transposed(), a), 500);
        CHECK(est <= top * (1.0 + 1e-12));
        CHECK(est * 1.01 >= top);
    }
}

TEST_CASE("ista objective never increases") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t f = 4 + rng.below(30);
        const std::size_t m = 2 + rng.below(40);
        const auto dict = random_dictionary(f, m, rng, std::pow(10.0, rng.uniform(-4, 0)));
        const auto x = random_vector(f, rng, -2, 2);
        std::vector<double> trace;
        const SparseCoder coder(dict);
        coder.encode(x, 60, &trace);
        REQUIRE(trace.size() == 61);
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
    }
}

TEST_CASE("ista examples") {
    Rng rng(42);
    const auto dict = random_dictionary(16, 10, rng, 1e-4);
    for (std::size_t j = 0; j < 10; ++j) {
        const auto atom = column(dict.atoms, j);
        const auto s = sparse_encode(atom, dict, 2000);
        std::size_t best = 0;
        for (std::size_t k = 1; k < s.size(); ++k)
            if (std::abs(s[k]) > std::abs(s[best])) best = k;
        CHECK(best == j);
        std::vector<double> recon(16, 0.0);
        matvec(dict.atoms, s, recon);
        CHECK(std::sqrt(squared_distance(recon, atom)) < 1e-3);
    }
    // dead zone: lambda >= 2 ||D^T f||_inf kills every coefficient in one step
    const auto f = random_vector(16, rng);
    std::vector<double> corr(10);
    matvec_transposed(dict.atoms, f, corr);
    double inf_norm = 0.0;
    for (double c : corr) inf_norm = std::max(inf_norm, std::abs(c));
    const SemanticDictionary strong{dict.atoms, 2.0 * inf_norm};
    for (double v : sparse_encode(f, strong, 1)) CHECK(v == 0.0);
    for (double v : sparse_encode(std::vector<double>(16, 0.0), dict, 50)) CHECK(v == 0.0);
    CHECK(SparseCoder(dict).lipschitz() > 0.0);
}

TEST_CASE("dictionary learning objective never increases") {
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t f = 4 + rng.below(12);
        const int m = 2 + static_cast<int>(rng.below(8));
        const auto x = random_matrix(static_cast<std::size_t>(m) + 5 + rng.below(30), f, rng);
        const auto fit = learn_dictionary(x, m, std::pow(10.0, rng.uniform(-3, -0.5)), 8, 30);
        REQUIRE(fit.objective_trace.size() == 9);
        for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
            CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] + 1e-8);
        for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j)
            CHECK(squared_norm(column(fit.dictionary.atoms, j)) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("dictionary learning examples") {
    Rng rng(44);
    const auto planted = orthonormal_dictionary(12, 5, rng, 0.0);
    Matrix x(5, 12);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 12; ++j) x(i, j) = planted.atoms(j, i);
    const auto fit = learn_dictionary(x, 5, 1e-9, 15, 200);
    CHECK(fit.objective_trace.back() < 1e-6);

    const auto y = random_matrix(20, 8, rng);
    const auto big = learn_dictionary(y, 4, 1e6, 3, 20);
    double energy = 0.0;
    for (double v : y.data()) energy += v * v;
    CHECK(big.objective_trace.back() == doctest::Approx(energy).epsilon(1e-12));
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (double v : sparse_encode(y.row(i), big.dictionary, 20)) CHECK(v == 0.0);

    CHECK_THROWS_AS(learn_dictionary(random_matrix(3, 8, rng), 4, 0.1, 2), DomainError);
}

TEST_CASE("quantization examples") {
    // a constant dimension round trips exactly when its value fits the f32 offset
    Matrix constant(6, 3);
    for (std::size_t i = 0; i < 6; ++i) {
        constant(i, 0) = 0.375;
        constant(i, 1) = -4.0 + static_cast<double>(i);
        constant(i, 2) = 0.37;
    }
    const auto p = quantize(constant, 8, CodecMethod::Pca, 3);
    CHECK(p.scale[0] == 0.0f);
    const auto back = dequantize(p);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(back(i, 0) == 0.375);
        CHECK(std::abs(back(i, 2) - 0.37) <= static_cast<double>(p.scale[2]) / 510.0);
        CHECK(std::abs(back(i, 2) - 0.37) <= 1e-9);
    }

    Matrix ends(2, 1);
    ends(0, 0) = 0.0;
    ends(1, 0) = 1.0;
    const auto q = quantize(ends, 8, CodecMethod::Pca, 1);
    CHECK(q.codes == std::vector<std::uint32_t>{0, 255});
    const auto eb = dequantize(q);
    CHECK(eb(0, 0) == 0.0);
    CHECK(eb(1, 0) == 1.0);

    Rng rng(45);
    const auto u = random_matrix(500, 4, rng, 0.0, 1.0);
    const auto deq = dequantize(quantize(u, 8, CodecMethod::Pca, 4));
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(u.data()[i] - deq.data()[i]) <= 1.0 / 510.0);

    CHECK_THROWS_AS(quantize(u, 0, CodecMethod::Pca, 4), ConfigError);
    CHECK_THROWS_AS(quantize(u, 17, CodecMethod::Pca, 4), ConfigError);
}

TEST_CASE("quantization error bound on random payloads") {
    Rng rng(46);
    long violations = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const int bits = std::array{4, 8, 12, 16}[rng.below(4)];
        const auto x = random_matrix(1 + rng.below(30), 1 + rng.below(12), rng, -std::exp(rng.uniform(-5, 5)),
                                     std::exp(rng.uniform(-5, 5)));
        const auto p = quantize(x, bits, CodecMethod::Sparse, static_cast<std::uint32_t>(x.cols()));
        const auto back = dequantize(p);
        const double levels = std::ldexp(1.0, bits) - 1.0;
        for (std::size_t k = 0; k < x.cols(); ++k) {
            double lo = x(0, k), hi = x(0, k);
            for (std::size_t i = 0; i < x.rows(); ++i) {
                lo = std::min(lo, x(i, k));
                hi = std::max(hi, x(i, k));
            }
            // the transmitted range is the data range up to f32 rounding of offset and scale
            CHECK(static_cast<double>(p.scale[k]) >= hi - lo);
            CHECK(static_cast<double>(p.scale[k]) - (hi - lo) <= 4e-7 * std::max(std::abs(lo), std::abs(hi)));
            for (std::size_t i = 0; i < x.rows(); ++i)
                if (std::abs(x(i, k) - back(i, k)) > static_cast<double>(p.scale[k]) / (2.0 * levels)) ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("32-bit payloads are float passthrough") {
    Rng rng(47);
    const auto x = random_matrix(7, 5, rng);
    const auto back = dequantize(quantize(x, 32, CodecMethod::Identity, 5));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back.data()[i] == static_cast<double>(static_cast<float>(x.data()[i])));
}

TEST_CASE("payload size arithmetic") {
    QuantizedPayload p;
    p.sample_count = 200;
    p.original_dim = 128;
    p.coded_dim = 51;
    p.bits = 8;
    // tag 1 + dims 12 + bits 1 + offsets and scales 8 * 51 + codes 200 * 51
    CHECK(payload_bytes(p) == 1 + 12 + 1 + 408 + 10200);
    CHECK(compression_ratio(p) == doctest::Approx(10622.0 / 102400.0));
    p.bits = 12;
    CHECK(payload_bytes(p) == 14 + 408 + 200 * 51 * 2);
    p.bits = 32;
    p.coded_dim = 128;
    CHECK(compression_ratio(p) > 1.0);
    p.sample_count = 0;
    CHECK(compression_ratio(p) == 0.0);
}

TEST_CASE("wire format round trips and rejects malformed buffers") {
    Rng rng(48);
    for (int bits : {1, 3, 8, 12, 16, 32}) {
        const auto x = random_matrix(9, 6, rng);
        const auto p = quantize(x, bits, CodecMethod::Pca, 20);
        const auto bytes = serialize_payload(p);
        CHECK(bytes.size() == payload_bytes(p));
        CHECK(deserialize_payload(bytes) == p);
    }
    const auto p = quantize(random_matrix(3, 2, rng), 8, CodecMethod::Sparse, 4);
    auto bytes = serialize_payload(p);
    CHECK(bytes[0] == 1);
    CHECK(bytes[13] == 8);
    // little-endian sample count
    CHECK(bytes[1] == 3);
    CHECK(bytes[2] == 0);
    auto bad = bytes;
    bad[0] = 7;
    CHECK_THROWS_AS(deserialize_payload(bad), ProtocolError);
    bad = bytes;
    bad[13] = 20;
    CHECK_THROWS_AS(deserialize_payload(bad), ProtocolError);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(deserialize_payload(bad), ProtocolError);
    CHECK_THROWS_AS(deserialize_payload(std::vector<std::uint8_t>(5, 0)), ProtocolError);
    auto q = quantize(random_matrix(3, 2, rng), 4, CodecMethod::Pca, 2);
    auto qb = serialize_payload(q);
    qb.back() = 0xff;
    CHECK_THROWS_AS(deserialize_payload(qb), ProtocolError);
}

TEST_CASE("end-to-end pca at full rank and 16 bits") {
    Rng rng(49);
    const auto x = spectral_fixture(60, 10, rng);
    CompressionConfig cfg;
    cfg.ratio = 1.0;
    cfg.bits = 16;
    const auto codec = fit_codec(x, cfg);
    const auto back = decompress(compress(x, codec, cfg), codec);
    for (std::size_t i = 0; i < x.rows(); ++i)
        CHECK(std::sqrt(squared_distance(back.row(i), x.row(i))) < 1e-3 * std::sqrt(squared_norm(x.row(i))));
}

TEST_CASE("sparse codec keeps class structure on planted atoms") {
    Rng rng(50);
    const std::size_t f = 16, classes = 4;
    const auto planted = orthonormal_dictionary(f, classes, rng, 0.0);
    Matrix x(200, f);
    std::vector<int> labels(200);
    for (std::size_t i = 0; i < 200; ++i) {
        labels[i] = static_cast<int>(i % classes);
        const double amp = rng.uniform(0.5, 1.5);
        for (std::size_t j = 0; j < f; ++j)
            x(i, j) = amp * planted.atoms(j, static_cast<std::size_t>(labels[i])) + 0.05 * rng.normal();
    }
    CompressionConfig cfg;
    cfg.method = CodecMethod::Sparse;
    cfg.dictionary_atoms = 8;
    cfg.sparsity_lambda = 0.01;
    const auto codec = fit_codec(x, cfg);
    const auto back = decompress(compress(x, codec, cfg), codec);

    auto nearest_centroid = [&](const Matrix& data) {
        Matrix centroid(classes, f);
        std::vector<double> count(classes, 0.0);
        for (std::size_t i = 0; i < data.rows(); ++i) {
            axpy(1.0, data.row(i), centroid.row(static_cast<std::size_t>(labels[i])));
            count[static_cast<std::size_t>(labels[i])] += 1.0;
        }
        for (std::size_t c = 0; c < classes; ++c)
            for (double& v : centroid.row(c)) v /= count[c];
        std::vector<int> pred(data.rows());
        for (std::size_t i = 0; i < data.rows(); ++i) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < classes; ++c)
                if (squared_distance(data.row(i), centroid.row(c)) < squared_distance(data.row(i), centroid.row(best)))
                    best = c;
            pred[i] = static_cast<int>(best);
        }
        return pred;
    };
    const auto raw = nearest_centroid(x);
    const auto dec = nearest_centroid(back);
    int agree = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) agree += raw[i] == dec[i] ? 1 : 0;
    CHECK(agree >= 190);
}

TEST_CASE("decompress checks the codec") {
    Rng rng(51);
    const auto x = spectral_fixture(30, 8, rng);
    CompressionConfig pca;
    const auto codec = fit_codec(x, pca);
    const auto payload = compress(x, codec, pca);
    CHECK(codec_method(codec) == CodecMethod::Pca);
    CHECK(codec_setup_bytes(codec) == 4 * (8 * pca_rank(8, 0.4) + 8));
    const Codec ident = IdentityCodec{8};
    CHECK_THROWS_AS(decompress(payload, ident), ProtocolError);
    CompressionConfig narrow = pca;
    narrow.ratio = 0.9;
    const auto other = fit_codec(x, narrow);
    CHECK_THROWS_AS(decompress(payload, other), ProtocolError);
    const auto empty = compress(Matrix(0, 8), codec, pca);
    CHECK(empty.sample_count == 0);
    CHECK(decompress(empty, codec).rows() == 0);
    CHECK(codec_setup_bytes(ident) == 0);
}

TEST_CASE("identity codec costs more than raw") {
    Rng rng(52);
    const auto x = random_matrix(20, 16, rng);
    CompressionConfig cfg;
    cfg.method = CodecMethod::Identity;
    cfg.bits = 32;
    const auto codec = fit_codec(x, cfg);
    const auto p = compress(x, codec, cfg);
    CHECK(compression_ratio(p) > 1.0);
    const auto back = decompress(p, codec);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back.data()[i] == static_cast<double>(static_cast<float>(x.data()[i])));
}

TEST_CASE("codec config validation") {
    CompressionConfig c;
    CHECK_NOTHROW(c.validate());
    c.ratio = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.bits = 20;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    for (auto m : {CodecMethod::Pca, CodecMethod::Sparse, CodecMethod::Identity})
        CHECK(parse_codec_method(codec_method_name(m)) == m);
}
