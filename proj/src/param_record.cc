// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/param_record.h"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "semfed/errors.h"

namespace semfed {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'P', 'R'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    out.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError("parameter record truncated");
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(bytes[i]) << (8 * i);
    return static_cast<T>(u);
}

}  // namespace

void write_param_record(const std::filesystem::path& path, const ParamRecord& record) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(record.meta.size()));
    for (auto m : record.meta) put_le<std::int64_t>(out, m);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(record.blocks.size()));
    for (const Matrix& b : record.blocks) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.rows()));
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.cols()));
        for (double v : b.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    if (!out) throw IoError(fmt::format("write failed: {}", path.string()));
}

ParamRecord read_param_record(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError(fmt::format("{}: not a parameter record", path.string()));
    if (get_le<std::uint32_t>(in) != kVersion) throw IoError(fmt::format("{}: unsupported version", path.string()));
    ParamRecord rec;
    rec.meta.resize(get_le<std::uint32_t>(in));
    for (auto& m : rec.meta) m = get_le<std::int64_t>(in);
    rec.blocks.resize(get_le<std::uint32_t>(in));
    for (Matrix& b : rec.blocks) {
        const auto rows = get_le<std::uint32_t>(in);
        const auto cols = get_le<std::uint32_t>(in);
        b = Matrix(rows, cols);
        for (double& v : b.data()) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
    }
    return rec;
}

}  // namespace semfed
