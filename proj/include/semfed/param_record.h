// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat binary parameter record shared by client and server checkpoints.
// Little-endian layout:
//
//   "SFPR" | u32 version | u32 n_meta | n_meta x i64 | u32 n_blocks |
//   per block: u32 rows | u32 cols | rows*cols x f64 (row-major)

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "semfed/matrix.h"

namespace semfed {

struct ParamRecord {
    std::vector<std::int64_t> meta;
    std::vector<Matrix> blocks;
};

void write_param_record(const std::filesystem::path& path, const ParamRecord& record);
ParamRecord read_param_record(const std::filesystem::path& path);

}  // namespace semfed
