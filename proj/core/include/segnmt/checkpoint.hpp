#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "segnmt/rnnenc.hpp"

namespace segnmt {

/// Binary checkpoint layout (all integers u32 little-endian):
///
///   "SEGNMTCK" | version | d_emb | d_hidden | K_source | K_target
///   | tensor count | { name length | name | rows | cols | f32[rows*cols] }
///
/// Tensor data is row-major IEEE-754 binary32, little-endian. Parameters are
/// held in double precision in memory and rounded to float on save.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const GruEncDecParams& params);
GruEncDecParams read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path,
                     const GruEncDecParams& params);
GruEncDecParams load_checkpoint(const std::filesystem::path& path);

/// Rounds every parameter to binary32, the precision a checkpoint keeps.
void round_to_checkpoint_precision(GruEncDecParams& params);

}  // namespace segnmt
