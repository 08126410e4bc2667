#pragma once

#include <filesystem>

#include "fedsplit/bytes.hpp"
#include "fedsplit/nn/model.hpp"

namespace fedsplit {

// Binary model checkpoint.
//
//   "FSRL" | u16 version | u16 owner_len | owner | u16 layer_count
//   per layer: u16 id_len | id | u8 scope | u8 activation |
//              u32 in_dim | u32 out_dim | in*out f64 weights (row-major) |
//              out f64 bias
//
// All integers and doubles little-endian.
inline constexpr std::uint16_t kCheckpointVersion = 1;

Bytes encode_checkpoint(const SplitModel& model);
SplitModel decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const SplitModel& model, const std::filesystem::path& path);
SplitModel load_checkpoint(const std::filesystem::path& path);

}  // namespace fedsplit
