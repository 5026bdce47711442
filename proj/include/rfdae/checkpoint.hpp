#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rfdae/model.hpp"

namespace rfdae {

inline constexpr char kCheckpointMagic[8] = {'R', 'F', 'D', 'A', 'E', '\0', '\0', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Checkpoint little-endian layout:
//   magic "RFDAE\0\0\0" | u32 version
//   ModelConfig: u32 m, n, H, depth, clf width 1, clf width 2, K, final_relu, transform;
//                f64 lambda, mask_rate, dropout_rate
//   per tensor in DaeModel::for_each_tensor order: u32 rank | rank x u32 dims | f32 payload
//   u32 CRC32 of all preceding bytes
// Weights are rounded to f32 on write.
std::vector<std::uint8_t> encode_checkpoint(const DaeModel& model);
DaeModel decode_checkpoint(std::span<const std::uint8_t> bytes);

void checkpoint_write(const DaeModel& model, const std::filesystem::path& path);
DaeModel checkpoint_read(const std::filesystem::path& path);

}  // namespace rfdae
