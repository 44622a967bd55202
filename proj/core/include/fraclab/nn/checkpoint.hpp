#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fraclab/nn/network.hpp"

namespace fraclab::nn {

inline constexpr char kCheckpointMagic[8] = {'F', 'R', 'C', 'L',
                                             'N', 'N', '0', '1'};

struct Checkpoint {
  NetworkConfig config;
  ModelParameters params;
  // Free-form label of what the model predicts ("mu", "nu", "both", "delay").
  std::string target;
};

// Layout, all integers little-endian:
//   "FRCLNN01"
//   u32 length, JSON block {config..., rng_state, target}
//   per tensor: u16 name length, name (UTF-8), u8 rank, u32 dims[rank],
//               f64 values
//   u32 CRC-32 of every preceding byte
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);

/// VersionError on a foreign magic, CorruptionError on a checksum mismatch or
/// a short file, DataError when tensors do not fit the stored config.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string config_to_json(const NetworkConfig& config);
NetworkConfig config_from_json(const std::string& text);

}  // namespace fraclab::nn
