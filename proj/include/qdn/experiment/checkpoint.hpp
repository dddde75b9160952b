#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdn/autodiff/parameter_store.hpp"

namespace qdn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[8] = {'Q', 'D', 'N', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Tensor {
  std::string name;
  std::vector<std::uint32_t> extents;
  std::vector<float> values;  // row-major
};

/// Layout, all little-endian: magic "QDNCKPT1", u32 version, u32 tensor
/// count, then per tensor u16 name length, name bytes, u8 rank, u32 extents,
/// f32 values.
std::vector<std::uint8_t> encode_checkpoint(const std::vector<Tensor>& tensors);
std::vector<Tensor> decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::filesystem::path& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_checkpoint(const std::filesystem::path& path);

/// Rank-2 tensors in store (name) order, values rounded to f32.
std::vector<Tensor> store_tensors(const ParameterStore& store);
void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store);

/// Overwrites every parameter of `store` from the file. Missing, extra or
/// mis-shaped tensors are errors. Optimizer moments are reset.
void load_checkpoint(const std::filesystem::path& path, ParameterStore& store);

}  // namespace qdn
