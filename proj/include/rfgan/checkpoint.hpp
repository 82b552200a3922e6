#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rfgan/tensor.hpp"

namespace rfgan {

using NamedTensors = std::vector<std::pair<std::string, TensorF>>;

// Checkpoint container: little-endian, magic "RFGN", version u32, count u32,
// then per tensor: name length u16 + UTF-8 name, rank u8, dims u32[],
// dtype tag u8 (0 = f32), raw f32 data.
void save_checkpoint(const std::string& path, const NamedTensors& tensors);
NamedTensors load_checkpoint(const std::string& path);

// Lookup helper; throws when the name is missing.
const TensorF& find_tensor(const NamedTensors& tensors, const std::string& name);
bool has_tensor(const NamedTensors& tensors, const std::string& name);

} // namespace rfgan
