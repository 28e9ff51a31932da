#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geodtr {

/// One record of the GDTR1 container. dtype 0 = 32-bit float,
/// 1 = 64-bit float; payload is row-major, little-endian.
struct NamedTensor {
  std::string name;
  std::uint8_t dtype = 1;
  std::vector<std::uint32_t> dims;
  std::vector<double> data;  // held as f64 regardless of file dtype

  std::size_t element_count() const;
};

/// Layout: magic "GDTR1", u32 record count, then per record
/// {u16 name length, name bytes, u8 dtype, u8 rank, rank x u32 dims,
/// payload}. All integers little-endian. Names must be unique.
void write_tensor_container(const std::string& path,
                            const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensor_container(const std::string& path);

}  // namespace geodtr
