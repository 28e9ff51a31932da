#include "geodtr/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace geodtr {

namespace {

constexpr char kMagic[5] = {'G', 'D', 'T', 'R', '1'};

static_assert(std::endian::native == std::endian::little,
              "container writer assumes a little-endian host");

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& what) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("tensor container truncated reading " + what);
  return value;
}

}  // namespace

std::size_t NamedTensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

void write_tensor_container(const std::string& path,
                            const std::vector<NamedTensor>& tensors) {
  std::set<std::string> names;
  for (const auto& t : tensors) {
    if (!names.insert(t.name).second)
      throw std::invalid_argument("duplicate tensor name: " + t.name);
    if (t.data.size() != t.element_count())
      throw std::invalid_argument("tensor payload does not match dims: " + t.name);
    if (t.dtype > 1) throw std::invalid_argument("unknown dtype for " + t.name);
    if (t.name.size() > 0xffff) throw std::invalid_argument("tensor name too long");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint8_t>(out, t.dtype);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims.size()));
    for (std::uint32_t d : t.dims) put<std::uint32_t>(out, d);
    if (t.dtype == 1) {
      out.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    } else {
      for (double x : t.data) put<float>(out, static_cast<float>(x));
    }
  }
  if (!out) throw std::runtime_error("tensor container write failed: " + path);
}

std::vector<NamedTensor> read_tensor_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);

  char magic[5];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("bad container magic in " + path);

  const auto count = get<std::uint32_t>(in, "record count");
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  std::set<std::string> names;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto name_len = get<std::uint16_t>(in, "name length");
    t.name.resize(name_len);
    in.read(t.name.data(), name_len);
    if (!in) throw std::runtime_error("tensor container truncated reading name");
    if (!names.insert(t.name).second)
      throw std::runtime_error("duplicate tensor name in container: " + t.name);
    t.dtype = get<std::uint8_t>(in, t.name + " dtype");
    if (t.dtype > 1) throw std::runtime_error("unknown dtype for " + t.name);
    const auto rank = get<std::uint8_t>(in, t.name + " rank");
    t.dims.resize(rank);
    for (auto& d : t.dims) d = get<std::uint32_t>(in, t.name + " dims");
    t.data.resize(t.element_count());
    if (t.dtype == 1) {
      in.read(reinterpret_cast<char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
      if (!in) throw std::runtime_error("tensor container truncated reading " + t.name);
    } else {
      for (auto& x : t.data) x = get<float>(in, t.name + " payload");
    }
    tensors.push_back(std::move(t));
  }
  return tensors;
}

}  // namespace geodtr
