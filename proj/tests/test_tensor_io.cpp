#include "geodtr/tensor_io.hpp"
#include "geodtr/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;
using namespace geodtr;

namespace {

std::string temp_file(const std::string& tag) {
  return (fs::temp_directory_path() / ("geodtr_tio_" + tag + ".gdtr")).string();
}

NamedTensor make_tensor(const std::string& name, std::vector<std::uint32_t> dims,
                        std::uint64_t seed, std::uint8_t dtype = 1) {
  NamedTensor t;
  t.name = name;
  t.dtype = dtype;
  t.dims = std::move(dims);
  t.data.resize(t.element_count());
  Rng rng(seed);
  for (auto& x : t.data) x = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("f64 round trip is value-exact") {
  const std::string path = temp_file("roundtrip");
  const NamedTensor a = make_tensor("a", {2, 3}, 1);
  const NamedTensor b = make_tensor("weights/b", {4}, 2);
  NamedTensor scalar;
  scalar.name = "step";
  scalar.data = {42.0};
  write_tensor_container(path, {a, b, scalar});

  const auto back = read_tensor_container(path);
  REQUIRE(back.size() == 3);
  CHECK(back[0].name == "a");
  CHECK(back[0].dims == std::vector<std::uint32_t>{2, 3});
  CHECK(back[0].data == a.data);
  CHECK(back[1].data == b.data);
  CHECK(back[2].dims.empty());
  CHECK(back[2].data == std::vector<double>{42.0});
}

TEST_CASE("f32 payloads round trip through float precision") {
  const std::string path = temp_file("f32");
  const NamedTensor t = make_tensor("half", {8}, 3, 0);
  write_tensor_container(path, {t});
  const auto back = read_tensor_container(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].dtype == 0);
  for (size_t i = 0; i < t.data.size(); ++i)
    CHECK(back[0].data[i] == static_cast<double>(static_cast<float>(t.data[i])));
}

TEST_CASE("duplicate names are rejected on write") {
  const std::string path = temp_file("dup");
  const NamedTensor t = make_tensor("same", {2}, 4);
  CHECK_THROWS_AS(write_tensor_container(path, {t, t}), std::invalid_argument);
}

TEST_CASE("corrupted magic is a format error") {
  const std::string path = temp_file("magic");
  write_tensor_container(path, {make_tensor("x", {2}, 5)});
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("BOGUS", 5);
  }
  CHECK_THROWS_AS(read_tensor_container(path), std::runtime_error);
}

TEST_CASE("truncated payload is detected") {
  const std::string path = temp_file("trunc");
  write_tensor_container(path, {make_tensor("x", {16, 16}, 6)});
  const auto size = fs::file_size(path);
  fs::resize_file(path, size - 64);
  CHECK_THROWS_AS(read_tensor_container(path), std::runtime_error);
}

TEST_CASE("mismatched payload size is rejected on write") {
  NamedTensor bad = make_tensor("x", {4, 4}, 7);
  bad.data.resize(3);
  CHECK_THROWS_AS(write_tensor_container(temp_file("mismatch"), {bad}),
                  std::invalid_argument);
}

TEST_CASE("random containers round trip") {
  Rng rng(8);
  for (int round = 0; round < 5; ++round) {
    std::vector<NamedTensor> tensors;
    const int n = 1 + static_cast<int>(rng.uniform_int(4));
    for (int i = 0; i < n; ++i) {
      std::vector<std::uint32_t> dims;
      const int rank = static_cast<int>(rng.uniform_int(4));
      for (int d = 0; d < rank; ++d)
        dims.push_back(1 + static_cast<std::uint32_t>(rng.uniform_int(5)));
      tensors.push_back(make_tensor("t" + std::to_string(i), dims, rng.next_u64()));
    }
    const std::string path = temp_file("rand" + std::to_string(round));
    write_tensor_container(path, tensors);
    const auto back = read_tensor_container(path);
    REQUIRE(back.size() == tensors.size());
    for (size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].name == tensors[i].name);
      CHECK(back[i].dims == tensors[i].dims);
      CHECK(back[i].data == tensors[i].data);
    }
  }
}
